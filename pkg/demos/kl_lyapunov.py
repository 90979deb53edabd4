"""KL divergence to an equilibrium as a Lyapunov function, three ways.

Integrates three classic 2- and 3-strategy games and monitors
KL(target || x(t)) along each path:

- hawk-dove: interior ESS, the divergence decays monotonically to zero;
- rock-paper-scissors: zero-sum cycling, the divergence is conserved;
- coordination: the center is unstable, the divergence increases.

Run directly:  python3 demos/kl_lyapunov.py
"""

import numpy as np

from simplexdyn import (
    Linear,
    Replicator,
    SimplexPoint,
    ess_check,
    integrate,
    lyapunov_monitor,
)

HAWK_DOVE = np.array([[-1.0, 2.0], [0.0, 1.0]])
RPS = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])
COORDINATION = np.eye(2)


def run(name, matrix, x0, target, dt, steps):
    traj = integrate(Replicator(Linear(matrix)), SimplexPoint(x0), dt, steps,
                     SimplexPoint(target))
    rep = lyapunov_monitor(traj, SimplexPoint(target))
    print(f"{name}:")
    print(f"  KL start {rep.initial_value:.6f} -> end {rep.final_value:.3e}")
    print(f"  monotone decrease: {rep.monotone}   largest rise: {rep.max_increase:.3e}")
    print(f"  converged (<= 1e-6): {rep.converged}")
    if traj.truncated:
        print(f"  (stopped early: {traj.failure})")
    return rep


def main():
    run("hawk-dove, interior attractor", HAWK_DOVE,
        np.array([0.9, 0.1]), np.array([0.5, 0.5]), 0.01, 5000)

    rep = run("rock-paper-scissors, conserved", RPS,
              np.array([0.5, 0.25, 0.25]), np.full(3, 1.0 / 3.0), 1e-3, 20000)
    print("  |KL(t) - KL(0)| stays within %.3e" %
          np.max(np.abs(np.array(rep.values) - rep.values[0])))

    run("coordination, repelling center", COORDINATION,
        np.array([0.55, 0.45]), np.array([0.5, 0.5]), 0.01, 2000)

    # ------------------------------------------------------------------
    # sampled stability of the two candidate rest points
    # ------------------------------------------------------------------
    center = SimplexPoint(np.array([0.5, 0.5]))
    for name, matrix in (("hawk-dove", HAWK_DOVE), ("coordination", COORDINATION)):
        rep = ess_check(center, Linear(matrix), radius=0.2, samples=1000, seed=7)
        print(f"\ness check, {name} center: is_ess={rep.is_ess} "
              f"min margin {rep.min_margin:+.3e} "
              f"({rep.indeterminate} indeterminate of {rep.samples_tested})")


if __name__ == "__main__":
    main()
