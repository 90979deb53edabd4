"""Abundance dynamics on the positive orthant and their simplex shadows.

Three experiments:

1. integrate dx_i = x_i f_i(x) for the cyclic 3-species game and verify
   that the normalized frequencies obey the replicator equation (central
   difference residual);
2. constant per-capita rates grow exponentially and normalize to a
   logistic-style frequency curve with a closed form to compare against;
3. the shifted variant dx_i = x_i (f_i - |x|) with payoffs read from the
   frequency vector: abundances approach a target ray, and the
   denormalized divergence to that ray decays monotonically.

Run directly:  python3 demos/lotka_volterra_normalization.py
"""

import numpy as np

from simplexdyn import (
    Custom,
    Linear,
    LogLinear,
    LotkaVolterra,
    OrthantPoint,
    ShiftedLotkaVolterra,
    integrate,
    lv_correspondence_residual,
    lyapunov_monitor,
    normalize_lv_trajectory,
)

RPS = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])
HAWK_DOVE = np.array([[-1.0, 2.0], [0.0, 1.0]])


def main():
    # ------------------------------------------------------------------
    # 1. normalization carries the abundance flow onto replicator form
    # ------------------------------------------------------------------
    traj = integrate(LotkaVolterra(Linear(RPS)), OrthantPoint(np.array([2.0, 1.0, 1.0])),
                     1e-3, 5000)
    print("cyclic 3-species abundances, start (2, 1, 1):")
    print("  final abundances:", traj.final_state)
    print("  final total: %.6f" % traj.final_state.sum())
    print("  replicator-form residual of the normalized path: %.3e"
          % lv_correspondence_residual(traj))

    freq = normalize_lv_trajectory(traj)
    print("  final frequencies:", freq.states[-1])

    # ------------------------------------------------------------------
    # 2. constant rates: x_i(t) = x_i(0) e^{f_i t}, frequencies follow
    # ------------------------------------------------------------------
    const = LogLinear(np.zeros((2, 2)), np.array([1.0, 2.0]))
    traj = integrate(LotkaVolterra(const), OrthantPoint(np.array([1.0, 1.0])), 1e-3, 1000)
    expected = np.array([np.e, np.e**2])
    print("\nconstant rates (1, 2) from (1, 1), t = 1:")
    print("  integrated:", traj.final_state)
    print("  closed form:", expected)
    print("  error: %.3e" % np.max(np.abs(traj.final_state - expected)))
    freq = normalize_lv_trajectory(traj)
    print("  final frequency of species 2: %.6f (exact %.6f)"
          % (freq.states[-1][1], np.e / (1.0 + np.e)))

    # ------------------------------------------------------------------
    # 3. shifted variant: divergence to a target ray decays
    # ------------------------------------------------------------------
    f = Custom(lambda x: HAWK_DOVE @ (x / x.sum()))
    target = OrthantPoint(np.array([1.0, 1.0]))
    traj = integrate(ShiftedLotkaVolterra(f), OrthantPoint(np.array([3.0, 1.0])),
                     0.01, 5000, target)
    rep = lyapunov_monitor(traj, target)
    print("\nshifted flow toward the ray through (1, 1), start (3, 1):")
    print("  divergence start %.6f -> end %.6f" % (rep.initial_value, rep.final_value))
    print("  monotone: %s   largest rise: %.3e" % (rep.monotone, rep.max_increase))
    print("  states parallel to the ray before convergence: %d"
          % rep.parallel_before_convergence)
    print("  final abundances:", traj.final_state,
          " frequencies:", traj.final_state / traj.final_state.sum())


if __name__ == "__main__":
    main()
