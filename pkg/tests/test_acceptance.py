"""End-to-end acceptance suite: one test and one printed verdict per claim.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
``[PASS]``/``[FAIL]`` lines.  Each test freezes its sampling seeds and step
sizes so the verdicts are reproducible bit for bit.
"""

import contextlib
import json
import subprocess
import sys
from pathlib import Path

import numpy as np

from simplexdyn import (
    CoupledReplicator,
    CoupledState,
    Custom,
    Linear,
    LogLinear,
    LotkaVolterra,
    OrthantPoint,
    Replicator,
    Scaled,
    ShiftedLotkaVolterra,
    SimplexPoint,
    coupled_ess_check,
    coupled_exp_family_solver,
    ess_check,
    exp_family_solver,
    fisher_metric_at,
    fisher_theorem_check,
    gradient_consistency_check,
    integrate,
    kl_formula,
    localize_divergence,
    lv_correspondence_residual,
    lyapunov_monitor,
    metric_at,
    potential_information_sum,
)

HAWK_DOVE = np.array([[-1.0, 2.0], [0.0, 1.0]])
RPS = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])
PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])

REPO = Path(__file__).resolve().parents[1]


@contextlib.contextmanager
def criterion(num: int, label: str):
    """Print exactly one verdict line for the enclosed assertions."""
    try:
        yield
    except BaseException:
        print(f"[FAIL] criterion {num:02d}: {label}")
        raise
    else:
        print(f"[PASS] criterion {num:02d}: {label}")


def _interior(rng, n):
    p = rng.uniform(0.05, 1.0, n)
    return p / p.sum()


def test_criterion_01_fisher_matrix_equals_metric():
    rng = np.random.default_rng(1)
    worst = 0.0
    for n in (2, 3, 4, 5):
        for _ in range(250):
            x = SimplexPoint(_interior(rng, n))
            gap = np.max(np.abs(fisher_metric_at(x).diag - metric_at(x).diag))
            worst = max(worst, float(gap))
    with criterion(1, "Fisher information equals the 1/x metric on dims 2-5"):
        assert worst <= 1e-12, f"worst gap {worst:.3e}"


def test_criterion_02_kl_localizes_to_the_metric():
    rng = np.random.default_rng(2)
    worst_diag, worst_off = 0.0, 0.0
    signs = set()
    for _ in range(100):
        p = rng.uniform(0.7, 1.3, 3)
        x = SimplexPoint(p / p.sum())
        rep = localize_divergence(kl_formula, x, h=1e-3)
        worst_diag = max(worst_diag, float(np.max(np.abs(rep.metric.diag - metric_at(x).diag))))
        worst_off = max(worst_off, rep.max_offdiag)
        signs.add(rep.sign)
    # second-order stencil: halving h divides the defect by about four
    probe = SimplexPoint(np.array([0.5, 0.3, 0.2]))
    exact = metric_at(probe).diag
    err = lambda h: np.max(
        np.abs(localize_divergence(kl_formula, probe, h).metric.diag - exact)
    )
    ratio = err(2e-3) / err(1e-3)
    with criterion(2, "KL cross-derivative localizes to the metric at h=1e-3"):
        assert worst_diag <= 1e-4, f"worst diagonal gap {worst_diag:.3e}"
        assert worst_off <= 1e-3, f"worst off-diagonal {worst_off:.3e}"
        assert signs == {-1}, f"unexpected signs {signs}"
        assert 3.5 <= ratio <= 4.5, f"h-refinement ratio {ratio:.3f}"


def test_criterion_03_metric_gradient_defining_property():
    rng = np.random.default_rng(3)
    worst = 0.0
    k = 0
    for n in (3, 4):
        for _ in range(500):
            x = SimplexPoint(_interior(rng, n))
            grad = rng.uniform(-2.0, 2.0, n)
            worst = max(worst, gradient_consistency_check(x, grad, probes=4, seed=k))
            k += 1
    with criterion(3, "metric gradient satisfies its defining property"):
        assert worst <= 1e-10, f"worst defect {worst:.3e}"


def test_criterion_04_mean_fitness_growth_equals_variance():
    rng = np.random.default_rng(42)
    coarse, fine = [], []
    for _ in range(10):
        b = rng.uniform(-1.0, 1.0, (3, 3))
        a = (b + b.T) / 2.0
        x0 = SimplexPoint(_interior(rng, 3))
        coarse.append(fisher_theorem_check(integrate(Replicator(Linear(a)), x0, 1e-3, 5000)))
        fine.append(fisher_theorem_check(integrate(Replicator(Linear(a)), x0, 2.5e-4, 20000)))
    with criterion(4, "potential growth rate matches payoff variance (10 random games)"):
        assert max(coarse) <= 1e-5, f"worst residual {max(coarse):.3e}"
        assert max(coarse) / max(fine) >= 10.0, (
            f"residual shrank only {max(coarse) / max(fine):.1f}x under dt/4"
        )


def test_criterion_05_hawk_dove_interior_attractor():
    center = SimplexPoint(np.array([0.5, 0.5]))
    rng = np.random.default_rng(5)
    all_monotone, all_converged = True, True
    for _ in range(20):
        x0 = SimplexPoint(_interior(rng, 2))
        rep = lyapunov_monitor(integrate(Replicator(Linear(HAWK_DOVE)), x0, 0.01, 5000, center), center)
        all_monotone &= rep.monotone
        all_converged &= rep.converged
    ess = ess_check(center, Linear(HAWK_DOVE), radius=0.2, samples=1000, seed=7)
    expected = (2.0 * ess.samples[:, 0] - 1.0) ** 2 / 2.0
    margin_gap = float(np.max(np.abs(ess.margins - expected)))
    with criterion(5, "hawk-dove mixed point: ESS, margins quadratic, KL decays"):
        assert all_monotone and all_converged
        assert ess.is_ess
        assert margin_gap <= 1e-12, f"margin formula gap {margin_gap:.3e}"


def test_criterion_06_coordination_center_repels():
    center = SimplexPoint(np.array([0.5, 0.5]))
    eye = Linear(np.eye(2))
    ess = ess_check(center, eye, radius=0.2, samples=1000, seed=7)
    rng = np.random.default_rng(6)
    any_monotone = False
    for _ in range(20):
        x0 = SimplexPoint(_interior(rng, 2))
        rep = lyapunov_monitor(integrate(Replicator(eye), x0, 0.01, 5000, center), center)
        any_monotone |= rep.monotone
    with criterion(6, "coordination center: not an ESS, KL to it rises"):
        assert not ess.is_ess and ess.min_margin < 0.0
        assert not any_monotone


def test_criterion_07_rps_conserves_kl_to_barycenter():
    target = SimplexPoint(np.full(3, 1.0 / 3.0))
    traj = integrate(
        Replicator(Linear(RPS)), SimplexPoint(np.array([0.5, 0.25, 0.25])), 1e-3, 100000, target
    )
    values = traj.diagnostics.divergence_to_target
    drift = float(np.max(np.abs(values - values[0])))
    with criterion(7, "zero-sum cycling conserves KL to the barycenter"):
        assert drift <= 1e-6, f"drift {drift:.3e}"


def test_criterion_08_payoff_scaling_rescales_time_only():
    center = SimplexPoint(np.array([0.5, 0.5]))
    x0 = SimplexPoint(np.array([0.9, 0.1]))
    base = Linear(HAWK_DOVE)
    worst_gap = 0.0
    all_monotone = True
    for c in (0.5, 2.0, 10.0):
        scaled = integrate(Replicator(Scaled(base, c)), x0, 0.005, 10000, center)
        reference = integrate(Replicator(base), x0, 0.005 * c, 10000, center)
        worst_gap = max(worst_gap, float(np.max(np.abs(scaled.states - reference.states))))
        all_monotone &= lyapunov_monitor(scaled, center).monotone
    with criterion(8, "scaling payoffs by c>0 only rescales time"):
        assert all_monotone
        assert worst_gap <= 1e-4, f"worst trajectory gap {worst_gap:.3e}"


def test_criterion_09_lotka_volterra_normalizes_to_replicator():
    traj = integrate(LotkaVolterra(Linear(RPS)), OrthantPoint(np.array([2.0, 1.0, 1.0])), 1e-3, 5000)
    residual = lv_correspondence_residual(traj)
    const = integrate(
        LotkaVolterra(LogLinear(np.zeros((2, 2)), np.array([1.0, 2.0]))),
        OrthantPoint(np.array([1.0, 1.0])),
        1e-3,
        1000,
    )
    growth_err = float(np.max(np.abs(const.final_state - np.array([np.e, np.e**2]))))
    with criterion(9, "abundance flow matches replicator form after normalizing"):
        assert residual <= 1e-5, f"correspondence residual {residual:.3e}"
        assert growth_err <= 1e-6, f"exponential growth error {growth_err:.3e}"


def test_criterion_10_denormalized_divergence_decays_on_the_ray():
    f = Custom(lambda x: HAWK_DOVE @ (x / x.sum()))
    target = OrthantPoint(np.array([1.0, 1.0]))
    traj = integrate(ShiftedLotkaVolterra(f), OrthantPoint(np.array([3.0, 1.0])), 0.01, 5000, target)
    rep = lyapunov_monitor(traj, target)
    with criterion(10, "shifted abundance flow: divergence to the target ray decays"):
        assert rep.monotone and rep.max_increase == 0.0
        assert rep.parallel_before_convergence == 0


def test_criterion_11_exponential_coordinates_reproduce_the_flow():
    x0 = SimplexPoint(np.array([0.9, 0.1]))
    direct = integrate(Replicator(Linear(HAWK_DOVE)), x0, 1e-3, 10000)
    ef = exp_family_solver(Linear(HAWK_DOVE), x0, 1e-3, 10000)
    single_gap = float(np.max(np.abs(direct.states - ef.states)))

    state0 = CoupledState(
        SimplexPoint(np.array([0.6, 0.4])), SimplexPoint(np.array([0.5, 0.5]))
    )
    f, g = Linear(PENNIES), Linear(-PENNIES.T)
    cdirect = integrate(CoupledReplicator(f, g), state0, 1e-3, 10000)
    cef = coupled_exp_family_solver(f, g, state0, 1e-3, 10000)
    coupled_gap = float(np.max(np.abs(cdirect.states - cef.states)))

    def normalizer_residual(dt, steps):
        traj = exp_family_solver(Linear(HAWK_DOVE), x0, dt, steps)
        G = traj.diagnostics.normalizer
        dG = (G[2:] - G[:-2]) / (2.0 * dt)
        return float(np.max(np.abs(dG - traj.diagnostics.mean_fitness[1:-1])))

    ratio = normalizer_residual(1e-3, 5000) / normalizer_residual(5e-4, 10000)
    with criterion(11, "exponential-coordinate solver reproduces both flows"):
        assert single_gap <= 1e-6, f"single-population gap {single_gap:.3e}"
        assert coupled_gap <= 1e-6, f"coupled gap {coupled_gap:.3e}"
        assert 3.0 <= ratio <= 5.0, f"normalizer-derivative refinement ratio {ratio:.3f}"


def test_criterion_12_matching_pennies_conserves_summed_kl():
    center = SimplexPoint(np.array([0.5, 0.5]))
    state0 = CoupledState(
        SimplexPoint(np.array([0.6, 0.4])), SimplexPoint(np.array([0.5, 0.5]))
    )
    f, g = Linear(PENNIES), Linear(-PENNIES.T)
    target = CoupledState(center, center)
    traj = integrate(CoupledReplicator(f, g), state0, 1e-3, 100000, target)
    values = traj.diagnostics.divergence_to_target
    drift = float(np.max(np.abs(values - values[0])))
    start_sum = potential_information_sum(
        [center, center], [SimplexPoint(state0.pop1), SimplexPoint(state0.pop2)]
    )
    ess = coupled_ess_check(center, center, f, g, radius=0.1, samples=500, seed=13)
    with criterion(12, "matching pennies conserves the summed KL potential"):
        assert drift <= 1e-5, f"drift {drift:.3e}"
        assert abs(values[0] - start_sum) <= 1e-12
        assert ess.indeterminate == 500 and not ess.is_ess
        assert float(np.max(np.abs(ess.margins))) <= 1e-12


def test_criterion_13_cli_runs_scenarios_deterministically(tmp_path):
    env_cmd = [sys.executable, "-m", "simplexdyn"]
    configs = [
        str(REPO / "scenarios" / "hawk_dove.json"),
        str(REPO / "scenarios" / "rps_conservation.json"),
    ]
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    r1 = subprocess.run(
        env_cmd + ["simulate", "--config", *configs, "--out", str(out1), "--quiet"],
        capture_output=True,
        text=True,
    )
    r2 = subprocess.run(
        env_cmd + ["simulate", "--config", *configs, "--out", str(out2), "--quiet"],
        capture_output=True,
        text=True,
    )
    identical = all(
        (out1 / name).read_bytes() == (out2 / name).read_bytes()
        for name in (
            "hawk_dove_trajectory.csv",
            "hawk_dove_report.json",
            "rps_trajectory.csv",
            "rps_report.json",
        )
    )

    bad = tmp_path / "bad.json"
    cfg = json.loads((REPO / "scenarios" / "hawk_dove.json").read_text())
    cfg["dt"] = -1
    bad.write_text(json.dumps(cfg))
    r_bad = subprocess.run(
        env_cmd + ["simulate", "--config", str(bad), "--out", str(tmp_path / "o1"), "--quiet"],
        capture_output=True,
        text=True,
    )

    failing = tmp_path / "failing.json"
    cfg = json.loads((REPO / "scenarios" / "rps_conservation.json").read_text())
    cfg["name"] = "rps_fail"
    cfg["checks"] = [{"name": "ess", "radius": 0.1, "samples": 100, "seed": 11}]
    del cfg["outputs"]
    failing.write_text(json.dumps(cfg))
    r_fail = subprocess.run(
        env_cmd + ["simulate", "--config", str(failing), "--out", str(tmp_path / "o2"), "--quiet"],
        capture_output=True,
        text=True,
    )

    with criterion(13, "CLI: deterministic outputs, exit 0/1/2 as documented"):
        assert r1.returncode == 0 and r2.returncode == 0, r1.stderr + r2.stderr
        assert identical
        assert r_bad.returncode == 1 and "dt" in r_bad.stderr
        assert r_fail.returncode == 2
