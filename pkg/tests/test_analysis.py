"""Stability certification, Lyapunov monitoring, and the two identity checks.

The margin oracles are exact algebra for 2x2 games: with payoff matrix
[[-1, 2], [0, 1]] the stability margin of (0.5, 0.5) against p is
(2 p1 - 1)^2 / 2, and the identity matrix flips its sign.  Antisymmetric
matrices give margin exactly 0 against a central candidate.
"""

import numpy as np
import pytest

from simplexdyn import (
    CoupledReplicator,
    CoupledState,
    Custom,
    DimensionMismatchError,
    KindMismatchError,
    Linear,
    LogLinear,
    LotkaVolterra,
    NotSymmetricError,
    OrthantPoint,
    RadiusTooLargeError,
    Replicator,
    ShiftedLotkaVolterra,
    SimplexPoint,
    barycenter,
    coupled_ess_check,
    denormalized_ess_check,
    ess_check,
    fisher_theorem_check,
    gradient_consistency_check,
    integrate,
    kl,
    lyapunov_monitor,
)

RPS = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])
HAWK_DOVE = np.array([[-1.0, 2.0], [0.0, 1.0]])
PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])
CENTER = SimplexPoint(np.array([0.5, 0.5]))


# ---------------------------------------------------------------------------
# ess_check
# ---------------------------------------------------------------------------


def test_ess_hawk_dove_margins_match_closed_form():
    report = ess_check(CENTER, Linear(HAWK_DOVE), 0.2, 1000, 7)
    assert report.is_ess
    assert report.min_margin > 0.0
    assert report.samples_tested == 1000
    predicted = (2.0 * report.samples[:, 0] - 1.0) ** 2 / 2.0
    np.testing.assert_allclose(report.margins, predicted, rtol=0, atol=1e-9)


def test_ess_rps_barycenter_is_neutral():
    report = ess_check(barycenter(3), Linear(RPS), 0.1, 300, 6)
    assert not report.is_ess
    assert abs(report.min_margin) <= 1e-12
    assert report.indeterminate == 300


def test_ess_coordination_center_is_rejected():
    report = ess_check(CENTER, Linear(np.eye(2)), 0.2, 300, 4)
    assert not report.is_ess
    assert report.min_margin < 0.0
    predicted = -((2.0 * report.samples[:, 0] - 1.0) ** 2) / 2.0
    np.testing.assert_allclose(report.margins, predicted, rtol=0, atol=1e-9)


def test_ess_samples_stay_in_the_ball_and_on_the_simplex():
    report = ess_check(CENTER, Linear(HAWK_DOVE), 0.15, 500, 2)
    sums = report.samples.sum(axis=1)
    np.testing.assert_allclose(sums, 1.0, rtol=0, atol=1e-12)
    assert np.all(report.samples > 0.0)
    dists = np.linalg.norm(report.samples - CENTER.coords, axis=1)
    assert np.max(dists) <= 0.15 + 1e-12


def test_ess_is_deterministic_given_seed():
    a = ess_check(CENTER, Linear(HAWK_DOVE), 0.2, 100, 42)
    b = ess_check(CENTER, Linear(HAWK_DOVE), 0.2, 100, 42)
    np.testing.assert_array_equal(a.samples, b.samples)
    np.testing.assert_array_equal(a.margins, b.margins)
    c = ess_check(CENTER, Linear(HAWK_DOVE), 0.2, 100, 43)
    assert not np.array_equal(a.samples, c.samples)


def test_ess_radius_too_large_near_boundary():
    with pytest.raises(RadiusTooLargeError):
        ess_check(SimplexPoint(np.array([0.98, 0.02])), Linear(HAWK_DOVE), 0.1, 200, 0)


def test_ess_rejects_bad_sampling_parameters():
    with pytest.raises(ValueError):
        ess_check(CENTER, Linear(HAWK_DOVE), -0.1, 10, 0)
    with pytest.raises(ValueError):
        ess_check(CENTER, Linear(HAWK_DOVE), 0.1, 0, 0)


# ---------------------------------------------------------------------------
# coupled and denormalized variants
# ---------------------------------------------------------------------------


def test_coupled_ess_from_independent_populations():
    # each population plays its own hawk-dove game; the summed margin is the
    # sum of two single-population margins, so stability carries over
    f_own = Custom(lambda own, other: HAWK_DOVE @ own)
    report = coupled_ess_check(CENTER, CENTER, f_own, f_own, 0.2, 400, 3)
    assert report.is_ess
    predicted = (2.0 * report.samples[:, 0] - 1.0) ** 2 / 2.0 + (
        2.0 * report.samples[:, 2] - 1.0
    ) ** 2 / 2.0
    np.testing.assert_allclose(report.margins, predicted, rtol=0, atol=1e-9)


def test_coupled_ess_matching_pennies_identically_zero():
    report = coupled_ess_check(
        CENTER, CENTER, Linear(PENNIES), Linear(-PENNIES.T), 0.1, 500, 13
    )
    assert not report.is_ess
    assert np.max(np.abs(report.margins)) <= 1e-12
    assert report.indeterminate == 500


def test_coupled_ess_flat_payoffs():
    flat = Custom(lambda own, other: np.full(own.size, 2.0))
    report = coupled_ess_check(CENTER, CENTER, flat, flat, 0.1, 100, 1)
    assert not report.is_ess
    assert np.max(np.abs(report.margins)) <= 1e-12


def test_denormalized_ess_hawk_dove():
    land = Custom(lambda x: HAWK_DOVE @ (x / x.sum()))
    for cand in ([1.0, 1.0], [2.0, 2.0]):
        report = denormalized_ess_check(OrthantPoint(np.array(cand)), land, 0.3, 400, 9)
        assert report.is_ess
        y1 = report.samples[:, 0] / report.samples.sum(axis=1)
        predicted = (2.0 * y1 - 1.0) ** 2 / 2.0
        np.testing.assert_allclose(report.margins, predicted, rtol=0, atol=1e-9)
        assert report.parallel_samples == 0


def test_denormalized_ess_zero_payoff():
    zero = Custom(lambda x: np.zeros(x.size))
    report = denormalized_ess_check(OrthantPoint(np.array([1.0, 1.0])), zero, 0.3, 100, 5)
    assert not report.is_ess
    assert np.max(np.abs(report.margins)) == 0.0


def test_denormalized_parallel_detection():
    from simplexdyn.analysis import _sine_to_direction

    states = np.array([[2.0, 2.0], [3.0, 1.0], [0.5, 0.5]])
    sines = _sine_to_direction(states, np.array([1.0, 1.0]))
    assert sines[0] <= 1e-12 and sines[2] <= 1e-12
    assert sines[1] > 0.1


# ---------------------------------------------------------------------------
# lyapunov_monitor
# ---------------------------------------------------------------------------


def test_lyapunov_hawk_dove_descends_and_converges():
    traj = integrate(
        Replicator(Linear(HAWK_DOVE)), SimplexPoint(np.array([0.9, 0.1])), 0.01, 5000
    )
    report = lyapunov_monitor(traj, CENTER)
    assert report.monotone
    assert report.converged
    assert report.max_increase <= 1e-9
    assert report.initial_value == pytest.approx(
        kl(CENTER, SimplexPoint(np.array([0.9, 0.1]))), abs=1e-14
    )
    assert report.values.shape == (len(traj),)


def test_lyapunov_rps_is_conserved():
    traj = integrate(
        Replicator(Linear(RPS)), SimplexPoint(np.array([0.5, 0.25, 0.25])), 1e-3, 20000
    )
    report = lyapunov_monitor(traj, barycenter(3))
    assert abs(report.final_value - report.initial_value) <= 1e-6
    assert report.monotone  # numerical wiggle stays under the slack
    assert not report.converged


def test_lyapunov_constant_trajectory_at_target():
    traj = integrate(Replicator(Linear(RPS)), barycenter(3), 0.1, 20)
    report = lyapunov_monitor(traj, barycenter(3))
    assert report.monotone and report.converged
    assert report.final_value <= 1e-12
    assert report.max_increase == 0.0


def test_lyapunov_coupled_uses_summed_divergence():
    p0 = SimplexPoint(np.array([0.6, 0.4]))
    q0 = SimplexPoint(np.array([0.3, 0.7]))
    s0 = CoupledState(p0, q0)
    target = CoupledState(CENTER, CENTER)
    traj = integrate(CoupledReplicator(Linear(PENNIES), Linear(-PENNIES.T)), s0, 1e-3, 10)
    report = lyapunov_monitor(traj, target)
    assert report.initial_value == pytest.approx(
        kl(CENTER, p0) + kl(CENTER, q0), abs=1e-14
    )


def test_lyapunov_shifted_lv_descends_without_parallel_states():
    land = Custom(lambda x: HAWK_DOVE @ (x / x.sum()))
    traj = integrate(
        ShiftedLotkaVolterra(land), OrthantPoint(np.array([3.0, 1.0])), 0.01, 5000
    )
    report = lyapunov_monitor(traj, OrthantPoint(np.array([1.0, 1.0])))
    assert report.monotone
    assert report.max_increase == 0.0
    assert report.parallel_before_convergence == 0


def test_lyapunov_kind_and_dimension_guards():
    traj = integrate(Replicator(Linear(HAWK_DOVE)), CENTER, 0.1, 5)
    with pytest.raises(KindMismatchError):
        lyapunov_monitor(traj, OrthantPoint(np.array([1.0, 1.0])))
    with pytest.raises(DimensionMismatchError):
        lyapunov_monitor(traj, barycenter(3))
    lv = integrate(
        LotkaVolterra(LogLinear(np.zeros((2, 2)), np.array([1.0, 1.0]))),
        OrthantPoint(np.array([1.0, 1.0])),
        0.1,
        5,
    )
    with pytest.raises(KindMismatchError):
        lyapunov_monitor(lv, CENTER)


# ---------------------------------------------------------------------------
# fisher_theorem_check
# ---------------------------------------------------------------------------


def test_fisher_theorem_random_symmetric_matrix():
    rng = np.random.default_rng(55)
    M = rng.uniform(-1.0, 1.0, size=(3, 3))
    A = (M + M.T) / 2.0
    raw = rng.uniform(0.1, 1.0, size=3)
    traj = integrate(Replicator(Linear(A)), SimplexPoint(raw / raw.sum()), 1e-3, 1000)
    assert fisher_theorem_check(traj) <= 1e-5


def test_fisher_theorem_residual_shrinks_quadratically():
    rng = np.random.default_rng(56)
    M = rng.uniform(-1.0, 1.0, size=(3, 3))
    A = (M + M.T) / 2.0
    raw = rng.uniform(0.1, 1.0, size=3)
    x0 = SimplexPoint(raw / raw.sum())
    coarse = fisher_theorem_check(integrate(Replicator(Linear(A)), x0, 2e-3, 500))
    fine = fisher_theorem_check(integrate(Replicator(Linear(A)), x0, 1e-3, 1000))
    assert 3.0 <= coarse / fine <= 5.0


def test_fisher_theorem_flat_matrix_has_zero_residual():
    traj = integrate(Replicator(Linear(np.ones((3, 3)))), barycenter(3), 0.01, 50)
    assert fisher_theorem_check(traj) <= 1e-12


def test_fisher_theorem_instantaneous_value():
    # at (0.5, 0.5) with A = diag(1, 2): dV/dt = variance = 0.0625
    traj = integrate(Replicator(Linear(np.diag([1.0, 2.0]))), CENTER, 1e-4, 10)
    assert traj.diagnostics.fitness_variance[0] == pytest.approx(0.0625, abs=1e-12)
    assert fisher_theorem_check(traj) <= 1e-7


def test_fisher_theorem_guards():
    with pytest.raises(NotSymmetricError):
        fisher_theorem_check(
            integrate(Replicator(Linear(HAWK_DOVE)), CENTER, 0.01, 10)
        )
    lv = integrate(
        LotkaVolterra(LogLinear(np.zeros((2, 2)), np.array([1.0, 1.0]))),
        OrthantPoint(np.array([1.0, 1.0])),
        0.01,
        10,
    )
    with pytest.raises(KindMismatchError):
        fisher_theorem_check(lv)
    nonlinear = integrate(
        Replicator(LogLinear(np.eye(2), np.zeros(2))), CENTER, 0.01, 10
    )
    with pytest.raises(KindMismatchError):
        fisher_theorem_check(nonlinear)


# ---------------------------------------------------------------------------
# gradient_consistency_check
# ---------------------------------------------------------------------------


def test_gradient_consistency_constant_gradient():
    assert gradient_consistency_check(barycenter(3), np.full(3, 4.0), 50, 0) <= 1e-12


def test_gradient_consistency_examples():
    x = SimplexPoint(np.array([0.5, 0.25, 0.25]))
    assert gradient_consistency_check(x, RPS @ x.coords, 100, 1) <= 1e-12
    assert gradient_consistency_check(barycenter(3), np.array([1.0, 2.0, 3.0]), 100, 2) <= 1e-12


def test_gradient_consistency_random_pairs():
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 6))
        raw = rng.uniform(0.05, 1.0, size=n)
        x = SimplexPoint(raw / raw.sum())
        grad = rng.standard_normal(n)
        worst = max(worst, gradient_consistency_check(x, grad, 4, int(rng.integers(1 << 31))))
    assert worst <= 1e-10


def test_gradient_consistency_rejects_bad_probes():
    with pytest.raises(ValueError):
        gradient_consistency_check(barycenter(3), np.zeros(3), 0, 0)
