"""Vector fields and fixed-step integration for population dynamics.

Five field kinds share one classical RK4 integrator:

* ``Replicator``              dx_i = x_i (f_i(x) - mean_f(x))      on the simplex
* ``Ecological``              dx_i = x_i g_i(x) with x . g(x) = 0  on the simplex
* ``LotkaVolterra``           dx_i = x_i f_i(x)                    on the orthant
* ``ShiftedLotkaVolterra``    dx_i = (x_i / |x|) f_i(x)            on the orthant
* ``CoupledReplicator``       two replicator populations with payoffs over (p, q)

Simplex states are renormalized (divided by the coordinate sum) after every
step, and any step that drives a coordinate to the positivity floor halts
integration, returning the partial trajectory with ``truncated=True``.

The exponential-family solvers integrate the same flows in log-coordinates
x_i = exp(v_i - G) with dv = f, recomputing the normalizer
G = log sum_j exp(v_j) exactly at every step (it is never integrated).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import logsumexp

from .core import (
    SIMPLEX_TOL,
    CoupledState,
    Landscape,
    OrthantPoint,
    SimplexPoint,
    TangentVector,
    evaluate_landscape,
    evaluate_landscape_batch,
    evaluate_landscape_coupled,
    evaluate_landscape_coupled_batch,
    normalize,
)
from .core import TANGENT_TOL
from .errors import (
    DimensionMismatchError,
    EmptyTrajectoryError,
    KindMismatchError,
    NotSimplexPreservingError,
    StepSizeError,
)

#: Coordinates at or below this value halt integration (positivity loss).
POS_FLOOR = 1e-12
#: Sup-norm tolerance for agreement between the direct integrator and the
#: exponential-family solver on the same flow.
EXPFAM_TOL = 1e-6


# ---------------------------------------------------------------------------
# Field kinds
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Replicator:
    """Frequency selection dynamics driven by landscape ``f``."""

    f: Landscape


@dataclass(frozen=True, eq=False)
class Ecological:
    """Simplex dynamics dx_i = x_i g_i(x) for an aggregate-neutral payoff g."""

    g: Landscape


@dataclass(frozen=True, eq=False)
class LotkaVolterra:
    """Abundance dynamics dx_i = x_i f_i(x) on the positive orthant."""

    f: Landscape


@dataclass(frozen=True, eq=False)
class ShiftedLotkaVolterra:
    """Abundance dynamics dx_i = (x_i / |x|) f_i(x)."""

    f: Landscape


@dataclass(frozen=True, eq=False)
class CoupledReplicator:
    """Two replicator populations; ``f`` and ``g`` are payoffs over (own, other)."""

    f: Landscape
    g: Landscape


VectorFieldKind = Union[
    Replicator, Ecological, LotkaVolterra, ShiftedLotkaVolterra, CoupledReplicator
]

_SIMPLEX_KINDS = (Replicator, Ecological)
_ORTHANT_KINDS = (LotkaVolterra, ShiftedLotkaVolterra)


# ---------------------------------------------------------------------------
# Public field evaluations
# ---------------------------------------------------------------------------


def replicator_field(x: SimplexPoint, f: Landscape) -> TangentVector:
    """Selection field x_i (f_i(x) - x . f(x)); always tangent to the simplex."""
    fvec = evaluate_landscape(f, x.coords)
    fbar = float(np.dot(x.coords, fvec))
    return TangentVector(x.coords * (fvec - fbar))


def ecological_field(x: SimplexPoint, g: Landscape) -> TangentVector:
    """Field x_i g_i(x); requires the aggregate-neutrality x . g(x) = 0."""
    gvec = evaluate_landscape(g, x.coords)
    residual = float(np.dot(x.coords, gvec))
    if abs(residual) > TANGENT_TOL:
        raise NotSimplexPreservingError(
            f"x . g(x) = {residual!r} violates aggregate neutrality"
        )
    return TangentVector(x.coords * gvec)


def lv_field(x: OrthantPoint, f: Landscape) -> np.ndarray:
    """Abundance growth field x_i f_i(x)."""
    return x.coords * evaluate_landscape(f, x.coords)


def shifted_lv_field(x: OrthantPoint, f: Landscape) -> np.ndarray:
    """Aggregate-slowed abundance field (x_i / |x|) f_i(x)."""
    return x.coords * evaluate_landscape(f, x.coords) / x.total


def coupled_replicator_field(
    state: CoupledState, f: Landscape, g: Landscape
) -> tuple[TangentVector, TangentVector]:
    """Simultaneous selection fields for two interacting populations."""
    p = state.pop1.coords
    q = state.pop2.coords
    fvec = evaluate_landscape_coupled(f, p, q)
    gvec = evaluate_landscape_coupled(g, q, p)
    dp = p * (fvec - float(np.dot(p, fvec)))
    dq = q * (gvec - float(np.dot(q, gvec)))
    return TangentVector(dp), TangentVector(dq)


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Diagnostics:
    """Per-step scalar series recorded alongside a trajectory.

    ``divergence_to_target`` is NaN-filled when no target was supplied.
    ``normalizer`` is present only for exponential-family runs and holds the
    recomputed log-normalizer per step (one column per population).
    """

    mean_fitness: np.ndarray
    fitness_variance: np.ndarray
    divergence_to_target: np.ndarray
    state_total: np.ndarray
    normalizer: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded integration output: times, states, and diagnostics.

    For coupled kinds the states are concatenated ``[p, q]`` rows and
    ``split`` holds the first population's dimension.
    """

    kind: VectorFieldKind
    times: np.ndarray
    states: np.ndarray
    diagnostics: Diagnostics
    split: Optional[int] = None
    truncated: bool = False
    failure: Optional[str] = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if times.ndim != 1 or states.ndim != 2 or states.shape[0] != times.size:
            raise ValueError(
                f"inconsistent trajectory shapes: times {times.shape}, states {states.shape}"
            )
        if times.size == 0:
            raise EmptyTrajectoryError("trajectory must contain at least one state")
        if times.size > 1 and not np.all(np.diff(times) > 0.0):
            raise ValueError("times must be strictly increasing")
        if not np.all(states > 0.0):
            raise ValueError("all recorded coordinates must be strictly positive")
        if isinstance(self.kind, _SIMPLEX_KINDS):
            sums = states.sum(axis=1)
            if np.max(np.abs(sums - 1.0)) > SIMPLEX_TOL:
                raise ValueError("simplex trajectory rows must sum to 1 within tolerance")
        if isinstance(self.kind, CoupledReplicator):
            if self.split is None or not (0 < self.split < states.shape[1]):
                raise ValueError("coupled trajectory requires a valid split index")
            for block in (states[:, : self.split], states[:, self.split :]):
                if np.max(np.abs(block.sum(axis=1) - 1.0)) > SIMPLEX_TOL:
                    raise ValueError("coupled trajectory blocks must sum to 1 within tolerance")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return self.times.size

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------


def _rk4_step(field, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = field(y)
    k2 = field(y + 0.5 * dt * k1)
    k3 = field(y + 0.5 * dt * k2)
    k4 = field(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def _check_steps(dt: float, steps: int) -> None:
    if not (np.isfinite(dt) and float(dt) > 0.0):
        raise StepSizeError(f"dt must be positive and finite, got {dt}")
    if int(steps) != steps or steps < 1:
        raise StepSizeError(f"steps must be a positive integer, got {steps}")


def _make_field(kind: VectorFieldKind, split: Optional[int]):
    if isinstance(kind, Replicator):
        f = kind.f

        def field(x):
            fvec = evaluate_landscape(f, x)
            return x * (fvec - np.dot(x, fvec))

        return field
    if isinstance(kind, Ecological):
        g = kind.g

        def field(x):
            gvec = evaluate_landscape(g, x)
            residual = np.dot(x, gvec)
            if abs(residual) > TANGENT_TOL:
                raise NotSimplexPreservingError(
                    f"x . g(x) = {residual!r} violates aggregate neutrality"
                )
            return x * gvec

        return field
    if isinstance(kind, LotkaVolterra):
        f = kind.f

        def field(x):
            return x * evaluate_landscape(f, x)

        return field
    if isinstance(kind, ShiftedLotkaVolterra):
        f = kind.f

        def field(x):
            return x * evaluate_landscape(f, x) / x.sum()

        return field
    if isinstance(kind, CoupledReplicator):
        f, g = kind.f, kind.g

        def field(z):
            p = z[:split]
            q = z[split:]
            fvec = evaluate_landscape_coupled(f, p, q)
            gvec = evaluate_landscape_coupled(g, q, p)
            dp = p * (fvec - np.dot(p, fvec))
            dq = q * (gvec - np.dot(q, gvec))
            return np.concatenate([dp, dq])

        return field
    raise TypeError(f"unknown field kind: {kind!r}")


def _initial_vector(kind: VectorFieldKind, x0) -> tuple[np.ndarray, Optional[int]]:
    if isinstance(kind, _SIMPLEX_KINDS):
        if not isinstance(x0, SimplexPoint):
            raise KindMismatchError(f"{type(kind).__name__} requires a SimplexPoint start")
        return x0.coords.copy(), None
    if isinstance(kind, _ORTHANT_KINDS):
        if not isinstance(x0, OrthantPoint):
            raise KindMismatchError(f"{type(kind).__name__} requires an OrthantPoint start")
        return x0.coords.copy(), None
    if isinstance(kind, CoupledReplicator):
        if not isinstance(x0, CoupledState):
            raise KindMismatchError("CoupledReplicator requires a CoupledState start")
        return x0.concatenated(), x0.pop1.dim
    raise TypeError(f"unknown field kind: {kind!r}")


def _check_target(kind: VectorFieldKind, target, dim: int, split: Optional[int]) -> None:
    if target is None:
        return
    if isinstance(kind, _SIMPLEX_KINDS):
        if not isinstance(target, SimplexPoint):
            raise KindMismatchError("simplex dynamics take a SimplexPoint target")
        if target.dim != dim:
            raise DimensionMismatchError(
                f"target dimension {target.dim} does not match state dimension {dim}"
            )
    elif isinstance(kind, _ORTHANT_KINDS):
        if not isinstance(target, OrthantPoint):
            raise KindMismatchError("abundance dynamics take an OrthantPoint target")
        if target.dim != dim:
            raise DimensionMismatchError(
                f"target dimension {target.dim} does not match state dimension {dim}"
            )
    else:
        if not isinstance(target, CoupledState):
            raise KindMismatchError("coupled dynamics take a CoupledState target")
        if target.pop1.dim + target.pop2.dim != dim or target.pop1.dim != split:
            raise DimensionMismatchError("target dimensions do not match the coupled state")


def _renormalize(kind: VectorFieldKind, y: np.ndarray, split: Optional[int]) -> np.ndarray:
    if isinstance(kind, _SIMPLEX_KINDS):
        return y / y.sum()
    if isinstance(kind, CoupledReplicator):
        p = y[:split]
        q = y[split:]
        return np.concatenate([p / p.sum(), q / q.sum()])
    return y


def _kl_rows(target: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Vectorized D(target || row) over trajectory rows, floored at zero."""
    const = float(np.dot(target, np.log(target)))
    values = const - np.log(rows) @ target
    return np.maximum(values, 0.0)


def _diagnostics(
    kind: VectorFieldKind,
    states: np.ndarray,
    target,
    split: Optional[int],
    normalizer: Optional[np.ndarray] = None,
) -> Diagnostics:
    nan = np.full(states.shape[0], np.nan)
    if isinstance(kind, _SIMPLEX_KINDS):
        land = kind.f if isinstance(kind, Replicator) else kind.g
        payoff = evaluate_landscape_batch(land, states)
        mean = np.einsum("ij,ij->i", states, payoff)
        var = np.einsum("ij,ij->i", states, (payoff - mean[:, None]) ** 2)
        div = _kl_rows(target.coords, states) if target is not None else nan
        return Diagnostics(mean, var, div, states.sum(axis=1), normalizer)
    if isinstance(kind, _ORTHANT_KINDS):
        totals = states.sum(axis=1)
        freqs = states / totals[:, None]
        payoff = evaluate_landscape_batch(kind.f, states)
        mean = np.einsum("ij,ij->i", freqs, payoff)
        var = np.einsum("ij,ij->i", freqs, (payoff - mean[:, None]) ** 2)
        div = _kl_rows(normalize(target).coords, freqs) if target is not None else nan
        return Diagnostics(mean, var, div, totals, normalizer)
    p = states[:, :split]
    q = states[:, split:]
    fp = evaluate_landscape_coupled_batch(kind.f, p, q)
    gq = evaluate_landscape_coupled_batch(kind.g, q, p)
    mean_p = np.einsum("ij,ij->i", p, fp)
    mean_q = np.einsum("ij,ij->i", q, gq)
    var = np.einsum("ij,ij->i", p, (fp - mean_p[:, None]) ** 2) + np.einsum(
        "ij,ij->i", q, (gq - mean_q[:, None]) ** 2
    )
    if target is not None:
        div = _kl_rows(target.pop1.coords, p) + _kl_rows(target.pop2.coords, q)
    else:
        div = nan
    return Diagnostics(mean_p + mean_q, var, div, states.sum(axis=1), normalizer)


def integrate(
    kind: VectorFieldKind,
    x0,
    dt: float,
    steps: int,
    target=None,
) -> Trajectory:
    """Integrate a field with classical fixed-step RK4.

    Simplex-valued kinds are renormalized after every step.  If a step
    drives any coordinate to POS_FLOOR or below (or to a non-finite value),
    integration halts and the partial trajectory is returned with
    ``truncated=True`` and a failure message; no exception is raised for
    positivity loss.  The optional target feeds the divergence column of the
    diagnostics and must match the kind's state type.
    """
    _check_steps(dt, steps)
    y, split = _initial_vector(kind, x0)
    _check_target(kind, target, y.size, split)
    field = _make_field(kind, split)
    states = [y.copy()]
    truncated = False
    failure = None
    for k in range(int(steps)):
        y_next = _rk4_step(field, y, dt)
        if not np.all(y_next > POS_FLOOR):
            truncated = True
            failure = f"positivity lost at step {k + 1} (t = {(k + 1) * dt:g})"
            break
        y = _renormalize(kind, y_next, split)
        states.append(y.copy())
    states = np.array(states)
    times = dt * np.arange(states.shape[0])
    diagnostics = _diagnostics(kind, states, target, split)
    return Trajectory(
        kind=kind,
        times=times,
        states=states,
        diagnostics=diagnostics,
        split=split,
        truncated=truncated,
        failure=failure,
    )


# ---------------------------------------------------------------------------
# Exponential-family solvers
# ---------------------------------------------------------------------------


def exp_family_solver(
    f: Landscape, x0: SimplexPoint, dt: float, steps: int, target: Optional[SimplexPoint] = None
) -> Trajectory:
    """Integrate the replicator flow in exponential coordinates.

    Writes x_i = exp(v_i - G) and advances dv = f(x) with RK4, recomputing
    G = log sum_j exp(v_j) exactly at every step; G is never integrated.
    The recomputed normalizer is recorded per step in the diagnostics, so
    the identity dG/dt = mean fitness can be checked externally by finite
    differences.
    """
    _check_steps(dt, steps)
    if not isinstance(x0, SimplexPoint):
        raise KindMismatchError("exponential-family solver requires a SimplexPoint start")
    kind = Replicator(f)
    _check_target(kind, target, x0.dim, None)
    v = np.log(x0.coords)

    def vfield(v_raw):
        x = np.exp(v_raw - logsumexp(v_raw))
        return evaluate_landscape(f, x)

    states = [x0.coords.copy()]
    normalizers = [float(logsumexp(v))]
    truncated = False
    failure = None
    for k in range(int(steps)):
        v = _rk4_step(vfield, v, dt)
        big_g = float(logsumexp(v))
        x = np.exp(v - big_g)
        if not np.all(x > POS_FLOOR):
            truncated = True
            failure = f"positivity lost at step {k + 1} (t = {(k + 1) * dt:g})"
            break
        states.append(x)
        normalizers.append(big_g)
    states = np.array(states)
    times = dt * np.arange(states.shape[0])
    diagnostics = _diagnostics(kind, states, target, None, normalizer=np.array(normalizers))
    return Trajectory(
        kind=kind,
        times=times,
        states=states,
        diagnostics=diagnostics,
        truncated=truncated,
        failure=failure,
    )


def coupled_exp_family_solver(
    f: Landscape,
    g: Landscape,
    state0: CoupledState,
    dt: float,
    steps: int,
    target: Optional[CoupledState] = None,
) -> Trajectory:
    """Exponential-coordinate integration of two coupled replicator populations.

    Each population carries its own normalizer; both are recomputed from the
    log-coordinates at every step and recorded as the two columns of the
    diagnostics normalizer array.
    """
    _check_steps(dt, steps)
    if not isinstance(state0, CoupledState):
        raise KindMismatchError("coupled solver requires a CoupledState start")
    kind = CoupledReplicator(f, g)
    split = state0.pop1.dim
    _check_target(kind, target, split + state0.pop2.dim, split)
    z = np.log(state0.concatenated())

    def zfield(z_raw):
        p = np.exp(z_raw[:split] - logsumexp(z_raw[:split]))
        q = np.exp(z_raw[split:] - logsumexp(z_raw[split:]))
        return np.concatenate(
            [evaluate_landscape_coupled(f, p, q), evaluate_landscape_coupled(g, q, p)]
        )

    states = [state0.concatenated()]
    normalizers = [[float(logsumexp(z[:split])), float(logsumexp(z[split:]))]]
    truncated = False
    failure = None
    for k in range(int(steps)):
        z = _rk4_step(zfield, z, dt)
        n1 = float(logsumexp(z[:split]))
        n2 = float(logsumexp(z[split:]))
        x = np.concatenate([np.exp(z[:split] - n1), np.exp(z[split:] - n2)])
        if not np.all(x > POS_FLOOR):
            truncated = True
            failure = f"positivity lost at step {k + 1} (t = {(k + 1) * dt:g})"
            break
        states.append(x)
        normalizers.append([n1, n2])
    states = np.array(states)
    times = dt * np.arange(states.shape[0])
    diagnostics = _diagnostics(kind, states, target, split, normalizer=np.array(normalizers))
    return Trajectory(
        kind=kind,
        times=times,
        states=states,
        diagnostics=diagnostics,
        split=split,
        truncated=truncated,
        failure=failure,
    )


# ---------------------------------------------------------------------------
# Trajectory transforms and residuals
# ---------------------------------------------------------------------------


def normalize_lv_trajectory(traj: Trajectory) -> Trajectory:
    """Pointwise normalization y(t) = x(t) / |x(t)| of an abundance trajectory.

    The returned trajectory keeps the original kind and time stamps; its
    states are the frequency vectors, and the state-total diagnostic becomes
    identically 1.
    """
    if not isinstance(traj.kind, _ORTHANT_KINDS):
        raise KindMismatchError(
            f"normalization applies to abundance trajectories, got {type(traj.kind).__name__}"
        )
    if len(traj) == 0:
        raise EmptyTrajectoryError("cannot normalize an empty trajectory")
    totals = traj.states.sum(axis=1)
    freqs = traj.states / totals[:, None]
    d = traj.diagnostics
    diagnostics = Diagnostics(
        mean_fitness=d.mean_fitness.copy(),
        fitness_variance=d.fitness_variance.copy(),
        divergence_to_target=d.divergence_to_target.copy(),
        state_total=freqs.sum(axis=1),
        normalizer=None if d.normalizer is None else d.normalizer.copy(),
    )
    return Trajectory(
        kind=traj.kind,
        times=traj.times.copy(),
        states=freqs,
        diagnostics=diagnostics,
        split=traj.split,
        truncated=traj.truncated,
        failure=traj.failure,
    )


def lv_correspondence_residual(traj: Trajectory) -> float:
    """Defect of the normalized abundance flow against replicator form.

    For y = x / |x| the normalization of dx_i = x_i f_i(x) satisfies
    dy_i = y_i (g_i - y . g) with g_i(y) = f_i(x) evaluated at the stored
    abundance state of the same time stamp (ShiftedLotkaVolterra obeys the
    same identity up to the 1/|x| time change, which is applied here).
    Returns the max-norm residual between central-difference dy/dt and that
    right-hand side over interior time steps.
    """
    if not isinstance(traj.kind, _ORTHANT_KINDS):
        raise KindMismatchError(
            f"correspondence residual applies to abundance trajectories, got {type(traj.kind).__name__}"
        )
    if len(traj) < 3:
        raise EmptyTrajectoryError("need at least 3 states for a central difference")
    dt_all = np.diff(traj.times)
    dt = float(traj.times[-1] - traj.times[0]) / (len(traj) - 1)
    # dt * arange grids carry rounding up to eps * t_max in each spacing
    slack = 32.0 * np.finfo(float).eps * max(1.0, abs(float(traj.times[-1])))
    if np.max(np.abs(dt_all - dt)) > slack:
        raise ValueError("correspondence residual requires a uniform time grid")
    totals = traj.states.sum(axis=1)
    freqs = traj.states / totals[:, None]
    payoff = evaluate_landscape_batch(traj.kind.f, traj.states)
    if isinstance(traj.kind, ShiftedLotkaVolterra):
        payoff = payoff / totals[:, None]
    mean = np.einsum("ij,ij->i", freqs, payoff)
    rhs = freqs * (payoff - mean[:, None])
    dy = (freqs[2:] - freqs[:-2]) / (2.0 * dt)
    return float(np.max(np.abs(dy - rhs[1:-1])))


def orbit_gap(states: np.ndarray, reference: np.ndarray, stride: int = 1) -> float:
    """Largest distance from ``states`` rows to the polyline through ``reference``.

    A one-directional Hausdorff-style gap: each queried state is matched to
    the nearest point on any segment of the reference path, which makes the
    measure insensitive to time reparameterization.
    """
    states = np.asarray(states, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if reference.shape[0] < 2:
        raise EmptyTrajectoryError("reference path needs at least 2 states")
    p0 = reference[:-1]
    seg = reference[1:] - p0
    seg_sq = np.einsum("ij,ij->i", seg, seg)
    seg_sq = np.where(seg_sq == 0.0, 1.0, seg_sq)
    worst = 0.0
    for q in states[::stride]:
        t = np.clip(((q - p0) * seg).sum(axis=1) / seg_sq, 0.0, 1.0)
        closest = p0 + t[:, None] * seg
        d_sq = ((q - closest) ** 2).sum(axis=1)
        worst = max(worst, float(d_sq.min()))
    return float(np.sqrt(worst))
