"""State types, fitness landscapes, and elementary population statistics.

The interior of the probability simplex is the state space for frequency
dynamics; the positive orthant carries non-normalized abundances.  All types
here are immutable value objects and every operation is a pure function, so
values can be shared freely across threads or processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import (
    DimensionMismatchError,
    DimensionTooSmallError,
    EvaluationFailure,
    NonPositiveTauError,
    NotInteriorError,
    NotNormalizedError,
    NotTangentError,
)

#: Absolute tolerance on the coordinate sum of a simplex point.
SIMPLEX_TOL = 1e-9
#: Absolute tolerance on the component sum of a tangent vector.
TANGENT_TOL = 1e-9


def _frozen_vector(values) -> np.ndarray:
    """Copy ``values`` into a read-only 1-d float64 array."""
    arr = np.array(values, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise DimensionTooSmallError(
            f"expected a 1-d vector with at least 2 entries, got shape {arr.shape}"
        )
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """Strictly positive probability vector in the interior of the simplex."""

    coords: np.ndarray

    def __post_init__(self):
        coords = _frozen_vector(self.coords)
        if not np.all(coords > 0.0):
            raise NotInteriorError(f"coordinates must be strictly positive, got {coords}")
        total = float(coords.sum())
        if not abs(total - 1.0) <= SIMPLEX_TOL:
            raise NotNormalizedError(f"coordinates sum to {total!r}, expected 1 within {SIMPLEX_TOL}")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return self.coords.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    def __len__(self) -> int:
        return self.coords.size


@dataclass(frozen=True, eq=False)
class OrthantPoint:
    """Strictly positive abundance vector (no normalization constraint)."""

    coords: np.ndarray

    def __post_init__(self):
        coords = _frozen_vector(self.coords)
        if not (np.all(coords > 0.0) and np.all(np.isfinite(coords))):
            raise NotInteriorError(f"coordinates must be positive and finite, got {coords}")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return self.coords.size

    @property
    def total(self) -> float:
        """Aggregate abundance |x|."""
        return float(self.coords.sum())

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    def __len__(self) -> int:
        return self.coords.size


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Vector in the tangent space of the simplex (components sum to zero)."""

    components: np.ndarray

    def __post_init__(self):
        components = _frozen_vector(self.components)
        total = float(components.sum())
        if not abs(total) <= TANGENT_TOL:
            raise NotTangentError(f"components sum to {total!r}, expected 0 within {TANGENT_TOL}")
        object.__setattr__(self, "components", components)

    @property
    def dim(self) -> int:
        return self.components.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)


@dataclass(frozen=True, eq=False)
class CoupledState:
    """Joint state of two interacting populations."""

    pop1: SimplexPoint
    pop2: SimplexPoint

    def __post_init__(self):
        if not isinstance(self.pop1, SimplexPoint):
            object.__setattr__(self, "pop1", SimplexPoint(np.asarray(self.pop1, dtype=float)))
        if not isinstance(self.pop2, SimplexPoint):
            object.__setattr__(self, "pop2", SimplexPoint(np.asarray(self.pop2, dtype=float)))

    @property
    def dims(self) -> tuple[int, int]:
        return (self.pop1.dim, self.pop2.dim)

    def concatenated(self) -> np.ndarray:
        return np.concatenate([self.pop1.coords, self.pop2.coords])


def barycenter(n: int) -> SimplexPoint:
    """Uniform distribution on ``n`` types."""
    if n < 2:
        raise DimensionTooSmallError(f"need at least 2 types, got {n}")
    return SimplexPoint(np.full(n, 1.0 / n))


# ---------------------------------------------------------------------------
# Fitness landscapes
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Linear:
    """Payoff f(x) = A x for a game matrix A.

    In a two-population context the matrix is rectangular and is applied to
    the opposing population's state (bimatrix convention).
    """

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.ndim != 2:
            raise DimensionMismatchError(f"payoff matrix must be 2-d, got shape {matrix.shape}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)


@dataclass(frozen=True, eq=False)
class LogLinear:
    """Payoff f_i(x) = sum_j A_ij log(x_j) + b_i."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        offset = np.array(self.offset, dtype=float)
        if matrix.ndim != 2 or offset.ndim != 1 or matrix.shape[0] != offset.size:
            raise DimensionMismatchError(
                f"incompatible log-linear shapes: matrix {matrix.shape}, offset {offset.shape}"
            )
        matrix.setflags(write=False)
        offset.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "offset", offset)


@dataclass(frozen=True, eq=False)
class Scaled:
    """Aggregate-neutral rescaling g(x) = c * (f(x) - mean_f(x) * 1).

    The result satisfies x . g(x) = 0, so it is a valid ecological payoff for
    simplex-preserving dynamics at any positive speed factor c.
    """

    base: "Landscape"
    factor: float

    def __post_init__(self):
        if not (float(self.factor) > 0.0):
            raise ValueError(f"scale factor must be > 0, got {self.factor}")
        object.__setattr__(self, "factor", float(self.factor))


@dataclass(frozen=True, eq=False)
class Custom:
    """Black-box payoff map.

    The evaluator takes the state vector (or, in a two-population context,
    the pair ``(own, other)``) and returns the payoff vector for the owning
    population.
    """

    evaluator: Callable


Landscape = Union[Linear, LogLinear, Scaled, Custom]


def _call_custom(evaluator: Callable, args: tuple, n: int) -> np.ndarray:
    try:
        out = evaluator(*args)
    except Exception as exc:  # noqa: BLE001 - black-box evaluator
        raise EvaluationFailure(f"custom landscape evaluator raised: {exc!r}") from exc
    out = np.asarray(out, dtype=float)
    if out.shape != (n,):
        raise EvaluationFailure(f"custom landscape returned shape {out.shape}, expected ({n},)")
    return out


def evaluate_landscape(f: Landscape, x: np.ndarray) -> np.ndarray:
    """Evaluate a single-population landscape at the raw state vector ``x``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if isinstance(f, Linear):
        if f.matrix.shape != (n, n):
            raise DimensionMismatchError(
                f"payoff matrix shape {f.matrix.shape} does not match state dimension {n}"
            )
        return f.matrix @ x
    if isinstance(f, LogLinear):
        if f.matrix.shape != (n, n):
            raise DimensionMismatchError(
                f"log-linear matrix shape {f.matrix.shape} does not match state dimension {n}"
            )
        with np.errstate(invalid="ignore", divide="ignore"):
            return f.matrix @ np.log(x) + f.offset
    if isinstance(f, Scaled):
        base = evaluate_landscape(f.base, x)
        fbar = float(np.dot(x, base))
        return f.factor * (base - fbar)
    if isinstance(f, Custom):
        return _call_custom(f.evaluator, (x,), n)
    raise TypeError(f"not a landscape: {f!r}")


def evaluate_landscape_batch(f: Landscape, states: np.ndarray) -> np.ndarray:
    """Evaluate a landscape on each row of ``states`` (shape (T, n))."""
    states = np.asarray(states, dtype=float)
    n = states.shape[1]
    if isinstance(f, Linear):
        if f.matrix.shape != (n, n):
            raise DimensionMismatchError(
                f"payoff matrix shape {f.matrix.shape} does not match state dimension {n}"
            )
        return states @ f.matrix.T
    if isinstance(f, LogLinear):
        if f.matrix.shape != (n, n):
            raise DimensionMismatchError(
                f"log-linear matrix shape {f.matrix.shape} does not match state dimension {n}"
            )
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.log(states) @ f.matrix.T + f.offset
    if isinstance(f, Scaled):
        base = evaluate_landscape_batch(f.base, states)
        fbar = np.einsum("ij,ij->i", states, base)
        return f.factor * (base - fbar[:, None])
    if isinstance(f, Custom):
        return np.stack([_call_custom(f.evaluator, (row,), n) for row in states])
    raise TypeError(f"not a landscape: {f!r}")


def evaluate_landscape_coupled(f: Landscape, own: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Evaluate a two-population landscape: payoff for ``own`` against ``other``."""
    own = np.asarray(own, dtype=float)
    other = np.asarray(other, dtype=float)
    n, m = own.size, other.size
    if isinstance(f, Linear):
        if f.matrix.shape != (n, m):
            raise DimensionMismatchError(
                f"bimatrix shape {f.matrix.shape} does not match populations ({n}, {m})"
            )
        return f.matrix @ other
    if isinstance(f, LogLinear):
        if f.matrix.shape != (n, m):
            raise DimensionMismatchError(
                f"log-linear bimatrix shape {f.matrix.shape} does not match populations ({n}, {m})"
            )
        with np.errstate(invalid="ignore", divide="ignore"):
            return f.matrix @ np.log(other) + f.offset
    if isinstance(f, Scaled):
        base = evaluate_landscape_coupled(f.base, own, other)
        fbar = float(np.dot(own, base))
        return f.factor * (base - fbar)
    if isinstance(f, Custom):
        return _call_custom(f.evaluator, (own, other), n)
    raise TypeError(f"not a landscape: {f!r}")


def evaluate_landscape_coupled_batch(f: Landscape, own: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Row-wise two-population landscape evaluation (own, other have shape (T, *))."""
    own = np.asarray(own, dtype=float)
    other = np.asarray(other, dtype=float)
    n, m = own.shape[1], other.shape[1]
    if isinstance(f, Linear):
        if f.matrix.shape != (n, m):
            raise DimensionMismatchError(
                f"bimatrix shape {f.matrix.shape} does not match populations ({n}, {m})"
            )
        return other @ f.matrix.T
    if isinstance(f, LogLinear):
        if f.matrix.shape != (n, m):
            raise DimensionMismatchError(
                f"log-linear bimatrix shape {f.matrix.shape} does not match populations ({n}, {m})"
            )
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.log(other) @ f.matrix.T + f.offset
    if isinstance(f, Scaled):
        base = evaluate_landscape_coupled_batch(f.base, own, other)
        fbar = np.einsum("ij,ij->i", own, base)
        return f.factor * (base - fbar[:, None])
    if isinstance(f, Custom):
        return np.stack(
            [_call_custom(f.evaluator, (o, p), n) for o, p in zip(own, other)]
        )
    raise TypeError(f"not a landscape: {f!r}")


# ---------------------------------------------------------------------------
# Elementary operations
# ---------------------------------------------------------------------------


def validate_simplex(values) -> SimplexPoint:
    """Check a raw vector against the simplex-interior invariants.

    Returns the typed point; never renormalizes silently.
    """
    return SimplexPoint(np.asarray(values, dtype=float))


def normalize(x: OrthantPoint) -> SimplexPoint:
    """Project an abundance vector to frequencies: x / |x|."""
    if not isinstance(x, OrthantPoint):
        x = OrthantPoint(np.asarray(x, dtype=float))
    return SimplexPoint(x.coords / x.total)


def section(x: SimplexPoint, tau: float) -> OrthantPoint:
    """Embed frequencies back into the orthant at aggregate level ``tau``."""
    if not (float(tau) > 0.0):
        raise NonPositiveTauError(f"tau must be > 0, got {tau}")
    return OrthantPoint(float(tau) * x.coords)


def mean_fitness(x: SimplexPoint, f: Landscape) -> float:
    """Population-weighted mean payoff x . f(x)."""
    fvec = evaluate_landscape(f, x.coords)
    return float(np.dot(x.coords, fvec))


def fitness_variance(x: SimplexPoint, f: Landscape) -> float:
    """Population-weighted payoff variance sum_i x_i (f_i - mean)^2."""
    fvec = evaluate_landscape(f, x.coords)
    fbar = float(np.dot(x.coords, fvec))
    return float(np.dot(x.coords, (fvec - fbar) ** 2))
