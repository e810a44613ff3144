"""Qubit POMs in Bloch form: sharp, optimal two-axis joint and xyz joint measurements.

An effect ``w*I + v.sigma`` is stored as ``(w, v)``; its eigenvalues are
``w +/- |v|`` and its outcome probability on Bloch vector ``r`` is ``w + v.r``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .bloch import as_vector, unit

STRUCT_TOL = 1e-10
GEOM_TOL = 1e-12


class InadmissibleSharpness(ValueError):
    """Raised when sharpnesses violate the joint-measurability inequality."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class MarginalFormError(ValueError):
    """The marginal of a POM is not of the form (1/2)(I +/- s n.sigma)."""


@dataclass(frozen=True)
class Effect:
    weight: float
    vector: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vector", as_vector(self.vector))

    @property
    def positivity_residual(self) -> float:
        """Smallest eigenvalue ``weight - |vector|``."""
        return float(self.weight - np.linalg.norm(self.vector))

    def probability(self, state) -> float:
        return float(self.weight + self.vector @ as_vector(state))


def effect_overlap(e1: Effect, e2: Effect) -> float:
    """``Tr(E1 E2)``; zero iff two positive effects are orthogonal."""
    return float(2.0 * (e1.weight * e2.weight + e1.vector @ e2.vector))


@dataclass(frozen=True)
class Povm:
    """Ordered effects plus one +/-1 label per measured axis for each effect."""

    effects: tuple[Effect, ...]
    labels: np.ndarray  # shape (n_effects, n_axes)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim == 1:
            labels = labels[:, None]
        if labels.shape[0] != len(self.effects):
            raise ValueError("one label row per effect is required")
        if not np.all(np.abs(labels) == 1):
            raise ValueError("labels must be +1 or -1")
        object.__setattr__(self, "effects", tuple(self.effects))
        object.__setattr__(self, "labels", labels)

    @property
    def n_axes(self) -> int:
        return int(self.labels.shape[1])

    @property
    def matrix(self) -> np.ndarray:
        """Rows ``(w, vx, vy, vz)``, one per effect."""
        return np.array([[e.weight, *e.vector] for e in self.effects])

    def __len__(self) -> int:
        return len(self.effects)


@dataclass(frozen=True)
class SharpnessTriple:
    alpha: float
    beta: float
    gamma: float | None = None


@dataclass
class ValidityReport:
    positivity_residuals: list[float]
    completeness_weight_residual: float
    completeness_vector_residual: float
    passed: bool
    sharpnesses: list[float] = field(default_factory=list)
    tolerance: float = STRUCT_TOL

    @property
    def min_positivity_residual(self) -> float:
        return min(self.positivity_residuals)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["min_positivity_residual"] = self.min_positivity_residual
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def projective_povm(direction) -> Povm:
    n = unit(direction)
    return Povm(
        effects=(Effect(0.5, 0.5 * n), Effect(0.5, -0.5 * n)),
        labels=np.array([[1], [-1]]),
    )


def optimal_sharpness_pair(eta: float) -> SharpnessTriple:
    """Equal sharpnesses saturating the two-axis inequality at angle ``eta``."""
    if not 0.0 <= eta <= np.pi:
        raise ValueError(f"eta must lie in [0, pi], got {eta!r}")
    alpha = float(np.sqrt(1.0 / (1.0 + abs(np.sin(eta)))))
    return SharpnessTriple(alpha, alpha)


def saturation_residual(a, b, alpha: float, beta: float) -> float:
    """``2 - |alpha a + beta b| - |alpha a - beta b|``: >= 0 admissible, 0 optimal."""
    a, b = unit(a), unit(b)
    return float(
        2.0 - np.linalg.norm(alpha * a + beta * b) - np.linalg.norm(alpha * a - beta * b)
    )


def joint_povm_two(a, b, alpha: float, beta: float) -> Povm:
    """Four-outcome joint measurement of ``a.sigma`` and ``b.sigma``.

    Effect ``(i, j)`` is ``((1 + i j t)/4, (i alpha a + j beta b)/4)`` with
    ``t = (|alpha a + beta b| - |alpha a - beta b|)/2``.  The marginals are
    ``(1/2)(I +/- alpha a.sigma)`` and ``(1/2)(I +/- beta b.sigma)``.
    """
    a, b = unit(a), unit(b)
    for name, s in (("alpha", alpha), ("beta", beta)):
        if not 0.0 <= s <= 1.0 + GEOM_TOL:
            raise ValueError(f"{name} must lie in [0, 1], got {s!r}")
    res = saturation_residual(a, b, alpha, beta)
    if res < -GEOM_TOL:
        raise InadmissibleSharpness(
            f"|alpha a + beta b| + |alpha a - beta b| exceeds 2 by {-res:.3e}", res
        )
    t = 0.5 * (np.linalg.norm(alpha * a + beta * b) - np.linalg.norm(alpha * a - beta * b))
    effects, labels = [], []
    for i, j in itertools.product((1, -1), repeat=2):
        effects.append(Effect(0.25 * (1.0 + i * j * t), 0.25 * (i * alpha * a + j * beta * b)))
        labels.append((i, j))
    return Povm(tuple(effects), np.array(labels))


def joint_povm_three() -> Povm:
    """Eight-outcome joint measurement of sigma_x, sigma_y, sigma_z, each with sharpness 1/sqrt(3)."""
    effects, labels = [], []
    scale = 1.0 / (8.0 * np.sqrt(3.0))
    for signs in itertools.product((1, -1), repeat=3):
        effects.append(Effect(0.125, scale * np.array(signs, dtype=float)))
        labels.append(signs)
    return Povm(tuple(effects), np.array(labels))


def validate_povm(povm: Povm, tol: float = STRUCT_TOL) -> ValidityReport:
    pos = [e.positivity_residual for e in povm.effects]
    w_res = float(sum(e.weight for e in povm.effects) - 1.0)
    v_res = float(np.linalg.norm(np.sum([e.vector for e in povm.effects], axis=0)))
    passed = min(pos) >= -tol and abs(w_res) <= tol and v_res <= tol
    return ValidityReport(pos, w_res, v_res, bool(passed), tolerance=tol)


def marginal(povm: Povm, axis_index: int, sign: int = 1) -> Effect:
    """Sum of effects whose label on ``axis_index`` equals ``sign``."""
    if not 0 <= axis_index < povm.n_axes:
        raise IndexError(f"axis {axis_index} not measured by this POM")
    mask = povm.labels[:, axis_index] == sign
    w = sum(e.weight for e, m in zip(povm.effects, mask) if m)
    v = np.sum([e.vector for e, m in zip(povm.effects, mask) if m], axis=0)
    return Effect(float(w), v)


def extract_marginal_sharpness(povm: Povm, axis_index: int, direction) -> float:
    n = unit(direction)
    m = marginal(povm, axis_index, +1)
    if abs(m.weight - 0.5) > STRUCT_TOL:
        raise MarginalFormError(f"marginal weight {m.weight!r} != 1/2")
    along = float(m.vector @ n)
    perp = float(np.linalg.norm(m.vector - along * n))
    if perp > STRUCT_TOL:
        raise MarginalFormError(f"marginal vector has component {perp:.3e} off the axis")
    return 2.0 * along


def steering_bound_check(sharpness: SharpnessTriple) -> dict:
    """Singlet steering test for a joint x/y/z measurement.

    Outcome ``+++`` on one half of a singlet leaves the other half with Bloch
    vector ``c = -(alpha, beta, gamma)``; a valid state needs ``|c| <= 1``.
    """
    s = [sharpness.alpha, sharpness.beta, sharpness.gamma or 0.0]
    if any(not 0.0 <= x <= 1.0 for x in s):
        raise ValueError(f"sharpnesses must lie in [0, 1], got {s}")
    c = -np.asarray(s)
    length = float(np.linalg.norm(c))
    return {
        "steered_vector": c.tolist(),
        "length": length,
        "admissible": bool(length <= 1.0 + GEOM_TOL),
        # P(second = +/- | first = +) per axis
        "conditional_probs": [[(1.0 - x) / 2.0, (1.0 + x) / 2.0] for x in s],
    }


def outcome_distribution(povm: Povm, state) -> np.ndarray:
    report = validate_povm(povm)
    if not report.passed:
        raise ValueError("outcome_distribution needs a valid POM")
    p = povm.matrix @ np.concatenate(([1.0], as_vector(state)))
    return np.where(p < 0.0, 0.0, p)


def probability_map(povm: Povm) -> np.ndarray:
    """Matrix sending ``(1, rx, ry, rz)`` to the outcome probabilities."""
    return povm.matrix
