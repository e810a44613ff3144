"""Estimates of spin expectation values from +/-1 outcome tallies.

Functions take the number of ``+1`` outcomes (``up``) and the number of shots
and accept numpy arrays elementwise, which is how the Monte Carlo driver calls
them.  Scalars in give floats out.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np
from numpy.polynomial.legendre import leggauss

KINDS = (
    "mean",
    "shrinkage",
    "joint-rescaled",
    "joint-biased",
    "cross-weighted",
    "bayes-single",
    "bayes-joint",
)


@dataclass(frozen=True)
class OutcomeCounts:
    """Per-axis tallies: ``up[k]`` spin-up results out of ``shots[k]``."""

    up: tuple[int, ...]
    shots: tuple[int, ...]

    def __post_init__(self):
        if len(self.up) != len(self.shots):
            raise ValueError("up and shots need one entry per axis")
        for u, n in zip(self.up, self.shots):
            if int(u) != u or int(n) != n or not 0 <= u <= n:
                raise ValueError(f"need integers 0 <= up <= shots, got {u}/{n}")

    @property
    def down(self) -> tuple[int, ...]:
        return tuple(n - u for u, n in zip(self.up, self.shots))


@dataclass(frozen=True)
class EstimatorSpec:
    kind: str
    alpha: float | None = None
    adotb: float | None = None
    node_count: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if self.alpha is not None and not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if self.adotb is not None and not -1.0 <= self.adotb <= 1.0:
            raise ValueError(f"a.b must lie in [-1, 1], got {self.adotb!r}")


def _ret(x):
    return float(x) if np.ndim(x) == 0 else x


def _check_shots(shots):
    if np.any(np.asarray(shots) < 1):
        raise ValueError("at least one shot is required")


def _check_counts(up, shots):
    _check_shots(shots)
    up, shots = np.asarray(up), np.asarray(shots)
    if np.any(up < 0) or np.any(up > shots):
        raise ValueError("up count must lie in [0, shots]")


def mean_estimate(up, shots):
    """Sample mean of the +/-1 results, ``(2 up - N)/N``."""
    _check_shots(shots)
    up = np.asarray(up, dtype=float)
    return _ret((2.0 * up - shots) / shots)


def shrinkage_estimate(up, shots):
    """Mean shrunk towards zero: ``(2 up - N)/(N + 2)``."""
    _check_shots(shots)
    up = np.asarray(up, dtype=float)
    return _ret((2.0 * up - shots) / (shots + 2.0))


def joint_rescaled_estimate(up, shots, alpha: float):
    """Joint-measurement results relabelled ``+/-1/alpha``; may leave [-1, 1]."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    _check_shots(shots)
    up = np.asarray(up, dtype=float)
    return _ret((2.0 * up - shots) / (alpha * shots))


def joint_biased_gain(alpha: float, shots) -> float:
    """MSE-optimal rescaling ``K`` for a sharpness-``alpha`` axis seen on ``shots`` copies.

    With ``shots = 2N`` this is ``2N a^2 / (3 - a^2 + 2N a^2)``.
    """
    a2 = alpha * alpha
    return shots * a2 / (3.0 - a2 + shots * a2)


def joint_biased_estimate(up, shots, alpha: float):
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    k = joint_biased_gain(alpha, np.asarray(shots, dtype=float))
    return _ret(k * np.asarray(joint_rescaled_estimate(up, shots, alpha)))


def cross_weights(n: int, adotb: float) -> tuple[float, float]:
    """``(K, lambda)`` minimising the averaged error of ``K*mean_a + lambda*mean_b``."""
    c2 = adotb * adotb
    den = (n + 2.0) ** 2 - n * n * c2
    assert den > 0, "degenerate cross-weight denominator"
    return n * (2.0 + n - n * c2) / den, 2.0 * n * adotb / den


def cross_weighted_estimate(up_a, up_b, shots: int, adotb: float):
    """Estimates of both expectation values, each using both tallies."""
    if not -1.0 <= adotb <= 1.0:
        raise ValueError(f"a.b must lie in [-1, 1], got {adotb!r}")
    k, lam = cross_weights(shots, adotb)
    ma = np.asarray(mean_estimate(up_a, shots))
    mb = np.asarray(mean_estimate(up_b, shots))
    return _ret(k * ma + lam * mb), _ret(k * mb + lam * ma)


# -- Bayesian posterior means under a flat prior on <A> -----------------------


def _beta(a: int, b: int) -> Fraction:
    from math import factorial

    return Fraction(factorial(a - 1) * factorial(b - 1), factorial(a + b - 1))


@lru_cache(maxsize=None)
def beta_moments(r: int, n: int) -> tuple[Fraction, Fraction]:
    """Exact ``(I0, I1)`` with ``In = int_{-1}^{1} x^n ((1+x)/2)^r ((1-x)/2)^(N-r) dx``.

    ``I0 = 2B(r+1, N-r+1)`` and ``I1 = 4B(r+2, N-r+1) - 2B(r+1, N-r+1)``.
    """
    if not 0 <= r <= n:
        raise ValueError(f"need 0 <= r <= N, got r={r}, N={n}")
    b0 = _beta(r + 1, n - r + 1)
    return 2 * b0, 4 * _beta(r + 2, n - r + 1) - 2 * b0


def bayes_single_estimate(r: int, n: int) -> float:
    """Posterior mean of <A> after ``r`` ups in ``n`` shots, flat prior on [-1, 1]."""
    i0, i1 = beta_moments(int(r), int(n))
    return float(i1 / i0)


def _nodes(node_count: int):
    return leggauss(int(node_count))


def joint_likelihood_moments(r, s, n: int, adotb: float, node_count: int):
    """``(I0, I1)`` for the cross-observable likelihood, by Gauss-Legendre quadrature.

    The B outcomes enter through ``P(b = +/-1 | <A> = u) = (1 +/- (a.b) u)/2``.
    The integrand is a polynomial of degree ``2N + 1`` so ``node_count >= N + 1``
    is exact; ``r`` and ``s`` broadcast.
    """
    if node_count < 2 * n + 2:
        raise ValueError(f"node_count={node_count} too small for N={n}; need >= {2 * n + 2}")
    x, w = _nodes(node_count)
    r = np.asarray(r)[..., None]
    s = np.asarray(s)[..., None]
    f = (
        ((1.0 + x) / 2.0) ** r
        * ((1.0 - x) / 2.0) ** (n - r)
        * ((1.0 + adotb * x) / 2.0) ** s
        * ((1.0 - adotb * x) / 2.0) ** (n - s)
    )
    return f @ w, f @ (w * x)


def bayes_joint_table(n: int, adotb: float, node_count: int | None = None) -> np.ndarray:
    """``table[r, s]``: posterior mean of <A> given r ups on A and s ups on B."""
    node_count = node_count or max(64, 2 * n + 2)
    r, s = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    i0, i1 = joint_likelihood_moments(r, s, n, adotb, node_count)
    return i1 / i0


def bayes_joint_estimate(r: int, s: int, n: int, adotb: float, node_count: int | None = None) -> float:
    if not (0 <= r <= n and 0 <= s <= n):
        raise ValueError(f"need 0 <= r, s <= N, got r={r}, s={s}, N={n}")
    node_count = node_count or max(64, 2 * n + 2)
    i0, i1 = joint_likelihood_moments(r, s, n, adotb, node_count)
    return float(i1 / i0)


def binomial_weights(n: int) -> np.ndarray:
    return np.array([comb(n, k) for k in range(n + 1)], dtype=float)


def estimate(spec: EstimatorSpec, counts_a: OutcomeCounts, counts_b: OutcomeCounts | None = None):
    """Dispatch on ``spec.kind``; returns ``(est_a, est_b)`` (``est_b`` may be None)."""
    ua, na = counts_a.up[0], counts_a.shots[0]
    ub, nb = (counts_b.up[0], counts_b.shots[0]) if counts_b is not None else (None, None)
    kind = spec.kind

    def both(fn):
        return fn(ua, na), (fn(ub, nb) if counts_b is not None else None)

    if kind == "mean":
        return both(mean_estimate)
    if kind == "shrinkage":
        return both(shrinkage_estimate)
    if kind == "bayes-single":
        return both(bayes_single_estimate)
    if kind in ("joint-rescaled", "joint-biased"):
        if spec.alpha is None:
            raise ValueError(f"{kind} needs a sharpness alpha")
        fn = joint_rescaled_estimate if kind == "joint-rescaled" else joint_biased_estimate
        return both(lambda u, n: fn(u, n, spec.alpha))
    # cross methods
    if counts_b is None:
        raise ValueError(f"{kind} needs counts for both observables")
    if na != nb:
        raise ValueError(f"{kind} needs equal shots per observable, got {na} and {nb}")
    adotb = 0.0 if spec.adotb is None else spec.adotb
    if kind == "cross-weighted":
        return cross_weighted_estimate(ua, ub, na, adotb)
    table = bayes_joint_table(na, adotb, spec.node_count)
    return float(table[ua, ub]), float(table[ub, ua])
