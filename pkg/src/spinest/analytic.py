"""Closed forms and exact sums for the total averaged square error of each strategy.

``N`` is the number of copies per observable: two-observable strategies use
``2N`` copies in total and three-observable strategies ``3N``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from numpy.polynomial.legendre import leggauss

from .estimators import bayes_joint_table, beta_moments, binomial_weights, joint_likelihood_moments
from .povm import optimal_sharpness_pair

TWO_OBSERVABLE = (
    "sep-unbiased",
    "sep-unbiased-split",
    "joint-unbiased",
    "sep-biased",
    "joint-biased",
    "cross-weighted",
    "bayes-single",
    "bayes-joint",
)
THREE_OBSERVABLE = ("three-sep-unbiased", "three-sep-biased", "three-joint")
STRATEGIES = TWO_OBSERVABLE + THREE_OBSERVABLE

# strategies whose estimate of <A> uses the B results (parametrised by a.b)
CROSS = ("cross-weighted", "bayes-joint")
# strategies using the optimal joint measurement (parametrised by eta)
JOINT = ("joint-unbiased", "joint-biased")


@dataclass(frozen=True)
class ErrorQuery:
    strategy: str
    n: int
    eta: float | None = None
    adotb: float | None = None
    n1: int | None = None
    node_count: int | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"N must be a positive integer, got {self.n!r}")
        if self.eta is not None and not 0.0 <= self.eta <= np.pi:
            raise ValueError(f"eta must lie in [0, pi], got {self.eta!r}")
        if self.adotb is not None and not -1.0 <= self.adotb <= 1.0:
            raise ValueError(f"a.b must lie in [-1, 1], got {self.adotb!r}")
        if self.n1 is not None and not 1 <= self.n1 <= 2 * self.n - 1:
            raise ValueError(f"split N1 must lie in [1, 2N-1], got {self.n1!r}")

    @property
    def angle(self) -> float:
        if self.eta is not None:
            return float(self.eta)
        if self.adotb is not None:
            return float(np.arccos(self.adotb))
        raise ValueError(f"{self.strategy} needs eta or a.b")

    @property
    def inner(self) -> float:
        if self.adotb is not None:
            return float(self.adotb)
        if self.eta is not None:
            return float(np.cos(self.eta))
        raise ValueError(f"{self.strategy} needs eta or a.b")


# -- closed forms -------------------------------------------------------------


def separate_unbiased(n: int) -> float:
    return 4.0 / (3.0 * n)


def separate_unbiased_split(n: int, n1: int) -> float:
    return 2.0 / (3.0 * n1) + 2.0 / (3.0 * (2 * n - n1))


def separate_biased(n: int) -> float:
    return 4.0 / (3.0 * (n + 2))


def separate_biased_split(n: int, n1: int) -> float:
    return 2.0 / (3.0 * (n1 + 2)) + 2.0 / (3.0 * (2 * n - n1 + 2))


def joint_unbiased(n: int, alpha: float) -> float:
    return (1.0 / alpha**2 - 1.0 / 3.0) / n


def joint_biased(n: int, alpha: float) -> float:
    a2 = alpha * alpha
    return 2.0 * (3.0 - a2) / (3.0 * (3.0 - a2 + 2.0 * n * a2))


def joint_biased_error(alpha: float, shots: int, n_observables: int) -> float:
    """Total error of the optimally rescaled joint estimate, ``shots`` copies, per-axis sharpness ``alpha``."""
    a2 = alpha * alpha
    return n_observables * (3.0 - a2) / (3.0 * (3.0 - a2 + shots * a2))


def cross_weighted(n: int, adotb: float) -> float:
    c2 = adotb * adotb
    return 4.0 * (n * c2 - n - 2.0) / (3.0 * (n * n * c2 - (n + 2.0) ** 2))


def crossover_angle() -> float:
    """Angle below which the optimal joint measurement beats separate measurements."""
    return float(np.arcsin(2.0 / 3.0))


# -- Bayesian errors ----------------------------------------------------------


def bayes_single_error(n: int, method: str = "sum") -> float:
    """Total error (both observables) of the flat-prior posterior-mean estimate.

    ``method="sum"`` evaluates ``2 [1/3 - sum_r C(N,r) I1^2 / (2 I0)]`` in exact
    rational arithmetic; ``"closed"`` returns ``4/(3(N+2))``.
    """
    if n < 1:
        raise ValueError("N must be >= 1")
    if method == "closed":
        return 4.0 / (3.0 * (n + 2))
    if method != "sum":
        raise ValueError(f"unknown method {method!r}")
    total = Fraction(0)
    for r in range(n + 1):
        i0, i1 = beta_moments(r, n)
        total += comb(n, r) * i1 * i1 / (2 * i0)
    return float(2 * (Fraction(1, 3) - total))


def bayes_joint_error(n: int, adotb: float, node_count: int | None = None) -> float:
    """Total error ``2 eps_a`` with ``eps_a = 1/3 - (1/2) sum_{r,s} C(N,r) C(N,s) I1^2/I0``.

    The integrals use the cross-observable likelihood in which each B result
    depends on the state only through ``<A>``.
    """
    node_count = node_count or max(64, 2 * n + 2)
    r, s = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    i0, i1 = joint_likelihood_moments(r, s, n, adotb, node_count)
    c = binomial_weights(n)
    mult = np.outer(c, c)
    eps_a = 1.0 / 3.0 - 0.5 * float(np.sum(mult * i1 * i1 / i0))
    return 2.0 * eps_a


def sphere_average_error(table_a: np.ndarray, table_b: np.ndarray, n: int, adotb: float) -> float:
    """Exact total error of tabulated estimates under uniformly distributed pure states.

    ``table_a[r, s]`` and ``table_b[r, s]`` estimate <A> and <B> from ``r`` ups
    on A and ``s`` ups on B, each measured on its own ``n`` copies.  The
    integrand is a polynomial of degree ``2N + 2`` on the sphere, so a
    Gauss-Legendre rule in ``cos(theta)`` times a trapezoid rule in ``phi``
    with enough nodes is exact.
    """
    z, wz = leggauss(n + 4)
    m_phi = 2 * n + 6
    phi = 2.0 * np.pi * np.arange(m_phi) / m_phi
    sin_eta = np.sqrt(max(0.0, 1.0 - adotb * adotb))
    zz = z[:, None]
    xx = np.sqrt(1.0 - zz * zz) * np.cos(phi)[None, :]
    ev_a = np.broadcast_to(zz, xx.shape)
    ev_b = sin_eta * xx + adotb * zz
    k = np.arange(n + 1)
    c = binomial_weights(n)

    def pmf(ev):
        p = (1.0 + ev[..., None]) / 2.0
        return c * p**k * (1.0 - p) ** (n - k)

    pa, pb = pmf(ev_a), pmf(ev_b)  # (nz, nphi, n+1)
    joint = pa[..., :, None] * pb[..., None, :]
    err = (ev_a[..., None, None] - table_a) ** 2 + (ev_b[..., None, None] - table_b) ** 2
    per_point = np.sum(joint * err, axis=(-2, -1))
    return float(0.5 * wz @ per_point.mean(axis=1))


def bayes_joint_sphere_error(n: int, adotb: float, node_count: int | None = None) -> float:
    """What the cross-observable Bayesian estimate actually achieves on uniform pure states.

    Agrees with :func:`bayes_joint_error` when ``a.b`` is 0 or +/-1 or ``N = 1``;
    otherwise larger, because given <A> the B results of one state are
    correlated through the unobserved azimuth.
    """
    table = bayes_joint_table(n, adotb, node_count)
    return sphere_average_error(table, table.T, n, adotb)


# -- dispatch -----------------------------------------------------------------


def two_observable_error(q: ErrorQuery) -> float:
    s, n = q.strategy, q.n
    if s == "sep-unbiased":
        return separate_unbiased(n)
    if s == "sep-unbiased-split":
        if q.n1 is None:
            raise ValueError("sep-unbiased-split needs N1")
        return separate_unbiased_split(n, q.n1)
    if s == "sep-biased":
        return separate_biased(n) if q.n1 is None else separate_biased_split(n, q.n1)
    if s == "bayes-single":
        return bayes_single_error(n, method="closed")
    if s in JOINT:
        alpha = optimal_sharpness_pair(q.angle).alpha
        return joint_unbiased(n, alpha) if s == "joint-unbiased" else joint_biased(n, alpha)
    if s == "cross-weighted":
        return cross_weighted(n, q.inner)
    if s == "bayes-joint":
        return bayes_joint_error(n, q.inner, q.node_count)
    raise ValueError(f"{s} is not a two-observable strategy")


def three_observable_error(strategy: str, n: int) -> float:
    if n < 1:
        raise ValueError("N must be >= 1")
    if strategy == "three-sep-unbiased":
        return 2.0 / n
    if strategy == "three-sep-biased":
        return 2.0 / (n + 2)
    if strategy == "three-joint":
        return 4.0 / (4.0 + n)
    raise ValueError(f"unknown three-observable strategy {strategy!r}")


def three_joint_error_on_copies(n: int) -> float:
    """Optimal-K joint xyz error when the joint measurement really uses all ``3N`` copies."""
    return joint_biased_error(1.0 / np.sqrt(3.0), 3 * n, 3)


def error_for(q: ErrorQuery) -> float:
    if q.strategy in THREE_OBSERVABLE:
        return three_observable_error(q.strategy, q.n)
    return two_observable_error(q)
