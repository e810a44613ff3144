"""Seeded Monte Carlo estimate of the total averaged square error of each strategy.

Every trial draws a uniformly random pure state, measures the strategy's
copies, forms the estimates and records the squared error summed over the
observables.  Trial ``i`` only ever reads from ``derive_substream(seed, i)``,
and the per-trial results are reduced in trial order, so a report depends on
the plan alone and not on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analytic, estimators, kernels
from .bloch import X_AXIS, Y_AXIS, Z_AXIS, angle_between, directions_for_angle, unit
from .estimators import OutcomeCounts
from .povm import Povm, joint_povm_three, joint_povm_two, optimal_sharpness_pair, outcome_distribution, projective_povm
from .rng import derive_substream, seed_key

DEFAULT_CHUNK = 1 << 16
RANGE_TOL = 1e-12


@dataclass(frozen=True)
class TrialPlan:
    strategy: str
    n: int
    trials: int
    master_seed: int = 0
    a: tuple = tuple(Z_AXIS)
    b: tuple | None = None
    eta: float | None = None
    n1: int | None = None
    workers: int = 1
    chunk_size: int = DEFAULT_CHUNK
    backend: str | None = None

    def __post_init__(self):
        if self.strategy not in analytic.STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"N must be a positive integer, got {self.n!r}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials!r}")
        if self.workers < 1 or self.chunk_size < 1:
            raise ValueError("workers and chunk_size must be >= 1")
        if self.strategy == "sep-unbiased-split" and self.n1 is None:
            raise ValueError("sep-unbiased-split needs N1")
        if self.n1 is not None and not 1 <= self.n1 <= 2 * self.n - 1:
            raise ValueError(f"split N1 must lie in [1, 2N-1], got {self.n1!r}")
        if self.strategy in analytic.TWO_OBSERVABLE:
            if self.b is None:
                if self.eta is None:
                    raise ValueError(f"{self.strategy} needs direction b or angle eta")
                a, b = directions_for_angle(self.eta)
                object.__setattr__(self, "a", tuple(a))
                object.__setattr__(self, "b", tuple(b))
            unit(self.a)
            unit(self.b)


@dataclass
class ErrorReport:
    strategy: str
    n: int
    trials: int
    seed: int
    empirical_error: float
    standard_error: float
    analytic_error: float
    out_of_range_fraction: float
    per_observable_error: list[float] = field(default_factory=list)
    mean_trace_distance_sq: float | None = None
    eta: float | None = None
    adotb: float | None = None
    backend: str = ""

    def agrees(self, k: float = 3.0) -> bool:
        return abs(self.empirical_error - self.analytic_error) <= k * self.standard_error

    def to_dict(self) -> dict:
        return asdict(self)


# -- measurement layout -------------------------------------------------------


@dataclass(frozen=True)
class _Layout:
    groups: list  # (Povm, copies, axis indices of the POM's label columns)
    n_axes: int
    directions: np.ndarray  # (n_axes, 3)
    alpha: float | None = None


def _layout(plan: TrialPlan) -> _Layout:
    s, n = plan.strategy, plan.n
    if s in analytic.THREE_OBSERVABLE:
        dirs = np.array([tuple(X_AXIS), tuple(Y_AXIS), tuple(Z_AXIS)])
        if s == "three-joint":
            return _Layout([(joint_povm_three(), 3 * n, (0, 1, 2))], 3, dirs, 1.0 / math.sqrt(3.0))
        return _Layout([(projective_povm(d), n, (k,)) for k, d in enumerate(dirs)], 3, dirs)
    a, b = unit(plan.a), unit(plan.b)
    dirs = np.array([a, b])
    if s in analytic.JOINT:
        alpha = optimal_sharpness_pair(angle_between(a, b)).alpha
        return _Layout([(joint_povm_two(a, b, alpha, alpha), 2 * n, (0, 1))], 2, dirs, alpha)
    na = plan.n1 if plan.n1 is not None else n
    return _Layout([(projective_povm(a), na, (0,)), (projective_povm(b), 2 * n - na, (1,))], 2, dirs)


def _compile(layout: _Layout):
    rows, up, offsets, copies = [], [], [0], []
    for povm, m, axes in layout.groups:
        rows.append(povm.matrix)
        ind = np.zeros((len(povm), layout.n_axes), dtype=np.int64)
        for col, ax in enumerate(axes):
            ind[:, ax] = povm.labels[:, col] == 1
        up.append(ind)
        offsets.append(offsets[-1] + len(povm))
        copies.append(m)
    return (
        np.ascontiguousarray(np.vstack(rows), dtype=np.float64),
        np.array(offsets, dtype=np.int64),
        np.array(copies, dtype=np.int64),
        np.ascontiguousarray(np.vstack(up), dtype=np.int64),
    )


def _shots(layout: _Layout) -> np.ndarray:
    shots = np.zeros(layout.n_axes, dtype=np.int64)
    for _, m, axes in layout.groups:
        for ax in axes:
            shots[ax] += m
    return shots


def _estimator(plan: TrialPlan, layout: _Layout, shots: np.ndarray):
    """Return ``f(ups) -> estimates`` (both arrays of shape (T, n_axes))."""
    s, n = plan.strategy, plan.n
    adotb = float(layout.directions[0] @ layout.directions[1]) if layout.n_axes == 2 else 0.0

    if s in ("sep-unbiased", "sep-unbiased-split", "three-sep-unbiased"):
        return lambda ups: estimators.mean_estimate(ups, shots)
    if s in ("sep-biased", "three-sep-biased"):
        return lambda ups: estimators.shrinkage_estimate(ups, shots)
    if s == "bayes-single":
        tables = [np.array([estimators.bayes_single_estimate(r, m) for r in range(m + 1)]) for m in shots]
        return lambda ups: np.stack([t[ups[:, k]] for k, t in enumerate(tables)], axis=1)
    if s == "joint-unbiased":
        return lambda ups: estimators.joint_rescaled_estimate(ups, shots, layout.alpha)
    if s in ("joint-biased", "three-joint"):
        return lambda ups: estimators.joint_biased_estimate(ups, shots, layout.alpha)
    if s == "cross-weighted":
        return lambda ups: np.stack(estimators.cross_weighted_estimate(ups[:, 0], ups[:, 1], n, adotb), axis=1)
    if s == "bayes-joint":
        table = estimators.bayes_joint_table(n, adotb)
        return lambda ups: np.stack([table[ups[:, 0], ups[:, 1]], table[ups[:, 1], ups[:, 0]]], axis=1)
    raise ValueError(s)


def analytic_error_for(plan: TrialPlan) -> float:
    if plan.strategy in analytic.THREE_OBSERVABLE:
        return analytic.three_observable_error(plan.strategy, plan.n)
    a, b = unit(plan.a), unit(plan.b)
    q = analytic.ErrorQuery(
        plan.strategy, plan.n, eta=angle_between(a, b), adotb=float(np.clip(a @ b, -1, 1)), n1=plan.n1
    )
    return analytic.two_observable_error(q)


# -- simulation ---------------------------------------------------------------


def simulate_counts(povm: Povm, state, copies: int, rng_stream) -> OutcomeCounts:
    """Measure ``copies`` copies of ``state`` with ``povm``; tally +1 results per label axis."""
    if copies < 1:
        raise ValueError("copies must be >= 1")
    p = outcome_distribution(povm, state)
    cum = np.cumsum(p)
    u = np.asarray(rng_stream.random(copies)) * cum[-1]
    idx = np.minimum(np.sum(cum[None, :] <= u[:, None], axis=1), len(p) - 1)
    up = (povm.labels[idx] == 1).sum(axis=0)
    return OutcomeCounts(tuple(int(x) for x in up), (int(copies),) * povm.n_axes)


def simulate_trials(plan: TrialPlan, start: int, count: int):
    """States and per-axis up counts for trials ``start .. start+count-1``."""
    layout = _layout(plan)
    kern = kernels.get_kernel(plan.backend)
    return kern.simulate(seed_key(plan.master_seed), start, count, *_compile(layout))


def run_trials(plan: TrialPlan) -> ErrorReport:
    layout = _layout(plan)
    compiled = _compile(layout)
    shots = _shots(layout)
    estimate = _estimator(plan, layout, shots)
    kern = kernels.get_kernel(plan.backend)
    key = seed_key(plan.master_seed)
    three = layout.n_axes == 3

    def chunk(start):
        count = min(plan.chunk_size, plan.trials - start)
        states, ups = kern.simulate(key, start, count, *compiled)
        truth = states @ layout.directions.T
        est = estimate(ups)
        diff = est - truth
        per_axis = diff * diff
        if three:
            oor = np.linalg.norm(est, axis=1) > 1.0 + RANGE_TOL
            td = np.linalg.norm(states - est, axis=1) ** 2
        else:
            oor = np.any(np.abs(est) > 1.0 + RANGE_TOL, axis=1)
            td = None
        return per_axis, oor, td

    starts = range(0, plan.trials, plan.chunk_size)
    if plan.workers == 1:
        parts = [chunk(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=plan.workers) as pool:
            parts = list(pool.map(chunk, starts))

    per_axis = np.concatenate([p[0] for p in parts])
    sq = per_axis.sum(axis=1)
    t = plan.trials
    mean = math.fsum(sq) / t
    var = math.fsum((sq - mean) ** 2) / (t - 1) if t > 1 else math.inf
    td_mean = math.fsum(np.concatenate([p[2] for p in parts])) / t if three else None

    a_dot_b = eta = None
    if not three:
        a, b = layout.directions
        a_dot_b = float(a @ b)
        eta = angle_between(a, b)
    return ErrorReport(
        strategy=plan.strategy,
        n=plan.n,
        trials=t,
        seed=plan.master_seed,
        empirical_error=mean,
        standard_error=math.sqrt(var / t),
        analytic_error=analytic_error_for(plan),
        out_of_range_fraction=float(np.count_nonzero(np.concatenate([p[1] for p in parts]))) / t,
        per_observable_error=[math.fsum(col) / t for col in per_axis.T],
        mean_trace_distance_sq=td_mean,
        eta=eta,
        adotb=a_dot_b,
        backend=kernels.BACKEND if plan.backend is None else plan.backend,
    )


def sample_states(master_seed: int, trials: int) -> np.ndarray:
    """Pure states the Monte Carlo would draw for trials ``0 .. trials-1``."""
    from .bloch import sample_pure_state

    return np.array([tuple(sample_pure_state(derive_substream(master_seed, i))) for i in range(trials)])
