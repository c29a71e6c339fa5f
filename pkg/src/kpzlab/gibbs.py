"""Hall-Littlewood resampling weights and the rejection kernel.

The weight of a candidate path ``ell`` squeezed between neighbours ``top``
and ``bottom`` on a window [T0, T1] is a product over a site set S: every
time the gap to a neighbour decreases by one at a site of S, a factor
(1 - t**gap_before) is picked up.  Ordering violations on S give weight 0,
an infinite neighbour contributes factors identically 1.  Conditioned on
its endpoints and neighbours, a curve of an ensemble with this resampling
invariance is a uniform bridge reweighted by this W.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement, islice

import numpy as np

from .paths import BridgeSpec, UpRightPath, enumerate_bridges, pmf_at, sample_uniform_bridge_values

INFINITY = float("inf")
NEG_INFINITY = float("-inf")

ENUMERATION_GUARD = 2_000_000
TIE_TOL = 1e-12


class EnumerationGuardError(RuntimeError):
    """State space too large for exact enumeration; use the MC estimator."""


class ResampleError(RuntimeError):
    def __init__(self, trials, acceptance_estimate):
        super().__init__(
            f"no path accepted in {trials} trials "
            f"(running acceptance estimate {acceptance_estimate:.3g})"
        )
        self.trials = trials
        self.acceptance_estimate = acceptance_estimate


@dataclass(frozen=True)
class GibbsContext:
    """Window, site set and boundary curves for one resampling step."""

    t: float
    T0: int
    T1: int
    S: tuple
    top: object = INFINITY
    bottom: object = NEG_INFINITY

    def __post_init__(self):
        if not 0.0 < self.t < 1.0:
            raise ValueError("t must lie strictly in (0,1)")
        if self.T1 <= self.T0:
            raise ValueError("need T0 < T1")
        S = tuple(sorted(set(int(i) for i in self.S)))
        if any(i < self.T0 + 1 or i > self.T1 for i in S):
            raise ValueError("S must be contained in [T0+1, T1]")
        object.__setattr__(self, "S", S)
        for name in ("top", "bottom"):
            side = getattr(self, name)
            if isinstance(side, UpRightPath):
                if side.t0 > self.T0 or side.t1 < self.T1:
                    raise ValueError(f"{name} must be defined on all of [T0, T1]")
            elif name == "top" and side != INFINITY:
                raise ValueError("top must be an UpRightPath or INFINITY")
            elif name == "bottom" and side != NEG_INFINITY:
                raise ValueError("bottom must be an UpRightPath or NEG_INFINITY")

    def _side_values(self, side):
        if isinstance(side, UpRightPath):
            return np.array([side.at(i) for i in range(self.T0, self.T1 + 1)], dtype=np.int64)
        return None

    def top_values(self):
        return self._side_values(self.top)

    def bottom_values(self):
        return self._side_values(self.bottom)


def full_window(T0: int, T1: int) -> tuple:
    return tuple(range(T0 + 1, T1 + 1))


def _gap_factors_log(t: float, gaps: np.ndarray, s_idx: np.ndarray):
    """Per-row (product, ordered) for one neighbour side.

    gaps: (R, L) distance to the neighbour at each abscissa; s_idx indexes
    the sites of S relative to T0.  Rows that go out of order on S get
    product 0.  Accumulation is in log space so that windows with hundreds
    of factors cannot underflow the running product.
    """
    g_at = gaps[:, s_idx]
    g_before = gaps[:, s_idx - 1]
    ordered = np.all(g_at >= 0, axis=1)
    fires = (g_before - g_at) == 1
    # When a factor fires the previous gap is current gap + 1 >= 1, so each
    # factor lies in (1-t, 1] and the log is finite on ordered rows.  The
    # clip only touches rows that are already out of order (weight 0).
    g_pow = np.clip(g_before, 0, None).astype(np.float64)
    x = np.where(fires & ordered[:, None], t ** g_pow, 0.0)
    logw = np.sum(np.log1p(-x), axis=1)
    return logw, ordered


def weight_w_values(t: float, T0: int, T1: int, S: tuple, top_vals, bottom_vals, V: np.ndarray) -> np.ndarray:
    """Vectorized weights for a matrix of candidate paths.

    V has one row per candidate, columns indexed by T0..T1.  top_vals /
    bottom_vals are integer arrays on the same axis or None for an infinite
    neighbour.
    """
    V = np.asarray(V, dtype=np.int64)
    if V.ndim == 1:
        V = V[None, :]
    if V.shape[1] != T1 - T0 + 1:
        raise ValueError("candidate rows must span exactly [T0, T1]")
    s_idx = np.asarray(S, dtype=np.int64) - T0
    if len(s_idx) == 0:
        return np.ones(V.shape[0])
    logw = np.zeros(V.shape[0])
    ordered = np.ones(V.shape[0], dtype=bool)
    if top_vals is not None:
        lw, okay = _gap_factors_log(t, top_vals[None, :] - V, s_idx)
        logw += lw
        ordered &= okay
    if bottom_vals is not None:
        lw, okay = _gap_factors_log(t, V - bottom_vals[None, :], s_idx)
        logw += lw
        ordered &= okay
    return np.where(ordered, np.exp(logw), 0.0)


def weight_W(ctx: GibbsContext, ell: UpRightPath) -> float:
    """Acceptance weight of a single candidate path."""
    if ell.t0 > ctx.T0 or ell.t1 < ctx.T1:
        raise ValueError("candidate must be defined on all of [T0, T1]")
    vals = np.array([ell.at(i) for i in range(ctx.T0, ctx.T1 + 1)], dtype=np.int64)
    w = weight_w_values(ctx.t, ctx.T0, ctx.T1, ctx.S, ctx.top_values(), ctx.bottom_values(), vals)
    return float(w[0])


def _bridge_value_matrix(spec: BridgeSpec, chunk=200_000):
    """Yield value matrices covering the whole bridge space, chunked."""
    idx_iter = combinations(range(spec.n_steps), spec.n_up)
    while True:
        block = list(islice(idx_iter, chunk))
        if not block:
            return
        inc = np.zeros((len(block), spec.n_steps), dtype=np.int64)
        for r, pos in enumerate(block):
            inc[r, list(pos)] = 1
        vals = np.empty((len(block), spec.n_steps + 1), dtype=np.int64)
        vals[:, 0] = spec.z0
        vals[:, 1:] = spec.z0 + np.cumsum(inc, axis=1)
        yield vals


def acceptance_Z_exact(ctx: GibbsContext, a: int, b: int) -> float:
    """Mean weight over the full bridge space (exact, guarded)."""
    spec = BridgeSpec(ctx.T0, ctx.T1, a, b)
    if spec.count() > ENUMERATION_GUARD:
        raise EnumerationGuardError(
            f"|Omega| = {spec.count()} exceeds {ENUMERATION_GUARD}; use acceptance_Z_mc"
        )
    tot = 0.0
    top_vals, bottom_vals = ctx.top_values(), ctx.bottom_values()
    for vals in _bridge_value_matrix(spec):
        tot += float(np.sum(weight_w_values(ctx.t, ctx.T0, ctx.T1, ctx.S, top_vals, bottom_vals, vals)))
    return tot / spec.count()


def acceptance_Z_mc(rng, ctx: GibbsContext, a: int, b: int, n_samples: int):
    """Unbiased Monte-Carlo estimate of the acceptance probability.

    Returns (estimate, stderr).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    spec = BridgeSpec(ctx.T0, ctx.T1, a, b)
    vals = sample_uniform_bridge_values(rng, spec, n_samples)
    w = weight_w_values(ctx.t, ctx.T0, ctx.T1, ctx.S, ctx.top_values(), ctx.bottom_values(), vals)
    est = float(np.mean(w))
    stderr = float(np.std(w, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    return est, stderr


@dataclass(frozen=True)
class ResampleReport:
    accepted_path: UpRightPath
    trials: int
    acceptance_estimate: float


def gibbs_resample(rng, ctx: GibbsContext, a: int, b: int, max_trials: int = 100_000) -> ResampleReport:
    """Rejection sampling of the conditional law.

    Draws i.i.d. uniform bridges and one independent uniform per trial,
    accepting the first candidate whose weight exceeds its uniform.  The
    accepted path then carries the W/Z conditional law and the trial count
    is geometric with success parameter Z.
    """
    spec = BridgeSpec(ctx.T0, ctx.T1, a, b)
    top_vals, bottom_vals = ctx.top_values(), ctx.bottom_values()
    for trial in range(1, max_trials + 1):
        vals = sample_uniform_bridge_values(rng, spec, 1)
        u = rng.random()
        w = weight_w_values(ctx.t, ctx.T0, ctx.T1, ctx.S, top_vals, bottom_vals, vals)[0]
        if w > u:
            path = UpRightPath(ctx.T0, tuple(int(v) for v in vals[0]))
            return ResampleReport(path, trial, 1.0 / trial)
    raise ResampleError(max_trials, 0.0)


def gibbs_resample_many(rng, ctx: GibbsContext, a: int, b: int, n: int, max_rounds: int = 100_000):
    """Bulk rejection sampling: n accepted paths plus their trial counts.

    Returns (values, trials) with values an (n, window) integer matrix.
    Vectorizes each rejection round across the still-unaccepted slots, which
    preserves the per-slot law of the scalar sampler.
    """
    spec = BridgeSpec(ctx.T0, ctx.T1, a, b)
    top_vals, bottom_vals = ctx.top_values(), ctx.bottom_values()
    out = np.empty((n, spec.n_steps + 1), dtype=np.int64)
    trials = np.zeros(n, dtype=np.int64)
    pending = np.arange(n)
    for _ in range(max_rounds):
        if len(pending) == 0:
            return out, trials
        vals = sample_uniform_bridge_values(rng, spec, len(pending))
        u = rng.random(len(pending))
        w = weight_w_values(ctx.t, ctx.T0, ctx.T1, ctx.S, top_vals, bottom_vals, vals)
        trials[pending] += 1
        hit = w > u
        out[pending[hit]] = vals[hit]
        pending = pending[~hit]
    raise ResampleError(int(trials.max()), float(np.mean(trials == 0)))


def conditional_law_exact(ctx: GibbsContext, a: int, b: int) -> dict:
    """Exact conditional law {path: weight/Z} on an enumerable window."""
    spec = BridgeSpec(ctx.T0, ctx.T1, a, b)
    if spec.count() > ENUMERATION_GUARD:
        raise EnumerationGuardError(f"|Omega| = {spec.count()} too large for the exact law")
    paths = enumerate_bridges(spec)
    weights = np.array([weight_W(ctx, p) for p in paths])
    Z = float(np.sum(weights)) / len(paths)
    if Z == 0.0:
        raise ZeroDivisionError("acceptance probability is zero on this context")
    probs = weights / np.sum(weights)
    return dict(zip(paths, (float(p) for p in probs)))


def euler_c(t: float, tol: float = 1e-15) -> float:
    """Euler product prod_{i>=1} (1 - t**i), truncated with a tail bound.

    The unassigned multiplicative tail after K factors changes the value by
    at most t**(K+1)/(1-t), so the loop stops once that falls below tol.
    """
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0,1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    prod, power = 1.0, t
    for _ in range(1, 100_000):
        prod *= 1.0 - power
        power *= t
        if power / (1.0 - t) < tol:
            return prod
    return prod


@dataclass(frozen=True)
class LineEnsemble:
    """Weakly ordered family of up-right paths on a shared interval."""

    curves: tuple
    strict: bool = True

    def __post_init__(self):
        curves = tuple(self.curves)
        if not curves:
            raise ValueError("ensemble needs at least one curve")
        t0, t1 = curves[0].t0, curves[0].t1
        for c in curves:
            if (c.t0, c.t1) != (t0, t1):
                raise ValueError("curves must share one interval")
        if self.strict:
            for hi, lo in zip(curves, curves[1:]):
                if any(h < l for h, l in zip(hi.values, lo.values)):
                    raise ValueError("curves out of weak order")
        object.__setattr__(self, "curves", curves)

    @property
    def interval(self):
        return self.curves[0].t0, self.curves[0].t1

    def __len__(self):
        return len(self.curves)

    def __getitem__(self, i):
        return self.curves[i]


@dataclass
class MonotoneReport:
    """Exhaustive check of the averaged monotonicity of conditional weights.

    pair_rows: (T, k1, k2, lhs, rhs, ok) with lhs = c(t) * E[W | ell(T)=k1]
    and rhs = E[W | ell(T)=k2], for every k1 <= k2 attainable at T.  The set
    and tail variants are summarized by their check/failure counts, with
    only the violating tuples retained.
    """

    t: float
    c_t: float
    pair_rows: list
    set_pairs_checked: int
    set_pair_failures: list
    tail_rows: list

    @property
    def n_failures(self) -> int:
        return (sum(not r[-1] for r in self.pair_rows)
                + len(self.set_pair_failures)
                + sum(not r[-1] for r in self.tail_rows))

    @property
    def passed(self) -> bool:
        return self.n_failures == 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("T,k1,k2,lhs,rhs,pass\n")
        for T, k1, k2, lhs, rhs, ok in self.pair_rows:
            buf.write(f"{T},{k1},{k2},{lhs:.17g},{rhs:.17g},{int(ok)}\n")
        return buf.getvalue()


def verify_monotone_weights(t: float, spec: BridgeSpec, bottom: UpRightPath, S: tuple,
                          max_set_size: int = 3, tol: float = TIE_TOL) -> MonotoneReport:
    """Check the c(t)-monotonicity inequalities on one enumerable instance.

    Requires the instance hypotheses: bottom starts no higher than the
    bridge start and ends no higher than its end.
    """
    if bottom.t0 > spec.t0 or bottom.t1 < spec.t1:
        raise ValueError("bottom must cover the bridge interval")
    if bottom.at(spec.t0) > spec.z0 or bottom.at(spec.t1) > spec.z1:
        raise ValueError("need bottom endpoints at or below the bridge endpoints")
    c_t = euler_c(t)
    paths = enumerate_bridges(spec)
    vals = np.array([p.values for p in paths], dtype=np.int64)
    bvals = np.array([bottom.at(i) for i in range(spec.t0, spec.t1 + 1)], dtype=np.int64)
    weights = weight_w_values(t, spec.t0, spec.t1, tuple(S), None, bvals, vals)

    pair_rows, set_pair_failures, tail_rows = [], [], []
    set_pairs_checked = 0
    for T in range(spec.t0 + 1, spec.t1):
        col = vals[:, T - spec.t0]
        ks = list(range(spec.min_at(T), spec.max_at(T) + 1))
        w_sum = np.array([float(np.sum(weights[col == k])) for k in ks])
        counts = np.array([int(np.sum(col == k)) for k in ks])
        cond = w_sum / counts
        for i, j in combinations_with_replacement(range(len(ks)), 2):
            lhs, rhs = c_t * cond[i], cond[j]
            pair_rows.append((T, ks[i], ks[j], lhs, rhs, lhs <= rhs + tol))

        # order-respecting value sets A >= B, sizes up to max_set_size
        subsets = [s for size in range(1, max_set_size + 1)
                   for s in combinations(range(len(ks)), size)]
        means = np.array([w_sum[list(s)].sum() / counts[list(s)].sum() for s in subsets])
        mins = np.array([min(s) for s in subsets])
        maxs = np.array([max(s) for s in subsets])
        valid = mins[:, None] >= maxs[None, :]          # A rows, B cols
        bad = valid & (means[:, None] + tol < c_t * means[None, :])
        set_pairs_checked += int(np.sum(valid))
        for ia, ib in zip(*np.nonzero(bad)):
            A = tuple(ks[i] for i in subsets[ia])
            B = tuple(ks[i] for i in subsets[ib])
            set_pair_failures.append((T, B, A, c_t * means[ib], means[ia]))

        # tail comparison against c(t) times the free law
        Z = float(np.sum(weights))
        free_pmf = pmf_at(spec, T)
        for alpha in ks:
            p_cond = float(np.sum(weights[col >= alpha])) / Z
            p_free = sum(v for k, v in free_pmf.items() if k >= alpha)
            tail_rows.append((T, alpha, p_cond, c_t * p_free, p_cond >= c_t * p_free - tol))
    return MonotoneReport(t, c_t, pair_rows, set_pairs_checked, set_pair_failures, tail_rows)


def remark_counterexample_paths(n: int):
    """The flat-then-up bottom and up-then-flat comparison path on [0, 2n]."""
    bottom = UpRightPath(0, tuple([0] * (n + 1) + list(range(1, n + 1))))
    rival = UpRightPath(0, tuple(list(range(n + 1)) + [n] * n))
    return bottom, rival
