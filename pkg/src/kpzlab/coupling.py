"""Strong coupling of conditioned Bernoulli walks with Brownian bridges.

The construction is dyadic: the walk midpoint is quantile-coupled to the
Gaussian that the bridge takes at time 1/2, and the two halves are built
from independent couplings of half the size, glued by

    B(s) = B1(2s)/sqrt(2) + s * sigma * N           on [0, 1/2],
    B(s) = B2(2s-1)/sqrt(2) + (1-s) * sigma * N     on [1/2, 1],

with sigma**2 = p(1-p), which is again a Brownian bridge of variance
sigma**2 exactly.  The coupling quality is measured by

    delta(n, z) = max over integer j of |sqrt(n) B(j/n) + (j/n) z - S_j|.

Sizes are powers of two; couplings of size <= 2 pair the sides
independently, which the recursion tolerates.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, ndtr


class CouplingError(ValueError):
    pass


def _log_binom(n, k):
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def conditional_midpoint_pmf(n: int, m: int, z: int):
    """Law of S_m given S_n = z: C(m,w) C(n-m,z-w) / C(n,z).

    Exchangeability makes this independent of the Bernoulli parameter.
    Returns (support, pmf) arrays.
    """
    if not (0 <= z <= n and 0 <= m <= n):
        raise CouplingError("need 0 <= z <= n and 0 <= m <= n")
    lo = max(0, z - (n - m))
    hi = min(m, z)
    w = np.arange(lo, hi + 1)
    logp = _log_binom(m, w) + _log_binom(n - m, z - w) - _log_binom(n, z)
    p = np.exp(logp - logp.max())
    return w, p / p.sum()


def quantile_couple_midpoint(normal_draw, n: int, m: int, z: int, p: float,
                             allow_general_m: bool = False):
    """Quantile-couple the Gaussian Z = (m/n) z + sqrt(p(1-p) m (1-m/n)) N
    with the conditional midpoint; returns (Z, W) with W carrying exactly
    the conditional law and nondecreasing in the normal draw."""
    if abs(2 * m - n) > 1 and not allow_general_m:
        raise CouplingError("midpoint coupling expects |2m - n| <= 1")
    if not 0.0 < p < 1.0:
        raise CouplingError("p must lie in (0,1)")
    draw = np.asarray(normal_draw, dtype=float)
    Z = (m / n) * z + math.sqrt(p * (1 - p) * m * (1 - m / n)) * draw
    support, pmf = conditional_midpoint_pmf(n, m, z)
    cum = np.cumsum(pmf)
    cum[-1] = 1.0
    W = support[np.searchsorted(cum, ndtr(draw), side="left")]
    return Z, W


@dataclass(frozen=True)
class CouplingSample:
    """Joint draw: bridge on the grid j/n, walk on 0..n, and their delta."""

    n: int
    z: int
    p: float
    bridge: np.ndarray
    walk: np.ndarray
    delta: float


class _PmfCache(dict):
    def row(self, k, z):
        key = (k, z)
        hit = self.get(key)
        if hit is None:
            support, pmf = conditional_midpoint_pmf(k, k // 2, z)
            cum = np.cumsum(pmf)
            cum[-1] = 1.0
            hit = (support, cum)
            self[key] = hit
        return hit


def _couple_batch(rng, k: int, zvec: np.ndarray, p: float, cache: _PmfCache):
    """(bridge, walk) matrices of shape (R, k+1) for per-replica endpoints."""
    R = len(zvec)
    sigma = math.sqrt(p * (1 - p))
    if k == 1:
        B = np.zeros((R, 2))
        S = np.stack([np.zeros(R, dtype=np.int64), zvec], axis=1)
        return B, S
    if k == 2:
        B = np.zeros((R, 3))
        B[:, 1] = 0.5 * sigma * rng.standard_normal(R)
        mid = zvec // 2 + ((zvec % 2) & (rng.random(R) < 0.5)).astype(np.int64)
        S = np.stack([np.zeros(R, dtype=np.int64), mid, zvec], axis=1)
        return B, S
    h = k // 2
    N = rng.standard_normal(R)
    u = ndtr(N)
    W = np.empty(R, dtype=np.int64)
    for z in np.unique(zvec):
        sel = zvec == z
        support, cum = cache.row(k, int(z))
        W[sel] = support[np.searchsorted(cum, u[sel], side="left")]
    B1, S1 = _couple_batch(rng, h, W, p, cache)
    B2, S2 = _couple_batch(rng, h, zvec - W, p, cache)
    grid = np.arange(k + 1) / k
    B = np.empty((R, k + 1))
    B[:, : h + 1] = B1 / math.sqrt(2) + grid[: h + 1] * sigma * N[:, None]
    B[:, h:] = B2 / math.sqrt(2) + (1.0 - grid[h:]) * sigma * N[:, None]
    S = np.empty((R, k + 1), dtype=np.int64)
    S[:, : h + 1] = S1
    S[:, h:] = W[:, None] + S2
    return B, S


def _check_size(n: int):
    if n < 1 or (n & (n - 1)) != 0:
        raise CouplingError("size n must be a power of two")


def kmt_couple_batch(rng, n: int, z: int, p: float, replicas: int):
    """Vectorized dyadic coupling; returns (bridge, walk, delta) arrays."""
    _check_size(n)
    if not 0 <= z <= n:
        raise CouplingError("endpoint z must lie in 0..n")
    if not 0.0 < p < 1.0:
        raise CouplingError("p must lie in (0,1)")
    cache = _PmfCache()
    zvec = np.full(replicas, z, dtype=np.int64)
    B, S = _couple_batch(rng, n, zvec, p, cache)
    grid = np.arange(n + 1) / n
    delta = np.max(np.abs(math.sqrt(n) * B + grid[None, :] * z - S), axis=1)
    return B, S, delta


def kmt_couple(rng, n: int, z: int, p: float) -> CouplingSample:
    """One joint draw of (Brownian bridge grid, conditioned walk, delta)."""
    B, S, delta = kmt_couple_batch(rng, n, z, p, 1)
    return CouplingSample(n, z, p, B[0], S[0], float(delta[0]))


@dataclass
class DeltaGrowthTable:
    """Per-size medians and upper quantiles of delta, plus a least-squares
    fit of the median against (log n)**2."""

    p: float
    rows: list                       # (n, z, median, q99)
    slope: float
    intercept: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,z,median_delta,q99_delta\n")
        for n, z, med, q99 in self.rows:
            buf.write(f"{n},{z},{med:.17g},{q99:.17g}\n")
        return buf.getvalue()


def delta_growth_experiment(rng, p: float, n_list, replicas: int = 400) -> DeltaGrowthTable:
    """Median and 0.99-quantile of delta(n, floor(p n)) across sizes."""
    rows = []
    for n in n_list:
        _check_size(n)
        z = int(math.floor(p * n))
        _, _, delta = kmt_couple_batch(rng, n, z, p, replicas)
        rows.append((n, z, float(np.median(delta)), float(np.quantile(delta, 0.99))))
    x = np.array([math.log(n) ** 2 for n, *_ in rows])
    y = np.array([r[2] for r in rows])
    slope, intercept = np.polyfit(x, y, 1)
    return DeltaGrowthTable(p, rows, float(slope), float(intercept))


def local_clt_check(n: int, z: int, w_max: float):
    """Exact conditional pmf of the midpoint against the Gaussian density
    with variance (n/4)(z/n)(1 - z/n), over centered offsets |w| <= w_max.

    Returns (w, exact, gauss, max relative error).
    """
    m = n // 2
    center = (m / n) * z
    sigma2 = (n / 4.0) * (z / n) * (1.0 - z / n)
    lo = max(max(0, z - (n - m)), int(math.ceil(center - w_max)))
    hi = min(min(m, z), int(math.floor(center + w_max)))
    k = np.arange(lo, hi + 1)
    exact = np.exp(_log_binom(m, k) + _log_binom(n - m, z - k) - _log_binom(n, z))
    w = k - center
    gauss = np.exp(-w ** 2 / (2.0 * sigma2)) / math.sqrt(2.0 * math.pi * sigma2)
    rel = np.abs(exact - gauss) / gauss
    return w, exact, gauss, float(np.max(rel))
