"""Partitions, skew branching coefficients and measures on plane partitions.

Partitions are tuples of weakly decreasing positive integers (no trailing
zeros).  The one-variable skew coefficients psi and phi drive everything:
chains of partitions weighted by them build the principal specializations,
the ascending measure on interlacing sequences, and the plane-partition
weight  A(pi) * zeta**diag(pi)  written as a two-sided product over
diagonal slices.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from itertools import product as iter_product

import numpy as np

from .gibbs import LineEnsemble
from .paths import UpRightPath


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------

def normalize_partition(parts) -> tuple:
    parts = tuple(int(p) for p in parts if int(p) != 0)
    if any(p < 0 for p in parts):
        raise ValueError("partition parts must be nonnegative")
    if any(a < b for a, b in zip(parts, parts[1:])):
        raise ValueError("parts must be weakly decreasing")
    return parts


def conjugate(lam) -> tuple:
    """Transpose of the diagram: lam'_i = #{j : lam_j >= i}."""
    lam = normalize_partition(lam)
    if not lam:
        return ()
    return tuple(sum(1 for p in lam if p >= i) for i in range(1, lam[0] + 1))


def weight_of(lam) -> int:
    return sum(lam)


def multiplicity(lam, i: int) -> int:
    return sum(1 for p in lam if p == i)


def is_horizontal_strip(lam, mu) -> bool:
    """lam > mu with no two added boxes in one column."""
    lam, mu = tuple(lam), tuple(mu)
    for k in range(max(len(lam), len(mu))):
        lk = lam[k] if k < len(lam) else 0
        mk = mu[k] if k < len(mu) else 0
        lk1 = lam[k + 1] if k + 1 < len(lam) else 0
        if not (lk >= mk >= lk1):
            return False
    return len(mu) <= len(lam)


def _conj_table(parts, top: int):
    """conj[j] = #parts >= j for j = 0..top+1, as a list."""
    cnt = [0] * (top + 2)
    for p in parts:
        cnt[p] += 1
    conj = [0] * (top + 2)
    acc = 0
    for j in range(top, 0, -1):
        acc += cnt[j]
        conj[j] = acc
    conj[0] = len(parts)
    return conj

_FACTOR_CACHE: dict = {}


def _strip_factor_mults(lam, mu):
    """t-independent structure of the skew coefficients.

    Returns (psi_mults, phi_mults) -- the multiplicities entering the
    products prod (1 - t**m) -- or None when lam/mu is not a horizontal
    strip.  Cached per (lam, mu).
    """
    key = (lam, mu)
    hit = _FACTOR_CACHE.get(key)
    if hit is not None:
        return hit if hit != () else None
    if not is_horizontal_strip(lam, mu):
        _FACTOR_CACHE[key] = ()
        return None
    top = lam[0] if lam else 0
    lc = _conj_table(lam, top)
    mc = _conj_table(mu, top)
    psi_m, phi_m = [], []
    for j in range(1, top + 1):
        if lc[j] == mc[j] and lc[j + 1] > mc[j + 1]:
            psi_m.append(mc[j] - mc[j + 1])
        if lc[j + 1] == mc[j + 1] and lc[j] > mc[j]:
            phi_m.append(lc[j] - lc[j + 1])
    hit = (tuple(psi_m), tuple(phi_m))
    _FACTOR_CACHE[key] = hit
    return hit


def psi(lam, mu, t: float) -> float:
    """One-variable skew coefficient of the monic family.

    Product of (1 - t**m_j(mu)) over columns j where the conjugate of mu
    sticks to lam at j but drops below it at j+1; zero off horizontal strips.
    """
    mults = _strip_factor_mults(tuple(lam), tuple(mu))
    if mults is None:
        return 0.0
    out = 1.0
    for m in mults[0]:
        out *= 1.0 - t ** m
    return out


def phi(lam, mu, t: float) -> float:
    """Dual skew coefficient: columns where lam sticks to mu at j+1 but
    exceeds it at j contribute (1 - t**m_j(lam))."""
    mults = _strip_factor_mults(tuple(lam), tuple(mu))
    if mults is None:
        return 0.0
    out = 1.0
    for m in mults[1]:
        out *= 1.0 - t ** m
    return out


def _trim(parts) -> tuple:
    """Drop trailing zeros of an already weakly decreasing tuple."""
    k = len(parts)
    while k and parts[k - 1] == 0:
        k -= 1
    return parts[:k]


def strips_below(lam):
    """All mu interlacing below lam (lam/mu a horizontal strip)."""
    lam = tuple(lam)
    if not lam:
        yield ()
        return
    ranges = []
    for k in range(len(lam)):
        lo = lam[k + 1] if k + 1 < len(lam) else 0
        ranges.append(range(lam[k], lo - 1, -1))
    for mu in iter_product(*ranges):
        yield _trim(mu)


def strips_above(lam, cap: int):
    """All nu with nu/lam a horizontal strip and nu_1 <= cap."""
    lam = tuple(lam)
    first_lo = lam[0] if lam else 0
    if cap < first_lo:
        return
    ranges = [range(first_lo, cap + 1)]
    for k in range(len(lam)):
        hi = lam[k]
        lo = lam[k + 1] if k + 1 < len(lam) else 0
        ranges.append(range(hi, lo - 1, -1))
    for nu in iter_product(*ranges):
        yield _trim(nu)


# ---------------------------------------------------------------------------
# principal specializations by branching
# ---------------------------------------------------------------------------

_Q_CACHE: dict = {}
_P_CACHE: dict = {}


def principal_Q(lam, zeta: float, N: int, t: float) -> float:
    """Q_lam at N variables all equal to zeta, by N-fold skew branching."""
    lam = normalize_partition(lam)
    if N < 0:
        raise ValueError("N must be nonnegative")
    key = (lam, N, t, zeta)
    cached = _Q_CACHE.get(key)
    if cached is not None:
        return cached
    if N == 0 or len(lam) > N:
        val = 1.0 if lam == () else 0.0
    else:
        val = 0.0
        for mu in strips_below(lam):
            val += phi(lam, mu, t) * zeta ** (weight_of(lam) - weight_of(mu)) \
                * principal_Q(mu, zeta, N - 1, t)
    _Q_CACHE[key] = val
    return val


def principal_P_ones(lam, M: int, t: float) -> float:
    """P_lam at M variables all equal to 1, by M-fold skew branching."""
    lam = normalize_partition(lam)
    key = (lam, M, t)
    cached = _P_CACHE.get(key)
    if cached is not None:
        return cached
    if M == 0 or len(lam) > M:
        val = 1.0 if lam == () else 0.0
    else:
        val = sum(psi(lam, mu, t) * principal_P_ones(mu, M - 1, t) for mu in strips_below(lam))
    _P_CACHE[key] = val
    return val


# ---------------------------------------------------------------------------
# the ascending measure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HahpParams:
    M: int
    N: int
    t: float
    zeta: float

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ValueError("M, N must be positive")
        if not (0.0 < self.t < 1.0 and 0.0 < self.zeta < 1.0):
            raise ValueError("t and zeta must lie strictly in (0,1)")

    @property
    def normalization(self) -> float:
        return ((1.0 - self.zeta) / (1.0 - self.t * self.zeta)) ** (self.N * self.M)


@dataclass(frozen=True)
class InterlacingSequence:
    """Chain of partitions empty < lam(1) < ... < lam(M), consecutive
    differences horizontal strips."""

    seq: tuple

    def __post_init__(self):
        seq = tuple(normalize_partition(p) for p in self.seq)
        prev = ()
        for k, lam in enumerate(seq, start=1):
            if not is_horizontal_strip(lam, prev):
                raise ValueError(f"step {k} is not a horizontal strip")
            prev = lam
        object.__setattr__(self, "seq", seq)

    def __len__(self):
        return len(self.seq)

    def __getitem__(self, i):
        return self.seq[i]

    @property
    def last(self):
        return self.seq[-1]

    def to_json(self) -> str:
        return json.dumps([list(p) for p in self.seq])

    @classmethod
    def from_json(cls, text: str) -> "InterlacingSequence":
        return cls(tuple(tuple(p) for p in json.loads(text)))


def hahp_prob(seq: InterlacingSequence, params: HahpParams) -> float:
    """Probability of one chain under the ascending measure."""
    if len(seq) != params.M:
        raise ValueError("sequence length must equal M")
    w = params.normalization
    prev = ()
    for lam in seq.seq:
        w *= psi(lam, prev, params.t)
        prev = lam
    return w * principal_Q(seq.last, params.zeta, params.N, params.t)


def hahp_tail_bound(params: HahpParams, H_max: int) -> float:
    """Upper bound on the mass of chains with lam(M)_1 > H_max.

    Chernoff over the geometric decay in zeta: for any rho in (zeta, 1) the
    tail is at most  norm * ((1-t*rho)/(1-rho))**(N*M) * (zeta/rho)**(H+1);
    a small rho grid is scanned and the best value returned.
    """
    t, zeta, NM = params.t, params.zeta, params.N * params.M
    best = np.inf
    for rho in np.linspace(zeta + 1e-4, 1.0 - 1e-4, 60):
        val = params.normalization \
            * ((1.0 - t * rho) / (1.0 - rho)) ** NM * (zeta / rho) ** (H_max + 1)
        best = min(best, float(val))
    return best


@dataclass
class HahpEnumeration:
    params: HahpParams
    H_max: int
    items: list                     # (InterlacingSequence, probability)
    listed_mass: float
    tail_bound: float               # analytic geometric bound on missing mass

    @property
    def complement(self) -> float:
        return max(0.0, 1.0 - self.listed_mass)


ENUM_SEQUENCE_GUARD = 3_000_000


def enumerate_hahp(params: HahpParams, H_max: int) -> HahpEnumeration:
    """All chains with lam(M)_1 <= H_max and their exact probabilities."""
    if H_max < 1:
        raise ValueError("H_max must be >= 1")
    chains = [((), 1.0)]
    for _ in range(params.M):
        nxt = []
        for prefix, pw in chains:
            lam = prefix[-1] if prefix else ()
            for nu in strips_above(lam, H_max):
                nxt.append((prefix + (nu,), pw * psi(nu, lam, params.t)))
        if len(nxt) > ENUM_SEQUENCE_GUARD:
            raise RuntimeError("sequence count exceeds the enumeration guard")
        chains = nxt
    items = []
    total = 0.0
    for prefix, pw in chains:
        p = params.normalization * pw * principal_Q(prefix[-1], params.zeta, params.N, params.t)
        if p > 0.0:
            items.append((InterlacingSequence(prefix), p))
            total += p
    return HahpEnumeration(params, H_max, items, total, hahp_tail_bound(params, H_max))


class DenseQTables:
    """Vectorized level tables of the zeta-specialized dual functions.

    ``Q[k]`` is a flat array over partitions with at most N parts encoded
    base (H+1); entry nu holds Q_nu at k variables equal to zeta.  The level
    recursion sums over the interlacing grid below each nu with the dual
    coefficient factors, which localize at the distinct part values of nu:
    value v of multiplicity m contributes (1 - t**m) exactly when the
    candidate below matches nu's conjugate at v+1 but drops below it at v.
    """

    def __init__(self, t: float, zeta: float, N: int, H: int):
        if N > 6 or (H + 1) ** N > 60_000_000:
            raise ValueError("dense table too large; lower N or H")
        self.t, self.zeta, self.N, self.H = t, zeta, N, H
        B = H + 1
        self._powers = np.array([B ** (N - 1 - i) for i in range(N)], dtype=np.int64)
        zpow = zeta ** np.arange(0, N * H + 1)
        self.Q = [np.zeros(B ** N) for _ in range(N + 1)]
        self.Q[0][0] = 1.0
        for k in range(1, N + 1):
            prev, cur = self.Q[k - 1], self.Q[k]
            cur[0] = 1.0
            for nu in _partitions_in_box(min(k, N), H):
                grid = _grid_below(nu, N)
                w = _phi_factors_grid(nu, grid, t)
                codes = grid @ self._powers
                wsum = float(np.sum(w * zpow[weight_of(nu) - np.sum(grid, axis=1)]
                                    * prev[codes]))
                cur[self.encode(nu)] = wsum

    def encode(self, lam) -> int:
        code = 0
        B = self.H + 1
        for i in range(self.N):
            code = code * B + (lam[i] if i < len(lam) else 0)
        return code

    def value(self, lam, k: int | None = None) -> float:
        lam = tuple(lam)
        if len(lam) > self.N:
            return 0.0
        if lam and lam[0] > self.H:
            raise ValueError("partition exceeds the table height")
        return float(self.Q[self.N if k is None else k][self.encode(lam)])


_DENSE_CACHE: dict = {}


def dense_q_tables(t: float, zeta: float, N: int, H: int) -> DenseQTables:
    """Process-wide cache of the dense level tables."""
    key = (t, zeta, N, H)
    tab = _DENSE_CACHE.get(key)
    if tab is None:
        tab = DenseQTables(t, zeta, N, H)
        _DENSE_CACHE[key] = tab
    return tab


def _partitions_in_box(max_len: int, H: int):
    """Nonempty partitions with at most max_len parts, parts <= H."""
    def rec(prefix, hi):
        for v in range(hi, 0, -1):
            cur = prefix + (v,)
            yield cur
            if len(cur) < max_len:
                yield from rec(cur, v)
    yield from rec((), H)


def _grid_below(nu, width: int) -> np.ndarray:
    """All kappa interlacing below nu, as an (G, width) int matrix."""
    ranges = []
    for i in range(len(nu)):
        lo = nu[i + 1] if i + 1 < len(nu) else 0
        ranges.append(np.arange(nu[i], lo - 1, -1))
    grids = np.meshgrid(*ranges, indexing="ij") if ranges else []
    G = int(np.prod([len(r) for r in ranges])) if ranges else 1
    out = np.zeros((G, width), dtype=np.int64)
    for i, g in enumerate(grids):
        out[:, i] = g.reshape(-1)
    return out


def _conj_at_grid(grid: np.ndarray, v: int) -> np.ndarray:
    return np.sum(grid >= v, axis=1)


def _phi_factors_grid(nu, grid: np.ndarray, t: float) -> np.ndarray:
    """phi_{nu/kappa}(t) for every row kappa of the interlacing grid.

    The grid construction guarantees the horizontal-strip condition, so only
    the boundary factors remain; they sit at the distinct part values of nu.
    """
    w = np.ones(grid.shape[0])
    nu_arr = np.asarray(nu)
    for v in sorted(set(nu)):
        m = int(np.sum(nu_arr == v))
        nu_conj_v = int(np.sum(nu_arr >= v))
        nu_conj_v1 = int(np.sum(nu_arr >= v + 1))
        cond = (_conj_at_grid(grid, v + 1) == nu_conj_v1) \
            & (_conj_at_grid(grid, v) < nu_conj_v)
        w = np.where(cond, w * (1.0 - t ** m), w)
    return w


def _psi_factors_grid(mu, grid: np.ndarray, t: float) -> np.ndarray:
    """psi_{nu/mu}(t) for every row nu of a grid interlacing above mu."""
    w = np.ones(grid.shape[0])
    mu_arr = np.asarray(mu) if mu else np.zeros(0, dtype=np.int64)
    for j in sorted(set(mu)):
        m = int(np.sum(mu_arr == j))
        mu_conj_j = int(np.sum(mu_arr >= j))
        mu_conj_j1 = int(np.sum(mu_arr >= j + 1))
        cond = (_conj_at_grid(grid, j) == mu_conj_j) \
            & (_conj_at_grid(grid, j + 1) > mu_conj_j1)
        w = np.where(cond, w * (1.0 - t ** m), w)
    return w


def _grid_above(mu, cap: int, width: int) -> np.ndarray:
    """All nu interlacing above mu with nu_1 <= cap, as (G, width) ints."""
    ranges = [np.arange(mu[0] if mu else 0, cap + 1)]
    for i in range(len(mu)):
        lo = mu[i + 1] if i + 1 < len(mu) else 0
        ranges.append(np.arange(mu[i], lo - 1, -1))
    ranges = ranges[:width]
    grids = np.meshgrid(*ranges, indexing="ij")
    G = int(np.prod([len(r) for r in ranges]))
    out = np.zeros((G, width), dtype=np.int64)
    for i, g in enumerate(grids):
        out[:, i] = g.reshape(-1)
    return out


class HahpSampler:
    """Exact sequential sampler of the ascending measure.

    The chain lam(1), ..., lam(M) is Markov with transition

        P(mu -> nu) = ((1-zeta)/(1-t*zeta))**N * psi_{nu/mu}(t)
                      * Q_nu(zeta^N) / Q_mu(zeta^N),

    whose row sums are exactly 1 by the one-variable skew Cauchy identity.
    Candidates are capped at nu_1 <= H_max; the capped mass at each step is
    known exactly, draws landing in it are logged and redrawn, so the
    sampled law is the per-step-capped measure.  The dense path precomputes
    a vectorized level table of the zeta-specialized duals once per
    (t, zeta, N, H_max); the scalar path recurses per partition and serves
    as a slow cross-check.
    """

    def __init__(self, params: HahpParams, H_max: int = 32, dense: bool = True):
        self.params = params
        self.H_max = H_max
        self.tail_events = 0
        self.max_step_tail = 0.0
        self._rows: dict = {}
        self._tables = dense_q_tables(params.t, params.zeta, params.N, H_max) if dense else None

    def _q(self, lam) -> float:
        if self._tables is not None:
            return self._tables.value(lam)
        return principal_Q(lam, self.params.zeta, self.params.N, self.params.t)

    def _row(self, mu):
        row = self._rows.get(mu)
        if row is not None:
            return row
        p = self.params
        total = ((1.0 - p.t * p.zeta) / (1.0 - p.zeta)) ** p.N * self._q(mu)
        if self._tables is not None:
            width = max(p.N, len(mu) + 1)
            grid = _grid_above(mu, self.H_max, width)
            if width > p.N:                     # parts beyond N carry zero mass
                grid = grid[grid[:, p.N:].max(axis=1) == 0][:, : p.N]
            codes = grid @ self._tables._powers
            w = _psi_factors_grid(mu, grid, p.t) * self._tables.Q[p.N][codes]
            keep = w > 0.0
            cands = [_trim(tuple(int(v) for v in rowv)) for rowv in grid[keep]]
            cum = np.cumsum(w[keep]) / total
        else:
            cands, weights = [], []
            for nu in strips_above(mu, self.H_max):
                q = self._q(nu)
                if q <= 0.0:
                    continue
                cands.append(nu)
                weights.append(psi(nu, mu, p.t) * q)
            cum = np.cumsum(weights) / total
        row = (cands, cum)
        self._rows[mu] = row
        return row

    def sample_raw(self, rng) -> tuple:
        """One chain as a bare tuple of partitions (no re-validation)."""
        mu, out = (), []
        for _ in range(self.params.M):
            cands, cum = self._row(mu)
            while True:
                u = rng.random()
                if u <= cum[-1]:
                    break
                self.max_step_tail = max(self.max_step_tail, 1.0 - float(cum[-1]))
                self.tail_events += 1
            mu = cands[int(np.searchsorted(cum, u, side="left"))]
            out.append(mu)
        return tuple(out)

    def sample(self, rng) -> InterlacingSequence:
        return InterlacingSequence(self.sample_raw(rng))


def sample_hahp_exact(rng, params: HahpParams, H_max: int = 60) -> InterlacingSequence:
    """One exact draw (cacheless convenience; use HahpSampler for bulk work)."""
    return HahpSampler(params, H_max).sample(rng)


# ---------------------------------------------------------------------------
# plane partitions
# ---------------------------------------------------------------------------

@dataclass
class PlanePartition:
    """Nonincreasing (rows and columns) array of nonnegative integers,
    supported in an M x N box, with an optional height cap carried along."""

    entries: np.ndarray
    height_cap: int | None = None

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=np.int64)
        if a.ndim != 2:
            raise ValueError("entries must be a 2-d array")
        if np.any(a < 0):
            raise ValueError("entries must be nonnegative")
        if np.any(a[:, 1:] > a[:, :-1]) or np.any(a[1:, :] > a[:-1, :]):
            raise ValueError("rows and columns must be nonincreasing")
        if self.height_cap is not None and np.any(a > self.height_cap):
            raise ValueError("entry exceeds the height cap")
        self.entries = a

    @property
    def shape(self):
        return self.entries.shape

    def diag_sum(self) -> int:
        return int(np.trace(self.entries))

    def slice(self, t: int) -> tuple:
        """Diagonal slice (entries at column - row = t), as a partition."""
        d = np.diagonal(self.entries, offset=t)
        return normalize_partition(tuple(int(v) for v in d))

    def two_sided_sequence(self):
        """Slices from t = -(rows-1) .. (cols-1): ascending then descending."""
        rows, cols = self.entries.shape
        return [self.slice(t) for t in range(-(rows - 1), cols)]

    def ascending_sequence(self) -> InterlacingSequence:
        """The chain lam(1..M) = slices t = -(M-1) .. 0."""
        rows = self.entries.shape[0]
        return InterlacingSequence(tuple(self.slice(t) for t in range(-(rows - 1), 1)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        for row in self.entries:
            buf.write(",".join(str(int(v)) for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, height_cap=None) -> "PlanePartition":
        rows = [[int(v) for v in ln.split(",")] for ln in text.strip().splitlines()]
        return cls(np.array(rows, dtype=np.int64), height_cap)


def plane_partition_from_two_sided(slices, rows: int, cols: int) -> PlanePartition:
    """Assemble the entry matrix from slices t = -(rows-1) .. (cols-1)."""
    if len(slices) != rows + cols - 1:
        raise ValueError("need rows+cols-1 slices")
    for t, sl in zip(range(-(rows - 1), cols), slices):
        if len(sl) > (min(rows, cols - t) if t >= 0 else min(cols, rows + t)):
            raise ValueError(f"slice at offset {t} does not fit the box")
    a = np.zeros((rows, cols), dtype=np.int64)
    for i in range(rows):
        for j in range(cols):
            sl = slices[j - i + rows - 1]
            k = min(i, j)
            a[i, j] = sl[k] if k < len(sl) else 0
    return PlanePartition(a)


def _coupling_term(n: int, left, right, t: float) -> float:
    """Weight factor between consecutive slices lam^{n-1} = left, lam^n = right."""
    return psi(right, left, t) if n <= 0 else phi(left, right, t)


def plane_partition_weight(pi: PlanePartition, t: float, zeta: float) -> float:
    """zeta**diag * two-sided psi/phi product over the diagonal slices."""
    rows, cols = pi.entries.shape
    slices = {n: pi.slice(n) for n in range(-(rows - 1), cols)}
    slices[-rows] = ()
    slices[cols] = ()
    w = zeta ** pi.diag_sum()
    for n in range(-(rows - 1), cols + 1):
        w *= _coupling_term(n, slices[n - 1], slices[n], t)
    return w


def weight_from_sequence(two_sided, t: float, zeta: float, apex_index: int | None = None) -> float:
    """Same weight computed from an explicit two-sided slice list.

    ``two_sided`` runs from the far ascending end to the far descending end;
    the apex (diagonal slice) is detected as the point where the interlacing
    direction flips, or can be given explicitly.  Runs of equal slices make
    the detection ambiguous but leave the weight unchanged.
    """
    seqs = [normalize_partition(s) for s in two_sided]
    apex = apex_index
    if apex is None:
        apex = 0
        for k in range(len(seqs) - 1):
            if not is_horizontal_strip(seqs[k + 1], seqs[k]):
                apex = k
                break
            apex = k + 1
    w = zeta ** weight_of(seqs[apex])
    prev = ()
    for lam in seqs[: apex + 1]:
        w *= psi(lam, prev, t)
        prev = lam
    for k in range(apex, len(seqs) - 1):
        w *= phi(seqs[k], seqs[k + 1], t)
    w *= phi(seqs[-1], (), t)
    return w


# ---------------------------------------------------------------------------
# single-cell Metropolis dynamics
# ---------------------------------------------------------------------------

def _local_weight_ratio(pi: np.ndarray, i: int, j: int, new_val: int, t: float, zeta: float,
                        rows: int, cols: int) -> float:
    """Weight ratio of the single-cell update (i,j) -> new_val.

    Only the slice n = j - i and its couplings to the two neighbouring
    slices change, plus the zeta power when the cell sits on the diagonal.
    """
    n = j - i
    def get_slice(m):
        if m < -(rows - 1) or m > cols - 1:
            return ()
        return normalize_partition(tuple(int(v) for v in np.diagonal(pi, offset=m)))

    left, mid, right = get_slice(n - 1), get_slice(n), get_slice(n + 1)
    pos = i if n >= 0 else j           # index of the cell inside its slice
    mid_new = list(np.diagonal(pi, offset=n))
    mid_new[pos] = new_val
    mid_new = normalize_partition(tuple(int(v) for v in mid_new))

    old = _coupling_term(n, left, mid, t) * _coupling_term(n + 1, mid, right, t)
    new = _coupling_term(n, left, mid_new, t) * _coupling_term(n + 1, mid_new, right, t)
    ratio = new / old
    if n == 0:
        ratio *= zeta ** (new_val - int(pi[i, j]))
    return ratio


def _propose(pi: np.ndarray, i: int, j: int, delta: int, H: int, rows: int, cols: int):
    """New cell value if the move keeps a capped plane partition, else None."""
    v = int(pi[i, j]) + delta
    if v < 0 or v > H:
        return None
    if delta > 0:
        up = pi[i - 1, j] if i > 0 else H
        lf = pi[i, j - 1] if j > 0 else H
        if v > min(up, lf):
            return None
    else:
        dn = pi[i + 1, j] if i < rows - 1 else 0
        rt = pi[i, j + 1] if j < cols - 1 else 0
        if v < max(dn, rt):
            return None
    return v


def mcmc_plane_partition(rng, M: int, N: int, H: int, t: float, zeta: float, steps: int,
                         burn_in: int = 0, thin: int = 1, start: PlanePartition | None = None):
    """Metropolis chain on plane partitions in an M x N box with entries <= H.

    Proposal: uniform cell, uniform +-1; moves breaking monotonicity or the
    cap are rejected in place.  Acceptance min(1, weight ratio) targets the
    cap-truncated measure.  Yields snapshots every ``thin`` steps after
    ``burn_in``.
    """
    if H < 1:
        raise ValueError("H must be >= 1")
    pi = np.zeros((M, N), dtype=np.int64) if start is None else start.entries.copy()
    cells = rng.integers(0, M * N, size=steps)
    deltas = rng.integers(0, 2, size=steps) * 2 - 1
    us = rng.random(steps)
    for k in range(steps):
        i, j = divmod(int(cells[k]), N)
        v = _propose(pi, i, j, int(deltas[k]), H, M, N)
        if v is not None:
            ratio = _local_weight_ratio(pi, i, j, v, t, zeta, M, N)
            if ratio >= 1.0 or us[k] < ratio:
                pi[i, j] = v
        if k >= burn_in and (k - burn_in) % thin == 0:
            yield PlanePartition(pi.copy(), H)


def enumerate_boxed_plane_partitions(M: int, N: int, H: int):
    """All plane partitions in an M x N box with entries <= H."""
    out = []
    def rec(rows):
        if len(rows) == M:
            out.append(PlanePartition(np.array(rows, dtype=np.int64), H))
            return
        upper = rows[-1] if rows else [H] * N
        def build(row, j):
            if j == N:
                rec(rows + [row])
                return
            hi = min(upper[j], row[j - 1] if j > 0 else H)
            for v in range(hi, -1, -1):
                build(row + [v], j + 1)
        build([], 0)
    rec([])
    return out


def metropolis_kernel_matrix(states, t: float, zeta: float, H: int) -> np.ndarray:
    """Exact single-cell Metropolis transition matrix on an explicit state list."""
    M, N = states[0].entries.shape
    index = {s.entries.tobytes(): k for k, s in enumerate(states)}
    n = len(states)
    K = np.zeros((n, n))
    p_move = 1.0 / (2 * M * N)
    for a, s in enumerate(states):
        w_a = plane_partition_weight(s, t, zeta)
        for i in range(M):
            for j in range(N):
                for delta in (-1, 1):
                    v = _propose(s.entries, i, j, delta, H, M, N)
                    if v is None:
                        K[a, a] += p_move
                        continue
                    nxt = s.entries.copy()
                    nxt[i, j] = v
                    b = index[nxt.tobytes()]
                    acc = min(1.0, plane_partition_weight(states[b], t, zeta) / w_a)
                    K[a, b] += p_move * acc
                    K[a, a] += p_move * (1.0 - acc)
    return K


# ---------------------------------------------------------------------------
# line ensembles from chains
# ---------------------------------------------------------------------------

def line_ensemble_from_sequence(seq: InterlacingSequence, n_curves: int | None = None) -> LineEnsemble:
    """Conjugate-part curves L_j(i) = lam(i)'_j on [0, M].

    The horizontal-strip condition makes every curve an up-right path and
    conjugation keeps them weakly ordered.
    """
    M = len(seq)
    if n_curves is None:
        n_curves = max(1, seq.last[0] if seq.last else 1)
    conjs = [()] + [conjugate(lam) for lam in seq.seq]
    curves = []
    for j in range(1, n_curves + 1):
        vals = tuple(c[j - 1] if j - 1 < len(c) else 0 for c in conjs)
        curves.append(UpRightPath(0, vals))
    return LineEnsemble(tuple(curves))
