"""KPZ scaling maps, a Monte-Carlo Tracy-Widom reference, and diagnostics.

The three models share the 1/3 : 2/3 scaling skeleton: the raw height or
top-line curve is centered by a hydrodynamic profile (value, slope and
curvature at the observation point) and divided by a model constant times
N**(1/3), with the spatial coordinate in units of N**(2/3).  The GUE
Tracy-Widom reference used by the one-point gates is generated by an
independent oracle (tridiagonal beta = 2 ensemble, largest eigenvalue via
Sturm bisection) rather than hard-coded.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats


# ---------------------------------------------------------------------------
# scaling specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingSpec:
    """Model tag 'HL' | 'SV' | 'ASEP' with its scaling constants.

    HL / SV carry (mu, zeta); ASEP carries alpha.  ``f``, ``fp``, ``fpp``
    are the centering profile and its derivatives at the observation point,
    ``sigma`` the fluctuation constant, ``slope`` the local line-ensemble
    slope used by increment diagnostics.
    """

    model: str
    mu: float = 1.0
    zeta: float = 0.5
    alpha: float = 0.5

    def __post_init__(self):
        if self.model not in ("HL", "SV", "ASEP"):
            raise ValueError("model must be HL, SV or ASEP")
        if self.model in ("HL", "SV"):
            if not 0.0 < self.zeta < 1.0:
                raise ValueError("zeta must lie in (0,1)")
            if not self.zeta < self.mu < 1.0 / self.zeta:
                raise ValueError("mu must lie in (zeta, 1/zeta)")
        elif not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0,1)")

    @property
    def sigma(self) -> float:
        if self.model in ("HL", "SV"):
            z, m = self.zeta, self.mu
            return (z * m) ** (1 / 6) * (1 - math.sqrt(z * m)) ** (2 / 3) \
                * (1 - math.sqrt(z / m)) ** (2 / 3) / (1 - z)
        a = self.alpha
        return 2.0 ** (-4 / 3) * (1 - a * a) ** (2 / 3)

    @property
    def f(self) -> float:
        if self.model == "HL":
            return 1.0 - (1 - math.sqrt(self.zeta * self.mu)) ** 2 / (1 - self.zeta)
        if self.model == "SV":
            return (1 - math.sqrt(self.zeta * self.mu)) ** 2 / (1 - self.zeta)
        return (1 - self.alpha) ** 2 / 4

    @property
    def fp(self) -> float:
        if self.model == "HL":
            return math.sqrt(self.zeta) * (1 - math.sqrt(self.zeta * self.mu)) \
                / (math.sqrt(self.mu) * (1 - self.zeta))
        if self.model == "SV":
            return -math.sqrt(self.zeta) * (1 - math.sqrt(self.zeta * self.mu)) \
                / (math.sqrt(self.mu) * (1 - self.zeta))
        return -(1 - self.alpha) / 2

    @property
    def fpp(self) -> float:
        if self.model == "HL":
            return -math.sqrt(self.zeta) / (2 * self.mu ** 1.5 * (1 - self.zeta))
        if self.model == "SV":
            return math.sqrt(self.zeta) / (2 * self.mu ** 1.5 * (1 - self.zeta))
        return 0.5

    @property
    def slope(self) -> float:
        """Local slope of the associated line ensemble (in (0,1))."""
        if self.model in ("HL", "SV"):
            return abs(ScalingSpec("HL", self.mu, self.zeta).fp)
        return -self.fp

    @property
    def center(self) -> float:
        """Observation point of the raw curve, in units of N."""
        return self.mu if self.model in ("HL", "SV") else self.alpha

    def window_center(self, N: int) -> float:
        off = 1.0 if self.model == "SV" else 0.0   # height column is 1 + mu N + ...
        return off + self.center * N


def scale_curve(spec: ScalingSpec, N: int, raw, s_values, beta: float = 2 / 3):
    """Scaled fluctuation values at the given window coordinates.

    ``raw`` evaluates the model curve (top line for HL, height slice for SV,
    height function for ASEP) at real arguments; ``beta`` is the spatial
    exponent (2/3 canonically; other values serve as negative controls, with
    the parabola term scaled by N**(2*beta-1) to stay Taylor-consistent).
    """
    s = np.asarray(s_values, dtype=float)
    pos = spec.window_center(N) + s * N ** beta
    det = spec.f * N + spec.fp * s * N ** beta + 0.5 * s * s * spec.fpp * N ** (2 * beta - 1)
    raw_vals = np.asarray(raw(pos), dtype=float)
    if spec.model == "HL":
        core = raw_vals - det
    else:
        core = det - raw_vals
    return core / (spec.sigma * N ** (1 / 3))


def pinned_form(spec: ScalingSpec, s_values, f_values, N: int = 0):
    """Map scaled fluctuations to the bridge-comparison form.

    Multiplies by sigma and removes the parabola so that the result has the
    law of  N**(-1/3) (L(s N**(2/3)) - slope * s N**(2/3))  plus a constant;
    its pinned increments are what the Brownian-bridge variance refers to.
    """
    s = np.asarray(s_values, dtype=float)
    f = np.asarray(f_values, dtype=float)
    sign = 1.0 if spec.model == "HL" else -1.0
    return spec.sigma * f + sign * 0.5 * s * s * spec.fpp


# ---------------------------------------------------------------------------
# Tracy-Widom oracle: tridiagonal beta = 2 ensemble, Sturm bisection
# ---------------------------------------------------------------------------

def _sturm_count(diag, off2, x, pivmin=1e-10):
    """Number of eigenvalues < x for symmetric tridiagonals (batched)."""
    q = diag[:, 0] - x
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count = (q < 0).astype(np.int64)
    for i in range(1, diag.shape[1]):
        q = diag[:, i] - x - off2[:, i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
    return count


def largest_eigenvalue_sturm(diag, off, tol=1e-8):
    """Largest eigenvalue of each tridiagonal row pair, by bisection."""
    diag = np.atleast_2d(np.asarray(diag, dtype=float))
    off = np.atleast_2d(np.asarray(off, dtype=float))
    R, n = diag.shape
    off2 = off * off
    radius = np.abs(diag).max() + 2 * np.abs(off).max() + 1.0
    lo = np.full(R, -radius)
    hi = np.full(R, radius)
    for _ in range(200):
        if np.max(hi - lo) < tol:
            break
        mid = 0.5 * (lo + hi)
        all_below = _sturm_count(diag, off2, mid) == n
        hi = np.where(all_below, mid, hi)
        lo = np.where(all_below, lo, mid)
    return 0.5 * (lo + hi)


def sample_tw_gue(rng, n: int, replicas: int, batch: int = 20_000) -> np.ndarray:
    """Centered samples n**(1/6) (lambda_max - 2 sqrt(n)) from the
    tridiagonal beta = 2 ensemble."""
    out = np.empty(replicas)
    dof = 2.0 * np.arange(n - 1, 0, -1)
    done = 0
    while done < replicas:
        b = min(batch, replicas - done)
        diag = rng.standard_normal((b, n))
        off = np.sqrt(rng.chisquare(dof, size=(b, n - 1)) / 2.0)
        lam = largest_eigenvalue_sturm(diag, off)
        out[done:done + b] = n ** (1 / 6) * (lam - 2.0 * math.sqrt(n))
        done += b
    return out


@dataclass
class TWReference:
    """Monotone CDF table with per-point Monte-Carlo uncertainty."""

    xs: np.ndarray
    F: np.ndarray
    stderr: np.ndarray
    n_matrix: int
    n_samples: int

    def cdf(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.F, left=0.0, right=1.0)

    @property
    def median(self) -> float:
        return float(np.interp(0.5, self.F, self.xs))

    @property
    def median_stderr(self) -> float:
        # delta method: stderr of F at the median over the local density
        i = int(np.searchsorted(self.F, 0.5))
        dens = (self.F[i + 1] - self.F[i - 1]) / (self.xs[i + 1] - self.xs[i - 1])
        return float(self.stderr[i] / max(dens, 1e-12))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x,F,stderr\n")
        for x, F, se in zip(self.xs, self.F, self.stderr):
            buf.write(f"{x:.17g},{F:.17g},{se:.17g}\n")
        return buf.getvalue()


def tw_reference_build(rng, n: int = 1000, replicas: int = 100_000,
                       grid=None) -> TWReference:
    """Oracle reference for the GUE edge law at matrix size n."""
    if replicas < 10_000:
        raise ValueError("reference needs at least 1e4 replicas")
    samples = np.sort(sample_tw_gue(rng, n, replicas))
    xs = np.arange(-6.5, 4.0 + 1e-9, 0.02) if grid is None else np.asarray(grid, dtype=float)
    F = np.searchsorted(samples, xs, side="right") / replicas
    stderr = np.sqrt(F * (1.0 - F) / replicas)
    return TWReference(xs, F, stderr, n, replicas)


# ---------------------------------------------------------------------------
# empirical distribution machinery
# ---------------------------------------------------------------------------

@dataclass
class EmpiricalSummary:
    samples: np.ndarray

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=float))
        if len(s) < 2:
            raise ValueError("need at least two samples")
        self.samples = s

    def ecdf(self, x):
        return np.searchsorted(self.samples, np.asarray(x, dtype=float), side="right") \
            / len(self.samples)

    def moments(self) -> dict:
        s = self.samples
        return {
            "n": len(s),
            "mean": float(np.mean(s)),
            "var": float(np.var(s, ddof=1)),
            "skew": float(stats.skew(s)),
            "kurtosis": float(stats.kurtosis(s)),
        }


def ks_distance(summary: EmpiricalSummary, cdf) -> float:
    """sup norm between the ECDF and a reference CDF callable."""
    s = summary.samples
    n = len(s)
    F = np.asarray(cdf(s), dtype=float)
    up = np.arange(1, n + 1) / n - F
    down = F - np.arange(0, n) / n
    return float(max(np.max(up), np.max(down)))


def kolmogorov_pvalue(d: float, n: int, terms: int = 200) -> float:
    """Upper-tail p-value of the KS statistic via the Kolmogorov series."""
    x = d * math.sqrt(n)
    if x <= 0:
        return 1.0
    total = 0.0
    for k in range(1, terms + 1):
        total += (-1) ** (k - 1) * math.exp(-2.0 * (k * x) ** 2)
    return float(min(1.0, max(0.0, 2.0 * total)))


def chi_square_vs_pmf(observed_counts, probs) -> tuple:
    """Goodness of fit against an exact pmf; bins with tiny expectation are
    pooled.  Returns (stat, dof, p)."""
    obs = np.asarray(observed_counts, dtype=float)
    exp = np.asarray(probs, dtype=float) * obs.sum()
    order = np.argsort(exp)
    obs, exp = obs[order], exp[order]
    # pool from the smallest expectation up until every bin has >= 5
    pooled_obs, pooled_exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= 5.0:
            pooled_obs.append(acc_o)
            pooled_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0:
        if pooled_exp:
            pooled_obs[-1] += acc_o
            pooled_exp[-1] += acc_e
        else:
            pooled_obs, pooled_exp = [acc_o], [acc_e]
    obs = np.array(pooled_obs)
    exp = np.array(pooled_exp) * (obs.sum() / np.sum(pooled_exp))
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = max(1, len(obs) - 1)
    return stat, dof, float(stats.chi2.sf(stat, dof))


def chi_square_two_sample(counts_a: dict, counts_b: dict) -> tuple:
    """Two-sample chi-square over a common discrete support."""
    keys = sorted(set(counts_a) | set(counts_b))
    a = np.array([counts_a.get(k, 0) for k in keys], dtype=float)
    b = np.array([counts_b.get(k, 0) for k in keys], dtype=float)
    na, nb = a.sum(), b.sum()
    keep_a, keep_b = [], []
    acc_a = acc_b = 0.0
    for x, y in zip(a, b):
        acc_a += x
        acc_b += y
        if acc_a + acc_b >= 10.0:
            keep_a.append(acc_a)
            keep_b.append(acc_b)
            acc_a = acc_b = 0.0
    if keep_a and (acc_a or acc_b):
        keep_a[-1] += acc_a
        keep_b[-1] += acc_b
    a, b = np.array(keep_a), np.array(keep_b)
    k1, k2 = math.sqrt(nb / na), math.sqrt(na / nb)
    tot = a + b
    stat = float(np.sum((k1 * a - k2 * b) ** 2 / tot))
    dof = max(1, len(a) - 1)
    return stat, dof, float(stats.chi2.sf(stat, dof))


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

@dataclass
class IncrementReport:
    """Pinned-increment variances against the bridge prediction."""

    xis: tuple
    variances: np.ndarray
    targets: np.ndarray
    stderrs: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        return self.variances / self.targets

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("xi,variance,target,stderr,ratio\n")
        for xi, v, tg, se in zip(self.xis, self.variances, self.targets, self.stderrs):
            buf.write(f"{xi},{v:.17g},{tg:.17g},{se:.17g},{v / tg:.17g}\n")
        return buf.getvalue()


def increment_variance_diag(xs, curves, r: float, p: float,
                            xis=(0.25, 0.5, 0.75)) -> IncrementReport:
    """Variance of the endpoint-pinned curves at interior fractions.

    ``curves`` is an (R, len(xs)) matrix of curves on [-r, r] in pinned
    form; each is mapped to  h(2 r xi - r) - h(-r) - (h(r) - h(-r)) xi  and
    its variance at xi is compared against 2 r p (1-p) xi (1-xi).
    """
    xs = np.asarray(xs, dtype=float)
    curves = np.asarray(curves, dtype=float)
    if curves.ndim != 2 or curves.shape[1] != len(xs):
        raise ValueError("curves must be (replicas, len(xs))")
    left = curves[:, 0]
    right = curves[:, -1]
    var, targ, se = [], [], []
    for xi in xis:
        x = -r + 2 * r * xi
        j = np.searchsorted(xs, x)
        if xs[j] == x:
            vals = curves[:, j]
        else:
            w = (x - xs[j - 1]) / (xs[j] - xs[j - 1])
            vals = (1 - w) * curves[:, j - 1] + w * curves[:, j]
        pinned = vals - left - (right - left) * xi
        v = float(np.var(pinned, ddof=1))
        m4 = float(np.mean((pinned - pinned.mean()) ** 4))
        var.append(v)
        targ.append(2 * r * p * (1 - p) * xi * (1 - xi))
        se.append(math.sqrt(max(m4 - v * v, 0.0) / len(pinned)))
    return IncrementReport(tuple(xis), np.array(var), np.array(targ), np.array(se))


@dataclass
class TransversalReport:
    """Increment variances per size for the canonical and control exponents."""

    s: float
    variances: dict                  # beta -> {N: (var, stderr)}

    def ratio_spread(self, beta: float = 2 / 3) -> float:
        vs = [v for v, _ in self.variances[beta].values()]
        return max(vs) / min(vs)

    def trend(self, beta: float) -> str:
        ns = sorted(self.variances[beta])
        vs = [self.variances[beta][N][0] for N in ns]
        if all(b < a for a, b in zip(vs, vs[1:])):
            return "decreasing"
        if all(b > a for a, b in zip(vs, vs[1:])):
            return "increasing"
        return "mixed"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("beta,N,variance,stderr\n")
        for beta in sorted(self.variances):
            for N in sorted(self.variances[beta]):
                v, se = self.variances[beta][N]
                buf.write(f"{beta},{N},{v:.17g},{se:.17g}\n")
        return buf.getvalue()


def transversal_exponent_diag(increment_samples, s: float,
                              betas=(0.5, 2 / 3, 5 / 6)) -> TransversalReport:
    """Variance of f_N(s) - f_N(0) per size and spatial exponent.

    ``increment_samples`` maps (N, beta) to an array of increments; the
    caller supplies them (models differ in how curves are produced).
    """
    out = {}
    for (N, beta), arr in increment_samples.items():
        arr = np.asarray(arr, dtype=float)
        v = float(np.var(arr, ddof=1))
        se = v * math.sqrt(2.0 / max(1, len(arr) - 1))
        out.setdefault(beta, {})[N] = (v, se)
    return TransversalReport(s, out)


@dataclass
class AcceptanceExperiment:
    """Empirical law of the resampling acceptance probability."""

    estimates: np.ndarray
    stderrs: np.ndarray
    deltas: tuple = (1e-1, 1e-2, 1e-3)

    def tail_table(self) -> dict:
        return {d: float(np.mean(self.estimates < d)) for d in self.deltas}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("z_estimate,stderr\n")
        for z, se in zip(self.estimates, self.stderrs):
            buf.write(f"{z:.17g},{se:.17g}\n")
        return buf.getvalue()


def acceptance_probability_experiment(rng, curve_pairs, t: float,
                                      n_mc: int = 400) -> AcceptanceExperiment:
    """Acceptance probability of the top curve over ensemble samples.

    ``curve_pairs`` iterates over (top, bottom) windows as integer arrays
    over a symmetric window; the acceptance probability of resampling the
    top curve between its endpoints above the bottom one is estimated by
    Monte Carlo (exactly, when the window is small enough to enumerate).
    """
    from .gibbs import GibbsContext, acceptance_Z_exact, acceptance_Z_mc, full_window
    from .paths import BridgeSpec, UpRightPath

    ests, ses = [], []
    for top, bottom in curve_pairs:
        top = np.asarray(top, dtype=np.int64)
        bottom = np.asarray(bottom, dtype=np.int64)
        half = (len(top) - 1) // 2
        T0, T1 = -half, len(top) - 1 - half
        ctx = GibbsContext(t, T0, T1, full_window(T0, T1),
                           bottom=UpRightPath(T0, tuple(bottom)))
        a, b = int(top[0]), int(top[-1])
        if BridgeSpec(T0, T1, a, b).count() <= 50_000:
            ests.append(acceptance_Z_exact(ctx, a, b))
            ses.append(0.0)
        else:
            est, se = acceptance_Z_mc(rng, ctx, a, b, n_mc)
            ests.append(est)
            ses.append(se)
    return AcceptanceExperiment(np.array(ests), np.array(ses))


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Normalized autocorrelation of a scalar chain diagnostic."""
    x = np.asarray(series, dtype=float)
    x = x - x.mean()
    var = float(np.dot(x, x))
    if var == 0.0:
        return np.ones(max_lag + 1)
    return np.array([np.dot(x[: len(x) - k], x[k:]) / var for k in range(max_lag + 1)])
