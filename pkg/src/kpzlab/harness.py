"""Run configuration, deterministic seeding, parallel replica execution and
persistence.

Every run is a pure function of its config: the master seed fans out to
replica seeds through the documented splitmix64 derivation, replica results
are merged in index order regardless of worker count, and sample artifacts
carry no timestamps, so reruns are byte-identical.  A manifest records the
config, the file index with digests, and wall time; partial runs leave a
FAILED marker instead of a finalized manifest.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field, asdict
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import __version__, analysis, asep, coupling, gibbs, hall_littlewood as hl, six_vertex as sv
from .paths import BridgeSpec, UpRightPath, sample_uniform_bridge_values
from .rng import derive_replica_seed, make_rng

DEFAULT_OUT_ENV = "KPZLAB_OUT"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    experiment: str
    seed: int
    replicas: int = 1
    workers: int = 1
    out_dir: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.seed is None:
            raise ConfigError("a seed is required; there is no wall-clock default")
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not self.out_dir:
            self.out_dir = os.environ.get(DEFAULT_OUT_ENV, "kpzlab_out")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))


def replica_seeds(master: int, n: int) -> np.ndarray:
    return np.array([derive_replica_seed(master, i) for i in range(n)], dtype=np.uint64)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    config: dict
    version: str = __version__
    status: str = "running"
    wall_time: float = 0.0
    files: dict = field(default_factory=dict)

    def write(self, out_dir: Path):
        (out_dir / "manifest.json").write_text(
            json.dumps(asdict(self), indent=2, sort_keys=True))


def integrity_check(out_dir) -> bool:
    """True when the finalized manifest matches the files on disk."""
    out_dir = Path(out_dir)
    mpath = out_dir / "manifest.json"
    if not mpath.exists() or (out_dir / "FAILED").exists():
        return False
    man = json.loads(mpath.read_text())
    if man.get("status") != "complete":
        return False
    for name, meta in man["files"].items():
        p = out_dir / name
        if not p.exists() or p.stat().st_size != meta["bytes"] or _sha256(p) != meta["sha256"]:
            return False
    return True


def _chunks(seq, k):
    step = max(1, math.ceil(len(seq) / k))
    return [seq[i: i + step] for i in range(0, len(seq), step)]


def parallel_map(fn, items, workers: int):
    """Order-preserving map, optionally across processes."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with get_context("fork").Pool(workers) as pool:
        return pool.map(fn, items)


def _write(out: Path, name: str, text: str) -> Path:
    p = out / name
    p.write_text(text)
    return p


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _asep_replica(args):
    seed, t, T = args
    state = asep.simulate_asep(int(seed), t, T)
    return state


def _exp_sample_asep(cfg: RunConfig, out: Path):
    p = cfg.params
    t = float(p.get("t", 0.4))
    T = float(p.get("T", 32.0))
    xs = list(range(math.ceil(-T / 2), math.ceil(T) + 1))
    seeds = replica_seeds(cfg.seed, cfg.replicas)
    states = parallel_map(_asep_replica, [(s, t, T) for s in seeds], cfg.workers)
    rows = ["replica,x,h"]
    for r, st in enumerate(states):
        if not st.truncation_safe:
            raise RuntimeError(f"replica {r}: deepest particle entered the window")
        hs = st.height(np.array(xs, dtype=float))
        rows.extend(f"{r},{x},{h:.17g}" for x, h in zip(xs, hs))
    f1 = _write(out, "asep_heights.csv", "\n".join(rows) + "\n")
    pol = asep.default_policy(T)
    f2 = _write(out, "asep_policy.json", json.dumps(
        {"t": t, "T": T, "n_particles": pol.n_particles,
         "reliable_left": pol.reliable_left,
         "derivation_log": list(pol.derivation_log)}, indent=2, sort_keys=True))
    return [f1, f2]


def _s6v_chunk(args):
    seeds, q, zeta, X, Y = args
    return sv.sample_heights(seeds, sv.params_from_zeta(q, zeta), X, Y)[Y]


def _exp_sample_s6v(cfg: RunConfig, out: Path):
    p = cfg.params
    q = float(p.get("q", 0.5))
    zeta = float(p.get("zeta", 0.5))
    X = int(p.get("X", 32))
    Y = int(p.get("Y", 16))
    seeds = replica_seeds(cfg.seed, cfg.replicas)
    parts = parallel_map(_s6v_chunk, [(c, q, zeta, X, Y) for c in _chunks(seeds, cfg.workers)],
                         cfg.workers)
    heights = np.concatenate(parts, axis=0)
    rows = ["replica,x,h"]
    for r in range(cfg.replicas):
        rows.extend(f"{r},{x},{heights[r, x - 1]}" for x in range(1, X + 2))
    files = [_write(out, "s6v_heights.csv", "\n".join(rows) + "\n")]
    if p.get("dump_field"):
        field0 = sv.sample_s6v(int(seeds[0]), sv.params_from_zeta(q, zeta), X, Y)
        fp = out / "s6v_field_0.bin"
        fp.write_bytes(field0.to_bytes())
        files.append(fp)
    return files


def _exp_sample_hahp(cfg: RunConfig, out: Path):
    p = cfg.params
    params = hl.HahpParams(int(p.get("M", 6)), int(p.get("N", 4)),
                           float(p.get("t", 0.5)), float(p.get("zeta", 0.5)))
    H_max = int(p.get("H_max", 40))
    sampler = hl.HahpSampler(params, H_max)
    rng = make_rng(cfg.seed)
    seq_rows, curve_rows = [], ["replica,i,value"]
    for r in range(cfg.replicas):
        seq = sampler.sample(rng)
        seq_rows.append(json.dumps({"replica": r, "sequence": [list(q) for q in seq.seq]}))
        ens = hl.line_ensemble_from_sequence(seq)
        curve_rows.extend(f"{r},{i},{v}" for i, v in enumerate(ens[0].values))
    f1 = _write(out, "hahp_sequences.jsonl", "\n".join(seq_rows) + "\n")
    f2 = _write(out, "hahp_top_curve.csv", "\n".join(curve_rows) + "\n")
    f3 = _write(out, "hahp_sampler.json", json.dumps(
        {"H_max": H_max, "tail_events": sampler.tail_events,
         "max_step_tail": sampler.max_step_tail}, indent=2, sort_keys=True))
    return [f1, f2, f3]


def _exp_mcmc_hahp(cfg: RunConfig, out: Path):
    p = cfg.params
    M, N, H = int(p.get("M", 8)), int(p.get("N", 6)), int(p.get("H", 10))
    t, zeta = float(p.get("t", 0.5)), float(p.get("zeta", 0.5))
    steps = int(p.get("steps", 20000))
    burn_in = int(p.get("burn_in", steps // 4))
    thin = int(p.get("thin", 10))
    rng = make_rng(cfg.seed)
    diag = []
    last = None
    for snap in hl.mcmc_plane_partition(rng, M, N, H, t, zeta, steps, burn_in, thin):
        diag.append(snap.diag_sum())
        last = snap
    rho = analysis.autocorrelation(diag, min(50, len(diag) - 2))
    f1 = _write(out, "mcmc_diag.csv",
                "sample,diag_sum\n" + "\n".join(f"{i},{d}" for i, d in enumerate(diag)) + "\n")
    f2 = _write(out, "mcmc_autocorr.csv",
                "lag,rho\n" + "\n".join(f"{k},{r:.17g}" for k, r in enumerate(rho)) + "\n")
    f3 = _write(out, "mcmc_final.csv", last.to_csv())
    return [f1, f2, f3]


def _exp_verify_gibbs(cfg: RunConfig, out: Path):
    p = cfg.params
    combos = p.get("instances") or [
        {"M": M, "N": N, "t": t, "zeta": z}
        for M in (2, 3) for N in (2,) for t in (0.3, 0.6) for z in (0.3, 0.6)
    ]
    H_cap = int(p.get("height_cap", 4))
    results = []
    worst = 0.0
    for c in combos:
        tv = gibbs_invariance_check(hl.HahpParams(c["M"], c["N"], c["t"], c["zeta"]), H_cap)
        worst = max(worst, tv)
        results.append({**c, "max_tv": tv})
    f1 = _write(out, "gibbs_invariance.json", json.dumps(
        {"height_cap": H_cap, "instances": results, "worst_tv": worst,
         "pass": worst < 1e-12}, indent=2, sort_keys=True))
    return [f1]


def _exp_verify_monotone(cfg: RunConfig, out: Path):
    p = cfg.params
    n_max = int(p.get("n_max", 4))
    box = int(p.get("box", 4))
    t_list = p.get("t_list", [0.3, 0.7])
    rows = ["T,k1,k2,lhs,rhs,pass"]
    checked = failures = 0
    for t in t_list:
        for rep in monotone_instances(n_max, box):
            report = gibbs.verify_monotone_weights(t, *rep)
            checked += len(report.pair_rows) + report.set_pairs_checked + len(report.tail_rows)
            failures += report.n_failures
            rows.extend(f"{T},{k1},{k2},{lhs:.17g},{rhs:.17g},{int(ok)}"
                        for T, k1, k2, lhs, rhs, ok in report.pair_rows)
    f1 = _write(out, "monotone_report.csv", "\n".join(rows) + "\n")
    f2 = _write(out, "monotone_summary.json", json.dumps(
        {"n_max": n_max, "box": box, "t_list": list(t_list),
         "checked": checked, "failures": failures, "pass": failures == 0},
        indent=2, sort_keys=True))
    return [f1, f2]


def _exp_couple_kmt(cfg: RunConfig, out: Path):
    p = cfg.params
    pp = float(p.get("p", 0.5))
    n_list = [int(n) for n in p.get("n_list", [16, 64, 256, 1024])]
    rng = make_rng(cfg.seed)
    table = coupling.delta_growth_experiment(rng, pp, n_list, replicas=cfg.replicas or 200)
    f1 = _write(out, "kmt_delta.csv", table.to_csv())
    n0 = n_list[0]
    sample = coupling.kmt_couple(make_rng(derive_replica_seed(cfg.seed, 0)), n0,
                                 int(pp * n0), pp)
    rows = ["j,bridge,walk"]
    rows.extend(f"{j},{b:.17g},{w}" for j, (b, w) in
                enumerate(zip(sample.bridge, sample.walk)))
    f2 = _write(out, "kmt_sample.csv", "\n".join(rows) + "\n")
    return [f1, f2]


def _exp_local_clt(cfg: RunConfig, out: Path):
    p = cfg.params
    n_list = [int(n) for n in p.get("n_list", [100, 1000, 10000])]
    rows = ["n,z,w_max,max_rel_err"]
    for n in n_list:
        z = n // 2
        w_max = n ** 0.6
        _, _, _, err = coupling.local_clt_check(n, z, w_max)
        rows.append(f"{n},{z},{w_max:.17g},{err:.17g}")
    return [_write(out, "local_clt.csv", "\n".join(rows) + "\n")]


def _exp_tw_reference(cfg: RunConfig, out: Path):
    p = cfg.params
    ref = analysis.tw_reference_build(make_rng(cfg.seed), n=int(p.get("n", 1000)),
                                      replicas=int(p.get("oracle_replicas", 100_000)))
    return [_write(out, "tw_reference.csv", ref.to_csv())]


def _sv_onepoint_chunk(args):
    seeds, q, zeta, mu, N, betas, s_values = args
    spec = analysis.ScalingSpec("SV", mu=mu, zeta=zeta)
    need = [spec.window_center(N) + s * N ** b for b in betas for s in s_values]
    X = int(math.ceil(max(need))) + 1
    table = sv.sample_heights(seeds, sv.params_from_zeta(q, zeta), X, N)[N]
    xs = np.arange(1, X + 2, dtype=float)
    out = {}
    for b in betas:
        vals = []
        for srow in table:
            raw = lambda pos: np.interp(pos, xs, srow.astype(float))
            vals.append(analysis.scale_curve(spec, N, raw, s_values, beta=b))
        out[b] = np.array(vals)
    return out


def sv_onepoint_batch(master_seed, q, zeta, mu, N, replicas, workers=1,
                      betas=(2 / 3,), s_values=(0.0,)):
    """Scaled six-vertex fluctuation values, (replicas, len(s_values)) per beta."""
    seeds = replica_seeds(master_seed, replicas)
    parts = parallel_map(_sv_onepoint_chunk,
                         [(c, q, zeta, mu, N, tuple(betas), tuple(s_values))
                          for c in _chunks(seeds, workers)], workers)
    return {b: np.concatenate([pt[b] for pt in parts], axis=0) for b in betas}


def _asep_onepoint_replica(args):
    seed, t, N, alpha, s_values = args
    spec = analysis.ScalingSpec("ASEP", alpha=alpha)
    T = N / (1.0 - t)
    state = asep.simulate_asep(int(seed), t, T)
    if not state.truncation_safe:
        raise RuntimeError("deepest particle entered the window")
    return analysis.scale_curve(spec, N, lambda x: state.height(x), s_values)


def asep_onepoint_batch(master_seed, t, alpha, N, replicas, workers=1, s_values=(0.0,)):
    seeds = replica_seeds(master_seed, replicas)
    vals = parallel_map(_asep_onepoint_replica,
                        [(s, t, N, alpha, tuple(s_values)) for s in seeds], workers)
    return np.array(vals)


def _exp_onepoint(cfg: RunConfig, out: Path):
    p = cfg.params
    model = p.get("model", "sv")
    N_list = [int(n) for n in p.get("N_list", [32, 64])]
    ref = analysis.tw_reference_build(make_rng(derive_replica_seed(cfg.seed, 1 << 20)),
                                      n=int(p.get("oracle_n", 1000)),
                                      replicas=int(p.get("oracle_replicas", 20_000)))
    rows = ["model,N,replica,value"]
    ks_table = {}
    for N in N_list:
        if model == "sv":
            vals = sv_onepoint_batch(cfg.seed + N, float(p.get("q", 0.5)),
                                     float(p.get("zeta", 0.5)), float(p.get("mu", 1.0)),
                                     N, cfg.replicas, cfg.workers)[2 / 3][:, 0]
        elif model == "asep":
            vals = asep_onepoint_batch(cfg.seed + N, float(p.get("t", 0.4)),
                                       float(p.get("alpha", 0.5)), N,
                                       cfg.replicas, cfg.workers)[:, 0]
        else:
            raise ConfigError(f"unknown model {model!r}")
        rows.extend(f"{model},{N},{r},{v:.17g}" for r, v in enumerate(vals))
        ks_table[N] = analysis.ks_distance(analysis.EmpiricalSummary(vals), ref.cdf)
    f1 = _write(out, "onepoint_samples.csv", "\n".join(rows) + "\n")
    f2 = _write(out, "onepoint_ks.json", json.dumps(
        {"model": model, "ks": {str(k): v for k, v in ks_table.items()}},
        indent=2, sort_keys=True))
    return [f1, f2]


def _exp_transversal(cfg: RunConfig, out: Path):
    p = cfg.params
    N_list = [int(n) for n in p.get("N_list", [32, 64])]
    betas = tuple(p.get("betas", [0.5, 2 / 3, 5 / 6]))
    s = float(p.get("s", 1.0))
    samples = {}
    for N in N_list:
        per_beta = sv_onepoint_batch(cfg.seed + N, float(p.get("q", 0.5)),
                                     float(p.get("zeta", 0.5)), float(p.get("mu", 1.0)),
                                     N, cfg.replicas, cfg.workers,
                                     betas=betas, s_values=(0.0, s))
        for b in betas:
            samples[(N, b)] = per_beta[b][:, 1] - per_beta[b][:, 0]
    report = analysis.transversal_exponent_diag(samples, s, betas)
    f1 = _write(out, "transversal.csv", report.to_csv())
    f2 = _write(out, "transversal_summary.json", json.dumps(
        {"ratio_spread_canonical": report.ratio_spread(2 / 3),
         "trend_low": report.trend(betas[0]), "trend_high": report.trend(betas[-1])},
        indent=2, sort_keys=True))
    return [f1, f2]


def _exp_identity_svhl(cfg: RunConfig, out: Path):
    p = cfg.params
    M, N = int(p.get("M", 6)), int(p.get("N", 4))
    t = zeta = None
    t, zeta = float(p.get("t", 0.5)), float(p.get("zeta", 0.5))
    res = identity_svhl_compare(cfg.seed, M, N, t, zeta, cfg.replicas,
                                int(p.get("H_max", 40)), cfg.workers)
    f1 = _write(out, "identity_svhl.json", json.dumps(res, indent=2, sort_keys=True))
    return [f1]


def _exp_acceptance(cfg: RunConfig, out: Path):
    p = cfg.params
    M, N, H = int(p.get("M", 24)), int(p.get("N", 12)), int(p.get("H", 24))
    t, zeta = float(p.get("t", 0.5)), float(p.get("zeta", 0.5))
    steps = int(p.get("steps", 60000))
    window = int(p.get("window", 6))
    rng = make_rng(cfg.seed)
    pairs = []
    center = M // 2
    for snap in hl.mcmc_plane_partition(rng, M, N, H, t, zeta, steps,
                                        burn_in=steps // 2, thin=max(1, steps // (2 * max(1, cfg.replicas)))):
        ens = hl.line_ensemble_from_sequence(snap.ascending_sequence(), n_curves=2)
        top = [ens[0].at(center + i) for i in range(-window, window + 1)]
        botm = [ens[1].at(center + i) for i in range(-window, window + 1)]
        pairs.append((top, botm))
        if len(pairs) >= cfg.replicas:
            break
    exp = analysis.acceptance_probability_experiment(rng, pairs, t,
                                                     n_mc=int(p.get("n_mc", 400)))
    f1 = _write(out, "acceptance_z.csv", exp.to_csv())
    f2 = _write(out, "acceptance_tail.json", json.dumps(
        {str(d): v for d, v in exp.tail_table().items()}, indent=2, sort_keys=True))
    return [f1, f2]


def _exp_increments(cfg: RunConfig, out: Path):
    p = cfg.params
    r = float(p.get("r", 1.0))
    pp = float(p.get("p", 0.5))
    n = int(p.get("n", 256))
    rng = make_rng(cfg.seed)
    spec = BridgeSpec(0, n, 0, int(round(pp * n)))
    vals = sample_uniform_bridge_values(rng, spec, max(cfg.replicas, 1000))
    xs = np.linspace(-r, r, n + 1)
    scale = math.sqrt(n / (2 * r))
    curves = (vals - pp * np.arange(n + 1)[None, :]) / scale
    rep = analysis.increment_variance_diag(xs, curves, r, pp)
    lines = ["source,xi,variance,target,stderr,ratio"]
    for xi, v, tg, se in zip(rep.xis, rep.variances, rep.targets, rep.stderrs):
        lines.append(f"bridge,{xi},{v:.17g},{tg:.17g},{se:.17g},{v / tg:.17g}")
    N = int(p.get("N", 64))
    sv_curves = sv_onepoint_batch(cfg.seed + 7, float(p.get("q", 0.5)),
                                  float(p.get("zeta", 0.5)), float(p.get("mu", 1.0)),
                                  N, max(cfg.replicas, 1000), cfg.workers,
                                  s_values=tuple(np.linspace(-r, r, 17)))[2 / 3]
    spec_sv = analysis.ScalingSpec("SV", mu=float(p.get("mu", 1.0)), zeta=float(p.get("zeta", 0.5)))
    s_grid = np.linspace(-r, r, 17)
    pinned = analysis.pinned_form(spec_sv, s_grid, sv_curves)
    rep_sv = analysis.increment_variance_diag(s_grid, pinned, r, spec_sv.slope)
    for xi, v, tg, se in zip(rep_sv.xis, rep_sv.variances, rep_sv.targets, rep_sv.stderrs):
        lines.append(f"sv,{xi},{v:.17g},{tg:.17g},{se:.17g},{v / tg:.17g}")
    f1 = _write(out, "increments.csv", "\n".join(lines) + "\n")
    return [f1]


# helpers shared with the test-suite ---------------------------------------

def gibbs_invariance_check(params: hl.HahpParams, height_cap: int) -> float:
    """Worst total-variation gap between the enumerated conditional law of
    the top curve and the resampling-weight law, over all conditioning
    configurations of a capped instance; also composes the resampling
    kernel with the enumerated measure and folds that gap in."""
    enum = hl.enumerate_hahp(params, height_cap)
    M = params.M
    buckets: dict = {}
    for seq, p in enum.items:
        ens = hl.line_ensemble_from_sequence(seq, n_curves=2)
        top, bot = ens[0], ens[1]
        key = (bot.values, top.at(0), top.at(M))
        buckets.setdefault(key, {})
        buckets[key][top.values] = buckets[key].get(top.values, 0.0) + p
    worst = 0.0
    for (bot_vals, a, b), cond in buckets.items():
        total = sum(cond.values())
        ctx = gibbs.GibbsContext(params.t, 0, M, tuple(range(1, M + 1)),
                                 bottom=UpRightPath(0, bot_vals))
        law = gibbs.conditional_law_exact(ctx, a, b)
        tv = 0.0
        for path, q in law.items():
            tv += abs(cond.get(path.values, 0.0) / total - q)
        tv += sum(p for v, p in cond.items()
                  if UpRightPath(0, v) not in law) / total
        worst = max(worst, 0.5 * tv)
        # one resampling step applied to the enumerated conditional
        resampled = {v: law[UpRightPath(0, v)] for v in cond}
        kv = 0.5 * sum(abs(resampled[v] - cond[v] / total) for v in cond)
        worst = max(worst, kv)
    return worst


def monotone_instances(n_max: int, box: int):
    """Exhaustive (spec, bottom, S) family: spans up to n_max, bottoms in a
    height-``box`` window below the bridge, full site sets."""
    from .paths import enumerate_bridges
    out = []
    for n in range(2, n_max + 1):
        for b in range(0, n + 1):
            for z1 in range(-box, 1):
                for z2 in range(z1, min(z1 + n, b) + 1):
                    for bot in enumerate_bridges(BridgeSpec(0, n, z1, z2)):
                        out.append((BridgeSpec(0, n, 0, b), bot, tuple(range(1, n + 1))))
    return out


def _identity_hl_chunk(args):
    seed, count, M, N, t, zeta, H_max = args
    sampler = hl.HahpSampler(hl.HahpParams(M, N, t, zeta), H_max)
    rng = make_rng(int(seed))
    rows = np.empty((count, M + 1), dtype=np.int64)
    for r in range(count):
        seq = sampler.sample_raw(rng)
        rows[r, 0] = N
        for i, lam in enumerate(seq, start=1):
            rows[r, i] = N - len(lam)     # first conjugate part = part count
    return rows


def identity_svhl_compare(master_seed, M, N, t, zeta, replicas, H_max=40, workers=1):
    """Joint law comparison of (N - top line) against the height slice."""
    per = _chunks(list(range(replicas)), workers)
    args = [(derive_replica_seed(master_seed, c[0]), len(c), M, N, t, zeta, H_max)
            for c in per]
    hl_rows = np.concatenate(parallel_map(_identity_hl_chunk, args, workers), axis=0)
    seeds = replica_seeds(master_seed ^ 0x5A5A5A5A, replicas)
    sv_rows = sv.sample_heights(seeds, sv.params_from_zeta(t, zeta), M, N)[N]
    tvs = []
    for col in range(M + 1):
        ca = np.bincount(hl_rows[:, col], minlength=N + 1) / replicas
        cb = np.bincount(sv_rows[:, col], minlength=N + 1) / replicas
        tvs.append(0.5 * float(np.sum(np.abs(ca - cb))))
    from collections import Counter
    stat, dof, pval = analysis.chi_square_two_sample(
        Counter(map(tuple, hl_rows.tolist())), Counter(map(tuple, sv_rows.tolist())))
    return {"M": M, "N": N, "t": t, "zeta": zeta, "replicas": replicas,
            "marginal_tv": tvs, "max_marginal_tv": max(tvs),
            "joint_chi2": stat, "joint_dof": dof, "joint_p": pval}


EXPERIMENTS = {
    "sample-asep": _exp_sample_asep,
    "sample-s6v": _exp_sample_s6v,
    "sample-hahp": _exp_sample_hahp,
    "mcmc-hahp": _exp_mcmc_hahp,
    "verify-gibbs": _exp_verify_gibbs,
    "verify-monotone": _exp_verify_monotone,
    "couple-kmt": _exp_couple_kmt,
    "local-clt": _exp_local_clt,
    "tw-reference": _exp_tw_reference,
    "exp-onepoint": _exp_onepoint,
    "exp-transversal": _exp_transversal,
    "exp-identity-svhl": _exp_identity_svhl,
    "exp-acceptance": _exp_acceptance,
    "exp-increments": _exp_increments,
}


def run(cfg: RunConfig) -> int:
    """Execute one experiment; returns a process exit status."""
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; "
                          f"choose from {sorted(EXPERIMENTS)}")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    failed_marker = out / "FAILED"
    if failed_marker.exists():
        failed_marker.unlink()
    manifest = RunManifest(config=asdict(cfg))
    manifest.write(out)
    t0 = time.time()
    try:
        files = EXPERIMENTS[cfg.experiment](cfg, out)
    except Exception:
        failed_marker.write_text("run failed; see traceback")
        raise
    manifest.status = "complete"
    manifest.wall_time = time.time() - t0
    manifest.files = {f.name: {"sha256": _sha256(f), "bytes": f.stat().st_size}
                      for f in files}
    manifest.write(out)
    return 0
