import math

import numpy as np
import pytest

from kpzlab import gibbs
from kpzlab.gibbs import (GibbsContext, INFINITY, NEG_INFINITY, EnumerationGuardError,
                          LineEnsemble, ResampleError, acceptance_Z_exact, acceptance_Z_mc,
                          conditional_law_exact, euler_c, full_window, gibbs_resample,
                          gibbs_resample_many, remark_counterexample_paths,
                          verify_monotone_weights, weight_W)
from kpzlab.paths import BridgeSpec, enumerate_bridges, make_path
from kpzlab.rng import make_rng

from _oracles import (REMARK_INSTANCE_LAW_T_HALF, REMARK_WEIGHTS_T_HALF,
                      euler_product_pentagonal)


def _remark_ctx(n, t):
    bottom, rival = remark_counterexample_paths(n)
    ctx = GibbsContext(t, 0, 2 * n, full_window(0, 2 * n), bottom=bottom)
    return ctx, bottom, rival


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("t", [0.3, 0.5, 0.7])
def test_counterexample_weights_exact(n, t):
    """Flat-then-up bottom: staying on it weighs 1, rising first weighs
    the partial Euler product -- the lower path is the likelier one."""
    ctx, bottom, rival = _remark_ctx(n, t)
    assert weight_W(ctx, bottom) == pytest.approx(1.0, abs=1e-15)
    expected = math.prod(1.0 - t ** i for i in range(1, n + 1))
    assert weight_W(ctx, rival) == pytest.approx(expected, rel=1e-13)
    # pointwise ordering of the two paths
    assert all(r >= b for r, b in zip(rival.values, bottom.values))


def test_weight_zero_on_order_violation():
    top = make_path(0, [1, 1, 1, 1, 1])
    ell = make_path(0, [0, 1, 2, 2, 2])     # exceeds top at i=2
    ctx = GibbsContext(0.5, 0, 4, full_window(0, 4), top=top)
    assert weight_W(ctx, ell) == 0.0


def test_weight_well_separated_boundaries():
    ell = make_path(0, [0, 1, 1, 2, 2])
    far_bottom = make_path(0, [-10 ** 6] * 4 + [-10 ** 6 + 1])
    ctx_far = GibbsContext(0.5, 0, 4, full_window(0, 4), bottom=far_bottom)
    assert weight_W(ctx_far, ell) == pytest.approx(1.0, abs=1e-12)
    ctx_free = GibbsContext(0.5, 0, 4, full_window(0, 4))
    assert weight_W(ctx_free, ell) == 1.0


def test_weight_shift_invariance():
    rng = make_rng(12)
    for _ in range(25):
        n = int(rng.integers(3, 7))
        b = int(rng.integers(0, n + 1))
        spec = BridgeSpec(0, n, 0, b)
        ell = enumerate_bridges(spec)[int(rng.integers(0, spec.count()))]
        bshift = int(rng.integers(1, 4))
        bottom = ell.shift(dz=-bshift)
        top = ell.shift(dz=int(rng.integers(1, 4)))
        ctx = GibbsContext(0.4, 0, n, full_window(0, n), top=top, bottom=bottom)
        w = weight_W(ctx, ell)
        dz, dt = int(rng.integers(-5, 6)), int(rng.integers(-5, 6))
        ctx2 = GibbsContext(0.4, dt, n + dt, tuple(i + dt for i in full_window(0, n)),
                            top=top.shift(dt, dz), bottom=bottom.shift(dt, dz))
        assert weight_W(ctx2, ell.shift(dt, dz)) == pytest.approx(w, rel=1e-13)


def test_acceptance_exact_free_case():
    ctx = GibbsContext(0.5, 0, 6, full_window(0, 6))
    assert acceptance_Z_exact(ctx, 0, 3) == pytest.approx(1.0)


def test_acceptance_exact_remark_instance():
    ctx, *_ = _remark_ctx(2, 0.5)
    # frozen from the hand enumeration of the six candidate paths
    assert acceptance_Z_exact(ctx, 0, 2) == pytest.approx(0.5625, abs=1e-15)
    assert np.mean(list(REMARK_WEIGHTS_T_HALF.values())) == pytest.approx(0.5625)


def test_acceptance_exact_zero_when_bottom_blocks():
    bottom = make_path(0, [5, 5, 5, 5, 5])
    ctx = GibbsContext(0.5, 0, 4, full_window(0, 4), bottom=bottom)
    assert acceptance_Z_exact(ctx, 0, 2) == 0.0


def test_acceptance_guard():
    ctx = GibbsContext(0.5, 0, 30, full_window(0, 30))
    with pytest.raises(EnumerationGuardError):
        acceptance_Z_exact(ctx, 0, 15)


def test_acceptance_mc_matches_exact():
    rng = make_rng(77)
    for n, b, t in [(4, 2, 0.5), (6, 3, 0.3), (6, 4, 0.7)]:
        bottom, _ = remark_counterexample_paths(n // 2)
        ctx = GibbsContext(t, 0, n, full_window(0, n), bottom=bottom)
        exact = acceptance_Z_exact(ctx, 0, b)
        est, se = acceptance_Z_mc(rng, ctx, 0, b, 40_000)
        assert abs(est - exact) <= 4 * max(se, 1e-12)


def test_acceptance_mc_free_case():
    rng = make_rng(1)
    ctx = GibbsContext(0.5, 0, 6, full_window(0, 6))
    est, se = acceptance_Z_mc(rng, ctx, 0, 3, 500)
    assert est == 1.0 and se == 0.0


def test_conditional_law_free_is_uniform():
    ctx = GibbsContext(0.5, 0, 5, full_window(0, 5))
    law = conditional_law_exact(ctx, 0, 2)
    assert len(law) == 10
    for p in law.values():
        assert p == pytest.approx(0.1)


def test_conditional_law_single_path():
    ctx = GibbsContext(0.5, 0, 3, full_window(0, 3))
    law = conditional_law_exact(ctx, 0, 3)
    assert list(law.values()) == [1.0]


def test_conditional_law_remark_table():
    ctx, *_ = _remark_ctx(2, 0.5)
    law = conditional_law_exact(ctx, 0, 2)
    assert len(law) == 6
    for path, prob in law.items():
        assert prob == pytest.approx(REMARK_INSTANCE_LAW_T_HALF[path.values], rel=1e-13)


def test_conditional_law_zero_acceptance_raises():
    bottom = make_path(0, [5, 5, 5, 5, 5])
    ctx = GibbsContext(0.5, 0, 4, full_window(0, 4), bottom=bottom)
    with pytest.raises(ZeroDivisionError):
        conditional_law_exact(ctx, 0, 2)


def test_resample_free_context_single_trial_uniform():
    rng = make_rng(5)
    ctx = GibbsContext(0.5, 0, 4, full_window(0, 4))
    counts = {}
    for _ in range(12_000):
        rep = gibbs_resample(rng, ctx, 0, 2)
        assert rep.trials == 1
        counts[rep.accepted_path.values] = counts.get(rep.accepted_path.values, 0) + 1
    se = math.sqrt(12_000 / 6 * (5 / 6))
    assert all(abs(c - 2000) <= 4 * se for c in counts.values())


def test_resample_zero_acceptance_errors():
    rng = make_rng(6)
    bottom = make_path(0, [5, 5, 5, 5, 5])
    ctx = GibbsContext(0.5, 0, 4, full_window(0, 4), bottom=bottom)
    with pytest.raises(ResampleError):
        gibbs_resample(rng, ctx, 0, 2, max_trials=50)


def test_resample_matches_conditional_law():
    rng = make_rng(9)
    ctx, *_ = _remark_ctx(2, 0.5)
    vals, trials = gibbs_resample_many(rng, ctx, 0, 2, 60_000)
    law = conditional_law_exact(ctx, 0, 2)
    for path, prob in law.items():
        n_hit = int(np.sum(np.all(vals == np.array(path.values), axis=1)))
        se = math.sqrt(prob * (1 - prob) * 60_000)
        assert abs(n_hit - 60_000 * prob) <= 4 * se
    # geometric trial count: E[trials] * Z == 1
    Z = acceptance_Z_exact(ctx, 0, 2)
    se_tr = np.std(trials, ddof=1) / math.sqrt(len(trials))
    assert abs(np.mean(trials) * Z - 1.0) <= 4 * se_tr * Z


def test_resample_kernel_leaves_law_invariant():
    """Composing the exact rejection kernel with the conditional law gives
    the law back (the kernel output does not depend on the erased curve)."""
    for t in (0.3, 0.6):
        ctx, *_ = _remark_ctx(2, t)
        law = conditional_law_exact(ctx, 0, 2)
        paths_list = list(law)
        weights = np.array([weight_W(ctx, p) for p in paths_list])
        kernel_out = weights / weights.sum()     # law of the accepted proposal
        composed = np.array([sum(law[q] * kernel_out[i] for q in paths_list)
                             for i in range(len(paths_list))])
        tv = 0.5 * np.sum(np.abs(composed - np.array([law[p] for p in paths_list])))
        assert tv < 1e-12


def test_euler_c_values():
    assert euler_c(1e-9) == pytest.approx(1.0, abs=1e-8)
    for t in (0.3, 0.5, 0.7):
        assert euler_c(t, tol=1e-15) == pytest.approx(euler_product_pentagonal(t), abs=1e-13)
    grid = [euler_c(t) for t in np.linspace(0.05, 0.95, 10)]
    assert all(a > b for a, b in zip(grid, grid[1:]))
    with pytest.raises(ValueError):
        euler_c(1.5)


def test_monotone_report_remark_instance():
    """The averaged inequality holds even though the pointwise weight
    ordering fails on the counterexample instance."""
    n, t = 2, 0.5
    bottom, rival = remark_counterexample_paths(n)
    spec = BridgeSpec(0, 2 * n, 0, n)
    report = verify_monotone_weights(t, spec, bottom, full_window(0, 2 * n))
    assert report.passed
    ctx = GibbsContext(t, 0, 2 * n, full_window(0, 2 * n), bottom=bottom)
    assert weight_W(ctx, bottom) > weight_W(ctx, rival)   # pointwise failure


def test_monotone_near_saturation_tiny_t():
    t = 1e-6
    bottom, _ = remark_counterexample_paths(2)
    spec = BridgeSpec(0, 4, 0, 2)
    report = verify_monotone_weights(t, spec, bottom, full_window(0, 4))
    assert report.passed
    assert report.c_t >= 1.0 - 1e-5


def test_monotone_small_sweep_no_failures():
    from kpzlab.harness import monotone_instances
    for t in (0.3, 0.7):
        for spec, bottom, S in monotone_instances(3, 2):
            rep = verify_monotone_weights(t, spec, bottom, S)
            assert rep.passed, (t, spec, bottom.values)


def test_monotone_csv_shape():
    bottom, _ = remark_counterexample_paths(2)
    spec = BridgeSpec(0, 4, 0, 2)
    report = verify_monotone_weights(0.4, spec, bottom, full_window(0, 4))
    lines = report.to_csv().splitlines()
    assert lines[0] == "T,k1,k2,lhs,rhs,pass"
    assert len(lines) == 1 + len(report.pair_rows)


def test_line_ensemble_ordering_enforced():
    hi = make_path(0, [1, 1, 2])
    lo = make_path(0, [0, 1, 1])
    ens = LineEnsemble((hi, lo))
    assert len(ens) == 2 and ens.interval == (0, 2)
    with pytest.raises(ValueError):
        LineEnsemble((lo, hi))
    LineEnsemble((lo, hi), strict=False)       # explicit relaxation flag


def test_context_validation():
    with pytest.raises(ValueError):
        GibbsContext(1.5, 0, 4, (1, 2))
    with pytest.raises(ValueError):
        GibbsContext(0.5, 0, 4, (0,))          # S outside [T0+1, T1]
    with pytest.raises(ValueError):
        GibbsContext(0.5, 0, 4, (1,), top=make_path(0, [0, 1]))  # too short
    assert GibbsContext(0.5, 0, 4, (1, 2)).top == INFINITY
    assert GibbsContext(0.5, 0, 4, (1, 2)).bottom == NEG_INFINITY
