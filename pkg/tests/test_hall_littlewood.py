import itertools
import math

import numpy as np
import pytest

from kpzlab import hall_littlewood as hl
from kpzlab.hall_littlewood import (DenseQTables, HahpParams, HahpSampler,
                                    InterlacingSequence, PlanePartition, conjugate,
                                    enumerate_boxed_plane_partitions, enumerate_hahp,
                                    hahp_prob, hahp_tail_bound, is_horizontal_strip,
                                    line_ensemble_from_sequence, mcmc_plane_partition,
                                    metropolis_kernel_matrix, phi,
                                    plane_partition_from_two_sided, plane_partition_weight,
                                    principal_P_ones, principal_Q, psi, strips_above,
                                    strips_below, weight_from_sequence)
from kpzlab.rng import make_rng


def test_conjugate_example():
    assert conjugate((5, 3, 3, 2, 2)) == (5, 5, 3, 1, 1)
    assert conjugate(()) == ()


def test_conjugate_involution_random():
    rng = make_rng(4)
    for _ in range(10_000):
        ln = int(rng.integers(0, 6))
        parts = tuple(sorted((int(v) for v in rng.integers(1, 12, size=ln)), reverse=True))
        assert conjugate(conjugate(parts)) == parts


def test_horizontal_strip_examples():
    assert is_horizontal_strip((5, 3, 3, 2, 2), (3, 3, 2, 2, 1))
    assert not is_horizontal_strip((2, 2), (0,))
    assert is_horizontal_strip((1,), ())
    assert not is_horizontal_strip((1,), (2,))


def test_psi_phi_single_box():
    for t in (0.2, 0.5, 0.8):
        assert phi((1,), (), t) == pytest.approx(1.0 - t)
        assert psi((1,), (), t) == 1.0


def test_psi_phi_equal_partitions():
    assert psi((3, 1), (3, 1), 0.4) == 1.0
    assert phi((3, 1), (3, 1), 0.4) == 1.0


def test_psi_phi_zero_off_strips():
    assert psi((2, 2), (0,), 0.5) == 0.0
    assert phi((3,), (4,), 0.5) == 0.0


@pytest.mark.parametrize("t", [0.25, 0.6])
def test_two_variable_branching_identity(t):
    """Independent check of the dual coefficients: for shape (2,1) the
    two-variable function equals (1-t)^2 (x^2 y + x y^2) since the only
    competing monomial needs three variables."""
    x1, x2 = 0.7, 0.4
    lhs = (1 - t) ** 2 * (x1 ** 2 * x2 + x1 * x2 ** 2)
    rhs = 0.0
    for mu in strips_below((2, 1)):
        rhs += phi((2, 1), mu, t) * x2 ** (3 - sum(mu)) * phi(mu, (), t) * x1 ** sum(mu)
    assert rhs == pytest.approx(lhs, rel=1e-12)
    # and the monic side has unit coefficients for this shape
    p_val = sum(psi((2, 1), mu, t) * x2 ** (3 - sum(mu)) * psi(mu, (), t) * x1 ** sum(mu)
                for mu in strips_below((2, 1)))
    assert p_val == pytest.approx(x1 ** 2 * x2 + x1 * x2 ** 2, rel=1e-12)


def test_strips_enumeration():
    assert set(strips_below((2, 1))) == {(2, 1), (2,), (1, 1), (1,)}
    assert set(strips_above((), 2)) == {(), (1,), (2,)}
    assert set(strips_above((2,), 3)) == {(2,), (3,), (2, 1), (3, 1), (2, 2), (3, 2)}


def test_principal_q_base_cases():
    assert principal_Q((), 0.3, 2, 0.5) == 1.0
    assert principal_Q((1,), 0.3, 1, 0.5) == pytest.approx((1 - 0.5) * 0.3)
    assert principal_Q((1, 1), 0.3, 1, 0.5) == 0.0        # more parts than variables


def test_principal_p_ones():
    assert principal_P_ones((), 3, 0.5) == 1.0
    assert principal_P_ones((1,), 1, 0.5) == 1.0
    # two-variable expansion of the shape (2,1) evaluated at (1,1)
    assert principal_P_ones((2, 1), 2, 0.5) == pytest.approx(2.0)


@pytest.mark.parametrize("M,N", [(1, 1), (2, 2), (3, 2)])
@pytest.mark.parametrize("t,zeta", [(0.3, 0.3), (0.6, 0.3)])
def test_cauchy_partial_sums(M, N, t, zeta):
    """Truncated sums of P(1^M) Q(zeta^N) approach the closed-form total
    within the geometric tail bound, monotonically from below."""
    target = ((1 - t * zeta) / (1 - zeta)) ** (N * M)
    prev = 0.0
    for H in (4, 8, 12):
        total = 1.0      # empty partition
        for ln in range(1, min(M, N) + 1):
            for parts in itertools.combinations_with_replacement(range(1, H + 1), ln):
                lam = tuple(sorted(parts, reverse=True))
                if lam[0] > H:
                    continue
                total += principal_P_ones(lam, M, t) * principal_Q(lam, zeta, N, t)
        bound = hahp_tail_bound(HahpParams(M, N, t, zeta), H) * target
        assert total <= target + 1e-12
        assert target - total <= bound
        assert total >= prev
        prev = total


def test_hahp_prob_all_empty():
    params = HahpParams(3, 2, 0.4, 0.5)
    seq = InterlacingSequence(((), (), ()))
    assert hahp_prob(seq, params) == pytest.approx(params.normalization)


def test_hahp_single_row_geometric():
    params = HahpParams(1, 1, 0.5, 0.3)
    c = (1 - 0.3) / (1 - 0.5 * 0.3)
    assert hahp_prob(InterlacingSequence(((),)), params) == pytest.approx(c)
    for k in range(1, 6):
        expect = c * (1 - 0.5) * 0.3 ** k
        assert hahp_prob(InterlacingSequence(((k,),)), params) == pytest.approx(expect)
    total = c + sum(c * 0.5 * 0.3 ** k for k in range(1, 200))
    assert total == pytest.approx(1.0)


def test_enumeration_mass_and_tail():
    params = HahpParams(1, 1, 0.5, 0.3)
    enum = enumerate_hahp(params, 50)
    exact_tail = (1 - 0.5) * 0.3 ** 51 / (1 - 0.5 * 0.3)
    assert enum.listed_mass + enum.tail_bound >= 1.0 - 1e-12
    assert enum.complement <= enum.tail_bound
    assert enum.complement == pytest.approx(exact_tail, rel=1e-6, abs=1e-15)


def test_projection_consistency():
    """Marginal of the first M-1 partitions of the length-M measure equals
    the length-(M-1) measure, up to truncation mass."""
    p3 = HahpParams(3, 2, 0.5, 0.45)
    p2 = HahpParams(2, 2, 0.5, 0.45)
    e3 = enumerate_hahp(p3, 12)
    e2 = enumerate_hahp(p2, 12)
    marg = {}
    for seq, pr in e3.items:
        marg[seq.seq[:2]] = marg.get(seq.seq[:2], 0.0) + pr
    ref = {seq.seq: pr for seq, pr in e2.items}
    gap = max(abs(marg.get(k, 0.0) - ref.get(k, 0.0)) for k in set(marg) | set(ref))
    assert gap <= e3.complement + e2.complement + 1e-12


def test_dense_tables_match_recursion():
    tab = DenseQTables(0.45, 0.55, 3, 14)
    rng = make_rng(8)
    for _ in range(300):
        ln = int(rng.integers(0, 4))
        parts = tuple(sorted((int(v) for v in rng.integers(1, 15, size=ln)), reverse=True))
        for k in range(0, 4):
            assert tab.value(parts, k) == pytest.approx(
                principal_Q(parts, 0.55, k, 0.45), rel=1e-12, abs=1e-300)


def test_sampler_rows_dense_equals_scalar():
    params = HahpParams(3, 2, 0.45, 0.55)
    dense = HahpSampler(params, H_max=16, dense=True)
    scalar = HahpSampler(params, H_max=16, dense=False)
    for mu in [(), (1,), (3, 1), (5, 2), (9, 4)]:
        ca, cua = dense._row(mu)
        cb, cub = scalar._row(mu)
        assert ca == cb
        assert np.allclose(cua, cub, rtol=1e-12)


def test_sampler_transition_matches_enumeration():
    """Sequential transition rows agree with the enumeration conditionals
    up to the enumeration's own truncation mass."""
    params = HahpParams(2, 2, 0.45, 0.55)
    H = 26
    enum = enumerate_hahp(params, H)
    sampler = HahpSampler(params, H_max=H)
    joint, marg = {}, {}
    for seq, pr in enum.items:
        joint[(seq[0], seq[1])] = joint.get((seq[0], seq[1]), 0.0) + pr
        marg[seq[0]] = marg.get(seq[0], 0.0) + pr
    worst = 0.0
    for mu in sorted(marg, key=marg.get, reverse=True)[:6]:
        cands, cum = sampler._row(mu)
        pmf = np.diff(np.concatenate([[0.0], cum]))
        for nu, pr in zip(cands, pmf):
            worst = max(worst, abs(pr - joint.get((mu, nu), 0.0) / marg[mu]))
    assert worst <= 10 * enum.complement + 1e-9


def test_sampler_frequencies_match_enumeration():
    params = HahpParams(2, 1, 0.5, 0.4)
    enum = enumerate_hahp(params, 25)
    sampler = HahpSampler(params, H_max=25)
    rng = make_rng(17)
    draws = 50_000
    counts = {}
    for _ in range(draws):
        s = sampler.sample_raw(rng)
        counts[s] = counts.get(s, 0) + 1
    # sharp comparison on the first-partition marginal (small support)
    m_ref, m_obs = {}, {}
    for seq, pr in enum.items:
        m_ref[seq[0]] = m_ref.get(seq[0], 0.0) + pr
    for s, c in counts.items():
        m_obs[s[0]] = m_obs.get(s[0], 0) + c
    for k, pr in m_ref.items():
        if pr < 1e-4:
            continue
        se = math.sqrt(pr * (1 - pr) * draws)
        assert abs(m_obs.get(k, 0) - draws * pr) <= 4.5 * se


def test_sampler_tail_events_logged():
    params = HahpParams(3, 2, 0.5, 0.6)
    sampler = HahpSampler(params, H_max=3, dense=False)   # deliberately tight cap
    rng = make_rng(3)
    for _ in range(4000):
        sampler.sample_raw(rng)
    assert sampler.tail_events > 0
    assert sampler.max_step_tail > 0.0


def test_plane_partition_validation_and_weight():
    assert plane_partition_weight(PlanePartition(np.zeros((2, 2), dtype=int)), 0.5, 0.5) == 1.0
    single = PlanePartition(np.array([[1]]))
    assert plane_partition_weight(single, 0.5, 0.3) == pytest.approx(0.5 * 0.3)
    with pytest.raises(ValueError):
        PlanePartition(np.array([[0, 1], [0, 0]]))        # increasing row
    with pytest.raises(ValueError):
        PlanePartition(np.array([[2, 1], [1, 0]]), height_cap=1)


def test_weight_matrix_vs_slices_random():
    rng = make_rng(11)
    for _ in range(60):
        M, N = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        a = np.zeros((M, N), dtype=np.int64)
        for i in range(M):
            for j in range(N):
                hi = min(a[i - 1, j] if i else 6, a[i, j - 1] if j else 6)
                a[i, j] = rng.integers(0, hi + 1)
        pp = PlanePartition(a)
        w1 = plane_partition_weight(pp, 0.4, 0.6)
        w2 = weight_from_sequence(pp.two_sided_sequence(), 0.4, 0.6, apex_index=M - 1)
        assert w1 == pytest.approx(w2, rel=1e-12)
        back = plane_partition_from_two_sided(pp.two_sided_sequence(), M, N)
        assert np.array_equal(back.entries, pp.entries)


def test_completion_sum_equals_ascending_probability():
    """Summing the plane-partition weights over all descending completions
    of an ascending chain reproduces the chain's probability."""
    params = HahpParams(2, 2, 0.45, 0.5)
    for seq in [((1,), (2, 1)), ((), (1,)), ((2,), (3, 1))]:
        iseq = InterlacingSequence(seq)
        lam0 = seq[-1]
        total = 0.0
        for kappa in strips_below(lam0):
            if len(kappa) > 1:
                continue            # deeper slices of the 2-column box hold one cell
            slices = [seq[0], seq[1], kappa]
            pp = plane_partition_from_two_sided(slices, params.M, params.N)
            total += plane_partition_weight(pp, params.t, params.zeta)
        expect = hahp_prob(iseq, params)
        got = params.normalization * total
        assert got == pytest.approx(expect, rel=1e-12)


def test_mcmc_local_ratio_is_exact():
    rng = make_rng(13)
    pi = np.zeros((3, 3), dtype=np.int64)
    H, t, zeta = 4, 0.45, 0.55
    for _ in range(600):
        i, j = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        delta = int(rng.integers(0, 2)) * 2 - 1
        v = hl._propose(pi, i, j, delta, H, 3, 3)
        if v is None:
            continue
        ratio = hl._local_weight_ratio(pi, i, j, v, t, zeta, 3, 3)
        w_old = plane_partition_weight(PlanePartition(pi.copy()), t, zeta)
        new = pi.copy()
        new[i, j] = v
        w_new = plane_partition_weight(PlanePartition(new), t, zeta)
        assert ratio == pytest.approx(w_new / w_old, rel=1e-12)
        if rng.random() < 0.5:
            pi[i, j] = v


def test_mcmc_exact_stationarity_2x2():
    states = enumerate_boxed_plane_partitions(2, 2, 2)
    assert len(states) == 20
    K = metropolis_kernel_matrix(states, 0.5, 0.5, 2)
    assert np.max(np.abs(K.sum(axis=1) - 1.0)) < 1e-14
    w = np.array([plane_partition_weight(s, 0.5, 0.5) for s in states])
    target = w / w.sum()
    assert np.max(np.abs(target @ K - target)) < 1e-12
    # detailed balance
    for a in range(20):
        for b in range(20):
            assert target[a] * K[a, b] == pytest.approx(target[b] * K[b, a], abs=1e-15)


def test_mcmc_small_zeta_concentrates_on_empty():
    rng = make_rng(21)
    empty = 0
    snaps = 0
    for snap in mcmc_plane_partition(rng, 2, 2, 3, 0.5, 0.02, 6000, burn_in=1000, thin=5):
        snaps += 1
        empty += int(snap.diag_sum() == 0 and snap.entries.max() == 0)
    assert empty / snaps > 0.9


def test_line_ensemble_from_sequence_example():
    seq = InterlacingSequence(
        ((1,), (2,), (2,), (4,), (4, 2), (5, 2, 2), (5, 3, 2), (8, 5, 2, 1)))
    ens = line_ensemble_from_sequence(seq)
    assert ens[0].values == (0, 1, 1, 1, 1, 2, 3, 3, 4)
    assert len(ens) == 8     # defaults to the largest part of the last shape


def test_line_ensemble_all_empty():
    ens = line_ensemble_from_sequence(InterlacingSequence(((), (), ())))
    assert all(v == 0 for v in ens[0].values)


def test_line_ensemble_ordering_random():
    rng = make_rng(23)
    sampler = HahpSampler(HahpParams(4, 3, 0.5, 0.5), H_max=15)
    for _ in range(300):
        seq = sampler.sample(rng)
        ens = line_ensemble_from_sequence(seq, n_curves=3)
        for hi, lo in zip(ens.curves, ens.curves[1:]):
            assert all(h >= l for h, l in zip(hi.values, lo.values))


def test_interlacing_sequence_validation_and_json():
    with pytest.raises(ValueError):
        InterlacingSequence(((2, 2), (1,)))
    seq = InterlacingSequence(((1,), (3, 1)))
    assert InterlacingSequence.from_json(seq.to_json()).seq == seq.seq


def test_plane_partition_csv_roundtrip():
    pp = PlanePartition(np.array([[3, 2, 1], [2, 1, 0]]))
    assert np.array_equal(PlanePartition.from_csv(pp.to_csv()).entries, pp.entries)
