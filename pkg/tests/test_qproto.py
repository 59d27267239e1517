"""Tests for quantum protocols, correctors, and compressed simulations."""

import math

import numpy as np
import pytest

from commlab import qproto as qp
from commlab.cinfo import Distribution, JointDistribution
from commlab.cproto import Relation
from commlab.qmath import (
    BipartitePureState,
    DensityMatrix,
    haar_unitary,
    random_pure_state,
    trace_distance,
)


def uniform_joint(nx, ny):
    return JointDistribution.product(Distribution.uniform(list(range(nx))),
                                     Distribution.uniform(list(range(ny))))


def random_one_way(rng, nx=4, dm=2, ny=2):
    """Random pure messages and random projective decodings."""
    psis = np.stack([random_pure_state(dm, rng) for _ in range(nx)])
    povms = np.zeros((ny, dm, dm, dm), dtype=np.complex128)
    for y in range(ny):
        u = haar_unitary(dm, rng)
        for z in range(dm):
            v = u[:, z]
            povms[y, z] = np.outer(v, v.conj())
    return qp.QuantumOneWayProtocol(psis, 1, dm, povms)


def most_likely_relation(probs):
    acc = np.zeros(probs.shape, dtype=bool)
    idx = probs.argmax(axis=2)
    xx, yy = np.meshgrid(np.arange(probs.shape[0]), np.arange(probs.shape[1]),
                         indexing="ij")
    acc[xx, yy, idx] = True
    return Relation(acc)


def random_two_way(rng):
    """Haar-random three-round instance on 2x2x2 registers."""
    alice = [np.stack([haar_unitary(4, rng) for _ in range(2)]) for _ in range(2)]
    bob = [np.stack([haar_unitary(4, rng) for _ in range(2)])]
    povms = np.zeros((2, 4, 4, 4), dtype=np.complex128)
    for y in range(2):
        for z in range(4):
            povms[y, z, z, z] = 1.0
    return qp.QuantumTwoWayProtocol(2, 2, 2, 2, 2, alice, bob, povms)


def mc_sigma(p, n):
    return math.sqrt(max(p * (1.0 - p), 1e-12) / n)


class TestOneWayProtocol:
    def test_index_exact_error(self):
        protocol, relation, mu = qp.index_one_way(4, 2)
        table = protocol.error_table(relation)
        assert np.allclose(table[:, :2], 0.0, atol=1e-12)
        assert np.allclose(table[:, 2:], 0.5, atol=1e-12)
        assert protocol.exact_error(relation, mu) == pytest.approx(0.25, abs=1e-12)

    def test_outcome_probs_normalized(self):
        protocol, _, _ = qp.index_one_way(3, 1)
        probs = protocol.outcome_probs()
        assert np.allclose(probs.sum(axis=2), 1.0, atol=1e-10)

    def test_state_norm_validation(self):
        psis = np.array([[1.0, 0.0], [0.5, 0.5]], dtype=complex)
        povm = np.zeros((1, 2, 2, 2), dtype=complex)
        povm[0, 0, 0, 0] = povm[0, 1, 1, 1] = 1.0
        with pytest.raises(ValueError, match="unit"):
            qp.QuantumOneWayProtocol(psis, 1, 2, povm)

    def test_povm_completeness_validation(self):
        psis = np.eye(2, dtype=complex)
        povm = np.zeros((1, 2, 2, 2), dtype=complex)
        povm[0, 0, 0, 0] = 1.0
        povm[0, 1, 1, 1] = 0.5
        with pytest.raises(ValueError, match="identity"):
            qp.QuantumOneWayProtocol(psis, 1, 2, povm)

    def test_average_state_marginals(self):
        protocol, _, mu = qp.index_one_way(3, 2)
        mux = mu.marginal_x()
        avg = qp.average_state(protocol, mux)
        mixed = sum(mux.probs[x] * protocol.message_marginal(x).mat
                    for x in range(protocol.x_size))
        assert np.allclose(avg.marginal_b().mat, mixed, atol=1e-12)
        # input register stays diagonal with the prior on the diagonal
        rho_a = avg.marginal_a().mat
        blocks = rho_a.reshape(protocol.x_size, protocol.dim_work,
                               protocol.x_size, protocol.dim_work)
        traces = np.einsum("xwxw->x", blocks).real
        assert np.allclose(traces, mux.probs, atol=1e-12)


class TestCorrector:
    def test_index_corrector_frozen_values(self):
        protocol, relation, mu = qp.index_one_way(4, 2)
        states = np.stack([protocol.state_vector(x) for x in range(16)])
        corr = qp.build_corrector(states, 16, 1, 4, mu.marginal_x(), 0.1)
        assert corr.k_info == pytest.approx(2.0, abs=1e-9)
        assert corr.good.all()
        assert np.allclose(corr.weights, 0.25, atol=1e-12)
        assert corr.alpha == pytest.approx(0.25, abs=1e-12)

    @pytest.mark.parametrize("seed,nx,dw,dm", [(0, 2, 1, 2), (1, 4, 1, 4),
                                               (2, 8, 1, 2), (3, 4, 2, 2),
                                               (4, 3, 2, 4), (5, 6, 1, 3)])
    def test_audit_random_ensembles(self, seed, nx, dw, dm):
        rng = np.random.default_rng(seed)
        delta = 0.2
        states = np.zeros((nx, nx * dw * dm), dtype=complex)
        for x in range(nx):
            states[x, x * dw * dm:(x + 1) * dw * dm] = random_pure_state(dw * dm, rng)
        mu = Distribution(list(range(nx)), rng.dirichlet(np.ones(nx)))
        corr = qp.build_corrector(states, nx, dw, dm, mu, delta)
        audit = corr.audit()
        assert audit["success_deviation"] <= 1e-9
        assert audit["register_deviation"] <= 1e-9
        assert audit["expected_distance"] <= delta
        assert audit["good_mass"] >= 1.0 - delta / 4.0 - 1e-9

    def test_good_inputs_restored_exactly(self):
        rng = np.random.default_rng(17)
        nx, dm = 4, 4
        states = np.zeros((nx, nx * dm), dtype=complex)
        for x in range(nx):
            states[x, x * dm:(x + 1) * dm] = random_pure_state(dm, rng)
        mu = Distribution.uniform(list(range(nx)))
        corr = qp.build_corrector(states, nx, 1, dm, mu, 0.2)
        for x in np.flatnonzero(corr.good):
            post = corr.post_vector(x)
            assert abs(np.vdot(states[x], post)) ** 2 >= 1.0 - 1e-10

    def test_fallback_swaps_input_register(self):
        # a rare input with its own message direction falls out of the good set
        p = 1e-6
        states = np.zeros((2, 4), dtype=complex)
        states[0, 0] = 1.0   # |0⟩|0⟩
        states[1, 3] = 1.0   # |1⟩|1⟩
        mu = Distribution([0, 1], [1.0 - p, p])
        corr = qp.build_corrector(states, 2, 1, 2, mu, 0.2)
        assert corr.good[0] and not corr.good[1]
        assert corr.alpha == pytest.approx(1.0 - p, rel=1e-9)
        prob, post = corr.apply(1)
        assert prob == pytest.approx(corr.alpha, abs=1e-12)
        blocks = post.reshape(2, 2, 2, 2)
        assert np.trace(blocks[1, :, 1, :]).real == pytest.approx(1.0, abs=1e-12)
        audit = corr.audit()
        assert audit["success_deviation"] <= 1e-12
        assert audit["expected_distance"] <= 0.2

    def test_post_vector_requires_good_input(self):
        p = 1e-6
        states = np.zeros((2, 4), dtype=complex)
        states[0, 0] = 1.0
        states[1, 3] = 1.0
        corr = qp.build_corrector(states, 2, 1, 2, Distribution([0, 1], [1 - p, p]), 0.2)
        with pytest.raises(ValueError, match="good set"):
            corr.post_vector(1)

    def test_sector_validation(self):
        states = np.zeros((2, 4), dtype=complex)
        states[0, 0] = 1.0
        states[1] = [0.5, 0.0, math.sqrt(0.75), 0.0]  # leaks into sector 0
        with pytest.raises(ValueError, match="sector"):
            qp.build_corrector(states, 2, 1, 2, Distribution.uniform([0, 1]), 0.2)

    def test_support_leak_raises(self):
        # a 1e-13-mass input whose message direction vanishes from the average
        q = 1e-4
        states = np.zeros((3, 9), dtype=complex)
        states[0, 0] = 1.0
        states[1, 3:6] = [math.sqrt(1 - q), math.sqrt(q), 0.0]
        states[2, 8] = 1.0
        mu = Distribution([0, 1, 2], [0.5 - 1e-13, 1e-13, 0.5])
        with pytest.raises(ValueError, match="support"):
            qp.build_corrector(states, 3, 1, 3, mu, 0.2)

    def test_alpha_underflow_guard(self, monkeypatch):
        monkeypatch.setattr(qp, "_substate_weight_supported", lambda rho, sig: 1e-15)
        protocol, _, mu = qp.index_one_way(2, 1)
        states = np.stack([protocol.state_vector(x) for x in range(4)])
        with pytest.raises(RuntimeError, match="underflow"):
            qp.build_corrector(states, 4, 1, 2, mu.marginal_x(), 0.2)

    def test_delta_validation(self):
        states = np.eye(2, dtype=complex).reshape(2, 2)
        states = np.zeros((2, 4), dtype=complex)
        states[0, 0] = states[1, 3] = 1.0
        with pytest.raises(ValueError, match="delta"):
            qp.build_corrector(states, 2, 1, 2, Distribution.uniform([0, 1]), 1.5)


class TestPrivacy:
    def test_verbatim_leaks_everything(self):
        protocol, _, mu = qp.verbatim_two_way(2)
        assert qp.quantum_privacy_loss(protocol, mu, 1) == pytest.approx(2.0, abs=1e-9)
        assert qp.quantum_privacy_loss(protocol, mu, 0) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("n_bits", [1, 2])
    def test_inner_product_leak(self, n_bits):
        protocol, relation, mu = qp.inner_product_two_way(n_bits)
        assert protocol.exact_error(relation, mu) <= 1e-12
        loss = qp.quantum_privacy_loss(protocol, mu, 2)
        # eigendecomposition oracle: answer states overlap pairwise in 1/2
        nx = 1 << n_bits
        lam = np.full(nx, 0.5 / nx)
        lam[0] += 0.5
        expected = float(-np.sum(lam * np.log2(lam)))
        assert loss == pytest.approx(expected, abs=1e-9)
        assert loss >= n_bits / 2.0

    def test_inner_product_frozen_value(self):
        protocol, _, mu = qp.inner_product_two_way(2)
        assert qp.quantum_privacy_loss(protocol, mu, 2) == pytest.approx(
            1.5487949406953985, abs=1e-9)

    def test_monotone_over_alice_rounds(self):
        protocol, _, mu = qp.parity_two_way()
        first = qp.quantum_privacy_loss(protocol, mu, 1)
        last = qp.quantum_privacy_loss(protocol, mu, 3)
        assert first == pytest.approx(1.0, abs=1e-9)
        assert last == pytest.approx(2.0, abs=1e-9)
        assert last >= first - 1e-9
        ip, _, mu_ip = qp.inner_product_two_way(2)
        assert (qp.quantum_privacy_loss(ip, mu_ip, 3)
                >= qp.quantum_privacy_loss(ip, mu_ip, 1) - 1e-9)

    def test_round_index_validation(self):
        protocol, _, mu = qp.parity_two_way()
        with pytest.raises(ValueError, match="round index"):
            qp.quantum_privacy_loss(protocol, mu, 4)
        with pytest.raises(ValueError, match="round index"):
            qp.quantum_privacy_loss(protocol, mu, -1)

    def test_requires_product_prior(self):
        protocol, _, _ = qp.parity_two_way()
        table = np.zeros((4, 2))
        table[0, 0] = table[1, 1] = 0.5
        mu = JointDistribution(list(range(4)), [0, 1], table)
        with pytest.raises(ValueError, match="product"):
            qp.quantum_privacy_loss(protocol, mu, 1)


class TestTwoWayProtocol:
    def test_parity_protocol_exact(self):
        protocol, relation, mu = qp.parity_two_way()
        assert protocol.exact_error(relation, mu) <= 1e-12
        probs = protocol.outcome_probs()
        assert np.allclose(probs.max(axis=2), 1.0, atol=1e-10)

    def test_round_structure(self):
        protocol, _, _ = qp.parity_two_way()
        assert protocol.rounds == 3
        assert [protocol.speaker(i) for i in (1, 2, 3)] == ["alice", "bob", "alice"]
        with pytest.raises(ValueError, match="round"):
            protocol.speaker(0)

    def test_round_count_validation(self):
        eye = np.stack([np.eye(2)])
        povm = np.zeros((1, 2, 2, 2), dtype=complex)
        povm[0, 0, 0, 0] = povm[0, 1, 1, 1] = 1.0
        with pytest.raises(ValueError, match="Alice round"):
            qp.QuantumTwoWayProtocol(1, 1, 1, 2, 1, [eye], [eye], povm)

    def test_unitarity_validation(self):
        bad = np.stack([np.eye(2) * 0.5])
        povm = np.zeros((1, 2, 2, 2), dtype=complex)
        povm[0, 0, 0, 0] = povm[0, 1, 1, 1] = 1.0
        with pytest.raises(ValueError, match="unitary"):
            qp.QuantumTwoWayProtocol(1, 1, 1, 2, 1, [bad], [], povm)

    def test_dimension_budget_guard(self, monkeypatch):
        monkeypatch.setenv("COMMLAB_DIM_BUDGET", "16")
        with pytest.raises(ValueError, match="budget"):
            qp.parity_two_way()


class TestCompressOneWay:
    def test_index_parameters_frozen(self):
        protocol, relation, mu = qp.index_one_way(4, 2)
        comp = qp.compress_one_way(protocol, relation, mu, 0.2)
        assert comp.alpha == pytest.approx(0.25, abs=1e-12)
        assert comp.copies == 14
        assert comp.beta_bits == 4
        assert comp.abort_prob == pytest.approx(0.75 ** 14, rel=1e-12)
        expected = comp.abort_prob + (1 - comp.abort_prob) * 0.25
        assert comp.law_error() == pytest.approx(expected, abs=1e-12)

    def test_good_inputs_keep_original_errors(self):
        protocol, relation, mu = qp.index_one_way(4, 2)
        comp = qp.compress_one_way(protocol, relation, mu, 0.2)
        assert comp.corrector.good.all()
        assert np.array_equal(comp.err_table, comp.base_table)
        assert comp.base.povms is protocol.povms

    def test_abort_probability_within_budget(self):
        protocol, relation, mu = qp.index_one_way(4, 2)
        for delta in (0.1, 0.2, 0.4):
            comp = qp.compress_one_way(protocol, relation, mu, delta)
            assert comp.abort_prob <= delta / 2.0 + 1e-12

    def test_mc_matches_law(self):
        protocol, relation, mu = qp.index_one_way(4, 2)
        comp = qp.compress_one_way(protocol, relation, mu, 0.2)
        res = qp.evaluate_quantum(comp, trials=50000, seed=9)
        law = comp.law_error()
        assert abs(res.error - law) <= 3 * mc_sigma(law, 50000)
        assert abs(res.abort_rate - comp.abort_prob) <= 3 * mc_sigma(comp.abort_prob, 50000)
        assert res.expected_bits == 4.0
        assert res.exact_error == pytest.approx(law, abs=1e-15)

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_random_instances_error_bound(self, seed):
        rng = np.random.default_rng(100 + seed)
        protocol = random_one_way(rng)
        relation = most_likely_relation(protocol.outcome_probs())
        mu = uniform_joint(protocol.x_size, protocol.y_size)
        base = protocol.exact_error(relation, mu)
        delta = 0.25
        comp = qp.compress_one_way(protocol, relation, mu, delta)
        assert comp.law_error() <= base + delta + 1e-9

    def test_delta_validation(self):
        protocol, relation, mu = qp.index_one_way(4, 2)
        with pytest.raises(ValueError, match="delta"):
            qp.compress_one_way(protocol, relation, mu, 0.0)


class TestCompressTwoWay:
    def test_forward_exact_values(self):
        protocol, relation, mu = qp.forward_two_way()
        comp = qp.compress_multiround_quantum(protocol, relation, mu, 1, 0.2)
        assert comp.alpha == pytest.approx(0.5, abs=1e-12)
        assert comp.beta == pytest.approx(1.0, abs=1e-12)
        assert comp.r_mean == pytest.approx(0.5, abs=1e-12)
        assert comp.K == 47 and comp.cap == 47
        assert abs(comp.claim_ratio() - 1.0) <= 1e-12
        assert comp.claim_tail_mass() == 0.0
        assert comp.law_error() <= 1e-12
        assert comp.good_pair_fidelity >= 1.0 - 1e-9

    @pytest.mark.parametrize("t_prime", [1, 3])
    def test_parity_both_cuts(self, t_prime):
        protocol, relation, mu = qp.parity_two_way()
        comp = qp.compress_multiround_quantum(protocol, relation, mu, t_prime, 0.2)
        assert abs(comp.claim_ratio() - 1.0) <= comp.delta_b / 2.0 + 1e-9
        assert comp.claim_tail_mass() <= math.sqrt(comp.delta_b)
        assert comp.good_pair_fidelity >= 1.0 - 1e-9
        assert comp.err_table.max() <= 1e-9
        assert comp.law_error() <= 0.2

    def test_parity_final_cut_frozen(self):
        protocol, relation, mu = qp.parity_two_way()
        comp = qp.compress_multiround_quantum(protocol, relation, mu, 3, 0.2)
        assert comp.alpha == pytest.approx(0.25, abs=1e-9)
        assert comp.beta == pytest.approx(0.5, abs=1e-9)
        assert comp.r_mean == pytest.approx(0.125, abs=1e-9)
        assert comp.K == 186 and comp.cap == 93

    @pytest.mark.parametrize("seed", [0, 1])
    def test_random_instance_claims(self, seed):
        rng = np.random.default_rng(50 + seed)
        protocol = random_two_way(rng)
        relation = most_likely_relation(protocol.outcome_probs())
        mu = uniform_joint(2, 2)
        base = protocol.exact_error(relation, mu)
        for t_prime in (1, 3):
            comp = qp.compress_multiround_quantum(protocol, relation, mu, t_prime, 0.2)
            assert abs(comp.claim_ratio() - 1.0) <= comp.delta_b / 2.0 + 1e-9
            assert comp.claim_tail_mass() <= math.sqrt(comp.delta_b)
            assert comp.good_pair_fidelity >= 1.0 - 1e-9
            assert np.max(np.abs(comp.err_table - protocol.error_table(relation))) <= 1e-9
            assert comp.law_error() <= base + 0.2 + 1e-9

    def test_skewed_prior_uses_fallback(self):
        p = 1e-6
        protocol, relation, _ = qp.forward_two_way()
        mu = JointDistribution.product(Distribution([0, 1], [1 - p, p]),
                                       Distribution([0], [1.0]))
        comp = qp.compress_multiround_quantum(protocol, relation, mu, 1, 0.2)
        assert not comp.alice.good[1]
        assert abs(comp.claim_ratio() - 1.0) <= comp.delta_b / 2.0 + 1e-9
        assert comp.law_error() <= 0.2

    def test_corrected_copy_leaves_others_untouched(self):
        protocol, relation, mu = qp.forward_two_way()
        comp = qp.compress_multiround_quantum(protocol, relation, mu, 1, 0.2)
        cut = qp.cut_states(protocol, mu, 1)
        n = cut.sigma.size
        pair = np.outer(cut.sigma, cut.sigma).reshape(-1)
        x = y = 0
        stacked = pair.reshape(n, n)
        for j in range(n):
            col = qp._apply_alice_side(stacked[:, j], cut.dims, comp.alice.kraus[x][0])
            stacked[:, j] = qp._apply_bob_side(col, cut.dims, comp.bob.kraus[y][0])
        out = stacked.reshape(-1)
        norm2 = float(np.real(np.vdot(out, out)))
        assert norm2 == pytest.approx(comp.r_table[x, y], abs=1e-12)
        target = np.zeros((n, n), dtype=complex)
        target[:, :] = np.outer(cut.sigma_x[x], cut.sigma)  # y is trivial here
        overlap = abs(np.vdot(target.reshape(-1), out / math.sqrt(norm2))) ** 2
        assert overlap >= 1.0 - 1e-9

    def test_abort_cap_semantics(self):
        protocol, relation, mu = qp.parity_two_way()
        comp = qp.compress_multiround_quantum(protocol, relation, mu, 3, 0.2)
        assert comp.cap >= comp.alpha * comp.K  # abort only on excess successes
        assert comp.alice_abort <= 0.05
        assert comp.abort_rate_law() <= 0.2

    def test_mc_matches_law(self):
        protocol, relation, mu = qp.parity_two_way()
        comp = qp.compress_multiround_quantum(protocol, relation, mu, 3, 0.2)
        res = qp.evaluate_quantum(comp, trials=30000, seed=21)
        assert abs(res.error - comp.law_error()) <= max(
            3 * mc_sigma(comp.law_error(), 30000), 1e-9)
        assert abs(res.abort_rate - comp.abort_rate_law()) <= max(
            3 * mc_sigma(comp.abort_rate_law(), 30000), 1e-9)
        sd_bits = comp.word_bits * math.sqrt(comp.K * comp.alpha) * 3
        assert abs(res.expected_bits - comp.expected_bits_law()) <= \
            3 * sd_bits / math.sqrt(30000) + 1e-9

    def test_claim_tail_monte_carlo(self):
        protocol, relation, mu = qp.parity_two_way()
        comp = qp.compress_multiround_quantum(protocol, relation, mu, 3, 0.2)
        rng = np.random.default_rng(5)
        from commlab.cproto import _sample_joint
        x, y = _sample_joint(mu, rng.random(20000))
        dev = np.abs(comp.r_table[x, y] / comp.r_mean - 1.0)
        frac = float(np.mean(dev >= 2.0 * math.sqrt(comp.delta_b)))
        assert frac <= math.sqrt(comp.delta_b) + 3 * mc_sigma(math.sqrt(comp.delta_b), 20000)

    def test_even_cut_rejected(self):
        protocol, relation, mu = qp.parity_two_way()
        with pytest.raises(ValueError, match="Alice round"):
            qp.compress_multiround_quantum(protocol, relation, mu, 2, 0.2)

    def test_correlated_prior_rejected(self):
        protocol, relation, _ = qp.parity_two_way()
        table = np.zeros((4, 2))
        table[0, 0] = table[1, 1] = 0.5
        mu = JointDistribution(list(range(4)), [0, 1], table)
        with pytest.raises(ValueError, match="product"):
            qp.compress_multiround_quantum(protocol, relation, mu, 1, 0.2)

    def test_rebuild_and_rerun_identical(self):
        protocol, relation, mu = qp.parity_two_way()
        a = qp.compress_multiround_quantum(protocol, relation, mu, 3, 0.2)
        b = qp.compress_multiround_quantum(protocol, relation, mu, 3, 0.2)
        assert np.array_equal(a.r_table, b.r_table)
        r1 = qp.evaluate_quantum(a, trials=5000, seed=33)
        r2 = qp.evaluate_quantum(b, trials=5000, seed=33)
        assert r1.error == r2.error and r1.expected_bits == r2.expected_bits


class TestEvaluateQuantum:
    def test_one_way_mc_vs_exact(self):
        protocol, relation, mu = qp.index_one_way(4, 2)
        res = qp.evaluate_quantum(protocol, relation, mu, trials=50000, seed=2)
        assert res.exact_error == pytest.approx(0.25, abs=1e-12)
        assert abs(res.error - 0.25) <= 3 * mc_sigma(0.25, 50000)
        assert res.expected_bits == 2.0  # two-qubit message

    def test_two_way_mc_vs_exact(self):
        protocol, relation, mu = qp.parity_two_way()
        res = qp.evaluate_quantum(protocol, relation, mu, trials=5000, seed=4)
        assert res.exact_error <= 1e-12
        assert res.error == 0.0
        assert res.expected_bits == 3.0  # three one-qubit rounds

    def test_compressed_rejects_explicit_arguments(self):
        protocol, relation, mu = qp.index_one_way(4, 2)
        comp = qp.compress_one_way(protocol, relation, mu, 0.2)
        with pytest.raises(ValueError, match="carry their own"):
            qp.evaluate_quantum(comp, relation, mu, trials=10, seed=0)

    def test_base_requires_relation_and_prior(self):
        protocol, _, _ = qp.index_one_way(4, 2)
        with pytest.raises(ValueError, match="explicit relation"):
            qp.evaluate_quantum(protocol, trials=10, seed=0)


class TestTradeoffDemo:
    def test_known_points(self):
        assert qp.index_tradeoff_demo(8, 1) == (4.0, 1.0, 1.0)
        assert qp.index_tradeoff_demo(4, 0) == (4.0, 0.0, 1.0)
        assert qp.index_tradeoff_demo(4, 2) == (1.0, 2.0, 1.0)
