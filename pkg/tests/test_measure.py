import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freemarkov.errors import CapabilityError
from freemarkov.measure import (EmpiricalSource,
                                MarkovSource, PairStats, Pattern,
                                check_markov_property, check_shift_invariance,
                                coarsen, cylinder_prob, d1, empirical_source,
                                pair_stats, sample, sample_indices, tree_entropy)
from freemarkov.transition import (TransitionSystem, bernoulli_system,
                                   flip_system, matching_system,
                                   permutation_system, wsf_system)
from freemarkov.words import GroupSpec, IDENTITY, Word, ball, parse_word

from oracles import as_lists, oracle_entropy, oracle_marginal

G2 = GroupSpec(2, "group")


def w(text):
    return parse_word(text, G2)


class TestCylinderProb:
    def test_root_only(self, flip03):
        assert cylinder_prob(flip03, Pattern((IDENTITY,), (0,))) == 0.5

    def test_one_edge(self, flip03):
        p = cylinder_prob(flip03, Pattern(tuple(sorted([IDENTITY, w("a")])), (0, 1)))
        assert abs(p - 0.5 * 0.7) < 1e-15

    def test_two_edges(self, flip03):
        dom = tuple(sorted([IDENTITY, w("a"), w("b")]))
        pat = Pattern(dom, (0, 1, 1))
        assert abs(cylinder_prob(flip03, pat) - 0.5 * 0.7 ** 2) < 1e-15

    def test_needs_identity(self, flip03):
        with pytest.raises(ValueError, match="marginalize"):
            cylinder_prob(flip03, Pattern((w("a"),), (0,)))

    def test_needs_connected_domain(self, flip03):
        dom = tuple(sorted([IDENTITY, w("ab")]))
        with pytest.raises(ValueError, match="left-connected"):
            cylinder_prob(flip03, Pattern(dom, (0, 0)))

    def test_matches_oracle_on_ball(self, wsf2):
        pi, mats = as_lists(wsf2)
        dom = tuple(ball(G2, 1))
        dist = oracle_marginal(pi, mats, [x.letters for x in dom])
        src = MarkovSource(wsf2)
        marg = src.ball_marginal(dom)
        for pat, p in marg.support():
            key = tuple(wsf2.state_index(v) for v in pat.values)
            assert abs(dist[key] - p) < 1e-14
            assert abs(cylinder_prob(wsf2, pat) - p) < 1e-14


class TestBallMarginal:
    def test_singleton_is_pi(self, flip03):
        m = MarkovSource(flip03).ball_marginal([IDENTITY])
        np.testing.assert_allclose(m.dense, flip03.pi)

    def test_frozen_flip_two_colorings(self):
        src = MarkovSource(flip_system(2, 0.0))
        m = src.ball_marginal(ball(G2, 1))
        supp = m.support()
        assert len(supp) == 2
        for pat, p in supp:
            assert p == 0.5
            root = pat.value_at(IDENTITY)
            assert all(v == 1 - root for x, v in zip(pat.domain, pat.values)
                       if x != IDENTITY)

    @pytest.mark.parametrize("builder,n", [
        (lambda: flip_system(2, 0.3), 2), (lambda: wsf_system(2), 1),
        (lambda: matching_system(2), 1),
    ])
    def test_normalization(self, builder, n):
        ts = builder()
        m = MarkovSource(ts).ball_marginal(ball(ts.spec, n))
        assert abs(m.total() - 1.0) < 1e-12

    def test_projectivity_examples(self, flip03):
        src = MarkovSource(flip03)
        big = src.ball_marginal(ball(G2, 2))
        small = src.ball_marginal(ball(G2, 1))
        np.testing.assert_allclose(big.marginalize(ball(G2, 1)).dense,
                                   small.dense, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.sets(st.integers(min_value=0, max_value=16), min_size=1, max_size=4))
    def test_projectivity_random_subdomains(self, idxs):
        src = MarkovSource(flip_system(2, 0.3))
        b2 = ball(G2, 2)
        sub = [b2[i] for i in idxs]
        via_big = src.ball_marginal(b2).marginalize(sub)
        direct = src.ball_marginal(sub)
        np.testing.assert_allclose(via_big.dense, direct.dense, atol=1e-12)

    def test_disconnected_domain_via_hull(self, flip03):
        # marginal on {e, ab} must equal the hull computation marginalized
        pi, mats = as_lists(flip03)
        dom = [IDENTITY, w("ab")]
        dist = oracle_marginal(pi, mats, [x.letters for x in dom])
        marg = MarkovSource(flip03).ball_marginal(dom)
        for key, p in dist.items():
            assert abs(marg.dense[key] - p) < 1e-14

    def test_sparse_route_past_dense_guard(self):
        src = MarkovSource(flip_system(2, 0.0))
        m = src.ball_marginal(ball(G2, 3))  # 2^53 dense configurations
        assert not m.is_dense
        assert len(m.sparse) == 2
        assert abs(m.total() - 1.0) < 1e-12

    def test_sparse_refuses_huge_support(self):
        src = MarkovSource(flip_system(2, 0.3))  # full support
        with pytest.raises(CapabilityError, match="support"):
            src.ball_marginal(ball(G2, 3))

    def test_mixed_radix_flat_order(self, flip03):
        m = MarkovSource(flip03).ball_marginal(ball(G2, 1))
        flat = m.dense.ravel()
        # pattern index sum_k digit_k * K^{n-1-k} in shortlex domain order
        for pat, p in m.support():
            digits = [flip03.state_index(v) for v in pat.values]
            idx = sum(d * 2 ** (len(digits) - 1 - k) for k, d in enumerate(digits))
            assert flat[idx] == p

    def test_marginal_json_dense_and_sparse(self, flip03):
        dense_doc = MarkovSource(flip03).ball_marginal(ball(G2, 1)).to_json_dict()
        assert dense_doc["encoding"] == "dense"
        assert dense_doc["domain"] == ["e", "a", "A", "b", "B"]
        assert len(dense_doc["probs"]) == 32
        sparse_doc = MarkovSource(flip_system(2, 0.0)).ball_marginal(
            ball(G2, 3)).to_json_dict()
        assert sparse_doc["encoding"] == "sparse"
        assert len(sparse_doc["probs"]) == 2


class TestTreeEntropyOracle:
    @pytest.mark.parametrize("builder,n", [
        (lambda: flip_system(2, 0.3), 2), (lambda: wsf_system(2), 1),
        (lambda: matching_system(2), 1),
    ])
    def test_closed_form_matches_brute_force(self, builder, n):
        # independent oracle pair: product-formula entropy vs enumeration
        ts = builder()
        dom = ball(ts.spec, n)
        brute = MarkovSource(ts).ball_marginal(dom).entropy()
        assert abs(tree_entropy(ts, dom) - brute) < 1e-9

    def test_requires_connected_domain(self, flip03):
        with pytest.raises(ValueError):
            tree_entropy(flip03, [IDENTITY, w("ab")])


class TestShiftInvariance:
    @pytest.mark.parametrize("builder,n_max", [
        (lambda: wsf_system(2), 1), (lambda: matching_system(2), 1),
        (lambda: flip_system(2, 0.3), 2),
        (lambda: bernoulli_system(G2, [0.3, 0.7]), 2),
    ])
    def test_builtins_invariant(self, builder, n_max):
        ts = builder()
        for n in range(n_max + 1):
            for s in ts.spec.generators():
                assert check_shift_invariance(ts, ball(ts.spec, n), s) < 1e-12

    def test_semigroup_invariant(self, semigroup_ts):
        for n in range(3):
            for s in semigroup_ts.spec.generators():
                dom = ball(semigroup_ts.spec, n)
                assert check_shift_invariance(semigroup_ts, dom, s) < 1e-12

    def test_singleton_domain_is_steady_state_gap(self):
        good = flip_system(2, 0.0)
        bad = TransitionSystem(good.spec, good.states, np.array([0.6, 0.4]),
                               dict(good.matrices))
        res = check_shift_invariance(bad, [IDENTITY], 1)
        assert abs(res - 0.2) < 1e-12

    def test_perturbed_pi_detected(self):
        good = wsf_system(2)
        bad = TransitionSystem(good.spec, good.states,
                               np.array([0.4, 0.2, 0.2, 0.2]), dict(good.matrices))
        assert check_shift_invariance(bad, [IDENTITY], 1) >= 0.01
        assert check_shift_invariance(bad, ball(G2, 1), 1) > 1e-3


class TestSampling:
    def test_count_zero(self, flip03):
        assert sample(flip03, 1, seed=1, count=0) == []

    def test_deterministic_given_seed(self, flip03):
        a = sample_indices(flip03, 2, seed=7, count=50)[1]
        b = sample_indices(flip03, 2, seed=7, count=50)[1]
        np.testing.assert_array_equal(a, b)
        c = sample_indices(flip03, 2, seed=8, count=50)[1]
        assert (a != c).any()

    def test_matching_constraint_almost_sure(self, matching2):
        dom, rows = sample_indices(matching2, 2, seed=3, count=2000)
        pos = {word: i for i, word in enumerate(dom)}
        s_idx = {s: matching2.state_index(str(Word((s,))))
                 for s in G2.generators()}
        from freemarkov.words import induced_left_edges
        for e in induced_left_edges(dom, G2):
            tails, heads = rows[:, pos[e.tail]], rows[:, pos[e.head]]
            fire = tails == s_idx[e.label]
            assert (heads[fire] == s_idx[-e.label]).all()

    def test_wsf_constraint_almost_sure(self, wsf2):
        dom, rows = sample_indices(wsf2, 2, seed=3, count=2000)
        pos = {word: i for i, word in enumerate(dom)}
        s_idx = {s: wsf2.state_index(str(Word((s,)))) for s in G2.generators()}
        from freemarkov.words import induced_left_edges
        for e in induced_left_edges(dom, G2):
            tails, heads = rows[:, pos[e.tail]], rows[:, pos[e.head]]
            fire = tails == s_idx[e.label]
            assert not (heads[fire] == s_idx[-e.label]).any()

    def test_frequencies_converge(self, flip03):
        dom, rows = sample_indices(flip03, 1, seed=11, count=100_000)
        counts = np.zeros((2,) * 5)
        np.add.at(counts, tuple(rows.T), 1.0)
        freq = counts / rows.shape[0]
        exact = MarkovSource(flip03).ball_marginal(dom).dense
        band = 4.0 * np.sqrt(exact * (1 - exact) / rows.shape[0])
        assert (np.abs(freq - exact) <= band).all()

    def test_domain_must_be_ball(self, flip03):
        with pytest.raises(ValueError, match="ball"):
            sample(flip03, [IDENTITY, w("ab")], seed=1, count=1)

    def test_patterns_carry_labels(self, wsf2):
        pats = sample(wsf2, 0, seed=5, count=3)
        assert all(p.domain == (IDENTITY,) for p in pats)
        assert all(p.values[0] in wsf2.states for p in pats)


class TestEmpirical:
    def test_marginal_within_ball(self, flip03):
        src = empirical_source(flip03, 1, seed=2, count=10_000)
        m = src.ball_marginal([IDENTITY])
        assert abs(m.total() - 1.0) < 1e-12
        assert np.abs(m.dense - flip03.pi).max() < 0.05

    def test_beyond_ball_refused(self, flip03):
        src = empirical_source(flip03, 1, seed=2, count=100)
        with pytest.raises(CapabilityError, match="cannot see"):
            src.ball_marginal(ball(G2, 2))

    def test_from_patterns(self, flip03):
        pats = sample(flip03, 1, seed=4, count=500)
        src = EmpiricalSource.from_patterns(pats, flip03.states, flip03.spec)
        assert abs(src.ball_marginal(ball(G2, 1)).total() - 1.0) < 1e-12


class TestCoarsen:
    def test_identity_map_matches_markov(self, flip03):
        c = coarsen(flip03, [0, 1])
        m1 = c.ball_marginal(ball(G2, 1))
        m2 = MarkovSource(flip03).ball_marginal(ball(G2, 1))
        np.testing.assert_allclose(m1.dense, m2.dense, atol=1e-14)

    def test_singleton_is_pushforward_of_pi(self, coarsened_cycle):
        m = coarsened_cycle.ball_marginal([IDENTITY])
        np.testing.assert_allclose(m.dense, [1 / 3, 2 / 3], atol=1e-14)

    def test_constant_map_is_point_mass(self, flip03):
        c = coarsen(flip03, ["x", "x"])
        m = c.ball_marginal(ball(G2, 1))
        assert m.dense.shape == (1,) * 5
        assert abs(m.dense.ravel()[0] - 1.0) < 1e-12

    def test_cycle_coarsening_matches_oracle(self, coarsened_cycle):
        base = coarsened_cycle.base.ts
        pi, mats = as_lists(base)
        dom = ball(G2, 1)
        dist = oracle_marginal(pi, mats, [x.letters for x in dom],
                               coarsen_map=[0, 1, 1])
        marg = coarsened_cycle.ball_marginal(dom)
        assert abs(marg.entropy() - oracle_entropy(dist)) < 1e-12
        for key, p in dist.items():
            assert abs(marg.dense[key] - p) < 1e-14

    def test_sparse_coarsened(self, coarsened_cycle):
        m = coarsened_cycle.ball_marginal(ball(G2, 2))  # via 3^17 > guard
        assert not m.is_dense
        assert len(m.sparse) == 3
        assert abs(m.entropy() - math.log(3)) < 1e-12


class TestMarkovProperty:
    def test_markov_source_gap_zero(self, flip03):
        gap = check_markov_property(MarkovSource(flip03), IDENTITY, 1, 1)
        assert gap < 1e-12

    def test_coarsened_has_memory(self, coarsened_cycle):
        gap = check_markov_property(coarsened_cycle, IDENTITY, 1, 1)
        assert gap > 0.001
        assert abs(gap - (2.0 / 3.0) * math.log(2)) < 1e-12

    def test_deterministic_system_all_zero(self):
        ts = permutation_system(G2, 3, {1: (1, 2, 0)})
        src = MarkovSource(ts)
        gap = check_markov_property(src, IDENTITY, 2, 1)
        assert gap < 1e-12
        # both conditional entropies vanish outright, not just their gap
        step = w("b")
        h_pair = src.domain_entropy([IDENTITY, step]) - src.domain_entropy([IDENTITY])
        assert abs(h_pair) < 1e-12

    def test_nonidentity_base_point(self, flip03):
        gap = check_markov_property(MarkovSource(flip03), w("b"), 1, 2)
        assert gap < 1e-12


class TestD1:
    def test_identical_systems_zero(self, wsf2):
        assert d1(pair_stats(wsf2), pair_stats(wsf2)) == 0.0

    def test_frozen_flip_extremes(self):
        a = pair_stats(flip_system(2, 0.0))
        b = pair_stats(flip_system(2, 1.0))
        assert abs(d1(a, b) - 8.0) < 1e-12

    def test_source_stats_match_system_stats(self, wsf2):
        sa = pair_stats(wsf2)
        sb = pair_stats(MarkovSource(wsf2))
        assert d1(sa, sb) < 1e-12

    def test_pads_states(self):
        a = pair_stats(bernoulli_system(G2, [0.5, 0.5]))
        b = pair_stats(bernoulli_system(G2, [0.5, 0.25, 0.25]))
        assert d1(a, b) > 0.0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 31 - 1))
    def test_pseudometric_on_random_stats(self, seed):
        rng = np.random.default_rng(seed)

        def random_stats():
            joints = {}
            for s in G2.generators():
                j = rng.random((2, 2))
                joints[s] = j / j.sum()
            return PairStats(G2, (0, 1), joints[1].sum(axis=1), joints)

        x, y, z = random_stats(), random_stats(), random_stats()
        assert abs(d1(x, y) - d1(y, x)) < 1e-12
        assert d1(x, z) <= d1(x, y) + d1(y, z) + 1e-12
        assert d1(x, x) == 0.0
