import json

import numpy as np
import pytest

from freemarkov.errors import InconsistentMarginalsError, StructuralError
from freemarkov.measure import empirical_source, pair_stats
from freemarkov.transition import (TransitionSystem, bernoulli_system,
                                   flip_system, from_json_dict,
                                   from_pair_marginals, matching_system,
                                   permutation_system, product_system,
                                   to_json_dict, validate, wsf_system)
from freemarkov.words import GroupSpec

G2 = GroupSpec(2, "group")
S2 = GroupSpec(2, "semigroup")


class TestValidate:
    def test_flip_is_valid(self):
        assert validate(flip_system(2, 0.3), 1e-12) == []

    def test_bernoulli_is_valid(self):
        assert validate(bernoulli_system(G2, [0.3, 0.7]), 1e-12) == []

    @pytest.mark.parametrize("r", [2, 3])
    def test_wsf_matching_valid(self, r):
        assert validate(wsf_system(r), 1e-12) == []
        assert validate(matching_system(r), 1e-12) == []

    @pytest.mark.parametrize("eps", [0.0, 0.1, 0.5, 1.0])
    def test_flip_grid_valid(self, eps):
        assert validate(flip_system(2, eps), 1e-12) == []

    def test_permutation_valid(self):
        ts = permutation_system(G2, 3, {1: (1, 2, 0), 2: (2, 0, 1)})
        assert validate(ts, 1e-12) == []

    def test_perturbed_pi_reports_steady_state(self):
        good = flip_system(2, 0.0)
        bad = TransitionSystem(good.spec, good.states, np.array([0.6, 0.4]),
                               dict(good.matrices))
        report = validate(bad, 1e-9)
        steady = [v for v in report if v.condition == "steady_state"]
        assert steady, report
        hit = [v for v in steady if v.where[1] == 0]
        assert hit and abs(hit[0].residual - 0.2) < 1e-12

    def test_broken_pair_condition(self):
        mats = {1: np.array([[0.9, 0.1], [0.5, 0.5]])}
        mats[-1] = mats[1].copy()  # correct inverse would be the pi-transpose
        mats[2] = np.array([[0.5, 0.5], [0.5, 0.5]])
        mats[-2] = mats[2].copy()
        pi = np.array([5 / 6, 1 / 6])
        ts = TransitionSystem(G2, (0, 1), pi, mats)
        conds = {v.condition for v in validate(ts)}
        assert "pair_consistency" in conds

    def test_structural_error_is_distinct(self):
        with pytest.raises(StructuralError):
            TransitionSystem(G2, (0, 1), np.array([0.5, 0.5]),
                             {1: np.eye(2), -1: np.eye(2), 2: np.eye(2)})
        with pytest.raises(StructuralError):
            TransitionSystem(G2, (0, 1), np.array([1.0]),
                             {s: np.eye(2) for s in G2.generators()})


class TestBuiltins:
    def test_matching_forces_return(self, matching2):
        # row of state 'a' in P^a puts all mass on the inverse direction
        a = matching2.state_index("a")
        a_inv = matching2.state_index("A")
        row = matching2.matrices[1][a]
        assert row[a_inv] == 1.0 and row.sum() == 1.0

    def test_wsf_forbids_return(self, wsf2):
        a = wsf2.state_index("a")
        a_inv = wsf2.state_index("A")
        assert wsf2.matrices[1][a, a_inv] == 0.0

    def test_wsf_entry_values(self, wsf2):
        size = 4
        m = wsf2.matrices[1]
        vals = {round(float(x), 12) for x in np.unique(m)}
        expected = {0.0, round(1 / (size - 1), 12),
                    round((size - 2) / (size - 1) ** 2, 12)}
        assert vals == expected

    def test_flip_half_is_uniform_bernoulli(self):
        flip = flip_system(2, 0.5)
        bern = bernoulli_system(G2, [0.5, 0.5])
        for s in G2.generators():
            np.testing.assert_allclose(flip.matrices[s], bern.matrices[s])
        np.testing.assert_allclose(flip.pi, bern.pi)

    def test_low_rank_rejected(self):
        with pytest.raises(ValueError, match="rank"):
            wsf_system(1)
        with pytest.raises(ValueError, match="rank"):
            matching_system(1)

    def test_flip_eps_range(self):
        with pytest.raises(ValueError):
            flip_system(2, 1.5)


class TestPermutation:
    def test_single_point(self):
        ts = permutation_system(G2, 1)
        assert validate(ts, 1e-12) == []
        assert ts.n_states == 1

    def test_inverse_autofilled(self):
        ts = permutation_system(G2, 3, {1: (1, 2, 0)})
        np.testing.assert_allclose(ts.matrices[-1], ts.matrices[1].T)

    def test_wrong_inverse_rejected(self):
        with pytest.raises(ValueError, match="inverse"):
            permutation_system(G2, 3, {1: (1, 2, 0), -1: (1, 2, 0)})

    def test_non_bijection_rejected(self):
        with pytest.raises(ValueError, match="permutation"):
            permutation_system(G2, 3, {1: (0, 0, 1)})

    def test_semigroup_kind(self):
        ts = permutation_system(S2, 3, {1: (1, 2, 0)})
        assert validate(ts, 1e-12) == []
        assert set(ts.matrices) == {1, 2}


class TestProduct:
    def test_bernoulli_product_is_bernoulli(self):
        a = bernoulli_system(G2, [0.3, 0.7])
        b = bernoulli_system(G2, [0.5, 0.5])
        prod = product_system(a, b)
        expect = np.kron(a.pi, b.pi)
        np.testing.assert_allclose(prod.pi, expect)
        np.testing.assert_allclose(prod.matrices[1], np.tile(expect, (4, 1)))

    def test_identity_element(self, flip03):
        one = bernoulli_system(G2, [1.0])
        prod = product_system(flip03, one)
        np.testing.assert_allclose(prod.pi, flip03.pi)
        for s in G2.generators():
            np.testing.assert_allclose(prod.matrices[s], flip03.matrices[s])

    def test_preserves_validity(self, wsf2, flip03):
        assert validate(product_system(wsf2, flip03), 1e-12) == []

    def test_spec_mismatch(self, flip03, semigroup_ts):
        with pytest.raises(StructuralError):
            product_system(flip03, semigroup_ts)


class TestFromPairMarginals:
    @pytest.mark.parametrize("builder", [
        lambda: flip_system(2, 0.3), lambda: wsf_system(2),
        lambda: matching_system(2), lambda: bernoulli_system(G2, [0.3, 0.7]),
        lambda: permutation_system(G2, 3, {1: (1, 2, 0)}),
    ])
    def test_fixed_point_on_builtins(self, builder):
        ts = builder()
        stats = pair_stats(ts)
        rebuilt = from_pair_marginals(ts.spec, stats.pi, stats.joints,
                                      states=ts.states)
        assert rebuilt.states == ts.states
        np.testing.assert_allclose(rebuilt.pi, ts.pi, atol=1e-14)
        for s in ts.spec.generators():
            np.testing.assert_allclose(rebuilt.matrices[s], ts.matrices[s],
                                       atol=1e-14)
        assert validate(rebuilt) == []

    def test_diagonal_joints_give_identity_chain(self):
        pi = np.array([0.25, 0.75])
        joints = {s: np.diag(pi) for s in G2.generators()}
        ts = from_pair_marginals(G2, pi, joints)
        for s in G2.generators():
            np.testing.assert_allclose(ts.matrices[s], np.eye(2))

    def test_zero_mass_states_dropped(self):
        pi = np.array([0.5, 0.5, 0.0])
        j = np.zeros((3, 3))
        j[:2, :2] = 0.25
        joints = {s: j for s in G2.generators()}
        ts = from_pair_marginals(G2, pi, joints, states=("x", "y", "z"))
        assert ts.states == ("x", "y")
        assert validate(ts) == []

    def test_row_sum_mismatch(self):
        pi = np.array([0.5, 0.5])
        joints = {s: np.full((2, 2), 0.3) for s in G2.generators()}
        with pytest.raises(InconsistentMarginalsError, match="miss pi"):
            from_pair_marginals(G2, pi, joints)

    def test_empirical_wsf_within_tolerance(self, wsf2):
        src = empirical_source(wsf2, 1, seed=20260810, count=100_000)
        stats = pair_stats(src)
        rebuilt = from_pair_marginals(wsf2.spec, stats.pi, stats.joints,
                                      states=stats.states, tol=1e-6)
        worst = max(np.abs(rebuilt.matrices[s] - wsf2.matrices[s]).max()
                    for s in wsf2.spec.generators())
        assert worst < 0.01


class TestJson:
    @pytest.mark.parametrize("builder", [
        lambda: wsf_system(2), lambda: flip_system(2, 0.25),
        lambda: bernoulli_system(S2, [0.2, 0.8]),
        lambda: permutation_system(G2, 3, {1: (1, 2, 0)}),
    ])
    def test_round_trip(self, builder):
        ts = builder()
        doc = json.loads(json.dumps(to_json_dict(ts)))
        back = from_json_dict(doc)
        assert back.spec == ts.spec
        assert tuple(str(s) for s in back.states) == tuple(str(s) for s in ts.states)
        np.testing.assert_allclose(back.pi, ts.pi)
        for s in ts.spec.generators():
            np.testing.assert_allclose(back.matrices[s], ts.matrices[s])

    def test_schema_keys(self, flip03):
        doc = to_json_dict(flip03)
        assert set(doc) == {"group", "states", "pi", "P"}
        assert doc["group"] == {"rank": 2, "kind": "group"}
        assert set(doc["P"]) == {"s1", "s1_inv", "s2", "s2_inv"}

    def test_semigroup_has_no_inverse_keys(self, semigroup_ts):
        doc = to_json_dict(semigroup_ts)
        assert set(doc["P"]) == {"s1", "s2"}

    def test_malformed_document(self):
        from freemarkov.errors import FormatError
        with pytest.raises(FormatError):
            from_json_dict({"states": [0, 1]})
        with pytest.raises(FormatError):
            from_json_dict({"group": {"rank": 2, "kind": "group"},
                            "states": [0, 1], "pi": [0.5, 0.5],
                            "P": {"s1": [[1.0, 0.0]]}})
