"""
Invariant transition systems
============================

A transition system assigns one stochastic matrix P[s] to every generator
direction plus a probability vector pi.  Invariance -- pi stationary for
every P[s], and pi_i P[s^-1]_ij = pi_j P[s]_ji in the group case -- is
exactly what makes the induced tree-indexed chain shift-invariant.
"""

import json

import numpy as np

from freemarkov import (GroupSpec, TransitionSystem, bernoulli_system,
                        flip_system, from_pair_marginals, matching_system,
                        pair_stats, product_system, to_json_dict, validate,
                        wsf_system)

# Two chains with hard local constraints on the direction a vertex points:
# the spanning-forest chain never doubles straight back, the matching chain
# always does.
wsf = wsf_system(2)
matching = matching_system(2)
print("wsf       P[a][a, a^-1] =", wsf.matrices[1][wsf.state_index("a"),
                                                   wsf.state_index("A")])
print("matching  P[a][a, a^-1] =", matching.matrices[1][
    matching.state_index("a"), matching.state_index("A")])
print("wsf validation report:", validate(wsf, 1e-12))

# Breaking stationarity is caught with named residuals.
flip = flip_system(2, 0.0)
broken = TransitionSystem(flip.spec, flip.states, np.array([0.6, 0.4]),
                          dict(flip.matrices))
for violation in validate(broken)[:2]:
    print("broken flip:", violation)

# Independent products tensor the statistics; a one-state factor is neutral.
prod = product_system(flip_system(2, 0.2), flip_system(2, 0.7))
print("\nproduct states:", prod.states)
print("product valid:", validate(prod, 1e-12) == [])

# A system is recoverable from its single-site and pair statistics.
stats = pair_stats(wsf)
rebuilt = from_pair_marginals(wsf.spec, stats.pi, stats.joints, states=wsf.states)
print("pair-marginal round trip exact:",
      all(np.allclose(rebuilt.matrices[s], wsf.matrices[s])
          for s in wsf.spec.generators()))

# The JSON wire format ("s1", "s1_inv", ... keys) round-trips through files.
doc = to_json_dict(bernoulli_system(GroupSpec(2, "semigroup"), [0.2, 0.8]))
print("\nsemigroup JSON keys:", sorted(doc["P"]))
print(json.dumps(doc["group"]))
