"""
The f-invariant
===============

For a measure over configurations on the rank-r free group,

    F(alpha^n) = (1 - 2r) H(ball marginal) + sum_s H(ball + s-translate),

and f is the infimum over n.  The sequence is nonincreasing; for chains
induced by an invariant transition system it is constant and equal to a
closed form in pi and the matrices -- which can be strictly negative,
something ordinary entropy never does.
"""

import math

from freemarkov import (GroupSpec, MarkovSource, bernoulli_system, big_F,
                        big_F_star, binary_entropy, f_markov, f_sequence,
                        flip_system, matching_system, permutation_system,
                        product_system, wsf_system)

group = GroupSpec(2, "group")

# Closed-form values of the worked examples at rank 2.
print("f(wsf)       =", f_markov(wsf_system(2)), " (= 3 log 3 - 3 log 2)")
print("f(matching)  =", f_markov(matching_system(2)), " (= 1.5 log 3 - log 4)")
print("f(bernoulli) =", f_markov(bernoulli_system(group, [0.5, 0.5])), " (= log 2)")
print("f(perm n=4)  =", f_markov(permutation_system(group, 4)), " (= -log 4)")

# The two-state flip family: f = -log 2 + 2 H_b(eps), negative for small eps.
print("\nflip family f(eps) = -log2 + 2*H_b(eps):")
for eps in (0.0, 0.1, 0.25, 0.5):
    f = f_markov(flip_system(2, eps))
    expect = -math.log(2) + 2 * binary_entropy(eps)
    print(f"  eps={eps:<5} f={f:+.7f} (formula {expect:+.7f})")
print("negative f at eps <= 0.1: a chain strictly below every Bernoulli value")

# f = F at every depth for Markov chains: the sequence is flat.
src = MarkovSource(flip_system(2, 0.3))
print("\nF sequence of flip(0.3):",
      [round(r.big_f, 10) for r in f_sequence(src, 2)])

# The alternative truncated functional agrees for Markov sources.
print("F* at m=1..3:", [round(big_F_star(src, 0, m), 10) for m in (1, 2, 3)])

# f adds over independent products.
f1 = f_markov(flip_system(2, 0.2))
f2 = f_markov(flip_system(2, 0.7))
fp = f_markov(product_system(flip_system(2, 0.2), flip_system(2, 0.7)))
print(f"\nadditivity: f(product) = {fp:.10f}, f1 + f2 = {f1 + f2:.10f}")

# Each report carries its ingredients: ball entropy and pair entropies.
rep = big_F(src, 1)
print("\ndepth-1 report: H_ball =", round(rep.h_ball, 7),
      "pairs =", tuple(round(h, 7) for h in rep.pair_entropies),
      "F =", round(rep.big_f, 7))
