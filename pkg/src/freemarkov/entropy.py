"""Shannon entropies, the F functional, and the f-invariant.

For a measure on configurations over a rank-r free group or semigroup and
the single-site partition alpha,

    F(alpha) = (1 - 2r) H(alpha) + sum_i H(alpha v T_{s_i}^{-1} alpha),

and the f-invariant is the infimum of F over the ball refinements alpha^n.
The coordinate set of alpha^n is the radius-n ball; joining with the s-shift
adds the translated ball, so every term is the entropy of one exact marginal.
For the chain induced by an invariant transition system the infimum is
attained at every n and has a closed form in pi and the matrices.

All entropies are in nats; rescaling to other log bases is a presentation
concern left to callers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapabilityError
from .measure import MarkovSource, MeasureSource
from .transition import DEFAULT_TOL, TransitionSystem, require_valid
from .words import Word, ball

FSTAR_CONFIG_LIMIT = 2 ** 24


def shannon(dist: Sequence[float], check: bool = True) -> float:
    """Entropy -sum p log p in nats, with 0 log 0 = 0."""
    p = np.asarray(dist, dtype=float)
    if check:
        if p.min() < -1e-12:
            raise ValueError(f"negative probability {p.min():.3g}")
        total = p.sum()
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
    v = p[p > 0]
    return float(-(v * np.log(v)).sum())


def binary_entropy(eps: float) -> float:
    return shannon([eps, 1.0 - eps])


def conditional_entropy(joint: np.ndarray) -> float:
    """H(A | B) from a joint table with A on axis 0 and B on axis 1."""
    j = np.asarray(joint, dtype=float)
    return shannon(j.ravel()) - shannon(j.sum(axis=0))


@dataclass(frozen=True)
class EntropyReport:
    """F at one ball depth, with the entropies it is assembled from.

    ``big_f == (1 - 2r) * h_ball + sum(pair_entropies)`` by construction;
    ``pair_entropies[i]`` is the joint entropy over the ball united with its
    translate by the (i+1)-th positive generator.
    """

    n: int
    h_ball: float
    pair_entropies: tuple[float, ...]
    big_f: float
    big_f_star: float | None = None

    @staticmethod
    def csv_header(rank: int) -> str:
        pairs = ",".join(f"H_pair_s{i}" for i in range(1, rank + 1))
        return f"n,H_ball,{pairs},F,Fstar"

    def to_csv_row(self, scale: float = 1.0) -> str:
        cells = [str(self.n), repr(self.h_ball * scale)]
        cells += [repr(h * scale) for h in self.pair_entropies]
        cells.append(repr(self.big_f * scale))
        cells.append("" if self.big_f_star is None else repr(self.big_f_star * scale))
        return ",".join(cells)


def _pair_domain(src: MeasureSource, n: int, s: int) -> list[Word]:
    b = ball(src.spec, n)
    step = Word((s,))
    return sorted(set(b) | {w * step for w in b})


def big_F(src: MeasureSource, n: int) -> EntropyReport:
    """Evaluate F on the depth-n ball refinement from exact marginal entropies."""
    if n < 0:
        raise ValueError(f"depth must be nonnegative, got {n}")
    h_ball = src.domain_entropy(ball(src.spec, n))
    pairs = tuple(src.domain_entropy(_pair_domain(src, n, s))
                  for s in src.spec.positive_generators())
    f_val = src.spec.coefficient * h_ball + sum(pairs)
    return EntropyReport(n=n, h_ball=h_ball, pair_entropies=pairs, big_f=f_val)


def f_markov(ts: TransitionSystem, validate_tol: float | None = DEFAULT_TOL) -> float:
    """Closed-form f-invariant of the chain induced by a transition system.

        f = (2r - 1) sum_i pi_i log pi_i
            - sum_{s positive} sum_{i,j} pi_i P[s]_{ij} log(pi_i P[s]_{ij})

    Equals big_F of the induced source at every depth.  Refuses systems
    that fail validation unless ``validate_tol`` is None (deliberately
    broken systems are useful as negative controls).
    """
    if validate_tol is not None:
        require_valid(ts, validate_tol)
    r = ts.spec.rank
    pos = ts.pi[ts.pi > 0]
    total = (2 * r - 1) * float((pos * np.log(pos)).sum())
    for s in ts.spec.positive_generators():
        joint = ts.pi[:, None] * ts.matrices[s]
        v = joint[joint > 0]
        total -= float((v * np.log(v)).sum())
    return total


def f_sequence(src: MeasureSource, n_max: int) -> list[EntropyReport]:
    """F at depths 0..n_max: a nonincreasing sequence of upper bounds for f.

    The final entry is the best bound available at this depth; it is the
    exact f only when the source is Markov.
    """
    return [big_F(src, n) for n in range(n_max + 1)]


def big_F_star(src: MeasureSource, n: int = 0, m: int = 3) -> float:
    """Truncated alternative functional (1 - r) H(alpha^n) + sum_i h_m(T_{s_i}).

    The per-generator entropy rate is truncated at memory m via the
    conditional-entropy difference

        h_m = H(alpha^n translated m steps | previous m translates),

    whose coordinates are the union of the balls B(e,n) s^k for k <= m.
    Nonincreasing in m; for Markov sources at n = 0 it equals big_F at
    every m >= 1.
    """
    if m < 1:
        raise ValueError(f"truncation must be at least 1, got {m}")
    b = ball(src.spec, n)
    k = len(src.states)
    h_ball = src.domain_entropy(b)
    total = (1 - src.spec.rank) * h_ball
    for s in src.spec.positive_generators():
        union: set[Word] = set()
        prev_entropy = None
        for j in range(m + 1):
            step = Word((s,) * j)
            union |= {w * step for w in b}
            if k ** len(union) > FSTAR_CONFIG_LIMIT:
                raise CapabilityError(
                    f"{k}^{len(union)} configurations exceed the F* guard "
                    f"({FSTAR_CONFIG_LIMIT})")
            if j == m - 1:
                prev_entropy = src.domain_entropy(union)
        total += src.domain_entropy(union) - prev_entropy
    return total


def markov_big_F(ts: TransitionSystem, n: int,
                 validate_tol: float | None = None) -> EntropyReport:
    """Convenience: big_F of the source induced by ``ts``."""
    if validate_tol is not None:
        require_valid(ts, validate_tol)
    return big_F(MarkovSource(ts), n)
