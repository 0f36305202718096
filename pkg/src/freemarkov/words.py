"""Words, balls and tree structure of free groups and free semigroups.

Elements of the rank-``r`` free group (or free semigroup with identity) are
stored as reduced letter tuples: the letter ``+i`` is the i-th generator,
``-i`` its inverse (group case only).  The left-Cayley graph has a directed
edge ``g -> s*g`` for every letter ``s``; restricted to a ball around the
identity it is a tree, and every word's unique tree path to the identity
is its chain of proper suffixes.

Enumeration order is shortlex throughout: first by word length, then
letter-by-letter with each generator's inverse ranked directly after the
generator itself (``a < a^-1 < b < b^-1 < ...``).  All downstream pattern
encodings inherit this order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

GROUP = "group"
SEMIGROUP = "semigroup"

# Printable generator names.  'e' is reserved for the identity, so the
# generator alphabet skips it: a, b, c, d, f, g, ...
_LETTER_CHARS = "abcdfghijklmnopqrstuvwxyz"


def _letter_key(letter: int) -> tuple[int, int]:
    return (abs(letter), 0 if letter > 0 else 1)


@dataclass(frozen=True)
class GroupSpec:
    """Rank and kind (group vs semigroup-with-identity) of the acting monoid."""

    rank: int
    kind: str = GROUP

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be a positive integer, got {self.rank}")
        if self.kind not in (GROUP, SEMIGROUP):
            raise ValueError(f"kind must be {GROUP!r} or {SEMIGROUP!r}, got {self.kind!r}")

    @property
    def is_group(self) -> bool:
        return self.kind == GROUP

    def generators(self) -> tuple[int, ...]:
        """The generator alphabet S in shortlex letter order."""
        if self.is_group:
            out = []
            for i in range(1, self.rank + 1):
                out.extend((i, -i))
            return tuple(out)
        return tuple(range(1, self.rank + 1))

    def positive_generators(self) -> tuple[int, ...]:
        return tuple(range(1, self.rank + 1))

    @property
    def coefficient(self) -> int:
        """Leading weight 1 - 2r of the single-site entropy in F."""
        return 1 - 2 * self.rank

    def check_letter(self, letter: int) -> None:
        if letter == 0 or abs(letter) > self.rank:
            raise ValueError(f"letter {letter} outside alphabet of rank {self.rank}")
        if letter < 0 and not self.is_group:
            raise ValueError(f"inverse letter {letter} not allowed in a semigroup")

    def inverse(self, letter: int) -> int:
        if not self.is_group:
            raise ValueError("semigroup generators have no inverses")
        return -letter

    def generator_name(self, letter: int) -> str:
        """JSON key for a generator: 's1'..'sr' and 's1_inv'..'sr_inv'."""
        self.check_letter(letter)
        return f"s{letter}" if letter > 0 else f"s{-letter}_inv"

    def letter_from_name(self, name: str) -> int:
        base, inv = (name[:-4], True) if name.endswith("_inv") else (name, False)
        if not base.startswith("s") or not base[1:].isdigit():
            raise ValueError(f"bad generator name {name!r}")
        letter = int(base[1:])
        letter = -letter if inv else letter
        self.check_letter(letter)
        return letter


@dataclass(frozen=True)
class Word:
    """A reduced word; the empty tuple is the identity.

    Raw (unreduced) letter sequences exist only at the ``reduce_word``
    boundary; construction rejects adjacent inverse pairs.
    """

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        for a, b in zip(self.letters, self.letters[1:]):
            if a == -b:
                raise ValueError(
                    f"letters {self.letters} are not reduced; use reduce_word")

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def shortlex_key(self):
        return (len(self.letters), tuple(_letter_key(l) for l in self.letters))

    def __lt__(self, other: "Word") -> bool:
        return self.shortlex_key() < other.shortlex_key()

    def __le__(self, other: "Word") -> bool:
        return self.shortlex_key() <= other.shortlex_key()

    def parent(self) -> "Word":
        """Tree neighbor one step closer to the identity (drop first letter)."""
        if self.is_identity:
            raise ValueError("the identity has no parent")
        return Word(self.letters[1:])

    def first_letter(self) -> int:
        if self.is_identity:
            raise ValueError("the identity has no letters")
        return self.letters[0]

    def suffixes(self) -> list["Word"]:
        """All tree ancestors including self and the identity."""
        return [Word(self.letters[i:]) for i in range(len(self.letters) + 1)]

    def __mul__(self, other: "Word") -> "Word":
        """Concatenate and freely reduce.

        Safe for both kinds: semigroup words contain no inverse letters,
        so no cancellation can occur there.
        """
        left = list(self.letters)
        for l in other.letters:
            if left and left[-1] == -l:
                left.pop()
            else:
                left.append(l)
        return Word(tuple(left))

    def inverse(self) -> "Word":
        return Word(tuple(-l for l in reversed(self.letters)))

    def __str__(self) -> str:
        if self.is_identity:
            return "e"
        out = []
        for l in self.letters:
            if abs(l) > len(_LETTER_CHARS):
                raise ValueError(f"no printable name for generator {abs(l)}; "
                                 f"serialization covers ranks up to {len(_LETTER_CHARS)}")
            ch = _LETTER_CHARS[abs(l) - 1]
            out.append(ch if l > 0 else ch.upper())
        return "".join(out)

    def __repr__(self) -> str:
        return f"Word({self})"


IDENTITY = Word()


def parse_word(text: str, spec: GroupSpec) -> Word:
    """Inverse of ``str(word)``: 'e' is the identity, uppercase = inverse."""
    if text == "e":
        return IDENTITY
    letters = []
    for ch in text:
        low = ch.lower()
        if low not in _LETTER_CHARS:
            raise ValueError(f"unknown word character {ch!r} in {text!r}")
        idx = _LETTER_CHARS.index(low) + 1
        letters.append(-idx if ch.isupper() else idx)
    return reduce_word(letters, spec)


def reduce_word(letters: Sequence[int], spec: GroupSpec) -> Word:
    """Free reduction of a raw letter sequence to its normal form.

    Semigroup words are returned verbatim after alphabet validation;
    supplying an inverse letter under semigroup kind is an error.
    """
    for l in letters:
        spec.check_letter(l)
    if not spec.is_group:
        return Word(tuple(letters))
    stack: list[int] = []
    for l in letters:
        if stack and stack[-1] == -l:
            stack.pop()
        else:
            stack.append(l)
    return Word(tuple(stack))


class CayleyEdge(NamedTuple):
    """Directed edge of the left-Cayley tree, oriented away from the identity.

    ``head = label * tail`` and ``len(head) = len(tail) + 1``.
    """

    tail: Word
    head: Word
    label: int


def ball(spec: GroupSpec, n: int) -> list[Word]:
    """All words of length <= n in shortlex order; index 0 is the identity."""
    if n < 0:
        raise ValueError(f"radius must be nonnegative, got {n}")
    alphabet = spec.generators()
    out = [IDENTITY]
    level = [IDENTITY]
    for _ in range(n):
        nxt = []
        for l in alphabet:
            for w in level:
                if spec.is_group and not w.is_identity and w.letters[0] == -l:
                    continue
                nxt.append(Word((l,) + w.letters))
        out.extend(nxt)
        level = nxt
    return out


def ball_size(spec: GroupSpec, n: int) -> int:
    """Closed-form cardinality of ``ball(spec, n)``."""
    r = spec.rank
    if not spec.is_group:
        return n + 1 if r == 1 else (r ** (n + 1) - 1) // (r - 1)
    if r == 1:
        return 2 * n + 1
    return 1 + 2 * r * ((2 * r - 1) ** n - 1) // (2 * r - 2)


def _check_words(F: Iterable[Word], spec: GroupSpec) -> list[Word]:
    words = list(F)
    for w in words:
        for l in w.letters:
            spec.check_letter(l)
    return words


def induced_left_edges(F: Iterable[Word], spec: GroupSpec) -> list[CayleyEdge]:
    """Edges of the left-Cayley graph with both endpoints in F.

    Each adjacent pair appears once, oriented from the endpoint closer to
    the identity; for left-connected F containing the identity the result
    is a spanning tree of F rooted there.
    """
    words = _check_words(F, spec)
    members = set(words)
    edges = []
    for w in sorted(words):
        if w.is_identity:
            continue
        p = w.parent()
        if p in members:
            edges.append(CayleyEdge(tail=p, head=w, label=w.first_letter()))
    return edges


def is_left_connected(F: Iterable[Word], spec: GroupSpec) -> bool:
    """Whether the induced left-subgraph of F is connected."""
    words = _check_words(F, spec)
    if not words:
        raise ValueError("F must be nonempty")
    members = set(words)
    # Walk the tree: each word's only route toward the rest of F is its
    # parent chain, so repeatedly merge words into their in-F parents.
    root = {w: w for w in members}

    def find(w: Word) -> Word:
        while root[w] != w:
            root[w] = root[root[w]]
            w = root[w]
        return w

    for w in members:
        if not w.is_identity and w.parent() in members:
            root[find(w)] = find(w.parent())
    return len({find(w) for w in members}) == 1


def tree_hull(F: Iterable[Word]) -> set[Word]:
    """Smallest left-connected superset of F containing the identity.

    The union of tree geodesics from each element to the identity, i.e.
    all suffixes of all members.
    """
    hull: set[Word] = set()
    for w in F:
        hull.update(w.suffixes())
    if not hull:
        hull.add(IDENTITY)
    return hull


def past(sg: Word, g: Word, n: int, spec: GroupSpec) -> list[Word]:
    """Past(sg; g) truncated to the ball of radius n, in shortlex order.

    All words in the ball whose unique tree path to ``sg`` passes through
    ``g`` (``g`` itself included): everything outside the branch hanging
    off ``sg`` away from the identity.
    """
    _check_words([sg, g], spec)
    if len(sg) != len(g) + 1 or sg.letters[1:] != g.letters:
        raise ValueError(
            f"{sg} is not of the form s*{g} with length {len(g) + 1}; "
            "past(sg, g, ...) needs a tree edge from g to sg"
        )
    tail = sg.letters
    k = len(tail)
    out = []
    for w in ball(spec, n):
        if len(w) >= k and w.letters[len(w) - k:] == tail:
            continue  # w descends from sg, so its path to sg avoids g
        out.append(w)
    return out
