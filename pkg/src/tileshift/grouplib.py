"""Exact word arithmetic in free products of cyclic groups.

Groups are C_{m_1} * ... * C_{m_k}, where an order of 0 marks an infinite
cyclic factor.  This covers the two-generator tiling group <h, v | h^m, v^n>
and free groups (all orders 0, e.g. one generator per graph edge).  Words are
kept in normal form: alternating syllables from distinct factors, exponents
reduced to 1..m-1 for a finite factor of order m and nonzero for infinite
factors.  Normal forms are unique, so equality of words is equality of
group elements.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction


class PresentationMismatch(ValueError):
    """Raised when combining words over different presentations."""


@dataclass(frozen=True)
class GroupPresentation:
    """Free product of cyclic groups, one generator per factor."""

    labels: tuple[str, ...]
    orders: tuple[int, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("presentation needs at least one generator")
        if len(self.labels) != len(self.orders):
            raise ValueError("labels and orders must have equal length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("generator labels must be distinct")
        for m in self.orders:
            if m < 0:
                raise ValueError("orders must be >= 0 (0 = infinite)")
            if m == 1:
                raise ValueError("trivial factors (order 1) are rejected")
        for lab in self.labels:
            if not lab or re.search(r"[\s^]", lab):
                raise ValueError(f"bad generator label: {lab!r}")

    def identity(self) -> "GroupWord":
        return GroupWord(self, ())

    def generator(self, i: int, exponent: int = 1) -> "GroupWord":
        return GroupWord(self, ((i, exponent),)).normalized()

    def gens(self) -> list["GroupWord"]:
        return [self.generator(i) for i in range(len(self.labels))]

    def reduce_exponent(self, factor: int, e: int) -> int:
        m = self.orders[factor]
        return e % m if m > 0 else e

    def to_json(self) -> str:
        return json.dumps({"generators": list(self.labels), "orders": list(self.orders)})

    @classmethod
    def from_json(cls, text: str) -> "GroupPresentation":
        data = json.loads(text)
        return cls(tuple(data["generators"]), tuple(data["orders"]))


def free_group(labels) -> GroupPresentation:
    """Free group on the given labels (all factors infinite cyclic)."""
    labels = tuple(labels)
    return GroupPresentation(labels, (0,) * len(labels))


def tiling_group(m: int, n: int) -> GroupPresentation:
    """The group <h, v | h^m, v^n> of horizontal/vertical edge labels."""
    return GroupPresentation(("h", "v"), (m, n))


@dataclass(frozen=True)
class GroupWord:
    """Normal-form word; syllables are (factor index, exponent) pairs."""

    presentation: GroupPresentation
    syllables: tuple[tuple[int, int], ...]

    def normalized(self) -> "GroupWord":
        out: list[tuple[int, int]] = []
        for f, e in self.syllables:
            _push(out, f, e, self.presentation)
        return GroupWord(self.presentation, tuple(out))

    def is_identity(self) -> bool:
        return not self.syllables

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return multiply(self, other)

    def __pow__(self, k: int) -> "GroupWord":
        if k < 0:
            return invert(self) ** (-k)
        result = self.presentation.identity()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> "GroupWord":
        return invert(self)

    def __str__(self) -> str:
        if not self.syllables:
            return "e"
        parts = []
        for f, e in self.syllables:
            lab = self.presentation.labels[f]
            parts.append(lab if e == 1 else f"{lab}^{e}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"GroupWord({self})"


def _push(out: list, factor: int, exponent: int, pres: GroupPresentation) -> None:
    e = pres.reduce_exponent(factor, exponent)
    if e == 0:
        return
    if out and out[-1][0] == factor:
        merged = pres.reduce_exponent(factor, out[-1][1] + e)
        out.pop()
        if merged != 0:
            out.append((factor, merged))
    else:
        out.append((factor, e))


def word(pres: GroupPresentation, syllables) -> GroupWord:
    return GroupWord(pres, tuple(syllables)).normalized()


def multiply(a: GroupWord, b: GroupWord) -> GroupWord:
    if a.presentation != b.presentation:
        raise PresentationMismatch("words live in different presentations")
    out = list(a.syllables)
    for f, e in b.syllables:
        _push(out, f, e, a.presentation)
    return GroupWord(a.presentation, tuple(out))


def invert(a: GroupWord) -> GroupWord:
    pres = a.presentation
    out = []
    for f, e in reversed(a.syllables):
        out.append((f, pres.reduce_exponent(f, -e)))
    return GroupWord(pres, tuple(out))


def word_length(g: GroupWord) -> int:
    """Geodesic length over the generators and their inverses.

    A syllable x^e costs min(e, m-e) in a finite factor of order m and |e|
    in an infinite factor; the costs add because normal forms are geodesic
    in a free product.
    """
    total = 0
    for f, e in g.syllables:
        m = g.presentation.orders[f]
        total += min(e, m - e) if m > 0 else abs(e)
    return total


def syllable_metric(g: GroupWord) -> int:
    """Number of syllables in the normal form."""
    return len(g.syllables)


@dataclass(frozen=True)
class AbelianImage:
    """Image in the direct product of the cyclic factors."""

    presentation: GroupPresentation
    residues: tuple[int, ...]

    def __add__(self, other: "AbelianImage") -> "AbelianImage":
        if self.presentation != other.presentation:
            raise PresentationMismatch("images live in different presentations")
        res = tuple(
            self.presentation.reduce_exponent(i, a + b)
            for i, (a, b) in enumerate(zip(self.residues, other.residues))
        )
        return AbelianImage(self.presentation, res)


def abelianize(g: GroupWord) -> AbelianImage:
    pres = g.presentation
    sums = [0] * len(pres.labels)
    for f, e in g.syllables:
        sums[f] += e
    res = tuple(pres.reduce_exponent(i, s) for i, s in enumerate(sums))
    return AbelianImage(pres, res)


def cyclic_reduce(g: GroupWord) -> tuple[GroupWord, GroupWord]:
    """Return (reduced, conjugator) with g = conjugator * reduced * conjugator^-1.

    `reduced` is cyclically reduced: at most one syllable, or first and last
    syllables in distinct factors.
    """
    pres = g.presentation
    conj = pres.identity()
    w = g.normalized()
    while len(w.syllables) >= 2 and w.syllables[0][0] == w.syllables[-1][0]:
        s = GroupWord(pres, (w.syllables[0],))
        w = multiply(multiply(invert(s), w), s)
        conj = multiply(conj, s)
    return w, conj


def translation_length(g: GroupWord) -> Fraction:
    """lim |g^n|/n, exact.

    Zero iff g has finite order.  A cyclically reduced word with >= 2
    syllables concatenates with itself without cancellation, so its powers
    have length n*|g| and the limit is |g|.
    """
    reduced, _ = cyclic_reduce(g)
    if reduced.is_identity():
        return Fraction(0)
    if len(reduced.syllables) == 1:
        f, e = reduced.syllables[0]
        if g.presentation.orders[f] > 0:
            return Fraction(0)
        return Fraction(abs(e))
    return Fraction(word_length(reduced))


def parse_word(pres: GroupPresentation, text: str) -> GroupWord:
    """Parse strings like "h v^2 h", "hv^2h" or "e".

    Labels are matched greedily (longest first), exponents follow a caret.
    """
    s = text.strip()
    if s == "e" or s == "":
        return pres.identity()
    by_length = sorted(range(len(pres.labels)), key=lambda i: -len(pres.labels[i]))
    syl = []
    pos = 0
    while pos < len(s):
        if s[pos].isspace():
            pos += 1
            continue
        for i in by_length:
            lab = pres.labels[i]
            if s.startswith(lab, pos):
                pos += len(lab)
                exp = 1
                if pos < len(s) and s[pos] == "^":
                    m = re.match(r"\^(-?\d+)", s[pos:])
                    if not m:
                        raise ValueError(f"bad exponent at offset {pos} in {text!r}")
                    exp = int(m.group(1))
                    pos += m.end()
                syl.append((i, exp))
                break
        else:
            raise ValueError(f"no generator matches offset {pos} in {text!r}")
    return word(pres, syl)


def enumerate_ball(pres: GroupPresentation, radius: int) -> list[GroupWord]:
    """All elements of word length <= radius (breadth-first, deduplicated)."""
    seen = {(): pres.identity()}
    frontier = [pres.identity()]
    steps = []
    for i in range(len(pres.labels)):
        steps.append(pres.generator(i))
        steps.append(invert(pres.generator(i)))
    while frontier:
        nxt = []
        for g in frontier:
            for s in steps:
                h = multiply(g, s)
                if h.syllables not in seen and word_length(h) <= radius:
                    seen[h.syllables] = h
                    nxt.append(h)
        frontier = nxt
    return sorted(seen.values(), key=lambda g: (word_length(g), g.syllables))
