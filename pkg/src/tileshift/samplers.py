"""One-dimensional nearest-neighbour SFTs and process samplers.

Words are tuples of alphabet symbols.  The samplers build window
realizations of the block constructions: synchronizing words pasted at the
points of a 1-D net, independent target blocks in between, and exact
uniform connector words; outputs never contain a forbidden word.

The default net backend is a greedy maximal n-separated scan driven by iid
labels.  It is reproducible per seed but not finitely dependent; the
k-dependence diagnostic flags this on its reports.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .boxcalc import TileSet, representable_1d
from .tilegrid import (
    GridPattern,
    Window,
    extend_closed_boundary,
    extension_margin,
    grid_from_placements,
    tile_rectangle,
    validate_grid,
)

Word = tuple[str, ...]


class EmptyLanguage(ValueError):
    pass


class NotStronglyIrreducible(ValueError):
    pass


class MissingMarginals(ValueError):
    pass


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class Sft1D:
    """Nearest-neighbour SFT: alphabet plus an allowed-transition matrix.

    When built from longer forbidden words the symbols are (l-1)-blocks of
    the original alphabet; block_of maps each symbol back to that block.
    """

    alphabet: tuple[str, ...]
    transitions: tuple[tuple[bool, ...], ...]
    block_of: tuple[Word, ...] | None = None
    forbidden: tuple[Word, ...] = ()

    def index(self, symbol: str) -> int:
        return self.alphabet.index(symbol)

    def allowed_step(self, a: str, b: str) -> bool:
        return self.transitions[self.index(a)][self.index(b)]

    def allowed_word(self, w: Word) -> bool:
        if any(s not in self.alphabet for s in w):
            return False
        return all(self.allowed_step(w[i], w[i + 1]) for i in range(len(w) - 1))

    def matrix(self) -> np.ndarray:
        return np.array(self.transitions, dtype=bool)

    def to_json(self) -> str:
        import json

        return json.dumps(
            {"alphabet": list(self.alphabet),
             "forbidden": ["".join(w) for w in self.forbidden]}
        )


def word_of(text) -> Word:
    """Split a string into one-character symbols (convenience for the
    common single-character alphabets)."""
    return tuple(text)


def sft_from_forbidden(alphabet, forbidden) -> Sft1D:
    """Recode a finite forbidden-word list to nearest-neighbour form.

    Words longer than 2 trigger a higher-block presentation on the allowed
    (l-1)-blocks; symbols with no outgoing or incoming transition are
    pruned until the matrix is clean.  An empty language raises.
    """
    alphabet = tuple(alphabet)
    forbidden = tuple(tuple(w) for w in forbidden)
    if any(len(w) == 0 for w in forbidden):
        raise ValueError("forbidden words must be non-empty")
    bad1 = {w[0] for w in forbidden if len(w) == 1}
    letters = [a for a in alphabet if a not in bad1]
    long_forbidden = [w for w in forbidden if len(w) >= 2]
    l = max((len(w) for w in long_forbidden), default=2)

    def clean(word: Word) -> bool:
        if any(s in bad1 for s in word):
            return False
        for w in long_forbidden:
            k = len(w)
            if any(word[i:i + k] == w for i in range(len(word) - k + 1)):
                return False
        return True

    if l <= 2:
        symbols = [(a,) for a in letters]
    else:
        symbols = [b for b in product(letters, repeat=l - 1) if clean(b)]
    allowed = {}
    for b in symbols:
        for c in symbols:
            if l <= 2:
                ok = clean(b + c)
            else:
                ok = b[1:] == c[:-1] and clean(b + c[-1:])
            allowed[(b, c)] = ok

    while True:
        keep = [
            b for b in symbols
            if any(allowed[(b, c)] for c in symbols) and any(allowed[(c, b)] for c in symbols)
        ]
        if len(keep) == len(symbols):
            break
        symbols = keep
    if not symbols:
        raise EmptyLanguage("no bi-infinite configurations survive the forbidden list")

    if l <= 2:
        names = tuple(b[0] for b in symbols)
        blocks = None
    else:
        names = tuple("".join(b) for b in symbols)
        blocks = tuple(symbols)
    matrix = tuple(
        tuple(allowed[(b, c)] for c in symbols) for b in symbols
    )
    return Sft1D(names, matrix, blocks, forbidden)


def si_distance(x: Sft1D) -> int | None:
    """Smallest k with A^j entrywise positive for all j >= k + 1, or None
    when the matrix is not primitive.  Positivity is monotone because every
    symbol keeps an in- and out-transition after pruning."""
    A = x.matrix().astype(np.int64)
    n = len(x.alphabet)
    power = A.copy()
    bound = n * n - 2 * n + 2  # Wielandt
    for j in range(1, bound + 2):
        if np.all(power > 0):
            return j - 1
        power = np.clip(power @ A, 0, 1)
    return None


def allowed_words(x: Sft1D, length: int) -> list[Word]:
    if length == 0:
        return [()]
    out = [(a,) for a in x.alphabet]
    for _ in range(length - 1):
        out = [w + (b,) for w in out for b in x.alphabet if x.allowed_step(w[-1], b)]
    return out


def is_synchronizing(x: Sft1D, v: Word, context: int = 2) -> bool:
    """Check the defining property over all allowed contexts of bounded
    length: uv, vw allowed implies uvw allowed."""
    if not x.allowed_word(v) or not v:
        return False
    for lu in range(context + 1):
        for u in allowed_words(x, lu):
            if not x.allowed_word(u + v):
                continue
            for lw in range(context + 1):
                for w in allowed_words(x, lw):
                    if x.allowed_word(v + w) and not x.allowed_word(u + v + w):
                        return False
    return True


def synchronizing_words(x: Sft1D, length: int, context: int = 2) -> list[Word]:
    """All synchronizing words of the given length.  In nearest-neighbour
    form every allowed word qualifies; the defining property is verified
    against bounded contexts rather than assumed."""
    return [w for w in allowed_words(x, length) if is_synchronizing(x, w, context)]


def connecting_words(x: Sft1D, u: Word, w: Word, k: int) -> list[Word]:
    """All v of length k with u v w allowed; empty signals k below the SI
    distance (or a non-SI shift)."""
    if not x.allowed_word(u) or not x.allowed_word(w):
        raise ValueError("u and w must be allowed")
    if k == 0:
        return [()] if x.allowed_word(u + w) else []
    out = []
    for v in allowed_words(x, k):
        if x.allowed_word(u + v) and x.allowed_word(v + w):
            out.append(v)
    return out


class PeriodBelowThreshold(ValueError):
    pass


def periodic_point(x: Sft1D, N: int) -> Word:
    """A word of length N whose bi-infinite repetition is allowed.

    For N >= (SI distance + 1) it is assembled as sync letter + connector;
    below the threshold an exhaustive search still returns a valid word
    when one exists.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    k = si_distance(x)
    if k is not None and N >= k + 1:
        a = x.alphabet[0]
        rest = _first_cyclic_completion(x, a, N)
        if rest is not None:
            return rest
    for w in allowed_words(x, N):
        if x.allowed_step(w[-1], w[0]):
            return w
    raise PeriodBelowThreshold(f"no allowed period-{N} point")


def _first_cyclic_completion(x: Sft1D, a: str, N: int) -> Word | None:
    word = [a]

    def extend(pos):
        if pos == N:
            return x.allowed_step(word[-1], word[0])
        for b in x.alphabet:
            if x.allowed_step(word[-1], b):
                word.append(b)
                if extend(pos + 1):
                    return True
                word.pop()
        return False

    return tuple(word) if extend(1) else None


def cyclic_word_allowed(x: Sft1D, w: Word) -> bool:
    return x.allowed_word(w) and x.allowed_step(w[-1], w[0])


# ---------------------------------------------------------------------------
# empirical measures and targets


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Cylinder-word frequencies up to a maximal length."""

    r_max: int
    freq: dict  # Word -> Fraction | float

    def prob(self, w: Word):
        return self.freq.get(tuple(w), Fraction(0))

    def check_consistency(self, tol=Fraction(0)) -> bool:
        by_len: dict[int, list[Word]] = {}
        for w in self.freq:
            by_len.setdefault(len(w), []).append(w)
        for l in range(1, self.r_max + 1):
            total = sum(self.freq[w] for w in by_len.get(l, []))
            if abs(total - 1) > tol:
                return False
        for l in range(2, self.r_max + 1):
            for w in by_len.get(l - 1, []):
                ext = sum(self.freq.get(w + (a,), 0) for a in self._letters())
                if abs(ext - self.freq[w]) > tol:
                    return False
        return True

    def _letters(self):
        return sorted({w[0] for w in self.freq if len(w) == 1})


def empirical_from_symbols(symbols, r: int) -> EmpiricalMeasure:
    symbols = list(symbols)
    freq = {}
    n = len(symbols)
    for l in range(1, r + 1):
        total = n - l + 1
        counts: dict[Word, int] = {}
        for i in range(total):
            w = tuple(symbols[i:i + l])
            counts[w] = counts.get(w, 0) + 1
        for w, c in counts.items():
            freq[w] = Fraction(c, total)
    return EmpiricalMeasure(r, freq)


def weak_star_distance(a: EmpiricalMeasure, b: EmpiricalMeasure, r: int):
    """max over words of length <= r of the cylinder-frequency gap."""
    if a.r_max < r or b.r_max < r:
        raise ValueError(f"both measures must be defined to length {r}")
    words = {w for w in a.freq if len(w) <= r} | {w for w in b.freq if len(w) <= r}
    return max((abs(a.prob(w) - b.prob(w)) for w in words), default=Fraction(0))


@dataclass(frozen=True)
class MarkovTarget:
    """Stationary Markov chain used as the approximation target; supplies
    blocks of any length and exact cylinder tables."""

    alphabet: tuple[str, ...]
    initial: tuple  # stationary distribution
    rows: tuple  # transition rows

    def sample_block(self, length: int, rng) -> Word:
        if length == 0:
            return ()
        out = [_draw(self.initial, rng)]
        for _ in range(length - 1):
            out.append(_draw(self.rows[out[-1]], rng))
        return tuple(self.alphabet[i] for i in out)

    def cylinder(self, w: Word):
        idx = [self.alphabet.index(s) for s in w]
        p = self.initial[idx[0]]
        for a, b in zip(idx, idx[1:]):
            p = p * self.rows[a][b]
        return p

    def as_empirical(self, r: int) -> EmpiricalMeasure:
        freq = {}
        for l in range(1, r + 1):
            for w in product(self.alphabet, repeat=l):
                p = self.cylinder(w)
                if p:
                    freq[w] = p
        return EmpiricalMeasure(r, freq)


def _draw(weights, rng) -> int:
    u = rng.random()
    acc = 0.0
    for i, p in enumerate(weights):
        acc += float(p)
        if u < acc:
            return i
    return len(weights) - 1


def golden_mean_sft() -> Sft1D:
    return sft_from_forbidden("01", ["11"])


def golden_mean_markov() -> MarkovTarget:
    """A rational stationary chain supported on the golden mean shift."""
    rows = ((Fraction(2, 3), Fraction(1, 3)), (Fraction(1), Fraction(0)))
    initial = (Fraction(3, 4), Fraction(1, 4))
    return MarkovTarget(("0", "1"), initial, rows)


# ---------------------------------------------------------------------------
# net backend and samplers


def greedy_net_1d(lo: int, hi: int, n: int, rng) -> list[int]:
    """Maximal n-separated subset of [lo, hi): positions are adopted in
    increasing order of iid labels when no accepted point is within n.
    Consecutive gaps land in [n+1, 2n+1]."""
    length = hi - lo
    labels = [rng.random() for _ in range(length)]
    order = sorted(range(length), key=lambda i: (labels[i], i))
    blocked = np.zeros(length, dtype=bool)
    accepted = []
    for i in order:
        if not blocked[i]:
            accepted.append(i)
            blocked[max(0, i - n):i + n + 1] = True
    return sorted(lo + i for i in accepted)


@dataclass(frozen=True)
class ProcessSample:
    sft: Sft1D
    window: tuple[int, int]  # (start, length)
    symbols: np.ndarray  # symbol indices
    seed: int
    params: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def word(self) -> Word:
        return tuple(self.sft.alphabet[i] for i in self.symbols)

    def contains_forbidden(self) -> bool:
        A = self.sft.matrix()
        s = self.symbols
        return bool(np.any(~A[s[:-1], s[1:]]))


def _uniform_bridge(x: Sft1D, a: int, b: int, length: int, rng) -> list[int]:
    """Uniform word of the given length with allowed steps a -> word -> b,
    sampled exactly via path counting."""
    A = x.matrix().astype(object)
    counts = [np.zeros(len(x.alphabet), dtype=object) for _ in range(length + 1)]
    counts[length][b] = 1  # paths remaining after placing all symbols
    for j in range(length - 1, -1, -1):
        counts[j] = A @ counts[j + 1]
    if counts[0][a] == 0:
        raise NotStronglyIrreducible(f"no word of length {length} joins {a} and {b}")
    out = []
    cur = a
    for j in range(length):
        weights = [A[cur][s] * counts[j + 1][s] for s in range(len(x.alphabet))]
        total = sum(weights)
        pick = rng.randrange(total)
        acc = 0
        for s, wgt in enumerate(weights):
            acc += wgt
            if pick < acc:
                out.append(s)
                cur = s
                break
    return out


def fd_sample_1d(x: Sft1D, target, n: int, window: tuple[int, int], seed: int,
                 sync_len: int = 1) -> ProcessSample:
    """Window realization of the sync-word block construction.

    Net points carry uniform synchronizing words; the stretch between two
    sync words holds an independent target block, buffered on both sides by
    uniform connector words of length k (the SI distance).  `target` is a
    MarkovTarget or an EmpiricalMeasure with marginals up to 2n+1-2k-l.
    """
    k = si_distance(x)
    if k is None:
        raise NotStronglyIrreducible("transition matrix is not primitive")
    l = sync_len
    if n <= k + l:
        raise ValueError(f"need n > si_distance + sync length = {k + l}")
    start, length = window
    rng = random.Random(seed)
    syncs = synchronizing_words(x, l)
    margin = 2 * n + 2
    net = greedy_net_1d(start - margin, start + length + margin, n, rng)

    max_block = 2 * n + 1 - 2 * k - l
    if isinstance(target, EmpiricalMeasure):
        if target.r_max < max_block:
            raise MissingMarginals(f"need marginals up to length {max_block}")
        sample_block = lambda t, r: _measure_block(target, t, r)
    else:
        sample_block = target.sample_block

    idx = {a: i for i, a in enumerate(x.alphabet)}
    buf = np.zeros(length, dtype=np.int64)

    def put(pos, symbols):
        for j, s in enumerate(symbols):
            p = pos + j - start
            if 0 <= p < length:
                buf[p] = s

    sync_at = {}
    for v in net:
        sync_at[v] = tuple(idx[s] for s in rng.choice(syncs))
    good_ranges = []
    for v, nxt in zip(net, net[1:]):
        t = nxt - v
        s_v = sync_at[v]
        block = tuple(idx[s] for s in sample_block(t - 2 * k - l, rng))
        left = _connector(x, s_v[-1], block[0], k, rng)
        right = _connector(x, block[-1], sync_at[nxt][0], k, rng)
        put(v, s_v)
        put(v + l, left)
        put(v + l + k, block)
        put(v + t - k, right)
        if v + l + k >= start - max_block and v + t - k <= start + length + max_block:
            good_ranges.append((v + l + k, v + t - k))  # target block, absolute

    sample = ProcessSample(
        x, window, buf, seed,
        params={"n": n, "k": k, "sync_len": l, "construction": "sync-block"},
        metadata={"net": [p for p in net if start <= p < start + length],
                  "block_ranges": good_ranges,
                  "net_backend": "greedy scan (not finitely dependent)"},
    )
    if sample.contains_forbidden():
        raise ValueError("target produced a forbidden word; is it supported on the SFT?")
    return sample


def _measure_block(mu: EmpiricalMeasure, length: int, rng) -> Word:
    out: tuple = ()
    for _ in range(length):
        base = mu.prob(out) if out else Fraction(1)
        letters = mu._letters()
        weights = [float(mu.prob(out + (a,)) / base) for a in letters]
        out = out + (letters[_draw(weights, rng)],)
    return out


def _connector(x: Sft1D, a: int, b: int, k: int, rng) -> list[int]:
    """Uniform connecting word of length k between symbol indices a and b."""
    if k == 0:
        if not x.transitions[a][b]:
            raise NotStronglyIrreducible("eligible connector of length 0 missing")
        return []
    return _uniform_bridge(x, a, b, k, rng)


def fd_sample_fully_supported(x: Sft1D, n: int, window: tuple[int, int], seed: int) -> ProcessSample:
    """Uniform letters at the net points, exact uniform valid fills in the
    gaps; every allowed word eventually appears in long samples."""
    k = si_distance(x)
    if k is None:
        raise NotStronglyIrreducible("transition matrix is not primitive")
    if n <= k:
        raise ValueError(f"need n > si_distance = {k}")
    start, length = window
    rng = random.Random(seed)
    margin = 2 * n + 2
    net = greedy_net_1d(start - margin, start + length + margin, n, rng)
    buf = np.zeros(length, dtype=np.int64)
    letters = {v: rng.randrange(len(x.alphabet)) for v in net}

    def put(pos, symbols):
        for j, s in enumerate(symbols):
            p = pos + j - start
            if 0 <= p < length:
                buf[p] = s

    for v, nxt in zip(net, net[1:]):
        put(v, [letters[v]])
        fill = _uniform_bridge(x, letters[v], letters[nxt], nxt - v - 1, rng)
        put(v + 1, fill)

    sample = ProcessSample(
        x, window, buf, seed,
        params={"n": n, "k": k, "construction": "fully-supported"},
        metadata={"net": [p for p in net if start <= p < start + length],
                  "net_backend": "greedy scan (not finitely dependent)"},
    )
    assert not sample.contains_forbidden()
    return sample


@dataclass(frozen=True)
class KDependenceReport:
    statistic: float
    dof: int
    p_value: float
    pairs: int
    gap: int
    block: int
    backend_finitely_dependent: bool
    note: str


def k_dependence_test(sample: ProcessSample, k: int, block: int, gap: int,
                      max_pairs: int | None = None) -> KDependenceReport:
    """Chi-square independence diagnostic for block pairs at the given gap.

    Purely descriptive: the default net backend is not finitely dependent,
    so no pass/fail claim is attached."""
    if gap <= k:
        raise ValueError("gap must exceed k")
    s = sample.symbols
    stride = 2 * block + gap
    positions = range(0, len(s) - stride + 1, stride)
    if max_pairs is not None:
        positions = list(positions)[:max_pairs]
    table: dict = {}
    pairs = 0
    for i in positions:
        a = tuple(s[i:i + block].tolist())
        b = tuple(s[i + block + gap:i + stride].tolist())
        table[(a, b)] = table.get((a, b), 0) + 1
        pairs += 1
    if pairs < 10:
        raise InsufficientData(f"only {pairs} block pairs available")
    rows: dict = {}
    cols: dict = {}
    for (a, b), cnt in table.items():
        rows[a] = rows.get(a, 0) + cnt
        cols[b] = cols.get(b, 0) + cnt
    stat = 0.0
    for a, ra in rows.items():
        for b, cb in cols.items():
            e = ra * cb / pairs
            o = table.get((a, b), 0)
            stat += (o - e) ** 2 / e
    dof = (len(rows) - 1) * (len(cols) - 1)
    if dof > 0:
        from scipy.stats import chi2

        p_value = float(chi2.sf(stat, dof))
    else:
        p_value = 1.0
    return KDependenceReport(
        stat, dof, p_value, pairs, gap, block, False,
        "net backend is a greedy scan, not finitely dependent",
    )


# ---------------------------------------------------------------------------
# rectangle-window tiling sampler


@dataclass(frozen=True)
class RectWindowSample:
    pattern: GridPattern
    squares: tuple  # (square window, interior window or None)
    pasted: dict  # square window -> pasted GridPattern
    seed: int


def rect_window_sampler(ts: TileSet, m: int, window: Window, source, seed: int) -> RectWindowSample:
    """Deterministically pack the window with m/(m+1) squares, paste a
    source pattern into each square's N-interior and extend it to a
    closed-boundary tiling of the square.

    `source(interior_window, rng)` returns the pattern to paste (None means
    fill the square with no pasting constraint).
    """
    N = extension_margin(ts)
    if m <= N:
        raise ValueError(f"need m > N = {N}")
    rng = random.Random(seed)
    heights = representable_1d({m, m + 1}, window.h)
    widths = representable_1d({m, m + 1}, window.w)
    if heights is None or widths is None:
        raise ValueError(f"window {window.w}x{window.h} does not pack into {m}/{m + 1} squares")
    hs = [s for s in sorted(heights) for _ in range(heights[s])]
    ws = [s for s in sorted(widths) for _ in range(widths[s])]

    placements = []
    squares = []
    pasted = {}
    y = window.y0
    for sh in hs:
        x = window.x0
        for sw in ws:
            square = Window(x, y, sw, sh)
            interior = square.shrink(N)
            inner = None
            if interior.w >= 1 and interior.h >= 1 and source is not None:
                inner = source(interior, rng)
            if inner is not None and inner.cells:
                extended = extend_closed_boundary(inner, ts)
                if (extended.window.x0, extended.window.y0,
                        extended.window.w, extended.window.h) != (x, y, sw, sh):
                    raise AssertionError("internal: extension does not fill its square")
                placements.extend((t, a) for t, a in extended.instances())
                pasted[(x, y, sw, sh)] = inner
                squares.append((square, interior))
            else:
                placements.extend(tile_rectangle(ts, square, rng))
                squares.append((square, None))
            x += sw
        y += sh

    pattern = grid_from_placements(ts, window, placements)
    if not (validate_grid(pattern) and pattern.fully_covered()):
        raise AssertionError("internal: assembled window is not a valid tiling")
    return RectWindowSample(pattern, tuple(squares), pasted, seed)
