"""Tiling boxes by boxes: decision procedures and a constructive tiler.

Everything here is exact integer combinatorics: the gcd-partition criterion
for eventual tileability in d dimensions, the 2-D obstruction search, the
orthogonal-bar divisibility test, Frobenius thresholds, a constructive tiler
for large boxes, and an exhaustive exact-cover oracle used to cross-check
all of it on small instances.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from itertools import product


class PartitionBoundExceeded(ValueError):
    pass


class ConditionFails(ValueError):
    """The gcd-partition criterion does not hold for this tile set."""


class OracleBoundExceeded(ValueError):
    pass


BoxShape = tuple[int, ...]


def volume(box: BoxShape) -> int:
    return math.prod(box)


@dataclass(frozen=True)
class TileSet:
    """A finite set of d-dimensional integer boxes.

    For d = 2 the first side is horizontal and the second vertical, and the
    derived side-length tables H, V, V_h, H_v are available.
    """

    dim: int
    tiles: tuple[BoxShape, ...]

    def __post_init__(self):
        if self.dim < 1 or not self.tiles:
            raise ValueError("need dim >= 1 and at least one tile")
        for t in self.tiles:
            if len(t) != self.dim:
                raise ValueError(f"tile {t} does not have dimension {self.dim}")
            if any(s < 1 for s in t):
                raise ValueError(f"tile {t} has a side < 1")

    @classmethod
    def of(cls, tiles) -> "TileSet":
        tiles = tuple(tuple(t) for t in tiles)
        return cls(len(tiles[0]), tiles)

    def _require_2d(self):
        if self.dim != 2:
            raise ValueError("side-length tables are defined for d = 2 only")

    @cached_property
    def H(self) -> frozenset[int]:
        self._require_2d()
        return frozenset(t[0] for t in self.tiles)

    @cached_property
    def V(self) -> frozenset[int]:
        self._require_2d()
        return frozenset(t[1] for t in self.tiles)

    @cached_property
    def V_h(self) -> dict[int, frozenset[int]]:
        self._require_2d()
        out: dict[int, set[int]] = {}
        for w, h in self.tiles:
            out.setdefault(w, set()).add(h)
        return {k: frozenset(v) for k, v in out.items()}

    @cached_property
    def H_v(self) -> dict[int, frozenset[int]]:
        self._require_2d()
        out: dict[int, set[int]] = {}
        for w, h in self.tiles:
            out.setdefault(h, set()).add(w)
        return {k: frozenset(v) for k, v in out.items()}

    def to_json(self) -> str:
        return json.dumps({"dim": self.dim, "tiles": [list(t) for t in self.tiles]})

    @classmethod
    def from_json(cls, text: str) -> "TileSet":
        data = json.loads(text)
        return cls(data["dim"], tuple(tuple(t) for t in data["tiles"]))


def _gcd_of(values) -> int:
    g = 0
    for v in values:
        g = math.gcd(g, v)
    return g


def gcd_partition_check(ts: TileSet, bound: int = 12):
    """Check that every partition of the tiles into d classes has a class
    whose j-th side lengths have gcd 1.

    Returns (True, None) when the criterion holds, else (False, witness)
    where the witness is a violating partition as d index lists.  The gcd
    over an empty class is 0, which never certifies the partition.
    """
    k = len(ts.tiles)
    if k > bound:
        raise PartitionBoundExceeded(f"{ts.dim}^{k} partitions exceed bound {bound}")
    for assignment in product(range(ts.dim), repeat=k):
        ok = False
        for j in range(ts.dim):
            g = _gcd_of(ts.tiles[i][j] for i in range(k) if assignment[i] == j)
            if g == 1:
                ok = True
                break
        if not ok:
            witness = tuple(
                tuple(i for i in range(k) if assignment[i] == j) for j in range(ts.dim)
            )
            return False, witness
    return True, None


@dataclass(frozen=True)
class TwoDDecision:
    verdict: str  # "obstructed" | "constructible"
    m: int | None = None
    n: int | None = None
    A: tuple[int, ...] | None = None
    B: tuple[int, ...] | None = None

    @property
    def obstructed(self) -> bool:
        return self.verdict == "obstructed"

    def to_json(self) -> str:
        if self.obstructed:
            return json.dumps(
                {"verdict": "obstructed", "m": self.m, "n": self.n,
                 "A": list(self.A), "B": list(self.B)}
            )
        return json.dumps({"verdict": "constructible"})


def decide_2d(ts: TileSet) -> TwoDDecision:
    """Two-dimensional obstruction search.

    Obstructed iff the tiles split into A | B with some m > 1 dividing
    every horizontal side in A and some n > 1 dividing every vertical side
    in B; then m x 1 and 1 x n bars tile every tile, which kills the model.
    Reports the (gcd over A, gcd over B) pair of the lexicographically
    smallest feasible witness; an empty class contributes the smallest
    admissible value 2.
    """
    ts._require_2d()
    k = len(ts.tiles)
    best = None
    for mask in range(1 << k):
        A = tuple(i for i in range(k) if mask >> i & 1)
        B = tuple(i for i in range(k) if not mask >> i & 1)
        m = _gcd_of(ts.tiles[i][0] for i in A) if A else 2
        n = _gcd_of(ts.tiles[i][1] for i in B) if B else 2
        if m <= 1 or n <= 1:
            continue
        cand = (m, n, A, B)
        if best is None or cand[:2] < best[:2]:
            best = cand
    if best is None:
        return TwoDDecision("constructible")
    return TwoDDecision("obstructed", *best)


def bar_divisibility(bars: TileSet, target: BoxShape) -> int | None:
    """For an orthogonal bar set, return the index of a bar whose length
    divides the matching target side, or None.

    None means the bar set cannot tile the target at all: evaluating the
    box polynomial prod_j (1 + x_j + ... + x_j^(l_j - 1)) at the root tuple
    (e^(2 pi i / b_1), ...) shows some b_i | l_i is necessary.
    """
    axes = []
    for t in bars.tiles:
        big = [j for j in range(bars.dim) if t[j] != 1]
        if len(big) != 1:
            raise ValueError(f"{t} is not a bar (exactly one side must exceed 1)")
        axes.append(big[0])
    if len(set(axes)) != len(axes):
        raise ValueError("bars are not pairwise orthogonal")
    for i, t in enumerate(bars.tiles):
        j = axes[i]
        if target[j] % t[j] == 0:
            return i
    return None


def representable_1d(S, ell: int) -> dict[int, int] | None:
    """Non-negative integer combination of S summing to ell, or None.

    Deterministic DP; prefers small summands first when decomposing.
    """
    S = sorted(set(S))
    if not S:
        raise ValueError("S must be non-empty")
    if ell < 0:
        return None
    # choice[x] = summand used to reach x, or 0 for unreachable (x > 0)
    choice = [0] * (ell + 1)
    reachable = [False] * (ell + 1)
    reachable[0] = True
    for x in range(1, ell + 1):
        for s in S:
            if s <= x and reachable[x - s]:
                reachable[x] = True
                choice[x] = s
                break
    if not reachable[ell]:
        return None
    counts: dict[int, int] = {}
    x = ell
    while x > 0:
        s = choice[x]
        counts[s] = counts.get(s, 0) + 1
        x -= s
    return counts


def frobenius_threshold(S) -> int:
    """Smallest positive k0 such that every integer >= k0 is a non-negative
    combination of S.  Requires gcd(S) = 1."""
    S = sorted(set(S))
    if not S:
        raise ValueError("S must be non-empty")
    if _gcd_of(S) != 1:
        raise ValueError(f"gcd({S}) != 1, threshold does not exist")
    if S[0] == 1:
        return 1
    smallest = S[0]
    reachable = [True]  # index 0
    run = 0
    x = 0
    while True:
        x += 1
        if x >= len(reachable):
            reachable.extend(
                any(s <= y and reachable[y - s] for s in S)
                for y in range(len(reachable), x + 1)
            )
        if reachable[x]:
            run += 1
            if run == smallest:
                return max(1, x - smallest + 1)
        else:
            run = 0


def _boundary(ts: TileSet) -> TileSet:
    """Drop the last coordinate of every tile (deduplicated)."""
    shapes = sorted(set(t[:-1] for t in ts.tiles))
    return TileSet(ts.dim - 1, tuple(shapes))


def _prime_factors(n: int) -> set[int]:
    out = set()
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.add(d)
            n //= d
        d += 1
    if n > 1:
        out.add(n)
    return out


def _lcm_of(values) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def _prime_slabs(ts: TileSet):
    """The prime set P with, per prime, the tiles whose last side it does
    not divide and the lcm of their last sides.  gcd of the lcms is 1."""
    primes = set()
    for t in ts.tiles:
        primes |= _prime_factors(t[-1])
    if not primes:
        primes = {2}  # all last sides are 1
    out = []
    for p in sorted(primes):
        Bp = tuple(i for i, t in enumerate(ts.tiles) if t[-1] % p != 0)
        if not Bp:
            raise ConditionFails(f"every tile's last side is divisible by {p}")
        mp = _lcm_of(ts.tiles[i][-1] for i in Bp)
        out.append((p, Bp, mp))
    return out


def eventual_k0(ts: TileSet) -> int:
    """A threshold k0 such that every box with all sides >= k0 is tileable.

    Follows the inductive slab decomposition over primes dividing the last
    side lengths; valid but not minimal.
    """
    holds, _ = gcd_partition_check(ts)
    if not holds:
        raise ConditionFails("gcd-partition criterion fails")
    if ts.dim == 1:
        return frobenius_threshold(s[0] for s in ts.tiles)
    slabs = _prime_slabs(ts)
    m0 = frobenius_threshold(mp for _, _, mp in slabs)
    k0 = m0
    for _, Bp, _ in slabs:
        sub = TileSet(ts.dim, tuple(ts.tiles[i] for i in Bp))
        k0 = max(k0, eventual_k0(_boundary(sub)))
    return k0


@dataclass(frozen=True)
class BrickTiling:
    target: BoxShape
    placements: tuple[tuple[int, BoxShape], ...]  # (tile index, offset)

    def to_json(self) -> str:
        return json.dumps(
            {"target": list(self.target),
             "placements": [[i, list(off)] for i, off in self.placements]}
        )


def construct_tiling(ts: TileSet, target: BoxShape) -> BrickTiling:
    """Tile the target box, assuming the gcd criterion holds and every side
    is at least eventual_k0(ts).

    Slabs are stacked along the last coordinate; each slab's base is tiled
    recursively and lifted through the slab.
    """
    if len(target) != ts.dim:
        raise ValueError("target dimension mismatch")
    k0 = eventual_k0(ts)  # raises ConditionFails when the criterion fails
    if any(s < k0 for s in target):
        raise ValueError(f"target sides must all be >= {k0}")
    placements = _construct(ts, target)
    return BrickTiling(tuple(target), tuple(placements))


def _construct(ts: TileSet, target: BoxShape) -> list[tuple[int, BoxShape]]:
    if ts.dim == 1:
        lengths = {}
        for i, t in enumerate(ts.tiles):
            lengths.setdefault(t[0], i)
        counts = representable_1d(lengths.keys(), target[0])
        if counts is None:
            raise AssertionError(f"internal: {target[0]} not representable")
        pos = 0
        out = []
        for s in sorted(counts):
            for _ in range(counts[s]):
                out.append((lengths[s], (pos,)))
                pos += s
        return out

    slabs = _prime_slabs(ts)
    counts = representable_1d([mp for _, _, mp in slabs], target[-1])
    if counts is None:
        raise AssertionError(f"internal: {target[-1]} not representable over slabs")
    out = []
    z = 0
    for p, Bp, mp in slabs:
        for _ in range(counts.get(mp, 0)):
            out.extend(_tile_slab(ts, Bp, mp, target[:-1], z))
            z += mp
    return out


def _tile_slab(ts, Bp, mp, base: BoxShape, z: int):
    """Tile base x [z, z + mp) by the tiles indexed by Bp."""
    by_shape: dict[BoxShape, int] = {}
    for i in Bp:
        by_shape.setdefault(ts.tiles[i][:-1], i)
    sub = TileSet(ts.dim - 1, tuple(sorted(by_shape)))
    base_placements = _construct(sub, base)
    out = []
    for j, off in base_placements:
        i = by_shape[sub.tiles[j]]
        depth = ts.tiles[i][-1]
        for rep in range(mp // depth):
            out.append((i, off + (z + rep * depth,)))
    return out


def validate_brick_tiling(t: BrickTiling, ts: TileSet) -> bool:
    """True iff the placements partition the target box exactly."""
    need = volume(t.target)
    got = 0
    seen = set()
    for i, off in t.placements:
        if not 0 <= i < len(ts.tiles):
            return False
        shape = ts.tiles[i]
        for j in range(len(shape)):
            if off[j] < 0 or off[j] + shape[j] > t.target[j]:
                return False
        for cell in product(*(range(off[j], off[j] + shape[j]) for j in range(len(shape)))):
            if cell in seen:
                return False
            seen.add(cell)
        got += volume(shape)
    return got == need


def tiles_box_oracle(ts: TileSet, target: BoxShape, cell_bound: int = 64) -> bool:
    """Exhaustive exact-cover tileability check for small targets.

    Deterministic backtracking over the first empty cell in lexicographic
    order (every box covering that cell must have its minimal corner there),
    with memoization of failed fill states.
    """
    if volume(target) > cell_bound:
        raise OracleBoundExceeded(f"volume {volume(target)} exceeds bound {cell_bound}")
    cells = sorted(product(*(range(s) for s in target)))
    index = {c: i for i, c in enumerate(cells)}
    shapes = sorted(set(ts.tiles))

    masks_at: list[list[int]] = [[] for _ in cells]
    for at, corner in enumerate(cells):
        for shape in shapes:
            if any(corner[j] + shape[j] > target[j] for j in range(len(target))):
                continue
            mask = 0
            for cell in product(*(range(corner[j], corner[j] + shape[j]) for j in range(len(target)))):
                mask |= 1 << index[cell]
            masks_at[at].append(mask)

    full = (1 << len(cells)) - 1
    failed: set[int] = set()

    def solve(filled: int) -> bool:
        if filled == full:
            return True
        if filled in failed:
            return False
        empty = ~filled & full
        at = (empty & -empty).bit_length() - 1
        for mask in masks_at[at]:
            if filled & mask:
                continue
            if solve(filled | mask):
                return True
        failed.add(filled)
        return False

    return solve(0)
