"""Lattice nets, Voronoi coverings, the auxiliary coloring and the staged
proper-coloring sampler.

A box is a tuple of (start, size) pairs, one per axis; fields over a box are
numpy arrays indexed by (coordinate - start).  Distances are always l-inf.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy import ndimage

LatticeBox = tuple  # ((start, size), ...)


def box_cells(box: LatticeBox):
    return product(*(range(s, s + n) for s, n in box))


def box_contains(box: LatticeBox, cell) -> bool:
    return all(s <= c < s + n for c, (s, n) in zip(cell, box))


def box_shrink(box: LatticeBox, margin: int) -> LatticeBox:
    return tuple((s + margin, n - 2 * margin) for s, n in box)


def _index(box: LatticeBox, cell):
    return tuple(c - s for c, (s, n) in zip(cell, box))


def ball_offsets(d: int, r: int):
    return [off for off in product(range(-r, r + 1), repeat=d) if any(off)]


@dataclass(frozen=True)
class RangeColoring:
    box: LatticeBox
    m: int
    q: int
    colors: np.ndarray  # values in 1..q

    def color_at(self, cell) -> int:
        return int(self.colors[_index(self.box, cell)])


def periodic_range_coloring(d: int, m: int, phase, box: LatticeBox) -> RangeColoring:
    """Colors read the base-(m+1) digits of (v + phase) mod (m+1); any two
    cells within distance m differ in some digit."""
    phase = tuple(phase)
    if len(phase) != d or len(box) != d:
        raise ValueError("phase/box dimension mismatch")
    grids = np.indices([n for _, n in box])
    colors = np.zeros(grids.shape[1:], dtype=np.int64)
    for j in range(d):
        digit = (grids[j] + box[j][0] + phase[j]) % (m + 1)
        colors = colors * (m + 1) + digit
    return RangeColoring(box, m, (m + 1) ** d, colors + 1)


def validate_range_coloring(c: RangeColoring) -> bool:
    d = len(c.box)
    for off in ball_offsets(d, c.m):
        a = c.colors
        b = c.colors
        for j, o in enumerate(off):
            a = np.take(a, range(max(0, o), a.shape[j] + min(0, o)), axis=j)
            b = np.take(b, range(max(0, -o), b.shape[j] + min(0, -o)), axis=j)
        if a.shape == b.shape and a.size and np.any(a == b):
            return False
    return True


@dataclass(frozen=True)
class NetConfig:
    box: LatticeBox
    m: int
    points: np.ndarray  # bool

    def centers(self) -> list[tuple]:
        idx = np.argwhere(self.points)
        starts = [s for s, _ in self.box]
        return sorted(tuple(int(v) + s for v, s in zip(row, starts)) for row in idx)


def greedy_net_completion(c: RangeColoring) -> NetConfig:
    """Stagewise completion: color-1 cells seed the net, each later color
    joins wherever its m-ball is still empty.  Same-color cells are more
    than m apart, so each stage commits simultaneously."""
    size = 2 * c.m + 1
    points = np.zeros(c.colors.shape, dtype=bool)
    for i in range(1, c.q + 1):
        blocked = ndimage.maximum_filter(points.astype(np.uint8), size=size, mode="constant")
        stage = (c.colors == i) & (blocked == 0)
        points |= stage
    return NetConfig(c.box, c.m, points)


def validate_net(net: NetConfig) -> dict:
    """Exact m-separation (whole box) and m-covering (whole box and interior)."""
    d = len(net.box)
    size = 2 * net.m + 1
    counts = ndimage.convolve(
        net.points.astype(np.int32), np.ones((size,) * d, dtype=np.int32), mode="constant"
    )
    separated = bool(np.all(counts[net.points] == 1))
    covered = ndimage.maximum_filter(net.points.astype(np.uint8), size=size, mode="constant") > 0
    interior = tuple(slice(net.m, n - net.m) for _, n in net.box)
    covering_interior = bool(np.all(covered[interior])) if covered[interior].size else True
    return {
        "separated": separated,
        "covering": bool(np.all(covered)),
        "covering_interior": covering_interior,
    }


class VoronoiCells:
    """l-inf Voronoi covering around the net points.

    Membership is the full (overlapping) set of nearest centers; the owner
    is the lexicographically smallest member.  Membership is computed
    lazily per cell and cached.
    """

    def __init__(self, net: NetConfig):
        self.net = net
        self.box = net.box
        self.centers = net.centers()
        if not self.centers:
            raise ValueError("net has no points")
        self._buckets: dict = {}
        w = max(net.m, 1)
        self._bucket_w = w
        for i, ctr in enumerate(self.centers):
            key = tuple(c // w for c in ctr)
            self._buckets.setdefault(key, []).append(i)
        self._cache: dict = {}

    def membership(self, cell) -> tuple[int, ...]:
        cell = tuple(cell)
        hit = self._cache.get(cell)
        if hit is not None:
            return hit
        w = self._bucket_w
        d = len(cell)
        best = None
        members: list[int] = []
        radius = 1
        while True:
            cand: list[int] = []
            lo = [(c - radius * w) // w for c in cell]
            hi = [(c + radius * w) // w for c in cell]
            for key in product(*(range(a, b + 1) for a, b in zip(lo, hi))):
                cand.extend(self._buckets.get(key, ()))
            if cand:
                dists = {}
                for i in cand:
                    dist = max(abs(a - b) for a, b in zip(cell, self.centers[i]))
                    dists[i] = dist
                best = min(dists.values())
                # the scanned buckets contain every center within radius * w
                if best <= radius * w:
                    members = sorted(i for i, dv in dists.items() if dv == best)
                    break
            radius += 1
            if radius > 3 + max(n for _, n in self.box) // w:
                raise AssertionError("internal: bucket search runaway")
        out = tuple(members)
        self._cache[cell] = out
        return out

    def owner(self, cell) -> int:
        return self.membership(cell)[0]

    def distance(self, cell) -> int:
        i = self.membership(cell)[0]
        return max(abs(a - b) for a, b in zip(cell, self.centers[i]))


def cell_intersection_count(vc: VoronoiCells, v, rho: int) -> int:
    """Number of (overlapping) Voronoi cells meeting the ball B(v, rho)."""
    d = len(vc.box)
    for c, (s, n) in zip(v, vc.box):
        if c - rho < s or c + rho >= s + n:
            raise ValueError(f"ball B({v}, {rho}) exits the box")
    met: set[int] = set()
    for off in product(range(-rho, rho + 1), repeat=d):
        met.update(vc.membership(tuple(a + o for a, o in zip(v, off))))
    return len(met)


def geometric_cell_bound(d: int, c: float) -> int:
    """Packing bound on the cells met by a ball of radius floor(c*m)."""
    return 4 ** d * math.ceil(3 * (c + 2)) ** d


@dataclass(frozen=True)
class DColoring:
    domain: LatticeBox
    r: int
    D: int
    m: int
    values: np.ndarray  # Z_v in 1..D

    def value_at(self, cell) -> int:
        return int(self.values[_index(self.domain, cell)])

    def color_class(self, i: int) -> list[tuple]:
        starts = [s for s, _ in self.domain]
        idx = np.argwhere(self.values == i)
        return sorted(tuple(int(v) + s for v, s in zip(row, starts)) for row in idx)


def d_coloring(vc: VoronoiCells, r: int, D: int) -> DColoring:
    """Z_v = the largest k <= D such that B(v, r k) meets at least k Voronoi
    cells; computed on the box interior with margin r*D so every ball fits."""
    box = vc.box
    domain = box_shrink(box, r * D)
    if any(n < 1 for _, n in domain):
        raise ValueError(f"margin {r * D} leaves no interior in {box}")
    d = len(box)
    shape = tuple(n for _, n in domain)
    values = np.ones(shape, dtype=np.int64)
    for cell in box_cells(domain):
        met: set[int] = set()
        z = 1
        for k in range(1, D + 1):
            lo = (k - 1) * r + 1 if k > 1 else 0
            for off in product(range(-k * r, k * r + 1), repeat=d):
                if max(abs(o) for o in off) < lo:
                    continue
                met.update(vc.membership(tuple(a + o for a, o in zip(cell, off))))
            if len(met) >= k:
                z = k
        values[_index(domain, cell)] = z
    return DColoring(domain, r, D, vc.net.m, values)


@dataclass(frozen=True)
class Component:
    cells: frozenset
    diameter: int


def r_components(cells, r: int) -> list[Component]:
    """r-components (l-inf distance <= r connects) with exact diameters."""
    remaining = set(map(tuple, cells))
    if not remaining:
        return []
    d = len(next(iter(remaining)))
    offsets = ball_offsets(d, r)
    out = []
    while remaining:
        seed = min(remaining)
        comp = {seed}
        queue = [seed]
        remaining.discard(seed)
        while queue:
            cur = queue.pop()
            for off in offsets:
                nb = tuple(a + o for a, o in zip(cur, off))
                if nb in remaining:
                    remaining.discard(nb)
                    comp.add(nb)
                    queue.append(nb)
        diam = max(
            max(c[j] for c in comp) - min(c[j] for c in comp) for j in range(d)
        )
        out.append(Component(frozenset(comp), diam))
    return sorted(out, key=lambda c: min(c.cells))


def g_l_cells(dc: DColoring, l: int) -> set:
    """Cells whose l-ball lies inside the color-1 set (computed where the
    ball fits in the domain)."""
    inner = box_shrink(dc.domain, l)
    d = len(dc.domain)
    out = set()
    for cell in box_cells(inner):
        if all(
            dc.value_at(tuple(a + o for a, o in zip(cell, off))) == 1
            for off in product(range(-l, l + 1), repeat=d)
        ):
            out.add(cell)
    return out


# ---------------------------------------------------------------------------
# staged sampler on proper q-colorings of Z^2


@dataclass(frozen=True)
class FepConfig:
    """Constants for the staged proper-coloring sampler.

    g and k_si are working values probed empirically by the test suite
    (small-window extension and joinability searches); they are not claimed
    minimal.  The stage-separation precondition is r > 2 g D + k_si.
    """

    q: int = 4
    g: int = 1
    k_si: int = 2
    D: int = 2
    r: int = 7
    m: int = 16


FEP_DEFAULTS = FepConfig()


class StageFillInfeasible(RuntimeError):
    pass


def _fill_proper(region, fixed: dict, q: int, rng, node_budget: int = 2_000_000) -> dict:
    """Color `region` so adjacent cells (and fixed neighbours) differ, by
    seeded MRV backtracking.  Exact: raises only if no coloring exists or
    the node budget runs out."""
    region = sorted(region)
    if not region:
        return {}
    region_set = set(region)
    all_colors = list(range(q))
    assignment: dict = {}
    nodes = 0

    def neighbors(cell):
        x, y = cell
        return ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1))

    def options(cell):
        used = set()
        for nb in neighbors(cell):
            v = assignment.get(nb)
            if v is None:
                v = fixed.get(nb)
            if v is not None:
                used.add(v)
        return [c for c in all_colors if c not in used]

    def pick():
        best = None
        for cell in region:
            if cell in assignment:
                continue
            opts = options(cell)
            key = (len(opts), cell)
            if best is None or key < best[0]:
                best = (key, cell, opts)
                if len(opts) <= 1:
                    break
        return best

    def solve():
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise StageFillInfeasible("node budget exhausted")
        chosen = pick()
        if chosen is None:
            return True
        _, cell, opts = chosen
        rng.shuffle(opts)
        for c in opts:
            assignment[cell] = c
            if solve():
                return True
            del assignment[cell]
        return False

    if not solve():
        raise StageFillInfeasible(f"no proper extension on {len(region_set)} cells")
    return assignment


@dataclass(frozen=True)
class StagedSample:
    domain: LatticeBox
    colors: np.ndarray
    seed: int
    config: FepConfig
    stage_sizes: tuple[int, ...]
    centers: tuple = ()


def validate_proper_coloring(colors: np.ndarray, q: int) -> bool:
    if colors.min() < 0 or colors.max() >= q:
        return False
    return not (
        np.any(colors[1:, :] == colors[:-1, :]) or np.any(colors[:, 1:] == colors[:, :-1])
    )


def staged_fep_sampler(dc: DColoring, config: FepConfig, seed: int) -> StagedSample:
    """Paste independent colorings on the color-1 component envelopes, then
    fill the later color classes component by component, keeping everything
    exactly proper.  Stage fills solve the whole component jointly plus a
    g-ring of lookahead cells, so a locally proper boundary never wedges."""
    if dc.r <= 2 * config.g * config.D + config.k_si:
        raise ValueError(
            f"need r > 2 g D + k = {2 * config.g * config.D + config.k_si}, got {dc.r}"
        )
    if dc.D != config.D:
        raise ValueError("coloring stages and config D disagree")
    rng = random.Random(seed)
    domain_cells = set(box_cells(dc.domain))
    labels = {cell: rng.random() for cell in sorted(domain_cells)}
    colored: dict = {}
    env = config.g * max(config.D - 2, 0)
    stage_sizes = []
    centers = []
    d = len(dc.domain)

    for i in range(1, config.D + 1):
        comps = r_components(dc.color_class(i), dc.r)
        filled = 0
        for comp in comps:
            region = set()
            for cell in comp.cells:
                for off in product(range(-env, env + 1), repeat=d):
                    nb = tuple(a + o for a, o in zip(cell, off))
                    if nb in domain_cells and nb not in colored:
                        region.add(nb)
            if not region:
                continue
            centers.append(min(region, key=lambda c: (labels[c], c)))
            ring = set()
            for cell in region:
                for off in product(range(-config.g, config.g + 1), repeat=d):
                    nb = tuple(a + o for a, o in zip(cell, off))
                    if nb in domain_cells and nb not in colored and nb not in region:
                        ring.add(nb)
            sub = _fill_proper(region | ring, colored, config.q, rng)
            for cell in region:
                colored[cell] = sub[cell]
            filled += len(region)
        stage_sizes.append(filled)

    assert len(colored) == len(domain_cells)
    shape = tuple(n for _, n in dc.domain)
    colors = np.zeros(shape, dtype=np.int64)
    for cell, c in colored.items():
        colors[_index(dc.domain, cell)] = c
    if not validate_proper_coloring(colors, config.q):
        raise StageFillInfeasible("assembled coloring is not proper")
    return StagedSample(dc.domain, colors, seed, config, tuple(stage_sizes), tuple(centers))


def build_fep_instance(window: LatticeBox, config: FepConfig, phase_seed: int):
    """Net, Voronoi covering and stage coloring for the sampler demo."""
    d = len(window)
    rng = random.Random(phase_seed)
    phase = tuple(rng.randrange(0, config.m + 1) for _ in range(d))
    rc = periodic_range_coloring(d, config.m, phase, window)
    net = greedy_net_completion(rc)
    vc = VoronoiCells(net)
    dc = d_coloring(vc, config.r, config.D)
    return net, vc, dc


# empirical probes backing the recorded constants -----------------------------


def probe_extension_constant(q: int, g: int, trials: int, seed: int,
                             inner: int = 3, outer: int = 3) -> int:
    """Count failures to extend a random proper coloring of an inner box
    plus its g-ring outward by `outer` more rings.  Zero failures across
    many trials is the evidence recorded for the working constant g."""
    rng = random.Random(seed)
    failures = 0
    for _ in range(trials):
        lo, hi = -(inner // 2), inner - inner // 2
        core = {(x, y) for x in range(lo, hi) for y in range(lo, hi)}
        ringed = {
            (x, y)
            for x in range(lo - g, hi + g)
            for y in range(lo - g, hi + g)
        }
        try:
            base = _fill_proper(ringed, {}, q, rng)
        except StageFillInfeasible:
            failures += 1
            continue
        kept = {c: base[c] for c in core}
        target = {
            (x, y)
            for x in range(lo - g - outer, hi + g + outer)
            for y in range(lo - g - outer, hi + g + outer)
            if (x, y) not in core
        }
        try:
            _fill_proper(target, kept, q, rng)
        except StageFillInfeasible:
            failures += 1
    return failures


def probe_si_distance(q: int, k: int, trials: int, seed: int, size: int = 3) -> int:
    """Count failures to join two random proper colorings of size x size
    boxes placed k+1 apart (distance > k)."""
    rng = random.Random(seed)
    failures = 0
    gap = k + 1
    for _ in range(trials):
        left = {(x, y) for x in range(size) for y in range(size)}
        right = {(x + size + gap, y) for x in range(size) for y in range(size)}
        try:
            a = _fill_proper(left, {}, q, rng)
            b = _fill_proper(right, {}, q, rng)
            middle = {
                (x, y)
                for x in range(size, size + gap)
                for y in range(-1, size + 1)
            }
            _fill_proper(middle, {**a, **b}, q, rng)
        except StageFillInfeasible:
            failures += 1
    return failures
