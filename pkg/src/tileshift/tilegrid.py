"""Finite windows of box tilings, ribbon tilings and graph-homomorphism
configurations, with validation and the closed-boundary extension.

Cells are unit squares of Z^2 named by their lower-left corner.  A grid
pattern stores, per covered cell, the tile index and the cell's offset
inside its tile instance; tiles may cross the window boundary (the offsets
near the edge then point at cells outside the window).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product

from .boxcalc import TileSet, frobenius_threshold, representable_1d


class OverlapError(ValueError):
    pass


class GcdConditionError(ValueError):
    """gcd(V_h) = gcd(H_v) = 1 fails for some side length."""


class WindowTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class Window:
    """Axis-aligned box of cells [x0, x0+w) x [y0, y0+h)."""

    x0: int
    y0: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 0 or self.h < 0:
            raise ValueError("window sides must be >= 0")

    @property
    def x1(self) -> int:
        return self.x0 + self.w - 1

    @property
    def y1(self) -> int:
        return self.y0 + self.h - 1

    @property
    def area(self) -> int:
        return self.w * self.h

    def contains(self, cell) -> bool:
        x, y = cell
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def cells(self):
        for y in range(self.y0, self.y0 + self.h):
            for x in range(self.x0, self.x0 + self.w):
                yield (x, y)

    def grow(self, n: int) -> "Window":
        return Window(self.x0 - n, self.y0 - n, self.w + 2 * n, self.h + 2 * n)

    def shrink(self, n: int) -> "Window":
        return Window(self.x0 + n, self.y0 + n, self.w - 2 * n, self.h - 2 * n)


@dataclass(frozen=True)
class GridPattern:
    window: Window
    tileset: TileSet
    cells: dict = field(default_factory=dict)  # (x, y) -> (tile, dx, dy)

    def instance_at(self, cell):
        """(tile index, anchor) of the instance covering the cell, or None."""
        code = self.cells.get(cell)
        if code is None:
            return None
        t, dx, dy = code
        return t, (cell[0] - dx, cell[1] - dy)

    def instances(self) -> list[tuple[int, tuple[int, int]]]:
        """Distinct tile instances, sorted by anchor."""
        return sorted({self.instance_at(c) for c in self.cells}, key=lambda p: (p[1], p[0]))

    def fully_covered(self) -> bool:
        return len(self.cells) == self.window.area

    def closed_boundary(self) -> bool:
        """True iff no instance crosses the window's boundary edges."""
        for t, (ax, ay) in self.instances():
            w, h = self.tileset.tiles[t]
            if ax < self.window.x0 or ay < self.window.y0:
                return False
            if ax + w - 1 > self.window.x1 or ay + h - 1 > self.window.y1:
                return False
        return True

    def to_text(self) -> str:
        rows = []
        for y in range(self.window.y1, self.window.y0 - 1, -1):
            row = []
            for x in range(self.window.x0, self.window.x0 + self.window.w):
                code = self.cells.get((x, y))
                row.append("." if code is None else "%d:%d,%d" % code)
            rows.append(" ".join(row))
        return "\n".join(rows)

    def to_json(self) -> str:
        return json.dumps(
            {
                "window": [self.window.x0, self.window.y0, self.window.w, self.window.h],
                "tileset": json.loads(self.tileset.to_json()),
                "cells": sorted([x, y, t, dx, dy] for (x, y), (t, dx, dy) in self.cells.items()),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "GridPattern":
        data = json.loads(text)
        ts = TileSet(data["tileset"]["dim"], tuple(tuple(t) for t in data["tileset"]["tiles"]))
        cells = {(x, y): (t, dx, dy) for x, y, t, dx, dy in data["cells"]}
        return cls(Window(*data["window"]), ts, cells)


@dataclass(frozen=True)
class TilingWindow:
    pattern: GridPattern
    closed_boundary: bool

    @classmethod
    def of(cls, pattern: GridPattern) -> "TilingWindow":
        return cls(pattern, pattern.fully_covered() and pattern.closed_boundary())


def validate_grid(p: GridPattern) -> bool:
    """Local consistency: offsets in range and instance continuations agree
    wherever the neighbouring cell lies inside the window."""
    tiles = p.tileset.tiles
    win = p.window
    for (x, y), (t, dx, dy) in p.cells.items():
        if not win.contains((x, y)):
            return False
        if not 0 <= t < len(tiles):
            return False
        w, h = tiles[t]
        if not (0 <= dx < w and 0 <= dy < h):
            return False
        if dx + 1 < w and win.contains((x + 1, y)) and p.cells.get((x + 1, y)) != (t, dx + 1, dy):
            return False
        if dx > 0 and win.contains((x - 1, y)) and p.cells.get((x - 1, y)) != (t, dx - 1, dy):
            return False
        if dy + 1 < h and win.contains((x, y + 1)) and p.cells.get((x, y + 1)) != (t, dx, dy + 1):
            return False
        if dy > 0 and win.contains((x, y - 1)) and p.cells.get((x, y - 1)) != (t, dx, dy - 1):
            return False
    return True


def grid_from_placements(ts: TileSet, window: Window, placements) -> GridPattern:
    """Build a pattern from (tile index, anchor) pairs.

    Placements may cross the window; cells outside are dropped.  Overlaps
    raise, including overlaps outside the window.
    """
    cells = {}
    outside = set()
    for t, (ax, ay) in placements:
        w, h = ts.tiles[t]
        for dx in range(w):
            for dy in range(h):
                cell = (ax + dx, ay + dy)
                if window.contains(cell):
                    if cell in cells:
                        raise OverlapError(f"cell {cell} covered twice")
                    cells[cell] = (t, dx, dy)
                else:
                    if cell in outside:
                        raise OverlapError(f"cell {cell} covered twice (outside window)")
                    outside.add(cell)
    return GridPattern(window, ts, cells)


def restrict_pattern(p: GridPattern, sub: Window) -> GridPattern:
    cells = {c: code for c, code in p.cells.items() if sub.contains(c)}
    return GridPattern(sub, p.tileset, cells)


def check_extension_gcds(ts: TileSet) -> None:
    for h, vs in sorted(ts.V_h.items()):
        if math.gcd(*vs) != 1:
            raise GcdConditionError(f"vertical lengths over width {h} have gcd {math.gcd(*vs)}")
    for v, hs in sorted(ts.H_v.items()):
        if math.gcd(*hs) != 1:
            raise GcdConditionError(f"horizontal lengths over height {v} have gcd {math.gcd(*hs)}")


def extension_margin(ts: TileSet) -> int:
    """Margin N: Frobenius threshold of the side-length tables plus the
    largest tile diameter."""
    check_extension_gcds(ts)
    n0 = 1
    for vs in ts.V_h.values():
        n0 = max(n0, frobenius_threshold(vs))
    for hs in ts.H_v.values():
        n0 = max(n0, frobenius_threshold(hs))
    diam = max(max(w, h) - 1 for w, h in ts.tiles)
    return n0 + diam


class _Board:
    """Mutable placement state used while extending a pattern."""

    def __init__(self, ts: TileSet):
        self.ts = ts
        self.by_shape = {}
        for i, shape in enumerate(ts.tiles):
            self.by_shape.setdefault(shape, i)
        self.instances: list[tuple[int, int, int]] = []  # (tile, ax, ay)
        self.owner: dict[tuple[int, int], int] = {}

    def place(self, t: int, ax: int, ay: int) -> None:
        iid = len(self.instances)
        self.instances.append((t, ax, ay))
        w, h = self.ts.tiles[t]
        for x in range(ax, ax + w):
            for y in range(ay, ay + h):
                if (x, y) in self.owner:
                    raise OverlapError(f"extension collision at {(x, y)}")
                self.owner[(x, y)] = iid

    def ids_on_row(self, y: int, x_lo: int, x_hi: int) -> list[int]:
        out, seen = [], set()
        for x in range(x_lo, x_hi + 1):
            iid = self.owner.get((x, y))
            if iid is not None and iid not in seen:
                seen.add(iid)
                out.append(iid)
        return out

    def ids_on_col(self, x: int, y_lo: int, y_hi: int) -> list[int]:
        out, seen = [], set()
        for y in range(y_lo, y_hi + 1):
            iid = self.owner.get((x, y))
            if iid is not None and iid not in seen:
                seen.add(iid)
                out.append(iid)
        return out


def _parts(values: frozenset[int], span: int) -> list[int]:
    counts = representable_1d(values, span)
    if counts is None:
        raise AssertionError(f"internal: {span} not representable over {sorted(values)}")
    out = []
    for s in sorted(counts):
        out.extend([s] * counts[s])
    return out


def extend_closed_boundary(a: GridPattern, ts: TileSet) -> GridPattern:
    """Extend a fully covered pattern on a box F to a tiling of the
    N-envelope of F with a closed boundary, preserving the input.

    Cut tiles are completed first; then each boundary-facing instance gets a
    pile of matching-width (or -height) tiles out to the envelope face, in
    the order top, left, bottom, right.  An empty input pattern yields a
    fresh stripe tiling of the envelope.
    """
    N = extension_margin(ts)
    F = a.window
    G = F.grow(N)

    if not a.cells:
        return grid_from_placements(ts, G, tile_rectangle(ts, G))

    if not validate_grid(a):
        raise ValueError("input pattern is not locally consistent")
    if not a.fully_covered():
        raise ValueError("input pattern must cover its window")

    board = _Board(ts)
    for t, (ax, ay) in a.instances():
        board.place(t, ax, ay)  # full footprint: completes cut tiles

    # top
    for iid in board.ids_on_row(F.y1, F.x0, F.x1):
        t, ax, ay = board.instances[iid]
        w, h = ts.tiles[t]
        span = (F.y1 + N + 1) - (ay + h)
        y = ay + h
        for part in _parts(ts.V_h[w], span):
            board.place(board.by_shape[(w, part)], ax, y)
            y += part
    # left
    for iid in board.ids_on_col(F.x0, F.y0, F.y1 + N):
        t, ax, ay = board.instances[iid]
        w, h = ts.tiles[t]
        span = ax - (F.x0 - N)
        x = ax
        for part in _parts(ts.H_v[h], span):
            x -= part
            board.place(board.by_shape[(part, h)], x, ay)
    # bottom
    for iid in board.ids_on_row(F.y0, F.x0 - N, F.x1):
        t, ax, ay = board.instances[iid]
        w, h = ts.tiles[t]
        span = ay - (F.y0 - N)
        y = ay
        for part in _parts(ts.V_h[w], span):
            y -= part
            board.place(board.by_shape[(w, part)], ax, y)
    # right
    for iid in board.ids_on_col(F.x1, F.y0 - N, F.y1 + N):
        t, ax, ay = board.instances[iid]
        w, h = ts.tiles[t]
        span = (F.x1 + N + 1) - (ax + w)
        x = ax + w
        for part in _parts(ts.H_v[h], span):
            board.place(board.by_shape[(part, h)], x, ay)
            x += part

    out = grid_from_placements(ts, G, [(t, (ax, ay)) for t, ax, ay in board.instances])
    if not out.fully_covered() or not out.closed_boundary():
        raise AssertionError("internal: extension did not close the envelope")
    for cell, code in a.cells.items():
        if out.cells.get(cell) != code:
            raise AssertionError("internal: extension modified the input pattern")
    return out


def tile_rectangle(ts: TileSet, window: Window, rng=None) -> list[tuple[int, tuple[int, int]]]:
    """Tile a window by horizontal stripes: stripe heights are drawn from
    V_h of one horizontal length, each stripe is filled by tiles of exactly
    that height.  Requires both sides at or above the Frobenius thresholds.
    """
    check_extension_gcds(ts)
    h_star = min(ts.H)
    heights = representable_1d(ts.V_h[h_star], window.h)
    if heights is None:
        raise WindowTooSmall(f"height {window.h} not decomposable over V_{h_star}")
    hs = []
    for s in sorted(heights):
        hs.extend([s] * heights[s])
    if rng is not None:
        rng.shuffle(hs)
    by_shape = {}
    for i, shape in enumerate(ts.tiles):
        by_shape.setdefault(shape, i)
    placements = []
    y = window.y0
    for stripe_h in hs:
        widths = representable_1d(ts.H_v[stripe_h], window.w)
        if widths is None:
            raise WindowTooSmall(f"width {window.w} not decomposable over H_{stripe_h}")
        ws = []
        for s in sorted(widths):
            ws.extend([s] * widths[s])
        if rng is not None:
            rng.shuffle(ws)
        x = window.x0
        for stripe_w in ws:
            placements.append((by_shape[(stripe_w, stripe_h)], (x, y)))
            x += stripe_w
        y += stripe_h
    return placements


def random_box_tiling(ts: TileSet, window: Window, rng, node_budget: int = 200000) -> GridPattern:
    """A random exact tiling of the window (no boundary crossings), found by
    randomized first-empty-cell backtracking."""
    order = sorted(window.cells(), key=lambda c: (c[1], c[0]))
    cells: dict = {}
    placements: list = []
    nodes = 0

    def fits(t, ax, ay):
        w, h = ts.tiles[t]
        if ax + w - 1 > window.x1 or ay + h - 1 > window.y1:
            return None
        footprint = [(ax + dx, ay + dy) for dx in range(w) for dy in range(h)]
        if any(c in cells for c in footprint):
            return None
        return footprint

    def solve(pos):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise RecursionError("node budget exhausted")
        while pos < len(order) and order[pos] in cells:
            pos += 1
        if pos == len(order):
            return True
        ax, ay = order[pos]
        choices = list(range(len(ts.tiles)))
        rng.shuffle(choices)
        for t in choices:
            footprint = fits(t, ax, ay)
            if footprint is None:
                continue
            w, h = ts.tiles[t]
            for dx in range(w):
                for dy in range(h):
                    cells[(ax + dx, ay + dy)] = (t, dx, dy)
            placements.append((t, (ax, ay)))
            if solve(pos + 1):
                return True
            placements.pop()
            for c in footprint:
                del cells[c]
        return False

    if not solve(0):
        raise WindowTooSmall(f"no exact tiling of {window} by {ts.tiles}")
    return GridPattern(window, ts, cells)


# ---------------------------------------------------------------------------
# ribbon tilings


@dataclass(frozen=True)
class RibbonTiling:
    """Order-n staircase tiles; each placement is (lowest square, R/U path)."""

    order: int
    placements: tuple[tuple[tuple[int, int], str], ...]

    def to_json(self) -> str:
        return json.dumps(
            {"order": self.order,
             "placements": [[list(a), s] for a, s in self.placements]}
        )

    @classmethod
    def from_json(cls, text: str) -> "RibbonTiling":
        data = json.loads(text)
        return cls(data["order"], tuple((tuple(a), s) for a, s in data["placements"]))


def ribbon_cells(anchor, steps: str) -> list[tuple[int, int]]:
    x, y = anchor
    out = [(x, y)]
    for s in steps:
        if s == "R":
            x += 1
        elif s == "U":
            y += 1
        else:
            raise ValueError(f"bad ribbon step {s!r}")
        out.append((x, y))
    return out


def validate_ribbon(r: RibbonTiling, window: Window) -> bool:
    """Tiles are disjoint, step strings are R/U of length n-1, and the
    window is covered exactly (tiles may stick out of it)."""
    seen: dict = {}
    for anchor, steps in r.placements:
        if len(steps) != r.order - 1 or any(s not in "RU" for s in steps):
            return False
        for cell in ribbon_cells(anchor, steps):
            if cell in seen:
                return False
            seen[cell] = True
    return all(c in seen for c in window.cells())


def ribbon_color(cell, n: int) -> int:
    return (cell[0] + cell[1]) % n


def ribbon_type(anchor, n: int) -> int:
    """j for a tile of type (j, j+1): the lowest square has color j+1."""
    return (ribbon_color(anchor, n) - 1) % n


def random_ribbon_tiling(n: int, window: Window, rng, node_budget: int = 500000) -> RibbonTiling:
    """Random exact ribbon tiling of the window by backtracking; the first
    empty cell in raster order is always the next tile's lowest square."""
    order = sorted(window.cells(), key=lambda c: (c[1], c[0]))
    covered: set = set()
    placements: list = []
    paths = ["".join(p) for p in product("RU", repeat=n - 1)]
    nodes = 0

    def solve(pos):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise RecursionError("node budget exhausted")
        while pos < len(order) and order[pos] in covered:
            pos += 1
        if pos == len(order):
            return True
        anchor = order[pos]
        options = paths[:]
        rng.shuffle(options)
        for steps in options:
            cs = ribbon_cells(anchor, steps)
            if any(not window.contains(c) or c in covered for c in cs):
                continue
            covered.update(cs)
            placements.append((anchor, steps))
            if solve(pos + 1):
                return True
            placements.pop()
            covered.difference_update(cs)
        return False

    if not solve(0):
        raise WindowTooSmall(f"no ribbon tiling of order {n} on {window}")
    return RibbonTiling(n, tuple(placements))


# ---------------------------------------------------------------------------
# graph homomorphisms


@dataclass(frozen=True)
class Graph:
    vertices: tuple
    edges: frozenset  # of frozensets {u, v}

    @classmethod
    def of(cls, vertices, edge_pairs) -> "Graph":
        vertices = tuple(vertices)
        vset = set(vertices)
        edges = set()
        for u, v in edge_pairs:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if u not in vset or v not in vset:
                raise ValueError(f"edge ({u}, {v}) uses an unknown vertex")
            edges.add(frozenset((u, v)))
        return cls(vertices, frozenset(edges))

    def adjacent(self, u, v) -> bool:
        return frozenset((u, v)) in self.edges

    def neighbors(self, u):
        return sorted(v for v in self.vertices if self.adjacent(u, v))


def complete_graph(q: int) -> Graph:
    return Graph.of(range(q), [(i, j) for i in range(q) for j in range(i + 1, q)])


def path_graph(q: int) -> Graph:
    return Graph.of(range(q), [(i, i + 1) for i in range(q - 1)])


def four_cycle_free(H: Graph) -> bool:
    """No non-backtracking 4-cycle, i.e. no two vertices share two
    distinct common neighbours."""
    verts = list(H.vertices)
    for i, u in enumerate(verts):
        for w in verts[i + 1:]:
            common = sum(1 for z in verts if H.adjacent(u, z) and H.adjacent(w, z))
            if common >= 2:
                return False
    return True


HomWindow = tuple  # ((start, size), ...) per axis


def hom_window_cells(window: HomWindow):
    return product(*(range(s, s + n) for s, n in window))


@dataclass(frozen=True)
class HomConfig:
    graph: Graph
    window: HomWindow
    assignment: dict  # cell tuple -> vertex


def validate_hom(c: HomConfig) -> bool:
    d = len(c.window)
    for cell in hom_window_cells(c.window):
        u = c.assignment.get(cell)
        if u is None or u not in c.graph.vertices:
            return False
        for i in range(d):
            nb = tuple(cell[j] + (1 if j == i else 0) for j in range(d))
            if nb[i] < c.window[i][0] + c.window[i][1]:
                if not c.graph.adjacent(u, c.assignment.get(nb)):
                    return False
    return True


def random_hom(H: Graph, window: HomWindow, rng, node_budget: int = 500000) -> HomConfig:
    """Random graph homomorphism from a lattice window into H, by
    backtracking in raster order."""
    cells = sorted(hom_window_cells(window), key=lambda c: tuple(reversed(c)))
    d = len(window)
    assignment: dict = {}
    nodes = 0

    def solve(pos):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise RecursionError("node budget exhausted")
        if pos == len(cells):
            return True
        cell = cells[pos]
        options = [
            u for u in H.vertices
            if all(
                assignment.get(tuple(cell[j] - (1 if j == i else 0) for j in range(d))) is None
                or H.adjacent(u, assignment[tuple(cell[j] - (1 if j == i else 0) for j in range(d))])
                for i in range(d)
            )
        ]
        rng.shuffle(options)
        for u in options:
            assignment[cell] = u
            if solve(pos + 1):
                return True
            del assignment[cell]
        return False

    if not solve(0):
        raise ValueError(f"no homomorphism from {window} into the graph")
    return HomConfig(H, window, assignment)
