"""Cocycle evaluation on explicit finite configurations.

Three evaluators: the bar-tiling cocycle valued in <h, v | h^m, v^n>, the
ribbon height vector in Z^n summed along on-tiling paths, and the free-group
cocycle of graph homomorphisms.  Plus the checkable structure results:
path independence, modulo classes, syllable-slope bounds, slope estimates,
quasimorphism fitting and bounded-deviation-from-homomorphism search.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .grouplib import (
    AbelianImage,
    GroupWord,
    enumerate_ball,
    free_group,
    invert,
    multiply,
    syllable_metric,
    tiling_group,
    word_length,
)
from .tilegrid import Graph, GridPattern, HomConfig, RibbonTiling, Window, four_cycle_free

STEPS = {"R": (1, 0), "L": (-1, 0), "U": (0, 1), "D": (0, -1)}


class PathExitsWindow(ValueError):
    pass


class NoOnTilingPath(ValueError):
    pass


class FourCycleError(ValueError):
    pass


@dataclass(frozen=True)
class LatticePath:
    start: tuple[int, int]
    steps: str  # over R, L, U, D

    def __post_init__(self):
        if any(s not in STEPS for s in self.steps):
            raise ValueError(f"bad step in {self.steps!r}")

    def points(self):
        x, y = self.start
        yield (x, y)
        for s in self.steps:
            dx, dy = STEPS[s]
            x += dx
            y += dy
            yield (x, y)

    @property
    def end(self):
        x, y = self.start
        for s in self.steps:
            x += STEPS[s][0]
            y += STEPS[s][1]
        return (x, y)


def straight_steps(v: tuple[int, int]) -> str:
    a, b = v
    return ("R" * a if a >= 0 else "L" * -a) + ("U" * b if b >= 0 else "D" * -b)


# ---------------------------------------------------------------------------
# bar-tiling cocycle


def _bar_roles(p: GridPattern):
    """Identify the m x 1 and 1 x n tiles; returns (h index, m, v index, n)."""
    tiles = p.tileset.tiles
    if len(tiles) != 2:
        raise ValueError("bar cocycle needs a tile set of exactly two bars")
    hor = [i for i, (w, h) in enumerate(tiles) if h == 1 and w > 1]
    ver = [i for i, (w, h) in enumerate(tiles) if w == 1 and h > 1]
    if len(hor) != 1 or len(ver) != 1:
        raise ValueError(f"tiles {tiles} are not an {{m x 1, 1 x n}} pair with m, n > 1")
    return hor[0], tiles[hor[0]][0], ver[0], tiles[ver[0]][1]


def _full_cell_map(p: GridPattern) -> dict:
    """Cell codes over the full footprints of all instances, so that cells
    of boundary-crossing tiles just outside the window resolve too."""
    out = {}
    for t, (ax, ay) in p.instances():
        w, h = p.tileset.tiles[t]
        for dx in range(w):
            for dy in range(h):
                out[(ax + dx, ay + dy)] = (t, dx, dy)
    return out


def eval_box_cocycle(x: GridPattern, path: LatticePath) -> GroupWord:
    """Product of edge labels along the path, in <h, v | h^m, v^n>.

    A horizontal unit edge on a tile boundary reads h; crossing a vertical
    bar at height k above its base it reads v^-k h v^k.  Vertical edges
    read v, conjugated by powers of h inside a horizontal bar.  The labels
    multiply to e around every unit square of a valid tiling, so the value
    depends only on the endpoints.
    """
    hi, m, vi, n = _bar_roles(x)
    pres = tiling_group(m, n)
    h_gen, v_gen = pres.generator(0), pres.generator(1)
    cells = _full_cell_map(x)

    def horizontal_weight(a, b):  # edge (a,b) -> (a+1,b)
        above = cells.get((a, b))
        if above is not None:
            t, _, dy = above
            k = dy if t == vi else 0
            return multiply(multiply(v_gen ** (-k), h_gen), v_gen ** k)
        below = cells.get((a, b - 1))
        if below is not None:
            t, _, dy = below
            k = (dy + 1) % n if t == vi else 0
            return multiply(multiply(v_gen ** (-k), h_gen), v_gen ** k)
        raise PathExitsWindow(f"edge at {(a, b)} has no adjacent tile data")

    def vertical_weight(a, b):  # edge (a,b) -> (a,b+1)
        right = cells.get((a, b))
        if right is not None:
            t, dx, _ = right
            k = dx if t == hi else 0
            return multiply(multiply(h_gen ** (-k), v_gen), h_gen ** k)
        left = cells.get((a - 1, b))
        if left is not None:
            t, dx, _ = left
            k = (dx + 1) % m if t == hi else 0
            return multiply(multiply(h_gen ** (-k), v_gen), h_gen ** k)
        raise PathExitsWindow(f"edge at {(a, b)} has no adjacent tile data")

    value = pres.identity()
    px, py = path.start
    for s in path.steps:
        if s == "R":
            value = multiply(value, horizontal_weight(px, py))
            px += 1
        elif s == "L":
            value = multiply(value, invert(horizontal_weight(px - 1, py)))
            px -= 1
        elif s == "U":
            value = multiply(value, vertical_weight(px, py))
            py += 1
        else:
            value = multiply(value, invert(vertical_weight(px, py - 1)))
            py -= 1
    return value


def random_lattice_path(start, end, window: Window, rng, wander: float = 0.35,
                        max_len: int = 10000) -> LatticePath:
    """A random path from start to end through lattice points of the window
    (points range over [x0, x1+1] x [y0, y1+1])."""
    for _ in range(50):
        x, y = start
        steps = []
        while (x, y) != end and len(steps) < max_len:
            options = []
            if x < end[0]:
                options.append("R")
            if x > end[0]:
                options.append("L")
            if y < end[1]:
                options.append("U")
            if y > end[1]:
                options.append("D")
            if rng.random() < wander:
                options = [s for s in "RLUD"
                           if window.x0 <= x + STEPS[s][0] <= window.x1 + 1
                           and window.y0 <= y + STEPS[s][1] <= window.y1 + 1]
            s = rng.choice(options)
            nx, ny = x + STEPS[s][0], y + STEPS[s][1]
            if not (window.x0 <= nx <= window.x1 + 1 and window.y0 <= ny <= window.y1 + 1):
                continue
            steps.append(s)
            x, y = nx, ny
        if (x, y) == end:
            return LatticePath(start, "".join(steps))
    raise RuntimeError("could not produce a random path (window too tight?)")


def check_path_independence(x: GridPattern, p, trials: int, seed: int,
                            start=None, evaluator=None) -> bool:
    """Evaluate `trials` random paths from start to p; True iff all values
    agree exactly."""
    rng = _rng(seed)
    if start is None:
        start = (x.window.x0, x.window.y0)
    ev = evaluator or eval_box_cocycle
    reference = None
    for _ in range(trials):
        path = random_lattice_path(start, tuple(p), x.window, rng)
        value = ev(x, path)
        if reference is None:
            reference = value
        elif value != reference:
            return False
    return True


def _rng(seed):
    import random

    return random.Random(seed)


def modulo_class(v, m: int, n: int) -> AbelianImage:
    """(a mod m, b mod n): the image of any bar-tiling cocycle value at v."""
    a, b = v
    return AbelianImage(tiling_group(m, n), (a % m, b % n))


def syllable_slope(x: GridPattern, direction: int, r: int, start=None) -> int:
    """Syllable count of the cocycle along r unit steps in direction 1 or 2;
    bounded by 2r + 1."""
    if start is None:
        start = (x.window.x0, x.window.y0)
    step = "R" if direction == 1 else "U"
    end = (start[0] + r, start[1]) if direction == 1 else (start[0], start[1] + r)
    if not (x.window.x0 <= end[0] <= x.window.x1 + 1
            and x.window.y0 <= end[1] <= x.window.y1 + 1):
        raise PathExitsWindow(f"window too small for r = {r}")
    return syllable_metric(eval_box_cocycle(x, LatticePath(tuple(start), step * r)))


# ---------------------------------------------------------------------------
# ribbon cocycle


@dataclass(frozen=True)
class RibbonVector:
    """Element of Z^n; coordinate i is the weight on edge type (i, i+1)."""

    coords: tuple[int, ...]

    def __add__(self, other):
        return RibbonVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return RibbonVector(tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-other)

    def l1(self) -> int:
        return sum(abs(a) for a in self.coords)

    def total(self) -> int:
        return sum(self.coords)

    def project(self, i: int) -> int:
        return self.coords[i]


def _ribbon_zero(n):
    return RibbonVector((0,) * n)


def _ribbon_basis(n, i, sign=1):
    return RibbonVector(tuple(sign if j == i % n else 0 for j in range(n)))


def step_weight(point, step: str, n: int) -> RibbonVector:
    """Weight of a directed unit step: +e_{i,i+1} when the square of color
    i+1 lies to the left of the traversed type-(i, i+1) edge."""
    a, b = point
    if step == "R":
        return _ribbon_basis(n, a + b - 1)
    if step == "L":
        return _ribbon_basis(n, a + b - 2, -1)
    if step == "U":
        return _ribbon_basis(n, a + b - 1, -1)
    if step == "D":
        return _ribbon_basis(n, a + b - 2)
    raise ValueError(f"bad step {step!r}")


def _ribbon_square_map(x: RibbonTiling) -> dict:
    from .tilegrid import ribbon_cells

    out = {}
    for idx, (anchor, steps) in enumerate(x.placements):
        for cell in ribbon_cells(anchor, steps):
            out[cell] = idx
    return out


def _edge_on_tiling(square_map, sq1, sq2) -> bool:
    """The edge between two flanking squares lies on a tile boundary iff the
    squares belong to different tiles (unknown squares count as outside)."""
    t1 = square_map.get(sq1)
    t2 = square_map.get(sq2)
    if t1 is None and t2 is None:
        return False  # cannot certify either way; unusable for paths
    return t1 != t2


def ribbon_value_between(x: RibbonTiling, window: Window, u, w) -> RibbonVector:
    """Sum of edge weights along an on-tiling path from u to w inside the
    window's point grid; raises when no such path exists."""
    n = x.order
    square_map = _ribbon_square_map(x)
    u, w = tuple(u), tuple(w)

    def in_points(p):
        return window.x0 <= p[0] <= window.x1 + 1 and window.y0 <= p[1] <= window.y1 + 1

    if not in_points(u) or not in_points(w):
        raise PathExitsWindow(f"{u} or {w} outside the window point grid")

    flank = {
        "R": lambda a, b: ((a, b), (a, b - 1)),
        "L": lambda a, b: ((a - 1, b), (a - 1, b - 1)),
        "U": lambda a, b: ((a - 1, b), (a, b)),
        "D": lambda a, b: ((a - 1, b - 1), (a, b - 1)),
    }
    values = {u: _ribbon_zero(n)}
    queue = deque([u])
    while queue:
        p = queue.popleft()
        if p == w:
            return values[p]
        for s in "RLUD":
            q = (p[0] + STEPS[s][0], p[1] + STEPS[s][1])
            if not in_points(q) or q in values:
                continue
            sq1, sq2 = flank[s](*p)
            if not _edge_on_tiling(square_map, sq1, sq2):
                continue
            values[q] = values[p] + step_weight(p, s, n)
            queue.append(q)
    raise NoOnTilingPath(f"no on-tiling path from {u} to {w} in the window")


def eval_ribbon_cocycle(x: RibbonTiling, window: Window, w) -> RibbonVector:
    """Height at w relative to the origin (0, 0), along on-tiling paths."""
    return ribbon_value_between(x, window, (0, 0), w)


# ---------------------------------------------------------------------------
# homomorphism cocycle


def hom_edge_group(H: Graph):
    """Free group with one generator per undirected edge of H; the reverse
    edge is the inverse generator."""
    order = {v: i for i, v in enumerate(H.vertices)}
    edges = sorted(
        (tuple(sorted(e, key=order.get)) for e in H.edges),
        key=lambda e: (order[e[0]], order[e[1]]),
    )
    labels = tuple(f"{u}-{v}" for u, v in edges)
    pres = free_group(labels)
    index = {e: i for i, e in enumerate(edges)}
    return pres, index, order


def eval_hom_cocycle(x: HomConfig, path) -> GroupWord:
    """Product of edge generators read off along the path.

    Requires a four-cycle-free target graph (the cocycle then lives in the
    free group on the edges, with no quotient)."""
    if not four_cycle_free(x.graph):
        raise FourCycleError("target graph has a non-backtracking 4-cycle")
    pres, index, order = hom_edge_group(x.graph)

    if isinstance(path, LatticePath):
        start = path.start
        vecs = [STEPS[s] for s in path.steps]
    else:
        start, vecs = path

    value = pres.identity()
    cur = tuple(start)
    for step in vecs:
        nxt = tuple(c + s for c, s in zip(cur, step))
        a = x.assignment.get(cur)
        b = x.assignment.get(nxt)
        if a is None or b is None:
            raise PathExitsWindow(f"path leaves the assigned window at {nxt}")
        key = tuple(sorted((a, b), key=order.get))
        exp = 1 if key == (a, b) else -1
        value = multiply(value, pres.generator(index[key], exp))
        cur = nxt
    return value


# ---------------------------------------------------------------------------
# structure checks


@dataclass(frozen=True)
class SlopeEstimate:
    max_ratio: Fraction
    final_ratio: Fraction


def slope_estimate(evaluator, x, v, n_max: int, length=word_length) -> SlopeEstimate:
    """max over n <= n_max of |c(x, n v)| / (n |v|_1), together with the
    ratio at n_max."""
    norm = sum(abs(c) for c in v)
    if norm == 0 or n_max < 1:
        raise ValueError("need a nonzero direction and n_max >= 1")
    best = Fraction(0)
    final = Fraction(0)
    for k in range(1, n_max + 1):
        point = tuple(k * c for c in v)
        ratio = Fraction(length(evaluator(x, point)), k * norm)
        best = max(best, ratio)
        final = ratio
    return SlopeEstimate(best, final)


class QuasimorphismHypothesisError(ValueError):
    def __init__(self, v, w, slack):
        super().__init__(f"| |b_v - b_w| - |phi(v - w)| | = {slack} at {v}, {w}")
        self.witness = (v, w)


@dataclass(frozen=True)
class HomomorphismFit:
    signs: tuple[int, ...]
    theta: tuple[int, ...]  # theta(e_i) = signs[i] * phi[i]
    deviation: int
    bound: int

    def theta_at(self, v) -> int:
        return sum(t * c for t, c in zip(self.theta, v))


def quasimorphism_fit(b: dict, phi, K) -> HomomorphismFit:
    """Fit signed-coordinate homomorphism theta to b with |b - theta| <= 2Kd.

    b maps window points to integers with b(0) = 0; phi gives the values
    phi(e_i).  The near-isometry hypothesis is verified on all point pairs
    first and a violation is reported with its witnessing pair.
    """
    phi = tuple(phi)
    d = len(phi)
    points = sorted(b)
    origin = (0,) * d
    if b.get(origin) != 0:
        raise ValueError("b must contain the origin with value 0")
    nz = [abs(p) for p in phi if p != 0]
    if nz and not K < min(nz) / 4:
        raise ValueError(f"need K < {min(nz)}/4")

    def phi_at(v):
        return sum(p * c for p, c in zip(phi, v))

    for i, v in enumerate(points):
        for w in points[i + 1:]:
            diff = tuple(a - c for a, c in zip(v, w))
            slack = abs(abs(b[v] - b[w]) - abs(phi_at(diff)))
            if slack > K:
                raise QuasimorphismHypothesisError(v, w, slack)

    best = None
    for signs in product((1, -1), repeat=d):
        if any(s == -1 and phi[i] == 0 for i, s in enumerate(signs)):
            continue  # canonical +1 on vanishing coordinates
        theta = tuple(s * p for s, p in zip(signs, phi))
        dev = max(abs(b[v] - sum(t * c for t, c in zip(theta, v))) for v in points)
        if best is None or dev < best[0]:
            best = (dev, signs, theta)
    dev, signs, theta = best
    if dev > 2 * K * d:
        raise AssertionError("internal: certified bound exceeded despite hypothesis")
    return HomomorphismFit(signs, theta, dev, 2 * K * d)


class BallBoundExceeded(ValueError):
    pass


def deviation_check(evaluator, samples, theta, C: int, max_ball: int = 300000) -> bool:
    """True iff every sample value c(x, v) equals h1 * theta(v) * h2 for
    some h1, h2 of length at most C (exhaustive ball search)."""
    first_value = evaluator(*samples[0])
    pres = first_value.presentation
    ball = enumerate_ball(pres, C)
    if len(ball) > max_ball:
        raise BallBoundExceeded(f"ball of radius {C} has {len(ball)} elements")
    for x, v in samples:
        c = evaluator(x, v)
        t_inv = invert(theta(v))
        ok = False
        for h1 in ball:
            h2 = multiply(multiply(t_inv, invert(h1)), c)
            if word_length(h2) <= C:
                ok = True
                break
        if not ok:
            return False
    return True
