"""Decomposition of connected polyominoes into five elementary tiles, and
minimizing qutrit strategies for those tiles on the torus.

The decomposition repeatedly removes a star around the parent of a deepest
leaf of a BFS spanning tree. Because the leaf is deepest, every child of its
parent is a leaf, so the removed set is the parent together with all of its
leaf tree-neighbours: a domino, a 3-line, an L, a T or a plus. Every
remaining component keeps at least two cells.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np

from .lattice import SiteCoord, SiteKind, TorusLattice, plaquette_neighborhood, vertex_neighborhood

Cell = tuple[int, int]

_BASE_SHAPES: dict[str, tuple[Cell, ...]] = {
    "Domino2": ((0, 0), (1, 0)),
    "Straight3": ((0, 0), (1, 0), (2, 0)),
    "L3": ((0, 0), (1, 0), (0, 1)),
    "T4": ((0, 0), (1, 0), (2, 0), (1, 1)),
    "Plus5": ((1, 0), (0, 1), (1, 1), (2, 1), (1, 2)),
}
SHAPES = tuple(_BASE_SHAPES)
_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _normalize(cells) -> frozenset[Cell]:
    a0 = min(c[0] for c in cells)
    b0 = min(c[1] for c in cells)
    return frozenset((a - a0, b - b0) for a, b in cells)


_SYMMETRIES = [
    lambda a, b: (a, b), lambda a, b: (-b, a), lambda a, b: (-a, -b), lambda a, b: (b, -a),
    lambda a, b: (-a, b), lambda a, b: (b, a), lambda a, b: (a, -b), lambda a, b: (-b, -a),
]

# normalized cell set -> (shape, orientation index)
_SHAPE_TABLE: dict[frozenset[Cell], tuple[str, int]] = {}
for _name, _cells in _BASE_SHAPES.items():
    for _o, _f in enumerate(_SYMMETRIES):
        _SHAPE_TABLE.setdefault(_normalize([_f(*c) for c in _cells]), (_name, _o))


@dataclass(frozen=True)
class Polyomino:
    """Finite cell set; with ``period`` set, cells live on a period x period torus."""

    cells: frozenset[Cell]
    period: int | None = None

    @classmethod
    def of(cls, cells, period: int | None = None) -> Polyomino:
        if period:
            cells = ((a % period, b % period) for a, b in cells)
        return cls(frozenset(cells), period)

    def __len__(self) -> int:
        return len(self.cells)

    def neighbors(self, c: Cell) -> list[Cell]:
        out = []
        for da, db in _STEPS:
            n = (c[0] + da, c[1] + db)
            if self.period:
                n = (n[0] % self.period, n[1] % self.period)
            if n in self.cells and n != c and n not in out:
                out.append(n)
        return out

    def components(self) -> list[Polyomino]:
        seen: set[Cell] = set()
        comps = []
        for start in sorted(self.cells):
            if start in seen:
                continue
            comp = {start}
            queue = deque([start])
            while queue:
                c = queue.popleft()
                for n in self.neighbors(c):
                    if n not in comp:
                        comp.add(n)
                        queue.append(n)
            seen |= comp
            comps.append(Polyomino(frozenset(comp), self.period))
        return comps

    def is_connected(self) -> bool:
        return len(self.cells) > 0 and len(self.components()) == 1


@dataclass(frozen=True)
class ElementaryTile:
    shape: str
    cells: tuple[Cell, ...]
    anchor: Cell
    orientation: int

    def __len__(self) -> int:
        return len(self.cells)


class DecompositionError(ValueError):
    pass


def _offset(a: int, b: int, period: int | None) -> int:
    diff = b - a
    if period:
        diff %= period
        if diff > period // 2:
            diff -= period
    return diff


def classify_shape(cells, period: int | None = None) -> tuple[str, int] | None:
    """Shape name and orientation of a placed cell set, or None if not elementary."""
    cells = list(cells)
    if len(set(cells)) != len(cells):
        return None
    ref = min(cells)
    rel = [(_offset(ref[0], c[0], period), _offset(ref[1], c[1], period)) for c in cells]
    if len(set(rel)) != len(rel):
        return None
    return _SHAPE_TABLE.get(_normalize(rel))


def make_tile(cells, period: int | None = None) -> ElementaryTile:
    cells = tuple(sorted(cells))
    found = classify_shape(cells, period)
    if found is None:
        raise DecompositionError(f"cells {cells} do not form an elementary tile")
    return ElementaryTile(found[0], cells, cells[0], found[1])


def _bfs_tree(p: Polyomino) -> tuple[Cell, dict[Cell, Cell | None], dict[Cell, int]]:
    root = min(p.cells)
    parent: dict[Cell, Cell | None] = {root: None}
    depth = {root: 0}
    queue = deque([root])
    while queue:
        c = queue.popleft()
        for n in sorted(p.neighbors(c)):
            if n not in parent:
                parent[n] = c
                depth[n] = depth[c] + 1
                queue.append(n)
    return root, parent, depth


def _remove_one(p: Polyomino) -> tuple[frozenset[Cell], list[Polyomino]]:
    _, parent, depth = _bfs_tree(p)
    tree_nbrs: dict[Cell, set[Cell]] = {c: set() for c in p.cells}
    for c, par in parent.items():
        if par is not None:
            tree_nbrs[c].add(par)
            tree_nbrs[par].add(c)
    leaves = [c for c in p.cells if len(tree_nbrs[c]) == 1]
    v1 = min(leaves, key=lambda c: (-depth[c], c))
    v2 = parent[v1]
    if v2 is None:
        raise DecompositionError("spanning tree has a single vertex")
    star = {v2} | {n for n in tree_nbrs[v2] if len(tree_nbrs[n]) == 1}
    rest = Polyomino(p.cells - star, p.period)
    return frozenset(star), rest.components() if rest.cells else []


def decompose(p: Polyomino) -> list[ElementaryTile]:
    if len(p) < 2:
        raise DecompositionError("polyomino must have at least two cells")
    if not p.is_connected():
        raise DecompositionError("polyomino is not connected")
    tiles = []
    stack = [p]
    while stack:
        q = stack.pop()
        star, parts = _remove_one(q)
        tiles.append(make_tile(star, p.period))
        for part in parts:
            if len(part) < 2:
                raise DecompositionError(f"removal left a singleton {sorted(part.cells)}")
            stack.append(part)
    tiles.sort(key=lambda t: t.cells)
    return tiles


@dataclass
class DecompositionReport:
    ok: bool
    errors: list[str]

    def __bool__(self) -> bool:
        return self.ok


def validate_decomposition(p: Polyomino, tiles: list[ElementaryTile]) -> DecompositionReport:
    errors = []
    covered: dict[Cell, int] = {}
    for n, t in enumerate(tiles):
        found = classify_shape(t.cells, p.period)
        if found is None:
            errors.append(f"tile {n} {t.cells} is not an elementary shape")
        elif found[0] != t.shape:
            errors.append(f"tile {n} labelled {t.shape} but is {found[0]}")
        if not Polyomino(frozenset(t.cells), p.period).is_connected():
            errors.append(f"tile {n} is not connected")
        for c in t.cells:
            if c in covered:
                errors.append(f"cell {c} covered by tiles {covered[c]} and {n}")
            covered[c] = n
            if c not in p.cells:
                errors.append(f"cell {c} of tile {n} lies outside the polyomino")
    for c in sorted(p.cells - set(covered)):
        errors.append(f"cell {c} is not covered")
    return DecompositionReport(not errors, errors)


def random_polyomino(size: int, rng: np.random.Generator) -> Polyomino:
    """Grow a connected polyomino by attaching random boundary cells."""
    cells = {(0, 0)}
    frontier = [(0, 0)]
    while len(cells) < size:
        base = frontier[rng.integers(len(frontier))]
        da, db = _STEPS[rng.integers(4)]
        n = (base[0] + da, base[1] + db)
        if n not in cells:
            cells.add(n)
            frontier.append(n)
    return Polyomino(frozenset(cells))


# minimizing strategies (qutrit only)


def cell_site(cell: Cell, kind: SiteKind, lattice: TorusLattice) -> SiteCoord:
    """Centre of a sublattice cell: plaquette (2a, 2b) or vertex (2a+1, 2b+1)."""
    off = 1 if kind is SiteKind.VERTEX else 0
    return lattice.coord(2 * cell[0] + off, 2 * cell[1] + off)


def site_cell(c: SiteCoord) -> Cell:
    return (c.i // 2, c.j // 2)


def cell_term(cell: Cell, kind: SiteKind, lattice: TorusLattice) -> list[tuple[SiteCoord, int]]:
    """(site, exponent sign) pairs of a far vertex or plaquette term, k = 1 copy."""
    centre = cell_site(cell, kind, lattice)
    nb = vertex_neighborhood if kind is SiteKind.VERTEX else plaquette_neighborhood
    return [(s, -1 if dag else 1) for s, dag in nb(lattice, centre)]


def tile_interior_sites(cells, kind: SiteKind, lattice: TorusLattice) -> list[SiteCoord]:
    """Sites whose two incident cells of this kind both lie in the tile."""
    cellset = {site_cell(cell_site(c, kind, lattice)) for c in cells}
    count: dict[SiteCoord, int] = {}
    for c in cellset:
        for s, _ in cell_term(c, kind, lattice):
            count[s] = count.get(s, 0) + 1
    return sorted(s for s, n in count.items() if n >= 2)


def tile_value(cells, kind: SiteKind, lattice: TorusLattice, values: dict[SiteCoord, int]) -> float:
    """Sum of term + c.c. over the tile's cells; unassigned sites count as exponent 0."""
    d = lattice.d
    total = 0.0
    for c in {site_cell(cell_site(c, kind, lattice)) for c in cells}:
        e = sum(sign * values.get(s, 0) for s, sign in cell_term(c, kind, lattice))
        total += 2 * np.cos(2 * np.pi * e / d)
    return float(total)


def min_tile_strategy(tile: ElementaryTile, lattice: TorusLattice | None = None,
                      kind: SiteKind = SiteKind.PLAQUETTE, d: int = 3) -> dict[SiteCoord, int]:
    """Exponents for the tile's interior sites reaching value -|t| with every
    other site at exponent 0. Found by exhaustive search; raises if none exists."""
    if d != 3:
        raise ValueError("minimizing tile strategies are only established for d = 3")
    if lattice is None:
        span = max(max(a for a, _ in tile.cells) - min(a for a, _ in tile.cells),
                   max(b for _, b in tile.cells) - min(b for _, b in tile.cells))
        lattice = TorusLattice(span + 3, d)
    if lattice.d != 3:
        raise ValueError("minimizing tile strategies are only established for d = 3")
    interior = tile_interior_sites(tile.cells, kind, lattice)
    target = -float(len(tile))
    best = None
    for combo in itertools.product(range(d), repeat=len(interior)):
        vals = dict(zip(interior, combo))
        v = tile_value(tile.cells, kind, lattice, vals)
        if abs(v - target) < 1e-9:
            best = vals
            break
    if best is None:
        raise DecompositionError(f"no minimizing strategy of value {target} for {tile.shape} {tile.cells}")
    return best
