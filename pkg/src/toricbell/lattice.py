"""Directed torus geometry on a 2L x 2L coordinate grid.

Every coordinate pair (i, j) mod 2L is one of four kinds, fixed by parity:
vertex (odd, odd), plaquette (even, even), vertical edge (odd, even) and
horizontal edge (even, odd). Qudits live on the two edge kinds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property


def is_prime(n: int) -> bool:
    return n >= 2 and all(n % q for q in range(2, int(n**0.5) + 1))


class SiteKind(enum.Enum):
    VERTICAL_EDGE = "vertical_edge"
    HORIZONTAL_EDGE = "horizontal_edge"
    VERTEX = "vertex"
    PLAQUETTE = "plaquette"


def kind_of(i: int, j: int) -> SiteKind:
    if i % 2 and j % 2:
        return SiteKind.VERTEX
    if not i % 2 and not j % 2:
        return SiteKind.PLAQUETTE
    if i % 2:
        return SiteKind.VERTICAL_EDGE
    return SiteKind.HORIZONTAL_EDGE


@dataclass(frozen=True, order=True)
class SiteCoord:
    i: int
    j: int

    @property
    def kind(self) -> SiteKind:
        return kind_of(self.i, self.j)

    @property
    def is_edge(self) -> bool:
        return self.kind in (SiteKind.VERTICAL_EDGE, SiteKind.HORIZONTAL_EDGE)

    def __str__(self) -> str:
        return f"({self.i},{self.j})"


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class TorusLattice:
    L: int
    d: int

    def __post_init__(self):
        if self.L < 2:
            raise LatticeError(f"L must be >= 2, got {self.L}")
        if self.d < 3 or not is_prime(self.d):
            raise LatticeError(f"d must be an odd prime, got {self.d}")

    @property
    def size(self) -> int:
        """Coordinate period 2L."""
        return 2 * self.L

    @property
    def N(self) -> int:
        return 2 * self.L**2

    def coord(self, i: int, j: int) -> SiteCoord:
        return SiteCoord(i % self.size, j % self.size)

    def shift(self, c: SiteCoord, di: int, dj: int) -> SiteCoord:
        return self.coord(c.i + di, c.j + dj)

    @cached_property
    def _sites(self) -> tuple[SiteCoord, ...]:
        n = self.size
        return tuple(
            SiteCoord(i, j) for i in range(n) for j in range(n) if (i + j) % 2 == 1
        )

    @cached_property
    def _index(self) -> dict[SiteCoord, int]:
        return {s: k for k, s in enumerate(self._sites)}

    def sites(self) -> list[SiteCoord]:
        return list(self._sites)

    def vertices(self) -> list[SiteCoord]:
        n = self.size
        return [SiteCoord(i, j) for i in range(1, n, 2) for j in range(1, n, 2)]

    def plaquettes(self) -> list[SiteCoord]:
        n = self.size
        return [SiteCoord(i, j) for i in range(0, n, 2) for j in range(0, n, 2)]

    def site_index(self, s: SiteCoord) -> int:
        s = self.coord(s.i, s.j)
        try:
            return self._index[s]
        except KeyError:
            raise LatticeError(f"{s} is not an edge site") from None

    def site_at(self, index: int) -> SiteCoord:
        return self._sites[index]

    def parse_coord(self, text: str) -> SiteCoord:
        a, b = text.split(",")
        return self.coord(int(a), int(b))


def _require(c: SiteCoord, kind: SiteKind) -> None:
    if c.kind is not kind:
        raise LatticeError(f"{c} is a {c.kind.value}, expected {kind.value}")


def vertex_neighborhood(lattice: TorusLattice, v: SiteCoord) -> list[tuple[SiteCoord, bool]]:
    """Four edges around vertex v as (site, daggered); edges pointing in are daggered."""
    _require(v, SiteKind.VERTEX)
    sh = lattice.shift
    return [(sh(v, -1, 0), True), (sh(v, 0, -1), True), (sh(v, 0, 1), False), (sh(v, 1, 0), False)]


def plaquette_neighborhood(lattice: TorusLattice, p: SiteCoord) -> list[tuple[SiteCoord, bool]]:
    """Four edges around plaquette p as (site, daggered); anticlockwise edges are daggered."""
    _require(p, SiteKind.PLAQUETTE)
    sh = lattice.shift
    return [(sh(p, -1, 0), False), (sh(p, 0, -1), True), (sh(p, 0, 1), False), (sh(p, 1, 0), True)]


def near_vertices(lattice: TorusLattice, s: SiteCoord) -> tuple[SiteCoord, SiteCoord]:
    """Vertices below and above a vertical special site."""
    return lattice.shift(s, 0, -1), lattice.shift(s, 0, 1)


def near_plaquettes(lattice: TorusLattice, s: SiteCoord) -> tuple[SiteCoord, SiteCoord]:
    """Plaquettes left and right of a vertical special site."""
    return lattice.shift(s, -1, 0), lattice.shift(s, 1, 0)


def partner_site(lattice: TorusLattice, s: SiteCoord) -> SiteCoord:
    """The horizontal edge shared by the lower near vertex and the right near plaquette."""
    return lattice.shift(s, 1, -1)


# offsets (di, dj) of every site touched by the special-site terms
_TILE_OFFSETS = (
    (0, 0), (-1, -1), (-1, 1), (1, -1), (1, 1), (0, -2), (0, 2), (-2, 0), (2, 0),
)


def special_tile_region(lattice: TorusLattice, s: SiteCoord) -> list[SiteCoord]:
    """Union of the supports of the two near vertices, the two near plaquettes
    and the extra operators of special site s (9 distinct sites for L >= 3)."""
    _require(s, SiteKind.VERTICAL_EDGE)
    region = [lattice.shift(s, di, dj) for di, dj in _TILE_OFFSETS]
    if len(set(region)) != len(region):
        raise LatticeError(
            f"special tile around {s} is degenerate on L={lattice.L}: sites coincide under wrap-around"
        )
    return sorted(region)


@dataclass(frozen=True)
class SpecialSiteSet:
    sites: tuple[SiteCoord, ...] = ()

    @property
    def R(self) -> int:
        return len(self.sites)

    @classmethod
    def parse(cls, lattice: TorusLattice, text: str | None) -> SpecialSiteSet:
        if not text:
            return cls(())
        return cls(tuple(lattice.parse_coord(part) for part in text.split(";") if part.strip()))

    def __str__(self) -> str:
        return ";".join(f"{s.i},{s.j}" for s in self.sites)


@dataclass
class PlacementReport:
    ok: bool
    separation_ok: bool
    connectivity_ok: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _terms_touching(lattice: TorusLattice, s: SiteCoord) -> list[SiteCoord]:
    return [*near_vertices(lattice, s), *near_plaquettes(lattice, s)]


def complementary_cells(lattice: TorusLattice, special: SpecialSiteSet) -> tuple[set[SiteCoord], set[SiteCoord]]:
    """Vertices and plaquettes containing no special site."""
    touched = {t for s in special.sites for t in _terms_touching(lattice, s)}
    verts = {v for v in lattice.vertices() if v not in touched}
    plaqs = {p for p in lattice.plaquettes() if p not in touched}
    return verts, plaqs


def cell_neighbors(lattice: TorusLattice, c: SiteCoord) -> list[SiteCoord]:
    """Edge-adjacent cells of the same kind (vertex or plaquette)."""
    sh = lattice.shift
    out = []
    for di, dj in ((-2, 0), (2, 0), (0, -2), (0, 2)):
        n = sh(c, di, dj)
        if n != c and n not in out:
            out.append(n)
    return out


def validate_special_sites(lattice: TorusLattice, special: SpecialSiteSet) -> PlacementReport:
    """Check that no vertex or plaquette term holds two special sites, and that
    every vertex/plaquette free of special sites touches another such cell."""
    violations: list[str] = []
    sep_ok = True
    seen: dict[SiteCoord, SiteCoord] = {}
    for s in special.sites:
        if s.kind is not SiteKind.VERTICAL_EDGE:
            violations.append(f"special site {s} is not on a vertical edge")
            sep_ok = False
            continue
        try:
            special_tile_region(lattice, s)
        except LatticeError as exc:
            violations.append(str(exc))
            sep_ok = False
    if len(set(special.sites)) != special.R:
        violations.append("duplicate special sites")
        sep_ok = False
    if sep_ok:
        for s in special.sites:
            for t in _terms_touching(lattice, s):
                if t in seen:
                    violations.append(f"{t.kind.value} {t} contains special sites {seen[t]} and {s}")
                    sep_ok = False
                seen[t] = s

    conn_ok = True
    if sep_ok:
        verts, plaqs = complementary_cells(lattice, special)
        for cells in (verts, plaqs):
            for c in sorted(cells):
                if not any(n in cells for n in cell_neighbors(lattice, c)):
                    violations.append(f"isolated {c.kind.value} {c} has no free neighbour")
                    conn_ok = False
    else:
        conn_ok = False
    return PlacementReport(sep_ok and conn_ok, sep_ok, conn_ok, violations)


def place_special_sites(lattice: TorusLattice, R: int) -> SpecialSiteSet:
    """Greedy deterministic placement of R special sites passing validation."""
    chosen: list[SiteCoord] = []
    candidates = [s for s in lattice.sites() if s.kind is SiteKind.VERTICAL_EDGE]
    for s in candidates:
        if len(chosen) == R:
            break
        trial = SpecialSiteSet(tuple(chosen + [s]))
        if validate_special_sites(lattice, trial):
            chosen.append(s)
    if len(chosen) < R:
        raise LatticeError(f"could not place {R} special sites on L={lattice.L}")
    return SpecialSiteSet(tuple(chosen))
