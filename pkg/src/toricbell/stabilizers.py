"""Vertex, plaquette and extra stabilizing operators of the Z_d toric code."""

from __future__ import annotations

from .lattice import (
    LatticeError,
    SiteCoord,
    SiteKind,
    TorusLattice,
    near_plaquettes,
    near_vertices,
    plaquette_neighborhood,
    vertex_neighborhood,
)
from .pauli import WeylWord, multiply, power


def vertex_operator(lattice: TorusLattice, v: SiteCoord) -> WeylWord:
    """X-dagger on the two incoming edges, X on the two outgoing edges."""
    d = lattice.d
    ops = {lattice.site_index(s): ((-1 if dag else 1) % d, 0) for s, dag in vertex_neighborhood(lattice, v)}
    return WeylWord.from_sites(lattice.N, d, ops)


def plaquette_operator(lattice: TorusLattice, p: SiteCoord) -> WeylWord:
    d = lattice.d
    ops = {lattice.site_index(s): (0, (-1 if dag else 1) % d) for s, dag in plaquette_neighborhood(lattice, p)}
    return WeylWord.from_sites(lattice.N, d, ops)


def extra_operator(lattice: TorusLattice, s: SiteCoord, x: int) -> WeylWord:
    """``V_below**(1-x) * P_right**x`` for special site s and 2 <= x <= d-1."""
    if s.kind is not SiteKind.VERTICAL_EDGE:
        raise LatticeError(f"{s} is not a vertical edge")
    if not 2 <= x <= lattice.d - 1:
        raise ValueError(f"x must lie in 2..{lattice.d - 1}, got {x}")
    v_below, _ = near_vertices(lattice, s)
    _, p_right = near_plaquettes(lattice, s)
    return multiply(
        power(vertex_operator(lattice, v_below), 1 - x),
        power(plaquette_operator(lattice, p_right), x),
    )


def extra_operator_closed_form(lattice: TorusLattice, s: SiteCoord, x: int) -> WeylWord:
    """Hand-expanded support of the extra operator, used as an independent check."""
    d = lattice.d
    sh = lattice.shift
    idx = lattice.site_index
    ops = {
        idx(sh(s, -1, -1)): (x - 1, 0),
        idx(sh(s, 0, -2)): (x - 1, 0),
        idx(s): (1 - x, x),
        idx(sh(s, 1, -1)): (1 - x, -x),
        idx(sh(s, 1, 1)): (0, x),
        idx(sh(s, 2, 0)): (0, -x),
    }
    return WeylWord.from_sites(lattice.N, d, ops)


def all_vertex_operators(lattice: TorusLattice) -> dict[SiteCoord, WeylWord]:
    return {v: vertex_operator(lattice, v) for v in lattice.vertices()}


def all_plaquette_operators(lattice: TorusLattice) -> dict[SiteCoord, WeylWord]:
    return {p: plaquette_operator(lattice, p) for p in lattice.plaquettes()}


def product(words) -> WeylWord:
    words = list(words)
    acc = words[0]
    for w in words[1:]:
        acc = multiply(acc, w)
    return acc
