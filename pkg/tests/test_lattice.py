import pytest
from hypothesis import given
from hypothesis import strategies as st

from toricbell.lattice import (
    LatticeError,
    SiteKind,
    SpecialSiteSet,
    TorusLattice,
    complementary_cells,
    near_plaquettes,
    near_vertices,
    partner_site,
    place_special_sites,
    plaquette_neighborhood,
    special_tile_region,
    validate_special_sites,
    vertex_neighborhood,
)


@pytest.mark.parametrize("L", [2, 3, 4, 7])
def test_counts(L):
    lat = TorusLattice(L, 3)
    assert len(lat.sites()) == lat.N == 2 * L * L
    assert len(lat.vertices()) == len(lat.plaquettes()) == L * L
    assert all(s.is_edge for s in lat.sites())
    assert sorted(lat.site_index(s) for s in lat.sites()) == list(range(lat.N))


@pytest.mark.parametrize("L,d", [(1, 3), (3, 2), (3, 9), (3, 4)])
def test_bad_parameters(L, d):
    with pytest.raises(LatticeError):
        TorusLattice(L, d)


@given(st.integers(-50, 50), st.integers(-50, 50))
def test_coordinates_wrap(i, j):
    lat = TorusLattice(3, 3)
    c = lat.coord(i, j)
    assert 0 <= c.i < 6 and 0 <= c.j < 6
    assert c == lat.coord(i + 6, j - 12)


def test_site_index_rejects_non_edges():
    lat = TorusLattice(3, 3)
    with pytest.raises(LatticeError):
        lat.site_index(lat.coord(1, 1))


def test_every_edge_in_two_vertices_and_two_plaquettes():
    lat = TorusLattice(4, 3)
    v_count = {s: 0 for s in lat.sites()}
    p_count = dict(v_count)
    for v in lat.vertices():
        for s, _ in vertex_neighborhood(lat, v):
            v_count[s] += 1
    for p in lat.plaquettes():
        for s, _ in plaquette_neighborhood(lat, p):
            p_count[s] += 1
    assert set(v_count.values()) == {2} and set(p_count.values()) == {2}


def test_each_edge_is_daggered_once_per_kind():
    lat = TorusLattice(3, 3)
    for nb, cells in ((vertex_neighborhood, lat.vertices()), (plaquette_neighborhood, lat.plaquettes())):
        signs = {}
        for c in cells:
            for s, dag in nb(lat, c):
                signs.setdefault(s, []).append(dag)
        assert all(sorted(v) == [False, True] for v in signs.values())


def test_special_site_geometry():
    lat = TorusLattice(4, 3)
    s = lat.coord(3, 2)
    assert s.kind is SiteKind.VERTICAL_EDGE
    below, above = near_vertices(lat, s)
    left, right = near_plaquettes(lat, s)
    part = partner_site(lat, s)
    assert part.kind is SiteKind.HORIZONTAL_EDGE
    assert part in [t for t, _ in vertex_neighborhood(lat, below)]
    assert part in [t for t, _ in plaquette_neighborhood(lat, right)]
    assert s in [t for t, _ in vertex_neighborhood(lat, above)]
    assert s in [t for t, _ in plaquette_neighborhood(lat, left)]
    region = special_tile_region(lat, s)
    assert len(region) == 9
    support = {t for c in (below, above) for t, _ in vertex_neighborhood(lat, c)}
    support |= {t for c in (left, right) for t, _ in plaquette_neighborhood(lat, c)}
    assert support == set(region)


def test_tile_region_degenerate_on_small_torus():
    lat = TorusLattice(2, 3)
    with pytest.raises(LatticeError):
        special_tile_region(lat, lat.coord(1, 0))


def test_validation_rejects_horizontal_and_close_sites():
    lat = TorusLattice(5, 3)
    assert not validate_special_sites(lat, SpecialSiteSet((lat.coord(0, 1),))).separation_ok
    close = SpecialSiteSet((lat.coord(1, 0), lat.coord(1, 2)))
    rep = validate_special_sites(lat, close)
    assert not rep.separation_ok and rep.violations
    dup = SpecialSiteSet((lat.coord(1, 0), lat.coord(1, 0)))
    assert not validate_special_sites(lat, dup).ok


def test_validation_accepts_single_site():
    lat = TorusLattice(3, 3)
    rep = validate_special_sites(lat, SpecialSiteSet((lat.coord(1, 2),)))
    assert rep.ok and rep.separation_ok and rep.connectivity_ok


@pytest.mark.parametrize("L,R", [(3, 1), (4, 2), (6, 4), (10, 1)])
def test_greedy_placement_is_valid(L, R):
    lat = TorusLattice(L, 3)
    special = place_special_sites(lat, R)
    assert special.R == R
    assert validate_special_sites(lat, special).ok
    verts, plaqs = complementary_cells(lat, special)
    assert len(verts) == len(plaqs) == L * L - 2 * R


def test_parse_roundtrip():
    lat = TorusLattice(5, 3)
    special = SpecialSiteSet.parse(lat, "1,0; 5,4")
    assert special.R == 2
    assert SpecialSiteSet.parse(lat, str(special)) == special
    assert SpecialSiteSet.parse(lat, "").R == 0
