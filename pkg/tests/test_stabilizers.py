import itertools

import numpy as np
import pytest

from toricbell.lattice import TorusLattice, vertex_neighborhood
from toricbell.pauli import commutation_phase, to_dense
from toricbell.stabilizers import (
    all_plaquette_operators,
    all_vertex_operators,
    extra_operator,
    extra_operator_closed_form,
    plaquette_operator,
    product,
    vertex_operator,
)


@pytest.mark.parametrize("L", [2, 3, 4])
@pytest.mark.parametrize("d", [3, 5])
def test_generators_commute(L, d):
    lat = TorusLattice(L, d)
    gens = [*all_vertex_operators(lat).values(), *all_plaquette_operators(lat).values()]
    assert all(commutation_phase(a, b) == 0 for a, b in itertools.combinations(gens, 2))


@pytest.mark.parametrize("L", [2, 3, 4])
@pytest.mark.parametrize("d", [3, 5])
def test_global_products_are_identity(L, d):
    lat = TorusLattice(L, d)
    assert product(all_vertex_operators(lat).values()).is_identity()
    assert product(all_plaquette_operators(lat).values()).is_identity()


def test_vertex_and_plaquette_weights():
    lat = TorusLattice(3, 5)
    for v in lat.vertices():
        w = vertex_operator(lat, v)
        assert len(w.support()) == 4 and not w.z.any() and w.phase == 0
    for p in lat.plaquettes():
        w = plaquette_operator(lat, p)
        assert len(w.support()) == 4 and not w.x.any() and w.phase == 0


@pytest.mark.parametrize("d", [3, 5, 7])
def test_extra_operator_matches_closed_form(d):
    lat = TorusLattice(4, d)
    s = lat.coord(3, 4)
    for x in range(2, d):
        assert extra_operator(lat, s, x) == extra_operator_closed_form(lat, s, x)


def test_extra_operator_commutes_with_everything():
    lat = TorusLattice(3, 5)
    s = lat.coord(1, 2)
    gens = [*all_vertex_operators(lat).values(), *all_plaquette_operators(lat).values()]
    for x in range(2, 5):
        e = extra_operator(lat, s, x)
        assert all(commutation_phase(e, g) == 0 for g in gens)


def test_extra_operator_rejects_bad_input():
    lat = TorusLattice(3, 5)
    with pytest.raises(ValueError):
        extra_operator(lat, lat.coord(1, 2), 1)
    with pytest.raises(ValueError):
        extra_operator(lat, lat.coord(0, 1), 2)


def test_vertex_operator_dense():
    lat = TorusLattice(2, 3)
    v = lat.vertices()[0]
    w = vertex_operator(lat, v)
    sites = w.support()
    X = np.roll(np.eye(3), 1, axis=0)
    mats = {lat.site_index(s): (X.T if dag else X) for s, dag in vertex_neighborhood(lat, v)}
    expected = np.ones((1, 1))
    for s in sites:
        expected = np.kron(expected, mats[s])
    np.testing.assert_allclose(to_dense(w, sites), expected, atol=1e-14)
