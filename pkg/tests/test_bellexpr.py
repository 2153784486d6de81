import cmath
import math
from collections import defaultdict

import numpy as np
import pytest

from toricbell.bellexpr import (
    BETA_STAR_D3,
    BellExpression,
    build_expression,
    conjugate_term,
    local_bound_formulas,
    quantum_bound,
    ratio,
    ratio_d3,
    single_term_min,
)
from toricbell.coefficients import lam
from toricbell.lattice import LatticeError, SpecialSiteSet, TorusLattice
from toricbell.localbound import evaluate


def transcribed(L: int, d: int, specials: list[tuple[int, int]]) -> dict:
    """Expanded expression written out term by term from the explicit formulas,
    keyed by sorted (i, j, x, k) factor tuples, including complex conjugates."""
    n = 2 * L
    w = cmath.exp(2j * math.pi / d)
    rt = math.sqrt(d)
    out = defaultdict(complex)

    def add(coeff, factors):
        key = tuple(sorted(((i % n, j % n, x % d, k % d) for i, j, x, k in factors)))
        out[key] += coeff

    near_v = {((i) % n, (j + dj) % n) for i, j in specials for dj in (-1, 1)}
    near_p = {((i + di) % n, j % n) for i, j in specials for di in (-1, 1)}
    for i in range(1, n, 2):
        for j in range(1, n, 2):
            if (i, j) not in near_v:
                add(1, [(i - 1, j, 0, d - 1), (i, j - 1, 0, d - 1), (i, j + 1, 0, 1), (i + 1, j, 0, 1)])
    for i in range(0, n, 2):
        for j in range(0, n, 2):
            if (i, j) not in near_p:
                add(1, [(i - 1, j, 1, 1), (i, j - 1, 1, d - 1), (i, j + 1, 1, 1), (i + 1, j, 1, d - 1)])
    for i, j in specials:
        for y in range(d):
            add(1 / (rt * lam(1, d)),
                [(i - 1, j - 1, 0, d - 1), (i, j - 2, 0, d - 1), (i, j, y, 1), (i + 1, j - 1, 0, 1)])
            add(1 / (rt * lam(d - 1, d)),
                [(i - 1, j + 1, 0, d - 1), (i, j, y, d - 1), (i, j + 2, 0, 1), (i + 1, j + 1, 0, 1)])
            add(w ** (-2 * (d - 1)) / (rt * lam(d - 1, d)) * w ** (-(d - 1) * y),
                [(i - 2, j, 1, 1), (i - 1, j - 1, 1, d - 1), (i - 1, j + 1, 1, 1), (i, j, y, d - 1)])
            add(w ** -2 / (rt * lam(1, d)) * w ** -y,
                [(i, j, y, 1), (i + 1, j - 1, 1, d - 1), (i + 1, j + 1, 1, 1), (i + 2, j, 1, d - 1)])
            for x in range(2, d):
                add(2 * w ** (-x * (x + 1)) / (rt * lam(1, d)) * w ** (-x * y),
                    [(i - 1, j - 1, 0, x - 1), (i, j - 2, 0, x - 1), (i, j, y, 1),
                     (i + 1, j - 1, x, 1), (i + 1, j + 1, 1, x), (i + 2, j, 1, d - x)])
    for key, c in list(out.items()):
        conj = tuple(sorted((i, j, x, (d - k) % d) for i, j, x, k in key))
        out[conj] += c.conjugate()
    return out


def collected(expr: BellExpression) -> dict:
    out = defaultdict(complex)
    for t in expr.terms:
        out[tuple(sorted((f.site.i, f.site.j, f.x, f.k) for f in t.factors))] += t.coeff
    return out


def assert_same(a: dict, b: dict):
    keys = {k for k in a.keys() | b.keys() if abs(a.get(k, 0)) > 1e-12 or abs(b.get(k, 0)) > 1e-12}
    for k in keys:
        assert abs(a.get(k, 0) - b.get(k, 0)) < 1e-12, k


@pytest.mark.parametrize("L,d,specials", [
    (3, 3, [(1, 2)]),
    (3, 3, []),
    (4, 5, [(1, 0)]),
    (5, 3, [(1, 0), (5, 4)]),
    (5, 7, [(3, 4)]),
])
def test_matches_transcribed_expression(L, d, specials):
    lat = TorusLattice(L, d)
    special = SpecialSiteSet(tuple(lat.coord(i, j) for i, j in specials))
    assert_same(collected(build_expression(lat, special)), transcribed(L, d, specials))


def test_generator_phases_vanish():
    lat = TorusLattice(4, 5)
    expr = build_expression(lat, SpecialSiteSet((lat.coord(3, 4),)))
    assert all(g.phase == 0 for g in expr.generators)
    assert sum(g.weight for g in expr.generators) == lat.N + 2 * (5 - 2)


def test_counts_qutrit():
    lat = TorusLattice(3, 3)
    expr = build_expression(lat, SpecialSiteSet((lat.coord(1, 2),)))
    assert len(expr.terms) == 58
    assert len(expr.variables()) == 38
    assert len(build_expression(TorusLattice(2, 3), SpecialSiteSet()).terms) == 16


def test_closed_under_conjugation_and_real():
    lat = TorusLattice(3, 5)
    expr = build_expression(lat, SpecialSiteSet((lat.coord(1, 2),)))
    keys = {(t.factors, round(t.coeff.real, 9), round(t.coeff.imag, 9)) for t in expr.terms}
    for t in expr.terms:
        c = conjugate_term(t, 5)
        assert (c.factors, round(c.coeff.real, 9), round(c.coeff.imag, 9)) in keys
    rng = np.random.default_rng(1)
    for _ in range(5):
        a = {v: int(rng.integers(5)) for v in expr.variables()}
        assert math.isfinite(evaluate(expr, a))


def test_invalid_placement_rejected():
    lat = TorusLattice(5, 3)
    with pytest.raises(LatticeError):
        build_expression(lat, SpecialSiteSet((lat.coord(1, 0), lat.coord(1, 2))))


def test_json_roundtrip():
    lat = TorusLattice(3, 3)
    expr = build_expression(lat, SpecialSiteSet((lat.coord(1, 2),)))
    back = BellExpression.from_json(expr.to_json())
    assert back.to_json() == expr.to_json()
    assert [t.factors for t in back.terms] == [t.factors for t in expr.terms]


def test_restrict_keeps_labelled_terms():
    lat = TorusLattice(3, 3)
    expr = build_expression(lat, SpecialSiteSet((lat.coord(1, 2),)))
    sub = expr.restrict(["E(1,2)x2"])
    assert len(sub.terms) == 6 and len(sub.generators) == 1


def test_bound_formulas():
    assert quantum_bound(200, 3, 1) == 404
    assert quantum_bound(18, 5, 2) == 18 * 2 + 12 * 2
    assert single_term_min(3) == pytest.approx(-1)
    assert single_term_min(5) == pytest.approx(2 * math.cos(4 * math.pi / 5))
    bmax, bmin = local_bound_formulas(200, 3, 1, BETA_STAR_D3, -BETA_STAR_D3)
    assert bmax == pytest.approx(2 * 200 - 8 + 12 * math.cos(math.pi / 9), abs=1e-12)
    assert bmin == pytest.approx(-200 + 4 - 12 * math.cos(math.pi / 9), abs=1e-12)


@pytest.mark.parametrize("R", range(0, 30))
def test_ratio_closed_form(R):
    assert abs(ratio(200, 3, R, BETA_STAR_D3) - ratio_d3(200, R)) < 1e-12


def test_ratio_rejects_nonpositive_denominator():
    with pytest.raises(ValueError):
        ratio(8, 3, 10, 0.0)
