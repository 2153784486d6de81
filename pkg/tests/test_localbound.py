import itertools
import math

import numpy as np
import pytest

from toricbell.bellexpr import BETA_STAR_D3, build_expression, local_bound_formulas, quantum_bound
from toricbell.lattice import LatticeError, SpecialSiteSet, TorusLattice, place_special_sites
from toricbell.localbound import (
    BudgetExceeded,
    assemble_extremal_strategy,
    brute_force,
    certified_bounds,
    compile_expression,
    evaluate,
    heuristic_tile_bounds,
    random_search,
    complete_far_terms,
    resolve_workers,
    saturating_strategy,
    saturating_tile_strategy,
    single_term_bounds,
    special_tile_expression,
    tile_boundary_variables,
    tile_reference,
    zero_assignment,
)


def qutrit_expr(L=3, special=((1, 2),)):
    lat = TorusLattice(L, 3)
    return build_expression(lat, SpecialSiteSet(tuple(lat.coord(i, j) for i, j in special)))


def test_batch_matches_scalar_evaluation():
    expr = qutrit_expr()
    ce = compile_expression(expr)
    rng = np.random.default_rng(0)
    E = rng.integers(0, 3, size=(50, ce.n_vars))
    batch = ce.evaluate_batch(E)
    for row, val in zip(E, batch):
        a = {v: int(e) for v, e in zip(ce.variables, row)}
        assert abs(evaluate(expr, a) - val) < 1e-9


def test_unmerged_compilation_agrees():
    expr = qutrit_expr()
    merged, raw = compile_expression(expr), compile_expression(expr, merge_conjugates=False)
    E = np.random.default_rng(3).integers(0, 3, size=(20, merged.n_vars))
    np.testing.assert_allclose(merged.evaluate_batch(E), raw.evaluate_batch(E), atol=1e-9)


def test_zero_assignment_value():
    expr = qutrit_expr(L=3, special=())
    assert evaluate(expr, zero_assignment(expr)) == pytest.approx(2 * 18)


def test_missing_variable_raises():
    expr = qutrit_expr()
    with pytest.raises(KeyError):
        evaluate(expr, {})


def test_single_term_bounds():
    assert single_term_bounds(3) == pytest.approx((2.0, -1.0))
    hi, lo = single_term_bounds(5)
    assert hi == 2.0 and lo == pytest.approx(2 * math.cos(4 * math.pi / 5))


def test_brute_force_matches_enumeration():
    lat = TorusLattice(2, 3)
    expr = build_expression(lat, SpecialSiteSet()).restrict(["V(1,1)", "P(0,0)", "V(3,1)"])
    free = expr.variables()[:7]
    tb = brute_force(expr, free_vars=free, inner_max=27)
    values = []
    for combo in itertools.product(range(3), repeat=len(free)):
        a = zero_assignment(expr)
        a.update(dict(zip(free, combo)))
        values.append(evaluate(expr, a))
    assert tb.beta_max == pytest.approx(max(values), abs=1e-12)
    assert tb.beta_min == pytest.approx(min(values), abs=1e-12)
    assert len(tb.argmax) == sum(abs(v - max(values)) < 1e-9 for v in values)
    for w in tb.argmin:
        assert evaluate(expr, {**zero_assignment(expr), **w}) == pytest.approx(tb.beta_min)


def test_brute_force_respects_fixed_and_budget():
    expr = qutrit_expr()
    vars_ = expr.variables()
    tb = brute_force(expr, free_vars=vars_[:4], fixed={vars_[5]: 2})
    for w in tb.argmax:
        assert w[vars_[5]] == 2
    with pytest.raises(BudgetExceeded):
        brute_force(expr, budget=1000)


def test_resolve_workers(monkeypatch):
    monkeypatch.setenv("BELL_THREADS", "3")
    assert resolve_workers(None) == 3
    assert resolve_workers(2) == 2
    monkeypatch.delenv("BELL_THREADS")
    assert resolve_workers(None) == 1


def test_tile_structure():
    lat = TorusLattice(3, 3)
    s = lat.coord(1, 2)
    tile = special_tile_expression(lat, s)
    assert len(tile.variables()) == 2 * 3 + 10
    assert len(tile_boundary_variables(lat, s)) == 12


def test_tile_reference_values():
    ref = tile_reference(3)
    assert ref.bounds.beta_max == pytest.approx(BETA_STAR_D3, abs=1e-9)
    assert ref.bounds.beta_min == pytest.approx(-BETA_STAR_D3, abs=1e-9)
    assert certified_bounds(200, 3, 1) == pytest.approx(local_bound_formulas(200, 3, 1, BETA_STAR_D3, -BETA_STAR_D3))


@pytest.mark.parametrize("L,R", [(3, 1), (4, 1), (4, 2), (6, 3)])
def test_assembled_strategies_reach_bounds(L, R):
    lat = TorusLattice(L, 3)
    special = place_special_sites(lat, R)
    expr = build_expression(lat, special)
    hi, lo = local_bound_formulas(lat.N, 3, R, BETA_STAR_D3, -BETA_STAR_D3)
    assert evaluate(expr, assemble_extremal_strategy(lat, special, "max")) == pytest.approx(hi, abs=1e-9)
    assert evaluate(expr, assemble_extremal_strategy(lat, special, "min")) == pytest.approx(lo, abs=1e-9)


def test_assembly_rejects_other_dimensions_and_bad_direction():
    lat = TorusLattice(3, 5)
    with pytest.raises(ValueError):
        assemble_extremal_strategy(lat, SpecialSiteSet(), "max")
    lat3 = TorusLattice(3, 3)
    with pytest.raises(ValueError):
        assemble_extremal_strategy(lat3, SpecialSiteSet(), "up")
    with pytest.raises(LatticeError):
        assemble_extremal_strategy(lat3, SpecialSiteSet((lat3.coord(0, 1),)), "max")


def test_random_search_is_seeded_and_bounded():
    expr = qutrit_expr()
    a = random_search(expr, 5000, seed=7)
    b = random_search(expr, 5000, seed=7)
    assert (a.best_max, a.best_min) == (b.best_max, b.best_min)
    hi, lo = local_bound_formulas(18, 3, 1, BETA_STAR_D3, -BETA_STAR_D3)
    assert lo - 1e-9 <= a.best_min and a.best_max <= hi + 1e-9
    assert evaluate(expr, a.argmax) == pytest.approx(a.best_max)


def test_heuristic_tile_bounds_are_inner_estimates():
    tb = heuristic_tile_bounds(3, 2000, seed=0, local_moves=5)
    assert not tb.certified
    assert tb.beta_max <= BETA_STAR_D3 + 1e-9 and tb.beta_min >= -BETA_STAR_D3 - 1e-9


@pytest.mark.parametrize("d,L,R", [(5, 4, 1), (7, 4, 1), (11, 4, 1), (5, 6, 2), (7, 8, 3), (5, 10, 5)])
def test_local_strategies_reach_quantum_value_above_qutrits(d, L, R):
    lat = TorusLattice(L, d)
    special = place_special_sites(lat, R)
    strat = saturating_strategy(lat, special)
    assert strat is not None
    assert evaluate(build_expression(lat, special), strat) == pytest.approx(quantum_bound(lat.N, d, R), abs=1e-9)


def test_no_saturating_tile_for_qutrits():
    assert saturating_tile_strategy(3, attempts=50) is None
    tile = saturating_tile_strategy(5)
    lat = TorusLattice(3, 5)
    assert evaluate(special_tile_expression(lat, lat.coord(1, 2)), tile) == pytest.approx(20.0, abs=1e-9)


def test_far_term_completion():
    lat = TorusLattice(4, 3)
    expr = build_expression(lat, SpecialSiteSet())
    v = expr.variables()[0]
    full = complete_far_terms(expr, {v: 2})
    assert full[v] == 2
    assert evaluate(expr, full) == pytest.approx(2 * lat.N)
