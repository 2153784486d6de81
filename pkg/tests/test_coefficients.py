import cmath

import numpy as np
import pytest

from toricbell.coefficients import LambdaTable, lam, legendre_symbol

PRIMES = [3, 5, 7, 11]


@pytest.mark.parametrize("d", PRIMES + [13, 17])
def test_legendre_against_squares(d):
    squares = {k * k % d for k in range(1, d)}
    for k in range(1, d):
        assert legendre_symbol(k, d) == (1 if k in squares else -1)
    with pytest.raises(ValueError):
        legendre_symbol(d, d)


@pytest.mark.parametrize("d", PRIMES)
def test_unit_modulus_and_conjugation(d):
    for k in range(1, d):
        assert abs(abs(lam(k, d)) - 1) < 1e-12
        assert abs(lam(k, d).conjugate() - lam(d - k, d)) < 1e-12


def test_qutrit_values():
    # worked by hand: eps_3 = i, g(1,3) = -32, g(2,3) = 32
    assert abs(lam(1, 3) - cmath.exp(-1j * np.pi / 18)) < 1e-14
    assert abs(lam(2, 3) - cmath.exp(1j * np.pi / 18)) < 1e-14


@pytest.mark.parametrize("d", PRIMES)
def test_quadratic_gauss_sum_modulus(d):
    w = cmath.exp(2j * np.pi / d)
    for k in range(1, d):
        s = sum(w ** (k * y * (y + 1) % d) for y in range(d))
        assert abs(abs(s) - np.sqrt(d)) < 1e-12


def test_table_indexing():
    t = LambdaTable.build(5)
    assert t[1] == lam(1, 5) and t[6] == lam(1, 5) and t[-1] == lam(4, 5)
    with pytest.raises(KeyError):
        t[0]
    with pytest.raises(ValueError):
        lam(0, 5)
