"""Unit-modulus Fourier coefficients lambda_k used at special sites."""

from __future__ import annotations

import cmath
from dataclasses import dataclass


def legendre_symbol(k: int, d: int) -> int:
    """+1 if k is a nonzero square mod d, else -1 (Euler's criterion)."""
    if k % d == 0:
        raise ValueError(f"Legendre symbol undefined for k = 0 mod {d}")
    return 1 if pow(k, (d - 1) // 2, d) == 1 else -1


def g(k: int, d: int) -> int:
    if k % 2 == 0:
        if ((k + d + 1) // 2) % 2 == 0:
            return k * (k * k - d * (d + 6) + 3)
        return k * (k * k - d * (d - 6) + 3)
    if k % 4 == 1:
        return k * (k * k + 3) + 2 * d * d * (-5 * k + 3)
    return k * (k * k + 3) + 2 * d * d * (k + 3)


def epsilon(d: int) -> complex:
    return 1 if d % 4 == 1 else 1j


def lam(k: int, d: int) -> complex:
    """lambda_k = [eps_d * (k/d)]^-1 * exp(-2 pi i g(k,d) / (48 d))."""
    if not 1 <= k <= d - 1:
        raise ValueError(f"k must lie in 1..{d - 1}, got {k}")
    pref = 1 / (epsilon(d) * legendre_symbol(k, d))
    return complex(pref * cmath.exp(-2j * cmath.pi * g(k, d) / (48 * d)))


@dataclass(frozen=True)
class LambdaTable:
    d: int
    values: tuple[complex, ...]

    @classmethod
    def build(cls, d: int) -> LambdaTable:
        return cls(d, tuple(lam(k, d) for k in range(1, d)))

    def __getitem__(self, k: int) -> complex:
        k %= self.d
        if k == 0:
            raise KeyError("lambda_0 is undefined")
        return self.values[k - 1]
