"""Generalized Pauli (Weyl) strings over Z_d with exact phase tracking.

A word is ``omega**phase * prod_s X_s**x[s] Z_s**z[s]`` with every X factor
to the left of the Z factor on the same site, and ``omega = exp(2 pi i / d)``.
With the clock/shift convention ``Z X = omega X Z`` this normal form is unique,
so words can be compared for equality directly.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence

import numpy as np

MAX_DENSE_DIM = 3**8


def omega(d: int) -> complex:
    return complex(np.exp(2j * np.pi / d))


class WeylWord:
    """Immutable multi-site Weyl word with phase exponent in Z_d."""

    __slots__ = ("d", "x", "z", "phase")

    def __init__(self, x, z, phase: int, d: int):
        x = np.asarray(x, dtype=np.int64) % d
        z = np.asarray(z, dtype=np.int64) % d
        if x.shape != z.shape or x.ndim != 1:
            raise ValueError("x and z exponent vectors must be 1-d and equal length")
        x.flags.writeable = False
        z.flags.writeable = False
        object.__setattr__(self, "d", int(d))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phase", int(phase) % d)

    def __setattr__(self, name, value):
        raise AttributeError("WeylWord is immutable")

    # construction helpers

    @classmethod
    def identity(cls, n: int, d: int) -> WeylWord:
        return cls(np.zeros(n, np.int64), np.zeros(n, np.int64), 0, d)

    @classmethod
    def from_sites(
        cls, n: int, d: int, ops: Mapping[int, tuple[int, int]], phase: int = 0
    ) -> WeylWord:
        """Build from ``{site_index: (x_exp, z_exp)}``; unlisted sites are identity."""
        x = np.zeros(n, np.int64)
        z = np.zeros(n, np.int64)
        for s, (a, b) in ops.items():
            x[s] = a
            z[s] = b
        return cls(x, z, phase, d)

    @classmethod
    def symmetric(cls, a: int, b: int, d: int) -> WeylWord:
        """Single-site symmetric Weyl operator ``omega**(a*b/2) X**a Z**b``.

        These satisfy ``D(a, b)**k == D(k a, k b)`` exactly, which the
        plain normal-ordered ``X**a Z**b`` does not.
        """
        half = (d + 1) // 2
        return cls([a], [b], a * b * half, d)

    # algebra

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def _check(self, other: WeylWord) -> None:
        if other.d != self.d:
            raise ValueError(f"dimension mismatch: {self.d} vs {other.d}")
        if other.n != self.n:
            raise ValueError(f"site count mismatch: {self.n} vs {other.n}")

    def __mul__(self, other: WeylWord) -> WeylWord:
        return multiply(self, other)

    def __pow__(self, n: int) -> WeylWord:
        return power(self, n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeylWord):
            return NotImplemented
        return (
            self.d == other.d
            and self.phase == other.phase
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def __hash__(self) -> int:
        return hash((self.d, self.phase, self.x.tobytes(), self.z.tobytes()))

    def is_identity(self, ignore_phase: bool = False) -> bool:
        if not ignore_phase and self.phase:
            return False
        return not self.x.any() and not self.z.any()

    def support(self) -> list[int]:
        return np.flatnonzero((self.x != 0) | (self.z != 0)).tolist()

    def vector(self) -> np.ndarray:
        """Symplectic vector ``(x | z)`` of length 2n."""
        return np.concatenate([self.x, self.z])

    def with_phase(self, phase: int) -> WeylWord:
        return WeylWord(self.x, self.z, phase, self.d)

    def restrict(self, sites: Sequence[int]) -> WeylWord:
        """Word on the listed sites only (phase kept)."""
        idx = np.asarray(sites, dtype=np.int64)
        return WeylWord(self.x[idx], self.z[idx], self.phase, self.d)

    def __repr__(self) -> str:
        return f"WeylWord({self})"

    def __str__(self) -> str:
        parts = [f"ω^{self.phase}"]
        for s in self.support():
            a, b = int(self.x[s]), int(self.z[s])
            f = ""
            if a:
                f += f"X{s}^{a}"
            if b:
                f += f"Z{s}^{b}"
            parts.append(f)
        if len(parts) == 1:
            parts.append("I")
        return " · ".join(parts)


def multiply(a: WeylWord, b: WeylWord) -> WeylWord:
    """Product ``a b`` reduced to normal form.

    Moving each Z of ``a`` right past the X of ``b`` on the same site costs
    ``omega**(a.z * b.x)``.
    """
    a._check(b)
    extra = int(np.dot(a.z, b.x))
    return WeylWord(a.x + b.x, a.z + b.z, a.phase + b.phase + extra, a.d)


def power(w: WeylWord, n: int) -> WeylWord:
    """``w**n`` for any integer n (negative powers included).

    For odd d every word has order d, so n is first reduced mod d.
    """
    d = w.d
    n %= d
    # (X^a Z^b)^n = omega^(a b n (n-1)/2) X^(na) Z^(nb)
    tri = n * (n - 1) // 2
    ph = w.phase * n + tri * int(np.dot(w.x, w.z))
    return WeylWord(w.x * n, w.z * n, ph, d)


def dagger(w: WeylWord) -> WeylWord:
    # (omega^c X^a Z^b)^dagger = omega^(-c) Z^-b X^-a = omega^(ab - c) X^-a Z^-b
    return WeylWord(-w.x, -w.z, int(np.dot(w.x, w.z)) - w.phase, w.d)


def commutation_phase(a: WeylWord, b: WeylWord) -> int:
    """c with ``a b = omega**c b a``."""
    a._check(b)
    return int(np.dot(a.z, b.x) - np.dot(b.z, a.x)) % a.d


def single_site_matrices(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Shift X|k> = |k+1> and clock Z|k> = omega^k |k>."""
    X = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    Z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return X, Z


def site_matrix(a: int, b: int, d: int) -> np.ndarray:
    X, Z = single_site_matrices(d)
    return np.linalg.matrix_power(X, a % d) @ np.linalg.matrix_power(Z, b % d)


def to_dense(w: WeylWord, sites: Sequence[int] | None = None,
             max_dim: int = MAX_DENSE_DIM) -> np.ndarray:
    """Dense matrix of ``w`` on ``sites`` (Kronecker order as listed).

    The word must act trivially outside ``sites``.
    """
    if sites is None:
        sites = range(w.n)
    sites = list(sites)
    outside = set(w.support()) - set(sites)
    if outside:
        raise ValueError(f"word acts on sites {sorted(outside)} outside the subset")
    dim = w.d ** len(sites)
    if dim > max_dim:
        raise ValueError(f"dense dimension {dim} exceeds cap {max_dim}")
    m = np.ones((1, 1), dtype=complex)
    for s in sites:
        m = np.kron(m, site_matrix(int(w.x[s]), int(w.z[s]), w.d))
    return omega(w.d) ** w.phase * m
