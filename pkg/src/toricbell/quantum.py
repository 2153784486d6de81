"""Quantum side. Ground states are handled in the stabilizer formalism, so
Bell-operator expectations are exact; the sum-of-squares identity is checked
matrix-free with random order-d unitaries.

At a special site the ideal observables are Fourier combinations of the
symmetric Weyl operators ``D(a, b) = omega**(a b / 2) X**a Z**b``; with this
choice each ``A_{x,1}`` is unitary of order d and ``A_{x,k} = A_{x,1}**k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bellexpr import BellExpression, GeneratorTerm
from .coefficients import LambdaTable
from .lattice import SiteCoord, SpecialSiteSet, TorusLattice, partner_site
from .pauli import WeylWord, power, to_dense
from .stabilizers import plaquette_operator, vertex_operator


def _omega(d: int) -> complex:
    return np.exp(2j * np.pi / d)


class StabilizerGroup:
    """Abelian group generated by phase-carrying Weyl words, kept in reduced
    row-echelon form over Z_d so membership is a single sweep."""

    def __init__(self, generators: list[WeylWord]):
        if not generators:
            raise ValueError("need at least one generator")
        self.generators = list(generators)
        self.d = generators[0].d
        self.n = generators[0].n
        self._reduce()

    def _reduce(self) -> None:
        d, n = self.d, self.n
        rows = [(g.vector().copy(), g) for g in self.generators]
        pivots: list[tuple[int, np.ndarray, WeylWord]] = []
        for col in range(2 * n):
            hit = next((r for r in range(len(rows)) if rows[r][0][col] % d), None)
            if hit is None:
                continue
            vec, word = rows.pop(hit)
            inv = pow(int(vec[col]), -1, d)
            vec = vec * inv % d
            word = power(word, inv)
            new_rows = []
            for v2, w2 in rows:
                c = int(v2[col]) % d
                if c:
                    v2 = (v2 - c * vec) % d
                    w2 = w2 * power(word, -c)
                new_rows.append((v2, w2))
            rows = new_rows
            new_piv = []
            for pc, pv, pw in pivots:
                c = int(pv[col]) % d
                if c:
                    pv = (pv - c * vec) % d
                    pw = pw * power(word, -c)
                new_piv.append((pc, pv, pw))
            pivots = new_piv + [(col, vec, word)]
        for v2, w2 in rows:
            if w2.phase and not v2.any():
                raise ValueError("generators are inconsistent: a product equals a nontrivial phase")
        self.rank = len(pivots)
        self._pcols = np.array([p[0] for p in pivots], dtype=np.int64)
        self._pvecs = np.array([p[1] for p in pivots], dtype=np.int64)
        self._px = np.array([p[2].x for p in pivots], dtype=np.int64)
        self._pz = np.array([p[2].z for p in pivots], dtype=np.int64)
        self._pphase = np.array([p[2].phase for p in pivots], dtype=np.int64)
        self._pself = (self._px * self._pz).sum(axis=1)

    def member_phase(self, w: WeylWord) -> int | None:
        """c with ``w = omega**c g`` for some g in the group, or None."""
        d, n = self.d, self.n
        vec = w.vector()
        coef = vec[self._pcols] % d
        if not np.array_equal((coef @ self._pvecs) % d, vec % d):
            return None
        ax = np.zeros(n, np.int64)
        az = np.zeros(n, np.int64)
        ph = 0
        for r in np.flatnonzero(coef):
            c = int(coef[r])
            # phase of (row word)**c, then of acc * that
            ph += c * int(self._pphase[r]) + c * (c - 1) // 2 * int(self._pself[r])
            ph += c * int(az @ self._px[r])
            ax += c * self._px[r]
            az += c * self._pz[r]
        return (w.phase - ph) % d

    def contains(self, w: WeylWord) -> bool:
        return self.member_phase(w) == 0

    def expectation(self, w: WeylWord) -> complex:
        c = self.member_phase(w)
        if c is None:
            return 0j
        return complex(_omega(self.d) ** c)


def z_loops(lattice: TorusLattice) -> tuple[WeylWord, WeylWord]:
    """Non-contractible Z strings along horizontal edges (i even, j=1) and
    vertical edges (i=1, j even)."""
    idx = lattice.site_index
    n = lattice.size
    one = {idx(lattice.coord(i, 1)): (0, 1) for i in range(0, n, 2)}
    two = {idx(lattice.coord(1, j)): (0, 1) for j in range(0, n, 2)}
    return (WeylWord.from_sites(lattice.N, lattice.d, one), WeylWord.from_sites(lattice.N, lattice.d, two))


def x_loops(lattice: TorusLattice) -> tuple[WeylWord, WeylWord]:
    idx = lattice.site_index
    n = lattice.size
    one = {idx(lattice.coord(0, j)): (1, 0) for j in range(1, n, 2)}
    two = {idx(lattice.coord(i, 0)): (1, 0) for i in range(1, n, 2)}
    return (WeylWord.from_sites(lattice.N, lattice.d, one), WeylWord.from_sites(lattice.N, lattice.d, two))


def ground_state_group(lattice: TorusLattice, sector: tuple[int, int] = (0, 0)) -> StabilizerGroup:
    """Ground state whose Z-loop eigenvalues are omega**a and omega**b."""
    a, b = sector
    gens = [vertex_operator(lattice, v) for v in lattice.vertices()[:-1]]
    gens += [plaquette_operator(lattice, p) for p in lattice.plaquettes()[:-1]]
    z1, z2 = z_loops(lattice)
    gens += [z1.with_phase(-a), z2.with_phase(-b)]
    group = StabilizerGroup(gens)
    if group.rank != lattice.N:
        raise RuntimeError(f"stabilizer rank {group.rank} != N = {lattice.N}")
    return group


# ideal observables


@dataclass(frozen=True)
class IdealObservable:
    """Single-site linear combination of Weyl words."""

    d: int
    terms: tuple[tuple[complex, WeylWord], ...]

    def matrix(self) -> np.ndarray:
        return sum(c * to_dense(w) for c, w in self.terms)


def symmetric_power(a: int, b: int, k: int, d: int) -> WeylWord:
    """``D(a, b)**k = D(k a, k b)`` as a normal-ordered single-site word."""
    return WeylWord.symmetric(k * a, k * b, d)


def ideal_observable(role: str, x: int, k: int, d: int, lam: LambdaTable | None = None) -> IdealObservable:
    if not 1 <= k <= d - 1 and role != "generic":
        raise ValueError(f"k must lie in 1..{d - 1}")
    if role == "generic":
        if x == 0:
            return IdealObservable(d, ((1, WeylWord([k], [0], 0, d)),))
        if x == 1:
            return IdealObservable(d, ((1, WeylWord([0], [k], 0, d)),))
        raise ValueError(f"generic sites have inputs 0 and 1, got {x}")
    if role == "partner":
        if x == 1:
            return IdealObservable(d, ((1, WeylWord([0], [k], 0, d)),))
        return IdealObservable(d, ((1, symmetric_power(1 - x, -x, k, d)),))
    if role == "special":
        lam = lam or LambdaTable.build(d)
        w = _omega(d)
        pref = lam[k] / math.sqrt(d)
        terms = tuple(
            (complex(pref * w ** ((k * x * y + k * y * (y + 1)) % d)), symmetric_power(1 - y, y, k, d))
            for y in range(d)
        )
        return IdealObservable(d, terms)
    raise ValueError(f"unknown role {role!r}")


def site_roles(lattice: TorusLattice, special: SpecialSiteSet) -> dict[SiteCoord, str]:
    roles = {s: "special" for s in special.sites}
    for s in special.sites:
        roles[partner_site(lattice, s)] = "partner"
    return roles


def bell_expectation(expr: BellExpression, group: StabilizerGroup) -> float:
    lattice = expr.lattice
    d = expr.d
    if group.d != d or group.n != lattice.N:
        raise ValueError("expression and stabilizer group live on different systems")
    roles = site_roles(lattice, expr.special)
    lam = LambdaTable.build(d)
    cache: dict[tuple, IdealObservable] = {}
    total = 0j
    for t in expr.terms:
        partial = [(complex(t.coeff), np.zeros(lattice.N, np.int64), np.zeros(lattice.N, np.int64), 0)]
        for f in t.factors:
            role = roles.get(f.site, "generic")
            key = (role, f.x, f.k)
            if key not in cache:
                cache[key] = ideal_observable(role, f.x, f.k, d, lam)
            s = lattice.site_index(f.site)
            nxt = []
            for c, xs, zs, ph in partial:
                for c2, w in cache[key].terms:
                    xs2, zs2 = xs.copy(), zs.copy()
                    xs2[s], zs2[s] = w.x[0], w.z[0]
                    nxt.append((c * c2, xs2, zs2, ph + w.phase))
            partial = nxt
        for c, xs, zs, ph in partial:
            total += c * group.expectation(WeylWord(xs, zs, ph, d))
    if abs(total.imag) > 1e-9:
        raise ValueError(f"Bell expectation has imaginary part {total.imag}")
    return float(total.real)


def generator_expectations(expr: BellExpression, group: StabilizerGroup) -> dict[str, complex]:
    """<G> for every substituted generator with ideal observables (each should be 1)."""
    out = {}
    for g in expr.generators or []:
        labels = {g.label}
        sub = expr.restrict(labels)
        sub.terms = [t for t in sub.terms if not t.conjugate]
        val = _complex_expectation(sub, group) / g.weight
        out[g.label] = val
    return out


def _complex_expectation(expr: BellExpression, group: StabilizerGroup) -> complex:
    lattice = expr.lattice
    d = expr.d
    roles = site_roles(lattice, expr.special)
    total = 0j
    for t in expr.terms:
        acc = [(complex(t.coeff), {})]
        for f in t.factors:
            obs = ideal_observable(roles.get(f.site, "generic"), f.x, f.k, d)
            acc = [(c * c2, {**ops, f.site: w}) for c, ops in acc for c2, w in obs.terms]
        for c, ops in acc:
            xs = np.zeros(lattice.N, np.int64)
            zs = np.zeros(lattice.N, np.int64)
            ph = 0
            for site, w in ops.items():
                s = lattice.site_index(site)
                xs[s], zs[s], ph = w.x[0], w.z[0], ph + w.phase
            total += c * group.expectation(WeylWord(xs, zs, ph, d))
    return total


# sum-of-squares check


def random_order_d_unitary(dim: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """V diag(omega**r) V^dagger with Haar-random V."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    phases = _omega(d) ** rng.integers(0, d, size=dim)
    return (q * phases) @ q.conj().T


def barred_combination(A: dict[int, np.ndarray], x: int, k: int, d: int, lam: LambdaTable) -> np.ndarray:
    """Fourier combination of a special site's observables, ``A[y]`` = order-d unitary A_{y,1}."""
    w = _omega(d)
    pref = w ** (-k * x * (x + 1) % d) / (math.sqrt(d) * lam[k])
    return pref * sum(w ** (-k * x * y % d) * np.linalg.matrix_power(A[y], k) for y in range(d))


def _apply(state: np.ndarray, ops: list[tuple[int, np.ndarray]]) -> np.ndarray:
    for axis, M in ops:
        state = np.moveaxis(np.tensordot(M, state, axes=([1], [axis])), 0, axis)
    return state


@dataclass
class SosReport:
    residual: float
    trials: int
    party_dim: int
    bound: float


def verify_sos(expr: BellExpression, party_dim: int, trials: int, seed: int) -> SosReport:
    """Max over trials of ||(bound I - B) v - sum_g w_g M_g^dagger M_g v|| / ||v||."""
    if expr.generators is None:
        raise ValueError("expression carries no generator structure; rebuild it")
    lattice, d = expr.lattice, expr.d
    lam = LambdaTable.build(d)
    N = lattice.N
    # twice the total generator weight; equals 2N + (4d-8)R for a full expression
    bound = 2.0 * sum(g.weight for g in expr.generators)
    idx = lattice.site_index
    rng = np.random.default_rng(seed)
    variables = expr.variables()
    specials = set(expr.special.sites)
    worst = 0.0
    for _ in range(trials):
        U = {v: random_order_d_unitary(party_dim, d, rng) for v in variables}
        powers = {(v, k): np.linalg.matrix_power(U[v], k) for v in variables for k in range(1, d)}
        state = rng.standard_normal((party_dim,) * N) + 1j * rng.standard_normal((party_dim,) * N)

        lhs = bound * state
        for t in expr.terms:
            ops = [(idx(f.site), powers[((f.site, f.x), f.k)]) for f in t.factors]
            lhs = lhs - t.coeff * _apply(state, ops)

        rhs = np.zeros_like(state)
        for g in expr.generators:
            ops = _generator_ops(g, U, powers, specials, d, lam, idx)
            coef = _omega(d) ** g.phase
            G = lambda v: coef * _apply(v, ops)
            Gd = lambda v: np.conj(coef) * _apply(v, [(a, M.conj().T) for a, M in reversed(ops)])
            if g.sos_dagger:
                u = state - Gd(state)
                rhs = rhs + g.weight * (u - G(u))
            else:
                u = state - G(state)
                rhs = rhs + g.weight * (u - Gd(u))
        res = np.linalg.norm(lhs - rhs) / np.linalg.norm(state)
        worst = max(worst, float(res))
    return SosReport(worst, trials, party_dim, bound)


def _generator_ops(g: GeneratorTerm, U, powers, specials, d, lam, idx):
    ops = []
    for f in g.factors:
        if f.barred:
            A = {y: U[(f.site, y)] for y in range(d)}
            ops.append((idx(f.site), barred_combination(A, f.x, f.k, d, lam)))
        else:
            ops.append((idx(f.site), powers[((f.site, f.x), f.k)]))
    return ops


# single-site operator identities


@dataclass
class IdentityReport:
    d: int
    lambda_modulus: float
    lambda_conjugation: float
    fourier_sum_random: float
    fourier_sum_ideal: float
    bar_dagger: float
    ideal_unitarity: float
    ideal_order: float
    ideal_power: float
    bar_equals_weyl: float
    anticommutator: float | None = None
    anticommutator_unitarity: float | None = None

    def max_residual(self) -> float:
        vals = [v for k, v in self.__dict__.items() if k != "d" and v is not None]
        return max(vals)


def ideal_special_matrices(d: int, lam: LambdaTable | None = None) -> dict[int, np.ndarray]:
    lam = lam or LambdaTable.build(d)
    return {y: ideal_observable("special", y, 1, d, lam).matrix() for y in range(d)}


def verify_observable_identities(d: int, dim: int = 4, trials: int = 5, seed: int = 0) -> IdentityReport:
    lam = LambdaTable.build(d)
    rng = np.random.default_rng(seed)
    I_d = np.eye(d)
    mp = np.linalg.matrix_power

    lam_mod = max(abs(abs(lam[k]) - 1) for k in range(1, d))
    lam_conj = max(abs(lam[k].conjugate() - lam[d - k]) for k in range(1, d))

    def fourier_sum(A, k, n):
        S = sum(barred_combination(A, x, k, d, lam).conj().T @ barred_combination(A, x, k, d, lam) for x in range(d))
        return np.abs(S - d * np.eye(n)).max()

    def bar_dagger(A):
        return max(
            np.abs(barred_combination(A, x, k, d, lam).conj().T - barred_combination(A, x, d - k, d, lam)).max()
            for x in range(d) for k in range(1, d)
        )

    fs_rand = bd = 0.0
    for _ in range(trials):
        A = {y: random_order_d_unitary(dim, d, rng) for y in range(d)}
        fs_rand = max(fs_rand, max(fourier_sum(A, k, dim) for k in range(1, d)))
        bd = max(bd, bar_dagger(A))

    ideal = ideal_special_matrices(d, lam)
    fs_ideal = max(fourier_sum(ideal, k, d) for k in range(1, d))
    bd = max(bd, bar_dagger(ideal))
    unit = max(np.abs(M.conj().T @ M - I_d).max() for M in ideal.values())
    order = max(np.abs(mp(M, d) - I_d).max() for M in ideal.values())
    pw = max(
        np.abs(ideal_observable("special", y, k, d, lam).matrix() - mp(ideal[y], k)).max()
        for y in range(d) for k in range(1, d)
    )
    weyl = max(
        np.abs(barred_combination(ideal, x, k, d, lam) - to_dense(symmetric_power(1 - x, x, k, d))).max()
        for x in range(d) for k in range(1, d)
    )
    report = IdentityReport(d, lam_mod, lam_conj, fs_rand, fs_ideal, bd, unit, order, pw, weyl)
    if d == 3:
        B0 = barred_combination(ideal, 0, 1, d, lam)
        B1 = barred_combination(ideal, 1, 1, d, lam)
        B22 = barred_combination(ideal, 2, 2, d, lam)
        ac = B0 @ B1 + B1 @ B0
        report.anticommutator = float(np.abs(ac + B22).max())
        report.anticommutator_unitarity = float(np.abs(ac.conj().T @ ac - I_d).max())
    return report

