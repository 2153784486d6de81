"""Bell expression built from the toric-code stabilizers by symbolic substitution.

Each stabilizer word is turned into a product of abstract observables: on a
generic site ``X**k -> A_{0,k}`` and ``Z**k -> A_{1,k}``; on the partner site
of a special site the symmetric Weyl operator ``D(1-x, -x)**k -> A_{x,k}``
(and ``Z**k -> A_{1,k}``); on a special site ``D(1-x, x)**k`` becomes the
Fourier combination ``Abar_{x,k}`` of that site's observables. The result is
stored fully expanded, with a complex-conjugate copy of every term.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .coefficients import LambdaTable
from .lattice import (
    LatticeError,
    SiteCoord,
    SpecialSiteSet,
    TorusLattice,
    near_plaquettes,
    near_vertices,
    partner_site,
    validate_special_sites,
)
from .pauli import WeylWord
from .stabilizers import extra_operator, plaquette_operator, vertex_operator

BETA_STAR_D3 = 12 * math.cos(math.pi / 9)


@dataclass(frozen=True, order=True)
class ObservableRef:
    site: SiteCoord
    x: int
    k: int

    def key(self) -> tuple[int, int, int, int]:
        return (self.site.i, self.site.j, self.x, self.k)


@dataclass(frozen=True)
class SiteFactor:
    """One site of a substituted stabilizer; ``barred`` marks a special-site combination."""

    site: SiteCoord
    x: int
    k: int
    barred: bool = False


@dataclass(frozen=True)
class GeneratorTerm:
    label: str
    kind: str
    phase: int
    weight: int
    factors: tuple[SiteFactor, ...]
    special: SiteCoord | None = None
    # use |I - G^dagger|^2 in the sum of squares (special factor carries k = d-1)
    sos_dagger: bool = False


@dataclass(frozen=True)
class BellTerm:
    coeff: complex
    factors: tuple[ObservableRef, ...]
    generator: str = ""
    conjugate: bool = False

    def sort_key(self):
        return (tuple(f.key() for f in self.factors), self.generator, self.conjugate)


@dataclass
class BellExpression:
    lattice: TorusLattice
    special: SpecialSiteSet
    terms: list[BellTerm]
    generators: list[GeneratorTerm] | None = None
    cc_included: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.lattice.d

    @property
    def N(self) -> int:
        return self.lattice.N

    @property
    def R(self) -> int:
        return self.special.R

    def variables(self) -> list[tuple[SiteCoord, int]]:
        """Distinct (site, input) pairs referenced by the expanded terms."""
        return sorted({(f.site, f.x) for t in self.terms for f in t.factors})

    def restrict(self, generator_labels: Iterable[str]) -> BellExpression:
        keep = set(generator_labels)
        gens = None
        if self.generators is not None:
            gens = [g for g in self.generators if g.label in keep]
        terms = [t for t in self.terms if t.generator in keep]
        return BellExpression(self.lattice, self.special, terms, gens, self.cc_included)

    # serialization

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "L": self.lattice.L,
            "special": [[s.i, s.j] for s in self.special.sites],
            "terms": [
                {
                    "re": float(t.coeff.real),
                    "im": float(t.coeff.imag),
                    "factors": [{"i": f.site.i, "j": f.site.j, "x": f.x, "k": f.k} for f in t.factors],
                    "generator": t.generator,
                    "conjugate": t.conjugate,
                }
                for t in self.terms
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> BellExpression:
        lattice = TorusLattice(int(data["L"]), int(data["d"]))
        special = SpecialSiteSet(tuple(lattice.coord(i, j) for i, j in data["special"]))
        terms = [
            BellTerm(
                complex(t["re"], t["im"]),
                tuple(ObservableRef(SiteCoord(f["i"], f["j"]), f["x"], f["k"]) for f in t["factors"]),
                t.get("generator", ""),
                t.get("conjugate", False),
            )
            for t in data["terms"]
        ]
        return cls(lattice, special, terms, None, True)

    @classmethod
    def from_json(cls, text: str) -> BellExpression:
        return cls.from_dict(json.loads(text))


def _inv(a: int, d: int) -> int:
    return pow(a % d, -1, d)


def substitute_word(lattice: TorusLattice, word: WeylWord, specials: set[SiteCoord],
                    partners: set[SiteCoord]) -> tuple[int, tuple[SiteFactor, ...]]:
    """Map a stabilizer word to (phase exponent, site factors)."""
    d = lattice.d
    half = (d + 1) // 2
    phase = word.phase
    factors = []
    for idx in word.support():
        site = lattice.site_at(idx)
        a, b = int(word.x[idx]), int(word.z[idx])
        if site in specials:
            k = (a + b) % d
            if k == 0:
                raise LatticeError(f"word on special site {site} has no substitution (a+b = 0)")
            x = b * _inv(k, d) % d
            phase -= a * b * half
            factors.append(SiteFactor(site, x, k, True))
        elif site in partners:
            if a == 0:
                x, k = 1, b
            else:
                k = (a - b) % d
                if k == 0:
                    raise LatticeError(f"word on partner site {site} has no substitution (a = b)")
                x = -b * _inv(k, d) % d
            phase -= a * b * half
            factors.append(SiteFactor(site, x, k, False))
        else:
            if a and b:
                raise LatticeError(f"generic site {site} carries a mixed X/Z factor")
            factors.append(SiteFactor(site, 0 if a else 1, a or b, False))
    return phase % d, tuple(factors)


def build_generators(lattice: TorusLattice, special: SpecialSiteSet) -> list[GeneratorTerm]:
    d = lattice.d
    specials = set(special.sites)
    partners = {partner_site(lattice, s) for s in special.sites}
    owner: dict[SiteCoord, SiteCoord] = {}
    for s in special.sites:
        for c in (*near_vertices(lattice, s), *near_plaquettes(lattice, s)):
            owner[c] = s

    gens = []

    def add(label, kind, word, weight, s):
        phase, factors = substitute_word(lattice, word, specials, partners)
        dag = any(f.barred and f.k == d - 1 for f in factors)
        gens.append(GeneratorTerm(label, kind, phase, weight, factors, s, dag))

    for v in lattice.vertices():
        add(f"V{v}", "vertex", vertex_operator(lattice, v), 1, owner.get(v))
    for p in lattice.plaquettes():
        add(f"P{p}", "plaquette", plaquette_operator(lattice, p), 1, owner.get(p))
    for s in special.sites:
        for x in range(2, d):
            add(f"E{s}x{x}", "extra", extra_operator(lattice, s, x), 2, s)
    return gens


def expand_generator(g: GeneratorTerm, d: int, lam: LambdaTable) -> list[BellTerm]:
    """Expand barred factors into raw observables; at most one barred factor per term."""
    w = np.exp(2j * np.pi / d)
    base = g.weight * w**g.phase
    plain = [ObservableRef(f.site, f.x, f.k) for f in g.factors if not f.barred]
    barred = [f for f in g.factors if f.barred]
    if not barred:
        return [BellTerm(complex(base), tuple(sorted(plain)), g.label)]
    if len(barred) > 1:
        raise LatticeError(f"{g.label} touches more than one special site")
    f = barred[0]
    k, x = f.k, f.x
    pref = base * w ** (-k * x * (x + 1) % d) / (math.sqrt(d) * lam[k])
    out = []
    for y in range(d):
        c = pref * w ** (-k * x * y % d)
        out.append(BellTerm(complex(c), tuple(sorted(plain + [ObservableRef(f.site, y, k)])), g.label))
    return out


def conjugate_term(t: BellTerm, d: int) -> BellTerm:
    facs = tuple(sorted(ObservableRef(f.site, f.x, (d - f.k) % d) for f in t.factors))
    return BellTerm(t.coeff.conjugate(), facs, t.generator, not t.conjugate)


def build_expression(lattice: TorusLattice, special: SpecialSiteSet, check: bool = True) -> BellExpression:
    if check and special.R:
        report = validate_special_sites(lattice, special)
        if not report.separation_ok:
            raise LatticeError("invalid special-site placement: " + "; ".join(report.violations))
    d = lattice.d
    lam = LambdaTable.build(d)
    gens = build_generators(lattice, special)
    terms: list[BellTerm] = []
    for g in gens:
        terms.extend(expand_generator(g, d, lam))
    terms += [conjugate_term(t, d) for t in terms]
    terms.sort(key=BellTerm.sort_key)
    return BellExpression(lattice, special, terms, gens, True)


# closed-form bounds


def quantum_bound(N: int, d: int, R: int) -> float:
    return float(2 * N + (4 * d - 8) * R)


def single_term_min(d: int) -> float:
    return 2 * math.cos(2 * math.pi * ((d - 1) // 2) / d)


def local_bound_formulas(N: int, d: int, R: int, beta_star_max: float, beta_star_min: float) -> tuple[float, float]:
    """(upper bound on the local maximum, lower bound on the local minimum)."""
    far = N - 4 * R
    return 2 * far + R * beta_star_max, far * single_term_min(d) + R * beta_star_min


def ratio(N: int, d: int, R: int, beta_star_max: float) -> float:
    """Lower bound on quantum/local ratio; exact when the local bound is tight."""
    den = 2 * (N - 4 * R) + R * beta_star_max
    if den <= 0:
        raise ValueError(f"non-positive local bound {den}")
    return quantum_bound(N, d, R) / den


def ratio_d3(N: int, R: int) -> float:
    den = N + 2 * (3 * math.cos(math.pi / 9) - 2) * R
    if den <= 0:
        raise ValueError(f"non-positive denominator {den}")
    return (N + 2 * R) / den
