"""Dirichlet characters over Q and abelian extensions cut out by them.

Characters live as integer exponent tables on explicit generators of
(Z/q)^x, so character values are exact roots of unity with no floating
drift. Conductors, Gauss sums, root numbers, Artin symbols, and the
conductor-discriminant identity all reduce to integer arithmetic plus one
mpmath evaluation layer at the very end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations, product as iter_product

import mpmath as mp
import numpy as np
import sympy

from witnesskit.core import (
    DEFAULT_PRECISION,
    ConstructionError,
    DomainError,
    Precision,
    is_prime,
)


# ---------------------------------------------------------------------------
# unit group structure

@dataclass(frozen=True)
class CyclicFactor:
    """One cyclic factor of (Z/q)^x: generator residue mod q and its order."""

    generator: int
    order: int
    p: int            # the prime this factor sits at
    role: str         # "odd" | "minus" | "five"


def _crt_lift(g: int, pe: int, q: int) -> int:
    """Residue mod q congruent to g mod pe and to 1 mod q/pe."""
    m = q // pe
    if m == 1:
        return g % q
    return (1 + m * (((g - 1) * pow(m, -1, pe)) % pe)) % q


class UnitGroup:
    """(Z/q)^x decomposed into cyclic factors with a full discrete-log table."""

    def __init__(self, q: int):
        if q < 1:
            raise ConstructionError(f"modulus must be >= 1, got {q}")
        self.q = q
        factors: list[CyclicFactor] = []
        for p, a in sorted(sympy.factorint(q).items()):
            pe = p ** a
            if p == 2:
                if a == 1:
                    continue  # (Z/2)^x is trivial
                factors.append(CyclicFactor(_crt_lift(pe - 1, pe, q), 2, 2, "minus"))
                if a >= 3:
                    factors.append(
                        CyclicFactor(_crt_lift(5, pe, q), 2 ** (a - 2), 2, "five"))
            else:
                g = int(sympy.primitive_root(pe))
                factors.append(
                    CyclicFactor(_crt_lift(g, pe, q), (p - 1) * p ** (a - 1), p, "odd"))
        self.factors = tuple(factors)
        self.orders = tuple(f.order for f in self.factors)
        self.phi = math.prod(self.orders)
        self.group_exponent = math.lcm(*self.orders) if self.orders else 1
        self.dlog = self._build_dlog()

    def _build_dlog(self) -> dict[int, tuple[int, ...]]:
        table: dict[int, tuple[int, ...]] = {}
        for exps in iter_product(*(range(d) for d in self.orders)):
            r = 1 % self.q
            for fac, e in zip(self.factors, exps):
                r = r * pow(fac.generator, e, self.q) % self.q
            table[r] = exps
        if len(table) != self.phi:
            raise ConstructionError(f"unit group of {self.q} failed to enumerate")
        return table


@lru_cache(maxsize=None)
def unit_group(q: int) -> UnitGroup:
    return UnitGroup(q)


# ---------------------------------------------------------------------------
# characters

@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    """Character mod q given by exponents e_i on the unit-group generators:
    chi(g_i) = exp(2 pi i e_i / d_i). value_exponents maps each unit residue
    u to t with chi(u) = exp(2 pi i t / order)."""

    modulus: int
    order: int
    conductor: int
    is_principal: bool
    parity_a: int
    parity_b: int
    generator_exponents: tuple[int, ...]
    value_exponents: dict[int, int]

    def __eq__(self, other):
        return (isinstance(other, DirichletCharacter)
                and self.modulus == other.modulus
                and self.generator_exponents == other.generator_exponents)

    def __hash__(self):
        return hash((self.modulus, self.generator_exponents))

    def __repr__(self):
        return (f"DirichletCharacter(mod {self.modulus}, f={self.conductor}, "
                f"order={self.order}, exps={self.generator_exponents})")

    @cached_property
    def exponent_table(self) -> np.ndarray:
        """t-values indexed by residue (length q); -1 at non-units."""
        tbl = np.full(self.modulus, -1, dtype=np.int64)
        for u, t in self.value_exponents.items():
            tbl[u] = t
        return tbl

    def exponent(self, n: int) -> int | None:
        t = int(self.exponent_table[n % self.modulus])
        return None if t < 0 else t

    def value(self, n: int) -> mp.mpc:
        """chi(n) as an exact root of unity at the current mpmath precision."""
        t = self.exponent(n)
        if t is None:
            return mp.mpc(0)
        if t == 0:
            return mp.mpc(1)
        return mp.expjpi(mp.mpf(2 * t) / self.order)

    def values_float(self, upto: int) -> np.ndarray:
        """chi(0), ..., chi(upto) as complex128."""
        t = self.exponent_table[np.arange(upto + 1) % self.modulus]
        vals = np.exp(2j * np.pi * t / self.order)
        vals[t < 0] = 0.0
        return vals

    @cached_property
    def is_real(self) -> bool:
        return self.order <= 2

    def conjugate(self) -> "DirichletCharacter":
        ug = unit_group(self.modulus)
        exps = tuple((-e) % d for e, d in zip(self.generator_exponents, ug.orders))
        return _character_from_exponents(self.modulus, exps)

    def primitive_part(self) -> "DirichletCharacter":
        """The primitive character mod f inducing this one."""
        if self.conductor == self.modulus:
            return self
        f, q = self.conductor, self.modulus
        ug_f = unit_group(f)
        exps = []
        for fac in ug_f.factors:
            u = fac.generator
            while math.gcd(u, q) != 1:  # lift to a unit mod q in the same f-class
                u += f
            t = self.exponent(u)
            e = t * fac.order
            if e % self.order:
                raise ConstructionError("conductor bookkeeping is inconsistent")
            exps.append((e // self.order) % fac.order)
        return _character_from_exponents(f, tuple(exps))

    def key(self) -> str:
        """Stable text record: modulus, generator list, exponent list."""
        ug = unit_group(self.modulus)
        gens = ",".join(str(f.generator) for f in ug.factors)
        exps = ",".join(str(e) for e in self.generator_exponents)
        return f"q={self.modulus};g={gens};e={exps}"


def character_from_key(key: str) -> DirichletCharacter:
    try:
        parts = dict(item.split("=", 1) for item in key.strip().split(";"))
        q = int(parts["q"])
        gens = tuple(int(x) for x in parts["g"].split(",")) if parts["g"] else ()
        exps = tuple(int(x) for x in parts["e"].split(",")) if parts["e"] else ()
    except (KeyError, ValueError) as exc:
        raise ConstructionError(f"malformed character key {key!r}") from exc
    ug = unit_group(q)
    if gens != tuple(f.generator for f in ug.factors):
        raise ConstructionError(
            f"character key {key!r} lists generators {gens}, "
            f"expected {tuple(f.generator for f in ug.factors)}")
    return _character_from_exponents(q, tuple(e % d for e, d in zip(exps, ug.orders)))


def _local_conductor(factors_at_p, exps_at_p, p: int) -> int:
    """Conductor contribution at p from the exponents on p's cyclic factors."""
    if p == 2:
        eps = o5 = 0
        for fac, e in zip(factors_at_p, exps_at_p):
            if fac.role == "minus":
                eps = e % 2
            else:
                o5 = fac.order // math.gcd(e, fac.order)
        if o5 > 1:
            return 4 * o5  # 2^(v2(order)+2)
        return 4 if eps else 1
    ((fac, e),) = tuple(zip(factors_at_p, exps_at_p))
    o = fac.order // math.gcd(e, fac.order)
    if o == 1:
        return 1
    j = 0
    while o % p == 0:
        o //= p
        j += 1
    return p ** (j + 1)


@lru_cache(maxsize=None)
def _character_from_exponents(q: int, exps: tuple[int, ...]) -> DirichletCharacter:
    ug = unit_group(q)
    if len(exps) != len(ug.factors):
        raise ConstructionError(
            f"expected {len(ug.factors)} generator exponents for modulus {q}, "
            f"got {len(exps)}")
    exps = tuple(e % d for e, d in zip(exps, ug.orders))
    order = math.lcm(*(d // math.gcd(e, d) for e, d in zip(exps, ug.orders))) \
        if exps else 1

    # value exponents via discrete logs, through the group exponent L
    L = ug.group_exponent
    weights = [e * (L // d) for e, d in zip(exps, ug.orders)]
    value_exponents: dict[int, int] = {}
    for u, ks in ug.dlog.items():
        t = sum(w * k for w, k in zip(weights, ks)) % L
        te = t * order
        if te % L:
            raise ConstructionError("exponent arithmetic produced a non-root")
        value_exponents[u] = te // L

    # conductor: product of local conductors at each prime of q
    conductor = 1
    for p in sorted({f.p for f in ug.factors}):
        fs = [f for f in ug.factors if f.p == p]
        es = [e for f, e in zip(ug.factors, exps) if f.p == p]
        conductor *= _local_conductor(fs, es, p)

    t_m1 = value_exponents[(q - 1) % q]
    if t_m1 == 0:
        parity_b = 0
    elif 2 * t_m1 == order:
        parity_b = 1
    else:
        raise ConstructionError("chi(-1) is not +-1; construction is broken")

    return DirichletCharacter(
        modulus=q, order=order, conductor=conductor,
        is_principal=(conductor == 1), parity_a=1 - parity_b, parity_b=parity_b,
        generator_exponents=exps, value_exponents=value_exponents)


def make_character(q: int, generator_images) -> DirichletCharacter:
    """Build a character from images of the canonical generators of (Z/q)^x.

    generator_images: a sequence aligned with unit_group(q).factors, or a dict
    keyed by the canonical generator residues. Each image is either an integer
    e (meaning chi(g) = exp(2 pi i e / d) with d the generator's order) or a
    pair (num, den) meaning chi(g) = exp(2 pi i num / den), which must be a
    d-th root of unity.
    """
    ug = unit_group(q)
    if isinstance(generator_images, dict):
        expected = tuple(f.generator for f in ug.factors)
        if set(generator_images) != set(expected):
            raise ConstructionError(
                f"generator images must be keyed by {expected}, "
                f"got keys {tuple(sorted(generator_images))}")
        images = [generator_images[g] for g in expected]
    else:
        images = list(generator_images)
        if len(images) != len(ug.factors):
            raise ConstructionError(
                f"expected {len(ug.factors)} generator images for modulus {q}, "
                f"got {len(images)}")
    exps = []
    for fac, img in zip(ug.factors, images):
        if isinstance(img, tuple):
            num, den = img
            if den <= 0 or (num * fac.order) % den:
                raise ConstructionError(
                    f"image exp(2 pi i {num}/{den}) of generator {fac.generator} "
                    f"is not an order-{fac.order} root of unity; assignment is "
                    f"not a homomorphism")
            exps.append((num * fac.order // den) % fac.order)
        else:
            exps.append(int(img) % fac.order)
    return _character_from_exponents(q, tuple(exps))


def principal_character(q: int) -> DirichletCharacter:
    ug = unit_group(q)
    return _character_from_exponents(q, (0,) * len(ug.factors))


@lru_cache(maxsize=None)
def characters_mod(q: int) -> tuple[DirichletCharacter, ...]:
    """All phi(q) characters mod q, in generator-exponent lexicographic order."""
    ug = unit_group(q)
    return tuple(_character_from_exponents(q, exps)
                 for exps in iter_product(*(range(d) for d in ug.orders)))


def primitive_characters(f: int) -> tuple[DirichletCharacter, ...]:
    return tuple(chi for chi in characters_mod(f) if chi.conductor == f)


def induce(chi: DirichletCharacter, q: int) -> DirichletCharacter:
    """The character mod q induced by chi (requires modulus(chi) | q)."""
    if q % chi.modulus:
        raise ConstructionError(f"{q} is not a multiple of modulus {chi.modulus}")
    ug = unit_group(q)
    exps = []
    for fac in ug.factors:
        t = chi.exponent(fac.generator)
        e = t * fac.order
        if e % chi.order:
            raise ConstructionError("induction produced a non-root")
        exps.append((e // chi.order) % fac.order)
    return _character_from_exponents(q, tuple(exps))


def conductor(chi: DirichletCharacter) -> int:
    """Smallest f | q such that chi factors through (Z/f)^x."""
    return chi.conductor


def gauss_sum(chi: DirichletCharacter, prec: Precision = DEFAULT_PRECISION) -> mp.mpc:
    """Sum of chi(a) e^(2 pi i a / f) over a mod f, for primitive chi."""
    if chi.conductor != chi.modulus:
        raise DomainError(
            "gauss_sum needs a primitive character; call primitive_part() first")
    f = chi.modulus
    with prec.ctx():
        if f == 1:
            return mp.mpc(1)
        tot = mp.mpc(0)
        for a, t in chi.value_exponents.items():
            tot += mp.expjpi(2 * (mp.mpf(t) / chi.order + mp.mpf(a) / f))
        return tot


def root_number(chi: DirichletCharacter, prec: Precision = DEFAULT_PRECISION) -> mp.mpc:
    """W(chi) = g(chi) / (i^parity_b sqrt(f)); unimodular for primitive chi."""
    if chi.conductor != chi.modulus:
        raise DomainError(
            "root_number needs a primitive character; call primitive_part() first")
    with prec.ctx():
        g = gauss_sum(chi, prec)
        return g / (mp.mpc(0, 1) ** chi.parity_b * mp.sqrt(chi.modulus))


def product_character(chi: DirichletCharacter,
                      psi: DirichletCharacter) -> DirichletCharacter:
    """The primitive character inducing the pointwise product chi * psi."""
    M = math.lcm(chi.modulus, psi.modulus)
    ug = unit_group(M)
    L = math.lcm(chi.order, psi.order)
    exps = []
    for fac in ug.factors:
        ta = chi.exponent(fac.generator)
        tb = psi.exponent(fac.generator)
        num = (ta * (L // chi.order) + tb * (L // psi.order)) % L
        e = num * fac.order
        if e % L:
            raise ConstructionError("product values are not compatible roots of unity")
        exps.append((e // L) % fac.order)
    return _character_from_exponents(M, tuple(exps)).primitive_part()


# ---------------------------------------------------------------------------
# abelian extensions

@dataclass(frozen=True, eq=False)
class AbelianExtension:
    """Subfield of Q(zeta_n) fixed by H <= (Z/n)^x, with its Galois quotient.

    galois_group lists canonical class representatives (smallest member of
    each coset); class_of maps every unit residue to its representative.
    """

    conductor_n: int
    subgroup_H: frozenset[int]
    galois_group: tuple[int, ...]
    class_of: dict[int, int]
    degree_nL: int
    discriminant_dL: int
    ramified_primes: frozenset[int]
    dual_characters: tuple[DirichletCharacter, ...]

    def __repr__(self):
        return (f"AbelianExtension(n={self.conductor_n}, degree={self.degree_nL}, "
                f"d_L={self.discriminant_dL})")

    @property
    def identity_class(self) -> int:
        return self.class_of[1 % self.conductor_n]


def make_extension(n: int, H) -> AbelianExtension:
    """Extension record for the fixed field of H <= (Z/n)^x."""
    if n < 1:
        raise ConstructionError(f"conductor must be >= 1, got {n}")
    ug = unit_group(n)
    units = sorted(ug.dlog)
    Hset = frozenset(h % n for h in H) if H else frozenset({1 % n})
    if not Hset:
        Hset = frozenset({1 % n})
    for h in Hset:
        if h not in ug.dlog:
            raise ConstructionError(f"{h} is not a unit mod {n}")
    if 1 % n not in Hset:
        raise ConstructionError("subgroup must contain the identity")
    for h1 in Hset:
        for h2 in Hset:
            if (h1 * h2) % n not in Hset:
                raise ConstructionError(
                    f"subgroup not closed: {h1}*{h2} mod {n} escapes")

    class_of: dict[int, int] = {}
    for u in units:
        class_of[u] = min((u * h) % n for h in Hset)
    classes = tuple(sorted(set(class_of.values())))
    degree = ug.phi // len(Hset)

    dual = tuple(chi for chi in characters_mod(n)
                 if all(chi.exponent(h) == 0 for h in Hset))
    if len(dual) != degree:
        raise ConstructionError("dual group enumeration is inconsistent")

    d_L = math.prod(chi.conductor for chi in dual)
    ramified = frozenset(p for p in sympy.factorint(n) if d_L % p == 0)

    return AbelianExtension(
        conductor_n=n, subgroup_H=Hset, galois_group=classes, class_of=class_of,
        degree_nL=degree, discriminant_dL=d_L, ramified_primes=ramified,
        dual_characters=dual)


def frobenius_data(ext: AbelianExtension, p: int) -> tuple[frozenset[int], int]:
    """Inertia image at p (a set of classes) and a Frobenius class rep.

    The inertia image is the image in the quotient of the units congruent to
    1 mod the prime-to-p part of n; the Frobenius representative is the class
    of any unit matching p away from p. For p not dividing n this is the
    ordinary Artin class of p mod n.
    """
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    n = ext.conductor_n
    m, v = n, 0
    while m % p == 0:
        m //= p
        v += 1
    if v == 0:
        return frozenset({ext.identity_class}), ext.class_of[p % n]
    inertia = frozenset(ext.class_of[u] for u in ext.class_of if u % m == 1 % m)
    if m == 1:
        return inertia, ext.identity_class  # inertia is everything here
    x = _crt_lift(p % m, m, n)  # x = p mod m, x = 1 mod p^v, a unit mod n
    return inertia, ext.class_of[x]


def artin_symbol(ext: AbelianExtension, p: int) -> int:
    """Class of Frobenius at an unramified prime p."""
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if p in ext.ramified_primes:
        raise DomainError(f"{p} ramifies (divides the discriminant); no Artin class")
    inertia, frob = frobenius_data(ext, p)
    if len(inertia) > 1:
        raise DomainError(f"{p} ramifies; no single Artin class")
    return frob


def all_subgroups(n: int) -> list[frozenset[int]]:
    """Every subgroup of (Z/n)^x, as closures of generator subsets up to rank."""
    ug = unit_group(n)
    units = sorted(ug.dlog)
    rank = len(ug.factors)
    subs = {frozenset({1 % n})}
    for r in range(1, rank + 1):
        for gens in combinations(units, r):
            subs.add(_closure(n, gens))
    return sorted(subs, key=lambda h: (len(h), sorted(h)))


def _closure(n: int, gens) -> frozenset[int]:
    out = {1 % n}
    frontier = [1 % n]
    while frontier:
        u = frontier.pop()
        for g in gens:
            v = (u * g) % n
            if v not in out:
                out.add(v)
                frontier.append(v)
    return frozenset(out)


def cyclotomic_discriminant(n: int) -> int:
    """|disc Q(zeta_n)| = n^phi(n) / prod_{p | n} p^(phi(n)/(p-1))."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if n <= 2:
        return 1
    phi = int(sympy.totient(n))
    num = n ** phi
    for p in sympy.factorint(n):
        e, r = divmod(phi, p - 1)
        if r:
            raise DomainError(f"phi({n}) not divisible by {p}-1")
        num //= p ** e
    return num


# ---------------------------------------------------------------------------
# exclusion sets

@dataclass(frozen=True)
class ExclusionSet:
    """Finite set of excluded rational primes with its norm product N_S."""

    primes: frozenset[int]
    norm_product: int

    def __post_init__(self):
        for p in self.primes:
            if not is_prime(p):
                raise ConstructionError(f"exclusion set member {p} is not prime")
        expect = math.prod(sorted(self.primes)) if self.primes else 1
        if self.norm_product != expect:
            raise ConstructionError(
                f"norm_product {self.norm_product} != product {expect}")

    @classmethod
    def of(cls, *ps: int) -> "ExclusionSet":
        s = frozenset(ps)
        return cls(primes=s, norm_product=math.prod(sorted(s)) if s else 1)

    def __contains__(self, p: int) -> bool:
        return p in self.primes

    def __repr__(self):
        return f"ExclusionSet({sorted(self.primes)}, N_S={self.norm_product})"
