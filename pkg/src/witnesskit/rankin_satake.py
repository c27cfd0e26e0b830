"""Local data for degree-d standard and pair L-functions: Satake classes,
pair eigenvalue multisets, Dirichlet coefficients of self-dual pairings,
positivity of the q^d coefficient, coefficient majorants, and conductor
bookkeeping for pairs.

Everything here is local and combinatorial. Degree >= 2 families are
synthetic: per-prime parameter lists with a declared distance-to-unitary
bound. No global automorphy is claimed; the identities exercised (Cauchy
product expansions, Schur-expansion positivity, geometric majorants) hold
for the local data on its own. Ramified local factors in degree >= 2 are
out of scope; pair conductors for degree 1 use the exact product-character
conductor instead of synthetic data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import sympy

from .characters import DirichletCharacter, product_character
from .core import AccuracyError, ConstructionError, DomainError


@lru_cache(maxsize=None)
def _is_prime_power(q: int) -> bool:
    return q >= 2 and len(sympy.factorint(q)) == 1


@dataclass(frozen=True)
class SatakeClass:
    """Unramified local parameter list at a residue characteristic power.

    rb is the realized distance from the unitary axis,
    max_i |log_q |alpha_i||; classes headed for the smoothed-sum machinery
    need rb < 1/2 so that coefficients stay below q^(k(1 - eps)).
    """

    residue_q: int
    params: tuple[complex, ...]

    rb: float = field(init=False, repr=False)

    def __post_init__(self):
        if not _is_prime_power(int(self.residue_q)):
            raise ConstructionError(
                f"residue_q must be a prime power >= 2, got {self.residue_q}")
        coerced = tuple(complex(a) for a in self.params)
        if not coerced:
            raise ConstructionError("need at least one parameter")
        if any(a == 0 for a in coerced):
            raise ConstructionError("parameters must be nonzero")
        object.__setattr__(self, "params", coerced)
        lq = math.log(self.residue_q)
        object.__setattr__(
            self, "rb", max(abs(math.log(abs(a))) / lq for a in coerced))

    @property
    def degree(self) -> int:
        return len(self.params)


def dual_class(sigma: SatakeClass) -> SatakeClass:
    """The contragredient local data: conjugated parameters."""
    return SatakeClass(sigma.residue_q, tuple(a.conjugate() for a in sigma.params))


def rs_local_eigenvalues(sigma: SatakeClass,
                         sigma_prime: SatakeClass) -> tuple[complex, ...]:
    """The d*d' pairwise products alpha_i * alpha'_j (the inverse roots of
    the local pair Euler factor). Both classes must live over the same
    residue power."""
    if sigma.residue_q != sigma_prime.residue_q:
        raise DomainError(
            f"residue mismatch: {sigma.residue_q} vs {sigma_prime.residue_q}")
    return tuple(a * b for a in sigma.params for b in sigma_prime.params)


def self_dual_eigenvalues(sigma: SatakeClass) -> tuple[complex, ...]:
    """Eigenvalues of sigma paired against its own dual, alpha_i * conj(alpha_j)."""
    return rs_local_eigenvalues(sigma, dual_class(sigma))


def rs_coefficients(eigs, M: int) -> np.ndarray:
    """Dirichlet coefficients a_{q^k}, k = 0..M, of prod_e (1 - e X)^(-1):
    the complete homogeneous symmetric functions of the eigenvalues, by the
    power-sum recurrence k h_k = sum_{j<=k} p_j h_{k-j}."""
    if M < 1:
        raise DomainError(f"need M >= 1, got {M}")
    e = np.asarray(tuple(eigs), dtype=np.complex128)
    if e.size == 0:
        raise DomainError("need at least one eigenvalue")
    powers = np.ones_like(e)
    p = np.empty(M + 1, dtype=np.complex128)
    for j in range(1, M + 1):
        powers *= e
        p[j] = powers.sum()
    h = np.zeros(M + 1, dtype=np.complex128)
    h[0] = 1.0
    for k in range(1, M + 1):
        h[k] = np.dot(p[1:k + 1], h[k - 1::-1][:k]) / k
    return h


@dataclass(frozen=True)
class SchurCheckResult:
    a_qd: float
    passed: bool


def schur_positivity_check(sigma: SatakeClass) -> SchurCheckResult:
    """a_{q^d} of the self-dual pairing. By the Cauchy identity this is
    sum over partitions of d of |s_lambda(alpha)|^2, so it is >= 1 whenever
    the parameter product has modulus >= 1 (in particular on the unitary
    axis and for complementary-series pairs)."""
    d = sigma.degree
    h = rs_coefficients(self_dual_eigenvalues(sigma), d)
    val = float(h[d].real)
    return SchurCheckResult(a_qd=val, passed=val >= 1 - 1e-9)


def coefficient_majorant_check(family, H: float, R: float,
                               slack: float = 1e-9) -> bool:
    """Whether every class in the family satisfies the local bound

        sum_k |a_{q^k}| q^(-k(1+H+2R))  <=  (1 - q^(-(1+H)))^(-d^2)

    for its self-dual pairing. The left side is truncated and completed
    with the exact remainder of the dominating binomial series
    sum_k C(k+D-1, D-1) q^(-k(1+H)), which majorizes the dropped terms
    because |a_{q^k}| <= C(k+D-1, D-1) q^(2Rk). Equality cases (exact
    geometric series) pass via the relative slack."""
    if H <= 0:
        raise DomainError(f"need H > 0, got {H}")
    for sigma in family:
        if sigma.rb > R + 1e-12:
            raise DomainError(
                f"class at q = {sigma.residue_q} has rb = {sigma.rb:.6g} > R = {R}")
        q = float(sigma.residue_q)
        D = sigma.degree ** 2
        z = q ** -(1 + H)
        z_eff = q ** -(1 + H + 2 * R)
        rhs = (1 - z) ** -D
        eigs = self_dual_eigenvalues(sigma)
        M = 32
        while True:
            h = rs_coefficients(eigs, M)
            lhs = float(np.abs(h) @ (z_eff ** np.arange(M + 1)))
            binpart = math.fsum(math.comb(k + D - 1, D - 1) * z ** k
                                for k in range(M + 1))
            tail = max(rhs - binpart, 0.0)
            if lhs + tail <= rhs * (1 + slack):
                break
            if lhs > rhs * (1 + slack):
                return False
            if M >= 512:
                raise AccuracyError(
                    f"majorant undecidable at q = {sigma.residue_q} "
                    f"(lhs {lhs:.6g}, tail {tail:.3g}, rhs {rhs:.6g})",
                    achieved=tail)
            M *= 2
    return True


def rb_of(family) -> float:
    """max over the family of the per-class distance to the unitary axis."""
    family = tuple(family)
    if not family:
        raise DomainError("empty family")
    return max(sigma.rb for sigma in family)


# ---------------------------------------------------------------------------
# conductor bookkeeping

@dataclass(frozen=True)
class SyntheticConductor:
    """Level plus archimedean shifts; extended_C = N * prod(1 + |b_j|)."""

    level_N: int
    gamma_shifts: tuple[complex, ...]

    extended_C: float = field(init=False, repr=False)

    def __post_init__(self):
        if self.level_N < 1:
            raise ConstructionError(f"need level >= 1, got {self.level_N}")
        shifts = tuple(complex(b) for b in self.gamma_shifts)
        if any(b.real < 0 for b in shifts):
            raise ConstructionError("gamma shifts must have Re b >= 0")
        object.__setattr__(self, "gamma_shifts", shifts)
        prod = 1.0
        for b in shifts:
            prod *= 1 + abs(b)
        object.__setattr__(self, "extended_C", self.level_N * prod)


def gl1_conductor(chi: DirichletCharacter) -> SyntheticConductor:
    """Exact conductor data of a degree-one L-function: level f(chi) and the
    single gamma shift 0 or 1 by parity."""
    star = chi.primitive_part()
    return SyntheticConductor(level_N=star.conductor,
                              gamma_shifts=(complex(star.parity_b),))


def gl1_pair_conductor(chi: DirichletCharacter,
                       psi: DirichletCharacter) -> SyntheticConductor:
    """Exact conductor data of a degree-one pair: the pair L-function is the
    one attached to the (primitive) product character. Callers wanting the
    self-dual pair of chi pass psi = chi.conjugate()."""
    return gl1_conductor(product_character(chi, psi))


@dataclass(frozen=True)
class PairBoundVerdict:
    level_value: int
    level_bound: float
    level_ok: bool
    extended_value: float
    extended_bound: float
    extended_ok: bool

    @property
    def passed(self) -> bool:
        return self.level_ok and self.extended_ok


def conductor_pair_bound(a: SyntheticConductor, b: SyntheticConductor,
                         pair: SyntheticConductor, d: int, d_prime: int,
                         n_K: int = 1) -> PairBoundVerdict:
    """Check the pair-conductor inequalities

        N(pair) <= N^d' N'^d    and    C(pair) <= 2^(d d' n_K) C^d' C'^d

    against realized data. A failed verdict is a result, not an error."""
    level_bound = float(a.level_N) ** d_prime * float(b.level_N) ** d
    extended_bound = (2.0 ** (d * d_prime * n_K)
                      * a.extended_C ** d_prime * b.extended_C ** d)
    rel = 1 + 1e-12
    return PairBoundVerdict(
        level_value=pair.level_N, level_bound=level_bound,
        level_ok=pair.level_N <= level_bound * rel,
        extended_value=pair.extended_C, extended_bound=extended_bound,
        extended_ok=pair.extended_C <= extended_bound * rel)


# ---------------------------------------------------------------------------
# sampling and replay

def sample_classes(rng: np.random.Generator, count: int, d: int,
                   q_choices=(2, 3, 5, 7, 11, 13),
                   max_shift: float = 0.0) -> list[SatakeClass]:
    """Seeded random classes of degree d. max_shift = 0 draws unit-modulus
    parameters with independent phases. max_shift > 0 additionally moves
    parameters off the unitary axis in complementary pairs
    (q^t e^(i theta), q^(-t) e^(i theta)) sharing a phase, t <= max_shift,
    so the parameter product keeps modulus one and the self-dual pairing
    stays of positive type; an odd degree keeps one unshifted parameter."""
    if count < 0:
        raise DomainError("need count >= 0")
    if d < 1:
        raise DomainError("need d >= 1")
    if not 0 <= max_shift < 0.5:
        raise DomainError("need 0 <= max_shift < 1/2")
    qs = rng.choice(np.asarray(q_choices, dtype=np.int64), size=count)
    out = []
    npairs = d // 2
    for i in range(count):
        q = int(qs[i])
        if max_shift == 0.0:
            phases = rng.uniform(0.0, 2 * math.pi, size=d)
            params = np.exp(1j * phases)
        else:
            params = np.empty(d, dtype=np.complex128)
            t = rng.uniform(0.0, max_shift, size=npairs)
            theta = rng.uniform(0.0, 2 * math.pi, size=npairs)
            radial = float(q) ** t
            params[0:2 * npairs:2] = radial * np.exp(1j * theta)
            params[1:2 * npairs:2] = np.exp(1j * theta) / radial
            if d % 2:
                params[-1] = np.exp(1j * rng.uniform(0.0, 2 * math.pi))
        out.append(SatakeClass(q, tuple(params)))
    return out


def family_to_csv(family, path) -> None:
    """One row per class: q, d, then Re/Im of each parameter."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["q", "d", "re_im_pairs"])
        for sigma in family:
            row = [sigma.residue_q, sigma.degree]
            for a in sigma.params:
                row.extend([repr(a.real), repr(a.imag)])
            writer.writerow(row)


def family_from_csv(path) -> list[SatakeClass]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "q":
            raise DomainError(f"{path}: not a parameter family file")
        for row in reader:
            if not row:
                continue
            q, d = int(row[0]), int(row[1])
            flat = [float(v) for v in row[2:]]
            if len(flat) != 2 * d:
                raise DomainError(f"{path}: row for q = {q} has wrong width")
            params = tuple(complex(flat[2 * i], flat[2 * i + 1])
                           for i in range(d))
            out.append(SatakeClass(q, params))
    return out
