"""Dirichlet L-functions: evaluation, completions, functional equation,
log-derivative coefficients, and certified zero inventories.

Two independent evaluation routes are kept deliberately separate:

* the contract route assembles L from the smoothed series with
  incomplete-gamma weights on both sides of the functional equation
  (`l_value`, `completed_l`);
* a reference route sums Hurwitz zeta values (`l_value_reference`,
  `l_log_derivative`), used as an oracle in tests and as the fast
  log-derivative backend for contour integration elsewhere.

Zero scans locate sign changes of the rotated completed function on the
critical line and certify the count by an argument-principle winding number
around the rectangle [0,1] x [0,T].
"""

from __future__ import annotations

import math
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass
from functools import lru_cache

import mpmath as mp
import numpy as np
import sympy

from witnesskit.characters import (
    DirichletCharacter,
    principal_character,
    root_number,
)
from witnesskit.core import (
    DEFAULT_PRECISION,
    AccuracyError,
    CertificationError,
    ConstructionError,
    CoverageError,
    DomainError,
    Precision,
    UsageError,
    enumerate_prime_powers,
)

DEFAULT_SCAN_CEILING = 60.0


# ---------------------------------------------------------------------------
# data types

@dataclass(frozen=True)
class ZeroDatum:
    """One nontrivial zero beta + i gamma with its bookkeeping."""

    beta: float
    gamma: float
    precision_digits: int
    on_critical_line: bool
    source: str  # "computed" | "imported"

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ConstructionError(f"zero with beta = {self.beta} outside (0,1)")
        if self.source not in ("computed", "imported"):
            raise ConstructionError(f"unknown zero source {self.source!r}")


@dataclass(frozen=True)
class CompletedLData:
    """Completion data: conductor as analytic conductor, gamma-factor shape,
    root number of the primitive inducing character."""

    character: DirichletCharacter
    analytic_conductor_A: int
    gamma_shape: tuple[int, int]
    root_number: complex


def completed_l_data(chi: DirichletCharacter,
                     prec: Precision = DEFAULT_PRECISION) -> CompletedLData:
    star = chi.primitive_part()
    return CompletedLData(
        character=chi, analytic_conductor_A=chi.conductor,
        gamma_shape=(chi.parity_a, chi.parity_b),
        root_number=complex(_cached_root_number(star)))


# ---------------------------------------------------------------------------
# smoothed-series route

@lru_cache(maxsize=4096)
def _cached_root_number(star: DirichletCharacter) -> mp.mpc:
    with mp.workdps(60):
        return root_number(star, Precision(decimal_digits=50))


@lru_cache(maxsize=20000)
def _weight_block(f: int, b: int, s, prec: Precision):
    """Character-independent weights n^(-s) Gamma(kappa, pi n^2/f),
    kappa = (s + b)/2, truncated where the tail envelope clears the target;
    shared across every character with the same conductor and parity."""
    with prec.ctx():
        s = mp.mpmathify(s)
        kappa = (s + b) / 2
        rek = mp.re(kappa)
        res = mp.re(s)
        base = mp.pi / f
        scale_mag = (mp.mpf(f) / mp.pi) ** rek
        eps = mp.mpf(prec.tail_epsilon) / 100
        akap = abs(kappa)
        nmax = int(mp.sqrt(f * (prec.decimal_digits + 12) * mp.log(10) / mp.pi)
                   + mp.sqrt((2 * akap + 9) * f / mp.pi)) + 8
        weights = []
        for n in range(1, nmax + 1):
            x = base * n * n
            if x > 2 * akap + 8:
                # tail envelope: |Gamma(kappa,x)| <= 2 x^(Re k - 1) e^(-x) here
                env = 2 * x ** (rek - 1) * mp.e ** (-x) * mp.mpf(n) ** (-res)
                if env * scale_mag < eps:
                    break
            weights.append(mp.power(n, -s) * mp.gammainc(kappa, a=x, b=mp.inf))
        else:
            raise AccuracyError(
                f"smoothed series did not converge by n = {nmax} (f={f}, s={s})")
        return base ** (-kappa), tuple(weights)


def _smoothed_half(star: DirichletCharacter, s, prec: Precision) -> mp.mpc:
    """(f/pi)^kappa * sum_n chi(n) n^(-s) Gamma(kappa, pi n^2/f) with
    kappa = (s + b)/2; one half of the completed-L series."""
    f = star.modulus
    with prec.ctx():
        scale, weights = _weight_block(f, star.parity_b, mp.mpmathify(s), prec)
        tbl = star.exponent_table
        order = star.order
        total = mp.mpc(0)
        for i, wgt in enumerate(weights):
            t = tbl[(i + 1) % f]
            if t < 0:
                continue
            if t:
                total += mp.expjpi(mp.mpf(2 * int(t)) / order) * wgt
            else:
                total += wgt
        return scale * total


def _completed_classical(star: DirichletCharacter, s, prec: Precision) -> mp.mpc:
    """Classical completion (f/pi)^((s+b)/2) Gamma((s+b)/2) L(s, chi) for
    primitive chi, assembled from the smoothed halves. Finite at every s
    except the principal-case poles s = 0, 1."""
    with prec.ctx():
        s = mp.mpmathify(s)
        if star.is_principal:
            stot = (_smoothed_half(star, s, prec)
                    + _smoothed_half(star, 1 - s, prec))
            return 1 / (s - 1) - 1 / s + stot
        w = _cached_root_number(star)
        return (_smoothed_half(star, s, prec)
                + w * _smoothed_half(star.conjugate(), 1 - s, prec))


def _euler_correction(chi: DirichletCharacter, star: DirichletCharacter,
                      s) -> mp.mpc:
    """Product of removed Euler factors 1 - chi*(p) p^(-s) over p | q, p nmid f."""
    out = mp.mpc(1)
    for p in sympy.factorint(chi.modulus):
        if star.modulus % p:
            out *= 1 - star.value(p) * mp.power(p, -s)
    return out


def l_value(chi: DirichletCharacter, s,
             prec: Precision = DEFAULT_PRECISION) -> mp.mpc:
    """L(s, chi) by the smoothed series on both sides of the functional
    equation; exact zero at the trivial zeros (reciprocal-gamma kill)."""
    with prec.ctx():
        s = mp.mpmathify(s)
        if chi.is_principal:
            if s == 1:
                raise DomainError("L(s, principal) has a pole at s = 1")
            one = principal_character(1)
            stot = _smoothed_half(one, s, prec) + _smoothed_half(one, 1 - s, prec)
            val = ((stot + 1 / (s - 1)) * mp.pi ** (s / 2) * mp.rgamma(s / 2)
                   - mp.pi ** (s / 2) * mp.rgamma(s / 2 + 1) / 2)
            return val * _euler_correction(chi, principal_character(1), s)
        star = chi.primitive_part()
        lam = _completed_classical(star, s, prec)
        kappa = (s + star.parity_b) / 2
        val = lam * (mp.pi / star.modulus) ** kappa * mp.rgamma(kappa)
        return val * _euler_correction(chi, star, s)


def gamma_factor(chi: DirichletCharacter, s,
                 prec: Precision = DEFAULT_PRECISION) -> mp.mpc:
    """Archimedean factor: {pi^(-(s+1)/2) Gamma((s+1)/2)}^b {pi^(-s/2) Gamma(s/2)}^a."""
    with prec.ctx():
        s = mp.mpmathify(s)
        if chi.parity_b:
            return mp.pi ** (-(s + 1) / 2) * mp.gamma((s + 1) / 2)
        return mp.pi ** (-s / 2) * mp.gamma(s / 2)


def _gamma_pole_at(chi: DirichletCharacter, s) -> bool:
    z = (mp.mpmathify(s) + chi.parity_b) / 2
    return mp.im(z) == 0 and mp.re(z) <= 0 and mp.isint(mp.re(z))


def completed_l(chi: DirichletCharacter, s,
                prec: Precision = DEFAULT_PRECISION) -> mp.mpc:
    """Lambda(s, chi) = A^(s/2) gamma_chi(s) L(s, chi), A = conductor.

    Satisfies Lambda(s, chi) = W(chi) Lambda(1-s, conj chi) for primitive chi.
    """
    with prec.ctx():
        s = mp.mpmathify(s)
        if _gamma_pole_at(chi, s):
            raise DomainError(f"gamma factor has a pole at s = {mp.nstr(s)}")
        if chi.is_principal and s == 1:
            raise DomainError("completed principal L has a pole at s = 1")
        star = chi.primitive_part()
        lam = _completed_classical(star, s, prec)
        # classical completion carries (f/pi)^((s+b)/2); the advertised
        # normalization A^(s/2) gamma_chi(s) differs by f^(-b/2)
        lam *= mp.mpf(star.modulus) ** (-mp.mpf(star.parity_b) / 2)
        return lam * _euler_correction(chi, star, s)


# ---------------------------------------------------------------------------
# reference route (Hurwitz zeta)

def l_value_reference(chi: DirichletCharacter, s,
                      prec: Precision = DEFAULT_PRECISION) -> mp.mpc:
    """Independent evaluator: L(s, chi) = q^(-s) sum_r chi(r) zeta(s, r/q).

    Valid at every s != 1; includes the imprimitivity Euler factors
    automatically since the sum runs over residues mod q.
    """
    with prec.ctx():
        s = mp.mpmathify(s)
        if s == 1:
            raise DomainError("Hurwitz reference route is undefined at s = 1")
        q = chi.modulus
        if q == 1:
            return mp.zeta(s)
        tot = mp.mpc(0)
        for r in chi.value_exponents:
            tot += chi.value(r) * mp.zeta(s, mp.mpf(r) / q)
        return mp.power(q, -s) * tot


def l_log_derivative(chi: DirichletCharacter, s,
                     prec: Precision = DEFAULT_PRECISION) -> mp.mpc:
    """(L'/L)(s, chi) via Hurwitz zeta and its s-derivative."""
    with prec.ctx():
        s = mp.mpmathify(s)
        if s == 1 and chi.is_principal:
            raise DomainError("log derivative has a pole at s = 1")
        q = chi.modulus
        if q == 1:
            return mp.zeta(s, 1, 1) / mp.zeta(s)
        tot = mp.mpc(0)
        totp = mp.mpc(0)
        for r in chi.value_exponents:
            v = chi.value(r)
            a = mp.mpf(r) / q
            tot += v * mp.zeta(s, a)
            totp += v * mp.zeta(s, a, 1)
        if tot == 0:
            raise DomainError(f"L(s, chi) vanishes at s = {mp.nstr(s)}")
        return totp / tot - mp.log(q)


# ---------------------------------------------------------------------------
# log-derivative coefficients

def log_derivative_coefficients(chi: DirichletCharacter, N: int,
                                prec: Precision = DEFAULT_PRECISION
                                ) -> list[tuple[int, mp.mpc]]:
    """Coefficients of -L'/L = sum Lambda_chi(n) n^(-s): chi(p^m) log p at
    prime powers coprime to the modulus, zero elsewhere; n = 1..N."""
    if N < 2:
        raise DomainError(f"need N >= 2, got {N}")
    with prec.ctx():
        out = [(n, mp.mpc(0)) for n in range(1, N + 1)]
        for pp in enumerate_prime_powers(N):
            v = chi.value(pp.value)
            if v != 0:
                out[pp.value - 1] = (pp.value, v * mp.log(pp.p))
        return out


def von_mangoldt_array(chi: DirichletCharacter, N: int) -> np.ndarray:
    """chi(n) Lambda(n) for n = 0..N as complex128 (fast path for big sums)."""
    out = np.zeros(N + 1, dtype=np.complex128)
    chivals = chi.values_float(N)
    for pp in enumerate_prime_powers(N):
        out[pp.value] = chivals[pp.value] * math.log(pp.p)
    return out


# ---------------------------------------------------------------------------
# zero location and certification

def _lambda_entire(star: DirichletCharacter, s, prec: Precision) -> mp.mpc:
    """Entire function whose zeros in the strip 0 <= Re s <= 1 are exactly the
    nontrivial zeros: s(s-1) xi(s) for the principal case, the classical
    completion otherwise. Stable at the rectangle corners s = 0, 1."""
    with prec.ctx():
        s = mp.mpmathify(s)
        if star.is_principal:
            stot = (_smoothed_half(star, s, prec)
                    + _smoothed_half(star, 1 - s, prec))
            # s(s-1) [1/(s-1) - 1/s + S] = 1 + s(s-1) S
            return 1 + s * (s - 1) * stot
        return _completed_classical(star, s, prec)


def _lambda_line(star: DirichletCharacter, t, prec: Precision) -> mp.mpc:
    """Classical completion at s = 1/2 + it via the Hurwitz route (faster on
    the critical line, where no gamma pole can interfere)."""
    with prec.ctx():
        s = mp.mpf("0.5") + mp.mpc(0, 1) * t
        b = star.parity_b
        lam = ((mp.mpf(star.modulus) / mp.pi) ** ((s + b) / 2)
               * mp.gamma((s + b) / 2) * l_value_reference(star, s, prec))
        if star.is_principal:
            lam *= s * (s - 1)
        return lam


def _hardy_z(star: DirichletCharacter, t, w, prec: Precision) -> mp.mpf:
    """Rotated completed function on the line; real up to roundoff."""
    val = w * _lambda_line(star, t, prec)
    if abs(mp.im(val)) > 1e-10 * (1 + abs(val)):
        raise CertificationError(
            f"rotated completion not real at t = {t}: {mp.nstr(val)}")
    return mp.re(val)


def _arg_change_on_edge(fn, a, b, presplit: int) -> float:
    """Accumulated argument change of fn along segment [a, b], tracked through
    presplit points and adaptive bisection (each step must turn < 0.8 pi)."""
    pts = [a + (b - a) * k / presplit for k in range(presplit + 1)]
    vals = [fn(z) for z in pts]
    total = 0.0
    stack = [(pts[i], vals[i], pts[i + 1], vals[i + 1], 0)
             for i in range(presplit)][::-1]
    while stack:
        z0, f0, z1, f1, depth = stack.pop()
        if f0 == 0 or f1 == 0:
            raise CertificationError(f"zero on contour near {mp.nstr(z0)}")
        d = float(mp.arg(f1 / f0))
        if abs(d) <= 0.8 * math.pi:
            total += d
            continue
        if depth >= 26:
            raise CertificationError(
                f"phase tracking stalled near {mp.nstr(z0)} (zero on contour?)")
        zm = (z0 + z1) / 2
        fm = fn(zm)
        stack.append((zm, fm, z1, f1, depth + 1))
        stack.append((z0, f0, zm, fm, depth + 1))
    return total


def _winding_count(star: DirichletCharacter, T, prec: Precision) -> int:
    """Zeros of the completed L inside [0,1] x (0,T) by the argument principle."""
    with prec.ctx():
        fn = lambda s: _lambda_entire(star, s, prec)
        Tm = mp.mpf(T)
        f_ct = max(star.modulus, 1)
        vert = 24 + int(2 * float(Tm) * math.log(f_ct * (float(Tm) + 2)) / math.pi)
        horiz = 16
        corners = [mp.mpc(0, 0), mp.mpc(1, 0), mp.mpc(1, 0) + mp.mpc(0, 1) * Tm,
                   mp.mpc(0, 1) * Tm]
        splits = [horiz, vert, horiz, vert]
        total = 0.0
        for i in range(4):
            a, b = corners[i], corners[(i + 1) % 4]
            total += _arg_change_on_edge(fn, a, b, splits[i])
        w = total / (2 * math.pi)
        k = round(w)
        if abs(w - k) > 0.01:
            raise CertificationError(
                f"winding number {w} is not an integer; contour too coarse")
        return int(k)


def _refine_zero(zfun, t_lo, t_hi, prec: Precision) -> mp.mpf:
    f_lo = zfun(t_lo)
    f_hi = zfun(t_hi)
    for _ in range(14):  # bisection to narrow the bracket
        t_mid = (t_lo + t_hi) / 2
        f_mid = zfun(t_mid)
        if f_mid == 0:
            return t_mid
        if mp.sign(f_mid) == mp.sign(f_lo):
            t_lo, f_lo = t_mid, f_mid
        else:
            t_hi, f_hi = t_mid, f_mid
    t0, t1 = t_lo, t_hi
    f0, f1 = f_lo, f_hi
    for _ in range(60):  # secant finish
        if f1 == f0:
            break
        t2 = t1 - f1 * (t1 - t0) / (f1 - f0)
        if not t_lo - 1e-9 < t2 < t_hi + 1e-9:
            t2 = (t0 + t1) / 2
        f2 = zfun(t2)
        t0, f0, t1, f1 = t1, f1, t2, f2
        if abs(t1 - t0) < mp.mpf(10) ** -16 * (1 + abs(t1)):
            break
    return t1


def zero_scan(chi: DirichletCharacter, T,
              prec: Precision = DEFAULT_PRECISION, *,
              ceiling: float = DEFAULT_SCAN_CEILING) -> list[ZeroDatum]:
    """All zeros with 0 < gamma <= T of L(s, chi), located on the critical
    line and certified against an argument-principle count.

    Imprimitive characters are reduced to their primitive part (same zeros
    in the open strip; the removed Euler factors only vanish on Re s = 0).
    """
    if T > ceiling + 1e-12:
        raise DomainError(f"scan height {T} above the ceiling {ceiling}")
    if T <= 0:
        return []
    star = chi.primitive_part()
    with prec.ctx():
        w = 1 / mp.sqrt(_cached_root_number(star))
        zfun = lambda t: _hardy_z(star, mp.mpf(t), w, prec)
        n_wind = _winding_count(star, T, prec)
        step = 0.2
        gammas: list[mp.mpf] = []
        for _ in range(4):
            gammas = _scan_sign_changes(zfun, T, step, prec)
            if len(gammas) == n_wind:
                break
            step /= 2
        if len(gammas) != n_wind:
            raise CertificationError(
                f"scan located {len(gammas)} zeros but the argument principle "
                f"counts {n_wind} (possible off-line or clustered zeros)")
        return [ZeroDatum(beta=0.5, gamma=float(g), precision_digits=12,
                          on_critical_line=True, source="computed")
                for g in gammas]


def _scan_sign_changes(zfun, T, step, prec: Precision) -> list[mp.mpf]:
    n_steps = int(mp.ceil(mp.mpf(T) / step))
    ts = [mp.mpf(T) * k / n_steps for k in range(n_steps + 1)]
    vals = [zfun(t) for t in ts]
    out = []
    for i in range(n_steps):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0:
            if ts[i] > 0:
                out.append(ts[i])
            continue
        if mp.sign(v0) != mp.sign(v1) and v1 != 0:
            g = _refine_zero(zfun, ts[i], ts[i + 1], prec)
            if 0 < g <= T:
                out.append(g)
    if vals[-1] == 0:
        out.append(ts[-1])
    return out


def certify_zero_count(chi: DirichletCharacter, zeros, T,
                       prec: Precision = DEFAULT_PRECISION) -> tuple[int, int]:
    """Compare a zero list against the winding count up to height T."""
    star = chi.primitive_part()
    listed = sum(1 for z in zeros if 0 < z.gamma <= T)
    winding = _winding_count(star, T, prec)
    if listed != winding:
        raise CertificationError(
            f"zero list carries {listed} zeros below {T}, winding says {winding}")
    return listed, winding


def conjugate_closure(zeros_chi, zeros_conj) -> list[ZeroDatum]:
    """Full-height zero list for chi: positive-gamma zeros of chi plus the
    reflections (beta, -gamma) of the conjugate character's zeros."""
    out = list(zeros_chi)
    out.extend(ZeroDatum(beta=z.beta, gamma=-z.gamma,
                         precision_digits=z.precision_digits,
                         on_critical_line=z.on_critical_line, source=z.source)
               for z in zeros_conj)
    return sorted(out, key=lambda z: z.gamma)


def zero_count_window(zeros, t, certified_height=None) -> int:
    """N(t): zeros with |gamma - t| <= 1 in a conjugate-closed list."""
    if certified_height is None:
        certified_height = max((abs(z.gamma) for z in zeros), default=0.0)
    if abs(t) + 1 > certified_height + 1e-12:
        raise CoverageError(
            f"window at t = {t} needs zeros to height {abs(t) + 1}, "
            f"have {certified_height}")
    return sum(1 for z in zeros if abs(z.gamma - t) <= 1)


def zero_free_region_audit(chi: DirichletCharacter, zeros, c2: float) -> dict:
    """Check computed zeros against the classical-region shape
    beta < 1 - 1/(c2 (log A + log(|gamma|+2))) and report the slack.

    A zero at (beta, gamma) violates the region exactly when
    c2 <= 1/(ell(gamma) (1 - beta)); critical_c2 is the largest such bound
    over the data, so the region statement holds for every c2 above it.
    """
    if c2 <= 0:
        raise DomainError("c2 must be positive")
    A = max(chi.conductor, 1)
    log_a = math.log(A)

    def ell(gamma: float) -> float:
        return log_a + math.log(abs(gamma) + 2)

    violations = []
    critical = 0.0
    for z in zeros:
        thr = 1 - 1 / (c2 * ell(z.gamma))
        if z.beta >= thr:
            violations.append({"beta": z.beta, "gamma": z.gamma,
                               "threshold": thr})
        critical = max(critical, 1 / (ell(z.gamma) * (1 - z.beta)))
    real_box = [z for z in zeros if z.gamma == 0
                and z.beta >= 1 - 1 / (c2 * ell(0.0))]
    return {
        "c2": c2,
        "zeros_checked": len(zeros),
        "violations": violations,
        "violation_count": len(violations),
        "critical_c2": critical if zeros else None,
        "real_zeros_in_box": len(real_box),
        "at_most_one_real_zero": len(real_box) <= 1,
    }


# ---------------------------------------------------------------------------
# zero cache (plain text, append-only, advisory single-writer lock)

@contextmanager
def _cache_lock(path: str, retries: int = 200, wait: float = 0.05):
    lock = path + ".lock"
    fd = None
    for _ in range(retries):
        try:
            fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            break
        except FileExistsError:
            time.sleep(wait)
    if fd is None:
        raise UsageError(f"zero cache {path} is locked by another writer")
    try:
        yield
    finally:
        os.close(fd)
        os.unlink(lock)


def zero_cache_append(path: str, chi: DirichletCharacter, zeros,
                      certified_height: float) -> int:
    """Append zero records; one line per zero: key, gamma, height, digits."""
    key = chi.key()
    with _cache_lock(path):
        with open(path, "a", encoding="ascii") as fh:
            for z in zeros:
                fh.write(f"{key}\t{z.gamma:.17g}\t{certified_height:.6g}"
                         f"\t{z.precision_digits}\n")
    return len(list(zeros))


def zero_cache_load(path: str, chi: DirichletCharacter
                    ) -> tuple[list[ZeroDatum], float]:
    """Read this character's zeros back; returns (zeros, min cert height).

    Loaded zeros carry source='imported'; callers must re-certify with
    certify_zero_count before trusting the inventory.
    """
    key = chi.key()
    zeros: list[ZeroDatum] = []
    height = math.inf
    if not os.path.exists(path):
        return [], 0.0
    with open(path, encoding="ascii") as fh:
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4 or parts[0] != key:
                continue
            zeros.append(ZeroDatum(beta=0.5, gamma=float(parts[1]),
                                   precision_digits=int(parts[3]),
                                   on_critical_line=True, source="imported"))
            height = min(height, float(parts[2]))
    if not zeros:
        return [], 0.0
    return sorted(zeros, key=lambda z: z.gamma), height
