"""High-precision arithmetic primitives shared by every module.

Wraps mpmath's gamma family behind explicit domain/precision contracts and
provides certified prime and prime-power enumeration for the arithmetic sides
of the identities checked elsewhere in the package.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import mpmath as mp
import numpy as np

GUARD_DIGITS = 10  # extra working digits so rounding never eats the contract


# ---------------------------------------------------------------------------
# error hierarchy

class ToolkitError(Exception):
    """Base class for package errors."""


class DomainError(ToolkitError, ValueError):
    """Input outside an operation's mathematical domain."""


class AccuracyError(ToolkitError, ArithmeticError):
    """Requested tolerance could not be certified."""

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved  # best error estimate available, if any


class ConstructionError(ToolkitError, ValueError):
    """Arguments do not define a valid object."""


class CertificationError(ToolkitError, RuntimeError):
    """A completeness or count certificate failed."""


class IdentityViolationError(ToolkitError, RuntimeError):
    """Independently computed sides of an identity disagree beyond tolerance."""


class CoverageError(ToolkitError, RuntimeError):
    """A sweep could not cover its promised range."""


class CapExhaustedError(ToolkitError, RuntimeError):
    """A bounded search hit its cap without finding the promised witness."""


class UsageError(ToolkitError, ValueError):
    """Malformed CLI or config usage."""


# ---------------------------------------------------------------------------
# precision plumbing

@dataclass(frozen=True)
class Precision:
    """Working precision: decimal digits plus a series-truncation target.

    tail_epsilon defaults to (and may not exceed) 10^(2 - decimal_digits).
    """

    decimal_digits: int = 30
    tail_epsilon: float = field(default=0.0)

    def __post_init__(self):
        if self.decimal_digits < 15:
            raise DomainError(
                f"decimal_digits must be >= 15, got {self.decimal_digits}")
        cap = 10.0 ** (2 - self.decimal_digits)
        if self.tail_epsilon == 0.0:
            object.__setattr__(self, "tail_epsilon", cap)
        elif not 0.0 < self.tail_epsilon <= cap * (1.0 + 1e-12):
            raise DomainError(
                f"tail_epsilon must lie in (0, 10^(2-{self.decimal_digits})], "
                f"got {self.tail_epsilon}")

    def doubled(self) -> "Precision":
        return Precision(decimal_digits=2 * self.decimal_digits)

    @contextmanager
    def ctx(self) -> Iterator[None]:
        """mpmath working-precision context with guard digits."""
        with mp.workdps(self.decimal_digits + GUARD_DIGITS):
            yield


DEFAULT_PRECISION = Precision()


# ---------------------------------------------------------------------------
# gamma family

def log_gamma(s: complex, prec: Precision = DEFAULT_PRECISION) -> mp.mpc:
    """Principal branch of log Gamma(s).

    Continuous on C minus the cut (-inf, 0]; vertical contours in this
    package never cross the cut (they avoid t = 0 at sigma < 0), so no
    extra unwinding layer is carried.
    """
    with prec.ctx():
        z = mp.mpmathify(s)
        if mp.im(z) == 0:
            x = mp.re(z)
            if x <= 0 and mp.isint(x):
                raise DomainError(f"log_gamma: pole of Gamma at s = {int(x)}")
        return mp.loggamma(z)


def incomplete_gamma_upper(s: complex, x, prec: Precision = DEFAULT_PRECISION) -> mp.mpc:
    """Upper incomplete gamma integral of t^(s-1) e^(-t) over [x, inf), x > 0."""
    if not x > 0:
        raise DomainError(f"incomplete_gamma_upper requires x > 0, got x = {x}")
    with prec.ctx():
        try:
            return mp.gammainc(mp.mpmathify(s), a=mp.mpf(x), b=mp.inf)
        except (mp.libmp.NoConvergence, ValueError) as exc:
            raise AccuracyError(
                f"incomplete gamma did not converge for s={s}, x={x}: {exc}",
                achieved=None) from exc


def gamma_magnitude_main_term(sigma: float, t: float) -> mp.mpf:
    """Vertical-line Stirling envelope sqrt(2 pi) e^(-pi|t|/2) |t|^(sigma-1/2).

    Leading term of |Gamma(sigma+it)| for |t| >= 5; accuracy audits fit the
    1/(1+|t|) correction against this.
    """
    if t == 0:
        raise DomainError("main term is for nonzero imaginary part")
    at = mp.mpf(abs(t))
    return mp.sqrt(2 * mp.pi) * mp.e ** (-mp.pi * at / 2) * at ** (mp.mpf(sigma) - mp.mpf(1) / 2)


# ---------------------------------------------------------------------------
# primes and prime powers

# Sinclair's 7-witness set: deterministic for all n < 2^64.
_MR_BASES = (2, 325, 9375, 28178, 450775, 9780504, 1795265022)
_MR_LIMIT = 1 << 64
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic primality test (Miller-Rabin, exact below 2^64)."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n >= _MR_LIMIT:  # desk scale never reaches this; delegate if it does
        import sympy

        return bool(sympy.isprime(n))
    d = n - 1
    r = (d & -d).bit_length() - 1
    d >>= r
    for a in _MR_BASES:
        a %= n
        if a == 0:
            continue
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimePower:
    """p^m with certified prime base; value is always exactly p**m."""

    p: int
    m: int
    value: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ConstructionError(f"exponent must be >= 1, got {self.m}")
        if not is_prime(self.p):
            raise ConstructionError(f"base {self.p} is not prime")
        v = self.p ** self.m
        if self.value == 0:
            object.__setattr__(self, "value", v)
        elif self.value != v:
            raise ConstructionError(
                f"value {self.value} != {self.p}^{self.m} = {v}")


def sieve_primes(limit: int) -> np.ndarray:
    """All primes <= limit, ascending (int64 array)."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, int(limit ** 0.5) + 1):
        if mask[p]:
            mask[p * p:: p] = False
    return np.nonzero(mask)[0].astype(np.int64)


@lru_cache(maxsize=64)
def _prime_powers_cached(limit: int, rational_prime_only: bool) -> tuple[PrimePower, ...]:
    primes = sieve_primes(limit)
    out = [PrimePower(int(p), 1) for p in primes]
    if not rational_prime_only:
        for p in primes:
            q = int(p)
            if q * q > limit:
                break
            v, m = q * q, 2
            while v <= limit:
                out.append(PrimePower(q, m, v))
                v *= q
                m += 1
    out.sort(key=lambda pp: pp.value)
    return tuple(out)


def enumerate_prime_powers(limit: int, rational_prime_only: bool = False,
                           lo: int = 2) -> tuple[PrimePower, ...]:
    """All prime powers lo <= p^m <= limit in increasing value order.

    rational_prime_only keeps m = 1 entries. lo supports disjoint-range
    partitioning for parallel callers; results for different (lo, limit]
    windows never overlap.
    """
    if limit < 2:
        return ()
    full = _prime_powers_cached(int(limit), bool(rational_prime_only))
    if lo <= 2:
        return full
    return tuple(pp for pp in full if pp.value >= lo)
