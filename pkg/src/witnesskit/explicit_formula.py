"""Prime-zero explicit-formula machinery for Dirichlet L-functions.

Three independently computed representations of the same weighted prime sum
J(chi) are kept strictly separate so that their agreement is evidence:

* prime_side_J: the closed-form transform weights summed over prime powers;
* contour_J: numerical Mellin inversion on a vertical line, evaluated
  termwise with a Filon-type quadrature (exact oscillatory moments per
  panel, exact incomplete-gamma tails beyond the window);
* zero_side_J: the truncated-rectangle residue identity (pole, trivial-zero
  and nontrivial-zero terms) plus numerically integrated boundary edges.

The module also carries the class-restricted sums over an abelian extension
(theta-weighted versus character-combined), the ramified/excluded/tail sum
breakdown, the exceptional-zero surrogate, the zero-repulsion abscissa, and
the final-estimation term tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from witnesskit.characters import AbelianExtension, DirichletCharacter, frobenius_data
from witnesskit.core import (
    DEFAULT_PRECISION,
    AccuracyError,
    CertificationError,
    ConstructionError,
    DomainError,
    IdentityViolationError,
    Precision,
    sieve_primes,
)
from witnesskit.lfunctions import (
    ZeroDatum,
    certify_zero_count,
    l_log_derivative,
)

# float-backend quadrature cannot certify below this
QUAD_FLOOR = 1e-9


# ---------------------------------------------------------------------------
# kernels

@dataclass(frozen=True)
class KernelParams:
    """Mellin kernel selector: K1 is the squared-difference kernel on (x, y),
    K2 the Gaussian-type kernel x^(s^2+s)."""

    kind: str
    x: float
    y: float | None = None

    def __post_init__(self):
        if self.kind not in ("K1", "K2"):
            raise ConstructionError(f"unknown kernel kind {self.kind!r}")
        if not self.x > 1:
            raise ConstructionError(f"need x > 1, got {self.x}")
        if self.kind == "K1":
            if self.y is None or not self.y > self.x:
                raise ConstructionError(f"K1 needs y > x, got y = {self.y}")
        elif self.y is not None:
            raise ConstructionError("K2 takes no y")


def eval_kernel(params: KernelParams, s) -> mp.mpc:
    """k1(s) = ((y^(s-1) - x^(s-1))/(s-1))^2 with the removable point at
    s = 1 evaluated as its limit; k2(s) = x^(s^2+s)."""
    s = mp.mpmathify(s)
    if params.kind == "K2":
        return mp.e ** ((s * s + s) * mp.log(params.x))
    x, y = mp.mpf(params.x), mp.mpf(params.y)
    if s == 1:
        return mp.log(y / x) ** 2
    return ((y ** (s - 1) - x ** (s - 1)) / (s - 1)) ** 2


def kernel_hat_array(params: KernelParams, u: np.ndarray) -> np.ndarray:
    """Closed-form transform weights; K1 is piecewise with exact zeros
    outside [x^2, y^2], K2 is a Gaussian in log u."""
    u = np.asarray(u, dtype=np.float64)
    if np.any(u <= 0):
        raise DomainError("transform weight needs u > 0")
    if params.kind == "K2":
        lx = math.log(params.x)
        return np.exp(-np.log(u / params.x) ** 2 / (4 * lx)) / math.sqrt(4 * math.pi * lx)
    x2 = params.x * params.x
    y2 = params.y * params.y
    xy = params.x * params.y
    out = np.zeros_like(u)
    lo = (u > x2) & (u <= xy)
    hi = (u > xy) & (u < y2)
    out[lo] = np.log(u[lo] / x2) / u[lo]
    out[hi] = np.log(y2 / u[hi]) / u[hi]
    return out


def eval_kernel_hat(params: KernelParams, u: float) -> float:
    return float(kernel_hat_array(params, np.array([u]))[0])


def kernel_at_one(params: KernelParams) -> float:
    if params.kind == "K2":
        return params.x ** 2
    return math.log(params.y / params.x) ** 2


def kernel_at_zero(params: KernelParams) -> float:
    if params.kind == "K2":
        return 1.0
    return (1 / params.x - 1 / params.y) ** 2


# ---------------------------------------------------------------------------
# Filon-type vertical-line quadrature
#
# Everything reduces to W(theta) = int_{-T}^{T} E(t) e^(i theta t) dt plus an
# exact tail. Panels carry a quadratic interpolant of E; the oscillatory
# moments int xi^k e^(i w xi) dxi are exact, so panel density never needs to
# resolve the oscillation, only the envelope E.

def _filon_moments(w: np.ndarray):
    """M_k(w) = int_{-1}^{1} xi^k e^(i w xi) dxi for k = 0, 1, 2."""
    w = np.asarray(w, dtype=np.float64)
    small = np.abs(w) < 0.05
    ws = np.where(small, 1.0, w)  # safe denominator
    sin, cos = np.sin(ws), np.cos(ws)
    m0 = 2 * sin / ws
    m1 = 2j * (sin - ws * cos) / ws ** 2
    m2 = 2 * ((ws * ws - 2) * sin + 2 * ws * cos) / ws ** 3
    w2 = w * w
    m0_t = 2 * (1 - w2 / 6 + w2 * w2 / 120)
    m1_t = 2j * w * (1.0 / 3 - w2 / 30 + w2 * w2 / 840)
    m2_t = 2 * (1.0 / 3 - w2 / 10 + w2 * w2 / 168)
    return (np.where(small, m0_t, m0), np.where(small, m1_t, m1),
            np.where(small, m2_t, m2))


@dataclass(frozen=True)
class _PanelSet:
    """Half-line [0, T] panel layout with envelope values at the nodes."""

    mid: np.ndarray      # panel midpoints
    h: np.ndarray        # panel widths
    e_lo: np.ndarray     # envelope at left endpoints
    e_mid: np.ndarray
    e_hi: np.ndarray


def _build_panels(envelope, T: float, density: int, log_from: float = 1.0) -> _PanelSet:
    """Uniform panels on [0, min(1, T)], log-spaced panels beyond."""
    n_uni = 16 * density
    edges = [np.linspace(0.0, min(log_from, T), n_uni + 1)]
    if T > log_from:
        n_log = 96 * density
        edges.append(log_from * (T / log_from) ** (np.arange(1, n_log + 1) / n_log))
    grid = np.concatenate(edges)
    lo, hi = grid[:-1], grid[1:]
    mid = (lo + hi) / 2
    return _PanelSet(mid=mid, h=hi - lo, e_lo=envelope(lo),
                     e_mid=envelope(mid), e_hi=envelope(hi))


def _filon_window(theta: np.ndarray, panels: _PanelSet) -> np.ndarray:
    """int_0^T E(t) e^(i theta t) dt for each theta (vectorized, chunked)."""
    theta = np.asarray(theta, dtype=np.float64)
    out = np.empty(theta.shape, dtype=np.complex128)
    chunk = max(1, 4_000_000 // max(panels.mid.size, 1))
    for start in range(0, theta.size, chunk):
        th = theta[start:start + chunk, None]
        w = th * panels.h[None, :] / 2
        m0, m1, m2 = _filon_moments(w)
        a_lo = (m2 - m1) / 2
        a_mid = m0 - m2
        a_hi = (m2 + m1) / 2
        vals = (panels.e_lo[None, :] * a_lo + panels.e_mid[None, :] * a_mid
                + panels.e_hi[None, :] * a_hi)
        phase = np.exp(1j * th * panels.mid[None, :])
        out[start:start + chunk] = np.sum((panels.h[None, :] / 2) * phase * vals, axis=1)
    return out


def _rational_tail(theta: float, c: float, T: float) -> complex:
    """int_T^inf e^(i theta t) / (c + i t)^2 dt, exactly.

    For theta != 0 substitute v = -theta (c + i t); rotating the ray onto
    the incomplete-gamma path gives i theta e^(-theta c) Gamma(-1, v0) with
    v0 = -theta (c + i T), and Gamma(-1, z) = e^(-z)/z - E_1(z). v0 never
    touches the E_1 branch cut because T > 0 keeps it off the real axis.
    """
    if theta == 0.0:
        return complex(-1j / (c + 1j * T))
    z = mp.mpc(-theta * c, -theta * T)
    gamma_m1 = mp.e ** (-z) / z - mp.e1(z)
    return complex(1j * theta * mp.e ** (-theta * c) * gamma_m1)


def _window_plus_tails(theta: np.ndarray, panels: _PanelSet, c: float,
                       T: float) -> np.ndarray:
    """(1/2pi) int_{-inf}^{inf} E(t) e^(i theta t) dt for the rational
    envelope E(t) = 1/(c+it)^2: Filon window on [-T, T] (folded to the half
    line by conjugate symmetry) plus the exact tails."""
    win = _filon_window(theta, panels)
    tails = np.array([_rational_tail(float(th), c, T) for th in theta])
    return (win.real + tails.real) / math.pi


# ---------------------------------------------------------------------------
# termwise Mellin weights

def _mellin_weights_k1(params: KernelParams, n_vals: np.ndarray, a: float,
                       density: int, T: float = 36.0) -> np.ndarray:
    """V(n) = (1/2pi) int k1(a+it) n^(-a-it) dt via the three-exponential
    split k1(s) = sum_m c_m e^(omega_m (s-1)) / (s-1)^2."""
    x, y = params.x, params.y
    omegas = np.array([2 * math.log(x), math.log(x * y), 2 * math.log(y)])
    coefs = np.array([1.0, -2.0, 1.0])
    c = a - 1.0

    def envelope(t):
        return 1.0 / (c + 1j * t) ** 2

    panels = _build_panels(envelope, T, density)
    logs = np.log(n_vals.astype(np.float64))
    out = np.zeros(n_vals.size, dtype=np.float64)
    for cm, om in zip(coefs, omegas):
        theta = om - logs
        out += cm * math.exp(c * om) * _window_plus_tails(theta, panels, c, T)
    return out * n_vals.astype(np.float64) ** (-a)


def _uniform_panels(envelope, T: float, n_panels: int) -> _PanelSet:
    grid = np.linspace(0.0, T, n_panels + 1)
    lo, hi = grid[:-1], grid[1:]
    mid = (lo + hi) / 2
    return _PanelSet(mid=mid, h=hi - lo, e_lo=envelope(lo),
                     e_mid=envelope(mid), e_hi=envelope(hi))


def _cubic_interp(xg: np.ndarray, yg: np.ndarray, x: np.ndarray) -> np.ndarray:
    """4-point Lagrange interpolation on a uniform grid (complex values)."""
    h = xg[1] - xg[0]
    idx = np.clip(((x - xg[0]) / h).astype(np.int64), 1, xg.size - 3)
    s = (x - xg[idx]) / h  # in [0, 1] away from the clamped ends
    ym1, y0, y1, y2 = yg[idx - 1], yg[idx], yg[idx + 1], yg[idx + 2]
    return (ym1 * (-s * (s - 1) * (s - 2) / 6)
            + y0 * ((s + 1) * (s - 1) * (s - 2) / 2)
            + y1 * (-(s + 1) * s * (s - 2) / 2)
            + y2 * ((s + 1) * s * (s - 1) / 6))


def _mellin_weights_k2(params: KernelParams, n_vals: np.ndarray, a: float,
                       density: int, eps: float) -> np.ndarray:
    """V(n) for the Gaussian kernel: window quadrature only; the envelope
    x^(-t^2 log x) makes the discarded tail provably below eps.

    The window integral is a smooth function of theta = (2a+1) log x - log n,
    so it is evaluated on a dense uniform theta grid and interpolated; this
    keeps million-term sums affordable without touching accuracy.
    """
    lx = math.log(params.x)
    pref = params.x ** (a * a + a)
    T = math.sqrt(max(math.log(100 * pref / eps), 1.0) / lx)

    def envelope(t):
        return np.exp(-t * t * lx) + 0j

    panels = _uniform_panels(envelope, T, 256 * density)
    theta = (2 * a + 1) * lx - np.log(n_vals.astype(np.float64))
    if theta.size <= 64:
        win = _filon_window(theta, panels)
    else:
        t_lo, t_hi = float(theta.min()), float(theta.max())
        pad = max(1e-6, (t_hi - t_lo) * 1e-3)
        grid = np.linspace(t_lo - pad, t_hi + pad, 4096)
        win = _cubic_interp(grid, _filon_window(grid, panels), theta)
    return pref * n_vals.astype(np.float64) ** (-a) * win.real / math.pi


def _mellin_weights(params: KernelParams, n_vals: np.ndarray, a: float,
                    density: int, eps: float) -> np.ndarray:
    if params.kind == "K1":
        return _mellin_weights_k1(params, n_vals, a, density)
    return _mellin_weights_k2(params, n_vals, a, density, eps)


def mellin_check(params: KernelParams, u: float,
                 prec: Precision = DEFAULT_PRECISION) -> float:
    """|numerical vertical-line inversion - closed-form weight| at u."""
    if u <= 0:
        raise DomainError("need u > 0")
    eps = max(float(prec.tail_epsilon), QUAD_FLOOR)
    a = 2.0 if params.kind == "K1" else 1.25
    vals = np.array([float(u)])
    prev = None
    density = 1
    while density <= 32:
        cur = _mellin_weights(params, vals, a, density, eps)[0]
        if prev is not None and abs(cur - prev) < eps / 10:
            return abs(cur - eval_kernel_hat(params, u))
        prev = cur
        density *= 2
    raise AccuracyError(
        f"inversion quadrature stalled at u = {u}", achieved=abs(cur - prev))


# ---------------------------------------------------------------------------
# prime-power enumeration (array form; the dataclass enumerator in core is
# too heavy for the multi-million cutoffs the Gaussian kernel needs)

def _prime_power_arrays(limit: int):
    """(values, primes, exponents, log p) for all prime powers <= limit."""
    if limit < 2:
        z = np.empty(0, dtype=np.int64)
        return z, z, z, np.empty(0, dtype=np.float64)
    primes = sieve_primes(int(limit))
    vals = [primes]
    ps = [primes]
    ms = [np.ones(primes.size, dtype=np.int64)]
    m = 2
    while 2 ** m <= limit:
        base = primes[primes <= int(limit ** (1.0 / m)) + 1]
        pw = base.astype(object) ** m  # object dtype dodges int64 overflow
        keep = np.array([v <= limit for v in pw])
        if keep.any():
            vals.append(pw[keep].astype(np.int64))
            ps.append(base[keep])
            ms.append(np.full(int(keep.sum()), m, dtype=np.int64))
        m += 1
    values = np.concatenate(vals)
    order = np.argsort(values, kind="stable")
    primes_sorted = np.concatenate(ps)[order]
    return (values[order], primes_sorted, np.concatenate(ms)[order],
            np.log(primes_sorted.astype(np.float64)))


def _chi_at(chi: DirichletCharacter, n_vals: np.ndarray) -> np.ndarray:
    table = chi.values_float(chi.modulus)
    return table[n_vals % chi.modulus]


def recommended_cutoff(params: KernelParams, tail_eps: float = 1e-9) -> int:
    """Smallest prime-power cutoff whose neglected tail is below tail_eps.

    K1 weights vanish identically past y^2. For K2 the Gaussian weight gives
    sum_{n > C} Lambda(n) khat(n) < eps once log C > 3 log x +
    2 sqrt(log x * log(10 x^2 / eps)).
    """
    if params.kind == "K1":
        return int(math.ceil(params.y ** 2))
    lx = math.log(params.x)
    depth = math.log(max(10 * params.x ** 2 / tail_eps, 10.0))
    return int(math.ceil(math.exp(3 * lx + 2 * math.sqrt(lx * depth)))) + 1


def prime_side_J(chi: DirichletCharacter, params: KernelParams, cutoff: int,
                 prec: Precision = DEFAULT_PRECISION) -> complex:
    """sum over prime powers p^m <= cutoff of chi(p^m) log p * khat(p^m)."""
    eps = max(float(prec.tail_epsilon), QUAD_FLOOR)
    need = recommended_cutoff(params, eps)
    if cutoff < need:
        raise DomainError(
            f"cutoff {cutoff} is below the kernel support bound {need}")
    vals, _, _, logs = _prime_power_arrays(int(cutoff))
    if vals.size == 0:
        return 0.0 + 0.0j
    weights = kernel_hat_array(params, vals.astype(np.float64))
    return complex(np.sum(_chi_at(chi, vals) * logs * weights))


# ---------------------------------------------------------------------------
# contour side

def _contour_cutoff_k2(params: KernelParams, a: float, eps: float) -> int:
    # line-shift bound: |V(n)| has a Gaussian peak at log n = (2a+1) log x
    lx = math.log(params.x)
    pref = params.x ** (a * a + a)
    depth = math.log(max(10 * pref / eps, 10.0))
    return int(math.ceil(math.exp((2 * a + 1) * lx + 2 * math.sqrt(lx * depth)))) + 1


def contour_J(chi: DirichletCharacter, params: KernelParams,
              prec: Precision = DEFAULT_PRECISION) -> complex:
    """-(1/2 pi i) int over a vertical line in the absolute-convergence
    half plane of (L'/L)(s, chi) k(s) ds, termwise: each Dirichlet
    coefficient is paired with its numerically inverted Mellin weight.

    The weights come from Filon quadrature of the line integral, never from
    the closed-form transform, so agreement with prime_side_J is a real
    two-route check.
    """
    eps = max(float(prec.tail_epsilon), QUAD_FLOOR)
    if params.kind == "K1":
        a = 2.0
        # shifting the line rightward kills every term past y^2
        cutoff = int(math.ceil(params.y ** 2))
    else:
        a = 1.25
        cutoff = _contour_cutoff_k2(params, a, eps)
    vals, _, _, logs = _prime_power_arrays(cutoff)
    if vals.size == 0:
        return 0.0 + 0.0j
    coeffs = _chi_at(chi, vals) * logs
    prev = None
    density = 1
    while density <= 32:
        weights = _mellin_weights(params, vals, a, density, eps)
        cur = complex(np.sum(coeffs * weights))
        if prev is not None and abs(cur - prev) < eps / 10:
            return cur
        prev = cur
        density *= 2
    raise AccuracyError("contour quadrature did not stabilize",
                        achieved=abs(cur - prev))


# ---------------------------------------------------------------------------
# zero side

@dataclass(frozen=True)
class ZeroSideResult:
    """Truncated-rectangle accounting of the contour integral.

    value = residue terms - zero sum + integrated boundary edges + the
    right-edge remainder beyond the truncation height. boundary_magnitude is
    the total absolute size of the numerically integrated edges, i.e. the
    realized error term of the truncated identity.
    """

    value: complex
    pole_term: float
    trivial_term: float
    zero_sum: complex
    boundary_top: complex
    boundary_left: complex
    boundary_bottom: complex
    right_tail: complex
    boundary_magnitude: float
    zeros_used: int


def _edge_quadrature(g, s_from: complex, s_to: complex, eps: float,
                     n0: int = 64) -> complex:
    """(1/2 pi i) int of g along a straight segment, by iterated-trapezoid
    refinement with Richardson extrapolation on the halving sequence."""
    length = abs(s_to - s_from)
    n = max(n0, int(8 * length))

    def sample(k):
        taus = np.arange(k + 1) / k
        return [g(s_from + (s_to - s_from) * t) for t in taus]

    vals = sample(n)
    t_prev = (sum(vals) - (vals[0] + vals[-1]) / 2) / n
    rows = [[t_prev]]
    for _ in range(10):
        n *= 2
        taus = (np.arange(n // 2) * 2 + 1) / n
        new = sum(g(s_from + (s_to - s_from) * t) for t in taus)
        t_cur = rows[-1][0] / 2 + new / n
        row = [t_cur]
        for m, prior in enumerate(rows[-1], start=1):
            row.append(row[-1] + (row[-1] - prior) / (4 ** m - 1))
        if abs(row[-1] - rows[-1][-1]) < eps / 10:
            rows.append(row)
            break
        rows.append(row)
    else:
        raise AccuracyError("edge quadrature did not stabilize",
                            achieved=abs(rows[-1][-1] - rows[-2][-1]))
    return rows[-1][-1] * (s_to - s_from) / (2j * math.pi)


def zero_side_J(chi: DirichletCharacter, params: KernelParams,
                zeros, T: float,
                prec: Precision = DEFAULT_PRECISION,
                quad_epsilon: float = 1e-9,
                certify: bool = True) -> ZeroSideResult:
    """Rectangle form of the contour integral over [-1/2, 2] x [-T, T].

    Residues inside: k(1) for the principal character's pole, -k(0) for an
    even nonprincipal character's trivial zero, -k(rho) for each nontrivial
    zero with |gamma| < T. The top, left and bottom edges are integrated
    numerically. The right-edge remainder past height T resums, by shifting
    the line to the right, to the closed-form prime sum minus the integrated
    right-edge window; termwise tail formulas are useless here because the
    un-resummed n^(-2) mass converges far too slowly. For K2 the remainder
    is below x^6 e^(-T^2 log x) and is dropped. zeros must cover every zero
    with |gamma| < T on both sides of the real axis.
    """
    if chi.conductor != chi.modulus:
        # removed Euler factors put zeros on Re s = 0 inside the rectangle
        raise DomainError("zero_side_J needs a primitive character")
    star = chi
    if certify:
        upper = [z for z in zeros if z.gamma > 0]
        lower = [ZeroDatum(z.beta, -z.gamma, z.precision_digits,
                           z.on_critical_line, z.source)
                 for z in zeros if z.gamma < 0]
        certify_zero_count(star, upper, T, prec)
        certify_zero_count(star.conjugate(), lower, T, prec)

    delta = 1 if star.is_principal else 0
    a_triv = star.parity_a * (1 - delta)
    pole_term = delta * kernel_at_one(params)
    trivial_term = -a_triv * kernel_at_zero(params)
    zero_sum = complex(sum(
        complex(eval_kernel(params, mp.mpc(z.beta, z.gamma)))
        for z in zeros if abs(z.gamma) < T))

    lprec = Precision(decimal_digits=16)

    def integrand(s):
        return complex(l_log_derivative(star, mp.mpc(s.real, s.imag), lprec)
                       * eval_kernel(params, mp.mpc(s.real, s.imag)))

    eps = max(quad_epsilon, QUAD_FLOOR)
    top = _edge_quadrature(integrand, 2 + 1j * T, -0.5 + 1j * T, eps)
    left = _edge_quadrature(integrand, -0.5 + 1j * T, -0.5 - 1j * T, eps)
    bottom = _edge_quadrature(integrand, -0.5 - 1j * T, 2 - 1j * T, eps)

    if params.kind == "K1":
        window = _edge_quadrature(integrand, 2 - 1j * T, 2 + 1j * T, eps)
        exact = prime_side_J(star, params, int(math.ceil(params.y ** 2)), prec)
        right_tail = exact + window
    else:
        # Gaussian envelope: |k2(2+it)| <= x^6 e^(-T^2 log x), negligible
        right_tail = 0.0 + 0.0j

    value = (pole_term + trivial_term - zero_sum + top + left + bottom
             + right_tail)
    return ZeroSideResult(
        value=value, pole_term=pole_term, trivial_term=trivial_term,
        zero_sum=zero_sum, boundary_top=top, boundary_left=left,
        boundary_bottom=bottom, right_tail=right_tail,
        boundary_magnitude=abs(top) + abs(left) + abs(bottom) + abs(right_tail),
        zeros_used=sum(1 for z in zeros if abs(z.gamma) < T))


# ---------------------------------------------------------------------------
# class-restricted sums over an abelian extension

@dataclass(frozen=True)
class ClassSumResult:
    theta_side: float
    character_side: float
    difference: float


def _theta_weight(ext: AbelianExtension, frob_cache: dict, cls: int,
                  p: int, m: int) -> float:
    """Chebotarev-style weight: at unramified p, 1 exactly when Frobenius^m
    lands in the class; at ramified p, the fraction of inertia that drags
    cls * Frobenius^-m into the inertia image."""
    n = ext.conductor_n
    if p not in frob_cache:
        frob_cache[p] = frobenius_data(ext, p)
    inertia, frob = frob_cache[p]
    r = pow(frob, m, n)
    r_inv = pow(r, -1, n)
    if ext.class_of[(cls * r_inv) % n] in inertia:
        return 1.0 / len(inertia)
    return 0.0


def class_sum_I(ext: AbelianExtension, cls: int, params: KernelParams,
                cutoff: int, prec: Precision = DEFAULT_PRECISION,
                tolerance: float = 1e-8) -> ClassSumResult:
    """Weighted prime sum restricted to a Galois class, two ways.

    theta side: sum over prime powers of theta(p^m) log p khat(p^m) with the
    Frobenius/inertia weight above. character side: (1/|G|) sum over the
    dual characters of conj(chi(cls)) prime_side_J(primitive part). The two
    must agree; disagreement beyond tolerance raises.
    """
    n = ext.conductor_n
    if cls not in ext.class_of:
        raise DomainError(f"{cls} is not a unit mod {n}")
    cls = ext.class_of[cls]

    eps = max(float(prec.tail_epsilon), QUAD_FLOOR)
    need = recommended_cutoff(params, eps)
    if cutoff < need:
        raise DomainError(
            f"cutoff {cutoff} is below the kernel support bound {need}")

    vals, ps, ms, logs = _prime_power_arrays(int(cutoff))
    weights = kernel_hat_array(params, vals.astype(np.float64))
    frob_cache: dict = {}
    theta_side = 0.0
    for v, p, m, lg, w in zip(vals, ps, ms, logs, weights):
        if w == 0.0:
            continue
        theta_side += _theta_weight(ext, frob_cache, cls, int(p), int(m)) * lg * w

    char_side = 0.0 + 0.0j
    for chi in ext.dual_characters:
        coef = complex(chi.value(cls)).conjugate()
        char_side += coef * prime_side_J(chi.primitive_part(), params, cutoff, prec)
    char_side /= ext.degree_nL

    diff = abs(theta_side - char_side)
    if diff > tolerance:
        raise IdentityViolationError(
            f"class sum mismatch for class {cls} mod {n}: theta {theta_side:.12g} "
            f"vs character {char_side.real:.12g} (|diff| = {diff:.3e})")
    return ClassSumResult(theta_side=float(theta_side),
                          character_side=float(char_side.real),
                          difference=float(diff))


# ---------------------------------------------------------------------------
# ramified / excluded / tail sum breakdown

def excluded_prime_sums(ext: AbelianExtension, S, params: KernelParams,
                        delta: float = 1.0,
                        prec: Precision = DEFAULT_PRECISION,
                        rel_epsilon: float = 1e-6) -> dict:
    """Exact values of the bookkeeping sums that the estimation chain bounds:
    ramified primes, explicitly excluded primes, higher prime powers, and
    the far tail past x^(3+delta). Each entry carries the bound shape it is
    compared against and the realized ratio. The degree-one complement term
    is identically zero over Q and flagged as such; higher powers are kept
    as their own entry instead.

    K1 sums are exact finite sums. K2 sums run until the neglected Gaussian
    mass is below rel_epsilon of the k(1) scale (the absolute tail_epsilon
    cutoff would need prime powers past 10^9 already at x = 10).
    """
    if delta <= 0:
        raise DomainError("need delta > 0")
    S = frozenset(int(p) for p in S)
    eps = max(float(prec.tail_epsilon), QUAD_FLOOR,
              rel_epsilon * kernel_at_one(params))
    limit = recommended_cutoff(params, eps)
    vals, ps, ms, logs = _prime_power_arrays(limit)
    weights = kernel_hat_array(params, vals.astype(np.float64))
    lam = logs * weights

    ram = ext.ramified_primes
    x = params.x
    n_K = 1.0
    d_L = max(abs(ext.discriminant_dL), 1)
    N_S = 1
    for p in S:
        N_S *= p

    is_ram = np.isin(ps, np.fromiter(ram, dtype=np.int64, count=len(ram))) \
        if ram else np.zeros(ps.size, dtype=bool)
    is_S = np.isin(ps, np.fromiter(S, dtype=np.int64, count=len(S))) \
        if S else np.zeros(ps.size, dtype=bool)
    plain = ~is_ram & ~is_S

    ramified_val = float(np.sum(lam[is_ram]))
    excluded_val = float(np.sum(lam[is_S & ~is_ram]))
    higher_val = float(np.sum(lam[plain & (ms >= 2)]))
    tail_val = float(np.sum(lam[vals.astype(np.float64) > x ** (3 + delta)]))

    if params.kind == "K1":
        lyx = math.log(params.y / x)
        ram_shape = lyx * math.log(d_L) / x ** 2
        exc_shape = lyx * math.log(N_S) / x ** 2 if N_S > 1 else 0.0
        small_shape = n_K * lyx * math.log(params.y) / (x * math.log(x))
        tail_shape = small_shape
    else:
        slx = math.sqrt(math.log(x))
        ram_shape = slx * math.log(d_L)
        exc_shape = slx * math.log(N_S) if N_S > 1 else 0.0
        small_shape = n_K * x ** 1.75
        tail_shape = n_K * x ** (2 - delta * delta / 4) * math.log(x)

    def entry(value, shape):
        return {"value": value, "bound_shape": shape,
                "ratio": value / shape if shape > 0 else None}

    return {
        "ramified": entry(ramified_val, ram_shape),
        "excluded": entry(excluded_val, exc_shape),
        "degree_one_complement": {"value": 0.0, "vacuous_over_Q": True},
        "higher_powers": entry(higher_val, small_shape),
        "tail": entry(tail_val, tail_shape),
    }


def implied_constant_fit(values, shapes) -> dict:
    """Least-squares slope through the origin and the max ratio for a set of
    (realized value, bound shape) pairs; the max ratio is the certifiable
    implied constant."""
    v = np.asarray(values, dtype=np.float64)
    s = np.asarray(shapes, dtype=np.float64)
    if v.size == 0 or v.size != s.size:
        raise DomainError("need equally many values and shapes, at least one")
    if np.any(s <= 0):
        raise DomainError("bound shapes must be positive")
    return {"lstsq_slope": float(np.dot(v, s) / np.dot(s, s)),
            "max_ratio": float(np.max(v / s)), "count": int(v.size)}


# ---------------------------------------------------------------------------
# zero-location surrogates

def exceptional_zero_surrogate(d_L, c2: float,
                               certified_real_zero: float | None = None) -> float:
    """Placement 1 - 1/(c2 log d_L) for the putative exceptional real zero;
    a certified real zero, when supplied, overrides the surrogate."""
    if certified_real_zero is not None:
        if not 0 < certified_real_zero < 1:
            raise DomainError("certified real zero must lie in (0, 1)")
        return float(certified_real_zero)
    if c2 <= 0:
        raise DomainError("need c2 > 0")
    if d_L <= 1:
        raise DomainError(f"need d_L > 1, got {d_L}")
    beta = 1 - 1 / (c2 * math.log(d_L))
    if not 0 < beta < 1:
        raise DomainError(
            f"surrogate {beta} leaves (0, 1); d_L = {d_L} is too small for c2 = {c2}")
    return beta


def deuring_heilbronn_sigma(beta0: float, d_L, n_L: int, t: float,
                            c7: float = 1.0, c8: float = 1.0) -> float:
    """Repulsion abscissa: given a real zero at beta0, other zeros at height
    t satisfy sigma >= 1 - c8 log(c7 / ((1-beta0) log(d_L tau^n_L))) /
    log(d_L tau^n_L), tau = |t| + 2. When the argument of the log is <= 1
    the improvement is empty and sigma = 1 is returned (a signal, not a
    fault)."""
    if not 0 < beta0 < 1:
        raise DomainError("need beta0 in (0, 1)")
    if d_L < 1 or n_L < 1:
        raise DomainError("need d_L >= 1 and n_L >= 1")
    if c7 <= 0 or c8 < 0:
        raise DomainError("need c7 > 0 and c8 >= 0")
    tau = abs(t) + 2
    big = math.log(float(d_L) * tau ** n_L)
    if big <= 0:
        raise DomainError("log(d_L tau^n_L) must be positive")
    arg = c7 / ((1 - beta0) * big)
    if arg <= 1:
        return 1.0
    return 1 - c8 * math.log(arg) / big


def siegel_floor_check(beta0: float, d_L, c10: float) -> bool:
    """Whether 1 - beta0 >= d_L^(-c10), the ineffective distance floor."""
    if not 0 < beta0 < 1:
        raise DomainError("need beta0 in (0, 1)")
    if d_L <= 1 or c10 <= 0:
        raise DomainError("need d_L > 1 and c10 > 0")
    return (1 - beta0) >= float(d_L) ** (-c10)


# ---------------------------------------------------------------------------
# final-estimation term tables

CONSTANT_NAMES = ("c2", "c6p", "c7", "c8", "c10", "c12", "c13", "c14",
                  "c15_1", "c15_2", "c15_3", "c19", "c20", "c21",
                  "c22_1", "c22_2", "c22_3", "c22_4")


@dataclass(frozen=True)
class EstimationInput:
    """Inputs for the lower-bound term tables. n is the degree entering the
    1/n prefactors (equal to n_L over Q); constants default to 1."""

    d_L: float
    n_L: int
    n: float
    N_S: float
    beta0: float
    x: float
    y: float | None = None
    delta: float = 1.0
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d_L <= 1:
            raise ConstructionError(f"need d_L > 1, got {self.d_L}")
        if self.n_L < 1 or self.n <= 0:
            raise ConstructionError("need n_L >= 1 and n > 0")
        if self.N_S < 1:
            raise ConstructionError("need N_S >= 1")
        if not 0 < self.beta0 < 1:
            raise ConstructionError("need beta0 in (0, 1)")
        if self.x <= 1:
            raise ConstructionError("need x > 1")
        if self.y is not None and self.y <= self.x:
            raise ConstructionError("need y > x")
        if self.delta <= 0:
            raise ConstructionError("need delta > 0")
        for k, v in self.constants.items():
            if k not in CONSTANT_NAMES:
                raise ConstructionError(f"unknown constant {k!r}")
            if v <= 0:
                raise ConstructionError(f"constant {k} must be positive")

    def const(self, name: str) -> float:
        return float(self.constants.get(name, 1.0))


def estimation_report(inp: EstimationInput, j: int) -> dict:
    """Realized values of the leading term and every competitor term of the
    lower-bound chain for kernel j, plus a dominance verdict (leading term
    strictly larger than the sum of the rest). A false verdict is a result,
    not an error. The zero-sum term is reported in both conductor
    normalizations; the combined one enters the verdict, the bare-d_L
    variant is listed for comparison.
    """
    if j not in (1, 2):
        raise DomainError(f"kernel index must be 1 or 2, got {j}")
    n_K = 1.0
    x, n, d_L = inp.x, inp.n, inp.d_L
    one_minus = 1 - inp.beta0
    log_dL = math.log(d_L)
    M = math.log(d_L * inp.N_S ** n)

    terms: list[dict] = []

    def add(name, value, counted=True):
        terms.append({"name": name, "value": float(value), "counted": bool(counted)})

    if j == 1:
        if inp.y is None:
            raise DomainError("kernel 1 needs y")
        lyx = math.log(inp.y / x)
        add("leading", (lyx ** 2 / (10 * n)) * min(1.0, one_minus * lyx))
        add("zero_count", inp.const("c13") / n * log_dL)
        expo = 2 * inp.const("c12") * math.log(x) / M
        add("zero_sum_dLNS",
            inp.const("c14") / n * M ** 2
            * (inp.const("c2") / 2 * one_minus * M) ** expo)
        expo_alt = 2 * inp.const("c12") * math.log(x) / log_dL
        add("zero_sum_dL",
            inp.const("c14") / n * log_dL ** 2
            * (inp.const("c2") / 2 * one_minus * log_dL) ** expo_alt,
            counted=False)
        add("ramified", inp.const("c15_1") / (n * x ** 2) * lyx * log_dL)
        add("excluded", inp.const("c15_2") / x ** 2 * lyx * math.log(inp.N_S))
        add("prime_tail",
            inp.const("c15_3") * n_K * lyx * math.log(inp.y) / (x * math.log(x)))
        add("truncation", inp.const("c6p") / (n * x ** 2) * log_dL)
    else:
        lx = math.log(x)
        add("leading", (x ** 2 / (10 * n)) * min(1.0, one_minus * lx))
        add("zero_count", inp.const("c20") * x / n * log_dL)
        expo = inp.const("c19") * lx / M
        add("zero_sum_dLNS",
            inp.const("c21") / n * x ** 2 * one_minus ** expo * M)
        expo_alt = inp.const("c19") * lx / log_dL
        add("zero_sum_dL",
            inp.const("c21") / n * x ** 2 * one_minus ** expo_alt * log_dL,
            counted=False)
        add("ramified", inp.const("c22_1") / n * math.sqrt(lx) * log_dL)
        add("excluded", inp.const("c22_2") * math.sqrt(lx) * math.log(inp.N_S))
        add("small_powers", inp.const("c22_3") * n_K * x ** 1.75)
        add("prime_tail",
            inp.const("c22_4") * n_K * x ** (2 - inp.delta ** 2 / 4) * lx)
        add("truncation", inp.const("c6p") / n * log_dL)

    leading = terms[0]["value"]
    competitors = sum(t["value"] for t in terms[1:] if t["counted"])
    return {"j": j, "terms": terms, "leading": leading,
            "competitor_total": competitors,
            "dominates": leading > competitors}
