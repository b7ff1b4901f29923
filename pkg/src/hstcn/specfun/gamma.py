"""Gamma-family primitives used by the Meijer-G and Mellin-Barnes machinery.

Everything here accepts scalars or numpy arrays and is safe on the vertical
contour strips used by the evaluators (|Im s| up to ~60, |Re s| up to ~40).
Values that can overflow float64 are exposed in log form; the log of a
complex quantity is returned on an arbitrary branch (callers only ever
exponentiate sums of these logs, so the branch does not matter).
"""
from __future__ import annotations

import math

import numpy as np

__all__ = [
    "log_gamma",
    "lower_incomplete_gamma",
    "upper_incomplete_gamma",
    "upper_gamma_log",
    "kummer_1f1_finite",
    "PoleError",
    "NonConvergenceError",
]

_LOG_2PI = math.log(2.0 * math.pi)

# Lanczos g=7, n=9 coefficients.
_LANCZOS_G = 7.0
_LANCZOS = np.array(
    [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ]
)


class PoleError(ValueError):
    """Raised when a gamma-type function is evaluated at a pole."""


class NonConvergenceError(RuntimeError):
    """Raised when an internal series or quadrature fails its tolerance."""


def _lanczos_loggamma(z):
    """Principal-branch log-gamma for Re z >= 0.5 (array-safe)."""
    zm1 = z - 1.0
    x = np.full_like(z, _LANCZOS[0])
    for i in range(1, len(_LANCZOS)):
        x = x + _LANCZOS[i] / (zm1 + i)
    t = zm1 + _LANCZOS_G + 0.5
    return 0.5 * _LOG_2PI + (zm1 + 0.5) * np.log(t) - t + np.log(x)


def _log_sin_pi(z):
    """log(sin(pi z)) continuous for Im z >= 0, matching real values on (0,1)."""
    # sin(pi z) = e^{-i pi z} (e^{2 i pi z} - 1) / (2 i); |e^{2 i pi z}| < 1
    # for Im z > 0 so the inner log never wraps.
    w = np.exp(2j * np.pi * z)
    return -1j * np.pi * z + np.log((w - 1.0) / 2j)


def log_gamma(z):
    """Principal-branch complex log of the gamma function.

    Lanczos rational approximation for Re z >= 0.5, reflection below.
    Raises PoleError at non-positive integers.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)

    on_pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.floor(z.real))
    if np.any(on_pole):
        raise PoleError("log_gamma pole at non-positive integer")

    out = np.empty_like(z)
    right = z.real >= 0.5
    if np.any(right):
        out[right] = _lanczos_loggamma(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        # Reflection: log G(z) = log pi - log sin(pi z) - log G(1 - z),
        # with conjugation used to keep Im z >= 0 inside _log_sin_pi.
        conj = zl.imag < 0
        zz = np.where(conj, np.conj(zl), zl)
        val = math.log(math.pi) - _log_sin_pi(zz) - _lanczos_loggamma(1.0 - zz)
        out[left] = np.where(conj, np.conj(val), val)
    return out[0] if scalar else out


def kummer_1f1_finite(m: int, x):
    """Confluent hypergeometric 1F1(m; 1; x) through its finite decomposition.

    For positive integer m, 1F1(m;1;x) = e^x * sum_{n=0}^{m-1} c_n x^n with
    c_n = (m-1)! / ((m-1-n)! (n!)^2); this is the rewriting that turns the
    shadowed-Rician density into an exponential times a polynomial.
    """
    if m < 1 or int(m) != m:
        raise ValueError("m must be a positive integer")
    m = int(m)
    x = np.asarray(x, dtype=float)
    poly = np.zeros_like(x)
    for n in range(m - 1, -1, -1):
        c = math.factorial(m - 1) / (math.factorial(m - 1 - n) * math.factorial(n) ** 2)
        poly = poly * x + c
    return np.exp(x) * poly


def lower_incomplete_gamma(n: int, x):
    """gamma(n, x) for positive integer n via the closed finite formula.

    gamma(n, x) = (n-1)! (1 - e^{-x} sum_{k<n} x^k / k!).  Below a small-x
    threshold the algebraically identical ascending series is used instead,
    because the finite formula loses precision to cancellation there.
    """
    if n < 1 or int(n) != n:
        raise ValueError("n must be a positive integer")
    n = int(n)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be >= 0")
    scalar = x.ndim == 0
    x = np.atleast_1d(x).astype(float)

    out = np.empty_like(x)
    small = x < 0.5 * (n + 1)
    if np.any(~small):
        xb = x[~small]
        s = np.zeros_like(xb)
        term = np.ones_like(xb)
        for k in range(n):
            if k > 0:
                term = term * xb / k
            s += term
        out[~small] = math.factorial(n - 1) * (1.0 - np.exp(-xb) * s)
    if np.any(small):
        xs = x[small]
        # gamma(n,x) = x^n e^{-x} sum_{k>=0} (n-1)! x^k / (n+k)!
        acc = np.zeros_like(xs)
        term = np.full_like(xs, 1.0 / n)  # (n-1)!/n! folded in
        k = 0
        while True:
            acc += term
            k += 1
            term = term * xs / (n + k)
            if np.all(term <= 1e-18 * acc) or k > 500:
                break
        with np.errstate(divide="ignore"):
            out[small] = np.where(
                xs > 0.0,
                np.exp(n * np.log(np.where(xs > 0, xs, 1.0)) - xs) * acc,
                0.0,
            )
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# Upper incomplete gamma with complex first argument
# ---------------------------------------------------------------------------

def _ugamma_log_series(s, x: float):
    """log Gamma(s, x) via Gamma(s) - gamma(s, x) with the Kummer-style series.

    gamma(s,x) = x^s e^{-x} sum_{k>=0} x^k / (s (s+1) ... (s+k)); the terms
    carry slowly rotating phases, so the sum is stable wherever the product
    stays away from the poles of gamma(s, .).
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    acc = np.zeros_like(s)
    term = 1.0 / s
    k = 0
    kmax = int(2.5 * x) + 120
    while True:
        acc = acc + term
        k += 1
        term = term * x / (s + k)
        if k > kmax:
            break
        if np.all(np.abs(term) <= 1e-18 * np.maximum(np.abs(acc), 1e-300)):
            break
    log_g = log_gamma(s)
    log_low = s * math.log(x) - x + np.log(acc)
    # Stable log of (Gamma(s) - gamma(s, x)): factor out the larger magnitude.
    big = np.real(log_g) >= np.real(log_low)
    out = np.empty_like(s)
    with np.errstate(over="ignore", invalid="ignore"):
        d1 = np.exp(log_low - log_g)
        d2 = np.exp(log_g - log_low)
        out[big] = (log_g + np.log1p(-d1))[big]
        out[~big] = (log_low + np.log(d2 - 1.0))[~big]
    return out


def _ugamma_log_quad(s, x: float):
    """log Gamma(s, x) for x > 1 by quadrature after t = x(1 + v).

    Gamma(s,x) = x^s e^{-x} int_0^inf (1+v)^{s-1} e^{-x v} dv, integrated on
    adaptive Gauss-Legendre panels sized for the oscillation of (1+v)^{i Im s}.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    max_res = float(np.max(s.real))
    max_ims = float(np.max(np.abs(s.imag)))
    # Integrand ~ exp((Re s - 1) log(1+v) - x v): find a generous upper cut.
    v_peak = max(0.0, (max_res - 1.0) / x)
    v_max = v_peak + (45.0 + 10.0 * math.sqrt(max(max_res, 1.0))) / x
    v_max = max(v_max, 45.0 / x)

    nodes, weights = np.polynomial.legendre.leggauss(32)
    vs = []
    ws = []
    lo = 0.0
    while lo < v_max:
        # Keep phase change of (1+v)^{i Im s} per panel below ~pi/2.
        width = min(
            max(v_max / 6.0, 1e-3),
            0.5 * math.pi * (1.0 + lo) / max(max_ims, 1.0),
        )
        hi = min(lo + width, v_max)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        vs.append(mid + half * nodes)
        ws.append(half * weights)
        lo = hi
    v = np.concatenate(vs)
    w = np.concatenate(ws)

    log1pv = np.log1p(v)
    # (n_s, n_v) matrix of log-integrand values.
    expo = np.subtract.outer(s - 1.0, np.zeros_like(v)) * log1pv - x * v
    shift = np.max(expo.real, axis=1, keepdims=True)
    integral = np.sum(np.exp(expo - shift) * w, axis=1)
    return s * math.log(x) - x + shift[:, 0] + np.log(integral)


def _ugamma_log_cf(s, x: float):
    """log Gamma(s, x) by the Legendre continued fraction (modified Lentz)."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    tiny = 1e-290
    b = x + 1.0 - s
    c = np.full_like(s, 1.0 / tiny)
    d = 1.0 / np.where(np.abs(b) < tiny, tiny, b)
    h = d.copy()
    for i in range(1, 600):
        an = -i * (i - s)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = c * d
        h = h * delta
        if np.all(np.abs(delta - 1.0) < 1e-16):
            break
    else:
        raise NonConvergenceError("incomplete-gamma continued fraction stalled")
    return s * math.log(x) - x + np.log(h)


def upper_gamma_log(s, x: float):
    """Complex log of Gamma(s, x) for real x >= 0 and complex (array) s.

    The branch of the returned log is unspecified; exponentiate sums only.
    Three routes cover the strip: the Kummer series (small x relative to
    |s|), the Legendre continued fraction (x comparable to |s|), and
    quadrature of the defining integral, which is cancellation-free only
    once x dominates |Im s|.
    """
    if x < 0:
        raise ValueError("x must be >= 0")
    s = np.asarray(s, dtype=complex)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    if x == 0.0:
        out = log_gamma(s)  # PoleError propagates for bad s
    elif x < 1.0:
        out = _ugamma_log_series(s, x)
    else:
        out = np.empty_like(s)
        mag = np.abs(s.imag) + np.maximum(s.real, 0.0)
        ser = x < 0.5 * mag
        cf = ~ser & (x < 4.0 * (np.abs(s.imag) + 1.0))
        quad = ~ser & ~cf
        if np.any(ser):
            out[ser] = _ugamma_log_series(s[ser], x)
        if np.any(cf):
            out[cf] = _ugamma_log_cf(s[cf], x)
        if np.any(quad):
            out[quad] = _ugamma_log_quad(s[quad], x)
    return out[0] if scalar else out


def upper_incomplete_gamma(s, x: float):
    """Gamma(s, x) for complex s and real x >= 0 (value form)."""
    return np.exp(upper_gamma_log(s, x))
