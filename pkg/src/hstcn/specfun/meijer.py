"""Meijer G-function evaluation: residue series and Mellin-Barnes contours.

A G-function here is specified by parameter *pairs*: each top parameter a_l
and bottom parameter b_k carries a second entry, the argument of an upper
incomplete gamma factor (0 means the ordinary complete gamma).  The
Mellin-Barnes integrand is

    Phi(s) = prod_{k<=m} G(b_k + s, y_k) * prod_{l<=n} G(1 - a_l - s, x_l)
             / ( prod_{l>n} G(a_l + s, x_l) * prod_{k>m} G(1 - b_k - s, y_k) )

with G(., 0) the ordinary gamma, and the function is (1/2 pi i) times the
integral of Phi(s) z^{-s} along a vertical line separating the left pole
families (from ordinary bottom factors, k <= m) from the right ones (from
ordinary top factors, l <= n).  Incomplete factors contribute no poles.

Evaluation strategy follows the usual two routes: the sum of residues over
the left poles where that series converges and stays within float64 range,
and direct trapezoid quadrature along the contour otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gamma import NonConvergenceError, PoleError, log_gamma, upper_gamma_log

__all__ = [
    "MeijerGSpec",
    "TruncationPolicy",
    "GResult",
    "DegeneratePolesError",
    "meijer_g",
    "meijer_g_many",
    "mellin_line_integral",
]


class DegeneratePolesError(ValueError):
    """Two left poles coincide (or nearly so); the residue expansion breaks."""


@dataclass(frozen=True)
class TruncationPolicy:
    """Knobs for infinite-sum truncation and contour quadrature."""

    rel_tol_series: float = 1e-9
    rel_tol_contour: float = 1e-6
    max_terms: int = 200
    contour_im_halfwidth: float = 40.0
    contour_nodes_per_unit: int = 8
    consecutive_small_terms: int = 3

    def __post_init__(self):
        if not (0 < self.rel_tol_series < 1 and 0 < self.rel_tol_contour < 1):
            raise ValueError("rel_tol must be in (0, 1)")
        if self.max_terms < 1 or self.contour_im_halfwidth <= 0:
            raise ValueError("max_terms and contour_im_halfwidth must be positive")
        if self.contour_nodes_per_unit < 1 or self.consecutive_small_terms < 1:
            raise ValueError("node density and small-term count must be positive")


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class MeijerGSpec:
    """Orders (m, n, p, q) plus top/bottom parameter pairs (value, inc_arg)."""

    m: int
    n: int
    top: tuple  # p pairs (a_l, x_l)
    bottom: tuple  # q pairs (b_k, y_k)

    def __post_init__(self):
        object.__setattr__(self, "top", tuple((float(a), float(x)) for a, x in self.top))
        object.__setattr__(self, "bottom", tuple((float(b), float(y)) for b, y in self.bottom))
        if not (0 <= self.m <= self.q and 0 <= self.n <= self.p):
            raise ValueError("need m <= q and n <= p")
        if any(x < 0 for _, x in self.top) or any(y < 0 for _, y in self.bottom):
            raise ValueError("incomplete-gamma second arguments must be >= 0")
        for l in range(self.n):
            a, xinc = self.top[l]
            if xinc != 0.0:
                continue
            for k in range(self.m):
                b, yinc = self.bottom[k]
                if yinc != 0.0:
                    continue
                d = a - b
                if d >= 0.5 and abs(d - round(d)) < 1e-9:
                    raise ValueError(
                        "pole-separability violated: a_l - b_k is a positive integer"
                    )

    @property
    def p(self) -> int:
        return len(self.top)

    @property
    def q(self) -> int:
        return len(self.bottom)

    def log_integrand(self, s):
        """log Phi(s) on an arbitrary branch, vectorized over s."""
        s = np.asarray(s, dtype=complex)
        out = np.zeros_like(s)
        for k in range(self.m):
            b, y = self.bottom[k]
            out = out + _lgf(b + s, y)
        for l in range(self.n):
            a, x = self.top[l]
            out = out + _lgf(1.0 - a - s, x)
        for l in range(self.n, self.p):
            a, x = self.top[l]
            out = out - _lgf(a + s, x)
        for k in range(self.m, self.q):
            b, y = self.bottom[k]
            out = out - _lgf(1.0 - b - s, y)
        return out

    def contour_bounds(self):
        """(L, R): ordinary left poles lie left of L, right poles right of R."""
        lefts = [-b for b, y in self.bottom[: self.m] if y == 0.0]
        rights = [1.0 - a for a, x in self.top[: self.n] if x == 0.0]
        left = max(lefts) if lefts else -math.inf
        right = min(rights) if rights else math.inf
        return left, right


@dataclass
class GResult:
    value: float
    error: float
    method: str
    perturbed: dict = field(default_factory=dict)


def _lgf(arg, inc):
    """Log of one gamma factor: complete for inc == 0, else upper incomplete."""
    if inc == 0.0:
        return log_gamma(arg)
    return upper_gamma_log(arg, inc)


# ---------------------------------------------------------------------------
# Residue series over the left poles
# ---------------------------------------------------------------------------


def _residue_family_logterm(spec: MeijerGSpec, k: int, j: np.ndarray, logx: float):
    """Log of the residue terms of family k at pole s = -(b_k + j).

    Returns (log magnitude+phase as complex, mask of exactly-zero terms).
    """
    b_k, _ = spec.bottom[k]
    s0 = -(b_k + j).astype(complex)
    log_term = np.zeros_like(s0)
    zero = np.zeros(j.shape, dtype=bool)

    # (-1)^j / j!
    log_term += 1j * math.pi * j - log_gamma(j + 1.0)

    for kk in range(spec.m):
        if kk == k:
            continue
        b, y = spec.bottom[kk]
        log_term += _lgf_or_flag(b + s0, y, zero, numerator=True)
    for l in range(spec.n):
        a, x = spec.top[l]
        log_term += _lgf_or_flag(1.0 - a - s0, x, zero, numerator=True)
    for l in range(spec.n, spec.p):
        a, x = spec.top[l]
        log_term -= _lgf_or_flag(a + s0, x, zero, numerator=False)
    for kk in range(spec.m, spec.q):
        b, y = spec.bottom[kk]
        log_term -= _lgf_or_flag(1.0 - b - s0, y, zero, numerator=False)

    log_term += -s0 * logx
    return log_term, zero


def _lgf_or_flag(arg, inc, zero_mask, numerator: bool):
    """Gamma-factor log with pole handling inside residue terms.

    A denominator factor at a gamma pole kills the whole term (1/Gamma -> 0);
    a numerator pole means coinciding left poles.
    """
    arg = np.asarray(arg, dtype=complex)
    on_pole = (arg.imag == 0) & (arg.real <= 1e-12) & (
        np.abs(arg.real - np.round(arg.real)) < 1e-9
    )
    if inc == 0.0 and np.any(on_pole):
        if numerator:
            raise DegeneratePolesError(
                "residue expansion hit coinciding left poles; perturb parameters"
            )
        zero_mask |= on_pole
        arg = np.where(on_pole, 0.5, arg)  # placeholder, masked out later
    return _lgf(arg, inc)


def _residue_sum(spec: MeijerGSpec, x: float, policy: TruncationPolicy):
    """Sum of left-pole residues; returns (value, err, max_term_mag).

    Families are advanced in lockstep over the pole index j: at large
    argument the per-family terms grow with one sign each and only their
    across-family combination stays moderate, so convergence is judged on
    the combined per-j contribution.
    """
    logx = math.log(x)
    families = [k for k in range(spec.m) if spec.bottom[k][1] == 0.0]
    # Coinciding families would need derivative (log x) terms: refuse.
    for i, ki in enumerate(families):
        for kj in families[i + 1 :]:
            d = spec.bottom[ki][0] - spec.bottom[kj][0]
            if abs(d - round(d)) < 1e-9:
                raise DegeneratePolesError(
                    "left pole families separated by an integer; perturb parameters"
                )

    total = 0.0
    max_term = 0.0
    small_run = 0
    block = 24
    j0 = 0
    converged = False
    while j0 < policy.max_terms and not converged:
        j = np.arange(j0, min(j0 + block, policy.max_terms), dtype=float)
        combined = np.zeros(j.shape)
        for k in families:
            log_term, zero = _residue_family_logterm(spec, k, j, logx)
            if np.any(log_term.real > 700.0):
                raise NonConvergenceError("residue terms overflow float64")
            vals = np.where(zero, 0.0, np.real(np.exp(log_term)))
            max_term = max(max_term, float(np.max(np.abs(vals))))
            combined += vals
        for tv in combined:
            total += float(tv)
            scale = max(abs(total), 1e-300)
            if abs(tv) < policy.rel_tol_series * scale:
                small_run += 1
                if small_run >= policy.consecutive_small_terms:
                    converged = True
                    break
            else:
                small_run = 0
        j0 += block
    if not converged:
        raise NonConvergenceError("residue series did not converge in max_terms")
    err = policy.rel_tol_series * abs(total) + 2e-16 * max_term
    return total, err, max_term


# ---------------------------------------------------------------------------
# Vertical-line (Mellin-Barnes) quadrature
# ---------------------------------------------------------------------------


def mellin_line_integral(logphi, z, c: float, policy: TruncationPolicy = DEFAULT_POLICY,
                         tail_tol: float = 1e-13):
    """(1/2 pi i) int_{c-iT}^{c+iT} exp(logphi(s)) z^{-s} ds for real results.

    Assumes the conjugate symmetry logphi(conj s) = conj(logphi(s)), which
    holds whenever all underlying parameters are real.  Vectorized over z
    (an array of positive reals).  Returns (values, error_estimates).
    """
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(z <= 0):
        raise ValueError("z must be positive")
    logz = np.log(z)

    T = policy.contour_im_halfwidth
    # Node spacing resolving both the z^{-it} oscillation and gamma phases.
    freq = float(np.max(np.abs(logz))) + 3.0 * math.log(2.0 + T)
    h = min(1.0 / policy.contour_nodes_per_unit, 2.0 * math.pi / freq / 6.0)

    def evaluate(h_step, T_cut):
        t = np.arange(0.0, T_cut + h_step, h_step)
        s = c + 1j * t
        lp = logphi(s)
        shift = float(np.max(lp.real))
        vals = np.exp(lp - shift)
        vals[0] *= 0.5
        phase = np.exp(-1j * np.outer(logz, t))
        acc = phase @ vals
        tail = float(np.abs(vals[-1]))
        out = (h_step / math.pi) * np.exp(shift - c * logz) * acc.real
        return out, shift, tail, float(np.max(np.abs(vals)))

    out1, shift, tail, peak = evaluate(h, T)
    t_cap = max(50.0 * (1.0 + abs(c)), 8.0 * T)
    while tail > tail_tol * peak and T < t_cap:
        T = 2.0 * T
        out1, shift, tail, peak = evaluate(h, T)
    if tail > 1e-9 * peak:
        raise NonConvergenceError("contour integrand tail not negligible")
    out2, _, _, _ = evaluate(h / 2.0, T)
    err = np.abs(out2 - out1)
    # Quadrature noise floor: the oscillatory sum cannot resolve results
    # smaller than eps times the integrand scale at this contour.
    noise = 4e-16 * np.exp(shift - c * logz) * (T / h)
    bad = err > policy.rel_tol_contour * np.maximum(np.abs(out2), 1e-300) + noise
    if np.any(bad):
        out3, _, _, _ = evaluate(h / 4.0, T)
        err = np.abs(out3 - out2)
        out2 = out3
        if np.any(
            err > 10.0 * policy.rel_tol_contour * np.maximum(np.abs(out2), 1e-300) + noise
        ):
            raise NonConvergenceError("contour quadrature failed tolerance")
    if scalar:
        return float(out2[0]), float(err[0])
    return out2, err


def _pick_contour(spec: MeijerGSpec, x: float):
    left, right = spec.contour_bounds()
    if math.isfinite(left) and math.isfinite(right):
        gap = right - left
        if gap < 1e-3:
            raise DegeneratePolesError("left/right pole gap below 1e-3")
        return 0.5 * (left + right)
    # One-sided: slide along the free direction minimizing the integrand.
    logx = math.log(x)

    def goal(c):
        try:
            return float(spec.log_integrand(np.array([c + 0j]))[0].real) - c * logx
        except (PoleError, FloatingPointError, OverflowError):
            return math.inf

    reach = max(40.0, 2.0 * math.sqrt(max(x, 1.0)))
    if math.isfinite(left):
        cands = left + np.concatenate([[0.5, 1.0, 2.0], np.geomspace(4.0, reach, 9)])
    elif math.isfinite(right):
        cands = right - np.concatenate([[0.5, 1.0, 2.0], np.geomspace(4.0, reach, 9)])
    else:
        cands = np.linspace(-10.0, 10.0, 9)
    vals = [goal(c) for c in cands]
    return float(cands[int(np.argmin(vals))])


def meijer_g(spec: MeijerGSpec, x: float, policy: TruncationPolicy = DEFAULT_POLICY,
             prefer: str = "auto") -> GResult:
    """Evaluate the (possibly incomplete) Meijer G-function at real x > 0.

    Residue series over the left poles when it converges and stays inside
    float64 range; vertical-contour quadrature otherwise.  ``prefer`` can
    force "series" or "contour" (used by the cross-validation tests).
    """
    if x <= 0:
        raise ValueError("x must be > 0")
    series_ok = spec.p < spec.q or (spec.p == spec.q and x < 1.0)
    if prefer in ("auto", "series") and series_ok and spec.m > 0:
        try:
            val, err, max_term = _residue_sum(spec, x, policy)
            # Keep the series only if cancellation left enough digits to
            # meet the series tolerance; otherwise the contour is better.
            if 2e-16 * max_term <= max(policy.rel_tol_series, 1e-12) * abs(val):
                return GResult(val, err, "series")
            if prefer == "series":
                return GResult(val, 2e-16 * max_term, "series")
        except (NonConvergenceError, DegeneratePolesError):
            if prefer == "series":
                raise
    c = _pick_contour(spec, x)
    val, err = mellin_line_integral(spec.log_integrand, x, c, policy)
    return GResult(float(val), float(err), "contour")


def meijer_g_many(spec: MeijerGSpec, xs, policy: TruncationPolicy = DEFAULT_POLICY,
                  c: float | None = None):
    """Contour evaluation of one spec at many positive arguments at once.

    Arguments are banded by half-decades so each band gets a contour
    abscissa suited to its magnitude.
    """
    xs = np.asarray(xs, dtype=float)
    scalar = xs.ndim == 0
    xs = np.atleast_1d(xs)
    out = np.empty_like(xs)
    if c is not None:
        out[:], _ = mellin_line_integral(spec.log_integrand, xs, c, policy)
    else:
        bands = np.floor(np.log10(xs) * 2.0)
        for band in np.unique(bands):
            mask = bands == band
            cb = _pick_contour(spec, float(np.exp(np.mean(np.log(xs[mask])))))
            out[mask], _ = mellin_line_integral(spec.log_integrand, xs[mask], cb, policy)
    return float(out[0]) if scalar else out
