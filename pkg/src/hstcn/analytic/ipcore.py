"""Shared integration core for the semi-analytic intercept evaluators.

Conditioned on the source cap Omega, the decode-and-secure mass is

    R1(Omega) = int_{gamma_th}^inf f_R|Omega(y) F_E1|Omega(y) J2(y) dy
              = int_{gamma_th/Omega}^inf f_SR(x) E1(x) J2(Omega x) dx,

and the intercept probability is one minus its mixture over the cap law:
the capped branch weighted by F_gSP(sigma_S) plus the interference-limited
branch integrated over u > sigma_S with Omega = gamma_I / u.
"""
from __future__ import annotations

import math

import numpy as np

from ..channels import rayleigh_gain_cdf, sr_pdf
from ..config import NetworkConfig

__all__ = ["R1Engine", "gridded_ratio_fn"]


def gridded_ratio_fn(fn, x_lo: float, x_hi: float, n: int = 400):
    """Cache a smooth positive function of the cap ratio on a log grid.

    The conditional-CDF kernels are evaluated tens of thousands of times
    across the (u, y) tensor but depend on one ratio only; a monotone
    cubic over log x reproduces them to interpolation accuracy ~1e-8.
    """
    from scipy.interpolate import PchipInterpolator

    xs = np.geomspace(x_lo * 0.8, x_hi * 1.1, n)
    vals = np.asarray(fn(xs), dtype=float)
    interp = PchipInterpolator(np.log(xs), vals, extrapolate=False)
    lo_val, hi_val = float(vals[0]), float(vals[-1])

    def wrapped(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        lo = x <= xs[0]
        hi = x >= xs[-1]
        mid = ~lo & ~hi
        out[lo] = lo_val * x[lo] / xs[0]
        out[hi] = hi_val
        if np.any(mid):
            out[mid] = interp(np.log(x[mid]))
        return out

    return wrapped


def _log_gauss_grid(lo: np.ndarray, hi: float, panels: int, order: int):
    """Per-row Gauss-Legendre nodes/weights in log space, vectorized over rows."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    nodes, weights = np.polynomial.legendre.leggauss(order)
    v_lo = np.log(lo)[:, None]
    v_hi = math.log(hi)
    edges = v_lo + (v_hi - v_lo) * np.linspace(0.0, 1.0, panels + 1)[None, :]
    mids = 0.5 * (edges[:, 1:] + edges[:, :-1])
    halves = 0.5 * (edges[:, 1:] - edges[:, :-1])
    v = mids[:, :, None] + halves[:, :, None] * nodes[None, None, :]
    w = halves[:, :, None] * weights[None, None, :]
    x = np.exp(v)
    return x.reshape(lo.size, -1), (w * x).reshape(lo.size, -1)


class R1Engine:
    """Evaluates R1 over cap values and assembles the intercept probability.

    ``e1_cdf`` maps the ratio x = y/Omega to the conditional eavesdropper
    CDF; ``j2`` maps absolute y to the second-hop kernel.  Both must be
    vectorized.
    """

    def __init__(self, cfg: NetworkConfig, e1_cdf, j2,
                 x_panels: int = 30, x_order: int = 8,
                 u_panels: int = 36, u_order: int = 6):
        self.cfg = cfg
        self.e1_cdf = e1_cdf
        self.j2 = j2
        self.x_panels = x_panels
        self.x_order = x_order
        self.u_panels = u_panels
        self.u_order = u_order
        self.x_hi = 60.0 / cfg.sr.ups

    def r1(self, omegas) -> np.ndarray:
        """R1 at an array of cap values."""
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
        cfg = self.cfg
        x_lo = cfg.power.gamma_th / omegas
        if np.any(x_lo >= self.x_hi):
            raise ValueError("cap too small: decode threshold beyond gain support")
        x, w = _log_gauss_grid(x_lo, self.x_hi, self.x_panels, self.x_order)
        kern = sr_pdf(cfg.sr, x) * np.asarray(self.e1_cdf(x.ravel())).reshape(x.shape)
        kern = kern * self.j2((omegas[:, None] * x).ravel()).reshape(x.shape)
        return np.sum(kern * w, axis=1)

    def ip(self) -> tuple[float, dict]:
        """Intercept probability plus evaluation metadata."""
        cfg = self.cfg
        p = cfg.power
        cap_weight = float(rayleigh_gain_cdf(cfg.sp, p.sigma_s))
        r1_cap = float(self.r1(p.gamma_s)[0]) if cap_weight > 0 else 0.0

        u_hi = p.sigma_s + 60.0 / cfg.sp.lam
        nodes, weights = np.polynomial.legendre.leggauss(self.u_order)
        edges = p.sigma_s * np.geomspace(
            1.0, u_hi / p.sigma_s, self.u_panels + 1
        )
        mids = 0.5 * (edges[1:] + edges[:-1])
        halves = 0.5 * (edges[1:] - edges[:-1])
        u = (mids[:, None] + halves[:, None] * nodes[None, :]).ravel()
        w = (halves[:, None] * weights[None, :]).ravel()
        r1_tail = self.r1(p.gamma_i / u)
        dens = cfg.sp.lam * np.exp(-cfg.sp.lam * u)
        tail = float(np.sum(w * dens * r1_tail))

        secure = cap_weight * r1_cap + tail
        ip = min(max(1.0 - secure, 0.0), 1.0)
        meta = {
            "cap_weight": cap_weight,
            "r1_cap": r1_cap,
            "tail_mass": tail,
            "raw": 1.0 - secure,
        }
        return ip, meta
