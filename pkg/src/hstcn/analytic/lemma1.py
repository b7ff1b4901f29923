"""Intercept probability by direct nested quadrature of the mixture form.

This path keeps everything numeric: the second-hop kernel J2 is integrated
from the optical channel laws on an adaptive grid, the jammer conditional
CDF comes from the direct (integral) route, and the cap mixture is the
split-at-sigma_S outer integral.  It shares no residue algebra with the
closed form, which is what makes the three-way comparison meaningful.
"""
from __future__ import annotations

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..channels import gg_snr_pdf, gg_snr_sf, sr_cdf
from ..config import NetworkConfig
from ..montecarlo import IPEstimate
from .conditional import JammerE1CdfQuad
from .ipcore import R1Engine, gridded_ratio_fn

__all__ = ["QuadratureJ2", "ip_lemma1"]


class QuadratureJ2:
    """J2 accumulated by panel quadrature of f_E2 * (1 - F_D), gridded in y."""

    def __init__(self, cfg: NetworkConfig, n_grid: int = 280):
        e2, d = cfg.e2, cfg.d
        gamma_th = cfg.power.gamma_th
        y_lo = min(gamma_th * 0.9, e2.mu_r * 1e-3)
        y_hi = max(e2.mu_r, gamma_th)
        while gg_snr_sf(e2, y_hi) > 1e-12:
            y_hi *= 1.6
        ys = np.geomspace(y_lo, y_hi, n_grid)

        nodes, weights = np.polynomial.legendre.leggauss(12)
        # Head piece [~0, y_lo] on a log-refined subgrid.
        head_edges = np.geomspace(y_lo * 1e-8, y_lo, 24)
        acc = 0.0
        for a, b in zip(head_edges[:-1], head_edges[1:]):
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            z = mid + half * nodes
            acc += half * float(np.sum(weights * gg_snr_pdf(e2, z) * gg_snr_sf(d, z)))
        vals = np.empty_like(ys)
        vals[0] = acc
        for i in range(1, len(ys)):
            a, b = ys[i - 1], ys[i]
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            z = mid + half * nodes
            acc += half * float(np.sum(weights * gg_snr_pdf(e2, z) * gg_snr_sf(d, z)))
            vals[i] = acc
        self.y_lo, self.y_hi = y_lo, y_hi
        self.saturation = float(vals[-1])
        self._interp = PchipInterpolator(np.log(ys), vals, extrapolate=False)
        self._lo_val = float(vals[0])

    def __call__(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty_like(y)
        lo = y <= self.y_lo
        hi = y >= self.y_hi
        mid = ~lo & ~hi
        out[lo] = self._lo_val * np.maximum(y[lo], 0.0) / self.y_lo
        out[hi] = self.saturation
        if np.any(mid):
            out[mid] = self._interp(np.log(y[mid]))
        return out


def ip_lemma1(cfg: NetworkConfig, jammer_on: bool | None = None) -> IPEstimate:
    """Nested-quadrature intercept probability (absolute target ~1e-4)."""
    if jammer_on is not None:
        cfg = cfg.with_jammer(jammer_on)
    j2 = QuadratureJ2(cfg)
    if cfg.power.jammer_on:
        x_lo = cfg.power.gamma_th / cfg.power.gamma_s
        e1 = gridded_ratio_fn(JammerE1CdfQuad(cfg), x_lo, 60.0 / cfg.sr.ups)
    else:
        def e1(x):
            return sr_cdf(cfg.se1, x)
    engine = R1Engine(cfg, e1, j2)
    value, meta = engine.ip()
    return IPEstimate(
        value=value, ci_low=value, ci_high=value, n=0, seed=0,
        path="lemma1", meta=meta,
    )
