"""Conditional CDFs given the source-to-primary gain, and the jammer kernels.

Conditioned on g_SP = u the source cap is Omega(u) = gamma_S for u below
sigma_S and gamma_I / u above, so every first-hop SNR is the corresponding
gain scaled by Omega(u); the conditional laws reduce to the gain laws at
x = y / Omega(u).  With the jammer on, the eavesdropper CDF also depends
only on that ratio, which the evaluators below exploit by gridding in x.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..channels import rayleigh_gain_cdf, sr_cdf, sr_pdf
from ..config import NetworkConfig
from ..specfun import MeijerGSpec, meijer_g_many, upper_incomplete_gamma
from .coeffs import b_coeff

__all__ = [
    "omega_cap",
    "cond_cdf_gamma_r",
    "cond_pdf_gamma_r",
    "cond_cdf_gamma_e1",
    "UsjCdf",
    "JammerE1CdfQuad",
    "JammerE1CdfClosed",
    "JammerE1CdfAsymptotic",
]


def omega_cap(cfg: NetworkConfig, u):
    """Effective source power cap given the source-to-primary gain."""
    u = np.asarray(u, dtype=float)
    p = cfg.power
    with np.errstate(divide="ignore"):
        capped = np.where(u > 0, p.gamma_i / np.where(u > 0, u, 1.0), np.inf)
    return np.minimum(p.gamma_s, capped)


def cond_cdf_gamma_r(cfg: NetworkConfig, y, u):
    """F_{gamma_R | g_SP = u}(y) = F_{g_SR}(y / Omega(u))."""
    return sr_cdf(cfg.sr, np.asarray(y, dtype=float) / omega_cap(cfg, u))


def cond_pdf_gamma_r(cfg: NetworkConfig, y, u):
    om = omega_cap(cfg, u)
    return sr_pdf(cfg.sr, np.asarray(y, dtype=float) / om) / om


class UsjCdf:
    """CDF of the capped jammer SNR U_SJ = min(gamma_SJ, gamma_I/g_SJP) g_SJE1.

    The exact form is the peak-power branch weighted by the cap probability
    plus one incomplete Meijer-G term per polynomial order of the jammer
    uplink law; values are gridded over log t and interpolated.
    """

    def __init__(self, cfg: NetworkConfig, n_grid: int = 240):
        self.cfg = cfg
        p = cfg.power
        sje1 = cfg.sje1
        self.f_cap = float(rayleigh_gain_cdf(cfg.sjp, p.sigma_sj))
        t_hi = 60.0 * p.gamma_sj / sje1.ups
        t_lo = 1e-8 * p.gamma_sj / sje1.ups
        ts = np.geomspace(t_lo, t_hi, n_grid)

        vals = self.f_cap * np.asarray(sr_cdf(sje1, ts / p.gamma_sj), dtype=float)
        c_jp = p.sigma_sj * cfg.sjp.lam
        args = sje1.ups * ts / (p.gamma_i * cfg.sjp.lam)
        for n1 in range(sje1.m):
            spec = MeijerGSpec(
                1, 2,
                ((1.0, 0.0), (0.0, c_jp)),
                ((n1 + 1.0, 0.0), (0.0, 0.0)),
            )
            g1 = meijer_g_many(spec, args)
            vals += sje1.big_delta * sje1.phi[n1] / sje1.ups ** (n1 + 1) * g1
        vals = np.clip(vals, 0.0, 1.0)
        self.t_lo, self.t_hi = t_lo, t_hi
        self._anchor = float(vals[0])
        self._interp = PchipInterpolator(np.log(ts), vals, extrapolate=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.empty_like(t)
        lo = t <= self.t_lo
        hi = t >= self.t_hi
        mid = ~lo & ~hi
        out[lo] = self._anchor * np.maximum(t[lo], 0.0) / self.t_lo
        out[hi] = 1.0
        if np.any(mid):
            out[mid] = self._interp(np.log(t[mid]))
        return float(out[0]) if scalar else out


class JammerE1CdfQuad:
    """F of gamma_E1 given the cap, as a function of x = y / Omega(u).

    Direct route: 1 - x * int_0^inf f_SE1(x (t+1)) F_USJ(t) dt, with the
    substitution tau = ups_SE1 x t so a fixed Gauss grid covers the
    exponential decay for every x.
    """

    def __init__(self, cfg: NetworkConfig, panels: int = 28, order: int = 8):
        self.cfg = cfg
        self.usj = UsjCdf(cfg)
        edges = np.concatenate([[0.0], np.geomspace(1e-4, 70.0, panels)])
        nodes, weights = np.polynomial.legendre.leggauss(order)
        mids = 0.5 * (edges[1:] + edges[:-1])
        halves = 0.5 * (edges[1:] - edges[:-1])
        self.tau = (mids[:, None] + halves[:, None] * nodes[None, :]).ravel()
        self.w = (halves[:, None] * weights[None, :]).ravel()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        se1 = self.cfg.se1
        # t = tau / (ups x); integrand f_SE1(x + tau/ups) F_USJ(t) / ups
        xt = x[:, None] + self.tau[None, :] / se1.ups
        t = self.tau[None, :] / (se1.ups * x[:, None])
        vals = sr_pdf(se1, xt) * self.usj(t)
        out = 1.0 - np.sum(vals * self.w[None, :], axis=1) / se1.ups
        out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if scalar else out


class JammerE1CdfClosed:
    """Same conditional CDF through the finite-sum + Meijer-G closed form.

    The two G-factors depend on x only through the ratio argument
    A = ups_SJE1 / (ups_SE1 gamma_SJ x); they are gridded per (n1, p) pair
    and interpolated in log-log space.
    """

    def __init__(self, cfg: NetworkConfig, x_lo: float, x_hi: float,
                 n_grid: int = 200):
        self.cfg = cfg
        p = cfg.power
        se1, sje1 = cfg.se1, cfg.sje1
        self.a_of_x = lambda x: sje1.ups / (se1.ups * p.gamma_sj * np.asarray(x))
        a_hi = float(self.a_of_x(x_lo)) * 1.1
        a_lo = float(self.a_of_x(x_hi)) * 0.9
        grid = np.geomspace(a_lo, a_hi, n_grid)
        c_jp = p.sigma_sj * cfg.sjp.lam
        self._g12 = {}
        self._g2 = {}
        for n1 in range(sje1.m):
            for pp in range(se1.m):
                spec12 = MeijerGSpec(
                    1, 2,
                    ((-float(pp), 0.0), (1.0, 0.0)),
                    ((n1 + 1.0, 0.0), (0.0, 0.0)),
                )
                g12 = meijer_g_many(spec12, grid)
                spec2 = MeijerGSpec(
                    1, 3,
                    ((1.0, 0.0), (0.0, c_jp), (-float(pp), 0.0)),
                    ((n1 + 1.0, 0.0), (0.0, 0.0)),
                )
                rho = grid * (p.gamma_sj / (p.gamma_i * cfg.sjp.lam))
                g2 = meijer_g_many(spec2, rho)
                self._g12[(n1, pp)] = PchipInterpolator(
                    np.log(grid), np.log(np.maximum(g12, 1e-300))
                )
                self._g2[(n1, pp)] = PchipInterpolator(
                    np.log(grid), np.log(np.maximum(g2, 1e-300))
                )

    def __call__(self, x):
        cfg = self.cfg
        p = cfg.power
        se1, sje1, sr = cfg.se1, cfg.sje1, cfg.sr
        x = np.atleast_1d(np.asarray(x, dtype=float))
        a = self.a_of_x(x)
        la = np.log(a)
        f_cap_j = float(rayleigh_gain_cdf(cfg.sjp, p.sigma_sj))
        total = np.zeros_like(x)
        for n2 in range(se1.m):
            for pp in range(n2 + 1):
                bracket = np.zeros_like(x)
                for n1 in range(sje1.m):
                    g12 = np.exp(self._g12[(n1, pp)](la))
                    g2 = np.exp(self._g2[(n1, pp)](la))
                    coef = sje1.phi[n1] / sje1.ups ** (n1 + 1)
                    bracket += coef * (f_cap_j * g12 + g2)
                total += (
                    math.comb(n2, pp)
                    * se1.phi[n2]
                    * x**n2
                    * (se1.ups * x) ** (-(pp + 1.0))
                    * bracket
                )
        out = 1.0 - x * se1.big_delta * sje1.big_delta * np.exp(-se1.ups * x) * total
        return out


class JammerE1CdfAsymptotic:
    """First-residue (high interference-power) version of the closed kernel.

    Keeps only the n1 = 0 order and the leading pole of each G-factor, the
    approximation behind the asymptotic intercept expression; not clamped,
    since the asymptotic assembly integrates the raw kernel.
    """

    def __init__(self, cfg: NetworkConfig):
        self.cfg = cfg
        p = cfg.power
        c_jp = p.sigma_sj * cfg.sjp.lam
        self.jam_const = float(rayleigh_gain_cdf(cfg.sjp, p.sigma_sj)) + float(
            np.real(upper_incomplete_gamma(2.0, c_jp))
        ) / (cfg.sjp.lam * p.sigma_sj)

    def __call__(self, x):
        cfg = self.cfg
        p = cfg.power
        se1, sje1 = cfg.se1, cfg.sje1
        x = np.atleast_1d(np.asarray(x, dtype=float))
        a = sje1.ups / (se1.ups * p.gamma_sj * x)
        total = np.zeros_like(x)
        for n2 in range(se1.m):
            for pp in range(n2 + 1):
                total += (
                    math.comb(n2, pp)
                    * se1.phi[n2]
                    * x**n2
                    * (se1.ups * x) ** (-(pp + 1.0))
                    * math.gamma(2.0 + pp)
                    * a
                    * (sje1.phi[0] / sje1.ups)
                    * self.jam_const
                )
        return 1.0 - x * se1.big_delta * sje1.big_delta * np.exp(-se1.ups * x) * total


def cond_cdf_gamma_e1(cfg: NetworkConfig, y, u, jammer_on: bool | None = None):
    """F_{gamma_E1 | g_SP = u}(y), with or without the friendly jammer."""
    if jammer_on is None:
        jammer_on = cfg.power.jammer_on
    x = np.asarray(y, dtype=float) / omega_cap(cfg, u)
    if not jammer_on:
        return sr_cdf(cfg.se1, x)
    return JammerE1CdfQuad(cfg)(x)
