"""Closed-form and asymptotic intercept probability.

The exact expression is a three-level residue assembly: the master equation
expands the destination-side CDF into its xi^2 / (alpha+k) / (beta+k)
branches, each branch value D^(tau) expands the E2-side the same way, and
the innermost objects are incomplete Meijer-G functions plus double
Mellin-Barnes integrals, split at the cap point sigma_S into a peak-power
piece (weighted by F_gSP) and an interference-limited piece.

The branch series converge everywhere but are *summable in float64* only
while the effective expansion arguments stay moderate; growing terms first
and cancelling later, they lose ~log10(e^z) digits at argument z.  Where
the pre-gate detects that regime, the evaluator switches to the identical
algebra one step before the final expansions: the finite-sum conditional
CDF kernels and branch-expanded second-hop kernel are integrated over the
(y, u) mixture directly.  Both organizations agree to quadrature accuracy
wherever the series form is stable, which the tests exercise.
"""
from __future__ import annotations

import math

import numpy as np

from ..channels import rayleigh_gain_cdf, sr_cdf
from ..config import NetworkConfig
from ..montecarlo import IPEstimate
from ..specfun import (
    DoubleMBKernel,
    MeijerGSpec,
    NonConvergenceError,
    TruncationPolicy,
    double_mellin_barnes,
    log_gamma,
    meijer_g,
    upper_gamma_log,
    upper_incomplete_gamma,
)
from .coeffs import BranchSummer, SeriesUnstableError, b_coeff
from .conditional import (
    JammerE1CdfAsymptotic,
    JammerE1CdfClosed,
)
from .ipcore import R1Engine, gridded_ratio_fn
from .jay2 import ClosedFormJ2

__all__ = ["ip_closed_form", "ip_asymptotic", "series_stability", "EvaluationError"]


class EvaluationError(RuntimeError):
    """Closed-form evaluation failed a consistency bound."""


_DMB_POLICY = TruncationPolicy(contour_im_halfwidth=24.0, contour_nodes_per_unit=8)
_G_POLICY = TruncationPolicy()


def series_stability(cfg: NetworkConfig) -> dict:
    """Effective expansion arguments of the four branch-series families.

    z_* estimate the peak-term exponent of the peak-power (capped) pieces;
    r_* the geometric ratio of the interference-limited pieces.  The
    literal series assembly is trusted only when all are small.
    """
    ups = cfg.sr.ups
    z_e2 = cfg.e2.big_upsilon * cfg.power.gamma_s / (cfg.e2.mu_r * ups)
    z_d = cfg.d.big_upsilon * cfg.power.gamma_s / (cfg.d.mu_r * ups)
    r_e2 = cfg.e2.big_upsilon * cfg.power.gamma_i * cfg.sp.lam / (cfg.e2.mu_r * ups)
    r_d = cfg.d.big_upsilon * cfg.power.gamma_i * cfg.sp.lam / (cfg.d.mu_r * ups)
    stable = max(z_e2, z_d) <= 18.0 and max(r_e2, r_d) <= 0.6
    return {"z_e2": z_e2, "z_d": z_d, "r_e2": r_e2, "r_d": r_d, "series_ok": stable}


def _cached_logfn(fn):
    memo = {}

    def wrapped(s):
        s = np.asarray(s)
        key = (complex(s.flat[0]), complex(s.flat[-1]), s.size)
        if key not in memo:
            memo[key] = fn(s)
        return memo[key]

    return wrapped


class _SeriesEvaluator:
    """Literal residue-series assembly of the exact or asymptotic form."""

    def __init__(self, cfg: NetworkConfig, asymptotic: bool = False):
        if cfg.d.r != 1 or cfg.e2.r != 1:
            raise ValueError("closed form requires coherent detection (r = 1)")
        self.cfg = cfg
        self.asymptotic = asymptotic
        p = cfg.power
        self.f_sp = float(rayleigh_gain_cdf(cfg.sp, p.sigma_s))
        self.f_sjp = float(rayleigh_gain_cdf(cfg.sjp, p.sigma_sj))
        self.log_lam_sig = math.log(cfg.sp.lam * p.sigma_s)
        self._f_cache = {}
        self._g_cache = {}
        self._h_cache = {}
        self._verified = set()

    # -- double Mellin-Barnes pieces ------------------------------------
    def _dmb(self, n_low: int, p_or_n2: int, a: float, tau: float,
             nu_offset: float, kind: str) -> float:
        """Interference-limited piece with the (lam sigma_S)^(tau+a) weight folded in.

        kind "n1": the no-jammer object (coupling Gamma(nu - s + w));
        kind "y"/"w": the jammer objects (coupling Gamma(kappa + s + w)).
        """
        cfg = self.cfg
        p = cfg.power
        lam = cfg.sp.lam

        fkey = (kind, n_low, p_or_n2)
        if fkey not in self._f_cache:
            if kind == "n1":
                def f_s(s, n2=n_low):
                    return log_gamma(n2 + 1.0 + s) + log_gamma(-s) - log_gamma(1.0 - s)
            elif kind == "y":
                def f_s(s, n1=n_low, pp=p_or_n2):
                    return log_gamma(n1 + 1.0 + s) + log_gamma(1.0 + pp - s) - np.log(s)
            else:
                c_jp = p.sigma_sj * cfg.sjp.lam
                def f_s(s, n1=n_low, pp=p_or_n2):
                    return (log_gamma(n1 + 1.0 + s) + log_gamma(1.0 + pp - s)
                            + upper_gamma_log(1.0 - s, c_jp) - np.log(s))
            self._f_cache[fkey] = _cached_logfn(f_s)
        f_s = self._f_cache[fkey]

        b = a + tau
        gkey = ("g", round(b, 12))
        if gkey not in self._g_cache:
            def g_w(w, b=b):
                return (upper_gamma_log(1.0 - b - w, lam * p.sigma_s)
                        - np.log(w) + b * self.log_lam_sig)
            self._g_cache[gkey] = _cached_logfn(g_w)
        g_w = self._g_cache[gkey]

        nu = nu_offset + a + tau
        hkey = ("h", round(nu, 12))
        if hkey not in self._h_cache:
            def h_v(v, nu=nu):
                return log_gamma(nu + v)
            self._h_cache[hkey] = _cached_logfn(h_v)
        h_v = self._h_cache[hkey]

        verify = kind not in self._verified
        self._verified.add(kind)
        if kind == "n1":
            kern = DoubleMBKernel(
                f_s=f_s, g_w=g_w, h_joint=h_v,
                z_s=cfg.se1.ups / cfg.sr.ups,
                z_w=p.eps_i * cfg.sr.ups / lam,
                c_s=-0.5 * (n_low + 1.0), c_w=0.5, sigma_s=-1, sigma_w=1,
            )
            val, _ = double_mellin_barnes(kern, _DMB_POLICY, verify=verify)
            return val
        z_s = p.sigma_sj * cfg.chi / p.gamma_i if kind == "y" else cfg.chi / (
            cfg.sjp.lam * p.gamma_i
        )
        kern = DoubleMBKernel(
            f_s=f_s, g_w=g_w, h_joint=h_v,
            z_s=z_s, z_w=cfg.zeta * p.eps_i / lam,
            c_s=-0.5 * (n_low + 1.0), c_w=0.5, sigma_s=1, sigma_w=1,
        )
        val, _ = double_mellin_barnes(kern, _DMB_POLICY, verify=verify)
        return -val  # the jammer couplings carry a leading minus

    # -- closed-form objects ---------------------------------------------
    def _n1_obj(self, n2: int, n3: int, a: float, tau: float) -> float:
        """Capped + interference pieces of the no-jammer inner object."""
        cfg = self.cfg
        p = cfg.power
        l = n3 + tau + a
        pref = (
            cfg.rho_d**tau
            * (cfg.e2.big_upsilon * cfg.rho_e2) ** a
            / cfg.sr.ups ** (l + 1.0)
        )
        spec = MeijerGSpec(
            1, 2,
            ((1.0, 0.0), (-l, p.eps_i * p.sigma_s * cfg.sr.ups)),
            ((n2 + 1.0, 0.0), (0.0, 0.0)),
        )
        g = meijer_g(spec, cfg.se1.ups / cfg.sr.ups, _G_POLICY).value
        dmb = self._dmb(n2, 0, a, tau, n3 + 1.0, "n1")
        return pref * (self.f_sp * g + dmb)

    def _psi1(self, n3: int, a: float, tau: float) -> float:
        cfg = self.cfg
        p = cfg.power
        nu = n3 + tau + a + 1.0
        pref = (
            cfg.rho_d**tau
            * (cfg.e2.big_upsilon * cfg.rho_e2) ** a
            / cfg.sr.ups**nu
        )
        head = self.f_sp * float(
            np.real(upper_incomplete_gamma(nu, p.eps_i * p.sigma_s * cfg.sr.ups))
        )
        spec = MeijerGSpec(
            2, 1,
            ((tau + a, cfg.sp.lam * p.sigma_s), (1.0, 0.0)),
            ((0.0, 0.0), (nu, 0.0)),
        )
        g = meijer_g(spec, cfg.sr.ups * p.eps_i / cfg.sp.lam, _G_POLICY).value
        return pref * (head + (p.sigma_s * cfg.sp.lam) ** (tau + a) * g)

    def _psi23(self, n1: int, n2: int, n3: int, pp: int, a: float, tau: float,
               which: str) -> float:
        cfg = self.cfg
        p = cfg.power
        kappa = n2 + n3 - pp + 1.0 + a + tau
        pref = (
            cfg.rho_d**tau
            * (cfg.e2.big_upsilon * cfg.rho_e2) ** a
            / cfg.zeta**kappa
        )
        v_inc = cfg.zeta * p.eps_i * p.sigma_s
        if which == "psi2":
            spec = MeijerGSpec(
                2, 2,
                ((-float(pp), 0.0), (1.0, 0.0)),
                ((n1 + 1.0, 0.0), (kappa, v_inc), (0.0, 0.0)),
            )
            m_val = meijer_g(spec, p.sigma_sj * cfg.chi / p.gamma_i, _G_POLICY).value
            dmb = self._dmb(n1, pp, a, tau, kappa - a - tau, "y")
            return pref * (self.f_sp * m_val + dmb)
        spec = MeijerGSpec(
            2, 3,
            ((-float(pp), 0.0), (1.0, 0.0), (0.0, p.sigma_sj * cfg.sjp.lam)),
            ((n1 + 1.0, 0.0), (kappa, v_inc), (0.0, 0.0)),
        )
        phi_val = meijer_g(spec, cfg.chi / (cfg.sjp.lam * p.gamma_i), _G_POLICY).value
        dmb = self._dmb(n1, pp, a, tau, kappa - a - tau, "w")
        return pref * (self.f_sp * phi_val + dmb)

    def _v_obj(self, n2: int, n3: int, pp: int, a: float, tau: float) -> float:
        """High-interference first-residue replacement of the jammer objects."""
        cfg = self.cfg
        p = cfg.power
        kappa = n2 + n3 - pp + 1.0 + a + tau
        pref = (
            cfg.rho_d**tau
            * (cfg.e2.big_upsilon * cfg.rho_e2) ** a
            / cfg.zeta**kappa
            * cfg.chi
            * math.gamma(2.0 + pp)
            / p.gamma_i
        )
        head = self.f_sp * float(
            np.real(upper_incomplete_gamma(kappa - 1.0, cfg.zeta * p.eps_i * p.sigma_s))
        )
        spec = MeijerGSpec(
            2, 1,
            ((a + tau, cfg.sp.lam * p.sigma_s), (1.0, 0.0)),
            ((0.0, 0.0), (kappa - 1.0, 0.0)),
        )
        g = meijer_g(spec, cfg.zeta * p.eps_i / cfg.sp.lam, _G_POLICY).value
        return pref * (head + (cfg.sp.lam * p.sigma_s) ** (a + tau) * g)

    # -- per-tau branch value ---------------------------------------------
    def d_tau(self, tau: float) -> float:
        cfg = self.cfg
        p = cfg.power
        se1, sje1, sr = cfg.se1, cfg.sje1, cfg.sr
        ups_d_tau = cfg.d.big_upsilon**tau

        if not p.jammer_on:
            total = 0.0
            for n2 in range(se1.m):
                for n3 in range(sr.m):
                    coef = sr.phi[n3] * se1.phi[n2] / se1.ups ** (n2 + 1.0)
                    summer = BranchSummer(cfg.e2, tau)
                    total += coef * summer.sum(
                        lambda a, n2=n2, n3=n3: self._n1_obj(n2, n3, a, tau)
                    )
            return ups_d_tau * se1.big_delta * sr.big_delta * total

        head = 0.0
        for n3 in range(sr.m):
            summer = BranchSummer(cfg.e2, tau)
            head += sr.phi[n3] * summer.sum(
                lambda a, n3=n3: self._psi1(n3, a, tau)
            )
        jam = 0.0
        c_jp = p.sigma_sj * cfg.sjp.lam
        psi3_w = float(np.real(upper_incomplete_gamma(2.0, c_jp))) / cfg.sjp.lam
        n1_range = (0,) if self.asymptotic else range(sje1.m)
        for n1 in n1_range:
            for n2 in range(se1.m):
                for pp in range(n2 + 1):
                    for n3 in range(sr.m):
                        coef = b_coeff(sje1, se1, sr, n1, n2, n3, pp)
                        if self.asymptotic:
                            s23 = BranchSummer(cfg.e2, tau).sum(
                                lambda a, n2=n2, n3=n3, pp=pp: self._v_obj(
                                    n2, n3, pp, a, tau
                                )
                            )
                            jam += coef * (
                                self.f_sjp * p.sigma_sj + psi3_w
                            ) * s23
                        else:
                            s2 = BranchSummer(cfg.e2, tau).sum(
                                lambda a, n1=n1, n2=n2, n3=n3, pp=pp: self._psi23(
                                    n1, n2, n3, pp, a, tau, "psi2"
                                )
                            )
                            s3 = BranchSummer(cfg.e2, tau).sum(
                                lambda a, n1=n1, n2=n2, n3=n3, pp=pp: self._psi23(
                                    n1, n2, n3, pp, a, tau, "psi3"
                                )
                            )
                            jam += coef * (self.f_sjp * s2 + s3)
        return ups_d_tau * sr.big_delta * (
            head - se1.big_delta * sje1.big_delta * jam
        )

    def evaluate(self) -> float:
        cfg = self.cfg
        d0 = self.d_tau(0.0)
        bracket = BranchSummer(cfg.d, 0.0).sum(self.d_tau)
        return 1.0 - cfg.e2.big_o * d0 + cfg.theta * bracket


def _hybrid_ip(cfg: NetworkConfig, asymptotic: bool) -> tuple[float, dict]:
    j2 = ClosedFormJ2(cfg.d, cfg.e2, cfg.power.gamma_th)
    x_lo = cfg.power.gamma_th / cfg.power.gamma_s
    x_hi = 60.0 / cfg.sr.ups
    if not cfg.power.jammer_on:
        def e1(x):
            return sr_cdf(cfg.se1, x)
    elif asymptotic:
        e1 = JammerE1CdfAsymptotic(cfg)
    else:
        e1 = gridded_ratio_fn(JammerE1CdfClosed(cfg, x_lo, x_hi), x_lo, x_hi)
    engine = R1Engine(cfg, e1, j2)
    return engine.ip()


def _finish(cfg: NetworkConfig, raw: float, path: str, meta: dict) -> IPEstimate:
    clipped = min(max(raw, 0.0), 1.0)
    if abs(raw - clipped) > 5e-3:
        raise EvaluationError(
            f"raw closed-form value {raw:.5f} too far outside [0, 1]"
        )
    meta = dict(meta)
    meta["raw"] = raw
    return IPEstimate(
        value=clipped, ci_low=clipped, ci_high=clipped, n=0, seed=0,
        path=path, meta=meta,
    )


def ip_closed_form(cfg: NetworkConfig, jammer_on: bool | None = None,
                   organization: str = "auto") -> IPEstimate:
    """Exact intercept probability from the residue assembly.

    ``organization``: "series" forces the literal branch-series form,
    "hybrid" the integral organization of the same algebra, "auto" picks
    by the stability pre-gate and falls back on series instability.
    """
    if jammer_on is not None:
        cfg = cfg.with_jammer(jammer_on)
    if cfg.d.r != 1 or cfg.e2.r != 1:
        raise ValueError("closed form requires coherent detection (r = 1)")
    gate = series_stability(cfg)
    if organization not in ("auto", "series", "hybrid"):
        raise ValueError("organization must be auto, series or hybrid")
    use_series = organization == "series" or (
        organization == "auto" and gate["series_ok"]
    )
    if use_series:
        try:
            raw = _SeriesEvaluator(cfg, asymptotic=False).evaluate()
            return _finish(cfg, raw, "closed", {"organization": "series", **gate})
        except (SeriesUnstableError, NonConvergenceError, OverflowError):
            if organization == "series":
                raise
    value, meta = _hybrid_ip(cfg, asymptotic=False)
    meta.update(gate)
    meta["organization"] = "hybrid"
    return _finish(cfg, meta["raw"], "closed", meta)


def ip_asymptotic(cfg: NetworkConfig, jammer_on: bool | None = None,
                  organization: str = "auto") -> IPEstimate:
    """High-interference-power asymptote (friendly jammer only).

    Without the jammer the exact expression does not depend on the
    tolerated interference power, so no asymptote in it exists; such
    requests are rejected.
    """
    if jammer_on is not None:
        cfg = cfg.with_jammer(jammer_on)
    if not cfg.power.jammer_on:
        raise ValueError(
            "asymptotic form exists only with the jammer on (no dependence "
            "on the tolerated interference power otherwise)"
        )
    if cfg.d.r != 1 or cfg.e2.r != 1:
        raise ValueError("closed form requires coherent detection (r = 1)")
    gate = series_stability(cfg)
    if organization not in ("auto", "series", "hybrid"):
        raise ValueError("organization must be auto, series or hybrid")
    use_series = organization == "series" or (
        organization == "auto" and gate["series_ok"]
    )
    if use_series:
        try:
            raw = _SeriesEvaluator(cfg, asymptotic=True).evaluate()
            return _finish(cfg, raw, "asymptotic", {"organization": "series", **gate})
        except (SeriesUnstableError, NonConvergenceError, OverflowError):
            if organization == "series":
                raise
    value, meta = _hybrid_ip(cfg, asymptotic=True)
    meta.update(gate)
    meta["organization"] = "hybrid"
    return _finish(cfg, meta["raw"], "asymptotic", meta)
