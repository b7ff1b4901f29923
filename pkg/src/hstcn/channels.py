"""Fading laws of the network: Rayleigh terrestrial gains, shadowed-Rician
RF uplinks, and Gamma-Gamma optical downlinks with pointing error.

Each family exposes exact pdf/cdf evaluators and a sampler.  Samplers are
built on fixed-length blocks of uniforms (inverse transforms only), so a
sample index maps to a fixed slice of the underlying random stream; the
``*_sample`` wrappers draw those uniforms from a numpy Generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincinv, ndtri

from .specfun import DEFAULT_POLICY, MeijerGSpec, meijer_g, meijer_g_many, mellin_line_integral
from .specfun import lower_incomplete_gamma

__all__ = [
    "ShadowedRicianParams",
    "RayleighGainParams",
    "OpticalLinkParams",
    "sr_pdf",
    "sr_cdf",
    "sr_sample",
    "rayleigh_gain_pdf",
    "rayleigh_gain_cdf",
    "rayleigh_gain_sample",
    "gg_snr_pdf",
    "gg_snr_cdf",
    "gg_snr_sf",
    "gg_snr_sample",
]


@dataclass(frozen=True)
class ShadowedRicianParams:
    """Shadowed-Rician channel-gain law (b, m, Omega) with derived constants."""

    b: float
    m: int
    omega: float

    def __post_init__(self):
        if self.b <= 0 or self.omega <= 0:
            raise ValueError("b and omega must be positive")
        if self.m < 1 or int(self.m) != self.m:
            raise ValueError("m must be a positive integer (finite-sum form)")
        object.__setattr__(self, "m", int(self.m))

    @property
    def beta(self) -> float:
        return 1.0 / (2.0 * self.b)

    @property
    def delta(self) -> float:
        return self.beta * self.omega / (2.0 * self.b * self.m + self.omega)

    @property
    def ups(self) -> float:
        return self.beta - self.delta

    @property
    def big_delta(self) -> float:
        return (1.0 / (2.0 * self.b)) * (
            2.0 * self.b * self.m / (2.0 * self.b * self.m + self.omega)
        ) ** self.m

    @property
    def phi(self) -> np.ndarray:
        """Polynomial coefficients phi^(n), n = 0..m-1."""
        m = self.m
        d = self.delta
        return np.array(
            [
                math.factorial(m - 1)
                * d**n
                / (math.factorial(m - 1 - n) * math.factorial(n) ** 2)
                for n in range(m)
            ]
        )

    @property
    def uniform_count(self) -> int:
        """Uniforms consumed per gain draw: m for the LOS power, 1 phase, 2 scatter."""
        return self.m + 3


def sr_pdf(p: ShadowedRicianParams, x):
    """Density Delta e^{-ups x} sum_n phi^(n) x^n of the channel gain."""
    x = np.asarray(x, dtype=float)
    poly = np.zeros_like(x)
    for c in p.phi[::-1]:
        poly = poly * x + c
    return np.where(x >= 0, p.big_delta * np.exp(-p.ups * x) * poly, 0.0)


def sr_cdf(p: ShadowedRicianParams, x):
    """Distribution function via lower incomplete gammas of ups*x."""
    x = np.asarray(x, dtype=float)
    ux = p.ups * np.maximum(x, 0.0)
    out = np.zeros_like(ux)
    for n, c in enumerate(p.phi):
        out = out + c / p.ups ** (n + 1) * lower_incomplete_gamma(n + 1, ux)
    return np.where(x >= 0, p.big_delta * out, 0.0)


def sr_gain_from_uniforms(p: ShadowedRicianParams, u: np.ndarray) -> np.ndarray:
    """Gain draws from uniform blocks of shape (..., m + 3).

    LOS amplitude A with Nakagami(m, Omega) law (Gamma power via m summed
    exponentials), uniform phase, and complex Gaussian scatter with
    per-dimension variance b: g = |A e^{j theta} + c_scatter|^2.
    """
    u = np.asarray(u)
    if u.shape[-1] != p.uniform_count:
        raise ValueError("uniform block has wrong width")
    m = p.m
    los_power = -(p.omega / m) * np.sum(np.log1p(-u[..., :m]), axis=-1)
    a = np.sqrt(los_power)
    theta = 2.0 * math.pi * u[..., m]
    sig = math.sqrt(p.b)
    re = a * np.cos(theta) + sig * ndtri(u[..., m + 1])
    im = a * np.sin(theta) + sig * ndtri(u[..., m + 2])
    return re * re + im * im


def sr_sample(p: ShadowedRicianParams, rng: np.random.Generator, size=None):
    shape = (p.uniform_count,) if size is None else (size, p.uniform_count)
    g = sr_gain_from_uniforms(p, rng.random(shape))
    return float(g) if size is None else g


@dataclass(frozen=True)
class RayleighGainParams:
    """Exponential law of a squared Rayleigh amplitude: rate lam."""

    lam: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be positive")


def rayleigh_gain_pdf(p: RayleighGainParams, u):
    u = np.asarray(u, dtype=float)
    return np.where(u >= 0, p.lam * np.exp(-p.lam * u), 0.0)


def rayleigh_gain_cdf(p: RayleighGainParams, u):
    u = np.asarray(u, dtype=float)
    return np.where(u >= 0, -np.expm1(-p.lam * np.maximum(u, 0.0)), 0.0)


def rayleigh_gain_from_uniforms(p: RayleighGainParams, u: np.ndarray) -> np.ndarray:
    return -np.log1p(-np.asarray(u)) / p.lam


def rayleigh_gain_sample(p: RayleighGainParams, rng: np.random.Generator, size=None):
    u = rng.random() if size is None else rng.random(size)
    out = rayleigh_gain_from_uniforms(p, u)
    return float(out) if size is None else out


# ---------------------------------------------------------------------------
# Gamma-Gamma turbulence with pointing error
# ---------------------------------------------------------------------------


def _integer_gap(x: float) -> bool:
    return abs(x - round(x)) < 1e-9


@dataclass(frozen=True)
class OpticalLinkParams:
    """Gamma-Gamma + pointing-error SNR law (alpha, beta, xi, mu_r, r).

    Raw link quantities (receive power, photodetector fraction, conversion
    ratio, noise power) are documentation only; all computations run off
    mu_r.  Construction applies the +1e-6 perturbation rule so that
    alpha - beta, xi^2 - alpha and xi^2 - beta are never integers, and
    records what it changed in ``perturbations``.
    """

    alpha: float
    beta: float
    xi: float
    mu_r: float
    r: int = 1
    p_rx: float | None = None
    omega_frac: float | None = None
    eta: float | None = None
    noise: float | None = None
    perturbations: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if min(self.alpha, self.beta, self.xi, self.mu_r) <= 0:
            raise ValueError("alpha, beta, xi, mu_r must be positive")
        if self.r not in (1, 2):
            raise ValueError("r must be 1 (coherent) or 2 (direct detection)")
        alpha, beta = self.alpha, self.beta
        pert = {}
        for _ in range(4):
            xi2 = self.xi**2
            if _integer_gap(alpha - beta) or _integer_gap(xi2 - alpha):
                alpha += 1e-6
                pert["alpha"] = alpha
                continue
            if _integer_gap(xi2 - beta):
                beta += 1e-6
                pert["beta"] = beta
                continue
            break
        else:
            raise ValueError("could not de-degenerate optical parameters")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "perturbations", pert)

    @property
    def xi2(self) -> float:
        return self.xi**2

    @property
    def big_o(self) -> float:
        return self.xi2 / (math.gamma(self.alpha) * math.gamma(self.beta))

    @property
    def big_upsilon(self) -> float:
        return self.xi2 * self.alpha * self.beta / (self.xi2 + 1.0)

    @property
    def uniform_count(self) -> int:
        return 3

    def pdf_spec(self) -> MeijerGSpec:
        return MeijerGSpec(
            3,
            0,
            ((self.xi2 + 1.0, 0.0),),
            ((self.xi2, 0.0), (self.alpha, 0.0), (self.beta, 0.0)),
        )

    def cdf_spec(self) -> MeijerGSpec:
        r = self.r
        top = [(1.0, 0.0)] + [((self.xi2 + i) / r, 0.0) for i in range(1, r + 1)]
        bottom = (
            [((self.xi2 + i) / r, 0.0) for i in range(r)]
            + [((self.alpha + i) / r, 0.0) for i in range(r)]
            + [((self.beta + i) / r, 0.0) for i in range(r)]
            + [(0.0, 0.0)]
        )
        return MeijerGSpec(3 * r, 1, tuple(top), tuple(bottom))

    def cdf_prefactor(self) -> float:
        r = self.r
        return r ** (self.alpha + self.beta - 2.0) * self.big_o / (2.0 * math.pi) ** (r - 1)

    def cdf_argument(self, z):
        r = self.r
        return self.big_upsilon**r * np.asarray(z, dtype=float) / (r ** (2 * r) * self.mu_r)


def gg_snr_pdf(p: OpticalLinkParams, z):
    """Exact SNR density via the Meijer-G form (vectorized over z > 0)."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(z <= 0):
        raise ValueError("pdf domain is z > 0")
    arg = p.big_upsilon * (z / p.mu_r) ** (1.0 / p.r)
    spec = p.pdf_spec()
    if z.size == 1:
        g = meijer_g(spec, float(arg[0])).value
        out = np.array([p.big_o / (p.r * z[0]) * g])
    else:
        out = p.big_o / (p.r * z) * meijer_g_many(spec, arg)
    return float(out[0]) if scalar else out


def gg_snr_cdf(p: OpticalLinkParams, z):
    """Exact SNR distribution function (vectorized over z >= 0)."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).astype(float)
    out = np.zeros_like(z)
    pos = z > 0
    if np.any(pos):
        arg = p.cdf_argument(z[pos])
        spec = p.cdf_spec()
        if arg.size == 1:
            g = meijer_g(spec, float(arg[0])).value
        else:
            g = meijer_g_many(spec, arg)
        out[pos] = np.clip(p.cdf_prefactor() * g, 0.0, 1.0)
    return float(out[0]) if scalar else out


def gg_snr_sf(p: OpticalLinkParams, z):
    """Survival function 1 - F, computed without cancellation at large z.

    The complementary value equals minus the same Mellin-Barnes integral
    taken on a contour shifted right of the s = 0 pole, which keeps full
    relative precision where F is within roundoff of 1.
    """
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).astype(float)
    out = np.ones_like(z)
    pos = z > 0
    if np.any(pos):
        arg = np.asarray(p.cdf_argument(z[pos]))
        spec = p.cdf_spec()
        small = arg < 2.0
        vals = np.empty_like(arg)
        if np.any(small):
            cdf_vals = p.cdf_prefactor() * meijer_g_many(spec, arg[small])
            vals[small] = 1.0 - np.clip(cdf_vals, 0.0, 1.0)
        if np.any(~small):
            big = arg[~small]
            c = 0.5 + 1.5 / math.log(2.0 + float(np.min(big)))
            sf_g, _ = mellin_line_integral(spec.log_integrand, big, c)
            vals[~small] = np.clip(-p.cdf_prefactor() * sf_g, 0.0, 1.0)
        out[pos] = vals
    return float(out[0]) if scalar else out


def gg_snr_from_uniforms(p: OpticalLinkParams, u: np.ndarray) -> np.ndarray:
    """SNR draws from uniform blocks (..., 3): two Gamma factors + pointing.

    gamma = mu_r (I_a I_p / E[I_a I_p])^r with I_a the Gamma-Gamma factor
    and I_p proportional to U^(1/xi^2); the mean normalization matches the
    pdf/cdf parameterization for both detection indices.
    """
    u = np.asarray(u)
    if u.shape[-1] != 3:
        raise ValueError("uniform block has wrong width")
    x_a = gammaincinv(p.alpha, u[..., 0]) / p.alpha
    x_b = gammaincinv(p.beta, u[..., 1]) / p.beta
    i_p = u[..., 2] ** (1.0 / p.xi2)
    mean = p.xi2 / (p.xi2 + 1.0)  # E[I_a] = 1
    return p.mu_r * ((x_a * x_b * i_p) / mean) ** p.r


def gg_snr_sample(p: OpticalLinkParams, rng: np.random.Generator, size=None):
    shape = (3,) if size is None else (size, 3)
    g = gg_snr_from_uniforms(p, rng.random(shape))
    return float(g) if size is None else g
