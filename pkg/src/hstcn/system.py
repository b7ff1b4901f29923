"""Deterministic mapping from channel gains and power settings to SNRs,
secrecy capacity and the intercept indicator.

Underlay operation caps each secondary transmitter at the power that keeps
its interference at the primary receiver below the tolerated level, hence
the min(peak, tolerated/gain) structure in every SNR.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PowerConfig",
    "GainDraw",
    "SnrDraw",
    "db_to_linear",
    "linear_to_db",
    "snr_relay",
    "snr_eve1",
    "snr_optical",
    "secrecy_capacity",
    "e2e_snr",
    "intercept_indicator",
]


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class PowerConfig:
    """Transmit/interference powers in linear SNR units plus the jammer flag."""

    gamma_s: float       # source peak SNR
    gamma_sj: float      # jammer peak SNR
    gamma_i: float       # max tolerated interference at the primary receiver
    gamma_th: float      # relay decoding threshold
    jammer_on: bool = False

    def __post_init__(self):
        if min(self.gamma_s, self.gamma_sj, self.gamma_i, self.gamma_th) <= 0:
            raise ValueError("all powers must be strictly positive")

    @property
    def sigma_s(self) -> float:
        return self.gamma_i / self.gamma_s

    @property
    def sigma_sj(self) -> float:
        return self.gamma_i / self.gamma_sj

    @property
    def eps_i(self) -> float:
        return self.gamma_th / self.gamma_i


@dataclass(frozen=True)
class GainDraw:
    """One joint realization of the five RF gains and two optical SNRs."""

    g_sp: float
    g_sjp: float
    g_sr: float
    g_se1: float
    g_sje1: float
    gamma_d: float
    gamma_e2: float


@dataclass(frozen=True)
class SnrDraw:
    gamma_r: float
    gamma_e1: float
    gamma_d: float
    gamma_e2: float


def _cap(peak, tolerated, gain_to_primary):
    """min(peak, tolerated / g); g = 0 resolves to the peak power."""
    g = np.asarray(gain_to_primary, dtype=float)
    with np.errstate(divide="ignore"):
        lim = np.where(g > 0, tolerated / np.where(g > 0, g, 1.0), np.inf)
    return np.minimum(peak, lim)


def snr_relay(pc: PowerConfig, g_sr, g_sp):
    """Relay SNR min(gamma_s, gamma_i / g_sp) * g_sr."""
    return _cap(pc.gamma_s, pc.gamma_i, g_sp) * np.asarray(g_sr, dtype=float)


def snr_eve1(pc: PowerConfig, g_se1, g_sp, g_sje1=0.0, g_sjp=0.0):
    """First-hop eavesdropper SNR, with or without the friendly jammer.

    Without jamming this is the capped source SNR through g_se1; with it,
    the same quantity divided by one plus the capped jammer SNR (the noise
    floor at the eavesdropper rises by the undecodable artificial noise).
    """
    u_s = _cap(pc.gamma_s, pc.gamma_i, g_sp) * np.asarray(g_se1, dtype=float)
    if not pc.jammer_on:
        return u_s
    u_sj = _cap(pc.gamma_sj, pc.gamma_i, g_sjp) * np.asarray(g_sje1, dtype=float)
    return u_s / (u_sj + 1.0)


def snr_optical(gamma_draw):
    """Second-hop SNR: the channel draw itself (powers folded into mu_r)."""
    return np.asarray(gamma_draw, dtype=float)


def secrecy_capacity(s: SnrDraw | None = None, gamma_th: float | None = None, *,
                     gamma_r=None, gamma_e1=None, gamma_d=None, gamma_e2=None):
    """Secrecy capacity with the decode-and-forward gate.

    Below the decoding threshold the relay cannot forward and the link is
    dead (capacity 0).  Otherwise the capacity is the minimum of the
    first-hop secrecy rate against E1 and the second-hop rate against E2,
    the latter limited by both the relay and destination SNRs.
    """
    if s is not None:
        gamma_r, gamma_e1 = s.gamma_r, s.gamma_e1
        gamma_d, gamma_e2 = s.gamma_d, s.gamma_e2
    gr = np.asarray(gamma_r, dtype=float)
    ge1 = np.asarray(gamma_e1, dtype=float)
    gd = np.asarray(gamma_d, dtype=float)
    ge2 = np.asarray(gamma_e2, dtype=float)
    c1 = np.log2((1.0 + gr) / (1.0 + ge1))
    c2 = np.minimum(
        np.log2((1.0 + gr) / (1.0 + ge2)), np.log2((1.0 + gd) / (1.0 + ge2))
    )
    csec = np.minimum(c1, c2)
    out = np.where(gr < gamma_th, 0.0, csec)
    return float(out) if out.ndim == 0 else out


def e2e_snr(s: SnrDraw | None = None, *, gamma_r=None, gamma_d=None):
    """Equivalent end-to-end SNR of the decode-and-forward chain."""
    if s is not None:
        gamma_r, gamma_d = s.gamma_r, s.gamma_d
    out = np.minimum(np.asarray(gamma_r, dtype=float), np.asarray(gamma_d, dtype=float))
    return float(out) if out.ndim == 0 else out


def intercept_indicator(gamma_r, gamma_e1, gamma_d, gamma_e2, gamma_th):
    """True where the draw is intercepted: decode failure or C_sec <= 0.

    Equivalent to NOT(gamma_r > gamma_e1 and gamma_r > gamma_e2 and
    gamma_d > gamma_e2 and gamma_r > gamma_th).
    """
    gr = np.asarray(gamma_r, dtype=float)
    secure = (
        (gr > np.asarray(gamma_e1))
        & (gr > np.asarray(gamma_e2))
        & (np.asarray(gamma_d) > np.asarray(gamma_e2))
        & (gr > gamma_th)
    )
    return ~secure
