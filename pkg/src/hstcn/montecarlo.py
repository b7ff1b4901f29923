"""Deterministic, parallel Monte Carlo estimation of the intercept
probability and of the decode-and-secure event decomposition.

Sample i consumes a fixed, configuration-dependent slice of a Philox
counter-based stream keyed by the seed, so estimates are bit-identical for
any batch size and worker count: batches are generated by fresh Philox
instances whose 256-bit counter is set to the sample index times the
per-sample block stride.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import gg_snr_from_uniforms, rayleigh_gain_from_uniforms, sr_gain_from_uniforms
from .config import NetworkConfig
from .system import snr_eve1, snr_relay

__all__ = ["IPEstimate", "EventProbs", "draw_snrs", "estimate_ip",
           "estimate_event_probs", "sample_batch"]

_BATCH = 1 << 17


@dataclass(frozen=True)
class IPEstimate:
    """Intercept-probability value with a 95% Wilson interval."""

    value: float
    ci_low: float
    ci_high: float
    n: int
    seed: int
    path: str
    meta: dict | None = None

    def __post_init__(self):
        if not (0.0 <= self.ci_low <= self.value + 1e-12
                and self.value - 1e-12 <= self.ci_high <= 1.0 + 1e-12):
            raise ValueError("confidence interval must bracket the value in [0,1]")


@dataclass(frozen=True)
class EventProbs:
    """Probabilities of the six decode-and-secure SNR orderings."""

    p: tuple  # p1..p6
    n: int
    seed: int

    def __post_init__(self):
        if len(self.p) != 6 or any(not 0.0 <= x <= 1.0 for x in self.p):
            raise ValueError("need six probabilities in [0,1]")
        if sum(self.p) > 1.0 + 1e-12:
            raise ValueError("event probabilities exceed 1")

    @property
    def total(self) -> float:
        return float(sum(self.p))


def wilson_interval(k: int, n: int, z: float = 1.959963984540054):
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    phat = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (phat + z2 / (2.0 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _layout(cfg: NetworkConfig):
    """Column layout of one sample's uniform block."""
    widths = {
        "g_sp": 1,
        "g_sjp": 1,
        "sr": cfg.sr.uniform_count,
        "se1": cfg.se1.uniform_count,
        "sje1": cfg.sje1.uniform_count,
        "d": cfg.d.uniform_count,
        "e2": cfg.e2.uniform_count,
    }
    cols = {}
    start = 0
    for name, w in widths.items():
        cols[name] = slice(start, start + w)
        start += w
    blocks = -(-start // 4)  # Philox blocks (4 doubles) per sample
    return cols, blocks


def _uniform_block(seed: int, start: int, count: int, blocks: int) -> np.ndarray:
    bg = np.random.Philox(key=seed, counter=start * blocks)
    u = np.random.Generator(bg).random(count * 4 * blocks)
    return u.reshape(count, 4 * blocks)


def sample_batch(cfg: NetworkConfig, seed: int, start: int, count: int):
    """Raw gains and SNRs for samples [start, start+count).

    Returns dict of arrays: the five RF gains, the two optical SNRs, and
    the derived gamma_r / gamma_e1 using the shared g_sp draw (the underlay
    power cap couples the relay and eavesdropper SNRs through it).
    """
    cols, blocks = _layout(cfg)
    u = _uniform_block(seed, start, count, blocks)
    g_sp = rayleigh_gain_from_uniforms(cfg.sp, u[:, cols["g_sp"]][:, 0])
    g_sjp = rayleigh_gain_from_uniforms(cfg.sjp, u[:, cols["g_sjp"]][:, 0])
    g_sr = sr_gain_from_uniforms(cfg.sr, u[:, cols["sr"]])
    g_se1 = sr_gain_from_uniforms(cfg.se1, u[:, cols["se1"]])
    g_sje1 = sr_gain_from_uniforms(cfg.sje1, u[:, cols["sje1"]])
    gamma_d = gg_snr_from_uniforms(cfg.d, u[:, cols["d"]])
    gamma_e2 = gg_snr_from_uniforms(cfg.e2, u[:, cols["e2"]])

    gamma_r = snr_relay(cfg.power, g_sr, g_sp)
    gamma_e1 = snr_eve1(cfg.power, g_se1, g_sp, g_sje1, g_sjp)
    return {
        "g_sp": g_sp, "g_sjp": g_sjp, "g_sr": g_sr, "g_se1": g_se1,
        "g_sje1": g_sje1, "gamma_d": gamma_d, "gamma_e2": gamma_e2,
        "gamma_r": gamma_r, "gamma_e1": gamma_e1,
    }


def draw_snrs(cfg: NetworkConfig, rng: np.random.Generator):
    """One joint SNR draw (gamma_r, gamma_e1, gamma_d, gamma_e2)."""
    seed = int(rng.integers(0, 2**63 - 1))
    b = sample_batch(cfg, seed, 0, 1)
    return (
        float(b["gamma_r"][0]),
        float(b["gamma_e1"][0]),
        float(b["gamma_d"][0]),
        float(b["gamma_e2"][0]),
    )


def _secure_mask(cfg: NetworkConfig, batch):
    gr = batch["gamma_r"]
    return (
        (gr > batch["gamma_e1"])
        & (gr > batch["gamma_e2"])
        & (batch["gamma_d"] > batch["gamma_e2"])
        & (gr > cfg.power.gamma_th)
    )


def _count_range(cfg, seed, start, count):
    batch = sample_batch(cfg, seed, start, count)
    return int(np.sum(~_secure_mask(cfg, batch)))


def _run_batches(fn, n: int, workers: int | None):
    ranges = [(s, min(_BATCH, n - s)) for s in range(0, n, _BATCH)]
    if workers is None or workers <= 1 or len(ranges) <= 1:
        return [fn(s, c) for s, c in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda rc: fn(*rc), ranges))


def estimate_ip(cfg: NetworkConfig, n: int = 1_000_000, seed: int = 0,
                workers: int | None = None) -> IPEstimate:
    """Empirical intercept probability: mean of [C_sec <= 0 or decode fail].

    Deterministic function of (cfg, n, seed); the worker count only changes
    the schedule, never the result (integer count reduction over fixed
    batches).
    """
    if n < 1:
        raise ValueError("need at least one sample")
    counts = _run_batches(lambda s, c: _count_range(cfg, seed, s, c), n, workers)
    k = int(sum(counts))
    lo, hi = wilson_interval(k, n)
    return IPEstimate(value=k / n, ci_low=lo, ci_high=hi, n=n, seed=seed, path="mc")


def estimate_event_probs(cfg: NetworkConfig, n: int = 1_000_000, seed: int = 0,
                         workers: int | None = None) -> EventProbs:
    """Per-event probabilities of the six secure-decode SNR orderings.

    Events partition {relay SNR above threshold and both wiretap SNRs
    beaten, destination above E2} by the relative order of (gamma_e1,
    gamma_e2, gamma_th); ties go to the lower event index.  Their sum is
    exactly one minus the intercept estimate on the same (cfg, n, seed).
    """
    if n < 1:
        raise ValueError("need at least one sample")

    def classify(start, count):
        batch = sample_batch(cfg, seed, start, count)
        secure = _secure_mask(cfg, batch)
        e1 = batch["gamma_e1"][secure]
        e2 = batch["gamma_e2"][secure]
        th = cfg.power.gamma_th
        counts = np.zeros(6, dtype=np.int64)
        # Orderings of (e1, e2, th), largest first; ties resolved by the
        # elif chain toward the lower event index.
        c1 = (e1 >= e2) & (e2 >= th)            # E1: r > e1 > e2 > th
        c2 = (e2 > e1) & (e1 >= th) & ~c1       # E2: r > e2 > e1 > th
        c3 = (th > e2) & (e2 >= e1) & ~c1 & ~c2  # E3: r > th > e2 > e1
        c4 = (th > e1) & (e1 > e2) & ~c1 & ~c2 & ~c3   # E4: r > th > e1 > e2
        c5 = (e2 >= th) & (th > e1) & ~c1 & ~c2 & ~c3 & ~c4  # E5
        c6 = (e1 >= th) & (th > e2) & ~(c1 | c2 | c3 | c4 | c5)  # E6
        for i, c in enumerate((c1, c2, c3, c4, c5, c6)):
            counts[i] = int(np.sum(c))
        assert counts.sum() == int(np.sum(secure))
        return counts

    results = _run_batches(classify, n, workers)
    totals = np.sum(results, axis=0)
    return EventProbs(p=tuple(float(t) / n for t in totals), n=n, seed=seed)
