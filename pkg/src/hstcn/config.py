"""Scenario configuration: defaults, flat key-value parsing, derived scalars.

The config document format is one ``key = value`` pair per line with dotted
section keys (``optical.D.mu_db``), ``#`` comments and blank lines.  SNR-like
quantities are configured in dB and converted once at parse time
(value_linear = 10^(dB/10)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from importlib import resources

from .channels import OpticalLinkParams, RayleighGainParams, ShadowedRicianParams
from .system import PowerConfig, db_to_linear, linear_to_db

__all__ = ["NetworkConfig", "ConfigError", "parse_config", "serialize_config",
           "default_config", "load_preset", "SWEEP_PARAMETERS", "apply_sweep_value"]


class ConfigError(ValueError):
    """Malformed or inconsistent configuration; carries the offending key."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        where = f" (key {key!r})" if key else ""
        where += f" at line {line}" if line is not None else ""
        super().__init__(message + where)


# Default simulation parameters: b, m, Omega for every shadowed-Rician link,
# a common Rayleigh rate for both primary-interference links, identical
# turbulence/pointing parameters for the two optical links, and the power
# set (gamma_th 2 dB, gamma_I 9 dB, gamma_S 60 dB, gamma_SJ 10 dB,
# mu_E2 20 dB, mu_D 40 dB).
DEFAULTS: dict[str, float | str] = {
    "power.gamma_s_db": 60.0,
    "power.gamma_sj_db": 10.0,
    "power.gamma_i_db": 9.0,
    "power.gamma_th_db": 2.0,
    "power.jammer": "off",
    "rayleigh.SP.lam": 0.8,
    "rayleigh.SJP.lam": 0.8,
    "sr.SR.b": 1.4,
    "sr.SR.m": 2,
    "sr.SR.omega": 3.0,
    "sr.SE1.b": 1.4,
    "sr.SE1.m": 2,
    "sr.SE1.omega": 3.0,
    "sr.SJE1.b": 1.4,
    "sr.SJE1.m": 2,
    "sr.SJE1.omega": 3.0,
    "optical.D.alpha": 6.1096,
    "optical.D.beta": 1.0794,
    "optical.D.xi": 1.1227,
    "optical.D.mu_db": 40.0,
    "optical.D.r": 1,
    "optical.E2.alpha": 6.1096,
    "optical.E2.beta": 1.0794,
    "optical.E2.xi": 1.1227,
    "optical.E2.mu_db": 20.0,
    "optical.E2.r": 1,
}

_INT_KEYS = {"sr.SR.m", "sr.SE1.m", "sr.SJE1.m", "optical.D.r", "optical.E2.r"}


@dataclass(frozen=True)
class NetworkConfig:
    """Full scenario: powers plus the five channel parameter sets."""

    power: PowerConfig
    sp: RayleighGainParams
    sjp: RayleighGainParams
    sr: ShadowedRicianParams
    se1: ShadowedRicianParams
    sje1: ShadowedRicianParams
    d: OpticalLinkParams
    e2: OpticalLinkParams

    # -- derived scalars of the closed-form machinery -------------------
    @property
    def zeta(self) -> float:
        return self.sr.ups + self.se1.ups

    @property
    def chi(self) -> float:
        return self.sje1.ups * self.zeta / self.se1.ups

    @property
    def theta(self) -> float:
        return self.d.big_o * self.e2.big_o

    @property
    def rho_d(self) -> float:
        return self.power.gamma_s / self.d.mu_r

    @property
    def rho_e2(self) -> float:
        return self.power.gamma_s / self.e2.mu_r

    def with_jammer(self, on: bool) -> "NetworkConfig":
        return replace(self, power=replace(self.power, jammer_on=on))

    def to_mapping(self) -> dict:
        p = self.power
        m = {
            "power.gamma_s_db": linear_to_db(p.gamma_s),
            "power.gamma_sj_db": linear_to_db(p.gamma_sj),
            "power.gamma_i_db": linear_to_db(p.gamma_i),
            "power.gamma_th_db": linear_to_db(p.gamma_th),
            "power.jammer": "on" if p.jammer_on else "off",
            "rayleigh.SP.lam": self.sp.lam,
            "rayleigh.SJP.lam": self.sjp.lam,
        }
        for name, sr in (("SR", self.sr), ("SE1", self.se1), ("SJE1", self.sje1)):
            m[f"sr.{name}.b"] = sr.b
            m[f"sr.{name}.m"] = sr.m
            m[f"sr.{name}.omega"] = sr.omega
        for name, o in (("D", self.d), ("E2", self.e2)):
            m[f"optical.{name}.alpha"] = o.alpha
            m[f"optical.{name}.beta"] = o.beta
            m[f"optical.{name}.xi"] = o.xi
            m[f"optical.{name}.mu_db"] = linear_to_db(o.mu_r)
            m[f"optical.{name}.r"] = o.r
        return m


def _build(mapping: dict) -> NetworkConfig:
    def num(key):
        v = mapping[key]
        if key in _INT_KEYS:
            f = float(v)
            if f != int(f):
                raise ConfigError("must be an integer (finite-sum form requires it)", key)
            return int(f)
        return float(v)

    jam = str(mapping["power.jammer"]).strip().lower()
    if jam not in ("on", "off", "true", "false", "1", "0"):
        raise ConfigError("jammer must be on/off", "power.jammer")
    try:
        power = PowerConfig(
            gamma_s=float(db_to_linear(num("power.gamma_s_db"))),
            gamma_sj=float(db_to_linear(num("power.gamma_sj_db"))),
            gamma_i=float(db_to_linear(num("power.gamma_i_db"))),
            gamma_th=float(db_to_linear(num("power.gamma_th_db"))),
            jammer_on=jam in ("on", "true", "1"),
        )
        sp = RayleighGainParams(num("rayleigh.SP.lam"))
        sjp = RayleighGainParams(num("rayleigh.SJP.lam"))
        links = {}
        for name in ("SR", "SE1", "SJE1"):
            links[name] = ShadowedRicianParams(
                b=num(f"sr.{name}.b"), m=num(f"sr.{name}.m"), omega=num(f"sr.{name}.omega")
            )
        optical = {}
        for name in ("D", "E2"):
            optical[name] = OpticalLinkParams(
                alpha=num(f"optical.{name}.alpha"),
                beta=num(f"optical.{name}.beta"),
                xi=num(f"optical.{name}.xi"),
                mu_r=float(db_to_linear(num(f"optical.{name}.mu_db"))),
                r=num(f"optical.{name}.r"),
            )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return NetworkConfig(
        power=power, sp=sp, sjp=sjp,
        sr=links["SR"], se1=links["SE1"], sje1=links["SJE1"],
        d=optical["D"], e2=optical["E2"],
    )


def parse_config(text: str = "", overrides: dict | None = None) -> NetworkConfig:
    """Parse a flat key-value document; missing keys take the defaults."""
    mapping = dict(DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in DEFAULTS:
            raise ConfigError("unknown key", key, lineno)
        if key == "power.jammer":
            mapping[key] = value
            continue
        try:
            mapping[key] = float(value)
        except ValueError:
            raise ConfigError("not a number", key, lineno) from None
    if overrides:
        for key, value in overrides.items():
            if key not in DEFAULTS:
                raise ConfigError("unknown key", key)
            mapping[key] = value
    return _build(mapping)


def serialize_config(cfg: NetworkConfig) -> str:
    lines = [f"{k} = {v}" for k, v in sorted(cfg.to_mapping().items())]
    return "\n".join(lines) + "\n"


def default_config(jammer_on: bool = False) -> NetworkConfig:
    cfg = parse_config("")
    return cfg.with_jammer(jammer_on)


def load_preset(name: str) -> NetworkConfig:
    """Load a named preset config shipped with the package."""
    ref = resources.files("hstcn").joinpath(f"presets/{name}.cfg")
    if not ref.is_file():
        raise ConfigError(f"no preset named {name!r}")
    return parse_config(ref.read_text())


# Sweepable parameters: name -> (config key, unit) where unit "db" means the
# sweep grid is in dB and "linear" applies to all three uplink fading links.
SWEEP_PARAMETERS = {
    "gamma_i_db": ("power.gamma_i_db", "db"),
    "gamma_s_db": ("power.gamma_s_db", "db"),
    "gamma_sj_db": ("power.gamma_sj_db", "db"),
    "gamma_th_db": ("power.gamma_th_db", "db"),
    "mu_d_db": ("optical.D.mu_db", "db"),
    "omega_x": (("sr.SR.omega", "sr.SE1.omega", "sr.SJE1.omega"), "linear"),
    "b_x": (("sr.SR.b", "sr.SE1.b", "sr.SJE1.b"), "linear"),
}


def apply_sweep_value(cfg: NetworkConfig, param: str, value: float) -> NetworkConfig:
    """Return a copy of cfg with one sweepable parameter set to value."""
    if param not in SWEEP_PARAMETERS:
        raise ConfigError(f"not a sweepable parameter: {param}")
    keys, _unit = SWEEP_PARAMETERS[param]
    mapping = cfg.to_mapping()
    if isinstance(keys, tuple):
        for k in keys:
            mapping[k] = value
    else:
        mapping[keys] = value
    return _build(mapping)
