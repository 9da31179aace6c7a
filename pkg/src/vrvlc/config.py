"""Run configuration: a small `[section]` / `key = value` format with unit suffixes.

    [arena]
    dimensions = 5, 5, 3 m
    transmitter = 1.25, 1.25, 3 m     # repeat once per transmitter

    [channel]
    bandwidth = 10 MHz

Omitted keys take the reference-arena defaults. Every value is validated
before any study runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

from .arena import DEFAULT_DIMENSIONS, DEFAULT_TX_POSITIONS, DEFAULT_USER_HEIGHT, Arena
from .channel import (
    DEFAULT_DIVERGENCE,
    DEFAULT_R_HEADSET,
    DEFAULT_R_PD,
    DEFAULT_TX_POWER,
    ChannelParams,
    Transmitter,
)
from .combining import COMBINERS
from .headset import HeadsetParams


class ConfigError(ValueError):
    def __init__(self, message: str, section: str | None = None, key: str | None = None, line: int | None = None):
        self.section, self.key, self.line = section, key, line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if section is not None:
            where.append(f"[{section}]" + (f" {key}" if key else ""))
        super().__init__((", ".join(where) + ": " if where else "") + message)


# unit suffix -> (dimension, factor to SI)
UNITS = {
    "m": ("length", 1.0),
    "cm": ("length", 1e-2),
    "mm": ("length", 1e-3),
    "W": ("power", 1.0),
    "mW": ("power", 1e-3),
    "Hz": ("frequency", 1.0),
    "kHz": ("frequency", 1e3),
    "MHz": ("frequency", 1e6),
    "GHz": ("frequency", 1e9),
    "A": ("current", 1.0),
    "mA": ("current", 1e-3),
    "uA": ("current", 1e-6),
    "deg": ("angle", 1.0),
    "K": ("temperature", 1.0),
    "S": ("conductance", 1.0),
    "mS": ("conductance", 1e-3),
    "A/W": ("responsivity", 1.0),
    "F/m2": ("capacitance_area", 1.0),
    "pF/cm2": ("capacitance_area", 1e-8),
    "C": ("charge", 1.0),
    "J/K": ("entropy", 1.0),
    "m2": ("area", 1.0),
}

# per-section key -> (dimension or None, kind); kind: scalar | vector | list | int | str | strlist
SCHEMA: dict[str, dict[str, tuple[str | None, str]]] = {
    "arena": {
        "dimensions": ("length", "vector"),
        "user_height": ("length", "scalar"),
        "transmitter": ("length", "vector"),
    },
    "channel": {
        "tx_power": ("power", "scalar"),
        "divergence": ("angle", "scalar"),
        "responsivity": ("responsivity", "scalar"),
        "bandwidth": ("frequency", "scalar"),
        "filter_transmission": (None, "scalar"),
        "refractive_index": (None, "scalar"),
        "fov": ("angle", "scalar"),
        "background_current": ("current", "scalar"),
        "i2": (None, "scalar"),
        "i3": (None, "scalar"),
        "electron_charge": ("charge", "scalar"),
        "boltzmann": ("entropy", "scalar"),
        "temperature": ("temperature", "scalar"),
        "open_loop_gain": (None, "scalar"),
        "capacitance_per_area": ("capacitance_area", "scalar"),
        "fet_channel_noise_factor": (None, "scalar"),
        "fet_transconductance": ("conductance", "scalar"),
    },
    "headset": {
        "r_headset": ("length", "scalar"),
        "r_pd": ("length", "scalar"),
    },
    "study": {
        "name": (None, "str"),
        "theta_d": ("angle", "list"),
        "alpha": (None, "list"),
        "combiners": (None, "strlist"),
        "grid": (None, "str"),
        "roll_step": ("angle", "scalar"),
        "pitch_step": ("angle", "scalar"),
        "yaw_step": ("angle", "scalar"),
        "orientations": (None, "int"),
        "tilt": ("angle", "scalar"),
        "users_per_side": (None, "int"),
        "margin": ("length", "scalar"),
        "user": ("length", "vector"),
        "seed": (None, "int"),
        "workers": (None, "int"),
        "output": (None, "str"),
        "trace": (None, "str"),
    },
}

# channel-section keys that map one-to-one onto ChannelParams fields
_CHANNEL_FIELDS = {
    "responsivity", "bandwidth", "filter_transmission", "refractive_index", "background_current",
    "i2", "i3", "electron_charge", "boltzmann", "temperature", "open_loop_gain",
    "capacitance_per_area", "fet_channel_noise_factor", "fet_transconductance",
}


@dataclass(frozen=True)
class StudyConfig:
    name: str = ""
    theta_d: tuple[float, ...] = (15.0, 20.0, 30.0, 40.0, 60.0)
    alpha: tuple[float, ...] = (1.5, 2.0, 2.5, 3.0)
    combiners: tuple[str, ...] = COMBINERS
    grid: str = "coarse"
    roll_step: float = 5.0
    pitch_step: float = 5.0
    yaw_step: float = 10.0
    orientations: int = 500
    tilt: float = 60.0
    users_per_side: int = 11
    margin: float = 0.0
    user: tuple[float, ...] = (1.25, 1.25)
    seed: int = 1
    workers: int = 1
    output: str = ""
    trace: str = ""


@dataclass(frozen=True)
class RunConfig:
    arena: Arena
    channel: ChannelParams
    r_headset: float = DEFAULT_R_HEADSET
    r_pd: float = DEFAULT_R_PD
    study: StudyConfig = field(default_factory=StudyConfig)

    def headset(self, theta_d: float) -> HeadsetParams:
        return HeadsetParams(self.r_headset, self.r_pd, theta_d)

    def user_position(self) -> tuple[float, float, float]:
        u = self.study.user
        return (u[0], u[1], self.arena.user_height) if len(u) == 2 else tuple(u)


def _number(token: str, dim: str | None) -> float:
    token = token.strip()
    value, _, unit = token.partition(" ")
    unit = unit.strip()
    x = float(value)
    if unit:
        if unit not in UNITS:
            raise ValueError(f"unknown unit {unit!r}")
        udim, factor = UNITS[unit]
        if udim != dim:
            raise ValueError(f"unit {unit!r} is not a {dim or 'dimensionless'} unit")
        x *= factor
    if not math.isfinite(x):
        raise ValueError("value must be finite")
    return x


def _split_unit(text: str) -> tuple[list[str], str]:
    """'1, 2, 3 m' -> (['1', '2', '3'], 'm')."""
    parts = [p.strip() for p in text.split(",")]
    last, _, unit = parts[-1].partition(" ")
    parts[-1] = last
    return parts, unit.strip()


def _convert(raw: str, dim: str | None, kind: str):
    if kind == "str":
        return raw
    if kind == "strlist":
        return tuple(p.strip() for p in raw.split(",") if p.strip())
    if kind == "int":
        return int(raw)
    if kind == "scalar":
        return _number(raw, dim)
    parts, unit = _split_unit(raw)
    return tuple(_number(f"{p} {unit}" if unit else p, dim) for p in parts)


def parse_config(text: str) -> RunConfig:
    raw: dict[str, dict[str, object]] = {s: {} for s in SCHEMA}
    lines: dict[tuple[str, str], int] = {}
    transmitters: list[tuple[tuple[float, ...], int]] = []
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", line=lineno)
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", section, line=lineno)
        if section is None:
            raise ConfigError("key outside of any section", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA[section]:
            raise ConfigError("unknown key", section, key, lineno)
        dim, kind = SCHEMA[section][key]
        try:
            converted = _convert(value, dim, kind)
        except ValueError as exc:
            raise ConfigError(f"bad value {value!r}: {exc}", section, key, lineno) from None
        if section == "arena" and key == "transmitter":
            transmitters.append((converted, lineno))
            continue
        if key in raw[section]:
            raise ConfigError("duplicate key", section, key, lineno)
        raw[section][key] = converted
        lines[(section, key)] = lineno
    return _build(raw, transmitters, lines)


def _check(cond: bool, message: str, section: str, key: str, lines) -> None:
    if not cond:
        raise ConfigError(message, section, key, lines.get((section, key)))


def _build(raw, transmitters, lines) -> RunConfig:
    a, c, h, s = raw["arena"], raw["channel"], raw["headset"], raw["study"]

    power = c.get("tx_power", DEFAULT_TX_POWER)
    divergence = c.get("divergence", DEFAULT_DIVERGENCE)
    _check(power > 0, "constraint violated: tx_power > 0", "channel", "tx_power", lines)
    _check(0 < divergence < 90, "constraint violated: 0 < divergence < 90", "channel", "divergence", lines)

    dims = a.get("dimensions", DEFAULT_DIMENSIONS)
    _check(len(dims) == 3, "dimensions needs three values", "arena", "dimensions", lines)
    positions = [(p, ln) for p, ln in transmitters] or [(p, None) for p in DEFAULT_TX_POSITIONS]
    txs = []
    for p, ln in positions:
        if len(p) != 3:
            raise ConfigError("transmitter needs three coordinates", "arena", "transmitter", ln)
        txs.append(Transmitter(p, power, divergence))
    try:
        arena = Arena(dims, tuple(txs), a.get("user_height", DEFAULT_USER_HEIGHT))
    except ValueError as exc:
        raise ConfigError(str(exc), "arena") from None

    r_headset = h.get("r_headset", DEFAULT_R_HEADSET)
    r_pd = h.get("r_pd", DEFAULT_R_PD)
    _check(r_headset > 0, "constraint violated: r_headset > 0", "headset", "r_headset", lines)
    _check(0 < r_pd < r_headset, "constraint violated: 0 < r_pd < r_headset", "headset", "r_pd", lines)

    kwargs = {k: v for k, v in c.items() if k in _CHANNEL_FIELDS}
    if "fov" in c:
        kwargs["fov_half_angle"] = c["fov"]
    for k, v in kwargs.items():
        key = "fov" if k == "fov_half_angle" else k
        _check(v > 0, f"constraint violated: {key} > 0", "channel", key, lines)
    try:
        channel = ChannelParams(a_pd=math.pi * r_pd**2, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc), "channel") from None

    study = StudyConfig(**s)
    for t in study.theta_d:
        _check(0 < t <= 90, "constraint violated: 0 < theta_d ≤ 90", "study", "theta_d", lines)
    for x in study.alpha:
        _check(x > 0, "constraint violated: alpha > 0", "study", "alpha", lines)
    for name in study.combiners:
        _check(name in COMBINERS, f"unknown combiner {name!r}", "study", "combiners", lines)
    _check(study.grid in ("coarse", "full"), "grid must be 'coarse' or 'full'", "study", "grid", lines)
    for key in ("roll_step", "pitch_step", "yaw_step", "orientations", "users_per_side", "workers"):
        _check(getattr(study, key) > 0, f"constraint violated: {key} > 0", "study", key, lines)
    _check(0 < study.tilt <= 90, "constraint violated: 0 < tilt <= 90", "study", "tilt", lines)
    _check(len(study.user) in (2, 3), "user needs 2 or 3 coordinates", "study", "user", lines)
    _check(study.margin >= 0, "constraint violated: margin >= 0", "study", "margin", lines)
    return RunConfig(arena, channel, r_headset, r_pd, study)


def default_config() -> RunConfig:
    return parse_config("")


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_config(cfg: RunConfig) -> str:
    """Serialize a config so that parse_config(emit_config(cfg)) == cfg."""
    ch = cfg.channel
    tx0 = cfg.arena.transmitters[0]
    out = ["# VLC VR arena run configuration (SI units unless suffixed)", "", "[arena]"]
    out.append("dimensions = " + ", ".join(_fmt(v) for v in cfg.arena.dimensions) + " m")
    out.append(f"user_height = {_fmt(cfg.arena.user_height)} m")
    for tx in cfg.arena.transmitters:
        out.append("transmitter = " + ", ".join(_fmt(v) for v in tx.position) + " m")
    out += ["", "[channel]"]
    out.append(f"tx_power = {_fmt(tx0.power_t)} W")
    out.append(f"divergence = {_fmt(tx0.divergence_half_angle)} deg")
    out.append(f"fov = {_fmt(ch.fov_half_angle)} deg")
    units = {
        "responsivity": " A/W", "bandwidth": " Hz", "background_current": " A",
        "electron_charge": " C", "boltzmann": " J/K", "temperature": " K",
        "capacitance_per_area": " F/m2", "fet_transconductance": " S",
    }
    for f in fields(ChannelParams):
        if f.name in _CHANNEL_FIELDS:
            out.append(f"{f.name} = {_fmt(getattr(ch, f.name))}{units.get(f.name, '')}")
    out += ["", "[headset]", f"r_headset = {_fmt(cfg.r_headset)} m", f"r_pd = {_fmt(cfg.r_pd)} m"]
    st = cfg.study
    out += ["", "[study]"]
    if st.name:
        out.append(f"name = {st.name}")
    out.append("theta_d = " + ", ".join(_fmt(v) for v in st.theta_d) + " deg")
    out.append("alpha = " + ", ".join(_fmt(v) for v in st.alpha))
    out.append("combiners = " + ", ".join(st.combiners))
    out.append(f"grid = {st.grid}")
    for key in ("roll_step", "pitch_step", "yaw_step", "tilt"):
        out.append(f"{key} = {_fmt(getattr(st, key))} deg")
    for key in ("orientations", "users_per_side", "seed", "workers"):
        out.append(f"{key} = {getattr(st, key)}")
    out.append(f"margin = {_fmt(st.margin)} m")
    out.append("user = " + ", ".join(_fmt(v) for v in st.user) + " m")
    for key in ("output", "trace"):
        if getattr(st, key):
            out.append(f"{key} = {getattr(st, key)}")
    return "\n".join(out) + "\n"


def with_overrides(cfg: RunConfig, **study_overrides) -> RunConfig:
    """Apply non-None study overrides (command-line flags win over file values)."""
    changes = {k: v for k, v in study_overrides.items() if v is not None}
    if not changes:
        return cfg
    text = emit_config(replace(cfg, study=replace(cfg.study, **changes)))
    try:
        return parse_config(text)
    except ConfigError as exc:
        # line numbers would point into the regenerated text, not the user's file
        msg = str(exc).split(": ", 1)[-1]
        raise ConfigError(msg + " (command-line override)", exc.section, exc.key) from None
