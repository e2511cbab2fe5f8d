"""Simulation configuration, presets and the INI-style config parser."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace

MB = 1_000_000


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GroupConfig:
    name: str
    count: int
    speed_min: float
    speed_max: float
    pause_min: float
    pause_max: float

    def validate(self):
        if self.count < 0:
            raise ConfigError(f"group {self.name}: count must be >= 0")
        if not 0 <= self.speed_min <= self.speed_max:
            raise ConfigError(f"group {self.name}: need 0 <= speed_min <= speed_max")
        if not 0 <= self.pause_min <= self.pause_max:
            raise ConfigError(f"group {self.name}: need 0 <= pause_min <= pause_max")


@dataclass(frozen=True)
class TrafficConfig:
    interval_min_s: float = 25.0
    interval_max_s: float = 35.0
    size_min_bytes: int = MB // 2
    size_max_bytes: int = MB
    ttl_s: float = 5 * 3600.0

    def validate(self):
        if not 0 < self.interval_min_s <= self.interval_max_s:
            raise ConfigError("traffic: need 0 < interval_min_s <= interval_max_s")
        if not 0 < self.size_min_bytes <= self.size_max_bytes:
            raise ConfigError("traffic: need 0 < size_min_bytes <= size_max_bytes")
        if self.ttl_s <= 0:
            raise ConfigError("traffic: ttl_s must be > 0")


CITY_GROUPS = (
    GroupConfig("pedestrians", 80, 0.5, 1.5, 0.0, 120.0),
    GroupConfig("cars", 40, 2.7, 13.9, 0.0, 120.0),
    GroupConfig("trams", 6, 7.0, 10.0, 10.0, 30.0),
)

DESK_GROUPS = (
    GroupConfig("pedestrians", 20, 0.5, 1.5, 0.0, 120.0),
    GroupConfig("cars", 8, 2.7, 13.9, 0.0, 120.0),
    GroupConfig("trams", 2, 7.0, 10.0, 10.0, 30.0),
)

ROUTERS = ("centroid", "centermass", "vector", "epidemic")
NOISY_DEFAULT_M = 20.0


def split_router(name):
    """Return ``(base, noisy)`` for a router name such as ``centroid-noisy``."""
    base, noisy = name, False
    if name.endswith("-noisy"):
        base, noisy = name[: -len("-noisy")], True
    if base not in ROUTERS:
        raise ConfigError(f"unknown router {name!r}; expected one of {', '.join(ROUTERS)} (optionally with -noisy)")
    return base, noisy


@dataclass(frozen=True)
class SimConfig:
    duration_s: float = 12 * 3600.0
    warmup_s: float = 1000.0
    timestep_s: float = 0.1
    world_width_m: float = 4500.0
    world_height_m: float = 3400.0
    transmit_range_m: float = 10.0
    bandwidth_bps: int = 10_000_000
    buffer_bytes: int = 5 * MB
    node_groups: tuple = CITY_GROUPS
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    noise_amplitude_m: float = 0.0
    gps_interval_s: float = 1.0
    router: str = "centroid"
    seed: int = 0

    @property
    def n_nodes(self):
        return sum(g.count for g in self.node_groups)

    @property
    def effective_noise_m(self):
        """Noise actually applied to GPS samples.

        A ``-noisy`` router name turns on the 20 m default when the config
        itself asks for no noise.
        """
        _, noisy = split_router(self.router)
        if noisy and self.noise_amplitude_m == 0:
            return NOISY_DEFAULT_M
        return self.noise_amplitude_m

    def validate(self):
        if not self.duration_s > self.warmup_s >= 0 and not (self.duration_s == 0 and self.warmup_s == 0):
            raise ConfigError("need duration_s > warmup_s >= 0")
        if self.timestep_s <= 0:
            raise ConfigError("timestep_s must be > 0")
        if self.transmit_range_m <= 0:
            raise ConfigError("transmit_range_m must be > 0")
        if self.bandwidth_bps <= 0:
            raise ConfigError("bandwidth_bps must be > 0")
        if self.buffer_bytes <= 0:
            raise ConfigError("buffer_bytes must be > 0")
        if self.world_width_m <= 0 or self.world_height_m <= 0:
            raise ConfigError("world dimensions must be > 0")
        if self.noise_amplitude_m < 0:
            raise ConfigError("noise_amplitude_m must be >= 0")
        if self.gps_interval_s <= 0:
            raise ConfigError("gps_interval_s must be > 0")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.n_nodes < 2:
            raise ConfigError("need at least two nodes")
        for g in self.node_groups:
            g.validate()
        self.traffic.validate()
        split_router(self.router)
        return self


def city_config(**overrides):
    return replace(SimConfig(), **overrides)


def desk_config(**overrides):
    """Small scenario: 30 nodes on 2 km x 2 km for 2 h with 50 m radios."""
    base = SimConfig(
        duration_s=2 * 3600.0,
        world_width_m=2000.0,
        world_height_m=2000.0,
        transmit_range_m=50.0,
        node_groups=DESK_GROUPS,
    )
    return replace(base, **overrides)


PRESETS = {"city": city_config, "desk": desk_config}

_TRAFFIC_KEYS = {
    "message_interval_min_s": ("interval_min_s", float),
    "message_interval_max_s": ("interval_max_s", float),
    "message_size_min_bytes": ("size_min_bytes", int),
    "message_size_max_bytes": ("size_max_bytes", int),
    "message_ttl_s": ("ttl_s", float),
}
_GROUP_KEYS = {"count": int, "speed_min": float, "speed_max": float, "pause_min": float, "pause_max": float}


def _top_level_keys():
    types = {"router": str}
    for f in dataclasses.fields(SimConfig):
        if f.name in ("node_groups", "traffic", "router"):
            continue
        types[f.name] = f.type
    conv = {"float": float, "int": int, "str": str}
    return {k: conv.get(v, v) for k, v in types.items()}


def _convert(kind, raw, lineno, key):
    try:
        if kind is int:
            value = float(raw)
            if not value.is_integer():
                raise ValueError
            return int(value)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: bad value {raw!r} for {key}") from None


def parse_sections(text):
    """Split INI-style text into ``[(section, key, value, lineno), ...]``.

    Keys before the first header belong to section ``""``.
    """
    entries = []
    section = ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigError(f"line {lineno}: malformed section header {line!r}")
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        entries.append((section, key, value, lineno))
    return entries


def config_from_entries(entries, base=None):
    """Build a SimConfig from parsed ``(section, key, value, lineno)`` entries."""
    top_types = _top_level_keys()
    cfg = base if base is not None else SimConfig()
    top, traffic, groups = {}, {}, {}
    group_order = []
    seen = set()
    for section, key, value, lineno in entries:
        if (section, key) in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add((section, key))
        if section == "":
            if key == "preset":
                if value not in PRESETS:
                    raise ConfigError(f"line {lineno}: unknown preset {value!r}")
                if top or traffic:
                    raise ConfigError(f"line {lineno}: preset must come before other keys")
                cfg = PRESETS[value]()
            elif key in _TRAFFIC_KEYS:
                name, kind = _TRAFFIC_KEYS[key]
                traffic[name] = _convert(kind, value, lineno, key)
            elif key in top_types:
                top[key] = _convert(top_types[key], value, lineno, key)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        elif section.startswith("group:"):
            gname = section[len("group:"):].strip()
            if not gname:
                raise ConfigError(f"line {lineno}: group section needs a name")
            if key not in _GROUP_KEYS:
                raise ConfigError(f"line {lineno}: unknown group key {key!r}")
            if gname not in groups:
                groups[gname] = {}
                group_order.append(gname)
            groups[gname][key] = _convert(_GROUP_KEYS[key], value, lineno, key)
        else:
            raise ConfigError(f"line {lineno}: unknown section [{section}]")

    if groups:
        built = []
        for gname in group_order:
            missing = set(_GROUP_KEYS) - set(groups[gname])
            if missing:
                raise ConfigError(f"group {gname}: missing keys {', '.join(sorted(missing))}")
            built.append(GroupConfig(gname, **groups[gname]))
        top["node_groups"] = tuple(built)
    if traffic:
        top["traffic"] = replace(cfg.traffic, **traffic)
    cfg = replace(cfg, **top)
    try:
        return cfg.validate()
    except ConfigError as exc:
        raise ConfigError(f"invalid config: {exc}") from None


def parse_config(text, base=None):
    """Parse ``key = value`` text with optional ``[group:<name>]`` sections.

    Missing keys take the city preset defaults (or the chosen ``preset``). Defining
    any group replaces the default groups entirely.
    """
    return config_from_entries(parse_sections(text), base=base)


def format_config(cfg):
    """Inverse of :func:`parse_config`."""
    lines = []
    for f in dataclasses.fields(SimConfig):
        if f.name in ("node_groups", "traffic"):
            continue
        lines.append(f"{f.name} = {getattr(cfg, f.name)}")
    for key, (name, _) in _TRAFFIC_KEYS.items():
        lines.append(f"{key} = {getattr(cfg.traffic, name)}")
    for g in cfg.node_groups:
        lines.append("")
        lines.append(f"[group:{g.name}]")
        for key in _GROUP_KEYS:
            lines.append(f"{key} = {getattr(g, key)}")
    return "\n".join(lines) + "\n"
