"""Config and sweep file parsing, CSV formatting, result fingerprints.

File format is flat `key = value` text with `#` comments. Parse errors
carry the file path, line number, and offending field; validation errors
name the violated invariant.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from importlib import resources

from .mmpp import MmppParams
from .model import Mechanism, SystemConfig

CONFIG_INT_KEYS = ("capacity_n", "rt_cap_r", "threshold_h", "threshold_l")
CONFIG_FLOAT_KEYS = (
    "lambda_nrt",
    "lambda1",
    "lambda2",
    "sigma1",
    "sigma2",
    "mu_rt",
    "mu_nrt",
)
CONFIG_KEYS = CONFIG_INT_KEYS + CONFIG_FLOAT_KEYS + ("mechanism",)

SWEEP_AXES = ("mu_rt", "mu_nrt", "lambda_nrt", "rt_rate_scale")
SWEEP_ONLY_KEYS = ("axis", "values", "mechanisms", "mode", "plot_metric")

PRESET_NAMES = ("fig3", "fig4", "fig5", "fig6", "fig7")

CSV_HEADER = (
    "mechanism,axis_name,axis_value,loss_rt,loss_nrt,mean_rt,mean_nrt,"
    "delay_rt,delay_nrt,delay_nrt_sojourn_variant,effective_lambda_nrt"
)

METRIC_NAMES = (
    "loss_rt",
    "loss_nrt",
    "mean_rt",
    "mean_nrt",
    "delay_rt",
    "delay_nrt",
    "delay_nrt_sojourn",
    "effective_lambda_nrt",
)


class ConfigError(ValueError):
    """Malformed or invalid config/sweep input."""


def fmt(x: float) -> str:
    """Float to text with 12 significant digits (CSV cell format)."""
    return format(float(x), ".12g")


def _parse_kv_lines(text: str, source: str) -> dict[str, tuple[str, int]]:
    out: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = (value, lineno)
    return out


def _typed(fields: dict[str, tuple[str, int]], source: str) -> dict:
    values: dict = {}
    for key, (raw, lineno) in fields.items():
        if key in CONFIG_INT_KEYS:
            try:
                values[key] = int(raw)
            except ValueError:
                raise ConfigError(f"{source}:{lineno}: field {key}: not an integer: {raw!r}") from None
        elif key in CONFIG_FLOAT_KEYS:
            try:
                values[key] = float(raw)
            except ValueError:
                raise ConfigError(f"{source}:{lineno}: field {key}: not a number: {raw!r}") from None
    return values


def parse_mechanism(token: str) -> Mechanism:
    normalized = token.strip().lower()
    if normalized in ("s", "simple"):
        return Mechanism.SIMPLE
    if normalized in ("c", "combined"):
        return Mechanism.COMBINED
    raise ConfigError(f"unknown mechanism {token!r} (expected s|simple|c|combined)")


def parse_mechanism_set(token: str) -> tuple[Mechanism, ...]:
    if token.strip().lower() == "both":
        return (Mechanism.SIMPLE, Mechanism.COMBINED)
    return (parse_mechanism(token),)


def build_system_config(values: dict, mechanism: Mechanism) -> SystemConfig:
    missing = [k for k in CONFIG_INT_KEYS + CONFIG_FLOAT_KEYS if k not in values]
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(missing)}")
    try:
        mmpp = MmppParams(
            lambda1=values["lambda1"],
            lambda2=values["lambda2"],
            sigma1=values["sigma1"],
            sigma2=values["sigma2"],
        )
        return SystemConfig(
            capacity_n=values["capacity_n"],
            rt_cap_r=values["rt_cap_r"],
            threshold_h=values["threshold_h"],
            threshold_l=values["threshold_l"],
            lambda_nrt=values["lambda_nrt"],
            mmpp=mmpp,
            mu_rt=values["mu_rt"],
            mu_nrt=values["mu_nrt"],
            mechanism=mechanism,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class ParsedConfig:
    """Numeric config fields plus the optional mechanism named in the file."""

    values: dict
    mechanisms: tuple[Mechanism, ...] | None

    def configs(self, override: tuple[Mechanism, ...] | None = None) -> list[SystemConfig]:
        chosen = override or self.mechanisms or (Mechanism.SIMPLE, Mechanism.COMBINED)
        return [build_system_config(self.values, m) for m in chosen]


def parse_config_file(path) -> ParsedConfig:
    with open(path) as fh:
        text = fh.read()
    return parse_config_text(text, str(path))


def parse_config_text(text: str, source: str) -> ParsedConfig:
    fields = _parse_kv_lines(text, source)
    unknown = [k for k in fields if k not in CONFIG_KEYS]
    if unknown:
        key = unknown[0]
        raise ConfigError(f"{source}:{fields[key][1]}: unknown config key {key!r}")
    values = _typed(fields, source)
    mechanisms = None
    if "mechanism" in fields:
        mechanisms = parse_mechanism_set(fields["mechanism"][0])
    # construct eagerly so invariant violations surface at parse time
    for mech in mechanisms or (Mechanism.SIMPLE, Mechanism.COMBINED):
        build_system_config(values, mech)
    return ParsedConfig(values=values, mechanisms=mechanisms)


@dataclass(frozen=True)
class SweepSpec:
    """One swept axis over a base configuration.

    axis is one of mu_rt, mu_nrt, lambda_nrt, or rt_rate_scale (the last
    scales lambda1 and lambda2 jointly). mode selects the analytic
    pipeline, the simulator, or both.
    """

    base: dict
    axis: str
    values: tuple[float, ...]
    mechanisms: tuple[Mechanism, ...]
    mode: str = "analytic"
    plot_metric: str = "delay_nrt"

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r} (expected one of {', '.join(SWEEP_AXES)})")
        if not self.values:
            raise ConfigError("sweep values must be nonempty")
        if len(self.values) > 1:
            diffs = [b - a for a, b in zip(self.values, self.values[1:])]
            if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
                raise ConfigError("sweep values must be strictly monotone")
        if self.mode not in ("analytic", "simulate", "both"):
            raise ConfigError(f"unknown sweep mode {self.mode!r}")
        if self.plot_metric not in METRIC_NAMES:
            raise ConfigError(f"unknown plot_metric {self.plot_metric!r}")

    def config_at(self, value: float, mechanism: Mechanism) -> SystemConfig:
        values = dict(self.base)
        if self.axis == "rt_rate_scale":
            values["lambda1"] = values["lambda1"] * value
            values["lambda2"] = values["lambda2"] * value
        else:
            values[self.axis] = value
        return build_system_config(values, mechanism)


def parse_sweep_file(path) -> SweepSpec:
    with open(path) as fh:
        text = fh.read()
    return parse_sweep_text(text, str(path))


def parse_sweep_text(text: str, source: str) -> SweepSpec:
    fields = _parse_kv_lines(text, source)
    known = set(CONFIG_INT_KEYS + CONFIG_FLOAT_KEYS) | set(SWEEP_ONLY_KEYS)
    unknown = [k for k in fields if k not in known]
    if unknown:
        key = unknown[0]
        raise ConfigError(f"{source}:{fields[key][1]}: unknown sweep key {key!r}")
    for required in ("axis", "values"):
        if required not in fields:
            raise ConfigError(f"{source}: missing sweep key {required!r}")

    axis = fields["axis"][0]
    raw_values, lineno = fields["values"]
    try:
        values = tuple(float(tok) for tok in raw_values.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"{source}:{lineno}: field values: not a number list: {raw_values!r}") from None

    mechanisms = (Mechanism.SIMPLE, Mechanism.COMBINED)
    if "mechanisms" in fields:
        mechanisms = parse_mechanism_set(fields["mechanisms"][0])
    mode = fields["mode"][0] if "mode" in fields else "analytic"
    plot_metric = fields["plot_metric"][0] if "plot_metric" in fields else "delay_nrt"

    spec = SweepSpec(
        base=_typed(fields, source),
        axis=axis,
        values=values,
        mechanisms=mechanisms,
        mode=mode,
        plot_metric=plot_metric,
    )
    for value in spec.values:  # every instantiated config must validate
        for mech in spec.mechanisms:
            spec.config_at(value, mech)
    return spec


def load_preset(name: str) -> SweepSpec:
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r} (expected one of {', '.join(PRESET_NAMES)})")
    text = resources.files("tspq").joinpath("presets", f"{name}.sweep").read_text()
    return parse_sweep_text(text, f"preset:{name}")


def canonical_config_text(config: SystemConfig) -> str:
    lines = [
        f"capacity_n = {config.capacity_n}",
        f"rt_cap_r = {config.rt_cap_r}",
        f"threshold_h = {config.threshold_h}",
        f"threshold_l = {config.threshold_l}",
        f"lambda_nrt = {fmt(config.lambda_nrt)}",
        f"lambda1 = {fmt(config.mmpp.lambda1)}",
        f"lambda2 = {fmt(config.mmpp.lambda2)}",
        f"sigma1 = {fmt(config.mmpp.sigma1)}",
        f"sigma2 = {fmt(config.mmpp.sigma2)}",
        f"mu_rt = {fmt(config.mu_rt)}",
        f"mu_nrt = {fmt(config.mu_nrt)}",
        f"mechanism = {config.mechanism.value}",
    ]
    return "\n".join(lines) + "\n"


def run_fingerprint(config: SystemConfig, seed: int, events: int) -> str:
    """Hash tying simulation output to the exact config, seed, and budget."""
    payload = canonical_config_text(config) + f"seed = {seed}\nevents = {events}\n"
    return hashlib.sha256(payload.encode()).hexdigest()


def replace_mechanism(config: SystemConfig, mechanism: Mechanism) -> SystemConfig:
    return replace(config, mechanism=mechanism)
