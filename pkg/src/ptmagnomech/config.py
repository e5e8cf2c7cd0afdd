"""Flat key-value run configuration with ratio-form parameter keys.

A configuration is a single TOML table, for example::

    reference = "delta_a"
    delta_a = 1.0
    kappa_a_over_delta_a = 0.08
    g_b_over_delta_m = 0.1
    grid = "-3:3:400"

Any parameter may be given absolutely (``kappa_a = 0.08``) or as a ratio to
another parameter (``kappa_a_over_delta_a = 0.08``), never both.  The
reference symbol defaults to 1 unless it is set explicitly.  Parameters that
are not mentioned keep the values of the preset (if any) or of
:class:`~ptmagnomech.model.SystemParams`.
"""
from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from .model import PARAM_NAMES, HEFF_CONVENTIONS, ParameterError, SystemParams, validate_params

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["ConfigError", "RunConfig", "config_lines", "extract_config_text", "parse_config", "parse_grid"]

REFERENCE_SYMBOLS = ("omega_b", "kappa_a", "delta_a")
ALIASES = {"gamma": "gamma_nh"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams = field(default_factory=SystemParams)
    reference: str = "omega_b"
    axis: Optional[str] = None
    grid: Optional[tuple] = None
    axis2: Optional[str] = None
    grid2: Optional[tuple] = None
    fields: Optional[tuple] = None
    probe_detuning: float = 0.0
    power_ref: float = 1.0
    heff_convention: str = "as_printed"
    external_coupling_ratio: float = 1.0
    symmetrize_mech_coupling: bool = False
    magnon_sign_flip: bool = False
    margin: float = 1e-9
    fd_step: float = 1e-5
    prominence: float = 0.05
    ep_vary: Optional[str] = None
    ep_range: Optional[tuple] = None
    ep_threshold: float = 1e-6
    gamma_values: Optional[tuple] = None
    # runtime only; excluded from equality so echoed configs compare equal
    out: Optional[str] = field(default=None, compare=False)
    workers: int = field(default=1, compare=False)


SETTING_NAMES = tuple(f.name for f in fields(RunConfig) if f.name != "params")
_FLOAT_SETTINGS = {"probe_detuning", "power_ref", "external_coupling_ratio", "margin", "fd_step", "prominence", "ep_threshold"}
_BOOL_SETTINGS = {"symmetrize_mech_coupling", "magnon_sign_flip"}
_META_KEYS = {"preset"}


def parse_grid(text) -> tuple:
    """``"start:stop:count"`` -> ``(start, stop, count)``."""
    try:
        start, stop, count = str(text).split(":")
        out = (float(start), float(stop), int(count))
    except ValueError:
        raise ConfigError(f"grid must look like start:stop:count, got {text!r}") from None
    if out[2] < 2 or out[0] == out[1]:
        raise ConfigError(f"grid {text!r} needs count >= 2 and start != stop")
    return out


def _parse_range(text) -> tuple:
    try:
        lo, hi = (float(v) for v in str(text).split(":"))
    except ValueError:
        raise ConfigError(f"range must look like lo:hi, got {text!r}") from None
    return (lo, hi)


def _param_target(name: str) -> Optional[str]:
    name = ALIASES.get(name, name)
    return name if name in PARAM_NAMES else None


def _classify(key: str):
    """Return ``(target, denominator)`` for parameter keys, ``(None, None)`` otherwise."""
    target = _param_target(key)
    if target is not None:
        return target, None
    if "_over_" in key:
        num, _, den = key.partition("_over_")
        t_num, t_den = _param_target(num), _param_target(den)
        if t_num is not None and t_den is not None:
            return t_num, t_den
    return None, None


def _load(text: str, origin: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{origin}: {exc}") from None


def _parse_override(item: str) -> dict:
    key, sep, value = item.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"override must look like KEY=VALUE, got {item!r}")
    try:
        return tomllib.loads(f"{key} = {value.strip()}")
    except tomllib.TOMLDecodeError:
        return {key: value.strip()}


def _target_of(key: str):
    target, _ = _classify(key)
    return target if target is not None else key


def parse_config(text: str = "", overrides=()) -> RunConfig:
    """Build a :class:`RunConfig` from TOML text plus ``KEY=VALUE`` overrides.

    An override replaces every file key that sets the same parameter or
    setting, whatever form (absolute or ratio) the file used.
    """
    raw = _load(text, "config") if text.strip() else {}
    overridden = {}
    for item in overrides:
        extra = _parse_override(item) if isinstance(item, str) else dict(item)
        for key in extra:
            tgt = _target_of(key)
            if tgt in overridden:
                raise ConfigError(f"{key}: {tgt} is already set by override {overridden[tgt]!r}")
            overridden[tgt] = key
            for old in [k for k in raw if _target_of(k) == tgt]:
                del raw[old]
        raw.update(extra)

    for key, value in raw.items():
        if isinstance(value, dict):
            raise ConfigError(f"{key}: nested tables are not supported")

    from .presets import PRESET_SETTINGS, PRESETS

    base = SystemParams()
    preset_axes = ()
    if "preset" in raw:
        name = raw["preset"]
        if name not in PRESETS:
            raise ConfigError(f"preset: unknown preset {name!r}; known: {sorted(PRESETS)}")
        base, preset_axes = PRESETS[name]

    reference = raw.get("reference", "omega_b")
    ref_value = None
    if isinstance(reference, str) and "=" in reference:
        reference, _, v = reference.partition("=")
        reference = reference.strip()
        try:
            ref_value = float(v)
        except ValueError:
            raise ConfigError(f"reference: cannot read value from {raw['reference']!r}") from None
    if reference not in REFERENCE_SYMBOLS:
        raise ConfigError(f"reference: must be one of {REFERENCE_SYMBOLS}, got {reference!r}")

    absolute, ratios, settings = {}, {}, {}
    for key, value in raw.items():
        if key == "reference" or key in _META_KEYS:
            continue
        target, den = _classify(key)
        if target is None:
            if key not in SETTING_NAMES:
                raise ConfigError(f"{key}: unknown key")
            settings[key] = value
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        if target in absolute or target in ratios:
            other = (absolute.get(target) or ratios[target])[0]
            raise ConfigError(f"{key}: {target} is already set by {other!r}")
        if den is None:
            absolute[target] = (key, float(value))
        else:
            ratios[target] = (key, den, float(value))

    if ref_value is not None:
        if reference in absolute or reference in ratios:
            raise ConfigError(f"reference: {reference} is also set by another key")
        absolute[reference] = ("reference", ref_value)
    if reference in ratios:
        raise ConfigError(f"reference: {reference} must be given absolutely, not as {ratios[reference][0]!r}")

    resolved = {t: v for t, (_, v) in absolute.items()}
    if reference not in resolved:
        resolved[reference] = getattr(base, reference) if preset_axes else 1.0
    if resolved[reference] == 0:
        raise ConfigError(f"reference: {reference} must be nonzero")

    def base_value(name):
        if name == "g_mb" and base.g_mb is None:
            return resolved.get("g_b", base.g_b)
        return getattr(base, name)

    pending = dict(ratios)
    while pending:
        progress = False
        for target, (key, den, value) in list(pending.items()):
            if den in pending:
                continue
            denominator = resolved[den] if den in resolved else base_value(den)
            resolved[target] = value * denominator
            del pending[target]
            progress = True
        if not progress:
            raise ConfigError(f"{next(iter(pending.values()))[0]}: unresolvable ratio chain")

    params = replace(base, **resolved)
    try:
        validate_params(params)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None

    kwargs = {"params": params, "reference": reference}
    if preset_axes:
        kwargs["axis"] = preset_axes[0].name
        kwargs["grid"] = (preset_axes[0].start, preset_axes[0].stop, int(preset_axes[0].count))
        if len(preset_axes) > 1:
            kwargs["axis2"] = preset_axes[1].name
            kwargs["grid2"] = (preset_axes[1].start, preset_axes[1].stop, int(preset_axes[1].count))
        kwargs.update(PRESET_SETTINGS.get(raw["preset"], {}))
    for key, value in settings.items():
        kwargs[key] = _coerce_setting(key, value)
    return RunConfig(**kwargs)


def _coerce_setting(key: str, value):
    try:
        if key in ("grid", "grid2"):
            return parse_grid(value)
        if key == "ep_range":
            return _parse_range(value)
        if key in ("fields", "gamma_values"):
            items = value.split(",") if isinstance(value, str) else list(value)
            items = [i.strip() if isinstance(i, str) else i for i in items]
            return tuple(float(i) for i in items) if key == "gamma_values" else tuple(items)
        if key in _FLOAT_SETTINGS:
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if key in _BOOL_SETTINGS:
            if not isinstance(value, bool):
                raise ValueError
            return value
        if key == "workers":
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValueError
            return int(value)
        if key == "heff_convention" and value not in HEFF_CONVENTIONS:
            raise ValueError
        if not isinstance(value, str):
            raise ValueError
        return value
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: invalid value {value!r}") from None


def fmt(x) -> str:
    """Round-trip float formatting (17 significant digits)."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _toml_float(x) -> str:
    s = fmt(x)
    if s in ("nan", "inf", "-inf"):
        return s
    return s if any(c in s for c in ".eE") else s + ".0"


def config_lines(cfg: RunConfig) -> list:
    """TOML lines that re-parse into a config equal to ``cfg``."""
    lines = [f"reference = {json.dumps(cfg.reference)}"]
    for name in PARAM_NAMES:
        value = getattr(cfg.params, name)
        if value is not None:
            lines.append(f"{name} = {_toml_float(value)}")
    for name in SETTING_NAMES:
        if name in ("reference", "out", "workers"):
            continue
        value = getattr(cfg, name)
        if value is None:
            continue
        if name in ("grid", "grid2"):
            text = f"{fmt(value[0])}:{fmt(value[1])}:{int(value[2])}"
        elif name == "ep_range":
            text = f"{fmt(value[0])}:{fmt(value[1])}"
        elif name == "fields":
            text = ",".join(value)
        elif name == "gamma_values":
            lines.append(f"{name} = [{', '.join(_toml_float(v) for v in value)}]")
            continue
        elif isinstance(value, bool):
            lines.append(f"{name} = {'true' if value else 'false'}")
            continue
        elif isinstance(value, float):
            lines.append(f"{name} = {_toml_float(value)}")
            continue
        else:
            text = str(value)
        lines.append(f"{name} = {json.dumps(text)}")
    return lines


def extract_config_text(csv_text: str) -> str:
    """Collect the ``# key = value`` provenance comments of a CSV file."""
    out = []
    for line in csv_text.splitlines():
        if line.startswith("# ") and " = " in line:
            out.append(line[2:])
    return "\n".join(out)
