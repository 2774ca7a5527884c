"""Flat ``key = value`` configuration documents.

Blank lines and lines starting with ``#`` or ``;`` are ignored.  Keys are
case sensitive (``omega`` and ``Omega`` are different parameters).
"""
from __future__ import annotations

import configparser
from dataclasses import fields
from pathlib import Path

from .params import MaterialParams, SystemParams

__all__ = ["ConfigError", "parse_config", "read_config", "load_system_params",
           "load_material_params", "FREQUENCY_KEYS", "to_internal_units"]

_SECTION = "kerrspt"

FREQUENCY_KEYS = ("omega", "Omega", "g", "omega_m", "K", "g_m", "kappa", "kappa_m")


class ConfigError(ValueError):
    """Malformed document or unknown / invalid keys."""


def parse_config(text: str) -> dict[str, str]:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from exc
    if len(cp.sections()) != 1:
        raise ConfigError("configuration must be flat (no [section] headers)")
    return dict(cp[_SECTION])


def read_config(path) -> dict[str, str]:
    return parse_config(Path(path).read_text())


def _to_float(key, raw):
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _build(cls, values: dict, strict: bool = True):
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - names)
    if strict and unknown:
        raise ConfigError(f"unknown keys for {cls.__name__}: {', '.join(unknown)}")
    kwargs = {k: _to_float(k, v) for k, v in values.items() if k in names}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"invalid {cls.__name__}: {exc}") from exc


def load_system_params(source) -> SystemParams:
    """SystemParams from a path or a mapping; unknown keys are an error."""
    values = read_config(source) if isinstance(source, (str, Path)) else dict(source)
    return _build(SystemParams, values)


def load_material_params(source) -> MaterialParams:
    values = read_config(source) if isinstance(source, (str, Path)) else dict(source)
    return _build(MaterialParams, values)


def to_internal_units(values: dict, units: str = "dimensionless",
                      reference: float | None = None) -> dict:
    """Divide frequency-valued entries by `reference` when `units` is GHz.

    `reference` defaults to ``Omega`` if present, else 1 GHz.
    """
    if units in ("dimensionless", "", None):
        return dict(values)
    if units != "GHz":
        raise ConfigError(f"units must be 'dimensionless' or 'GHz', got {units!r}")
    ref = reference if reference is not None else float(values.get("Omega", 1.0))
    if not ref > 0:
        raise ConfigError("reference frequency must be > 0")
    out = dict(values)
    for k in FREQUENCY_KEYS:
        if k in out:
            out[k] = float(out[k]) / ref
    return out
