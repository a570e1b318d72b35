"""Flat key=value run configuration shared by the CLI and config files."""

from __future__ import annotations

import math
from pathlib import Path

from .errors import ConfigError
from .params import IDEAL_SWITCH, ModelParams, params_field_names

#: Configuration keys that are not ``ModelParams`` fields.
EXTRA_KEYS = ("output_dir", "emit_snapshots", "snapshot_steps")

_BOOL_TRUE = ("1", "true", "yes", "on")
_BOOL_FALSE = ("0", "false", "no", "off")


def parse_phi(text: str) -> float:
    """Parse a phase: a float, or multiples of pi like 'pi', '2pi', '0.5pi'."""
    s = text.strip().lower().replace(" ", "")
    if s.endswith("pi"):
        head = s[:-2].rstrip("*")
        if head in ("", "+"):
            return math.pi
        if head == "-":
            return -math.pi
        try:
            return float(head) * math.pi
        except ValueError as exc:
            raise ConfigError(f"invalid phi value {text!r}") from exc
    try:
        return float(s)
    except ValueError as exc:
        raise ConfigError(f"invalid phi value {text!r}") from exc


def parse_delta_omega(text: str) -> float | None:
    s = text.strip().lower()
    if s in (IDEAL_SWITCH, "none"):
        return None
    try:
        return float(s)
    except ValueError as exc:
        raise ConfigError(f"invalid delta_omega value {text!r}") from exc


def _parse_bool(key: str, text: str) -> bool:
    s = text.strip().lower()
    if s in _BOOL_TRUE:
        return True
    if s in _BOOL_FALSE:
        return False
    raise ConfigError(f"invalid boolean for {key}: {text!r}")


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text.strip())
    except ValueError as exc:
        raise ConfigError(f"invalid integer for {key}: {text!r}") from exc


def _parse_float(key: str, text: str) -> float:
    try:
        return float(text.strip())
    except ValueError as exc:
        raise ConfigError(f"invalid number for {key}: {text!r}") from exc


def parse_config_text(text: str, source: str = "<config>") -> dict[str, object]:
    """Parse ``key = value`` lines (# comments) into typed values."""
    values: dict[str, object] = {}
    known = set(params_field_names()) | set(EXTRA_KEYS)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in known:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = coerce_value(key, val)
    return values


def parse_config_file(path: str | Path) -> dict[str, object]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def coerce_value(key: str, text: str) -> object:
    """Convert one raw string to the type the given key expects."""
    if key == "phi":
        return parse_phi(text)
    if key == "delta_omega":
        return parse_delta_omega(text)
    if key in ("dt", "Gamma_band", "trunc_eps", "gamma"):
        return _parse_float(key, text)
    if key in ("ell", "n_bins", "steps", "chi_max", "record_every"):
        return _parse_int(key, text)
    if key in ("mode", "relax_start", "output_dir"):
        return text.strip()
    if key == "emit_snapshots":
        return _parse_bool(key, text)
    if key == "snapshot_steps":
        s = text.strip()
        if not s:
            return ()
        try:
            return tuple(int(part.strip()) for part in s.split(","))
        except ValueError as exc:
            raise ConfigError(f"invalid snapshot_steps list: {text!r}") from exc
    raise ConfigError(f"unknown key {key!r}")


def autosize(values: dict[str, object]) -> dict[str, object]:
    """Fill in n_bins / steps when absent: run until the packet has fully
    scattered (or the emitters have relaxed) plus a settling margin."""
    out = dict(values)
    if "steps" in out and "n_bins" in out:
        return out
    try:
        dt = float(out["dt"])  # type: ignore[arg-type]
        ell = int(out["ell"])  # type: ignore[arg-type]
    except KeyError as exc:
        raise ConfigError(f"cannot auto-size without {exc.args[0]}") from exc
    tau = ell * dt
    mode = out.get("mode", "scatter-sym")
    if mode == "relaxation":
        t_end = tau + 20.0
    else:
        gamma_band = float(out.get("Gamma_band", 1.0))  # type: ignore[arg-type]
        if gamma_band <= 0:
            raise ConfigError("Gamma_band must be positive")
        t_end = tau + 8.0 + 5.0 / gamma_band
    steps = int(out.get("steps", math.ceil(t_end / dt)))
    out.setdefault("steps", steps)
    out.setdefault("n_bins", steps + ell)
    return out


def build_params(values: dict[str, object]) -> ModelParams:
    """Build ModelParams from config values, auto-sizing the lattice."""
    sized = autosize(values)
    fields = {k: v for k, v in sized.items() if k not in EXTRA_KEYS}
    missing = [k for k in ("dt", "ell", "phi") if k not in fields]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    return ModelParams(**fields)  # type: ignore[arg-type]
