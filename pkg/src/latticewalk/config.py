"""
Run configuration files (INI style, read with ``configparser``).

Sections: ``[walk]``, ``[timing]``, ``[loss]``, ``[detect]``, ``[output]``.
See ``configs/experiment.cfg`` for every key with the experiment's values.
Validation errors name the file and line of the offending key.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .coins import (
    COIN_NAMES,
    CoinSchedule,
    HwpAngles,
    diagonal,
    eom_matrix,
    named_coin,
    staged_schedule,
)
from .hardware import LossModel, TimingConfig
from .walk import WalkState, new_localized_state

__all__ = ["ConfigError", "RunConfig", "load_config", "ARTIFACTS"]

ARTIFACTS = ("positions", "coins", "states", "summary")


class ConfigError(ValueError):
    """Invalid run configuration; the message carries ``file:line``."""


@dataclass
class RunConfig:
    coin: str
    schedule: CoinSchedule
    initial: tuple[int, int, int, int]
    steps: int
    mode: str
    timing: TimingConfig
    loss: LossModel
    trials: int
    seed: int
    calibration: tuple[float, float, float, float]
    outputs: tuple[str, ...] = ARTIFACTS
    source: Optional[str] = None

    def initial_state(self) -> WalkState:
        return new_localized_state(*self.initial)


class _Locator:
    """Finds the line of a key inside a section of the raw config text."""

    def __init__(self, text: str, name: str):
        self.name = name
        self.lines: dict[tuple[str, str], int] = {}
        section = None
        for i, line in enumerate(text.splitlines(), start=1):
            m = re.match(r"\s*\[([^\]]+)\]", line)
            if m:
                section = m.group(1).strip()
                continue
            m = re.match(r"\s*([A-Za-z0-9_.-]+)\s*[=:]", line)
            if m and section is not None:
                self.lines[(section, m.group(1).lower())] = i

    def error(self, section: str, key: str, msg: str) -> ConfigError:
        line = self.lines.get((section, key))
        where = f"{self.name}:{line}" if line else f"{self.name} [{section}]"
        return ConfigError(f"{where}: {key}: {msg}")


def _floats(raw: str, n: int) -> list[float]:
    vals = [float(v) for v in raw.replace(",", " ").split()]
    if len(vals) != n:
        raise ValueError(f"expected {n} numbers, got {len(vals)}")
    return vals


def _get(cp, loc, section, key, conv, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    try:
        return conv(raw)
    except ValueError as exc:
        raise loc.error(section, key, f"{exc} (value {raw!r})") from None


def _bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


_PI_EXPR = re.compile(r"([+-]?)(\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi(?:\s*/\s*(\d+(?:\.\d*)?))?")


def _angle(raw: str) -> float:
    """Radians, or a multiple of pi such as ``-pi/8`` or ``3*pi/4``."""
    expr = raw.strip().lower()
    m = _PI_EXPR.fullmatch(expr)
    if m is None:
        return float(expr)
    sign, factor, denom = m.groups()
    if denom is not None and float(denom) == 0:
        raise ValueError("division by zero")
    value = float(factor or 1.0) * np.pi / float(denom or 1.0)
    return -value if sign == "-" else value


def _angles(raw: str) -> HwpAngles:
    parts = raw.replace(",", " ").split()
    if len(parts) != 4:
        raise ValueError(f"expected 4 angles, got {len(parts)}")
    return HwpAngles(*(_angle(p) for p in parts))


def _initial(raw: str) -> tuple[int, int, int, int]:
    vals = [int(v) for v in raw.replace(",", " ").split()]
    if len(vals) != 4:
        raise ValueError("expected x1 x2 c1 c2")
    if vals[2] not in (-1, 1) or vals[3] not in (-1, 1):
        raise ValueError("coin values must be -1 or +1")
    return tuple(vals)


def _nonneg_int(raw: str) -> int:
    v = int(raw)
    if v < 0:
        raise ValueError("must be non-negative")
    return v


def _build_schedule(cp, loc) -> tuple[str, CoinSchedule]:
    coin = _get(cp, loc, "walk", "coin", str.strip, "hadamard")
    crosstalk = _get(cp, loc, "walk", "eom_crosstalk", float, 0.0)
    if crosstalk < 0:
        raise loc.error("walk", "eom_crosstalk", "must be non-negative")
    if coin in COIN_NAMES:
        return coin, named_coin(coin, crosstalk)
    if coin != "custom":
        raise loc.error("walk", "coin", f"unknown coin {coin!r}; use one of "
                        f"{', '.join(COIN_NAMES)} or 'custom'")
    if not cp.has_option("walk", "angles"):
        raise loc.error("walk", "coin", "custom coin needs an 'angles' entry")
    angles = _get(cp, loc, "walk", "angles", _angles, None)
    phase = _get(cp, loc, "walk", "eom_phase", _angle, 0.0)
    where = _get(cp, loc, "walk", "eom_where", str.strip, "none")
    if where == "none" or phase == 0.0:
        return coin, staged_schedule(angles, None, label="custom")
    eom = eom_matrix(phase, crosstalk)
    if where == "everywhere":
        return coin, staged_schedule(angles, eom, label="custom")
    if where == "diagonal":
        return coin, staged_schedule(angles, (diagonal, eom), label="custom")
    raise loc.error("walk", "eom_where", "expected none, everywhere or diagonal")


def load_config(path, overrides: Optional[dict] = None) -> RunConfig:
    """
    Parse and validate a run configuration.

    ``overrides`` may set ``steps`` and ``seed`` (command-line flags).
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    loc = _Locator(text, str(path))
    known = {"walk", "timing", "loss", "detect", "output"}
    for sec in cp.sections():
        if sec not in known:
            raise ConfigError(f"{path}: unknown section [{sec}]")

    coin, schedule = _build_schedule(cp, loc)
    initial = _get(cp, loc, "walk", "initial", _initial, (0, 0, -1, -1))
    steps = _get(cp, loc, "walk", "steps", _nonneg_int, 10)
    mode = _get(cp, loc, "walk", "mode", str.strip, "combined")
    if mode not in ("combined", "staged"):
        raise loc.error("walk", "mode", "expected combined or staged")

    try:
        timing = TimingConfig(
            t_min=_get(cp, loc, "timing", "t_min", float, 676.0),
            dtau1=_get(cp, loc, "timing", "dtau1", float, 3.11),
            dtau2=_get(cp, loc, "timing", "dtau2", float, 46.42),
            pulse_width=_get(cp, loc, "timing", "pulse_width", float, 0.088),
            axis_swap=_get(cp, loc, "timing", "axis_swap", _bool, False),
            eom_delay=_get(cp, loc, "timing", "eom_delay", float, 0.0),
        )
    except ValueError as exc:
        key = str(exc).split()[0]
        raise loc.error("timing", key, str(exc)) from None
    try:
        loss = LossModel(
            input_coupling=_get(cp, loc, "loss", "input_coupling", float, 1.0),
            outcouple_minus=_get(cp, loc, "loss", "outcouple_minus", float, 1.0),
            outcouple_plus=_get(cp, loc, "loss", "outcouple_plus", float, 1.0),
            step_survival=_get(cp, loc, "loss", "step_survival", float, 1.0),
            detection_efficiency=tuple(_get(
                cp, loc, "loss", "detection_efficiency", lambda r: _floats(r, 4), [1.0] * 4)),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path} [loss]: {exc}") from None

    trials = _get(cp, loc, "detect", "trials", _nonneg_int, 0)
    seed = _get(cp, loc, "detect", "seed", _nonneg_int, 0)
    calibration = tuple(_get(cp, loc, "detect", "calibration", lambda r: _floats(r, 4), [1.0] * 4))
    if any(c <= 0 for c in calibration):
        raise loc.error("detect", "calibration", "efficiencies must be positive")
    outputs = _get(cp, loc, "output", "artifacts",
                   lambda r: tuple(a.strip() for a in r.replace(",", " ").split()), ARTIFACTS)
    bad = [a for a in outputs if a not in ARTIFACTS]
    if bad:
        raise loc.error("output", "artifacts", f"unknown artifact(s) {bad}; known: {ARTIFACTS}")

    overrides = overrides or {}
    if overrides.get("steps") is not None:
        if overrides["steps"] < 0:
            raise ConfigError("--steps must be non-negative")
        steps = overrides["steps"]
    if overrides.get("seed") is not None:
        seed = overrides["seed"]
    return RunConfig(coin, schedule, initial, steps, mode, timing, loss, trials, seed,
                     calibration, outputs, str(path))
