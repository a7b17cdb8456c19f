"""Experiment configuration: INI files with a fixed schema plus dotted overrides.

Resolution order is built-in defaults, then the config file, then ``--set``
overrides (last writer wins). Unknown sections or keys are rejected. The
kernel bandwidth has no built-in default on purpose: every shipped profile
states it explicitly and a user config that needs it must too.
"""

from __future__ import annotations

import configparser
import hashlib
from importlib import resources

from .bench import RadarConstants
from .correntropy import KernelSpec
from .sim import ShotNoiseSpec

__all__ = ["ConfigError", "ExperimentConfig", "DEFAULTS", "shipped_config_path"]


class ConfigError(Exception):
    """Invalid, unknown or missing configuration."""


def _defaults() -> dict:
    c = RadarConstants()
    return {
        "model": {
            "rho": repr(c.rho),
            "sampling_period": repr(c.sampling_period),
            "range_noise_var": repr(c.range_noise_var),
            "bearing_noise_var": repr(c.bearing_noise_var),
            "maneuver_var_1": repr(c.maneuver_var_1),
            "maneuver_var_2": repr(c.maneuver_var_2),
        },
        "kernel": {},
        "shot_noise": {
            "fraction": "0.2",
            "magnitude_low": "0",
            "magnitude_high": "5",
            "window_start": "21",
            "window_end": "300",
            "targets": "both",
        },
        "monte_carlo": {
            "runs": "100",
            "horizon": "300",
            "seed": "1",
        },
        "sweep": {
            "deltas": " ".join(f"1e-{i}" for i in range(1, 15)),
            "runs": "20",
        },
    }


DEFAULTS = _defaults()

_KNOWN_KEYS = {
    "model": set(DEFAULTS["model"]) | {"init_bearing_entry", "init_bearing_rate_extra"},
    "kernel": {"sigma"},
    "shot_noise": set(DEFAULTS["shot_noise"]),
    "monte_carlo": set(DEFAULTS["monte_carlo"]),
    "sweep": set(DEFAULTS["sweep"]),
}


def shipped_config_path(profile: str):
    """Path of a packaged configuration profile (example1 or sweep)."""
    return resources.files("mcckf").joinpath(f"configs/{profile}.ini")


class ExperimentConfig:
    """Merged configuration with typed accessors."""

    def __init__(self, raw: dict):
        self.raw = raw

    @classmethod
    def load(cls, config_path=None, overrides=(), profile: str = "example1"):
        """Merge defaults, a config file and overrides.

        ``config_path`` falls back to the shipped profile. Overrides are
        ``section.key=value`` strings applied after the file.
        """
        raw = {section: dict(keys) for section, keys in DEFAULTS.items()}
        source = config_path if config_path is not None else shipped_config_path(profile)
        parser = configparser.ConfigParser()
        try:
            if config_path is not None:
                read = parser.read(str(source))
                if not read:
                    raise ConfigError(f"cannot read config file {source}")
            else:
                parser.read_string(source.read_text())
        except (configparser.Error, OSError) as exc:
            raise ConfigError(f"cannot parse config {source}: {exc}") from exc
        for section in parser.sections():
            if section not in _KNOWN_KEYS:
                raise ConfigError(f"unknown config section [{section}]")
            for key, value in parser.items(section):
                if key not in _KNOWN_KEYS[section]:
                    raise ConfigError(f"unknown config key {section}.{key}")
                raw[section][key] = value
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not of the form section.key=value")
            dotted, value = item.split("=", 1)
            if dotted.count(".") != 1:
                raise ConfigError(f"override key {dotted!r} is not of the form section.key")
            section, key = dotted.split(".")
            if section not in _KNOWN_KEYS or key not in _KNOWN_KEYS[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
            if not value:
                raise ConfigError(f"override {dotted} has an empty value")
            raw[section][key] = value
        return cls(raw)

    def _get(self, section: str, key: str, parse, required: bool = True):
        value = self.raw.get(section, {}).get(key)
        if value is None:
            if required:
                raise ConfigError(f"missing config key {section}.{key}")
            return None
        try:
            return parse(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {section}.{key}: {value!r} ({exc})") from exc

    def radar_constants(self) -> RadarConstants:
        try:
            return RadarConstants(
                rho=self._get("model", "rho", float),
                sampling_period=self._get("model", "sampling_period", float),
                range_noise_var=self._get("model", "range_noise_var", float),
                bearing_noise_var=self._get("model", "bearing_noise_var", float),
                maneuver_var_1=self._get("model", "maneuver_var_1", float),
                maneuver_var_2=self._get("model", "maneuver_var_2", float),
                horizon=self.horizon(),
                runs=self.runs(),
                init_bearing_entry=self._get(
                    "model", "init_bearing_entry", float, required=False
                ),
                init_bearing_rate_extra=self._get(
                    "model", "init_bearing_rate_extra", float, required=False
                ),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def kernel_spec(self) -> KernelSpec:
        sigma = self._get("kernel", "sigma", float)
        try:
            return KernelSpec(sigma=sigma)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def shot_spec(self) -> ShotNoiseSpec:
        try:
            return ShotNoiseSpec(
                corrupted_fraction=self._get("shot_noise", "fraction", float),
                magnitude_low=self._get("shot_noise", "magnitude_low", int),
                magnitude_high=self._get("shot_noise", "magnitude_high", int),
                window_start=self._get("shot_noise", "window_start", int),
                window_end=self._get("shot_noise", "window_end", int),
                targets=self._get("shot_noise", "targets", str),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def runs(self) -> int:
        runs = self._get("monte_carlo", "runs", int)
        if runs < 1:
            raise ConfigError(f"monte_carlo.runs must be >= 1, got {runs}")
        return runs

    def horizon(self) -> int:
        horizon = self._get("monte_carlo", "horizon", int)
        if horizon < 1:
            raise ConfigError(f"monte_carlo.horizon must be >= 1, got {horizon}")
        return horizon

    def seed(self) -> int:
        return self._get("monte_carlo", "seed", int)

    def sweep_deltas(self) -> list[float]:
        text = self._get("sweep", "deltas", str)
        try:
            deltas = [float(tok) for tok in text.split()]
        except ValueError as exc:
            raise ConfigError(f"bad sweep.deltas {text!r}: {exc}") from exc
        if not deltas:
            raise ConfigError("sweep.deltas must not be empty")
        if any(b >= a for a, b in zip(deltas, deltas[1:])) or any(
            d <= 0 for d in deltas
        ):
            raise ConfigError("sweep.deltas must be positive and strictly decreasing")
        return deltas

    def sweep_runs(self) -> int:
        runs = self._get("sweep", "runs", int)
        if runs < 1:
            raise ConfigError(f"sweep.runs must be >= 1, got {runs}")
        return runs

    def sha256(self) -> str:
        lines = [
            f"{section}.{key}={self.raw[section][key]}"
            for section in sorted(self.raw)
            for key in sorted(self.raw[section])
        ]
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()
