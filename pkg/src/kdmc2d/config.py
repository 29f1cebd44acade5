"""Sectioned key=value run configuration files.

Format: sections [simulation], [source], [background], [tally]; blank lines
and '#' comments allowed. Unknown sections or keys are rejected with the
offending line number. Physical speeds use the mean post-collisional speed
parametrization; temperatures are derived.
"""

from __future__ import annotations

from .core import Background, Domain, Maxwellian, Vec2
from .harness import KDMC, KINETIC, RunConfig
from .sampling import SourceSpec, temperature_from_mean_speed
from .transport import StepConfig


class ConfigError(Exception):
    """Invalid configuration file or overrides (CLI exit code 2)."""


_SCHEMA = {
    "simulation": {"mode", "particles", "seed", "workers", "dt", "t_end",
                   "domain.lx", "domain.ly"},
    "source": {"position", "mean_speed"},
    "background": {"rate", "mean_speed", "drift"},
    "tally": {"nx", "ny"},
}

_DEFAULTS = {
    "simulation": {"mode": "kinetic", "particles": "1000000", "seed": "0",
                   "workers": "1", "dt": "1", "t_end": "1",
                   "domain.lx": "1", "domain.ly": "1"},
    "source": {"position": "0.5,0.5", "mean_speed": "0.15625"},
    "background": {"rate": "0.78125", "mean_speed": "0.013847",
                   "drift": "0,0"},
    "tally": {"nx": "128", "ny": "128"},
}


def parse_config_text(text: str, filename: str = "<config>") -> dict:
    values = {sec: dict(defaults) for sec, defaults in _DEFAULTS.items()}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(
                    f"{filename}:{lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(
                f"{filename}:{lineno}: expected key=value, got {line!r}")
        if section is None:
            raise ConfigError(
                f"{filename}:{lineno}: key outside any section")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA[section]:
            raise ConfigError(
                f"{filename}:{lineno}: unknown key {key!r} in "
                f"section [{section}]")
        values[section][key] = value
    return values


def parse_config_file(path) -> dict:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, filename=str(path))


def _number(section, key, value, conv):
    try:
        return conv(value)
    except ValueError as exc:
        raise ConfigError(
            f"[{section}] {key}: cannot parse {value!r}") from exc


def _pair(section, key, value):
    parts = value.split(",")
    if len(parts) != 2:
        raise ConfigError(f"[{section}] {key}: expected 'x,y', got {value!r}")
    return (_number(section, key, parts[0], float),
            _number(section, key, parts[1], float))


def build_run_config(values: dict, overrides: dict | None = None) -> RunConfig:
    """Turn parsed config values (plus CLI overrides) into a RunConfig."""
    if overrides:
        for (section, key), v in overrides.items():
            values[section][key] = str(v)
    sim = values["simulation"]
    mode = sim["mode"]
    if mode not in (KINETIC, KDMC):
        raise ConfigError(f"[simulation] mode: expected '{KINETIC}' or "
                          f"'{KDMC}', got {mode!r}")
    try:
        domain = Domain(_number("simulation", "domain.lx", sim["domain.lx"],
                                float),
                        _number("simulation", "domain.ly", sim["domain.ly"],
                                float))
        step = StepConfig(dt=_number("simulation", "dt", sim["dt"], float),
                          t_end=_number("simulation", "t_end", sim["t_end"],
                                        float))
        src_sec = values["source"]
        source = SourceSpec(
            position=Vec2(*_pair("source", "position", src_sec["position"])),
            emission=Maxwellian(temperature_from_mean_speed(
                _number("source", "mean_speed", src_sec["mean_speed"],
                        float))))
        bg_sec = values["background"]
        background = Background.homogeneous(
            _number("background", "rate", bg_sec["rate"], float),
            Maxwellian(
                temperature_from_mean_speed(
                    _number("background", "mean_speed", bg_sec["mean_speed"],
                            float)),
                Vec2(*_pair("background", "drift", bg_sec["drift"]))),
            domain)
        tly = values["tally"]
        return RunConfig(
            mode=mode,
            particles=_number("simulation", "particles", sim["particles"],
                              int),
            seed=_number("simulation", "seed", sim["seed"], int),
            workers=_number("simulation", "workers", sim["workers"], int),
            step=step, source=source, background=background, domain=domain,
            tally=(_number("tally", "nx", tly["nx"], int),
                   _number("tally", "ny", tly["ny"], int)))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
