"""Run configuration: per-command defaults, an INI file, then flag overrides.

The INI file may hold a ``[bdml]`` section shared by every command and a
section named after the command (``[fit]``, ``[simulate]``...). Later
sources win: defaults < ``[bdml]`` < ``[command]`` < flags.
"""

import configparser
import os
from pathlib import Path

from .errors import ConfigError

PACKAGED_DATA = Path(__file__).resolve().parent / "data" / "synthetic_boroughs.csv"


def _int(v):
    return int(str(v).strip())


def _float(v):
    return float(str(v).strip())


def _bool(v):
    text = str(v).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _str(v):
    return str(v).strip()


def _opt_float(v):
    text = str(v).strip()
    return None if text.lower() in ("", "none", "auto") else float(text)


TYPES = {
    "seed": _int,
    "out": _str,
    "data": _str,
    "lambda": _str,
    "learner": _str,
    "learner_pi": _str,
    "learner_g": _str,
    "folds": _int,
    "draws": _int,
    "burn_in": _int,
    "prior_mean": _float,
    "prior_var": _float,
    "replicates": _int,
    "scenario": _str,
    "n": _int,
    "p": _int,
    "rho": _opt_float,
    "beta_true": _opt_float,
    "treatment_noise": _float,
    "methods": _str,
    "nuisance": _str,
    "split": _bool,
    "variance_shrink": _float,
    "contamination": _bool,
    "bins": _int,
    "psi": _str,
    "timing": _bool,
}

_COMMON = {"seed": 0, "out": "bdml-out"}

DEFAULTS = {
    "fit": {
        **_COMMON,
        "data": str(PACKAGED_DATA),
        "lambda": "ETEL,EL,HD",
        "learner": "Lasso,RandomForest,NeuralNet",
        "learner_pi": "",
        "learner_g": "",
        "folds": 2,
        "draws": 5000,
        "burn_in": 1000,
        "prior_mean": 0.0,
        "prior_var": 2.0,
    },
    "simulate": {
        **_COMMON,
        "scenario": "continuous",
        "n": 0,
        "p": 0,
        "rho": None,
        "beta_true": None,
        "methods": "EL(Lasso),DML(Lasso)",
        "replicates": 200,
        "folds": 2,
        "draws": 5000,
        "burn_in": 1000,
        "prior_mean": 1.0,
        "prior_var": 2.0,
        "timing": False,
    },
    "validate": {
        **_COMMON,
        "scenario": "splitdemo",
        "n": 500,
        "p": 0,
        "treatment_noise": 1.0,
        "lambda": "EL,ETEL,HD",
        "replicates": 200,
        "nuisance": "contaminated",
        "learner": "Lasso",
        "split": True,
        "folds": 2,
        "draws": 2000,
        "burn_in": 500,
        "prior_mean": 1.0,
        "prior_var": 2.0,
        "variance_shrink": 1.0,
        "bins": 20,
    },
    "split-demo": {
        **_COMMON,
        "n": 500,
        "replicates": 1000,
        "lambda": "EL,ETEL,HD",
        "contamination": True,
        "folds": 2,
        "draws": 2000,
        "burn_in": 500,
        "prior_mean": 0.0,
        "prior_var": 1e4,
        "bins": 30,
    },
    "gel-debug": {
        "psi": "",
        "data": "",
        "lambda": "EL,ETEL,HD",
    },
}


def _convert(key, value, source):
    if key not in TYPES:
        raise ConfigError(f"{source}: unknown setting {key!r}")
    try:
        return TYPES[key](value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: bad value for {key!r}: {exc}") from None


def resolve(command, config_path=None, overrides=None):
    """Merge defaults, config file and flag overrides into one dict."""
    if command not in DEFAULTS:
        raise ConfigError(f"unknown command {command!r}")
    allowed = DEFAULTS[command]
    cfg = dict(allowed)
    if config_path:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigError(f"config file {path} does not exist")
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        for section in ("bdml", command):
            if not parser.has_section(section):
                continue
            for key, raw in parser.items(section):
                key = key.replace("-", "_")
                if key not in allowed:
                    if section == "bdml":
                        continue
                    raise ConfigError(f"{path} [{section}]: {key!r} does not apply to {command}")
                cfg[key] = _convert(key, raw, f"{path} [{section}]")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in allowed:
            raise ConfigError(f"--{key.replace('_', '-')} does not apply to {command}")
        cfg[key] = _convert(key, value, "command line")
    _validate(command, cfg)
    return cfg


def _validate(command, cfg):
    for key in ("draws", "replicates", "folds", "bins"):
        if key in cfg and cfg[key] < 1:
            raise ConfigError(f"{key} must be at least 1, got {cfg[key]}")
    if "folds" in cfg and cfg["folds"] < 2:
        raise ConfigError(f"folds must be at least 2, got {cfg['folds']}")
    if "burn_in" in cfg and cfg["burn_in"] < 0:
        raise ConfigError(f"burn_in must be non-negative, got {cfg['burn_in']}")
    if "prior_var" in cfg and not cfg["prior_var"] > 0:
        raise ConfigError(f"prior_var must be positive, got {cfg['prior_var']}")
    if "data" in cfg and cfg["data"] and not Path(cfg["data"]).is_file():
        raise ConfigError(f"data file {cfg['data']} does not exist")


def thread_cap():
    """Worker cap from ``BDML_THREADS`` (default 1)."""
    raw = os.environ.get("BDML_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"BDML_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"BDML_THREADS must be a positive integer, got {raw!r}")
    return value
