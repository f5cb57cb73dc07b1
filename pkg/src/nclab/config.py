"""Experiment configuration: INI files with bracketed-list values.

Values are parsed as JSON when possible (numbers, lists, quoted strings,
true/false) and fall back to bare strings, so ``name = circle`` and
``labels = [1, -1]`` both work.
"""

import configparser
from dataclasses import dataclass, field
import hashlib
import json

import numpy as np

from .exceptions import ConfigError

# dimension caps for the sparse block storage used by every model
MAX_DIM = {"circle": 2_000_001, "torus2": 200_000, "moyal": 200_000}


def _value(raw):
    raw = raw.strip()
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        low = raw.lower()
        if low in ("true", "yes", "on"):
            return True
        if low in ("false", "no", "off"):
            return False
        return raw


@dataclass(frozen=True)
class GridSpec:
    """``start, stop, count, scale`` with scale "log" or "linear"."""

    start: float
    stop: float
    count: int
    scale: str = "log"

    def values(self):
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    def describe(self):
        return f"[{self.start!r}, {self.stop!r}, {self.count}, {self.scale}]"


@dataclass(frozen=True)
class ExperimentConfig:
    model: dict
    chain: list
    grids: dict
    tolerances: dict
    fit: dict = field(default_factory=dict)
    props: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    text: str = ""

    @property
    def sha256(self):
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()

    def tol(self, name, default):
        return float(self.tolerances.get(name, default))

    def grid(self, name):
        if name not in self.grids:
            raise ConfigError(f"grid {name!r} missing from [grids]")
        return self.grids[name]


def _grid(name, v):
    if not isinstance(v, list) or len(v) not in (3, 4):
        raise ConfigError(f"grid {name!r} must be [start, stop, count, scale]")
    start, stop, count = v[:3]
    scale = v[3] if len(v) == 4 else "log"
    if scale not in ("log", "linear"):
        raise ConfigError(f"grid {name!r}: scale must be 'log' or 'linear'")
    if not isinstance(count, int) or count < 1:
        raise ConfigError(f"grid {name!r}: count must be a positive integer (empty grid)")
    try:
        start, stop = float(start), float(stop)
    except (TypeError, ValueError):
        raise ConfigError(f"grid {name!r}: start and stop must be numbers") from None
    if not (start > 0 and stop > 0):
        raise ConfigError(f"grid {name!r} must be strictly positive")
    if count > 1 and not stop > start:
        raise ConfigError(f"grid {name!r} must be increasing")
    return GridSpec(start, stop, count, scale)


def _model_dim(model):
    name = model.get("name")
    N = model.get("N")
    if name == "synthetic":
        return 0
    if not isinstance(N, int):
        raise ConfigError("[model] N must be an integer")
    if name == "circle":
        return 2 * N + 1
    if name == "torus2":
        return 2 * (2 * N + 1) ** 2
    if name == "moyal":
        p = int(model.get("p", 2))
        return 2 ** (p // 2) * (2 * N + 1) ** p
    raise ConfigError(f"unknown model {name!r}; use circle, torus2, moyal or synthetic")


def parse_config(text):
    """Parse and validate configuration text.

    Raises
    ------
    ConfigError
        On syntax errors, unknown models, bad grids or models over the
        memory budget.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc
    sec = {s: {k: _value(v) for k, v in cp[s].items()} for s in cp.sections()}
    if "model" not in sec:
        raise ConfigError("config needs a [model] section")
    model = sec["model"]
    dim = _model_dim(model)
    cap = MAX_DIM.get(model["name"])
    if cap is not None and dim > cap:
        raise ConfigError(f"model dimension {dim} exceeds budget {cap}")
    chain = sec.get("chain", {}).get("terms", [])
    if not isinstance(chain, list):
        raise ConfigError("[chain] terms must be a list of [coef, [labels]]")
    for term in chain:
        if not (isinstance(term, list) and len(term) == 2 and isinstance(term[1], list)):
            raise ConfigError(f"bad chain term {term!r}")
    grids = {k: _grid(k, v) for k, v in sec.get("grids", {}).items()}
    return ExperimentConfig(
        model=model,
        chain=chain,
        grids=grids,
        tolerances=sec.get("tolerances", {}),
        fit=sec.get("fit", {}),
        props=sec.get("props", {}),
        output=sec.get("output", {}),
        text=text,
    )


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
