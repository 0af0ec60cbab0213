"""Experiment configuration: JSON schema, validation, and content hashing.

A configuration file fixes everything a batch run depends on: the site-law
model, the regime label, the window ladder, the detection-threshold ladder,
replica counts, the master seed, numerical tolerances, and the output
directory.  Loading validates the document strictly (unknown keys are
errors), resolves the model object, solves its tail index, and checks that
the requested regime is consistent with the solved index.  The canonical
JSON serialization is hashed so every output file can be traced back to the
exact inputs that produced it.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources

from .environments import EnvironmentModel, TruncatedBetaModel, TwoPointModel
from .regimes import check_regime, regime_for

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "config_hash",
    "default_config_text",
    "load_config",
]

DEFAULT_CONFIG_RESOURCE = "acceptance.json"

_TOP_KEYS = {
    "name",
    "model",
    "regime",
    "n_ladder",
    "delta_ladder",
    "n_envs",
    "n_walks",
    "seed",
    "rho_tol",
    "walk_cap",
    "out_dir",
    "criteria",
}
_REQUIRED_KEYS = {"model", "n_ladder", "delta_ladder", "n_envs", "n_walks", "seed"}

_MODEL_KEYS = {
    "two_point": ({"family", "p_fast", "p_slow", "w"}, {"eps0"}),
    "truncated_beta": ({"family", "a", "b"}, {"eps0"}),
}


class ConfigError(ValueError):
    """The configuration document violates the schema or its invariants."""


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _as_int(value, name: str) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool), f"{name} must be an integer")
    return int(value)


def _as_number(value, name: str) -> float:
    _require(
        isinstance(value, (int, float)) and not isinstance(value, bool),
        f"{name} must be a number",
    )
    value = float(value)
    _require(math.isfinite(value), f"{name} must be finite")
    return value


def build_model(block) -> EnvironmentModel:
    """Resolve a model block into a model object, validating its schema."""
    _require(isinstance(block, dict), "model must be an object")
    family = block.get("family")
    _require(
        family in _MODEL_KEYS,
        f"model.family must be one of {sorted(_MODEL_KEYS)}, got {family!r}",
    )
    required, optional = _MODEL_KEYS[family]
    keys = set(block)
    _require(required <= keys, f"model block is missing {sorted(required - keys)}")
    _require(
        keys <= required | optional,
        f"model block has unknown keys {sorted(keys - required - optional)}",
    )
    params = {k: _as_number(v, f"model.{k}") for k, v in block.items() if k != "family"}
    try:
        if family == "two_point":
            return TwoPointModel(**params)
        return TruncatedBetaModel(**params)
    except ValueError as exc:
        raise ConfigError(f"invalid model parameters: {exc}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated batch-run inputs; construct through :func:`load_config`."""

    name: str
    model: EnvironmentModel
    regime: str
    solved_s: float
    n_ladder: tuple[int, ...]
    delta_ladder: tuple[float, ...]
    n_envs: int
    n_walks: int
    seed: int
    rho_tol: float
    walk_cap: int
    out_dir: str
    criteria: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def criterion_params(self, key: str) -> dict:
        """Pinned parameter block for one acceptance criterion (may be empty)."""
        block = self.criteria.get(key, {})
        if not isinstance(block, dict):
            raise ConfigError(f"criteria.{key} must be an object")
        return block


def _canonical_json(document: dict) -> str:
    return json.dumps(document, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(config: ExperimentConfig | dict) -> str:
    """Stable 12-hex-digit digest of the canonical configuration document."""
    document = config.raw if isinstance(config, ExperimentConfig) else config
    return hashlib.sha256(_canonical_json(document).encode("utf-8")).hexdigest()[:12]


def load_config(source) -> ExperimentConfig:
    """Validate a configuration document (dict, JSON text, or file path).

    Raises ConfigError with a readable message on any schema violation,
    including an empty window ladder and a regime label inconsistent with
    the model's solved tail index.
    """
    if isinstance(source, dict):
        document = source
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            try:
                with open(text, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config file: {exc}") from exc
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    _require(isinstance(document, dict), "config root must be a JSON object")

    keys = set(document)
    _require(keys <= _TOP_KEYS, f"unknown config keys {sorted(keys - _TOP_KEYS)}")
    _require(_REQUIRED_KEYS <= keys, f"config is missing {sorted(_REQUIRED_KEYS - keys)}")

    model = build_model(document["model"])
    solved_s = model.tail_index()

    regime_label = document.get("regime", "auto")
    _require(isinstance(regime_label, str), "regime must be a string")
    if regime_label == "auto":
        regime = regime_for(solved_s)
    else:
        try:
            check_regime(regime_label, solved_s)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        regime = regime_label

    ladder_raw = document["n_ladder"]
    _require(isinstance(ladder_raw, list), "n_ladder must be a list")
    _require(len(ladder_raw) > 0, "n_ladder must not be empty")
    n_ladder = tuple(_as_int(n, "n_ladder entry") for n in ladder_raw)
    _require(all(n >= 16 for n in n_ladder), "n_ladder entries must be at least 16")
    _require(
        all(a < b for a, b in zip(n_ladder, n_ladder[1:])),
        "n_ladder must be strictly increasing",
    )

    deltas_raw = document["delta_ladder"]
    _require(isinstance(deltas_raw, list), "delta_ladder must be a list")
    _require(len(deltas_raw) > 0, "delta_ladder must not be empty")
    delta_ladder = tuple(_as_number(d, "delta_ladder entry") for d in deltas_raw)
    _require(all(d > 0 for d in delta_ladder), "delta_ladder entries must be positive")
    _require(
        all(a > b for a, b in zip(delta_ladder, delta_ladder[1:])),
        "delta_ladder must be strictly decreasing",
    )

    n_envs = _as_int(document["n_envs"], "n_envs")
    _require(n_envs >= 1, "n_envs must be at least 1")
    n_walks = _as_int(document["n_walks"], "n_walks")
    _require(n_walks >= 1, "n_walks must be at least 1")
    seed = _as_int(document["seed"], "seed")
    _require(0 <= seed < 1 << 64, "seed must fit in an unsigned 64-bit integer")

    rho_tol = _as_number(document.get("rho_tol", 1e-6), "rho_tol")
    _require(0.0 < rho_tol < 1.0, "rho_tol must lie in (0, 1)")
    walk_cap = _as_int(document.get("walk_cap", 10**15), "walk_cap")
    _require(walk_cap > 0, "walk_cap must be positive")

    out_dir = document.get("out_dir", "runs")
    _require(isinstance(out_dir, str) and out_dir, "out_dir must be a non-empty string")

    name = document.get("name", "experiment")
    _require(isinstance(name, str) and name, "name must be a non-empty string")

    criteria = document.get("criteria", {})
    _require(isinstance(criteria, dict), "criteria must be an object")
    for key, block in criteria.items():
        _require(isinstance(block, dict), f"criteria.{key} must be an object")

    return ExperimentConfig(
        name=name,
        model=model,
        regime=regime,
        solved_s=solved_s,
        n_ladder=n_ladder,
        delta_ladder=delta_ladder,
        n_envs=n_envs,
        n_walks=n_walks,
        seed=seed,
        rho_tol=rho_tol,
        walk_cap=walk_cap,
        out_dir=out_dir,
        criteria=dict(criteria),
        raw=document,
    )


def default_config_text() -> str:
    """The packaged default configuration document, as JSON text."""
    return (
        resources.files("trapwalk.data")
        .joinpath(DEFAULT_CONFIG_RESOURCE)
        .read_text(encoding="utf-8")
    )


def load_default_config() -> ExperimentConfig:
    """Load the packaged default configuration."""
    return load_config(json.loads(default_config_text()))
