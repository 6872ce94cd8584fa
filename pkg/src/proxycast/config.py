"""Run configuration: INI file with sections, every key overridable by a
command-line flag of the same name. A fully-defaulted config runs the bundled
synthetic fixture end-to-end.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, fields
from datetime import date
from pathlib import Path

from .boosting import FeatureSpec, HyperParams
from .errors import ConfigError
from .series import AutoencoderConfig
from .similarity import SimilarityConfig

FIXTURE = "fixture"


def parse_int_list(text: str) -> tuple[int, ...]:
    """Parse "1-14", "1,2,3", "7", or combinations like "1-3,7"."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:  # allow negative numbers to fail loudly below
            lo, hi = part.split("-", 1)
            try:
                out.extend(range(int(lo), int(hi) + 1))
            except ValueError:
                raise ConfigError(f"bad integer range {part!r}") from None
        else:
            try:
                out.append(int(part))
            except ValueError:
                raise ConfigError(f"bad integer {part!r}") from None
    return tuple(out)


def parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in str(text).split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"bad float list {text!r}") from None


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"bad boolean {text!r}")


@dataclass
class RunConfig:
    # [data]
    candidates: str = FIXTURE  # CSV path, "fixture", or "remote"
    schema: str = "wide"  # wide | ohlcv
    target: str = FIXTURE  # year,value CSV path or "fixture"
    endpoint: str = ""  # URL template with {instrument} {start} {end}
    instruments: str = ""  # comma list for remote fetch
    cache_dir: str = ".proxycast_cache"
    ttl: float = 86400.0
    offline: bool = False
    fetch_start: str = "2011-01-01"
    fetch_end: str = "2023-12-30"
    # [impute]
    hidden: int = 0  # 0 = ceil(columns / 2)
    learning_rate: float = 0.01
    epochs: int = 500
    # [similarity]
    epsilon: float = 0.5
    gamma: float = 1.0
    band: str = ""  # empty = no Sakoe-Chiba window
    include_euclidean: bool = False
    normalize: bool = True
    # [selection]
    k: int = 5
    # [features]
    lags: str = "1-14"
    windows: str = "7"
    day_of_week: bool = True
    # [train]
    proxy: str = ""  # explicit proxy id; empty = prior rank winner
    split_fraction: float = 0.8
    folds: int = 3
    grid_rounds: str = "100,300"
    grid_depth: str = "3,5"
    grid_learning_rate: str = "0.05,0.1"
    grid_l2: str = "1.0"
    grid_l1: str = "0.0"
    grid_gamma: str = "0.0"
    grid_min_child_weight: str = "1.0"
    # [intervals]
    level: float = 0.95
    inflation: float = 1.25
    per_step_offsets: bool = False  # rolling-origin offsets per horizon step
    # [run]
    horizon: int = 15
    seed: int = 42
    out: str = "out"

    def validate(self) -> None:
        if self.schema not in ("wide", "ohlcv"):
            raise ConfigError(f"schema must be wide or ohlcv, got {self.schema!r}")
        if (self.candidates == FIXTURE) != (self.target == FIXTURE):
            raise ConfigError(
                "candidates and target must both be 'fixture' or both be real sources"
            )
        if self.candidates == "remote" and not (self.endpoint and self.instruments):
            raise ConfigError("remote candidates need endpoint and instruments")
        if self.hidden < 0 or self.epochs < 1 or self.learning_rate <= 0:
            raise ConfigError("bad imputer settings")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        if self.gamma <= 0:
            raise ConfigError("gamma must be positive")
        if self.band.strip():
            try:
                if int(self.band) < 0:
                    raise ValueError
            except ValueError:
                raise ConfigError(f"band must be a non-negative integer, got {self.band!r}") from None
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if not 0 < self.split_fraction < 1:
            raise ConfigError("split_fraction must be in (0, 1)")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if not 0 < self.level < 1:
            raise ConfigError("level must be in (0, 1)")
        if self.inflation < 1:
            raise ConfigError("inflation must be >= 1")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.ttl < 0:
            raise ConfigError("ttl must be >= 0")
        for key in ("fetch_start", "fetch_end"):
            try:
                date.fromisoformat(getattr(self, key))
            except ValueError:
                raise ConfigError(
                    f"{key} must be an ISO date, got {getattr(self, key)!r}"
                ) from None
        # these raise their own errors on bad content
        self.feature_spec()
        self.hyper_grid()
        self.similarity_config()

    def similarity_config(self) -> SimilarityConfig:
        band = int(self.band) if str(self.band).strip() else None
        return SimilarityConfig(epsilon=self.epsilon, gamma=self.gamma, band=band)

    def feature_spec(self) -> FeatureSpec:
        try:
            return FeatureSpec(
                lags=parse_int_list(self.lags),
                windows=parse_int_list(self.windows),
                day_of_week=self.day_of_week,
            )
        except Exception as exc:
            raise ConfigError(f"bad feature spec: {exc}") from exc

    def autoencoder_config(self) -> AutoencoderConfig:
        return AutoencoderConfig(
            hidden_width=self.hidden,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            seed=self.seed,
        )

    def hyper_grid(self) -> list[HyperParams]:
        grid = []
        try:
            for rounds in parse_int_list(self.grid_rounds):
                for depth in parse_int_list(self.grid_depth):
                    for lr in parse_float_list(self.grid_learning_rate):
                        for l2 in parse_float_list(self.grid_l2):
                            for l1 in parse_float_list(self.grid_l1):
                                for gm in parse_float_list(self.grid_gamma):
                                    for mcw in parse_float_list(self.grid_min_child_weight):
                                        grid.append(
                                            HyperParams(
                                                rounds=rounds,
                                                max_depth=depth,
                                                learning_rate=lr,
                                                l2_lambda=l2,
                                                l1_alpha=l1,
                                                gamma=gm,
                                                min_child_weight=mcw,
                                            )
                                        )
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"bad hyperparameter grid: {exc}") from exc
        if not grid:
            raise ConfigError("hyperparameter grid is empty")
        return grid

    def methods(self) -> tuple[str, ...]:
        from .selection import DEFAULT_METHODS

        return DEFAULT_METHODS + (("euclidean",) if self.include_euclidean else ())

    def out_dir(self) -> Path:
        return Path(self.out)


# INI section for every key; flags reuse the bare key name.
_SECTIONS = {
    "data": (
        "candidates", "schema", "target", "endpoint", "instruments",
        "cache_dir", "ttl", "offline", "fetch_start", "fetch_end",
    ),
    "impute": ("hidden", "learning_rate", "epochs"),
    "similarity": ("epsilon", "gamma", "band", "include_euclidean", "normalize"),
    "selection": ("k",),
    "features": ("lags", "windows", "day_of_week"),
    "train": (
        "proxy", "split_fraction", "folds", "grid_rounds", "grid_depth",
        "grid_learning_rate", "grid_l2", "grid_l1", "grid_gamma",
        "grid_min_child_weight",
    ),
    "intervals": ("level", "inflation", "per_step_offsets"),
    "run": ("horizon", "seed", "out"),
}

KEY_TO_SECTION = {key: section for section, keys in _SECTIONS.items() for key in keys}

# network settings may also come from the environment (between defaults and file)
ENV_KEYS = {
    "PROXYCAST_ENDPOINT": "endpoint",
    "PROXYCAST_TTL": "ttl",
    "PROXYCAST_CACHE_DIR": "cache_dir",
}


def _coerce(config: RunConfig, key: str, raw: str):
    current = getattr(config, key)
    if isinstance(current, bool):
        return _parse_bool(raw)
    if isinstance(current, int):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"key {key!r}: bad integer {raw!r}") from None
    if isinstance(current, float):
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"key {key!r}: bad number {raw!r}") from None
    return str(raw)


def load_config(path=None, overrides: dict[str, str] | None = None) -> RunConfig:
    """Defaults, then environment variables, then the INI file, then flags."""
    config = RunConfig()
    for env_name, key in ENV_KEYS.items():
        raw = os.environ.get(env_name)
        if raw is not None:
            setattr(config, key, _coerce(config, key, raw))
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser()
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        known = {f.name for f in fields(RunConfig)}
        for section in parser.sections():
            if section not in _SECTIONS:
                raise ConfigError(f"{path}: unknown section [{section}]")
            for key, raw in parser.items(section):
                if key not in known or KEY_TO_SECTION.get(key) != section:
                    raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
                setattr(config, key, _coerce(config, key, raw))
    for key, raw in (overrides or {}).items():
        if key not in KEY_TO_SECTION:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(config, key, _coerce(config, key, raw))
    return config


def dump_config(config: RunConfig) -> str:
    """Render the effective configuration as INI text (for provenance)."""
    lines = []
    for section, keys in _SECTIONS.items():
        lines.append(f"[{section}]")
        for key in keys:
            lines.append(f"{key} = {getattr(config, key)}")
        lines.append("")
    return "\n".join(lines)
