"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored. Keys are dotted and grouped by
the component they configure; see ``KEYS`` for the full list and
``README.md`` for a sample file. Relative paths resolve against the
directory that holds the config file.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError, WSNError
from .geometry import Region
from .minsensors import MinSensorsConfig
from .optimizer import TrainingConfig
from .patterns import PatternSpec
from .sensing import DetectionThresholds, EvidentialSensingParams

U64 = 2**64

# key -> parser for its value
KEYS = {
    "region.width": float,
    "region.height": float,
    "region.polygon": str,
    "grid.spacing": float,
    "sensors.count": int,
    "pattern.kind": str,
    "pattern.mu": float,
    "pattern.sigma_g": float,
    "pattern.sigma_l": float,
    "pattern.a": float,
    "pattern.b": float,
    "pattern.rate": float,
    "pattern.jitter": float,
    "pattern.path": str,
    "sensing.r_s": float,
    "sensing.lambda": float,
    "sensing.beta": float,
    "detect.p_th": float,
    "detect.eta_th": float,
    "train.gamma_n": float,
    "train.gamma_c": float,
    "train.learning_rate": float,
    "train.max_epochs": int,
    "train.adam_beta1": float,
    "train.adam_beta2": float,
    "train.adam_epsilon": float,
    "train.patience": int,
    "train.delta": float,
    "minsensors.r_a": float,
    "minsensors.initial_count": int,
    "output.dir": str,
    "seed": int,
}

_TRAIN_FIELDS = {
    "train.gamma_n": "gamma_n",
    "train.gamma_c": "gamma_c",
    "train.learning_rate": "learning_rate",
    "train.max_epochs": "max_epochs",
    "train.adam_beta1": "adam_beta1",
    "train.adam_beta2": "adam_beta2",
    "train.adam_epsilon": "adam_epsilon",
    "train.patience": "early_stop_patience",
    "train.delta": "early_stop_delta",
}


@dataclass(frozen=True)
class RegionSpec:
    width: Optional[float] = None
    height: Optional[float] = None
    polygon: Optional[str] = None

    def build(self) -> Region:
        if self.polygon is not None:
            return Region.from_file(self.polygon)
        return Region.rectangle(self.width, self.height)


@dataclass(frozen=True)
class RunConfig:
    region: RegionSpec
    grid_spacing: float = 1.0
    sensor_count: Optional[int] = None
    pattern: PatternSpec = field(default_factory=PatternSpec)
    sensing: EvidentialSensingParams = field(default_factory=EvidentialSensingParams)
    thresholds: DetectionThresholds = field(default_factory=DetectionThresholds)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    minsensors: Optional[MinSensorsConfig] = None
    output_dir: str = "out"
    seed: int = 0
    # the parsed key/value pairs, echoed into run summaries
    source: dict = field(default_factory=dict, compare=False)

    def with_seed(self, seed: int) -> "RunConfig":
        _check_seed(seed)
        source = dict(self.source, seed=seed)
        ms = self.minsensors
        if ms is not None and ms.pattern is not None:
            ms = dataclasses.replace(ms, pattern=dataclasses.replace(ms.pattern, seed=seed))
        return dataclasses.replace(
            self,
            seed=seed,
            pattern=dataclasses.replace(self.pattern, seed=seed),
            minsensors=ms,
            source=source,
        )

    def echo(self) -> dict:
        return dict(self.source)


def _check_seed(seed: int):
    if not 0 <= seed < U64:
        raise ConfigError(f"seed {seed} is not an unsigned 64-bit integer")


def parse_pairs(text: str, source: str = "<string>") -> dict:
    """Parse ``key = value`` lines into typed values, rejecting unknown or repeated keys."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: {key} given twice")
        try:
            parsed = KEYS[key](value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: {key} = {value!r} is not a valid {KEYS[key].__name__}") from None
        if isinstance(parsed, float) and not math.isfinite(parsed):
            raise ConfigError(f"{source}:{lineno}: {key} must be finite")
        out[key] = parsed
    return out


def build_config(pairs: dict, base: Path = Path("."), source: str = "<string>") -> RunConfig:
    """Assemble a :class:`RunConfig` from parsed pairs, resolving paths against ``base``."""

    def resolve(key):
        p = Path(pairs[key])
        p = Path(os.path.normpath(p if p.is_absolute() else base / p))
        if key != "output.dir" and not p.exists():
            raise ConfigError(f"{source}: {key} = {pairs[key]!r}: file not found")
        return str(p)

    pairs = dict(pairs)
    seed = pairs.get("seed", 0)
    _check_seed(seed)
    has_rect = "region.width" in pairs or "region.height" in pairs
    if "region.polygon" in pairs:
        if has_rect:
            raise ConfigError(f"{source}: give either region.polygon or region.width/height, not both")
        region = RegionSpec(polygon=resolve("region.polygon"))
    elif "region.width" in pairs and "region.height" in pairs:
        region = RegionSpec(width=pairs["region.width"], height=pairs["region.height"])
    else:
        raise ConfigError(f"{source}: region needs region.width and region.height, or region.polygon")

    try:
        pattern_kw = {k.split(".", 1)[1]: v for k, v in pairs.items() if k.startswith("pattern.")}
        if "path" in pattern_kw:
            pattern_kw["path"] = resolve("pattern.path")
        pattern = PatternSpec(seed=seed, **pattern_kw)
        sensing = EvidentialSensingParams(
            r_s=pairs.get("sensing.r_s", 4.0),
            lam=pairs.get("sensing.lambda", 0.07),
            beta=pairs.get("sensing.beta", 1.0),
        )
        thresholds = DetectionThresholds(
            p_th=pairs.get("detect.p_th", 0.8),
            eta_th=pairs.get("detect.eta_th", 0.2),
        )
        training = TrainingConfig(**{attr: pairs[k] for k, attr in _TRAIN_FIELDS.items() if k in pairs})
        minsensors = None
        if "minsensors.r_a" in pairs:
            # an explicit pattern.kind switches seeding from the partition lattice to that pattern
            minsensors = MinSensorsConfig(
                r_a=pairs["minsensors.r_a"],
                training=training,
                initial_count=pairs.get("minsensors.initial_count"),
                pattern=pattern if "pattern.kind" in pairs else None,
            )
            minsensors.check(sensing.r_s)
        elif "minsensors.initial_count" in pairs:
            raise ConfigError(f"{source}: minsensors.initial_count needs minsensors.r_a")
    except WSNError as e:
        raise ConfigError(f"{source}: {e}") from None
    except (ValueError, TypeError) as e:
        raise ConfigError(f"{source}: {e}") from None

    spacing = pairs.get("grid.spacing", 1.0)
    if not spacing > 0:
        raise ConfigError(f"{source}: grid.spacing must be positive")
    count = pairs.get("sensors.count")
    if count is not None and count < 1 and pattern.kind != "file":
        raise ConfigError(f"{source}: sensors.count must be at least 1")

    out_dir = resolve("output.dir") if "output.dir" in pairs else str(base / "out")
    return RunConfig(
        region=region,
        grid_spacing=spacing,
        sensor_count=count,
        pattern=pattern,
        sensing=sensing,
        thresholds=thresholds,
        training=training,
        minsensors=minsensors,
        output_dir=out_dir,
        seed=seed,
        source=pairs,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror}") from None
    return build_config(parse_pairs(text, str(path)), path.parent, str(path))
