"""
Experiment configuration.

A config file is a flat ``key=value`` file (the same syntax as ``.env``),
read with python-dotenv. ``--override key=value`` pairs and explicit CLI
flags are layered on top. Defaults follow the MNIST column of the
reference hyper-parameter table.
"""

import os
from dataclasses import dataclass, fields, replace
from typing import Dict, Iterable, List, Optional

from dotenv import dotenv_values, load_dotenv

from compression.admm import CompressionSpec
from snn.errors import ConfigError, SnnError
from snn.lif import LifParams
from training.train_config import TrainConfig

# Load environment variables
load_dotenv()

MODES = (
    "none",
    "prune",
    "quantize",
    "regularize",
    "prune+quantize",
    "prune+regularize",
    "quantize+regularize",
    "all",
)
METHODS = ("admm", "hard")
DATASETS = ("mnist", "synthetic")

# config-file spelling -> dataclass field
ALIASES = {"lambda": "lambda_"}


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: '{text}'")


def _optional(cast):
    def convert(text: str):
        if text is None or str(text).strip().lower() in ("", "none", "null"):
            return None
        return cast(text)
    return convert


@dataclass(frozen=True)
class ExperimentConfig:
    arch: str = "784-400-10"
    decay: float = 0.25
    u_th: float = 0.2
    surrogate_width: float = 0.5
    timesteps: int = 10
    epochs_pretrain: int = 150
    epochs_admm: int = 10
    epochs_hard: int = 10
    batch_size: int = 50
    learning_rate: float = 0.05
    lambda_: float = 0.0
    mode: str = "none"
    method: str = "admm"
    sparsity: Optional[float] = None
    bitwidth: Optional[int] = None
    quant_iterations: int = 3
    quant_alpha_init: Optional[float] = None
    rho: float = 5e-4
    baseline_bitwidth: int = 32
    dataset: str = "mnist"
    data_dir: str = os.getenv("SNN_DATA_DIR", "data")
    out_dir: str = os.getenv("SNN_OUT_DIR", "runs")
    checkpoint: Optional[str] = None
    train_limit: Optional[int] = None
    test_limit: Optional[int] = None
    synthetic_size: int = 200
    compress_edge_layers: bool = False
    seed: Optional[int] = None
    # "mode=prune,sparsity=0.5;mode=quantize,bitwidth=2": one report row per entry
    grid: Optional[str] = None

    # ------------------------------------------------------------ construction

    @classmethod
    def from_mapping(cls, values: Dict[str, Optional[str]]) -> "ExperimentConfig":
        """Build from string values, collecting every conversion problem before failing."""
        converters = {
            int: int,
            float: float,
            str: str,
            bool: _parse_bool,
            Optional[int]: _optional(int),
            Optional[float]: _optional(float),
            Optional[str]: _optional(str),
        }
        known = {f.name: f for f in fields(cls)}
        kwargs, problems = {}, []
        for raw_key, raw_value in values.items():
            key = ALIASES.get(raw_key.strip(), raw_key.strip())
            if key not in known:
                problems.append(f"unknown key '{raw_key}'")
                continue
            convert = converters[known[key].type] if known[key].type in converters else str
            try:
                kwargs[key] = convert(raw_value) if raw_value is not None else None
            except (TypeError, ValueError):
                problems.append(f"{raw_key}: cannot parse '{raw_value}'")
        if problems:
            raise ConfigError(problems)
        return cls(**kwargs)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    # ------------------------------------------------------------ validation

    @property
    def wants_prune(self) -> bool:
        return self.mode in ("prune", "prune+quantize", "prune+regularize", "all")

    @property
    def wants_quantize(self) -> bool:
        return self.mode in ("quantize", "prune+quantize", "quantize+regularize", "all")

    @property
    def wants_regularize(self) -> bool:
        return self.mode in ("regularize", "prune+regularize", "quantize+regularize", "all")

    def problems(self) -> List[str]:
        problems = []
        if self.mode not in MODES:
            problems.append(f"mode must be one of {', '.join(MODES)}; got '{self.mode}'")
        if self.method not in METHODS:
            problems.append(f"method must be one of {', '.join(METHODS)}; got '{self.method}'")
        if self.dataset not in DATASETS:
            problems.append(f"dataset must be one of {', '.join(DATASETS)}; got '{self.dataset}'")
        if self.seed is None:
            problems.append("seed is required for reproducible runs")
        if self.wants_prune and self.sparsity is None:
            problems.append(f"mode '{self.mode}' requires sparsity")
        if self.sparsity is not None and not 0.0 <= self.sparsity < 1.0:
            problems.append(f"sparsity must lie in [0, 1), got {self.sparsity}")
        if self.wants_quantize and self.bitwidth is None:
            problems.append(f"mode '{self.mode}' requires bitwidth")
        if self.bitwidth is not None and not 1 <= self.bitwidth <= self.baseline_bitwidth:
            problems.append(f"bitwidth must lie in [1, {self.baseline_bitwidth}], got {self.bitwidth}")
        if self.wants_regularize and not self.lambda_ > 0:
            problems.append(f"mode '{self.mode}' requires lambda > 0")
        if self.method == "hard" and self.wants_regularize and not (self.wants_prune or self.wants_quantize):
            problems.append("method 'hard' needs pruning or quantization in the mode")
        if self.quant_iterations < 1:
            problems.append("quant_iterations must be at least 1")
        if self.dataset == "synthetic" and self.synthetic_size < 2:
            problems.append("synthetic_size must be at least 2")
        for name in ("train_limit", "test_limit"):
            value = getattr(self, name)
            if value is not None and value < 1:
                problems.append(f"{name} must be positive when set")
        if self.grid:
            try:
                self.grid_configs()
            except ConfigError as e:
                problems.extend(e.problems)
        # range checks owned by the component types
        for build in (self.lif_params, self.train_config, lambda: self.compression_spec().quant):
            try:
                build()
            except SnnError as e:
                problems.append(str(e))
        return problems

    def validate(self) -> "ExperimentConfig":
        problems = self.problems()
        if problems:
            raise ConfigError(problems)
        return self

    # ------------------------------------------------------------ component views

    def lif_params(self) -> LifParams:
        return LifParams(decay=self.decay, u_th=self.u_th, surrogate_width=self.surrogate_width)

    def train_config(self, lambda_: float = 0.0) -> TrainConfig:
        return TrainConfig(
            timesteps=self.timesteps,
            epochs_pretrain=self.epochs_pretrain,
            epochs_admm=self.epochs_admm,
            epochs_hard=self.epochs_hard,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            lambda_=lambda_,
            rng_seed=self.seed if self.seed is not None else 0,
            lif=self.lif_params(),
        )

    def compression_spec(self) -> CompressionSpec:
        return CompressionSpec(
            sparsity=self.sparsity if self.wants_prune else None,
            bitwidth=self.bitwidth if self.wants_quantize else None,
            quant_iterations=self.quant_iterations,
            quant_alpha_init=self.quant_alpha_init,
            lambda_=self.lambda_ if self.wants_regularize else 0.0,
            rho=self.rho,
        )

    def grid_configs(self) -> List["ExperimentConfig"]:
        """
        One validated configuration per ``grid`` entry.

        Entries are separated by ";" and hold comma-separated key=value
        pairs that override this configuration. Problems in every entry are
        collected before raising.
        """
        if not self.grid:
            return []
        base = {f.name: str(getattr(self, f.name)) for f in fields(self) if f.name != "grid"}
        configs, problems = [], []
        entries = [e.strip() for e in self.grid.split(";") if e.strip()]
        for k, entry in enumerate(entries):
            try:
                pairs = parse_overrides(p for p in entry.split(",") if p.strip())
                values = dict(base, **{ALIASES.get(key, key): value for key, value in pairs.items()})
                configs.append(ExperimentConfig.from_mapping(values).validate())
            except ConfigError as e:
                problems.extend(f"grid entry {k} ('{entry}'): {p}" for p in e.problems)
        if problems:
            raise ConfigError(problems)
        return configs

    def to_mapping(self) -> Dict[str, str]:
        reverse = {v: k for k, v in ALIASES.items()}
        return {reverse.get(f.name, f.name): str(getattr(self, f.name)) for f in fields(self)}

    def describe(self) -> dict:
        return self.to_mapping()


def parse_overrides(pairs: Iterable[str]) -> Dict[str, str]:
    """Turn ``key=value`` strings into a dict; malformed pairs are reported together."""
    values, problems = {}, []
    for pair in pairs or []:
        if "=" not in pair:
            problems.append(f"override '{pair}' is not of the form key=value")
            continue
        key, value = pair.split("=", 1)
        values[key.strip()] = value.strip()
    if problems:
        raise ConfigError(problems)
    return values


def load_config(path: Optional[str] = None, overrides: Optional[Iterable[str]] = None, **flags) -> ExperimentConfig:
    """
    Read a config file, apply ``key=value`` overrides and explicit flags, then validate.

    Args:
        path: flat key=value file, optional
        overrides: iterable of "key=value" strings
        **flags: explicit values (data_dir, out_dir, seed) that win over everything

    Returns:
        ExperimentConfig: the validated configuration
    """
    values: Dict[str, Optional[str]] = {}
    if path:
        if not os.path.exists(path):
            raise ConfigError([f"config file not found: {path}"])
        values.update(dotenv_values(path))
    values.update(parse_overrides(overrides))
    config = ExperimentConfig.from_mapping(values).with_overrides(**flags)
    return config.validate()
