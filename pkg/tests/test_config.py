import pytest

from snn.errors import ConfigError
from utils.config import ExperimentConfig, load_config, parse_overrides


def write(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def test_file_then_overrides_then_flags(tmp_path):
    path = write(tmp_path, "arch=16-8-2\nmode=prune\nsparsity=0.5\nseed=1\nlambda=0.0\n")
    config = load_config(path, ["sparsity=0.75", "timesteps=4"], seed=9, out_dir=str(tmp_path))
    assert config.arch == "16-8-2"
    assert config.sparsity == 0.75
    assert config.timesteps == 4
    assert config.seed == 9
    assert config.out_dir == str(tmp_path)


def test_defaults_follow_mnist_table():
    config = ExperimentConfig(seed=0)
    assert (config.timesteps, config.u_th, config.decay, config.surrogate_width) == (10, 0.2, 0.25, 0.5)
    assert (config.epochs_pretrain, config.epochs_admm, config.epochs_hard) == (150, 10, 10)
    assert (config.batch_size, config.rho, config.baseline_bitwidth, config.quant_iterations) == (50, 5e-4, 32, 3)


def test_all_problems_are_reported_together(tmp_path):
    path = write(tmp_path, "mode=all\nmethod=magic\nsparsity=1.5\n")
    with pytest.raises(ConfigError) as excinfo:
        load_config(path)
    problems = "\n".join(excinfo.value.problems)
    assert "method must be one of" in problems
    assert "seed is required" in problems
    assert "sparsity must lie in [0, 1)" in problems
    assert "requires bitwidth" in problems
    assert "requires lambda > 0" in problems


def test_unknown_and_unparsable_keys(tmp_path):
    path = write(tmp_path, "colour=blue\ntimesteps=ten\n")
    with pytest.raises(ConfigError) as excinfo:
        load_config(path)
    assert len(excinfo.value.problems) == 2


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.cfg")


def test_bad_override():
    with pytest.raises(ConfigError):
        parse_overrides(["sparsity"])


def test_component_views():
    config = ExperimentConfig(seed=4, mode="prune+quantize", sparsity=0.5, bitwidth=2, lambda_=0.3)
    spec = config.compression_spec()
    assert spec.sparsity == 0.5 and spec.bitwidth == 2
    assert spec.lambda_ == 0.0
    assert config.train_config(lambda_=spec.lambda_).rng_seed == 4
    assert config.to_mapping()["lambda"] == "0.3"


def test_grid_entries_override_the_base(tmp_path):
    path = write(tmp_path, "arch=16-8-2\nseed=3\ntimesteps=4\n"
                           "grid=mode=prune,sparsity=0.5;mode=all,sparsity=0.25,bitwidth=1,lambda=0.01\n")
    config = load_config(path)
    first, second = config.grid_configs()
    assert (first.mode, first.sparsity, first.bitwidth) == ("prune", 0.5, None)
    assert (second.sparsity, second.bitwidth, second.lambda_) == (0.25, 1, 0.01)
    assert first.timesteps == second.timesteps == 4
    assert first.grid is None and first.seed == 3


def test_empty_grid_has_no_entries():
    assert ExperimentConfig(seed=0).grid_configs() == []
