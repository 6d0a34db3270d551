import numpy as np
import pytest

from compression.metrics import (
    CompressionReport,
    layer_statistics,
    as_percent,
    multiplier,
    residual_memory,
    residual_ops,
    residual_spikes,
)
from snn.errors import RangeError, UndefinedBaselineError
from snn.network import network_from_weights


@pytest.mark.parametrize(
    "s, b, percent, times",
    [
        (0.25, 1, 2.34, 42.74),
        (0.75, 32, 25.00, 4.00),
        (0.0, 1, 3.13, 31.95),
        (0.5, 32, 50.00, 2.00),
        (0.0, 32, 100.00, 1.00),
    ],
)
def test_memory_rows(s, b, percent, times):
    r_mem = residual_memory(s, b)
    assert as_percent(r_mem) == percent
    assert multiplier(r_mem) == times


def test_operation_row_is_reproducible_from_rounded_rates():
    # printed rates carry two decimals, so the true r lies within half a unit of 0.13
    r_mem = residual_memory(0.25, 1)
    printed = {as_percent(residual_ops(r_mem, residual_spikes(r, 0.33))) for r in np.linspace(0.125, 0.135, 1001)}
    assert 0.91 in printed
    assert multiplier(0.0091) == 109.89


def test_percent_accepts_numpy_scalars():
    assert as_percent(np.float64(0.0234375)) == 2.34
    assert multiplier(np.float64(0.0234375)) == 42.74
    assert as_percent(np.float32(0.5)) == 50.0
    report = CompressionReport.build(lambda_=0.0, sparsity=0.25, bitwidth=1, baseline_rate=np.float64(0.2),
                                     compressed_rate=np.float64(0.1), accuracy=0.9, baseline_accuracy=0.9)
    assert report.to_row()["r_ops_pct"] == 1.17


def test_residual_spikes_example():
    assert residual_spikes(0.1, 0.4) == pytest.approx(0.25)


def test_zero_baseline_rate_is_undefined():
    with pytest.raises(UndefinedBaselineError):
        residual_spikes(0.1, 0.0)


@pytest.mark.parametrize("s, b", [(1.0, 8), (-0.1, 8), (0.5, 0), (0.5, 33)])
def test_memory_ratio_rejects_out_of_range(s, b):
    with pytest.raises(RangeError):
        residual_memory(s, b)


def test_ratios_are_monotone():
    sparsities = [0.0, 0.25, 0.5, 0.75, 0.9]
    assert all(residual_memory(a, 8) > residual_memory(b, 8) for a, b in zip(sparsities, sparsities[1:]))
    assert all(residual_memory(0.5, b) < residual_memory(0.5, b + 1) for b in range(1, 32))
    assert residual_ops(0.5, 0.5) < residual_ops(0.5, 0.8)


def test_uncompressed_report_is_unity():
    report = CompressionReport.build(lambda_=0.0, sparsity=0.0, bitwidth=32, baseline_rate=0.12,
                                     compressed_rate=0.12, accuracy=0.98, baseline_accuracy=0.98)
    assert report.r_mem == 1.0
    assert report.r_ops == 1.0
    assert report.accuracy_loss == 0.0
    assert report.r_ops_multiplier == 1.0


def test_report_row_columns():
    report = CompressionReport.build(lambda_=0.01, sparsity=0.25, bitwidth=1, baseline_rate=0.2,
                                     compressed_rate=0.1, accuracy=0.97, baseline_accuracy=0.98)
    row = report.to_row()
    assert list(row)[:8] == ["lambda", "sparsity", "bitwidth", "spike_rate", "r_mem_pct", "r_mem_x",
                             "r_ops_pct", "r_ops_x"]
    assert row["r_mem_pct"] == 2.34
    assert row["r_ops_pct"] == as_percent(0.0234375 * 0.5)
    assert row["accuracy_loss"] == pytest.approx(-1.0)


def test_layer_statistics_count_pruned_and_distinct_values():
    net = network_from_weights("4-2-1", [np.array([[0.5, 0.0, -0.5, 0.0], [1.0, 0.5, 0.0, 0.0]]),
                                         np.array([[0.3, -0.2]])])
    net = net.with_layer(0, alpha=0.5)
    first, second = layer_statistics(net, "compressed")
    assert (first.weights, first.pruned, first.distinct_values, first.alpha) == (8, 4, 4, 0.5)
    assert first.to_row()["kept_pct"] == 50.0
    assert (second.pruned, second.distinct_values, second.alpha) == (0, 2, None)
    assert second.kind == "dense" and second.network == "compressed"
