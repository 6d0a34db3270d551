"""
Training package for spiking networks.

This package provides the rate-coded loss, the STBP backward pass, the
activity regulariser and the SGD training/evaluation loops.
"""

from .train_config import TrainConfig
from .stbp import (
    Gradients,
    one_hot,
    rate_loss,
    predict,
    predict_batch,
    regularized_loss,
    batch_loss,
    backward_pass,
)
from .trainer import (
    HistoryRow,
    TrainHistory,
    EvalResult,
    LossAugmentation,
    sgd_step,
    train,
    evaluate,
)

__all__ = [
    'TrainConfig',
    'Gradients',
    'one_hot',
    'rate_loss',
    'predict',
    'predict_batch',
    'regularized_loss',
    'batch_loss',
    'backward_pass',
    'HistoryRow',
    'TrainHistory',
    'EvalResult',
    'LossAugmentation',
    'sgd_step',
    'train',
    'evaluate',
]
