from dataclasses import dataclass, field

from snn.errors import RangeError
from snn.lif import LifParams


@dataclass(frozen=True)
class TrainConfig:
    """
    Training hyper-parameters. Defaults follow the MNIST column of the
    reference hyper-parameter table.

    Args:
        timesteps: T, timesteps each sample is presented for
        epochs_pretrain: N_0
        epochs_admm: N_1, ADMM retraining epochs
        epochs_hard: N_2, hard-compression retraining epochs
        batch_size: mini-batch size
        learning_rate: constant SGD step
        lambda_: activity penalty λ (>= 0)
        rng_seed: root seed for init, encoding and shuffling
        lif: neuron constants
    """
    timesteps: int = 10
    epochs_pretrain: int = 150
    epochs_admm: int = 10
    epochs_hard: int = 10
    batch_size: int = 50
    learning_rate: float = 0.05
    lambda_: float = 0.0
    rng_seed: int = 0
    lif: LifParams = field(default_factory=LifParams)

    def __post_init__(self):
        if self.timesteps < 1:
            raise RangeError(f"timesteps must be at least 1, got {self.timesteps}")
        if self.batch_size < 1:
            raise RangeError(f"batch_size must be at least 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise RangeError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.lambda_ < 0:
            raise RangeError(f"lambda must be non-negative, got {self.lambda_}")
        for name in ("epochs_pretrain", "epochs_admm", "epochs_hard"):
            if getattr(self, name) < 0:
                raise RangeError(f"{name} must be non-negative")
