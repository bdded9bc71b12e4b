"""Network and training configuration."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class TcnConfig:
    """Dilated temporal convolutional network layout.

    Five residual blocks of two causal dilated conv layers (32 channels,
    kernel 7, ReLU, dropout 0.1), dilations doubling per block, and a
    final-time-step linear readout to four joint angles. The default
    window length equals the receptive field.
    """

    in_channels: int = 18
    blocks: int = 5
    layers_per_block: int = 2
    channels: int = 32
    kernel: int = 7
    dropout: float = 0.1
    dilation_per_block: tuple[int, ...] = (1, 2, 4, 8, 16)
    out_dim: int = 4
    window_len: int | None = None

    def __post_init__(self):
        if self.kernel < 1 or self.blocks < 1 or self.channels < 1:
            raise ValueError("kernel, blocks, channels must be >= 1")
        if self.layers_per_block != 2:
            raise ValueError("blocks are fixed at two conv layers each")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if len(self.dilation_per_block) != self.blocks:
            raise ValueError(
                f"need one dilation per block ({self.blocks}), got {len(self.dilation_per_block)}"
            )
        if any(d < 1 for d in self.dilation_per_block):
            raise ValueError("dilations must be >= 1")
        if self.in_channels < 1 or self.out_dim < 1:
            raise ValueError("in_channels and out_dim must be >= 1")
        if self.window_len is None:
            object.__setattr__(self, "window_len", receptive_field(self))
        if self.window_len < self.kernel:
            raise ValueError(f"window_len {self.window_len} < kernel {self.kernel}")


def receptive_field(config: TcnConfig) -> int:
    """Samples of past input that can reach the current output."""
    return 1 + sum(
        config.layers_per_block * (config.kernel - 1) * d for d in config.dilation_per_block
    )


@dataclass(frozen=True)
class TrainConfig:
    """Adam/MSE training loop settings.

    Early stopping restores the best-validation checkpoint after
    `patience` epochs without improvement beyond `min_delta`.
    """

    lr: float = 0.001
    batch: int = 32
    max_epochs: int = 50
    patience: int = 5
    val_fraction: float = 0.1
    seed: int = 0
    min_delta: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in (0, 1)")
        if self.patience > self.max_epochs:
            raise ValueError("patience must be <= max_epochs")
        if self.batch < 1 or self.lr <= 0:
            raise ValueError("batch must be >= 1 and lr > 0")
