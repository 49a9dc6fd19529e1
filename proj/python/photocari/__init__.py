"""Photo/caricature translation with learned warping.

Images are HxWx3 uint8 arrays. Configs are dicts with the TrainConfig field
names; see ``config()`` for the full set.
"""

from ._photocari import (
    CHECKPOINT_FORMAT_VERSION,
    BadSize,
    ChannelMismatch,
    ConfigError,
    DegenerateConfiguration,
    Error,
    ExtractorUnavailable,
    IoError,
    MissingDomainDir,
    Model,
    NonFiniteLoss,
    ShapeMismatch,
    StageMismatch,
    config,
    make_extractor,
    train,
)

__all__ = [
    "CHECKPOINT_FORMAT_VERSION",
    "BadSize",
    "ChannelMismatch",
    "ConfigError",
    "DegenerateConfiguration",
    "Error",
    "ExtractorUnavailable",
    "IoError",
    "MissingDomainDir",
    "Model",
    "NonFiniteLoss",
    "ShapeMismatch",
    "StageMismatch",
    "config",
    "make_extractor",
    "train",
]
