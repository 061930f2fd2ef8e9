"""Input checks shared by the estimators and the sweep engine."""

import numpy as np

from .system import ChannelSet, SystemConfig


def check_config(config):
    if config is None:
        return SystemConfig()
    if isinstance(config, dict):
        return SystemConfig(**config)
    if not isinstance(config, SystemConfig):
        raise TypeError(f"expected SystemConfig, got {type(config).__name__}")
    return config


def check_channel_set(X, config):
    """Validate that `X` is a finite channel realization matching `config`."""
    if not isinstance(X, ChannelSet):
        raise TypeError(f"expected ChannelSet, got {type(X).__name__}")
    n = config.n
    if X.G.shape != (n, n):
        raise ValueError(f"G has shape {X.G.shape}, expected {(n, n)}")
    if tuple(X.k) != tuple(config.k):
        raise ValueError(f"channel user blocks {X.k} do not match config {config.k}")
    if any(b.shape[0] != n for b in X.H_blocks):
        raise ValueError("every H block needs n rows")
    if not (np.all(np.isfinite(X.G)) and np.all(np.isfinite(X.H))):
        raise ValueError("channel matrices contain NaN or Inf")
    return X


def check_method(method, allowed):
    if method not in allowed:
        raise ValueError(f"method must be one of {sorted(allowed)}, got {method!r}")
    return method
