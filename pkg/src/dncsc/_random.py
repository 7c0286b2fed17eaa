"""Seed handling shared by every stochastic stage."""

import numpy as np


def as_seed_sequence(seed):
    """Coerce ``None``, an int or a ``SeedSequence`` into a ``SeedSequence``."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if seed is None:
        return np.random.SeedSequence()
    if isinstance(seed, (int, np.integer)) and not isinstance(seed, bool):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        return np.random.SeedSequence(int(seed))
    raise TypeError(f"cannot derive a seed sequence from {type(seed).__name__}")


def child_seed(seed, *path):
    """Deterministic child stream identified by ``path``.

    Unlike ``SeedSequence.spawn`` this is stateless: the same parent and path
    always give the same stream, whatever order children are requested in.
    """
    ss = as_seed_sequence(seed)
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + tuple(int(p) for p in path))


def make_rng(seed):
    return np.random.default_rng(as_seed_sequence(seed))
