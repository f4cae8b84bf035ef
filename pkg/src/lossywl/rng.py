"""Counter-based coins for the lossy simulation.

Every coin is a pure function of ``(trial seed, sender, receiver, layer)``,
so a trial's outcome does not depend on visiting order or thread layout.

* ``mix64`` is the SplitMix64 output finaliser.
* the seed of trial ``t`` is the ``t``-th SplitMix64 output for ``base_seed``:
  ``mix64(base_seed + (t + 1) * GAMMA)``
* a channel key is ``mix64(mix64(mix64(a + GAMMA) ^ (b + GAMMA)) ^ (l + GAMMA))``
* the coin is ``(mix64(trial_seed ^ key) >> 11) * 2**-53 < survival``

All arithmetic is modulo 2**64. The numba kernels in :mod:`lossywl.sim`
reimplement the same formulas on ``uint64``.
"""

from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
M1 = 0xBF58476D1CE4E5B9
M2 = 0x94D049BB133111EB
INV53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * M1) & MASK
    z = ((z ^ (z >> 27)) * M2) & MASK
    return z ^ (z >> 31)


def trial_seed(base_seed: int, t: int) -> int:
    return mix64((base_seed & MASK) + (t + 1) * GAMMA)


def channel_key(a: int, b: int, layer: int) -> int:
    k = mix64(a + GAMMA)
    k = mix64(k ^ ((b + GAMMA) & MASK))
    return mix64(k ^ ((layer + GAMMA) & MASK))


def coin_uniform(seed: int, key: int) -> float:
    return (mix64(seed ^ key) >> 11) * INV53


def coin(seed: int, a: int, b: int, layer: int, p: float) -> bool:
    return coin_uniform(seed, channel_key(a, b, layer)) < p


def key_table(senders, receivers, layers: int) -> np.ndarray:
    """``keys[l, c]`` for channels ``c`` given as parallel sender/receiver lists."""
    out = np.zeros((layers + 1, len(senders)), dtype=np.uint64)
    for l in range(1, layers + 1):
        for c, (a, b) in enumerate(zip(senders, receivers)):
            out[l, c] = channel_key(int(a), int(b), l)
    return out
