"""Deterministic random-number plumbing.

Two mechanisms are used throughout the package:

* ``numpy``'s PCG64 generator (via :func:`make_rng`) for bulk sampling.  Its
  state is serializable and its streams are stable for a fixed numpy version.
* A splitmix64 avalanche, documented bit-exactly below, wherever replay
  stability is required independently of how much randomness other code
  consumed: replica-seed derivation, the per-vertex draws of the six-vertex
  sampler and the event stream of the exclusion-process kernel.

splitmix64 finalizer (all arithmetic mod 2**64)::

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

A stream with seed ``s`` produces outputs ``mix64(s + k*GOLDEN)`` for
k = 1, 2, ...; a counter-mode draw for counter ``c`` under seed ``s`` is
``mix64(mix64(c * GOLDEN + GOLDEN) ^ s)``.  Uniforms take the top 53 bits.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


def mix64(z: int) -> int:
    """splitmix64 finalizer; a bijection on 64-bit integers."""
    z &= MASK64
    z ^= z >> 30
    z = (z * _MIX1) & MASK64
    z ^= z >> 27
    z = (z * _MIX2) & MASK64
    z ^= z >> 31
    return z


def derive_replica_seed(master_seed: int, replica_index: int) -> int:
    """Per-replica seed: ``mix64(master + (i+1)*GOLDEN)``.

    Injective in ``replica_index`` for fixed master because the affine map is
    injective mod 2**64 (GOLDEN is odd) and mix64 is a bijection.
    """
    if replica_index < 0:
        raise ValueError("replica_index must be nonnegative")
    return mix64((master_seed + (replica_index + 1) * GOLDEN) & MASK64)


def make_rng(seed: int) -> np.random.Generator:
    """The package's bulk generator: PCG64 seeded directly (no entropy pool)."""
    return np.random.Generator(np.random.PCG64(seed))


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer on a uint64 array."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return z


def counter_uniforms(seeds: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Uniforms in [0,1) indexed by (seed, counter), order-independent.

    ``seeds`` and ``counters`` broadcast against each other (uint64).  The
    draw for a given pair never depends on which other pairs are evaluated,
    which is what makes window restrictions of the six-vertex sampler exact
    under seed replay.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    counters = np.asarray(counters, dtype=np.uint64)
    h = mix64_array(counters * np.uint64(GOLDEN) + np.uint64(GOLDEN))
    h = mix64_array(np.bitwise_xor(h, seeds))
    return (h >> np.uint64(11)).astype(np.float64) * _INV53


def counter_uniform(seed: int, counter: int) -> float:
    """Scalar twin of :func:`counter_uniforms` (same bits)."""
    h = mix64((counter * GOLDEN + GOLDEN) & MASK64)
    return (mix64(h ^ seed) >> 11) * _INV53
