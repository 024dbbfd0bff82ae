"""Counter-based random streams shared by both kernel backends.

Every draw is a pure function of (seed, block, walker, counter), so the
result does not depend on how walkers are split across workers. The mixing
function is the splitmix64 finalizer; the Cython kernel repeats the same
arithmetic in C.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
BLOCK_MULT = 0xD1B54A32D192ED03
WALKER_MULT = 0xABC98388FB8FAC03

# reserved stream labels; real block and walker indices stay far below these
INIT_BLOCK = MASK64
RESAMPLE_WALKER = MASK64

_U64 = np.uint64
_INV53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=_U64)
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


def block_key(seed: int, block: int) -> int:
    return mix64(mix64(seed) + (block * BLOCK_MULT & MASK64))


def walker_keys(seed: int, block: int, walkers: np.ndarray) -> np.ndarray:
    base = _U64(block_key(seed, block))
    return mix64_array(base + np.asarray(walkers, dtype=_U64) * _U64(WALKER_MULT))


def walker_key(seed: int, block: int, walker: int) -> int:
    return mix64((block_key(seed, block) + walker * WALKER_MULT) & MASK64)


def draw_array(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Raw 64-bit draw number ``counters`` of each stream."""
    return mix64_array(keys + (np.asarray(counters, dtype=_U64) + _U64(1)) * _U64(GOLDEN))


def draw(key: int, counter: int) -> int:
    return mix64((key + (counter + 1) * GOLDEN) & MASK64)


def to_unit(x: np.ndarray) -> np.ndarray:
    """Uniform double in [0, 1) from the top 53 bits."""
    return (np.asarray(x, dtype=_U64) >> _U64(11)).astype(np.float64) * _INV53


def unit(x: int) -> float:
    return (x >> 11) * _INV53
