"""Pure-numpy walker propagation, used when the compiled kernel is absent.

All walkers advance in lockstep, one sojourn per pass. The arithmetic follows
the compiled kernel step for step, and logarithms go through ``math.log`` (the
C library routine) rather than ``np.log``, whose SIMD implementation differs
in the last bit for some inputs.
"""
from __future__ import annotations

import math

import numpy as np

from . import _rng

FAM_GROVER, FAM_BIT0, FAM_ISING, FAM_IMPURITY, FAM_ATTRACTIVE = range(5)

_U64 = np.uint64
_ONE = _U64(1)
_libm_log = np.frompyfunc(math.log, 1, 1)


def _partner(c, n):
    return (c >> _ONE) | ((c & _ONE) << _U64(n - 1))


def potential(c: np.ndarray, params: tuple) -> np.ndarray:
    family, n, bond_mask, imp_mask, vscale, n_bonds = (params[i] for i in (0, 1, 5, 6, 7, 8))
    if family == FAM_GROVER:
        return np.where(c == 0, -vscale, 0).astype(np.int64)
    if family == FAM_BIT0:
        return np.where((c & _ONE) != 0, -vscale, 0).astype(np.int64)
    if family == FAM_ISING:
        anti = np.bitwise_count((c ^ _partner(c, n)) & _U64(bond_mask)).astype(np.int64)
        return -(n_bonds - 2 * anti)
    if family == FAM_IMPURITY:
        return -np.bitwise_count(c & _U64(imp_mask)).astype(np.int64)
    return -np.bitwise_count(c & _partner(c, n) & _U64(bond_mask)).astype(np.int64)


def allowed(c: np.ndarray, params: tuple) -> np.ndarray:
    mode, vmin = params[4], params[9]
    if mode == 0:
        return np.ones(c.shape, dtype=bool)
    cond = potential(c, params) == vmin
    return cond if mode == 1 else ~cond


def move_mask(c: np.ndarray, m: int, params: tuple) -> np.ndarray:
    n, particle = params[1], params[2]
    if not particle:
        return np.full(c.shape, _ONE << _U64(m), dtype=_U64)
    pair = _U64((1 << m) | (1 << ((m + 1) % n)))
    occ = c & pair
    return np.where((occ == 0) | (occ == pair), _U64(0), pair)


def _moves(c: np.ndarray, params: tuple):
    """Per-candidate (mask, usable) pairs in canonical order."""
    out = []
    for m in range(params[3]):
        mask = move_mask(c, m, params)
        ok = mask != 0
        ok[ok] = allowed(c[ok] ^ mask[ok], params)
        out.append((mask, ok))
    return out


def propagate(states, logw, jumps, lo, hi, params, seed, block):
    """Advance walkers ``lo..hi-1`` through one block in place."""
    g, e_ref, dt = params[10], params[11], params[12]
    n_w = hi - lo
    keys = _rng.walker_keys(seed, block, np.arange(lo, hi, dtype=_U64))
    c = states[lo:hi].copy()
    t = np.zeros(n_w)
    lw = np.zeros(n_w)
    counter = np.zeros(n_w, dtype=_U64)
    n_jumps = np.zeros(n_w, dtype=np.int64)
    active = np.arange(n_w)
    while active.size:
        ca = c[active]
        moves = _moves(ca, params)
        kap = np.sum([ok for _, ok in moves], axis=0, dtype=np.int64) if moves else np.zeros(len(ca), np.int64)
        rate = (kap.astype(np.float64) - g * potential(ca, params).astype(np.float64)) + e_ref
        rem = dt - t[active]
        stuck = kap == 0
        done = stuck.copy()
        x = _rng.draw_array(keys[active], counter[active])
        counter[active] += _ONE
        u = _rng.to_unit(x)
        tau = np.full(len(ca), np.inf)
        live = ~stuck
        tau[live] = -_libm_log(1.0 - u[live]).astype(np.float64) / kap[live].astype(np.float64)
        done |= tau >= rem
        step = np.where(done, rem, tau)
        lw[active] += rate * step
        t[active] += np.where(done, 0.0, tau)
        hop = ~done
        if hop.any():
            idx = active[hop]
            x = _rng.draw_array(keys[idx], counter[idx])
            counter[idx] += _ONE
            j = ((x >> _U64(32)) * kap[hop].astype(_U64)) >> _U64(32)
            j = j.astype(np.int64)
            seen = np.zeros(hop.sum(), dtype=np.int64)
            chosen = np.zeros(hop.sum(), dtype=_U64)
            picked = np.zeros(hop.sum(), dtype=bool)
            for mask, ok in moves:
                okh = ok[hop]
                hit = okh & ~picked & (seen == j)
                chosen[hit] = mask[hop][hit]
                picked |= hit
                seen += okh
            c[idx] ^= chosen
            n_jumps[idx] += 1
        active = active[hop]
    states[lo:hi] = c
    logw[lo:hi] = lw
    jumps[lo:hi] = n_jumps
