# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled walker propagation.

Mirrors ``_kernel_py.propagate`` operation by operation; the two must give
bit-identical results, so the build disables floating-point contraction.
"""
from libc.math cimport log
from libc.stdint cimport uint64_t, int64_t

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

cdef extern from *:
    """
    static const unsigned long long CQ_GOLDEN = 0x9E3779B97F4A7C15ULL;
    static const unsigned long long CQ_BLOCK_MULT = 0xD1B54A32D192ED03ULL;
    static const unsigned long long CQ_WALKER_MULT = 0xABC98388FB8FAC03ULL;
    static const double CQ_INV53 = 0x1p-53;
    """
    const uint64_t GOLDEN "CQ_GOLDEN"
    const uint64_t BLOCK_MULT "CQ_BLOCK_MULT"
    const uint64_t WALKER_MULT "CQ_WALKER_MULT"
    const double INV53 "CQ_INV53"

cdef enum:
    FAM_GROVER = 0
    FAM_BIT0 = 1
    FAM_ISING = 2
    FAM_IMPURITY = 3
    FAM_ATTRACTIVE = 4

cdef struct Params:
    int family
    int n_sites
    int particle
    int n_cand
    int mode
    uint64_t bond_mask
    uint64_t site_mask
    uint64_t imp_mask
    int64_t vscale
    int64_t n_bonds
    int64_t vmin
    double g
    double e_ref
    double dt


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline uint64_t partner(uint64_t c, int n) noexcept nogil:
    return (c >> 1) | ((c & 1) << (n - 1))


cdef inline int64_t potential(uint64_t c, Params* p) noexcept nogil:
    if p.family == FAM_GROVER:
        return -p.vscale if c == 0 else 0
    if p.family == FAM_BIT0:
        return -p.vscale if (c & 1) else 0
    if p.family == FAM_ISING:
        return -(p.n_bonds - 2 * __builtin_popcountll((c ^ partner(c, p.n_sites)) & p.bond_mask))
    if p.family == FAM_IMPURITY:
        return -__builtin_popcountll(c & p.imp_mask)
    return -__builtin_popcountll(c & partner(c, p.n_sites) & p.bond_mask)


cdef inline bint allowed(uint64_t c, Params* p) noexcept nogil:
    cdef bint cond
    if p.mode == 0:
        return True
    cond = potential(c, p) == p.vmin
    return cond if p.mode == 1 else not cond


cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


cdef inline uint64_t candidates(uint64_t c, Params* p) noexcept nogil:
    """Bit m set when move m is possible from c, before the restriction."""
    if not p.particle:
        return p.site_mask
    return (c ^ partner(c, p.n_sites)) & p.bond_mask


cdef inline uint64_t move_mask(int m, Params* p) noexcept nogil:
    if not p.particle:
        return (<uint64_t>1) << m
    if m == p.n_sites - 1:
        return ((<uint64_t>1) << m) | 1
    return (<uint64_t>3) << m


cdef inline int64_t count_allowed(uint64_t c, uint64_t cand, Params* p) noexcept nogil:
    cdef int64_t kap = 0
    cdef uint64_t rest = cand
    cdef int m
    if p.mode == 0:
        return __builtin_popcountll(cand)
    while rest:
        m = __builtin_ctzll(rest)
        rest &= rest - 1
        if allowed(c ^ move_mask(m, p), p):
            kap += 1
    return kap


cdef inline uint64_t pick(uint64_t c, uint64_t cand, int64_t j, Params* p) noexcept nogil:
    """XOR mask of the j-th allowed move in increasing move index."""
    cdef uint64_t rest = cand, mask
    cdef int m
    while True:
        m = __builtin_ctzll(rest)
        rest &= rest - 1
        mask = move_mask(m, p)
        if p.mode == 0 or allowed(c ^ mask, p):
            if j == 0:
                return mask
            j -= 1


cdef void walk(uint64_t* state, double* logw, int64_t* jumps, uint64_t key, Params* p) noexcept nogil:
    cdef uint64_t c = state[0], k = 0, x, cand
    cdef double t = 0.0, lw = 0.0, u, tau, rate, rem
    cdef int64_t n_jumps = 0, kap, j
    while True:
        cand = candidates(c, p)
        kap = count_allowed(c, cand, p)
        rate = <double>kap - p.g * <double>potential(c, p) + p.e_ref
        rem = p.dt - t
        if kap == 0:
            lw += rate * rem
            break
        x = mix64(key + (k + 1) * GOLDEN)
        k += 1
        u = <double>(x >> 11) * INV53
        tau = -log(1.0 - u) / <double>kap
        if tau >= rem:
            lw += rate * rem
            break
        lw += rate * tau
        t += tau
        x = mix64(key + (k + 1) * GOLDEN)
        k += 1
        j = <int64_t>(((x >> 32) * <uint64_t>kap) >> 32)
        c ^= pick(c, cand, j, p)
        n_jumps += 1
    state[0] = c
    logw[0] = lw
    jumps[0] = n_jumps


def propagate(uint64_t[::1] states, double[::1] logw, int64_t[::1] jumps,
              Py_ssize_t lo, Py_ssize_t hi, tuple params, uint64_t seed, uint64_t block):
    """Advance walkers ``lo..hi-1`` through one block in place."""
    cdef Params p
    cdef Py_ssize_t i
    cdef uint64_t base
    (p.family, p.n_sites, p.particle, p.n_cand, p.mode, p.bond_mask, p.imp_mask,
     p.vscale, p.n_bonds, p.vmin, p.g, p.e_ref, p.dt, p.site_mask) = params
    base = mix64(mix64(seed) + block * BLOCK_MULT)
    with nogil:
        for i in range(lo, hi):
            walk(&states[i], &logw[i], &jumps[i],
                 mix64(base + <uint64_t>i * WALKER_MULT), &p)
