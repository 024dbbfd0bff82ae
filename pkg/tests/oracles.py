"""Brute-force reference Hamiltonians built from Kronecker products.

Nothing here imports the package's model code. Operators act on the full
2^N space with site i carried by bit i of the basis index (site 1 is bit 0);
a set bit is an occupied site or an up spin. Fermion operators include the
Jordan-Wigner string over lower sites. Particle sectors are cut out of the
full matrix afterwards, so the basis order is increasing bit pattern.
"""
from __future__ import annotations

import math
from functools import reduce

import numpy as np

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.array([[-1.0, 0.0], [0.0, 1.0]])  # bit 0 = down, bit 1 = up
ANNIHILATE = np.array([[0.0, 1.0], [0.0, 0.0]])  # |1> -> |0>
PARITY = np.array([[1.0, 0.0], [0.0, -1.0]])
NUMBER = np.array([[0.0, 0.0], [0.0, 1.0]])
EYE = np.eye(2)


def site_op(n: int, ops: dict) -> np.ndarray:
    """Tensor product with ``ops[i]`` on site i and identities elsewhere."""
    # kron(A, B)[a*dimB + b]: the last factor carries bit 0
    return reduce(np.kron, [ops.get(i, EYE) for i in reversed(range(n))])


def sigma_x(n, i):
    return site_op(n, {i: SX})


def sigma_z(n, i):
    return site_op(n, {i: SZ})


def number(n, i):
    return site_op(n, {i: NUMBER})


def fermion_c(n, i):
    ops = {j: PARITY for j in range(i)}
    ops[i] = ANNIHILATE
    return site_op(n, ops)


def boson_b(n, i):
    return site_op(n, {i: ANNIHILATE})


def bonds(n, pbc):
    out = [(i, i + 1) for i in range(n - 1)]
    if pbc and n > 2:
        out.append((n - 1, 0))
    return out


def hopping(n, pbc, op):
    h = np.zeros((1 << n, 1 << n))
    for i, j in bonds(n, pbc):
        ci, cj = op(n, i), op(n, j)
        h -= ci.T @ cj + cj.T @ ci
    return h


def sector_indices(n, n_p=None):
    idx = np.arange(1 << n)
    if n_p is None:
        return idx
    pop = np.array([bin(k).count("1") for k in idx])
    return idx[pop == n_p]


def restrict(h, idx):
    return h[np.ix_(idx, idx)]


def grover(n, g):
    h = -sum(sigma_x(n, i) for i in range(n))
    down = reduce(np.kron, [np.diag([1.0, 0.0])] * n)  # projector on all-down
    return h - g * n * down


def grover_modified(n, g):
    h = -sum(sigma_x(n, i) for i in range(n))
    return h - g * n * site_op(n, {0: np.diag([0.0, 1.0])})


def counter_example(n, g):
    up_x = 0.5 * np.array([[1.0, 1.0], [1.0, 1.0]])
    return -n * site_op(n, {0: up_x}) - g * n * site_op(n, {0: np.diag([0.0, 1.0])})


def ising(n, g, pbc=True):
    h = -sum(sigma_x(n, i) for i in range(n))
    for i, j in bonds(n, pbc):
        h = h - g * sigma_z(n, i) @ sigma_z(n, j)
    return h


def impurity(n, n_p, n_imp, g, pbc=False):
    h = hopping(n, pbc, fermion_c) - g * sum((number(n, i) for i in range(n_imp)), np.zeros((1 << n, 1 << n)))
    return restrict(h, sector_indices(n, n_p))


def impurity_extensive(n, n_p, g, pbc=False):
    h = hopping(n, pbc, fermion_c) - g * n_p * number(n, 0)
    return restrict(h, sector_indices(n, n_p))


def attractive(n, n_p, g, pbc=False, bosons=False):
    op = boson_b if bosons else fermion_c
    h = hopping(n, pbc, op)
    for i, j in bonds(n, pbc):
        h = h - g * number(n, i) @ number(n, j)
    return restrict(h, sector_indices(n, n_p))


def dense(family, n, g, n_p=None, n_imp=None, pbc=None):
    """Sector Hamiltonian of a family, in increasing bit-pattern order."""
    if family == "grover":
        return grover(n, g)
    if family == "grover-modified":
        return grover_modified(n, g)
    if family == "counter-example":
        return counter_example(n, g)
    if family == "ising-transverse":
        return ising(n, g, True if pbc is None else pbc)
    if family == "fermion-impurity":
        return impurity(n, n_p, n_imp, g, bool(pbc))
    if family == "fermion-impurity-extensive":
        return impurity_extensive(n, n_p, g, bool(pbc))
    if family == "fermion-attractive":
        return attractive(n, n_p, g, bool(pbc))
    if family == "hardcore-boson-attractive":
        return attractive(n, n_p, g, bool(pbc), bosons=True)
    raise ValueError(family)


def lowest(h, k=1):
    w = np.linalg.eigvalsh(h)
    return w[0] if k == 1 else w[:k]


def restricted_lowest(h, keep):
    """Ground energy of P H P on the basis states flagged by ``keep``."""
    idx = np.flatnonzero(keep)
    return lowest(h[np.ix_(idx, idx)])


def free_levels_obc(n):
    return np.sort([-2 * math.cos(math.pi * k / (n + 1)) for k in range(1, n + 1)])


def pfeuty_series(g, terms=4000):
    """E/N of the infinite transverse Ising chain by the midpoint rule on [0, pi]."""
    q = (np.arange(terms) + 0.5) * math.pi / terms
    return -float(np.mean(np.sqrt(1 + 2 * g * np.cos(q) + g * g)))


def pfeuty_ellipe(g):
    """Closed form -(1+g)(2/pi) E(k^2), k^2 = 4g/(1+g)^2."""
    from scipy.special import ellipe

    return -(1 + g) * 2 / math.pi * ellipe(4 * g / (1 + g) ** 2)
