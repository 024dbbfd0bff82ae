import math

import numpy as np
import pytest

from condqpt import quadratic
from condqpt.exact import ground_state
from condqpt.models import ModelSpec

import oracles


@pytest.mark.parametrize("n_imp", [1, 2, 4])
@pytest.mark.parametrize("g", [0.0, 1.0, 3.0, 6.0])
def test_filling_matches_ed(n_imp, g):
    ed = ground_state(ModelSpec("fermion-impurity", 8, 4, n_imp, g=g)).e0
    assert quadratic.many_body_ground(8, 4, n_imp, g).energy == pytest.approx(ed, abs=1e-9)


@pytest.mark.parametrize("n", range(4, 11, 2))
@pytest.mark.parametrize("boundary", ["obc", "pbc"])
def test_half_filling_matches_fock_oracle(n, boundary):
    # both parities of N_p, so the ring covers the Jordan-Wigner twist
    for n_p in (n // 2, n // 2 - 1):
        h = oracles.impurity(n, n_p, min(2, n_p), 1.7, boundary == "pbc")
        ref = oracles.lowest(h)
        got = quadratic.many_body_ground(n, n_p, min(2, n_p), 1.7, boundary).energy
        assert got == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("n", [11, 12])
def test_half_filling_matches_ed_n12(n):
    ed = ground_state(ModelSpec("fermion-impurity", n, n // 2, 2, g=1.7)).e0
    assert quadratic.many_body_ground(n, n // 2, 2, 1.7).energy == pytest.approx(ed, abs=1e-9)


def test_free_chain_levels():
    for n in (1, 5, 16):
        levels = quadratic.chain_levels(n, 0, 0.0)
        np.testing.assert_allclose(levels, oracles.free_levels_obc(n), atol=1e-13)
        for n_p in range(n + 1):
            assert quadratic.free_chain_energy(n, n_p) == pytest.approx(levels[:n_p].sum(), abs=1e-12)


def test_pbc_matrix_has_corner():
    a = quadratic.impurity_matrix(5, 1, 2.0, "pbc")
    assert a[0, 4] == a[4, 0] == -1.0 and a[0, 0] == -2.0
    np.testing.assert_allclose(quadratic.chain_levels(5, 1, 2.0, "pbc"), np.linalg.eigvalsh(a), atol=1e-13)


def test_levels_non_increasing_in_g():
    grid = np.linspace(-3, 6, 46)
    levels = np.array([quadratic.chain_levels(24, 5, g) for g in grid])
    assert np.all(np.diff(levels, axis=0) <= 1e-12)


def test_gap_examples():
    spec = quadratic.impurity_spectrum(2, 0, 0.0)
    assert quadratic.many_body_gap_quadratic(spec, 1) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        quadratic.many_body_gap_quadratic(spec, 2)


def test_gap_sharp_drop_near_three():
    grid = np.arange(2.0, 4.01, 0.1)
    gaps = np.array([quadratic.many_body_gap_quadratic(quadratic.impurity_spectrum(512, 128, g), 256)
                     for g in grid])
    i = int(np.argmin(gaps))
    assert abs(grid[i] - 3.0) <= 0.25
    assert gaps[i] < 0.5 * min(gaps[0], gaps[-1])


def test_extensive_model_gap_flat():
    n, n_p = 16, 8
    gaps = [quadratic.many_body_gap_quadratic(quadratic.impurity_spectrum(n, 1, g * n_p), n_p)
            for g in np.linspace(0.5, 5, 10)]
    assert (max(gaps) - min(gaps)) / np.mean(gaps) < 0.01


def test_e_cond_without_impurities():
    for n, n_p in ((8, 4), (13, 6)):
        assert quadratic.e_cond_impurity(n, n_p, 0, 2.0) == pytest.approx(
            quadratic.free_chain_energy(n, n_p) / n_p, abs=1e-15)


def test_e_cond_matches_restricted_ed():
    model = ModelSpec("fermion-impurity", 10, 5, 2, g=1.4)
    ed = ground_state(model, "cond").e0
    assert 5 * quadratic.e_cond_impurity(10, 5, 2, 1.4) == pytest.approx(ed, abs=1e-10)


@pytest.mark.parametrize("g", [-1.5, -0.3, 0.4, 2.0])
def test_modified_energies_match_restricted_ed(g):
    model = ModelSpec("fermion-impurity-extensive", 10, 5, g=g)
    e_cond, e_norm = quadratic.modified_impurity_energies(10, 5, g)
    assert 5 * e_cond == pytest.approx(ground_state(model, "cond").e0, abs=1e-10)
    assert 5 * e_norm == pytest.approx(ground_state(model, "norm").e0, abs=1e-10)


@pytest.mark.parametrize("g", [0.0, 0.3, 0.99, 1.0, 1.01, 2.0, 4.0])
def test_pfeuty_against_elliptic_integral(g):
    assert quadratic.pfeuty_epsilon(g) == pytest.approx(oracles.pfeuty_ellipe(g), abs=1e-12)
    assert quadratic.pfeuty_epsilon(g) == pytest.approx(oracles.pfeuty_series(g), abs=1e-6)


def test_pfeuty_special_values():
    assert quadratic.pfeuty_epsilon(1.0) == pytest.approx(-4 / math.pi, abs=1e-8)
    assert quadratic.pfeuty_epsilon(0.0) == pytest.approx(-1.0, abs=1e-14)
    assert -10.2 < quadratic.pfeuty_epsilon(10.0) < -10.0


def test_pfeuty_below_both_limits():
    for g in np.arange(0, 5.0001, 0.05):
        e = quadratic.pfeuty_epsilon(g)
        assert e <= min(-1.0, -g) + 1e-15
        assert e < -g


def test_pfeuty_matches_large_ring():
    ed = ground_state(ModelSpec("ising-transverse", 12, g=0.5)).e0 / 12
    assert ed == pytest.approx(quadratic.pfeuty_epsilon(0.5), abs=1e-4)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        quadratic.pfeuty_epsilon(-1.0)
    with pytest.raises(ValueError):
        quadratic.fill(quadratic.impurity_spectrum(4, 0, 0.0), 5)
    with pytest.raises(ValueError):
        quadratic.impurity_matrix(4, 5, 1.0)
