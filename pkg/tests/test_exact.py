import math

import numpy as np
import pytest
import scipy.sparse

from condqpt import exact
from condqpt.basis import split_space
from condqpt.errors import CapabilityError, ConvergenceError, EmptySubspaceError
from condqpt.exact import (
    SubspaceSelector,
    gap_report,
    ground_state,
    grover_symmetric_ground,
    lanczos_lowest,
    solve_matrix,
)
from condqpt.models import ModelSpec

import oracles


@pytest.mark.parametrize("g", [-2.0, 0.0, 0.3, 1.0, 7.5])
def test_grover_single_spin(g):
    r = ground_state(ModelSpec("grover", 1, g=g))
    assert r.e0 == pytest.approx(-g / 2 - math.sqrt(1 + g * g / 4), abs=1e-14)


@pytest.mark.parametrize("g", [0.2, 1.0, 3.7])
def test_grover_cond_energy(g):
    assert ground_state(ModelSpec("grover", 10, g=g), "cond").e0 == -10 * g


def test_counter_example_n4():
    r = ground_state(ModelSpec("counter-example", 4, g=1.0))
    assert r.e0 / 4 == pytest.approx(-1 - math.sqrt(2) / 2, abs=1e-12)


def test_grover_norm_independent_of_g():
    a = ground_state(ModelSpec("grover", 8, g=0.5), "norm").e0
    b = ground_state(ModelSpec("grover", 8, g=5.0), "norm").e0
    assert abs(a - b) < 1e-10


def test_symmetric_two_spins():
    assert grover_symmetric_ground(2, 0.0, "full").e0 == pytest.approx(-2.0, abs=1e-14)


@pytest.mark.parametrize("n", list(range(1, 11)) + [12])
def test_symmetric_matches_full_ed(n):
    for g in (0.0, 0.4, 0.9, 1.0, 1.2, 2.5):
        model = ModelSpec("grover", n, g=g)
        full = ground_state(model, "full", want_excited=n > 1)
        sym = grover_symmetric_ground(n, g, "full")
        assert sym.e0 == pytest.approx(full.e0, abs=1e-9)
        if n > 1:
            assert sym.e1 == pytest.approx(full.e1, abs=1e-9)
        if n > 1:
            norm = ground_state(model, "norm")
            assert grover_symmetric_ground(n, g, "norm").e0 == pytest.approx(norm.e0, abs=1e-9)


def test_symmetric_large_n():
    n, g = 200, 2.0
    assert grover_symmetric_ground(n, g, "cond").e0 == -400.0
    e_norm = grover_symmetric_ground(n, g, "norm").e0 / n
    assert abs(e_norm + 1) < 2.0 / n


def test_grover_delta0_v_shape():
    grid = np.round(np.arange(0.5, 1.51, 0.1), 10)
    d0 = [gap_report(ModelSpec("grover", 10, g=g), want_excited=False).delta0 for g in grid]
    i = int(np.argmin(d0))
    assert 0 < i < len(grid) - 1
    assert abs(grid[i] - 1.0) <= 0.1
    assert np.all(np.diff(d0[: i + 1]) < 0) and np.all(np.diff(d0[i:]) > 0)


def test_constant_potential_has_empty_norm():
    with pytest.raises(EmptySubspaceError):
        gap_report(ModelSpec("fermion-impurity", 6, 3, 0, g=1.0))
    with pytest.raises(EmptySubspaceError):
        ground_state(ModelSpec("fermion-impurity", 6, 3, 0, g=1.0), "norm")


def test_counter_example_delta1():
    n, g = 6, 2.0
    rep = gap_report(ModelSpec("counter-example", n, g=g))
    e_minus = -0.5 * (1 + g) - 0.5 * math.sqrt(1 + g * g)
    assert rep.e_cond / n == pytest.approx(-0.5 - g, abs=1e-12)
    assert rep.delta1 == pytest.approx(abs(n * (-0.5 - g) - n * e_minus), abs=1e-10)
    assert rep.solvers["E_cond"] == "closed-form"


VARIATIONAL_MODELS = [
    ModelSpec("grover", 8),
    ModelSpec("grover-modified", 8),
    ModelSpec("counter-example", 6),
    ModelSpec("ising-transverse", 8),
    ModelSpec("fermion-impurity", 10, 5, 2),
    ModelSpec("fermion-impurity-extensive", 10, 5),
    ModelSpec("fermion-attractive", 10, 5),
    ModelSpec("hardcore-boson-attractive", 10, 5, boundary="pbc"),
]


@pytest.mark.parametrize("model", VARIATIONAL_MODELS, ids=lambda m: m.label())
def test_variational_ordering(model):
    for g in (0.25, 1.0, 2.5):
        rep = gap_report(model.with_g(g))
        assert rep.e <= min(rep.e_cond, rep.e_norm) + 1e-12
        assert rep.delta >= 0


@pytest.mark.parametrize("model", VARIATIONAL_MODELS, ids=lambda m: m.label())
def test_restricted_energies_against_oracle(model):
    model = model.with_g(1.3)
    split = split_space(model)
    h = oracles.dense(model.family.value, model.n_sites, model.g, model.n_particles,
                      model.n_impurities, model.periodic)
    states = exact.subspace_states(model, SubspaceSelector("full"))
    cond = split.cond_mask(states)
    for mode, keep in (("full", np.ones_like(cond)), ("cond", cond), ("norm", ~cond)):
        ref = oracles.restricted_lowest(h, keep)
        got = ground_state(model, SubspaceSelector(mode, split)).e0
        assert got == pytest.approx(ref, abs=1e-10 * max(1, abs(ref)))


@pytest.mark.parametrize(
    "model",
    [ModelSpec("ising-transverse", 10, g=0.8), ModelSpec("fermion-attractive", 12, 5, g=1.5),
     ModelSpec("fermion-impurity", 12, 6, 3, boundary="pbc", g=2.0), ModelSpec("grover", 10, g=1.0)],
    ids=lambda m: m.label(),
)
def test_lanczos_matches_dense(model):
    for mode in ("full", "norm"):
        states = exact.subspace_states(model, exact.selector(model, mode))
        h = exact.hamiltonian_matrix(model, states)
        assert h.shape[0] <= 2000 or mode == "full"
        d = solve_matrix(h, True, "dense")
        lz = solve_matrix(h, True, "lanczos")
        assert lz.e0 == pytest.approx(d.e0, abs=1e-10 * abs(d.e0))
        assert lz.e1 == pytest.approx(d.e1, abs=1e-8 * abs(d.e0))
        assert lz.solver == "lanczos" and d.solver == "dense"


def test_lanczos_reports_non_convergence():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(400, 400))
    h = a + a.T
    with pytest.raises(ConvergenceError):
        lanczos_lowest(lambda x: h @ x, 400, max_iter=5, krylov_dim=4)


def test_solver_limits():
    with pytest.raises(EmptySubspaceError):
        solve_matrix(scipy.sparse.csr_matrix((0, 0)))
    with pytest.raises(CapabilityError):
        solve_matrix(scipy.sparse.identity(4097, format="csr"), solver="dense")


def test_auto_solver_choice():
    small = ground_state(ModelSpec("grover", 6, g=1.0))
    big = ground_state(ModelSpec("grover", 12, g=1.0))
    assert small.solver == "dense" and big.solver == "lanczos"
    assert small.dim == 64 and big.dim == 4096


def test_grover_energy_non_increasing_in_g():
    grid = np.linspace(0, 3, 31)
    e = [grover_symmetric_ground(9, g).e0 for g in grid]
    assert np.all(np.diff(e) <= 1e-12)
    e_ed = [ground_state(ModelSpec("grover", 7, g=g)).e0 for g in grid[::3]]
    assert np.all(np.diff(e_ed) <= 1e-12)


def test_gap_report_symmetric_path():
    rep = gap_report(ModelSpec("grover", 60, g=1.1), method="symmetric")
    assert rep.e_cond == pytest.approx(-66.0)
    assert rep.solvers["E"] == "symmetric-reduced"
    with pytest.raises(CapabilityError):
        gap_report(ModelSpec("ising-transverse", 6, g=1.0), method="symmetric")
