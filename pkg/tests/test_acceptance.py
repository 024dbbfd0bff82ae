"""Acceptance criteria 1 to 10, one PASS/FAIL line each.

Tolerances are the published ones; a red line here is a real shortfall
and is analysed in the decisions ledger rather than relaxed.
"""
import math
import os
import time

import numpy as np
import pytest

from condqpt import quadratic
from condqpt.analysis import (
    coexistence_analytic,
    cross_block_coupling,
    locate_critical,
    mixing_lower_bound,
    specular_split,
    sweep,
)
from condqpt.basis import split_space
from condqpt.exact import gap_report, ground_state, grover_symmetric_ground
from condqpt.models import ModelSpec, closed_form_e_cond
from condqpt.qmc import McConfig, run_projector_mc, table_defaults
from condqpt.qmc import _kernel_py


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}", flush=True)
        assert ok, detail
    return emit


def test_criterion_1_grover_crossing(report):
    t0 = time.perf_counter()
    worst = 0.0
    for g in np.round(np.arange(0.0, 2.001, 0.05), 10):
        if 0.9 <= g <= 1.1:
            continue
        e = grover_symmetric_ground(200, g).e0 / 200
        worst = max(worst, abs(e - (-1.0 if g < 0.9 else -g)))
    rows = sweep(ModelSpec("grover", 12), np.round(np.arange(0.5, 1.501, 0.1), 10), "ed", want_gap=False)
    g_c = locate_critical(rows, "delta0").g_c
    elapsed = time.perf_counter() - t0
    ok = worst < 0.02 and g_c is not None and abs(g_c - 1.0) <= 0.15 and elapsed < 60
    report(1, ok, f"N=200 max |E/N - limit| = {worst:.3g} (< 0.02); N=12 g_c = {g_c:.4f} (1.0 +- 0.15); "
                  f"{elapsed:.1f} s (< 60 s)")


def test_criterion_2_grover_norm_independent(report):
    a = ground_state(ModelSpec("grover", 10, g=0.5), "norm").e0
    b = ground_state(ModelSpec("grover", 10, g=5.0), "norm").e0
    report(2, abs(a - b) < 1e-10, f"|E_norm(0.5) - E_norm(5)| = {abs(a - b):.3g} (< 1e-10)")


def test_criterion_3_impurity_quadratic(report):
    t0 = time.perf_counter()
    grid = np.round(np.arange(1.0, 6.001, 0.05), 10)
    found = {}
    for n_imp, boundary in ((128, "obc"), (256, "obc"), (256, "pbc")):
        rows = sweep(ModelSpec("fermion-impurity", 512, 256, n_imp, boundary), grid, "quadratic", want_gap=False)
        found[(n_imp, boundary)] = locate_critical(rows, "delta1").g_c
    elapsed = time.perf_counter() - t0
    target = {128: 3.0, 256: 4.0}
    ok = all(g is not None and abs(g - target[k[0]]) <= 0.25 for k, g in found.items()) and elapsed < 300
    text = ", ".join(f"N_imp={k[0]} {k[1]}: {g:.3f}" for k, g in found.items())
    report(3, ok, f"{text} (3.0 / 4.0 +- 0.25); {elapsed:.1f} s (< 300 s)")


def test_criterion_4_quadratic_vs_ed(report):
    worst = 0.0
    for n_imp in (1, 2, 4):
        for g in (0.0, 1.0, 3.0, 6.0):
            ed = ground_state(ModelSpec("fermion-impurity", 8, 4, n_imp, g=g)).e0
            worst = max(worst, abs(quadratic.many_body_ground(8, 4, n_imp, g).energy - ed))
    report(4, worst < 1e-9, f"max |E_quadratic - E_ED| = {worst:.3g} (< 1e-9)")


def test_criterion_5_attractive(report):
    # condensed energy: closed form and restricted ED
    cond_ok = True
    for g in (0.5, 1.0, 2.0, 3.0):
        model = ModelSpec("fermion-attractive", 12, 6, g=g)
        cond_ok &= closed_form_e_cond(model) / 6 == -g * 5 / 6
        cond_ok &= abs(ground_state(model, "cond").e0 - closed_form_e_cond(model)) <= 1e-12 * 6 * g
    rows = sweep(ModelSpec("fermion-attractive", 12, 6), np.round(np.arange(1.0, 3.001, 0.1), 10),
                 "ed", want_gap=False)
    g_ed = locate_critical(rows, "delta1").g_c

    model = ModelSpec("fermion-attractive", 32, 16)
    mc = table_defaults(model.family, 32, workers=os.cpu_count() or 1)
    t0 = time.perf_counter()
    qrows = sweep(model, [1.2, 1.6, 2.0, 2.4, 2.8],
                  {"full": "qmc", "cond": "closed-form", "norm": "none"}, mc, want_gap=False)
    elapsed = time.perf_counter() - t0
    g_mc = locate_critical(qrows, "delta1").g_c
    d1 = ", ".join(f"{r.g:g}:{r.delta1:.3f}+-{r.mc_stderr:.3f}" for r in qrows)
    ok = (cond_ok and g_ed is not None and abs(g_ed - 2.0) <= 0.3
          and g_mc is not None and abs(g_mc - 2.0) <= 0.4 and elapsed < 1800)
    report(5, ok, f"E_cond exact: {cond_ok}; ED N=12 g_c = {g_ed} (2.0 +- 0.3); "
                  f"QMC N=32 (dt={mc.dt:g}, R={mc.blocks}, walkers={mc.walkers}) g_c = {g_mc} (2.0 +- 0.4), "
                  f"Delta1 {d1}; QMC {elapsed:.0f} s (< 1800 s)")


def test_criterion_6_ising_no_crossing(report):
    at_one = quadratic.pfeuty_epsilon(1.0)
    grid = np.round(np.arange(0.0, 5.001, 0.05), 10)
    below = all(quadratic.pfeuty_epsilon(g) < -g for g in grid)
    rows = sweep(ModelSpec("ising-transverse", 8), grid, "closed-form")
    verdict = locate_critical(rows, "delta1").verdict
    analytic = coexistence_analytic("ising-transverse").verdict
    ok = abs(at_one + 4 / math.pi) < 1e-8 and below and verdict == analytic == "no-crossing"
    report(6, ok, f"eps(1) + 4/pi = {at_one + 4 / math.pi:.2g}; eps < -g on grid: {below}; "
                  f"locator: {verdict}; coexistence: {analytic}")


def test_criterion_7_counter_example(report):
    worst, below = 0.0, True
    for n in (2, 4, 6):
        for g in (0.5, 1.0, 2.0):
            rep = specular_split("counter-example", g, n)
            e = ground_state(ModelSpec("counter-example", n, g=g)).e0 / n
            worst = max(worst, abs(e - rep.e_exact))
            below &= rep.e_exact < rep.restricted_min
    report(7, worst < 1e-12 and below, f"max |E/N - E_-/N| = {worst:.3g} (< 1e-12); "
                                       f"E_-/N below all four restricted energies: {below}")


def test_criterion_8_modified_grover(report):
    n = 12
    worst, at = 0.0, None
    for g in np.round(np.arange(0.0, 2.001, 0.1), 10):
        e = ground_state(ModelSpec("grover-modified", n, g=g)).e0 / n
        dev = abs(e - (-1.0 - g + 3.0 / n))
        if dev > worst:
            worst, at = dev, g
    never = all(specular_split("grover-modified", g).e_norm_primed < specular_split("grover-modified", g).e_cond_primed
                for g in np.linspace(0.05, 2.0, 40))
    report(8, worst < 0.1 and never, f"max |E/N - (-1 - g + 3/N)| = {worst:.3f} at g={at:g} (< 0.1); "
                                     f"primed energies never cross: {never}")


# stoquastic models with M <= 100, including one restricted run
QMC_SUITE = [
    (ModelSpec("grover", 6, g=1.0), "full"),
    (ModelSpec("grover-modified", 6, g=0.5), "full"),
    (ModelSpec("ising-transverse", 6, g=1.0), "full"),
    (ModelSpec("fermion-impurity", 8, 4, 2, g=1.0), "norm"),
    (ModelSpec("fermion-impurity", 8, 4, 2, g=3.0), "full"),
    (ModelSpec("fermion-impurity-extensive", 8, 4, g=0.5), "full"),
    (ModelSpec("fermion-attractive", 8, 4, g=2.0), "full"),
    (ModelSpec("fermion-attractive", 7, 3, boundary="pbc", g=1.0), "full"),
    (ModelSpec("hardcore-boson-attractive", 8, 4, boundary="pbc", g=1.0), "full"),
]
SUITE_MC = dict(walkers=2048, dt=0.5, blocks=256, bin_size=16)


def _records(est):
    return [(r.block, r.log_wbar, r.jumps, r.energy) for r in est.trace]


def test_criterion_9_qmc_correctness(report, monkeypatch):
    coverage = {}
    for model, restriction in QMC_SUITE:
        split = split_space(model)
        assert split.m_total <= 100
        exact = ground_state(model, restriction).e0
        inside = 0
        for seed in range(100):
            est = run_projector_mc(model, split, McConfig(**SUITE_MC, seed=1000 + seed, restriction=restriction))
            # zero-variance runs are exact to rounding
            inside += abs(est.energy - exact) <= 3 * est.std_error + 1e-9 * abs(exact)
        coverage[model.label() + ("" if restriction == "full" else f"[{restriction}]")] = inside

    # the move generator sees every configuration a walker occupies
    visited_cond = []
    real_moves = _kernel_py._moves
    norm_models = [m for m, _ in QMC_SUITE if split_space(m).m_cond < split_space(m).m_total]
    for model in norm_models:
        split = split_space(model)

        def spy(c, params, split=split):
            visited_cond.append(bool(split.cond_mask(c).any()))
            return real_moves(c, params)

        monkeypatch.setattr(_kernel_py, "_moves", spy)
        run_projector_mc(model, split, McConfig(walkers=128, dt=2.0, blocks=8, restriction="norm",
                                                backend="python", seed=4))
        monkeypatch.setattr(_kernel_py, "_moves", real_moves)
    never_cond = len(visited_cond) > 0 and not any(visited_cond)

    identical = True
    for model, restriction in QMC_SUITE:
        runs = [_records(run_projector_mc(model, None, McConfig(walkers=300, dt=1.0, blocks=6, seed=21,
                                                                restriction=restriction, workers=w)))
                for w in (1, 2, 8)]
        identical &= runs[0] == runs[1] == runs[2]

    ok = min(coverage.values()) >= 95 and never_cond and identical
    text = ", ".join(f"{k} {v}" for k, v in coverage.items())
    report(9, ok, f"inside 3 sigma per 100 seeds: {text} (>= 95); norm never in F_cond: {never_cond} "
                  f"({len(visited_cond)} steps checked); 1/2/8 workers identical: {identical}")


def test_criterion_10_bounds(report):
    worst_b = max(abs(abs(cross_block_coupling(ModelSpec("grover", n, g=1.0)).b_value) / n - 1 / math.sqrt(n))
                  for n in range(1, 11))
    mixing = all(mixing_lower_bound(e, e, b) == e + b
                 for e in (-2.5, -1.0, 0.0, 0.75) for b in (0.0, -0.1, -1.0, -3.5))
    ordered, runs = True, 0
    grid = (0.0, 0.5, 1.0, 2.0, 3.5)
    for model in (ModelSpec("grover", 8), ModelSpec("grover-modified", 8), ModelSpec("counter-example", 6),
                  ModelSpec("ising-transverse", 8), ModelSpec("fermion-impurity", 10, 5, 2),
                  ModelSpec("fermion-impurity-extensive", 10, 5), ModelSpec("fermion-attractive", 10, 5),
                  ModelSpec("hardcore-boson-attractive", 10, 5, boundary="pbc")):
        for g in grid:
            rep = gap_report(model.with_g(g), want_excited=False)
            ordered &= rep.e <= min(rep.e_cond, rep.e_norm) + 1e-12 * max(1.0, abs(rep.e))
            runs += 1
    ok = worst_b < 1e-10 and mixing and ordered
    report(10, ok, f"max ||B|/N - 1/sqrt(N)| = {worst_b:.2g} (< 1e-10); mixing(e, e, beta) = e + beta: {mixing}; "
                   f"E <= min(E_cond, E_norm) in {runs} runs: {ordered}")
