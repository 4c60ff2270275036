"""Pure vs compiled backend equivalence.

Simulation runs must agree bit for bit (same draw protocol on the same PCG64
stream); fluid solves agree to accumulation-order roundoff.
"""

import numpy as np
import pytest

from localmatch import backend, cm, fluid
from localmatch.criteria import CriterionKind
from localmatch.degrees import parse_model_spec, pmf_truncated
from localmatch.rng import RandomSource

pytestmark = pytest.mark.skipif(not backend.compiled_available(),
                                reason="compiled core not built")


def degree_vector(seed, n=600, top=6):
    dv = np.random.default_rng(seed).integers(0, top, n)
    if dv.sum() % 2:
        dv[np.nonzero(dv)[0][-1]] -= 1
    return dv


def test_raw_stream_matches_next_uint64():
    # the pure backend's u64 must be the same words the C core pulls
    src = RandomSource(321)
    direct = [src.u64() for _ in range(5)]
    again = RandomSource(321)
    assert direct == [int(again.bit_generator.random_raw()) for _ in range(5)]


@pytest.mark.parametrize("kind", list(CriterionKind))
def test_cm_runs_identical(kind):
    for seed in (1, 17, 999):
        dv = degree_vector(seed)
        grid = (0.0, 0.25, 0.6, 1.0)
        a = cm.run(dv, kind, RandomSource(seed), grid=grid, record_moments=True,
                   backend="pure")
        b = cm.run(dv, kind, RandomSource(seed), grid=grid, record_moments=True,
                   backend="compiled")
        assert (a.matched, a.isolated, a.blocked) == (b.matched, b.isolated, b.blocked)
        assert (a.selfloops, a.multiedges) == (b.selfloops, b.multiedges)
        assert np.array_equal(a.step_moments, b.step_moments)
        for ma, mb in zip(a.measures, b.measures):
            assert np.array_equal(ma.weights, mb.weights)


def test_cm_edge_recording_identical():
    dv = degree_vector(5, n=40)
    a = cm.run(dv, CriterionKind.GREEDY, RandomSource(2), record_edges=True,
               backend="pure")
    b = cm.run(dv, CriterionKind.GREEDY, RandomSource(2), record_edges=True,
               backend="compiled")
    assert cm.edge_key(a.edges) == cm.edge_key(b.edges)
    assert [tuple(map(int, p)) for p in b.matching] == a.matching


@pytest.mark.parametrize("kind", [CriterionKind.GREEDY, CriterionKind.UNI_MIN,
                                  CriterionKind.UNI_MAX])
def test_fluid_solutions_agree(kind):
    model = parse_model_spec("uniform:a=1,b=7")
    init = pmf_truncated(model, 7, 1e-12).weights
    a = fluid.solve(fluid.FluidSystem(kind=kind, initial=init), 1e-3, backend="pure")
    b = fluid.solve(fluid.FluidSystem(kind=kind, initial=init), 1e-3, backend="compiled")
    assert np.abs(a.states - b.states).max() < 1e-12
    assert abs(a.coverage - b.coverage) < 1e-12
    assert abs(a.t_halt - b.t_halt) < 1e-9


def test_poisson_scalar_agrees():
    a = fluid.solve_poisson_greedy(2.0, 1e-3, backend="pure")
    b = fluid.solve_poisson_greedy(2.0, 1e-3, backend="compiled")
    assert np.abs(a.v - b.v).max() < 1e-13
    assert abs(a.coverage - b.coverage) < 1e-13


def test_env_override(monkeypatch):
    monkeypatch.setenv("LOCALMATCH_BACKEND", "pure")
    assert backend.default_name() == "pure"
    monkeypatch.setenv("LOCALMATCH_BACKEND", "compiled")
    assert backend.default_name() == "compiled"
