import math

import numpy as np
import pytest

from rodwave import thresholds as thr
from rodwave.fem import Mesh1D


def test_well_constants_closed_forms():
    a1, d = thr.well_constants(1.0, 4.0)
    assert a1 == pytest.approx(1.0, abs=1e-15)
    assert d == pytest.approx(0.25, abs=1e-15)

    a1, d = thr.well_constants(1.0, 6.0)
    assert a1 == pytest.approx(1.0, abs=1e-15)
    assert d == pytest.approx(1.0 / 3.0, abs=1e-15)

    a1, d = thr.well_constants(2.0, 4.0)
    assert a1 == pytest.approx(0.25, abs=1e-15)
    assert d == pytest.approx(0.25 * 0.0625, abs=1e-15)


def test_well_constants_rejects_bad_inputs():
    with pytest.raises(ValueError):
        thr.well_constants(0.0, 4.0)
    with pytest.raises(ValueError):
        thr.well_constants(1.0, 2.0)


def test_well_function_peak_equals_depth():
    rng = np.random.default_rng(13)
    for _ in range(20):
        B = float(rng.uniform(0.3, 2.5))
        p = float(rng.uniform(2.5, 6.0))
        a1, d = thr.well_constants(B, p)
        assert abs(thr.well_function(a1, B, p) - d) <= 1e-12


def test_alpha2_closed_form_root():
    res = thr.alpha2(0.0, 1.0, 4.0)
    assert res.value == pytest.approx(math.sqrt(2.0), abs=1e-10)
    assert not res.at_boundary


def test_alpha2_residual_substitution():
    res = thr.alpha2(0.1, 1.0, 4.0)
    assert abs(thr.well_function(res.value, 1.0, 4.0) - 0.1) <= 1e-10
    assert res.value > 1.0


def test_alpha2_boundary_case_degenerates_to_alpha1():
    a1, d = thr.well_constants(1.0, 4.0)
    res = thr.alpha2(d, 1.0, 4.0)
    assert res.at_boundary
    assert res.value == pytest.approx(a1, abs=1e-12)


def test_alpha2_rejects_energy_above_depth():
    with pytest.raises(thr.HypothesisNotMet):
        thr.alpha2(0.3, 1.0, 4.0)   # d = 0.25


def test_alpha2_random_levels_consistent():
    rng = np.random.default_rng(21)
    for _ in range(25):
        B = float(rng.uniform(0.4, 1.8))
        p = float(rng.uniform(2.3, 5.5))
        _, d = thr.well_constants(B, p)
        E0 = float(rng.uniform(-0.5, 0.999)) * d
        res = thr.alpha2(E0, B, p)
        assert res.value >= thr.well_constants(B, p)[0]
        scale = max(1.0, abs(E0), abs(d))
        assert abs(thr.well_function(res.value, B, p) - E0) <= 1e-10 * scale


def test_embedding_p2_reference_eigenvalue():
    # left end clamped, free right end: first eigenvalue (pi/2)^2, B = 2/pi
    B = thr.embedding_constant(2.0, Mesh1D.uniform(256), space="H1_Gamma0")
    assert B == pytest.approx(2.0 / math.pi, abs=1e-3)


def test_embedding_bounded_by_one_on_trace_space():
    # |u(x)| = |int_0^x u'| <= ||u'||_2 on (0,1)
    mesh = Mesh1D.uniform(96)
    for p in (2.5, 3.0, 4.0, 6.0):
        B = thr.embedding_constant(p, mesh, space="H1_Gamma0", n_restarts=4)
        assert B <= 1.0 + 1e-6


def test_embedding_p4_against_fine_grid_oracle():
    coarse = thr.embedding_constant(4.0, Mesh1D.uniform(128), space="H01",
                                    n_restarts=4)
    fine = thr.embedding_constant(4.0, Mesh1D.uniform(1280), space="H01",
                                  n_restarts=4)
    assert abs(coarse - fine) / fine <= 1e-4


def test_embedding_monotone_under_refinement():
    vals = [thr.embedding_constant(4.0, Mesh1D.uniform(n), space="H1_Gamma0",
                                   n_restarts=4)
            for n in (16, 32, 64, 128)]
    for lo, hi in zip(vals, vals[1:]):
        assert hi >= lo - 1e-10


def test_embedding_deterministic_for_fixed_seed():
    mesh = Mesh1D.uniform(64)
    a = thr.embedding_constant(4.0, mesh, space="H1_Gamma0", seed=3)
    b = thr.embedding_constant(4.0, mesh, space="H1_Gamma0", seed=3)
    assert a == b


def test_compute_thresholds_identities():
    constants = thr.compute_thresholds(4.0, Mesh1D.uniform(128),
                                       space="H1_Gamma0")
    assert abs(constants.alpha1 - constants.B ** (-4.0 / 2.0)) <= 1e-12
    assert abs(constants.d - 0.25 * constants.alpha1 ** 2) <= 1e-12
    assert abs(thr.well_function(constants.alpha1, constants.B, 4.0)
               - constants.d) <= 1e-12
    assert constants.provenance["mesh_n"] == 128


def test_compute_thresholds_attaches_alpha2():
    constants = thr.compute_thresholds(4.0, Mesh1D.uniform(64),
                                       space="H1_Gamma0", E0=0.1)
    assert constants.alpha2_at is not None
    assert constants.alpha2_at.value > constants.alpha1


def test_compute_thresholds_rejects_small_p():
    with pytest.raises(ValueError):
        thr.compute_thresholds(2.0, Mesh1D.uniform(16))


def test_unknown_space_rejected():
    with pytest.raises(ValueError, match="unknown space"):
        thr.embedding_constant(4.0, Mesh1D.uniform(16), space="H2")
