"""Tests for the projective-connection analogue of the machinery.

Independent oracles: a Ricci-flat metric has projective Weyl tensor equal to
its Riemann tensor, the projective Weyl tensor is trace-free in all three
contractions by construction, and the Schwarzschild exterior is generic for
the projective inversion at every sample point.
"""

import numpy as np
import pytest

from c2e.errors import StructuralError
from c2e.geometry import perturbed_chart, schwarzschild_chart
from c2e.homology import check_complex, check_equivalence
from c2e.projective import (ProjectiveChart, build_onesol_proj_complex,
                            projective_pack, projective_suite,
                            projective_weyl_inversion)
from c2e.tensors import PROJECTIVE, pair_contract, tensor_norm

SCHW_POINT = np.array([0.0, 5.0, 1.2, 2.0])


@pytest.fixture(scope="module")
def schw_pack():
    return projective_pack(ProjectiveChart.from_metric(schwarzschild_chart()),
                           SCHW_POINT)


def test_ricci_flat_projective_weyl_equals_riemann(schw_pack):
    riem = schw_pack.chart.base  # sanity: chart wiring
    assert riem.name == "schwarzschild"
    from c2e.geometry import curvature_pack
    cp = curvature_pack(schwarzschild_chart(), SCHW_POINT)
    diff = schw_pack.W.comps - cp.riemann.comps
    assert np.max(np.abs(diff)) < 1e-12 * (1.0 + tensor_norm(cp.riemann))


def test_projective_weyl_is_totally_trace_free():
    pchart = ProjectiveChart.from_metric(perturbed_chart(seed=3))
    pack = projective_pack(pchart, np.array([0.1, 0.05, -0.1, 0.2]))
    W = pack.W  # valence (d, d, u, d)
    for pattern in ("abaez->bez", "abbez->aez", "abccz->abz"):
        tr = np.einsum(pattern, W.comps)
        assert np.max(np.abs(tr)) < 1e-12


def test_projective_inversion_gives_left_inverse(schw_pack):
    report = projective_weyl_inversion(schw_pack)
    assert report.generic and report.rank == 4
    assert report.method == "least-squares"
    wbar = report.wbar
    assert wbar.flavor == PROJECTIVE
    # contract Wbar[r,s,t,a] against W[r,s,.,t] -> delta_a^c
    got = pair_contract(wbar,
                        schw_pack.W.move_slot(2, 3), [(0, 0), (1, 1), (2, 2)])
    expect = np.zeros_like(got.comps)
    expect[np.arange(4), np.arange(4), 0] = 1.0
    np.testing.assert_allclose(got.comps, expect, atol=1e-10)


def test_representative_rescaling_shifts_the_connection():
    from c2e.geometry import ConformalScale
    pchart = ProjectiveChart.from_metric(schwarzschild_chart())
    pot = ConformalScale.polynomial(4, seed=2)
    shifted = pchart.rescaled(pot)
    g0 = projective_pack(pchart, SCHW_POINT).gamma
    g1 = projective_pack(shifted, SCHW_POINT).gamma
    ups = shifted.upsilon(SCHW_POINT, g0.order)
    eye = np.eye(4)
    want = (np.einsum("ca,bz->cabz", eye, ups.comps)
            + np.einsum("cb,az->cabz", eye, ups.comps))
    np.testing.assert_allclose(g1.comps - g0.comps, want, atol=1e-10)


def test_projective_identity_suite_on_schwarzschild():
    pchart = ProjectiveChart.from_metric(schwarzschild_chart())
    rep = projective_suite(pchart, points=[SCHW_POINT], trials=1)
    assert rep["passed"], rep
    assert rep["max_residual"] < rep["tol"]


def test_projective_identity_suite_on_generic_chart():
    pchart = ProjectiveChart.from_metric(perturbed_chart(seed=3))
    rep = projective_suite(pchart, points=[[0.1, 0.05, -0.1, 0.2]], trials=1)
    assert rep["passed"], rep


def test_projective_complex_and_equivalence_on_schwarzschild():
    pchart = ProjectiveChart.from_metric(schwarzschild_chart())
    top, equiv = build_onesol_proj_complex(pchart)
    pts = [SCHW_POINT]
    assert check_complex(top, points=pts, trials=1, tol=1e-6).passed
    assert check_equivalence(equiv, points=pts, trials=1, tol=1e-6).passed


def test_two_dimensional_chart_takes_the_low_dim_route():
    pchart = ProjectiveChart.from_metric(perturbed_chart(seed=4, dim=2))
    top, equiv = build_onesol_proj_complex(pchart)
    pts = [[0.1, -0.05]]
    assert top.name.startswith("lowdim-proj:")
    assert check_complex(top, points=pts, trials=1, tol=1e-7).passed
    assert check_equivalence(equiv, points=pts, trials=1, tol=1e-7).passed


def test_point_dimension_mismatch_is_rejected():
    pchart = ProjectiveChart.from_metric(schwarzschild_chart())
    with pytest.raises(StructuralError):
        projective_pack(pchart, np.zeros(3))
