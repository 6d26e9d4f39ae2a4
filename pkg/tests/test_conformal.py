"""Tests for the Weyl inversion, obstruction 1-form and operator identities.

The quantitative oracles here are geometric facts with independent closed
forms: conformally flat metrics have no Weyl tensor, an Einstein product
metric has vanishing Cotton tensor (so Z = 0 and both obstructions vanish),
and on a flat chart E0 reduces to the trace-free coordinate Hessian.
"""

import numpy as np
import pytest

from c2e.errors import StructuralError
from c2e.geometry import (curvature_pack, conformally_flat_chart, flat_chart,
                          perturbed_chart, s2xs2_chart)
from c2e.conformal import (E0, Ek, NO_SOLUTION, ONE_SOLUTION,
                           cotton_left_inverse, identity_suite,
                           obstruction_pack, weyl_inversion, zeta_eta)
from c2e.jets import jet_space_size
from c2e.tensors import TensorJet, pair_contract, scalar_to_jet, tensor_norm

ORDER = 4
METRIC_ORDER = 6


def _pack(chart, point):
    return curvature_pack(chart, np.asarray(point, dtype=float),
                          metric_order=METRIC_ORDER)


def _random_scalar_density(dim, order, rng, weight=1.0):
    comps = rng.uniform(-1.0, 1.0, jet_space_size(dim, order))
    return TensorJet(dim, order, "", comps, weight)


def test_conformally_flat_chart_is_not_generic():
    pack = _pack(conformally_flat_chart(), [0.1, -0.2, 0.3, 0.05])
    report = weyl_inversion(pack)
    assert not report.generic
    assert report.rank < 4
    with pytest.raises(StructuralError):
        obstruction_pack(pack, report)


def test_einstein_product_has_one_solution_verdict():
    pack = _pack(s2xs2_chart(), [0.2, -0.3, 0.1, 0.4])
    report = weyl_inversion(pack)
    assert report.generic and report.rank == 4
    ob = obstruction_pack(pack, report)
    assert ob.classification == ONE_SOLUTION
    # Cotton vanishes for this metric, hence Z = 0 and both obstructions too
    assert tensor_norm(ob.Z) < 1e-10
    assert ob.obstruction_norm < 1e-10


def test_generic_perturbed_chart_has_no_solution_verdict():
    pack = _pack(perturbed_chart(seed=7), [0.1, 0.05, -0.1, 0.2])
    report = weyl_inversion(pack)
    assert report.generic
    ob = obstruction_pack(pack, report)
    assert ob.classification == NO_SOLUTION
    assert ob.obstruction_norm > 1e-6


def test_zeta_eta_is_a_pointwise_dual_pair():
    pack = _pack(perturbed_chart(seed=7), [0.1, 0.05, -0.1, 0.2])
    ob = obstruction_pack(pack, weyl_inversion(pack))
    zeta, eta = zeta_eta(ob)
    order = zeta.order
    pairing = (pair_contract(zeta, ob.dZ.truncated(order), [(0, 0), (1, 1)]) +
               pair_contract(eta, ob.Phi.truncated(order), [(0, 0), (1, 1)]))
    unit = scalar_to_jet(pairing)
    want = np.zeros_like(unit.coeffs)
    want[0] = 1.0
    np.testing.assert_allclose(unit.coeffs, want, atol=1e-10)


def test_e0_on_flat_chart_is_trace_free_hessian():
    pack = _pack(flat_chart(), [0.0, 0.0, 0.0, 0.0])
    # sigma = x0^2 as a jet: Hessian 2 e_0 x e_0, trace 2, dim 4
    comps = np.zeros(jet_space_size(4, ORDER))
    from c2e.jets import multi_indices
    idx = list(multi_indices(4, ORDER))
    comps[idx.index((2, 0, 0, 0))] = 1.0
    sigma = TensorJet(4, ORDER, "", comps, 1.0)
    out = E0(sigma, pack)
    want = np.diag([1.5, -0.5, -0.5, -0.5])
    np.testing.assert_allclose(out.values, want, atol=1e-12)


def test_ek_rejects_bad_rank_and_non_hook_input():
    pack = _pack(perturbed_chart(seed=3), [0.1, 0.0, 0.0, 0.1])
    rng = np.random.default_rng(0)
    sigma = _random_scalar_density(4, ORDER, rng)
    tau = E0(sigma, pack)
    with pytest.raises(StructuralError):
        Ek(0, tau, pack)
    with pytest.raises(StructuralError):
        Ek(3, tau, pack)
    raw = TensorJet(4, ORDER, "dd",
                    rng.uniform(-1, 1, (4, 4, jet_space_size(4, ORDER))), 1.0)
    with pytest.raises(StructuralError):
        Ek(1, raw, pack)


def test_cotton_left_inverse_recovers_scalar_in_three_dimensions():
    chart = perturbed_chart(seed=5, dim=3)
    pack = _pack(chart, [0.1, -0.05, 0.2])
    rng = np.random.default_rng(1)
    sigma = _random_scalar_density(3, ORDER, rng)
    comp = Ek(1, E0(sigma, pack), pack)
    zeta = cotton_left_inverse(pack)
    order = min(zeta.order, comp.order)
    got = scalar_to_jet(pair_contract(zeta.truncated(order),
                                      comp.truncated(order),
                                      [(0, 0), (1, 1), (2, 2)]))
    np.testing.assert_allclose(got.coeffs, sigma.truncated(order).comps,
                               atol=1e-9)


def test_identity_suite_passes_on_generic_chart():
    report = identity_suite(perturbed_chart(seed=7),
                            points=[[0.1, 0.05, -0.1, 0.2]],
                            order=ORDER, trials=1)
    assert report["passed"]
    assert report["max_residual"] < report["tol"]
    assert report["identities"]


def test_identity_suite_passes_on_einstein_product():
    report = identity_suite(s2xs2_chart(), points=[[0.2, -0.3, 0.1, 0.4]],
                            order=ORDER, trials=1)
    assert report["passed"]
