"""Tests for double-null frames, curvature scalars and the Petrov filtration.

Oracles: the scalar/tensor round trip must be the identity, the quadratic
invariant has the closed form 16 Re(Psi0 Psi4 - 4 Psi1 Psi3 + 3 Psi2^2),
boost and spin rotations act on the scalars with known weights, and the
static spherically symmetric vacuum chart has Psi2 = -M / r^3.
"""

import numpy as np
import pytest

from c2e.errors import StructuralError
from c2e.geometry import curvature_pack, schwarzschild_chart
from c2e.nullframes import (NPScalars, PETROV_TYPES, canonical_frame,
                            check_weyl_symmetries, cubic_invariants,
                            frame_from_orthonormal, frame_metric,
                            genericity_rank, hook_basis, make_frame,
                            np_quadratic, np_scalars, petrov_classify,
                            quadratic_invariant, reconstruct_weyl,
                            weyl_map_matrix)


def _random_scalars(rng):
    vals = rng.uniform(-1, 1, 10)
    return NPScalars.from_sequence(vals[:5] + 1j * vals[5:])


def test_canonical_frame_satisfies_product_relations():
    f = canonical_frame()
    assert f.product(f.l, f.n) == pytest.approx(1.0)
    assert f.product(f.m, f.mbar) == pytest.approx(-1.0)
    assert abs(f.product(f.l, f.l)) < 1e-14
    np.testing.assert_allclose(frame_metric(f), f.g, atol=1e-12)


def test_make_frame_reconstructs_metric_from_vectors():
    f0 = canonical_frame()
    f = make_frame(f0.l, f0.n, f0.m)
    np.testing.assert_allclose(f.g, f0.g, atol=1e-12)


def test_make_frame_rejects_bad_products():
    f0 = canonical_frame()
    with pytest.raises(StructuralError):
        make_frame(2.0 * f0.l, f0.n, f0.m, g=f0.g)


def test_scalar_tensor_round_trip_is_identity():
    rng = np.random.default_rng(0)
    f = canonical_frame()
    for _ in range(25):
        psi = _random_scalars(rng)
        W = reconstruct_weyl(psi, f)
        check_weyl_symmetries(W, f.ginv)
        back = np_scalars(W, f)
        for a, b in zip(back.as_tuple(), psi.as_tuple()):
            assert abs(a - b) < 1e-10


def test_boost_and_rotation_act_with_known_weights():
    rng = np.random.default_rng(1)
    psi = _random_scalars(rng)
    f = canonical_frame()
    W = reconstruct_weyl(psi, f)
    lam, theta = 1.7, 0.6
    boosted = np_scalars(W, f.boost(lam))
    rotated = np_scalars(W, f.rotate(theta))
    for k, (pb, pr) in enumerate(zip(boosted.as_tuple(), rotated.as_tuple())):
        want_b = psi.as_tuple()[k] * lam ** (2 - k)
        want_r = psi.as_tuple()[k] * np.exp(1j * theta * (2 - k))
        assert abs(pb - want_b) < 1e-10
        assert abs(pr - want_r) < 1e-10


def test_quadratic_invariant_matches_scalar_formula():
    rng = np.random.default_rng(2)
    f = canonical_frame()
    for _ in range(10):
        psi = _random_scalars(rng)
        W = reconstruct_weyl(psi, f)
        assert quadratic_invariant(W, f) == pytest.approx(np_quadratic(psi),
                                                          abs=1e-10)


def test_quadratic_invariant_of_unit_psi2_is_48():
    f = canonical_frame()
    psi = NPScalars(0, 0, 1.0, 0, 0)
    W = reconstruct_weyl(psi, f)
    assert quadratic_invariant(W, f) == pytest.approx(48.0, abs=1e-10)


def test_petrov_filtration_levels():
    cases = {
        (1, 1, 1, 1, 1): "G",
        (0, 1, 1, 1, 1): "I",
        (0, 0, 1, 1, 1): "II",
        (0, 0, 0, 1, 1): "III",
        (0, 0, 0, 0, 1): "N",
        (0, 0, 0, 0, 0): "O",
    }
    for vals, want in cases.items():
        assert petrov_classify(NPScalars.from_sequence(vals)) == want
        assert want in PETROV_TYPES


def test_null_cubic_map_is_pure_trace():
    f = canonical_frame()
    for vals in [(0, 0, 0, 1.0 + 0.5j, 0), (0, 0, 0, 0, 2.0 - 1j),
                 (0, 0, 0, 0.7, 1.3j)]:
        psi = NPScalars.from_sequence(vals)
        W = reconstruct_weyl(psi, f)
        assert abs(np_quadratic(psi)) < 1e-12
        cub = cubic_invariants(W, f)
        pure = cub["trace"] / 4.0 * np.eye(4)
        assert np.abs(cub["V3"] - pure).max() < 1e-10


def test_hook_basis_spans_sixteen_independent_directions():
    f = canonical_frame()
    basis = hook_basis(f)
    assert len(basis) == 16
    mat = np.stack([h.reshape(-1) for h in basis])
    assert np.linalg.matrix_rank(mat) == 16


def test_contraction_matrix_rank_separates_types_three_and_n():
    f = canonical_frame()
    w3 = reconstruct_weyl(NPScalars(0, 0, 0, 1.0, 0.3), f)
    wn = reconstruct_weyl(NPScalars(0, 0, 0, 0, 1.0), f)
    assert genericity_rank(w3, f) == 4
    assert genericity_rank(wn, f) < 4
    assert weyl_map_matrix(w3, f).shape == (16, 4)


def test_scalars_from_sequence_validates_length():
    with pytest.raises(StructuralError):
        NPScalars.from_sequence([1, 2, 3])


def test_static_vacuum_chart_has_psi2_minus_m_over_r_cubed():
    mass, point = 1.0, np.array([0.0, 5.0, 1.2, 2.0])
    pack = curvature_pack(schwarzschild_chart(mass), point)
    g0 = pack.g.values
    basis = np.eye(4) / np.sqrt(np.abs(np.diag(g0)))
    f = frame_from_orthonormal(basis, g0)
    psi = np_scalars(pack.W.values, f)
    assert psi.psi2 == pytest.approx(-mass / point[1] ** 3, abs=1e-12)
