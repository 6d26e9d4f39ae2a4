"""Tensor-jet algebra: contraction oracles and symmetry projections."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from c2e.errors import StructuralError
from c2e.jets import jet_space_size
from c2e.tensors import (TensorJet, tensor_product, pair_contract, contract,
                         symmetrize, antisymmetrize, alternate_all, trace,
                         trace_free_part, raise_index, lower_index,
                         cartan_project, sym_product, kn_product,
                         wedge_product, ShapeSpec, random_section,
                         tensor_norm, CONFORMAL, PROJECTIVE)


DIM, ORDER = 4, 3


def rand_tj(valence, rng, dim=DIM, order=ORDER, weight=0.0, flavor=CONFORMAL):
    shape = (dim,) * len(valence) + (jet_space_size(dim, order),)
    return TensorJet(dim, order, valence, rng.uniform(-1, 1, shape),
                     weight, flavor)


class FlatPack:
    """Constant-metric stub so that metric operations have an oracle."""

    def __init__(self, g0, order=ORDER):
        dim = g0.shape[0]
        self.dim = dim
        self.g = TensorJet.from_constant(g0, dim, order, "dd", weight=2.0)
        self.ginv = TensorJet.from_constant(np.linalg.inv(g0), dim, order,
                                            "uu", weight=-2.0)


@pytest.fixture
def pack():
    rng = np.random.default_rng(7)
    a = rng.uniform(-1, 1, (DIM, DIM))
    return FlatPack(a @ a.T + DIM * np.eye(DIM))


def test_pair_contract_matches_einsum_on_values():
    rng = np.random.default_rng(0)
    a, b = rand_tj("ud", rng), rand_tj("du", rng)
    out = pair_contract(a, b, [(0, 0)])
    want = np.einsum("ab,ac->bc", a.values, b.values)
    np.testing.assert_allclose(out.values, want, atol=1e-12)


def test_pair_contract_requires_opposite_variance():
    rng = np.random.default_rng(0)
    a, b = rand_tj("d", rng), rand_tj("d", rng)
    with pytest.raises(StructuralError):
        pair_contract(a, b, [(0, 0)])


def test_tensor_product_values_and_weights():
    rng = np.random.default_rng(1)
    a = rand_tj("d", rng, weight=1.0)
    b = rand_tj("u", rng, weight=-2.0)
    out = tensor_product(a, b)
    assert out.valence == "du" and out.weight == -1.0
    np.testing.assert_allclose(out.values, np.outer(a.values, b.values),
                               atol=1e-12)


def test_contract_is_kronecker_trace():
    rng = np.random.default_rng(2)
    t = rand_tj("udd", rng)
    out = contract(t, 0, 2)
    np.testing.assert_allclose(out.values, np.einsum("aba->b", t.values),
                               atol=1e-12)


def test_addition_enforces_weight_and_valence():
    rng = np.random.default_rng(3)
    a = rand_tj("dd", rng, weight=2.0)
    with pytest.raises(StructuralError):
        a + rand_tj("dd", rng, weight=0.0)
    with pytest.raises(StructuralError):
        a + rand_tj("du", rng, weight=2.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_symmetrize_projectors_idempotent(seed):
    rng = np.random.default_rng(seed)
    t = rand_tj("ddd", rng, order=2)
    s, a = symmetrize(t), antisymmetrize(t)
    np.testing.assert_allclose(symmetrize(s).comps, s.comps, atol=1e-12)
    np.testing.assert_allclose(antisymmetrize(a).comps, a.comps, atol=1e-12)
    # symmetric and antisymmetric parts are orthogonal projections
    np.testing.assert_allclose(antisymmetrize(s).comps, 0.0 * s.comps,
                               atol=1e-12)


def test_trace_free_part_kills_trace(pack):
    rng = np.random.default_rng(4)
    t = rand_tj("dd", rng)
    tf = trace_free_part(t, pack)
    assert tensor_norm(trace(tf, 0, 1, pack)) < 1e-12
    # idempotent
    np.testing.assert_allclose(trace_free_part(tf, pack).comps, tf.comps,
                               atol=1e-12)


def test_raise_lower_round_trip(pack):
    rng = np.random.default_rng(5)
    t = rand_tj("dd", rng, weight=1.0)
    back = lower_index(raise_index(t, 1, pack), 1, pack)
    np.testing.assert_allclose(back.comps, t.comps, atol=1e-12)
    assert back.weight == t.weight


def test_cartan_projection_properties(pack):
    rng = np.random.default_rng(6)
    raw = antisymmetrize(rand_tj("ddd", rng), (0, 1))
    h = cartan_project(raw, pack)
    # idempotent, kills total antisymmetrization, trace-free over (0, 2)
    np.testing.assert_allclose(cartan_project(h, pack).comps, h.comps,
                               atol=1e-11)
    assert tensor_norm(alternate_all(h)) < 1e-12
    assert tensor_norm(trace(h, 0, 2, pack)) < 1e-12


def test_cartan_projection_rank_16(pack):
    """Hook subspace of 2-form x vector tensors in dim 4 has dimension 16."""
    basis = []
    for i in range(DIM):
        for j in range(DIM):
            for k in range(DIM):
                e = np.zeros((DIM, DIM, DIM, 1))
                e[i, j, k, 0] = 1.0
                t = TensorJet(DIM, 0, "ddd", e)
                t = antisymmetrize(t, (0, 1))
                basis.append(cartan_project(t, pack, check=False)
                             .values.reshape(-1))
    assert np.linalg.matrix_rank(np.stack(basis)) == 16


def test_projective_cartan_needs_no_metric():
    rng = np.random.default_rng(7)
    raw = antisymmetrize(rand_tj("ddd", rng, flavor=PROJECTIVE), (0, 1))
    h = cartan_project(raw, None)
    assert tensor_norm(alternate_all(h)) < 1e-12


def test_kn_product_symmetries():
    rng = np.random.default_rng(8)
    a = symmetrize(rand_tj("dd", rng))
    b = symmetrize(rand_tj("dd", rng))
    k = kn_product(a, b)
    v = k.values
    np.testing.assert_allclose(v, -v.transpose(1, 0, 2, 3), atol=1e-12)
    np.testing.assert_allclose(v, -v.transpose(0, 1, 3, 2), atol=1e-12)
    np.testing.assert_allclose(v, v.transpose(2, 3, 0, 1), atol=1e-12)
    # first Bianchi
    np.testing.assert_allclose(v + v.transpose(0, 2, 3, 1)
                               + v.transpose(0, 3, 1, 2), 0 * v, atol=1e-12)


def test_wedge_product_hook_symmetries():
    rng = np.random.default_rng(9)
    a = symmetrize(rand_tj("dd", rng))
    b = rand_tj("d", rng)
    w = wedge_product(a, b)
    assert tensor_norm(symmetrize(w, (0, 1)) ) < 1e-12
    assert tensor_norm(alternate_all(w)) < 1e-12


def test_sym_product_matches_definition():
    rng = np.random.default_rng(10)
    a, b = rand_tj("d", rng), rand_tj("d", rng)
    s = sym_product(a, b)
    want = 0.5 * (np.einsum("p,r->pr", a.values, b.values)
                  + np.einsum("r,p->pr", a.values, b.values))
    np.testing.assert_allclose(s.values, want, atol=1e-12)


def test_shape_spec_projects_and_matches(pack):
    rng = np.random.default_rng(11)
    spec = ShapeSpec("dd", "sym0", 1.0)
    t = random_section(spec, pack, 2, rng)
    assert spec.matches(t)
    assert tensor_norm(trace(t, 0, 1, pack)) < 1e-12
    spec2 = ShapeSpec("ddd", "form", 1.0)
    t2 = random_section(spec2, pack, 2, rng)
    np.testing.assert_allclose(antisymmetrize(t2).comps, t2.comps, atol=1e-12)


def test_shape_spec_rejects_unknown_symmetry():
    with pytest.raises(StructuralError):
        ShapeSpec("dd", "mystery", 0.0)


def test_move_slot_permutes_values():
    rng = np.random.default_rng(12)
    t = rand_tj("udd", rng)
    m = t.move_slot(0, 2)
    assert m.valence == "ddu"
    np.testing.assert_allclose(m.values, np.einsum("abc->bca", t.values),
                               atol=1e-12)
