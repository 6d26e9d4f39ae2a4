"""Acceptance gate: end-to-end numerical criteria for the whole package.

Each test covers one acceptance criterion and prints a single PASS/FAIL
line with the measured quantity and its tolerance.  The criteria exercise
the full stack: jet arithmetic, curvature, the operator zoo, the complex
builders with their homotopy equivalences, the projective variant, the
null-frame scalar toolkit and the CLI report determinism.
"""

import json
import time

import numpy as np
import pytest

from c2e import cli
from c2e.conformal import (C1, D1, E0, Ek, H1prime, ONE_SOLUTION, d_tilde,
                           identity_suite, obstruction_pack, weyl_inversion,
                           _raise_all)
from c2e.geometry import (ConformalScale, builtin_charts, covariant_derivative,
                          curvature_pack, flat_chart, perturbed_chart,
                          relative_residual, s2xs2_chart, sample_points,
                          schwarzschild_chart)
from c2e.homology import (build_bgg_complex, build_nosol_complex,
                          build_onesol_complex, check_complex,
                          check_equivalence)
from c2e.jets import jet_space_size
from c2e.nullframes import (NPScalars, canonical_frame, cubic_invariants,
                            genericity_rank, np_quadratic, np_scalars,
                            quadratic_invariant, reconstruct_weyl,
                            weyl_map_matrix)
from c2e.projective import (ProjectiveChart, build_onesol_proj_complex,
                            projective_pack, projective_weyl_inversion)
from c2e.tensors import (ShapeSpec, TensorJet, pair_contract, raise_index,
                         random_section, scalar_to_jet)

ORDER = 6


@pytest.fixture
def verdict(capsys):
    """One-line PASS/FAIL reporter that bypasses output capture."""
    def _line(num, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {num}] {'PASS' if ok else 'FAIL'}: {detail}",
                  flush=True)
    return _line


def _random_scalar(dim, order, rng):
    comps = rng.uniform(-1.0, 1.0, jet_space_size(dim, order))
    return TensorJet(dim, order, "", comps, 1.0)


def _composition_residual(pack, sigma):
    """E1(E0 sigma) against its curvature closed form."""
    e0s = E0(sigma, pack)
    lhs = Ek(1, e0s, pack, check=False)
    gradu = raise_index(covariant_derivative(sigma, pack), 0, pack)
    wterm = pair_contract(pack.W, gradu, [(3, 0)])
    yterm = TensorJet(pack.dim, pack.Y.order, "ddd",
                      np.einsum("cabz->abcz", pack.Y.comps))
    rhs = wterm + (yterm * scalar_to_jet(sigma)).with_weight(wterm.weight)
    return relative_residual(lhs - rhs.with_weight(lhs.weight), lhs, rhs)


def test_first_composition_identity_across_charts(verdict):
    """Criterion 1: E1 o E0 equals its curvature correction on 8 charts."""
    tol, budget = 1e-7, 30.0
    charts = ([flat_chart(), s2xs2_chart(), schwarzschild_chart()]
              + [perturbed_chart(seed=s) for s in (1, 2, 3, 4, 5)])
    t0 = time.perf_counter()
    worst = 0.0
    rng = np.random.default_rng(0)
    for chart in charts:
        for point in sample_points(chart, 10, rng):
            pack = curvature_pack(chart, point)
            for _ in range(5):
                sigma = _random_scalar(chart.dim, ORDER, rng)
                worst = max(worst, _composition_residual(pack, sigma))
    elapsed = time.perf_counter() - t0
    ok = worst <= tol and elapsed <= budget
    verdict(1, ok, f"composition identity on 8 charts, max residual "
                 f"{worst:.3e} (tol {tol:.0e}), {elapsed:.1f}s (budget 30s)")
    assert ok


def test_mid_complex_identities_on_generic_charts(verdict):
    """Criterion 2: commutation and obstruction identities, plus the
    id - C1 D1 = H1' dtilde identity where the obstructions vanish."""
    tol = 1e-7
    keys = ("comm-D1", "comm-C1", "obstructE-dZ", "obstructE-Phi", "CDcomp")
    worst = 0.0
    for chart in (s2xs2_chart(), perturbed_chart(seed=7),
                  perturbed_chart(seed=13)):
        rep = identity_suite(chart, trials=2, tol=tol)
        vals = [rep["identities"][k] for k in keys
                if isinstance(rep["identities"][k], float)]
        assert vals, f"chart {chart.name} was never generic"
        worst = max(worst, max(vals))

    # explicit homotopy identity on the chart with vanishing obstructions
    chart = s2xs2_chart()
    rng = np.random.default_rng(1)
    point = sample_points(chart, 1, rng)[0]
    pack = curvature_pack(chart, point)
    report = weyl_inversion(pack)
    ob = obstruction_pack(pack, report)
    assert ob.classification == ONE_SOLUTION
    spec = ShapeSpec("d", "form", 1.0)
    for _ in range(5):
        tau = random_section(spec, pack, ORDER, rng)
        cd = C1(D1(tau, pack, ob.Z), pack, report.wbar)
        lhs = tau.truncated(cd.order) - cd
        rhs = H1prime(d_tilde(tau, pack, ob.Z), pack, report.wbar, ob.Z)
        worst = max(worst, relative_residual(lhs - rhs, tau))

    ok = worst <= tol
    verdict(2, ok, f"commutation/obstruction/homotopy identities, max residual "
                 f"{worst:.3e} (tol {tol:.0e})")
    assert ok


def test_einstein_product_complex_and_equivalence(verdict):
    """Criterion 3: the full compatibility complex on the Einstein product
    chart, with its homotopy equivalence data."""
    tol, budget = 1e-7, 120.0
    t0 = time.perf_counter()
    top, equiv = build_onesol_complex(s2xs2_chart())
    rng = np.random.default_rng(0)
    pts10 = sample_points(s2xs2_chart(), 10, rng)
    rep_c = check_complex(top, points=pts10, trials=5, tol=tol)
    rep_e = check_equivalence(equiv, points=pts10[:3], trials=2, tol=tol)
    elapsed = time.perf_counter() - t0
    worst = max(rep_c.max_residual, rep_e.max_residual)
    # the 4-operator complex has one composition per consecutive pair
    ok = (rep_c.passed and rep_e.passed
          and len(rep_c.items) == len(top.nodes) - 1 == 3
          and elapsed <= budget)
    verdict(3, ok, f"all compositions + equivalence on the Einstein product, "
                 f"max residual {worst:.3e} (tol {tol:.0e}), "
                 f"{elapsed:.1f}s (budget 120s)")
    assert ok


def test_no_solution_complex_with_left_inverse(verdict):
    """Criterion 4: length-3 complex in the obstructed regime, H0 E0 = id,
    including the 3-dimensional Cotton route."""
    tol = 1e-7
    worst = 0.0
    for chart in (perturbed_chart(seed=7), perturbed_chart(seed=7, dim=3)):
        top, equiv = build_nosol_complex(chart)
        rng = np.random.default_rng(0)
        pts = sample_points(chart, 3, rng)
        rep = check_complex(top, points=pts, trials=2, tol=tol)
        assert len(rep.items) == 2
        worst = max(worst, rep.max_residual)
        e0, h0 = top.nodes[0], top.nodes[2]
        for point in pts:
            sigma = _random_scalar(chart.dim, ORDER, rng)
            back = h0.fn(e0.fn(sigma, point), point)
            worst = max(worst, relative_residual(
                back - sigma.truncated(back.order), sigma))
        rep_e = check_equivalence(equiv, points=pts, trials=2, tol=tol)
        worst = max(worst, rep_e.max_residual)
    ok = worst <= tol
    verdict(4, ok, f"no-solution complexes (4D and 3D) with scalar recovery, "
                 f"max residual {worst:.3e} (tol {tol:.0e})")
    assert ok


def test_projective_complex_on_schwarzschild(verdict):
    """Criterion 5: projective analogue on the vacuum chart, generic at every
    sample point, compositions and homotopies within tolerance."""
    tol = 1e-6
    pchart = ProjectiveChart.from_metric(schwarzschild_chart())
    rng = np.random.default_rng(0)
    pts = sample_points(schwarzschild_chart(), 5, rng)
    ranks = [projective_weyl_inversion(projective_pack(pchart, p)).rank
             for p in pts]
    top, equiv = build_onesol_proj_complex(pchart)
    rep_c = check_complex(top, points=pts[:3], trials=2, tol=tol)
    rep_e = check_equivalence(equiv, points=pts[:3], trials=2, tol=tol)
    worst = max(rep_c.max_residual, rep_e.max_residual)
    ok = all(r == 4 for r in ranks) and worst <= tol
    verdict(5, ok, f"projective complex on the vacuum chart, ranks {ranks}, "
                 f"max residual {worst:.3e} (tol {tol:.0e})")
    assert ok


def test_flat_sequence_is_a_complex_and_curved_is_not(verdict):
    """Criterion 6: consecutive compositions vanish on the flat chart and
    demonstrably fail to vanish on a curved one."""
    tol = 1e-8
    rng = np.random.default_rng(0)
    flat = build_bgg_complex(flat_chart())
    rep_flat = check_complex(flat, points=sample_points(flat_chart(), 3, rng),
                             trials=2, tol=tol)
    curved = build_bgg_complex(perturbed_chart(seed=7))
    rep_curved = check_complex(
        curved, points=sample_points(perturbed_chart(seed=7), 3, rng),
        trials=2, tol=tol)
    ok = rep_flat.passed and rep_curved.max_residual > 1e-3
    verdict(6, ok, f"flat compositions max {rep_flat.max_residual:.3e} "
                 f"(tol {tol:.0e}); curved compositions reach "
                 f"{rep_curved.max_residual:.3e} (> 1e-3 required)")
    assert ok


def test_four_dim_identity_and_conformal_invariance(verdict):
    """Criterion 7: the dimension-specific quadratic contraction identity on
    every 4D chart, and invariance of the operators under three seeded
    rescalings."""
    tol4, tol_inv = 1e-8, 1e-7
    rng = np.random.default_rng(0)
    worst4 = 0.0
    for chart in [c for c in builtin_charts() if c.dim == 4]:
        for point in sample_points(chart, 2, rng):
            pack = curvature_pack(chart, point)
            wup = _raise_all(pack.W, pack, range(4))
            lhs = pair_contract(wup, pack.W, [(0, 0), (1, 1), (2, 2)])
            w2 = scalar_to_jet(pair_contract(
                wup, pack.W, [(0, 0), (1, 1), (2, 2), (3, 3)]))
            eye = TensorJet.from_constant(np.eye(4), 4, w2.order, "ud")
            rhs = (eye * w2 * 0.25).with_weight(lhs.weight)
            worst4 = max(worst4, relative_residual(lhs - rhs, lhs, rhs))

    inv_keys = ("E0-invariance", "Ztrans", "D1-invariance",
                "dtilde-invariance", "H1prime-invariance")
    worst_inv = 0.0
    chart = perturbed_chart(seed=7)
    pts = sample_points(chart, 1, np.random.default_rng(2))
    for seed in (1, 2, 3):
        rep = identity_suite(chart, points=pts, trials=1,
                             scale=ConformalScale.polynomial(4, seed=seed))
        vals = [rep["identities"][k] for k in inv_keys
                if isinstance(rep["identities"][k], float)]
        assert len(vals) == len(inv_keys)
        worst_inv = max(worst_inv, max(vals))

    ok = worst4 <= tol4 and worst_inv <= tol_inv
    verdict(7, ok, f"4D contraction identity max {worst4:.3e} (tol {tol4:.0e}); "
                 f"invariance under 3 rescalings max {worst_inv:.3e} "
                 f"(tol {tol_inv:.0e})")
    assert ok


def test_null_frame_scalar_suite(verdict):
    """Criterion 8: scalar round trip, quadratic invariant, contraction-matrix
    block pattern, genericity ranks and the null cubic identity."""
    tol, budget = 1e-10, 10.0
    t0 = time.perf_counter()
    f = canonical_frame()
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        vals = rng.uniform(-1, 1, 10)
        psi = NPScalars.from_sequence(vals[:5] + 1j * vals[5:])
        W = reconstruct_weyl(psi, f)
        back = np_scalars(W, f)
        worst = max(worst, max(abs(a - b) for a, b in
                               zip(back.as_tuple(), psi.as_tuple())))
        worst = max(worst, abs(quadratic_invariant(W, f) - np_quadratic(psi)))

    w48 = quadratic_invariant(reconstruct_weyl(NPScalars(0, 0, 1, 0, 0), f), f)
    worst = max(worst, abs(w48 - 48.0))

    # block pattern of the contraction matrix for psi3-only and psi4-only
    p3, p4 = 1.5 + 0.5j, 2.0 - 1.0j
    m3 = weyl_map_matrix(reconstruct_weyl(NPScalars(0, 0, 0, p3, 0), f), f)
    want3 = np.zeros((16, 4), dtype=complex)
    want3[7, 0], want3[9, 0] = np.conj(p3), p3
    want3[10, 1], want3[12, 1] = -np.conj(p3), -p3
    want3[11, 2], want3[13, 2] = -np.conj(p3), -p3
    want3[14, 3], want3[15, 3] = np.conj(p3), p3
    worst = max(worst, float(np.abs(m3 - want3).max()))
    m4 = weyl_map_matrix(reconstruct_weyl(NPScalars(0, 0, 0, 0, p4), f), f)
    want4 = np.zeros((16, 4), dtype=complex)
    want4[10, 0], want4[13, 0] = -np.conj(p4), -p4
    want4[15, 1], want4[14, 2] = p4, np.conj(p4)
    worst = max(worst, float(np.abs(m4 - want4).max()))

    rank_ok = True
    for p3v in (1.0, 0.5 - 0.2j):
        w = reconstruct_weyl(NPScalars(0, 0, 0, p3v, 0.7), f)
        rank_ok &= genericity_rank(w, f) == 4
    wn = reconstruct_weyl(NPScalars(0, 0, 0, 0, 1.0), f)
    rank_ok &= genericity_rank(wn, f) < 4

    # null quadratic invariant forces the cubic map to be pure trace
    for vals in [(0, 0, 0, p3, 0), (0, 0, 0, 0, p4), (0, 0, 0, 0.7, 1.3j)]:
        psi = NPScalars.from_sequence(vals)
        W = reconstruct_weyl(psi, f)
        assert abs(np_quadratic(psi)) < 1e-12
        cub = cubic_invariants(W, f)
        pure = cub["trace"] / 4.0 * np.eye(4)
        worst = max(worst, float(np.abs(cub["V3"] - pure).max()))

    elapsed = time.perf_counter() - t0
    ok = worst <= tol and rank_ok and elapsed <= budget
    verdict(8, ok, f"null-frame scalar suite, max deviation {worst:.3e} "
                 f"(tol {tol:.0e}), ranks {'ok' if rank_ok else 'BAD'}, "
                 f"{elapsed:.1f}s (budget 10s)")
    assert ok


def test_verification_reports_are_deterministic(tmp_path, verdict):
    """Criterion 9: repeated runs with the same config and seed produce
    identical report bodies."""
    argv = ["verify", "--suite", "identities", "--chart", "perturbed",
            "--points", "1", "--trials", "1", "--seed", "11"]
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.json"
        code = cli.main(argv + ["--out", str(path)])
        assert code == 0
        body = json.loads(path.read_text())
        body.pop("timing")
        outs.append(json.dumps(body, sort_keys=True))
    ok = outs[0] == outs[1]
    verdict(9, ok, "repeated seeded verify runs "
                 + ("match byte for byte" if ok else "DIFFER"))
    assert ok
