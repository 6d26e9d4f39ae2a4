"""Analytic metric charts and the Levi-Civita curvature pipeline.

Charts supply jets of the metric at any base point; everything downstream
(Christoffel symbols, Riemann, Ricci, Schouten, Cotton, Weyl) is computed
in exact jet arithmetic and sanity-checked against the classical tensor
symmetries.  Conformal weights follow the trivialized-scale convention:
rescaling by e^{2*Upsilon} multiplies a weight-w tensor's components by
e^{w*Upsilon}, with no extra per-slot factors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericError, StructuralError
from .jets import (Jet, constant_jet, jet_exp, jet_pow, jet_sin, jet_space_size,
                   variable_jet)
from .tensors import (TensorJet, antisymmetrize, kn_product, pair_contract,
                      symmetrize, tensor_norm, trace, trace_free_part)

__all__ = [
    "MetricChart",
    "CurvaturePack",
    "ConformalScale",
    "curvature_pack",
    "weyl_tensor",
    "covariant_derivative",
    "conformal_rescale",
    "transform_density",
    "flat_chart",
    "conformally_flat_chart",
    "s2xs2_chart",
    "schwarzschild_chart",
    "perturbed_chart",
    "builtin_charts",
    "get_chart",
    "sample_points",
    "jet_matrix_inverse",
    "relative_residual",
    "DEFAULT_METRIC_ORDER",
]

DEFAULT_METRIC_ORDER = 6


def relative_residual(residual, *terms) -> float:
    """max |residual| / (1 + max |terms|), the reporting convention throughout."""
    scale = 1.0 + max((tensor_norm(t) for t in terms), default=0.0)
    return tensor_norm(residual) / scale


@dataclass(frozen=True)
class MetricChart:
    """Analytic source of metric jets.

    eval_fn(point, order) must return the dim x dim nested list (or array)
    of metric component Jets at that base point.
    """

    name: str
    dim: int
    signature: tuple[int, int]
    eval_fn: Callable
    sample_box: tuple[tuple[float, float], ...]
    generic_hint: bool = False

    def metric_jets(self, point, order: int) -> TensorJet:
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim,):
            raise StructuralError(f"point must have {self.dim} coordinates")
        g = TensorJet.from_jets(self.eval_fn(point, order), "dd", weight=2.0)
        sym_defect = tensor_norm(g - symmetrize(g))
        if sym_defect > 1e-10 * (1.0 + tensor_norm(g)):
            raise StructuralError(f"chart {self.name} returned a non-symmetric metric")
        g0 = g.values
        if abs(np.linalg.det(g0)) < 1e-12:
            raise NumericError(f"chart {self.name} is degenerate at {point}")
        p = int(np.sum(np.linalg.eigvalsh(g0) > 0))
        if (p, self.dim - p) != self.signature:
            raise StructuralError(
                f"chart {self.name}: signature {(p, self.dim - p)} does not "
                f"match declared {self.signature}")
        return g


def jet_matrix_inverse(m: TensorJet) -> TensorJet:
    """Inverse of a jet-valued square matrix.

    The constant term is inverted numerically; higher coefficients come from
    the finite Neumann recursion X -> B - B (M - M0) X, which is exact in
    jet arithmetic because (M - M0) is nilpotent beyond the truncation order.
    """
    if m.rank != 2:
        raise StructuralError("jet_matrix_inverse expects a rank-2 tensor")
    m0 = m.values
    try:
        b0 = np.linalg.inv(m0)
    except np.linalg.LinAlgError as exc:
        raise NumericError("singular constant term in jet matrix inverse") from exc
    rest = m.copy()
    rest.comps[..., 0] = 0.0
    flip = {"u": "d", "d": "u"}
    val = flip[m.valence[1]] + flip[m.valence[0]]
    b = TensorJet.from_constant(b0, m.dim, m.order, val)
    x = b
    for _ in range(m.order):
        bref = pair_contract(b, pair_contract(rest, x, [(1, 0)]), [(1, 0)])
        x = b - TensorJet(m.dim, m.order, val, bref.comps)
    return TensorJet(m.dim, m.order, val, x.comps, -m.weight, m.flavor)


@dataclass
class CurvaturePack:
    """All curvature data of a metric chart at one point, as jets."""

    chart: MetricChart
    point: np.ndarray
    g: TensorJet            # g_{ab}, weight 2
    ginv: TensorJet         # g^{ab}, weight -2
    gamma: TensorJet        # Christoffel symbols, slots (c, a, b) for Gamma^c_{ab}
    riemann: TensorJet      # R_{ab}{}^c{}_d
    riemann_low: TensorJet  # R_{abcd}, weight 2
    ric: TensorJet
    scal: Jet
    P: TensorJet            # Schouten
    J: Jet
    Y: TensorJet            # Cotton, Y_{abc} = 2 grad_[b P_c]a
    W: TensorJet            # Weyl, fully covariant, weight 2
    W_mixed: TensorJet      # W_{ab}{}^c{}_d
    vol: TensorJet          # metric volume form, weight = dim

    @property
    def dim(self):
        return self.g.dim

    def validate(self, tol=1e-9):
        n = self.dim
        checks = {
            "ric symmetric": relative_residual(self.ric - symmetrize(self.ric), self.ric),
            "riemann antisym ab": relative_residual(
                self.riemann_low + self.riemann_low.move_slot(1, 0),
                self.riemann_low),
            "riemann first bianchi": relative_residual(
                antisymmetrize(self.riemann_low, (0, 1, 2)), self.riemann_low),
            "weyl trace": max(
                relative_residual(trace(self.W, i, j, self), self.W)
                for i, j in itertools.combinations(range(4), 2)),
        }
        bad = {k: v for k, v in checks.items() if v > tol}
        if bad:
            raise NumericError(f"curvature invariants violated at {self.point}: {bad}")


def _christoffel(g: TensorJet, ginv: TensorJet) -> TensorJet:
    dg = _metric_gradient(g)  # slots (a, b, c) = partial_a g_{bc}
    # Gamma^c_{ab} = 1/2 g^{cd} (d_a g_db + d_b g_da - d_d g_ab)
    t1 = dg.move_slot(1, 0)   # slots (d, a, b) carrying d_a g_db
    sym = TensorJet(g.dim, dg.order, "ddd",
                    t1.comps + np.swapaxes(t1.comps, 1, 2) - dg.comps,
                    weight=2.0)
    gamma = pair_contract(ginv, sym, [(1, 0)]) * 0.5  # (c, a, b)
    return TensorJet(g.dim, gamma.order, "udd", gamma.comps, 0.0, g.flavor)


def _metric_gradient(t: TensorJet) -> TensorJet:
    comps = np.stack([t.partial(a).comps for a in range(t.dim)], axis=0)
    return TensorJet(t.dim, t.order - 1, "d" + t.valence, comps, t.weight, t.flavor)


def riemann_from_gamma(gamma: TensorJet) -> TensorJet:
    """R_{ab}{}^c{}_d from Gamma^c_{ab}; convention [grad_a, grad_b] v^c = R_ab^c_d v^d."""
    dgamma = _metric_gradient(gamma)  # (a, c, b, d) = partial_a Gamma^c_{bd}
    d1 = dgamma.move_slot(1, 2)       # (a, b, c, d)
    quad = pair_contract(gamma, gamma, [(2, 0)])  # Gamma^c_{ae} Gamma^e_{bd} -> (c, a, b, d)
    q1 = quad.move_slot(0, 2)         # (a, b, c, d)
    comps = (d1.comps - np.swapaxes(d1.comps, 0, 1)
             + q1.truncated(d1.order).comps - np.swapaxes(q1.truncated(d1.order).comps, 0, 1))
    return TensorJet(gamma.dim, d1.order, "ddud", comps, 0.0, gamma.flavor)


def curvature_pack(chart: MetricChart, point, order=None,
                   metric_order=DEFAULT_METRIC_ORDER, validate=True) -> CurvaturePack:
    """Compute the full curvature pipeline at one point."""
    n = chart.dim
    if n < 3:
        raise StructuralError("conformal curvature needs dim >= 3")
    g = chart.metric_jets(point, metric_order)
    ginv = jet_matrix_inverse(g)
    gamma = _christoffel(g, ginv)
    riem = riemann_from_gamma(gamma)
    # R_{abcd} = g_{ce} R_{ab}{}^e{}_d
    riem_low = pair_contract(g, riem, [(1, 2)]).move_slot(0, 2)
    ric = contract_ric(riem)
    stub = _MetricOnly(g, ginv)
    scal_t = trace(ric, 0, 1, stub)
    scal = Jet(n, scal_t.order, scal_t.comps)
    J = scal * (1.0 / (2.0 * (n - 1.0)))
    P = (ric - TensorJet(n, min(g.order, scal_t.order), "dd",
                         (g.truncated(scal_t.order) * J).comps)) * (1.0 / (n - 2.0))
    P = TensorJet(n, P.order, "dd", P.comps)
    packlike = _MetricOnly(g, ginv, gamma)
    gradP = covariant_derivative(P, packlike)   # slots (deriv, e, f)
    # Y_{abc} = grad_b P_{ca} - grad_c P_{ba}
    Yb = gradP.move_slot(2, 0)                  # slots (a, b, c) = grad_b P_{ca}
    Y = TensorJet(n, Yb.order, "ddd", Yb.comps - np.swapaxes(Yb.comps, 1, 2))
    W = riem_low - kn_product(g.truncated(P.order), P).with_weight(2.0)
    W_mixed = pair_contract(ginv, W, [(1, 2)]).move_slot(0, 2)
    W_mixed = TensorJet(n, W_mixed.order, "ddud", W_mixed.comps, 0.0)
    vol = _volume_form(g)
    if order is not None:
        order = min(order, Y.order)
        g, ginv, gamma = g.truncated(order), ginv.truncated(order), gamma.truncated(order)
        riem, riem_low = riem.truncated(order), riem_low.truncated(order)
        ric, P, Y = ric.truncated(order), P.truncated(order), Y.truncated(order)
        W, W_mixed, vol = W.truncated(order), W_mixed.truncated(order), vol.truncated(order)
        scal, J = scal.truncated(order), J.truncated(order)
    pack = CurvaturePack(chart, np.asarray(point, dtype=float), g, ginv, gamma,
                         riem, riem_low, ric, scal, P, J, Y, W, W_mixed, vol)
    if validate:
        pack.validate()
    return pack


def weyl_tensor(pack: CurvaturePack):
    """Fully covariant and mixed Weyl tensor of an existing pack."""
    return pack.W, pack.W_mixed


def contract_ric(riemann: TensorJet) -> TensorJet:
    """Ric_{bd} = R_{ab}{}^a{}_d."""
    comps = np.einsum("abaez->bez", riemann.comps[:, :, :, :, :])
    return TensorJet(riemann.dim, riemann.order, "dd", comps)


class _MetricOnly:
    """Minimal pack-like object for early pipeline stages."""

    def __init__(self, g, ginv, gamma=None):
        self.g = g
        self.ginv = ginv
        self.gamma = gamma


def _volume_form(g: TensorJet) -> TensorJet:
    n = g.dim
    det = _jet_det(g)
    sign = 1.0 if det.value > 0 else -1.0
    amp = jet_pow(sign * det, 0.5)
    eps = np.zeros((n,) * n)
    for perm in itertools.permutations(range(n)):
        eps[perm] = _sign_of(perm)
    vol = TensorJet.from_constant(eps, n, amp.order, "d" * n, weight=float(n))
    return vol * amp


def _sign_of(perm):
    inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm))
              if perm[i] > perm[j])
    return -1.0 if inv % 2 else 1.0


def _jet_det(g: TensorJet) -> Jet:
    n = g.dim
    acc = None
    for perm in itertools.permutations(range(n)):
        term = g.jet(0, perm[0])
        for i in range(1, n):
            term = term * g.jet(i, perm[i])
        term = term * _sign_of(perm)
        acc = term if acc is None else acc + term
    return acc


def covariant_derivative(t: TensorJet, pack) -> TensorJet:
    """Levi-Civita covariant derivative; the new slot comes first.

    Weighted tensors are trivialized in the current scale, so the weight
    contributes no extra term.
    """
    gamma = pack.gamma
    grad = _metric_gradient(t)  # (deriv, original slots...)
    out = grad.comps.copy()
    oo = grad.order
    for s, v in enumerate(t.valence):
        if v == "d":
            # - Gamma^e_{a s} t_{... e ...}
            corr = pair_contract(gamma, t, [(0, s)])  # (a, s_new, rest...)
            corr = corr.move_slot(1, s + 1)
            out -= corr.truncated(oo).comps
        else:
            # + Gamma^c_{a e} t^{... e ...}
            corr = pair_contract(gamma.move_slot(0, 2), t, [(1, s)])  # (a, c, rest)
            corr = corr.move_slot(1, s + 1)
            out += corr.truncated(oo).comps
    return TensorJet(t.dim, oo, "d" + t.valence, out, t.weight, t.flavor)


# -- conformal rescaling ------------------------------------------------------


@dataclass(frozen=True)
class ConformalScale:
    """A rescaling function Upsilon, available as a jet at any point."""

    name: str
    fn: Callable  # (point, order) -> Jet

    def at(self, point, order) -> Jet:
        return self.fn(np.asarray(point, dtype=float), order)

    @classmethod
    def zero(cls, dim):
        return cls("zero", lambda p, o: constant_jet(dim, o, 0.0))

    @classmethod
    def polynomial(cls, dim, seed, amplitude=0.1, degree=2):
        """Seeded random polynomial scale, the default test rescaling."""
        rng = np.random.default_rng(seed)
        coeffs = {}
        from .jets import multi_indices
        for alpha in multi_indices(dim, degree):
            if sum(alpha) >= 1:
                coeffs[alpha] = amplitude * rng.uniform(-1.0, 1.0)

        def fn(point, order):
            xs = [variable_jet(dim, order, i, point[i]) for i in range(dim)]
            acc = constant_jet(dim, order, 0.0)
            for alpha, c in coeffs.items():
                term = constant_jet(dim, order, c)
                for i, p in enumerate(alpha):
                    for _ in range(p):
                        term = term * xs[i]
                acc = acc + term
            return acc

        return cls(f"poly-{seed}", fn)


def conformal_rescale(chart: MetricChart, scale: ConformalScale) -> MetricChart:
    """Chart for e^{2*Upsilon} g."""

    def eval_any(point, order):
        g = np.asarray(chart.eval_fn(point, order), dtype=object)
        factor = jet_exp(2.0 * scale.at(point, order))
        return [[factor * g[i, j] for j in range(chart.dim)] for i in range(chart.dim)]

    return MetricChart(f"{chart.name}*e^2{scale.name}", chart.dim, chart.signature,
                       eval_any, chart.sample_box, chart.generic_hint)


def transform_density(t: TensorJet, scale: ConformalScale, point) -> TensorJet:
    """Components of a weight-w tensor in the rescaled scale: e^{w*Upsilon} t."""
    ups = scale.at(point, t.order)
    return t * jet_exp(t.weight * ups)


# -- built-in chart library ----------------------------------------------------


def _const_metric_chart(name, matrix, box=1.0):
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    p = int(np.sum(np.linalg.eigvalsh(matrix) > 0))

    def eval_fn(point, order):
        return [[constant_jet(n, order, matrix[i, j]) for j in range(n)]
                for i in range(n)]

    return MetricChart(name, n, (p, n - p), eval_fn,
                       tuple((-box, box) for _ in range(n)))


def flat_chart(dim=4, signature=None) -> MetricChart:
    if signature is None:
        signature = (dim, 0)
    diag = [1.0] * signature[0] + [-1.0] * signature[1]
    tag = "" if signature == (dim, 0) else "-lorentz"
    return _const_metric_chart(f"flat{dim if dim != 4 else ''}{tag}", np.diag(diag))


def conformally_flat_chart(dim=4, seed=3) -> MetricChart:
    scale = ConformalScale.polynomial(dim, seed, amplitude=0.15, degree=3)
    chart = conformal_rescale(flat_chart(dim), scale)
    return MetricChart("conf-flat", dim, (dim, 0), chart.eval_fn, chart.sample_box)


def s2xs2_chart() -> MetricChart:
    """Unit S^2 x S^2 in per-factor stereographic coordinates."""

    def eval_fn(point, order):
        xs = [variable_jet(4, order, i, point[i]) for i in range(4)]
        f1 = 4.0 * jet_pow(1.0 + xs[0] * xs[0] + xs[1] * xs[1], -2.0)
        f2 = 4.0 * jet_pow(1.0 + xs[2] * xs[2] + xs[3] * xs[3], -2.0)
        zero = constant_jet(4, order, 0.0)
        gs = [[zero] * 4 for _ in range(4)]
        gs[0][0] = f1
        gs[1][1] = f1
        gs[2][2] = f2
        gs[3][3] = f2
        return gs

    return MetricChart("s2xs2", 4, (4, 0), eval_fn,
                       tuple((-0.8, 0.8) for _ in range(4)), generic_hint=True)


def schwarzschild_chart(mass=1.0) -> MetricChart:
    """Static exterior chart (t, r, theta, phi), signature (+,-,-,-)."""

    def eval_fn(point, order):
        _, r0, th0, _ = point
        r = variable_jet(4, order, 1, r0)
        th = variable_jet(4, order, 2, th0)
        f = 1.0 - 2.0 * mass * jet_pow(r, -1.0)
        sin2 = jet_sin(th) * jet_sin(th)
        r2 = r * r
        zero = constant_jet(4, order, 0.0)
        gs = [[zero] * 4 for _ in range(4)]
        gs[0][0] = f
        gs[1][1] = -jet_pow(f, -1.0)
        gs[2][2] = -r2
        gs[3][3] = -r2 * sin2
        return gs

    box = ((-1.0, 1.0), (3.0 * mass, 10.0 * mass), (0.8, 2.3), (0.5, 5.5))
    return MetricChart("schwarzschild", 4, (1, 3), eval_fn, box, generic_hint=True)


def perturbed_chart(seed=7, dim=4, amplitude=0.1, degree=3) -> MetricChart:
    """delta_ab + h_ab with a seeded random polynomial perturbation h."""
    rng = np.random.default_rng(seed)
    from .jets import multi_indices
    terms = {}
    for i in range(dim):
        for j in range(i, dim):
            for alpha in multi_indices(dim, degree):
                if sum(alpha) >= 1:
                    terms[(i, j, alpha)] = amplitude * rng.uniform(-1.0, 1.0)

    def eval_fn(point, order):
        xs = [variable_jet(dim, order, i, point[i]) for i in range(dim)]
        gs = [[constant_jet(dim, order, 1.0 if i == j else 0.0)
               for j in range(dim)] for i in range(dim)]
        for (i, j, alpha), c in terms.items():
            term = constant_jet(dim, order, c)
            for ax, p in enumerate(alpha):
                for _ in range(p):
                    term = term * xs[ax]
            gs[i][j] = gs[i][j] + term
            if i != j:
                gs[j][i] = gs[j][i] + term
        return gs

    name = f"perturbed{dim if dim != 4 else ''}-{seed}" if seed != 7 or dim != 4 \
        else "perturbed"
    return MetricChart(name, dim, (dim, 0), eval_fn,
                       tuple((-0.3, 0.3) for _ in range(dim)), generic_hint=True)


def builtin_charts() -> list[MetricChart]:
    return [
        flat_chart(),
        flat_chart(4, (1, 3)),
        flat_chart(3),
        conformally_flat_chart(),
        s2xs2_chart(),
        schwarzschild_chart(),
        perturbed_chart(),
        perturbed_chart(seed=7, dim=3),
    ]


def get_chart(name: str, seed=None) -> MetricChart:
    """Look a chart up by name; 'perturbed-<seed>' and 'perturbed3-<seed>' work too."""
    base = {c.name: c for c in builtin_charts()}
    if name in base:
        return base[name]
    for prefix, dim in (("perturbed3-", 3), ("perturbed-", 4)):
        if name.startswith(prefix):
            return perturbed_chart(seed=int(name[len(prefix):]), dim=dim)
    raise StructuralError(f"unknown chart {name!r}")


def sample_points(chart: MetricChart, count: int, rng) -> np.ndarray:
    box = np.asarray(chart.sample_box)
    return rng.uniform(box[:, 0], box[:, 1], size=(count, chart.dim))
