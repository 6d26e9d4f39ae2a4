"""Differential operators as graph nodes, and numerical homological algebra.

Operators are wrapped in OperatorNode closures that carry source/target
bundle labels.  ComplexSpec chains nodes; check_complex and
check_equivalence measure, on random section jets at random chart points,
how well the complex property, the commuting squares, the homotopy
identities and the edge identities hold.  The builders assemble the
compatibility complexes for the conformal-to-Einstein operator in both
the one-solution and the no-solution regimes, together with the full
equivalence data that witnesses completeness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import StructuralError
from .tensors import (TensorJet, ShapeSpec, tensor_norm, pair_contract,
                      antisymmetrize, random_section, scalar_to_jet, CONFORMAL)
from .geometry import (curvature_pack, relative_residual, sample_points,
                       DEFAULT_METRIC_ORDER)
from . import conformal as cf

__all__ = [
    "OperatorNode",
    "ComplexSpec",
    "EquivalenceData",
    "VerificationReport",
    "GeometryContext",
    "compose",
    "block_node",
    "check_complex",
    "check_equivalence",
    "lift_compatibility",
    "build_bgg_complex",
    "build_onesol_complex",
    "build_nosol_complex",
]

VERIFY_ORDER = 6
VERIFY_METRIC_ORDER = 9


# -- values are TensorJets or tuples of them (direct sums) ---------------------


def _val_sub(a, b):
    if b is None:
        return a
    if a is None:
        return _val_neg(b)
    if isinstance(a, tuple) or isinstance(b, tuple):
        return tuple(_val_sub(x, y) for x, y in zip(a, b))
    oo = min(a.order, b.order)
    return a.truncated(oo) - b.truncated(oo).with_weight(a.weight)


def _val_add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    if isinstance(a, tuple):
        return tuple(_val_add(x, y) for x, y in zip(a, b))
    oo = min(a.order, b.order)
    return a.truncated(oo) + b.truncated(oo).with_weight(a.weight)


def _val_neg(a):
    if a is None:
        return None
    if isinstance(a, tuple):
        return tuple(_val_neg(x) for x in a)
    return -a


# -- operator nodes ------------------------------------------------------------


@dataclass(frozen=True)
class OperatorNode:
    """A differential operator with bundle labels attached.

    fn(x, point) evaluates the operator on a section jet (or a tuple of
    them, for direct sums) at a chart point.  order records how many jet
    orders one application consumes.
    """

    name: str
    source: object            # ShapeSpec or tuple of ShapeSpec
    target: object
    order: int
    fn: object

    def __call__(self, x, point):
        return self.fn(x, point)

    @classmethod
    def identity(cls, shape):
        return cls("id", shape, shape, 0, lambda x, point: x)

    @classmethod
    def zero(cls, source, target):
        return cls("0", source, target, 0, None)


def compose(a: OperatorNode, b: OperatorNode) -> OperatorNode:
    """The operator a after b."""
    if b.target != a.source:
        raise StructuralError(
            f"cannot compose {a.name} after {b.name}: shape mismatch")
    if a.fn is None or b.fn is None:
        return OperatorNode("0", b.source, a.target, 0, None)
    return OperatorNode(f"{a.name}.{b.name}", b.source, a.target,
                        a.order + b.order,
                        lambda x, point: a.fn(b.fn(x, point), point))


def block_node(name, rows, source, target) -> OperatorNode:
    """Assemble a block operator from a matrix of nodes (None = zero block).

    rows[i][j] maps the j-th summand of the source to the i-th summand of
    the target; single (non-tuple) source or target spaces are handled by
    passing one-element rows/columns.
    """
    src_tuple = isinstance(source, tuple)
    tgt_tuple = isinstance(target, tuple)
    order = max((n.order for row in rows for n in row if n is not None),
                default=0)

    def fn(x, point):
        xs = x if src_tuple else (x,)
        outs = []
        for row in rows:
            acc = None
            for node, xj in zip(row, xs):
                if node is not None and node.fn is not None and xj is not None:
                    acc = _val_add(acc, node.fn(xj, point))
            outs.append(acc)
        return tuple(outs) if tgt_tuple else outs[0]

    return OperatorNode(name, source, target, order, fn)


# -- complexes and equivalences -------------------------------------------------


@dataclass
class ComplexSpec:
    """An ordered chain of operator nodes with matching bundle labels."""

    name: str
    ctx: "GeometryContext"
    spaces: list
    nodes: list

    def __post_init__(self):
        if len(self.spaces) != len(self.nodes) + 1:
            raise StructuralError("complex needs one more space than operators")
        for i, node in enumerate(self.nodes):
            if node.source != self.spaces[i] or node.target != self.spaces[i + 1]:
                raise StructuralError(
                    f"operator {node.name} does not fit between spaces {i}, {i + 1}")


@dataclass
class EquivalenceData:
    """Two complexes plus the maps witnessing equivalence up to homotopy.

    C[l] maps top space l down, D[l] maps bottom space l up; H[l] is the
    top homotopy (top space l+1 -> top space l) and Hprime[l] the bottom
    one.  None entries are zero maps.
    """

    top: ComplexSpec
    bottom: ComplexSpec
    C: list
    D: list
    H: list
    Hprime: list


@dataclass
class VerificationReport:
    name: str
    items: list = field(default_factory=list)
    seed: int = 0
    tol: float = 1e-7
    points: list = field(default_factory=list)

    def record(self, label, residual):
        self.items.append({"identity": label, "residual": residual,
                           "passed": residual <= self.tol})

    @property
    def max_residual(self):
        return max((it["residual"] for it in self.items), default=0.0)

    @property
    def passed(self):
        return all(it["passed"] for it in self.items)

    def to_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "tol": self.tol,
            "seed": self.seed,
            "points": [list(map(float, p)) for p in self.points],
            "identities": self.items,
        }


# -- geometry context ------------------------------------------------------------


class GeometryContext:
    """Per-point cache of curvature data, Weyl inversion and obstructions."""

    def __init__(self, chart, metric_order=VERIFY_METRIC_ORDER):
        self.chart = chart
        self.metric_order = metric_order
        self._packs = {}
        self._reports = {}
        self._obstructions = {}
        self._zeta_eta = {}
        self._cotton = {}

    def _key(self, point):
        return tuple(np.asarray(point, dtype=float).tolist())

    def pack(self, point):
        key = self._key(point)
        if key not in self._packs:
            self._packs[key] = curvature_pack(
                self.chart, np.asarray(point, dtype=float),
                metric_order=self.metric_order)
        return self._packs[key]

    def report(self, point):
        key = self._key(point)
        if key not in self._reports:
            self._reports[key] = cf.weyl_inversion(self.pack(point))
        return self._reports[key]

    def obstructions(self, point):
        key = self._key(point)
        if key not in self._obstructions:
            rep = self.report(point)
            if not rep.generic:
                raise StructuralError(
                    f"chart {self.chart.name} is not generic at {key}")
            self._obstructions[key] = cf.obstruction_pack(self.pack(point), rep)
        return self._obstructions[key]

    def zeta_eta(self, point):
        key = self._key(point)
        if key not in self._zeta_eta:
            self._zeta_eta[key] = cf.zeta_eta(self.obstructions(point))
        return self._zeta_eta[key]

    def cotton_inverse(self, point):
        key = self._key(point)
        if key not in self._cotton:
            self._cotton[key] = cf.cotton_left_inverse(self.pack(point))
        return self._cotton[key]


# -- random sections over possibly-summed spaces ---------------------------------


ZERO_SPACE = "zero"


def _random_value(space, pack, order, rng):
    if space == ZERO_SPACE:
        return None
    if isinstance(space, tuple):
        return tuple(random_section(s, pack, order, rng) for s in space)
    return random_section(space, pack, order, rng)


# -- verification -----------------------------------------------------------------


def check_complex(c: ComplexSpec, points=None, trials=3, tol=1e-7,
                  order=VERIFY_ORDER, seed=0) -> VerificationReport:
    """Measure K_{l+1} o K_l on random sections at random points."""
    rng = np.random.default_rng(seed)
    if points is None:
        points = sample_points(c.ctx.chart, 3, rng)
    rep = VerificationReport(f"complex:{c.name}", seed=seed, tol=tol,
                             points=list(points))
    for l in range(len(c.nodes) - 1):
        worst = 0.0
        for point in points:
            pack = c.ctx.pack(point)
            for _ in range(trials):
                x = _random_value(c.spaces[l], pack, order, rng)
                mid = c.nodes[l](x, point)
                out = c.nodes[l + 1](mid, point)
                worst = max(worst, relative_residual(out, mid))
        rep.record(f"K{l + 1} o K{l} = 0", worst)
    return rep


def _apply(node, x, point):
    if node is None or node.fn is None:
        return None
    return node.fn(x, point)


def check_equivalence(e: EquivalenceData, points=None, trials=3, tol=1e-7,
                      order=VERIFY_ORDER, seed=0) -> VerificationReport:
    """Verify squares, homotopy identities and edge identities numerically.

    Out-of-range operators (K_{-1}, homotopies past the ends, missing edge
    maps) are treated as zero, which matches how the diagrams are truncated.
    """
    rng = np.random.default_rng(seed)
    top, bot = e.top, e.bottom
    if points is None:
        points = sample_points(top.ctx.chart, 3, rng)
    rep = VerificationReport("equivalence", seed=seed, tol=tol,
                             points=list(points))

    def get(seq, i):
        return seq[i] if 0 <= i < len(seq) else None

    nspaces = len(top.spaces)
    for l in range(nspaces):
        sq_worst = dc_worst = cd_worst = 0.0
        for point in points:
            pack = top.ctx.pack(point)
            for _ in range(trials):
                x = _random_value(top.spaces[l], pack, order, rng)
                y = _random_value(bot.spaces[l], pack, order, rng)

                # commuting square: K'_l C_l = C_{l+1} K_l
                if l < nspaces - 1:
                    a = _apply(get(bot.nodes, l), _apply(e.C[l], x, point), point)
                    b = _apply(get(e.C, l + 1), top.nodes[l](x, point), point)
                    terms = [t for t in (a, b) if t is not None]
                    if terms:
                        diff = _val_sub(a, b) if a is not None and b is not None \
                            else (a if a is not None else b)
                        sq_worst = max(sq_worst, relative_residual(diff, *terms))

                # D_l C_l = id - K_{l-1} H_{l-1} - H_l K_l
                lhs = _apply(e.D[l], _apply(e.C[l], x, point), point)
                rhs = x
                t1 = None
                if l - 1 >= 0 and get(e.H, l - 1) is not None:
                    t1 = _apply(get(top.nodes, l - 1),
                                _apply(e.H[l - 1], x, point), point)
                t2 = None
                if l < nspaces - 1 and get(e.H, l) is not None:
                    t2 = _apply(get(e.H, l), top.nodes[l](x, point), point)
                for t in (t1, t2):
                    if t is not None:
                        rhs = _val_sub(rhs, t)
                diff = _val_sub(lhs, rhs) if lhs is not None else rhs
                dc_worst = max(dc_worst, relative_residual(diff, x))

                # C_l D_l = id - K'_{l-1} H'_{l-1} - H'_l K'_l
                if y is None:
                    continue
                lhs = _apply(e.C[l], _apply(e.D[l], y, point), point)
                rhs = y
                t1 = None
                if l - 1 >= 0 and get(e.Hprime, l - 1) is not None:
                    t1 = _apply(get(bot.nodes, l - 1),
                                _apply(e.Hprime[l - 1], y, point), point)
                t2 = None
                if l < nspaces - 1 and get(e.Hprime, l) is not None:
                    t2 = _apply(get(e.Hprime, l), bot.nodes[l](y, point), point)
                for t in (t1, t2):
                    if t is not None:
                        rhs = _val_sub(rhs, t)
                diff = _val_sub(lhs, rhs) if lhs is not None else rhs
                cd_worst = max(cd_worst, relative_residual(diff, y))

        if l < nspaces - 1:
            rep.record(f"square {l}: K'{l} C{l} = C{l + 1} K{l}", sq_worst)
        rep.record(f"DC {l}: D{l} C{l} = id - K H - H K", dc_worst)
        rep.record(f"CD {l}: C{l} D{l} = id - K' H' - H' K'", cd_worst)
    return rep


def lift_compatibility(square: EquivalenceData, k1prime: OperatorNode) -> OperatorNode:
    """Continue a one-square equivalence to the next compatibility operator.

    Returns K1 = [id - K0 H0 - D1 C1 ; K'1 C1] acting into the direct sum
    of the top space 1 and the target of K'1.
    """
    top = square.top
    k0 = top.nodes[0]
    c1, d1 = square.C[1], square.D[1]
    h0 = square.H[0] if square.H else None
    v1 = top.spaces[1]
    target = (v1, k1prime.target)

    def fn(x, point):
        first = x
        if h0 is not None and h0.fn is not None:
            first = _val_sub(first, k0.fn(h0.fn(x, point), point))
        first = _val_sub(first, d1.fn(c1.fn(x, point), point))
        second = k1prime.fn(c1.fn(x, point), point)
        return (first, second)

    order = max(k0.order + (h0.order if h0 else 0),
                d1.order + c1.order, k1prime.order + c1.order)
    return OperatorNode("lifted-K1", v1, target, order, fn)


# -- builders ---------------------------------------------------------------------


def _flavor(ctx):
    return getattr(ctx, "flavor", CONFORMAL)


def _scalar_space(ctx):
    return ShapeSpec("", "none", 1.0, _flavor(ctx))


def _sym_space(ctx):
    kind = "sym0" if _flavor(ctx) == CONFORMAL else "sym"
    return ShapeSpec("dd", kind, 1.0, _flavor(ctx))


def _form_space(ctx, k):
    return ShapeSpec("d" * k, "form", 1.0, _flavor(ctx))


def _node_E0(ctx):
    v0, v1 = _scalar_space(ctx), _sym_space(ctx)
    return OperatorNode("E0", v0, v1, 2,
                        lambda x, point: cf.E0(x, ctx.pack(point)))


def _node_dtilde(ctx, k):
    src = _scalar_space(ctx) if k == 0 else _form_space(ctx, k)
    return OperatorNode(f"dtilde{k}", src, _form_space(ctx, k + 1), 1,
                        lambda x, point: cf.d_tilde(
                            x, ctx.pack(point), ctx.obstructions(point).Z))


def _node_C1(ctx):
    return OperatorNode("C1", _sym_space(ctx), _form_space(ctx, 1), 1,
                        lambda x, point: cf.C1(
                            x, ctx.pack(point), ctx.report(point).wbar))


def _node_D1(ctx):
    return OperatorNode("D1", _form_space(ctx, 1), _sym_space(ctx), 1,
                        lambda x, point: cf.D1(
                            x, ctx.pack(point), ctx.obstructions(point).Z))


def _node_H1prime(ctx):
    return OperatorNode("H1'", _form_space(ctx, 2), _form_space(ctx, 1), 1,
                        lambda x, point: cf.H1prime(
                            x, ctx.pack(point), ctx.report(point).wbar,
                            ctx.obstructions(point).Z))


def _classify_chart(ctx, seed=0, samples=3):
    rng = np.random.default_rng(seed)
    verdicts = set()
    for point in sample_points(ctx.chart, samples, rng):
        rep = ctx.report(point)
        if not rep.generic:
            return cf.NOT_GENERIC
        verdicts.add(ctx.obstructions(point).classification)
    if len(verdicts) != 1:
        raise StructuralError(
            f"chart {ctx.chart.name} classifies inconsistently: {verdicts}")
    return verdicts.pop()


def build_bgg_complex(chart, metric_order=VERIFY_METRIC_ORDER):
    """The operator sequence E0, E1, ..., E_{n-2} (a complex on flat charts)."""
    ctx = GeometryContext(chart, metric_order)
    n = chart.dim
    spaces = [_scalar_space(ctx), _sym_space(ctx)]
    nodes = [_node_E0(ctx)]
    for k in range(1, n - 1):
        src = spaces[-1]
        tgt = ShapeSpec("d" * (k + 2), "hook", 1.0, _flavor(ctx))
        def fn(x, point, k=k):
            return cf.Ek(k, x, ctx.pack(point), check=False)
        nodes.append(OperatorNode(f"E{k}", src, tgt, 1, fn))
        spaces.append(tgt)
    return ComplexSpec(f"bgg:{chart.name}", ctx, spaces, nodes)


def build_onesol_complex(chart, metric_order=VERIFY_METRIC_ORDER, seed=0):
    """Compatibility complex + equivalence data, one-solution regime."""
    ctx = GeometryContext(chart, metric_order)
    verdict = _classify_chart(ctx, seed)
    if verdict != cf.ONE_SOLUTION:
        raise StructuralError(
            f"chart {chart.name} classified {verdict}; need {cf.ONE_SOLUTION}")
    return _build_onesol(ctx, f"onesol:{chart.name}")


def _build_onesol(ctx, name):
    n = ctx.chart.dim
    v0, v1 = _scalar_space(ctx), _sym_space(ctx)
    forms = {k: _form_space(ctx, k) for k in range(1, n + 1)}

    e0 = _node_E0(ctx)
    c1, d1, h1p = _node_C1(ctx), _node_D1(ctx), _node_H1prime(ctx)
    dt = {k: _node_dtilde(ctx, k) for k in range(0, n)}

    ident = OperatorNode.identity
    # top row
    t1 = (v1, forms[2])
    t2 = (forms[1], forms[3])
    minus_d1c1 = OperatorNode(
        "id-D1C1", v1, v1, 2,
        lambda x, point: _val_sub(x, d1.fn(c1.fn(x, point), point)))
    k1 = block_node("K1", [[minus_d1c1], [compose(dt[1], c1)]], v1, t1)
    neg_h1p = OperatorNode("-H1'", forms[2], forms[1], 1,
                           lambda x, point: _val_neg(h1p.fn(x, point)))
    k2 = block_node("K2", [[c1, neg_h1p], [None, dt[2]]], t1, t2)
    k3 = block_node("K3", [[None, dt[3]]], t2, forms[4])

    top_spaces = [v0, v1, t1, t2, forms[4]]
    top_nodes = [e0, k1, k2, k3]
    for k in range(4, n):
        top_nodes.append(dt[k])
        top_spaces.append(forms[k + 1])

    bot_spaces = [v0] + [forms[k] for k in range(1, n + 1)]
    bot_nodes = [dt[0]] + [dt[k] for k in range(1, n)]

    top = ComplexSpec(name, ctx, top_spaces, top_nodes)
    bottom = ComplexSpec(f"dtilde:{ctx.chart.name}", ctx, bot_spaces, bot_nodes)

    C = [ident(v0), c1,
         block_node("C2", [[None, ident(forms[2])]], t1, forms[2]),
         block_node("C3", [[None, ident(forms[3])]], t2, forms[3])]
    D = [ident(v0), d1,
         block_node("D2", [[compose(d1, h1p)],
                           [OperatorNode(
                               "id-dtH1'", forms[2], forms[2], 2,
                               lambda x, point: _val_sub(
                                   x, dt[1].fn(h1p.fn(x, point), point)))]],
                    forms[2], t1),
         block_node("D3", [[None], [ident(forms[3])]], forms[3], t2)]
    H = [None,
         block_node("H1", [[ident(v1), None]], t1, v1),
         block_node("H2", [[d1, None],
                           [OperatorNode(
                               "-dt1", forms[1], forms[2], 1,
                               lambda x, point: _val_neg(dt[1].fn(x, point))),
                            None]],
                    t2, t1),
         None]
    Hp = [None, h1p, None, None]
    for k in range(4, n + 1):
        C.append(ident(forms[k]))
        D.append(ident(forms[k]))
        H.append(None)
        Hp.append(None)

    return top, EquivalenceData(top, bottom, C, D, H, Hp)


def build_nosol_complex(chart, metric_order=VERIFY_METRIC_ORDER, seed=0):
    """Length-3 compatibility complex for a chart with no solutions."""
    ctx = GeometryContext(chart, metric_order)
    return _build_nosol(ctx, f"nosol:{chart.name}", seed)


def _build_nosol(ctx, name, seed=0, low_dim=None):
    """Shared no-solution construction; low_dim selects the Cotton route."""
    chart = ctx.chart
    n = chart.dim
    if low_dim is None:
        low_dim = n == 3
    v0 = _scalar_space(ctx)
    if low_dim:
        v1 = _sym_space(ctx)
        e0 = _node_E0(ctx)

        def h0_fn(x, point):
            pack = ctx.pack(point)
            zeta = ctx.cotton_inverse(point)
            d = cf.covariant_derivative(x, pack)
            F = cf._hook_project_last(antisymmetrize(d, (0, 1)) * 2.0, pack)
            out = pair_contract(zeta, F, [(0, 0), (1, 1), (2, 2)])
            return out.with_weight(1.0)

        h0 = OperatorNode("H0", v1, v0, 1, h0_fn)
    else:
        verdict = _classify_chart(ctx, seed)
        if verdict != cf.NO_SOLUTION:
            raise StructuralError(
                f"chart {chart.name} classified {verdict}; need {cf.NO_SOLUTION}")
        v1 = _sym_space(ctx)
        e0 = _node_E0(ctx)
        c1, d1 = _node_C1(ctx), _node_D1(ctx)
        dt1 = _node_dtilde(ctx, 1)

        def h0_fn(x, point):
            pack = ctx.pack(point)
            zeta, eta = ctx.zeta_eta(point)
            c1x = c1.fn(x, point)
            a = dt1.fn(c1x, point)
            b = _val_sub(d1.fn(c1x, point), x)
            out = (pair_contract(zeta, a, [(0, 0), (1, 1)])
                   + pair_contract(eta, b, [(0, 0), (1, 1)]))
            return out.with_weight(1.0)

        h0 = OperatorNode("H0", v1, v0, 2, h0_fn)

    k1 = OperatorNode("id-E0H0", v1, v1, h0.order + 2,
                      lambda x, point: _val_sub(
                          x, e0.fn(h0.fn(x, point), point)))
    top = ComplexSpec(name, ctx, [v0, v1, v1, v0],
                      [e0, k1, h0])

    zero = OperatorNode.zero
    zs = ZERO_SPACE
    bot = ComplexSpec(f"zero:{chart.name}", ctx, [zs, zs, zs, zs],
                      [zero(zs, zs), zero(zs, zs), zero(zs, zs)])
    C = [zero(v0, zs), zero(v1, zs), zero(v1, zs), zero(v0, zs)]
    D = [zero(zs, v0), zero(zs, v1), zero(zs, v1), zero(zs, v0)]
    H = [h0, OperatorNode.identity(v1), e0]
    Hp = [None, None, None]
    return top, EquivalenceData(top, bot, C, D, H, Hp)
