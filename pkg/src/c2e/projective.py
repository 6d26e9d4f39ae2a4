"""Projective differential geometry of special torsion-free connections.

This is the projective mirror of the conformal machinery: a projective
class is represented by the Levi-Civita connection of a metric chart
(optionally reweighted inside its projective class), curvature is split
into the projective Schouten, Cotton and Weyl tensors, and the
second-order operator sigma -> (grad grad + P) sigma -- whose solutions
reweight the connection to a Ricci-flat representative -- gets the same
operator zoo and compatibility complex as its conformal sibling.  The
shared operator code in :mod:`c2e.conformal` branches on the projective
flavor flag, so only the curvature pipeline and the Weyl left inverse
are specific to this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructuralError, NumericError
from .tensors import (TensorJet, tensor_norm, pair_contract, symmetrize,
                      antisymmetrize, tensor_product, scalar_to_jet,
                      random_section, ShapeSpec, PROJECTIVE)
from .geometry import (MetricChart, ConformalScale, jet_matrix_inverse,
                       riemann_from_gamma, contract_ric, covariant_derivative,
                       relative_residual, sample_points, transform_density,
                       DEFAULT_METRIC_ORDER, _christoffel, _volume_form,
                       _MetricOnly)
from . import conformal as cf
from .conformal import GenericityReport, NOT_GENERIC
from . import homology as hm

__all__ = [
    "ProjectiveChart",
    "ProjectivePack",
    "projective_pack",
    "projective_weyl_inversion",
    "E0_proj",
    "ops_proj",
    "ProjectiveContext",
    "build_onesol_proj_complex",
    "projective_suite",
]


# -- charts -------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectiveChart:
    """A representative connection of a projective class.

    The representative is always the Levi-Civita connection of ``base``,
    optionally shifted inside its projective class by an exact 1-form
    Upsilon = d(potential):

        Gamma^c_{ab} -> Gamma^c_{ab} + delta^c_a Ups_b + delta^c_b Ups_a.

    Exactness keeps the connection special (it preserves a volume form),
    so the projective Ricci tensor stays symmetric.
    """

    name: str
    base: MetricChart
    potential: ConformalScale | None = None

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def sample_box(self):
        return self.base.sample_box

    @classmethod
    def from_metric(cls, chart: MetricChart) -> "ProjectiveChart":
        return cls(chart.name, chart)

    def rescaled(self, potential: ConformalScale) -> "ProjectiveChart":
        """The same projective class, seen from a shifted representative."""
        if self.potential is None:
            combo = potential
        else:
            old, new = self.potential, potential

            def fn(point, order):
                return old.at(point, order) + new.at(point, order)

            combo = ConformalScale(f"{old.name}+{new.name}", fn)
        return ProjectiveChart(f"{self.name}^{potential.name}",
                               self.base, combo)

    def upsilon(self, point, order) -> TensorJet:
        """Ups_a = grad_a(potential) as a 1-form jet (zero if unshifted)."""
        n = self.dim
        if self.potential is None:
            return TensorJet.zeros(n, order, "d", flavor=PROJECTIVE)
        phi = self.potential.at(point, order + 1)
        return TensorJet.from_jets([phi.partial(a) for a in range(n)], "d",
                                   flavor=PROJECTIVE)

    def gamma_jets(self, point, metric_order) -> TensorJet:
        """Christoffel symbols of the representative, slots (c, a, b)."""
        g = self.base.metric_jets(point, metric_order)
        gamma = _christoffel(g, jet_matrix_inverse(g))
        if self.potential is None:
            return gamma
        ups = self.upsilon(point, gamma.order)
        eye = np.eye(self.dim)
        corr = (np.einsum("ca,bz->cabz", eye, ups.comps)
                + np.einsum("cb,az->cabz", eye, ups.comps))
        return TensorJet(self.dim, gamma.order, "udd",
                         gamma.comps + corr)


# -- curvature ----------------------------------------------------------------


@dataclass
class ProjectivePack:
    """Projective curvature data of a representative connection at a point."""

    chart: ProjectiveChart
    point: np.ndarray
    gamma: TensorJet     # slots (c, a, b)
    riemann: TensorJet   # R_{ab}{}^c{}_d
    ric: TensorJet
    P: TensorJet         # Ric / (n - 1)
    Y: TensorJet         # Y_{abc} = 2 grad_[b P_c]a
    W: TensorJet         # trace-free part of R, slots (a, b, c, d), "ddud"

    @property
    def dim(self) -> int:
        return self.gamma.dim

    def validate(self, tol=1e-9):
        w = self.W.comps
        checks = {
            "ric symmetric": relative_residual(
                self.ric - symmetrize(self.ric), self.ric),
            "weyl trace ca": float(np.max(np.abs(np.einsum("abaez->bez", w)))),
            "weyl trace cb": float(np.max(np.abs(np.einsum("abbez->aez", w)))),
            "weyl trace cd": float(np.max(np.abs(np.einsum("abccz->abz", w)))),
        }
        scale = 1.0 + tensor_norm(self.riemann)
        bad = {k: v for k, v in checks.items() if v > tol * scale}
        if bad:
            raise NumericError(
                f"projective curvature invariants violated at {self.point}: {bad}")


def projective_pack(pchart: ProjectiveChart, point, order=None,
                    metric_order=DEFAULT_METRIC_ORDER,
                    validate=True) -> ProjectivePack:
    """Compute the projective curvature pipeline at one point."""
    n = pchart.dim
    if n < 2:
        raise StructuralError("projective curvature needs dim >= 2")
    point = np.asarray(point, dtype=float)
    gamma = pchart.gamma_jets(point, metric_order)
    riem = riemann_from_gamma(gamma)
    ric = contract_ric(riem)
    P = TensorJet(n, ric.order, "dd", ric.comps / (n - 1.0), 0.0, PROJECTIVE)
    gradP = covariant_derivative(P, _MetricOnly(None, None, gamma))
    Yb = gradP.move_slot(2, 0)                    # slots (a, b, c) = grad_b P_ca
    Y = TensorJet(n, Yb.order, "ddd",
                  Yb.comps - np.swapaxes(Yb.comps, 1, 2), 0.0, PROJECTIVE)
    eye = np.eye(n)
    pc = P.truncated(riem.order).comps
    wc = (riem.comps
          - np.einsum("ac,bdz->abcdz", eye, pc)
          + np.einsum("bc,adz->abcdz", eye, pc))
    W = TensorJet(n, riem.order, "ddud", wc, 0.0, PROJECTIVE)
    if order is not None:
        order = min(order, Y.order)
        gamma, riem = gamma.truncated(order), riem.truncated(order)
        ric, P = ric.truncated(order), P.truncated(order)
        Y, W = Y.truncated(order), W.truncated(order)
    pack = ProjectivePack(pchart, point, gamma, riem, ric, P, Y, W)
    if validate:
        pack.validate()
    return pack


# -- Weyl left inverse --------------------------------------------------------


def projective_weyl_inversion(pack: ProjectivePack) -> GenericityReport:
    """Left-invert the bundle map tau_c -> W_{ab}{}^c{}_d tau_c.

    The projective Weyl tensor has no canonical metric-style inversion, so
    a least-squares left inverse of the (n^3 x n) contraction matrix is
    always used, promoted to jet coefficients through a Neumann series.
    The result is stored with slots (r, s, t, a) so it contracts against
    3-index objects exactly like the conformal one.
    """
    n = pack.dim
    W = pack.W                                    # slots (a, b, c, d)
    m0 = np.transpose(W.values, (0, 1, 3, 2)).reshape(n ** 3, n)
    sing = np.linalg.svd(m0, compute_uv=False)
    cutoff = max(m0.shape) * np.finfo(float).eps * (sing[0] if sing.size else 0.0)
    rank = int(np.sum(sing > max(cutoff, 1e-12)))
    smallest = float(sing[-1]) if sing.size else 0.0
    if rank < n:
        return GenericityReport(rank, smallest, 0.0, NOT_GENERIC, None)

    # normal matrix N_{ce} = sum_{abd} W[a,b,c,d] W[a,b,e,d], coefficientwise
    w2 = TensorJet(n, W.order, "uudu", W.comps)
    N = pair_contract(W, w2, [(0, 0), (1, 1), (3, 3)])
    det_n = float(np.linalg.det(N.values))
    ninv = jet_matrix_inverse(TensorJet(n, N.order, "ud", N.comps))
    # wbar[r, s, t, a] = sum_c W[r, s, c, t] Ninv[c, a]
    wb = pair_contract(W, TensorJet(n, ninv.order, "dd", ninv.comps), [(2, 0)])
    wbar = TensorJet(n, wb.order, "uuud", wb.comps, 0.0, PROJECTIVE)
    return GenericityReport(rank, smallest, det_n, "least-squares", wbar)


# -- operators ----------------------------------------------------------------


def E0_proj(sigma: TensorJet, pack: ProjectivePack) -> TensorJet:
    """(grad_a grad_b + P_ab) sigma on projective weight-1 densities."""
    if sigma.flavor != PROJECTIVE:
        raise StructuralError("E0_proj expects a projective-flavored density")
    return cf.E0(sigma, pack)


def ops_proj(pack: ProjectivePack) -> dict:
    """The modified operator zoo of a generic projective chart.

    Returns the 1-form Z with its curvature obstructions dZ and Phi(Z e)
    plus closures for d-tilde, D1, C1, Dbar and H1', all sharing the
    flavor-aware implementations of the conformal module.
    """
    report = projective_weyl_inversion(pack)
    if not report.generic:
        raise StructuralError(
            f"projective chart {pack.chart.name} is not generic at {pack.point}")
    ob = cf.obstruction_pack(pack, report)
    Z, wbar = ob.Z, report.wbar
    return {
        "report": report,
        "Z": Z,
        "dZ": ob.dZ,
        "Phi": ob.Phi,
        "classification": ob.classification,
        "dtilde": lambda tau: cf.d_tilde(tau, pack, Z),
        "D1": lambda tau: cf.D1(tau, pack, Z),
        "C1": lambda tau: cf.C1(tau, pack, wbar),
        "Dbar": lambda tau: cf.Dbar(tau, pack, Z),
        "H1prime": lambda psi: cf.H1prime(psi, pack, wbar, Z),
    }


# -- homology harness glue ----------------------------------------------------


class ProjectiveContext(hm.GeometryContext):
    """Per-point cache of projective curvature, inversion and obstructions."""

    flavor = PROJECTIVE

    def pack(self, point):
        key = self._key(point)
        if key not in self._packs:
            self._packs[key] = projective_pack(
                self.chart, point, metric_order=self.metric_order)
        return self._packs[key]

    def report(self, point):
        key = self._key(point)
        if key not in self._reports:
            self._reports[key] = projective_weyl_inversion(self.pack(point))
        return self._reports[key]


def build_onesol_proj_complex(pchart: ProjectiveChart,
                              metric_order=hm.VERIFY_METRIC_ORDER, seed=0):
    """Compatibility complex + equivalence data for a projective chart.

    Dimension >= 3 charts whose obstructions vanish (a Ricci-flat
    representative exists) get the full one-solution construction; a
    two-dimensional chart with nonvanishing projective Cotton tensor is
    routed to the length-3 no-solution construction instead.
    """
    ctx = ProjectiveContext(pchart, metric_order)
    if pchart.dim == 2:
        return hm._build_nosol(ctx, f"lowdim-proj:{pchart.name}", seed,
                               low_dim=True)
    verdict = hm._classify_chart(ctx, seed)
    if verdict != cf.ONE_SOLUTION:
        raise StructuralError(
            f"projective chart {pchart.name} classified {verdict}; "
            f"need {cf.ONE_SOLUTION}")
    return hm._build_onesol(ctx, f"onesol-proj:{pchart.name}")


# -- identity suite -----------------------------------------------------------


def projective_suite(pchart: ProjectiveChart, points=None, potential=None,
                     order=4, seed=0, tol=1e-7, trials=2,
                     metric_order=DEFAULT_METRIC_ORDER):
    """Cross-validate the projective identities numerically on one chart.

    Returns a report dict with per-identity maximum relative residuals
    ("n/a" marks identities needing genericity the chart does not have),
    the overall maximum, and a pass flag against ``tol``.
    """
    rng = np.random.default_rng(seed)
    if points is None:
        points = sample_points(pchart, 3, rng)
    if potential is None:
        potential = ConformalScale.polynomial(pchart.dim, seed=seed + 1,
                                              amplitude=0.1)
    hat_chart = pchart.rescaled(potential)

    res = {}

    def record(name, value):
        res[name] = max(res.get(name, 0.0), value) if value is not None else \
            res.get(name, "n/a")

    n = pchart.dim
    sig_scalar = ShapeSpec("", "none", 1.0, PROJECTIVE)
    sig_sym = ShapeSpec("dd", "sym", 1.0, PROJECTIVE)
    sig_form1 = ShapeSpec("d", "form", 1.0, PROJECTIVE)

    for point in points:
        point = np.asarray(point, dtype=float)
        pack = projective_pack(pchart, point, metric_order=metric_order)
        hat_pack = projective_pack(hat_chart, point, metric_order=metric_order)
        report = projective_weyl_inversion(pack)
        generic = report.generic
        ob = cf.obstruction_pack(pack, report) if generic else None
        hat_report = projective_weyl_inversion(hat_pack)
        hat_ob = (cf.obstruction_pack(hat_pack, hat_report)
                  if hat_report.generic else None)
        ups = ProjectiveChart("shift", pchart.base,
                              potential).upsilon(point, order)

        # parallel volume convention: hat-grad vol = -(n+1) Ups (x) vol
        g = pchart.base.metric_jets(point, metric_order)
        vol = _volume_form(g).with_weight(0.0)
        dvol = covariant_derivative(vol, hat_pack)
        uvol = tensor_product(
            hat_chart.upsilon(point, dvol.order), vol) * (-(n + 1.0))
        record("volume-weight", relative_residual(
            dvol - TensorJet(n, dvol.order, dvol.valence, uvol.comps),
            dvol, uvol))

        for _ in range(trials):
            sigma = random_section(sig_scalar, pack, order, rng)
            tau1 = random_section(sig_form1, pack, order, rng)

            # comp: E1(E0 sigma) = -W_{ab}{}^c{}_d grad_c sigma + Y_{dab} sigma
            e0s = E0_proj(sigma, pack)
            if n >= 3:
                lhs = cf.Ek(1, e0s, pack, check=False)
                grad = covariant_derivative(sigma, pack)
                wterm = -pair_contract(pack.W, grad, [(2, 0)])
                yterm = TensorJet(n, pack.Y.order, "ddd",
                                  np.einsum("cabz->abcz", pack.Y.comps))
                rhs = wterm + (yterm * scalar_to_jet(sigma)).with_weight(
                    wterm.weight)
                record("comp-proj", relative_residual(
                    lhs - rhs.with_weight(lhs.weight), lhs, rhs))

            # invariance of E0 under a change of representative
            hat_sigma = transform_density(sigma, potential, point)
            lhs_i = E0_proj(hat_sigma, hat_pack)
            rhs_i = transform_density(e0s, potential, point)
            record("E0-invariance", relative_residual(
                lhs_i - rhs_i.truncated(lhs_i.order), lhs_i, rhs_i))

            if generic:
                Z, wbar = ob.Z, report.wbar
                dts = cf.d_tilde(sigma, pack, Z)
                lhs1 = cf.D1(dts, pack, Z)
                rhs1 = e0s + (ob.Phi * scalar_to_jet(sigma)).with_weight(
                    e0s.weight)
                record("comm-D1", relative_residual(lhs1 - rhs1, lhs1, rhs1))
                lhs2 = cf.C1(e0s, pack, wbar)
                record("comm-C1", relative_residual(lhs2 - dts, lhs2, dts))

                lhs5 = cf.C1(cf.D1(tau1, pack, Z), pack, wbar)
                h1 = cf.H1prime(cf.d_tilde(tau1, pack, Z), pack, wbar, Z)
                obterm = cf._cd_obstruction_term(wbar, ob, tau1)
                rhs5 = tau1.truncated(lhs5.order) - h1 - obterm.with_weight(1.0)
                record("CDcomp-proj", relative_residual(lhs5 - rhs5, lhs5, rhs5))

                if hat_ob is not None:
                    # Z transforms as Z -> Z - Upsilon
                    zhat = hat_ob.Z
                    shift = ob.Z - TensorJet(n, ups.order, "d", ups.comps,
                                             ob.Z.weight, PROJECTIVE)
                    oo = min(zhat.order, shift.order)
                    record("Ztrans", relative_residual(
                        zhat.truncated(oo) - shift.truncated(oo), zhat, shift))
            else:
                for k in ("comm-D1", "comm-C1", "CDcomp-proj", "Ztrans"):
                    record(k, None)

    worst = max((v for v in res.values() if isinstance(v, float)),
                default=0.0)
    return {"chart": pchart.name, "identities": res,
            "max_residual": worst, "passed": worst <= tol, "tol": tol}
