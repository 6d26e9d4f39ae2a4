"""Double-null frames and the algebra of 4D Lorentzian Weyl tensors.

Pointwise (order-zero) linear algebra: double-null frames {l, n, m, mbar}
with their boost/spin weights, the five complex Newman-Penrose scalars of
a Weyl-type tensor, a reconstruction formula inverting them, the Petrov
filtration, quadratic and cubic scalar invariants, and the 16x4 matrix of
the contraction map v -> W(v) acting into the hook bundle.  This is where
the failure of canonical Weyl inversions in Lorentzian signature becomes
computable: Type III tensors have every polynomial scalar invariant zero
yet stay generic as long as Psi3 != 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructuralError, NumericError

__all__ = [
    "NullFrame",
    "make_frame",
    "canonical_frame",
    "frame_from_orthonormal",
    "frame_metric",
    "NPScalars",
    "np_scalars",
    "reconstruct_weyl",
    "quadratic_invariant",
    "np_quadratic",
    "cubic_invariants",
    "petrov_classify",
    "PETROV_TYPES",
    "hook_basis",
    "weyl_map_matrix",
    "genericity_rank",
    "check_weyl_symmetries",
]

FRAME_TOL = 1e-10


# -- frames -------------------------------------------------------------------


@dataclass(frozen=True)
class NullFrame:
    """A double-null frame {l, n, m, mbar} with its covariant metric.

    l and n are real null vectors, m is complex null with conjugate mbar;
    the only nonvanishing products are g(l, n) = 1 and g(m, mbar) = -1.
    Boost/spin weights: |l| = (1, 0), |n| = (-1, 0), |m| = (0, 1),
    |mbar| = (0, -1).
    """

    l: np.ndarray
    n: np.ndarray
    m: np.ndarray
    g: np.ndarray            # covariant metric, 4x4 real symmetric

    @property
    def mbar(self) -> np.ndarray:
        return np.conj(self.m)

    @property
    def ginv(self) -> np.ndarray:
        return np.linalg.inv(self.g)

    def product(self, u, v) -> complex:
        return u @ self.g @ v

    def lowered(self):
        """Covariant frame vectors (l_a, n_a, m_a, mbar_a)."""
        return (self.g @ self.l, self.g @ self.n,
                self.g @ self.m, self.g @ self.mbar)

    def boost(self, lam: float) -> "NullFrame":
        """l -> lam l, n -> n / lam; preserves all frame relations."""
        return NullFrame(lam * self.l, self.n / lam, self.m, self.g)

    def rotate(self, theta: float) -> "NullFrame":
        """m -> e^{i theta} m; preserves all frame relations."""
        return NullFrame(self.l, self.n, np.exp(1j * theta) * self.m, self.g)


def make_frame(l, n, m, g=None, tol=FRAME_TOL) -> NullFrame:
    """Build a frame from explicit vectors, enforcing the product relations.

    When no metric is supplied, the unique metric making the products
    axiomatic is reconstructed from the frame itself (the contravariant
    Gram combination l n + n l - m mbar - mbar m, inverted).
    """
    l = np.asarray(l, dtype=float)
    n = np.asarray(n, dtype=float)
    m = np.asarray(m, dtype=complex)
    if g is None:
        mb = np.conj(m)
        gup = (np.outer(l, n) + np.outer(n, l)
               - np.outer(m, mb) - np.outer(mb, m))
        if np.abs(gup.imag).max() > tol:
            raise StructuralError("frame vectors do not span a real metric")
        g = np.linalg.inv(gup.real)
    g = np.asarray(g, dtype=float)
    f = NullFrame(l, n, m, g)
    _validate_products(f, tol)
    return f


def _validate_products(f: NullFrame, tol=FRAME_TOL):
    pairs = {
        "g(l,l)": (f.l, f.l, 0.0), "g(n,n)": (f.n, f.n, 0.0),
        "g(m,m)": (f.m, f.m, 0.0), "g(l,m)": (f.l, f.m, 0.0),
        "g(n,m)": (f.n, f.m, 0.0), "g(l,n)": (f.l, f.n, 1.0),
        "g(m,mbar)": (f.m, f.mbar, -1.0),
    }
    bad = {}
    for name, (u, v, want) in pairs.items():
        got = f.product(u, v)
        if abs(got - want) > tol:
            bad[name] = got
    if bad:
        raise StructuralError(f"frame product relations violated: {bad}")


def canonical_frame() -> NullFrame:
    """The standard flat double-null frame.

    Built from the orthonormal basis of a constant diagonal metric; the
    product axioms g(l, n) = 1, g(m, mbar) = -1 force the signature
    (+, -, -, -), so that is the diagonal used.
    """
    g = np.diag([1.0, -1.0, -1.0, -1.0])
    e = np.eye(4)
    return frame_from_orthonormal(e, g)


def frame_from_orthonormal(basis, g, tol=FRAME_TOL) -> NullFrame:
    """Double-null frame from a g-orthonormal basis (e0 timelike).

    l = (e0 + e1)/sqrt2, n = (e0 - e1)/sqrt2, m = (e2 + i e3)/sqrt2.
    """
    e = np.asarray(basis, dtype=float)
    s = 1.0 / np.sqrt(2.0)
    l = s * (e[0] + e[1])
    n = s * (e[0] - e[1])
    m = s * (e[2] + 1j * e[3])
    f = NullFrame(l, n, m, np.asarray(g, dtype=float))
    _validate_products(f, tol)
    return f


def frame_metric(f: NullFrame) -> np.ndarray:
    """g_ab = l_a n_b + n_a l_b - m_a mbar_b - mbar_a m_b."""
    lo, no, mo, mb = f.lowered()
    g = (np.outer(lo, no) + np.outer(no, lo)
         - np.outer(mo, mb) - np.outer(mb, mo))
    if np.abs(g.imag).max() > FRAME_TOL * (1.0 + np.abs(g).max()):
        raise NumericError("frame metric has a spurious imaginary part")
    return g.real


# -- Newman-Penrose scalars ---------------------------------------------------


@dataclass(frozen=True)
class NPScalars:
    """The five complex scalars parametrizing a Weyl-type tensor."""

    psi0: complex
    psi1: complex
    psi2: complex
    psi3: complex
    psi4: complex

    def as_tuple(self):
        return (self.psi0, self.psi1, self.psi2, self.psi3, self.psi4)

    @classmethod
    def from_sequence(cls, seq) -> "NPScalars":
        vals = [complex(v) for v in seq]
        if len(vals) != 5:
            raise StructuralError("need exactly 5 Newman-Penrose scalars")
        return cls(*vals)

    def max_abs(self) -> float:
        return max(abs(v) for v in self.as_tuple())


def check_weyl_symmetries(W, ginv, tol=1e-9):
    """Assert the Riemann permutation symmetries and total tracelessness."""
    W = np.asarray(W)
    scale = 1.0 + np.abs(W).max()
    checks = {
        "antisymmetry pq": np.abs(W + W.transpose(1, 0, 2, 3)).max(),
        "antisymmetry rs": np.abs(W + W.transpose(0, 1, 3, 2)).max(),
        "pair symmetry": np.abs(W - W.transpose(2, 3, 0, 1)).max(),
        "first bianchi": np.abs(W + W.transpose(0, 2, 3, 1)
                                + W.transpose(0, 3, 1, 2)).max(),
        "trace": np.abs(np.einsum("pr,pqrs->qs", ginv, W)).max(),
    }
    bad = {k: float(v) for k, v in checks.items() if v > tol * scale}
    if bad:
        raise StructuralError(f"tensor lacks Weyl symmetries: {bad}")


def np_scalars(W, f: NullFrame, check=True) -> NPScalars:
    """Contract a covariant Weyl-type tensor to its five NP scalars."""
    W = np.asarray(W)
    if check:
        check_weyl_symmetries(W, f.ginv)
    l, n, m, mb = f.l, f.n, f.m, f.mbar

    def c(a, b, cc, d):
        return -np.einsum("pqrs,p,q,r,s->", W, a, b, cc, d)

    return NPScalars(
        psi0=complex(c(l, m, l, m)),
        psi1=complex(c(l, n, l, m)),
        psi2=complex(c(l, m, mb, n)),
        psi3=complex(c(l, n, mb, n)),
        psi4=complex(c(n, mb, n, mb)),
    )


def _sym2(a, b):
    return 0.5 * (np.outer(a, b) + np.outer(b, a))


def _kn(A, B):
    """Kulkarni-Nomizu product of symmetric 2-tensors."""
    return (np.einsum("pr,qs->pqrs", A, B) - np.einsum("qr,ps->pqrs", A, B)
            - np.einsum("ps,qr->pqrs", A, B) + np.einsum("qs,pr->pqrs", A, B))


def reconstruct_weyl(psi: NPScalars, f: NullFrame) -> np.ndarray:
    """Covariant Weyl-type tensor with the given NP scalars in frame f.

    Assembled from Kulkarni-Nomizu products of frame covectors, one block
    per boost weight.  The boost-weight-zero block is driven by Psi2 (the
    printed source shows Psi0 there, but only Psi2 makes the round trip
    np_scalars(reconstruct_weyl(psi)) == psi the identity, which is the
    arbiter used here).
    """
    lo, no, mo, mb = f.lowered()
    p0, p1, p2, p3, p4 = psi.as_tuple()
    c0, c1, c3, c4 = np.conj(p0), np.conj(p1), np.conj(p3), np.conj(p4)

    W = (
        - p0 * _kn(_sym2(no, no), _sym2(mb, mb))
        - c0 * _kn(_sym2(no, no), _sym2(mo, mo))
        + 2 * p1 * (_kn(_sym2(no, no), _sym2(lo, mb))
                    + _kn(_sym2(no, mo), _sym2(mb, mb)))
        + 2 * c1 * (_kn(_sym2(no, no), _sym2(lo, mo))
                    + _kn(_sym2(no, mb), _sym2(mo, mo)))
        - (p2 + np.conj(p2)) * (_kn(_sym2(lo, lo), _sym2(no, no))
                                + _kn(_sym2(mo, mo), _sym2(mb, mb))
                                - 2 * _kn(_sym2(lo, no), _sym2(mo, mb)))
        + 2 * (p2 - np.conj(p2)) * (_kn(_sym2(lo, mo), _sym2(no, mb))
                                    - _kn(_sym2(lo, mb), _sym2(no, mo)))
        + 2 * c3 * (_kn(_sym2(lo, lo), _sym2(no, mb))
                    + _kn(_sym2(lo, mo), _sym2(mb, mb)))
        + 2 * p3 * (_kn(_sym2(lo, lo), _sym2(no, mo))
                    + _kn(_sym2(lo, mb), _sym2(mo, mo)))
        - c4 * _kn(_sym2(lo, lo), _sym2(mb, mb))
        - p4 * _kn(_sym2(lo, lo), _sym2(mo, mo))
    )
    if np.abs(W.imag).max() > 1e-12 * (1.0 + np.abs(W).max()):
        raise NumericError("reconstructed tensor has an imaginary part")
    return W.real


# -- scalar invariants --------------------------------------------------------


def quadratic_invariant(W, f: NullFrame) -> float:
    """|W|^2 = W_pqrs W^pqrs by brute-force metric contraction."""
    gi = f.ginv
    Wup = np.einsum("pa,qb,rc,sd,abcd->pqrs", gi, gi, gi, gi, W)
    return float(np.einsum("pqrs,pqrs->", np.asarray(W), Wup).real)


def np_quadratic(psi: NPScalars) -> float:
    """|W|^2 from the scalars: 16 Re(Psi0 Psi4 - 4 Psi1 Psi3 + 3 Psi2^2)."""
    p0, p1, p2, p3, p4 = psi.as_tuple()
    return float(16.0 * np.real(p0 * p4 - 4.0 * p1 * p3 + 3.0 * p2 ** 2))


def cubic_invariants(W, f: NullFrame) -> dict:
    """The quadratic tensor W2_abcd, cubic map V3_a^b and its trace.

    W2_abcd = W_rsab W^rs_cd and V3_a^b = W_rs^tb W^rs_pq W^pq_ta.  When
    |W|^2 = 0 the cubic map is forced to be pure trace,
    V3_a^b = 1/4 V3_r^r delta_a^b.
    """
    W = np.asarray(W)
    gi = f.ginv
    Wud = np.einsum("ra,sb,abcd->rscd", gi, gi, W)        # W^{rs}{}_{cd}
    W2 = np.einsum("rsab,rscd->abcd", W, Wud)
    Wlu = np.einsum("tc,bd,rscd->rstb", gi, gi, W)        # W_{rs}{}^{tb}
    V3 = np.einsum("rstb,rspq,pqta->ab", Wlu, Wud, Wud)   # V3_a^b
    return {"W2": W2, "V3": V3, "trace": float(np.trace(V3).real)}


# -- Petrov filtration --------------------------------------------------------


PETROV_TYPES = ("G", "I", "II", "III", "N", "O")


def petrov_classify(psi: NPScalars, tol=1e-10) -> str:
    """Deepest filtration level holding within tol, relative to the frame.

    I: psi0 = 0; II: also psi1 = 0; III: also psi2 = 0; N: also psi3 = 0;
    O: all scalars vanish.  "G" marks an algebraically general tensor
    satisfying no filtration condition.
    """
    vals = psi.as_tuple()
    scale = max(1.0, psi.max_abs())
    zero = [abs(v) <= tol * scale for v in vals]
    if all(zero):
        return "O"
    if zero[0] and zero[1] and zero[2] and zero[3]:
        return "N"
    if zero[0] and zero[1] and zero[2]:
        return "III"
    if zero[0] and zero[1]:
        return "II"
    if zero[0]:
        return "I"
    return "G"


# -- hook basis and the contraction matrix -------------------------------------


def _wedge(A, b):
    """(A ^ b)_pqr = A_pr b_q - A_qr b_p for symmetric A."""
    return (np.einsum("pr,q->pqr", A, b) - np.einsum("qr,p->pqr", A, b))


def hook_basis(f: NullFrame):
    """16 basis tensors of the hook bundle, ordered by boost weight.

    Each element is annihilated by symmetrization of the first two slots,
    by total antisymmetrization and by the metric trace over the outer
    slots; they are grouped from boost weight -2 up to +2, row major.
    """
    lo, no, mo, mb = f.lowered()
    ll, nn = _sym2(lo, lo), _sym2(no, no)
    mm, mbmb = _sym2(mo, mo), _sym2(mb, mb)
    lm, lmb = _sym2(lo, mo), _sym2(lo, mb)
    nm, nmb = _sym2(no, mo), _sym2(no, mb)
    basis = [
        # boost weight -2
        _wedge(nn, mb), _wedge(nn, mo),
        # boost weight -1
        _wedge(mbmb, no),
        2 * _wedge(nm, mb) + _wedge(nn, lo),
        2 * _wedge(nmb, mo) + _wedge(nn, lo),
        _wedge(mm, no),
        # boost weight 0
        2 * _wedge(lmb, no) + _wedge(mbmb, mo),
        2 * _wedge(nmb, lo) + _wedge(mbmb, mo),
        2 * _wedge(lm, no) + _wedge(mm, mb),
        2 * _wedge(nm, lo) + _wedge(mm, mb),
        # boost weight +1
        _wedge(mbmb, lo),
        2 * _wedge(lm, mb) + _wedge(ll, no),
        2 * _wedge(lmb, mo) + _wedge(ll, no),
        _wedge(mm, lo),
        # boost weight +2
        _wedge(ll, mb), _wedge(ll, mo),
    ]
    return basis


BOOST_WEIGHTS = (-2, -2, -1, -1, -1, -1, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2)


def _hook_membership(h, gi, tol=1e-10):
    scale = 1.0 + np.abs(h).max()
    checks = {
        "sym part": np.abs(h + h.transpose(1, 0, 2)).max(),
        "total antisym": np.abs(h + h.transpose(1, 2, 0)
                                + h.transpose(2, 0, 1)).max() / 3.0,
        "trace": np.abs(np.einsum("pr,pqr->q", gi, h)).max(),
    }
    return {k: float(v) for k, v in checks.items() if v > tol * scale}


def weyl_map_matrix(W, f: NullFrame, tol=1e-9) -> np.ndarray:
    """16x4 matrix of v -> W_pqrs v^s in the hook basis.

    Input components are ordered (v_n, v_mbar, v_m, v_l); rows follow
    hook_basis.  Raises a structural error when the image fails to lie in
    the span of the basis (a symmetry violation in W).
    """
    W = np.asarray(W)
    basis = hook_basis(f)
    gi = f.ginv
    B = np.stack([b.reshape(-1) for b in basis], axis=1)   # 64 x 16
    cols = []
    for v in (f.n, f.mbar, f.m, f.l):
        h = np.einsum("pqrs,s->pqr", W, v)
        bad = _hook_membership(h, gi, tol)
        if bad:
            raise StructuralError(
                f"contraction image is not in the hook bundle: {bad}")
        coeff, res, *_ = np.linalg.lstsq(B, h.reshape(-1), rcond=None)
        resid = np.linalg.norm(B @ coeff - h.reshape(-1))
        if resid > tol * (1.0 + np.linalg.norm(h)):
            raise StructuralError(
                f"contraction image is outside the hook basis span "
                f"(residual {resid:.2e})")
        cols.append(coeff)
    return np.stack(cols, axis=1)


def genericity_rank(W, f: NullFrame, tol=None) -> int:
    """Rank of the contraction map v -> W(v), via singular values."""
    M = weyl_map_matrix(W, f)
    sing = np.linalg.svd(M, compute_uv=False)
    if sing.size == 0 or sing[0] == 0.0:
        return 0
    cutoff = tol if tol is not None else max(M.shape) * np.finfo(float).eps
    return int(np.sum(sing > cutoff * sing[0]))
