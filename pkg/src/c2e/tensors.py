"""Weighted tensors with jet-valued components.

A TensorJet is a dense array of jet coefficient vectors, one per component,
together with an index valence string ('u'/'d' per slot), a conformal (or
projective) weight, and a flavor flag that controls how much of the index
machinery (metric traces) applies.  Components are trivialized in the
current scale, so a conformal rescaling acts on them by e^{w*Upsilon}.
"""

from __future__ import annotations

import itertools
import math
import string
from dataclasses import dataclass

import numpy as np

from .errors import StructuralError
from .jets import Jet, coeff_mul, diff_table, jet_space_size, mul_table

__all__ = [
    "TensorJet",
    "ShapeSpec",
    "tensor_norm",
    "symmetrize",
    "antisymmetrize",
    "alternate_all",
    "trace",
    "trace_free_part",
    "cartan_project",
    "raise_index",
    "lower_index",
    "kn_product",
    "sym_product",
    "wedge_product",
    "tensor_product",
    "contract",
    "scalar_to_jet",
    "pair_contract",
    "random_section",
]

CONFORMAL = "conformal"
PROJECTIVE = "projective"


class TensorJet:
    """Multi-indexed array of jets with valence and weight bookkeeping."""

    __slots__ = ("dim", "order", "valence", "weight", "flavor", "comps")

    def __init__(self, dim, order, valence, comps, weight=0.0, flavor=CONFORMAL):
        self.dim = dim
        self.order = order
        self.valence = str(valence)
        self.weight = float(weight)
        self.flavor = flavor
        ncoef = jet_space_size(dim, order)
        expected = (dim,) * len(self.valence) + (ncoef,)
        comps = np.asarray(comps)
        if comps.shape != expected:
            raise StructuralError(
                f"component array shape {comps.shape} != expected {expected}"
            )
        self.comps = comps

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, dim, order, valence, weight=0.0, flavor=CONFORMAL, dtype=float):
        shape = (dim,) * len(valence) + (jet_space_size(dim, order),)
        return cls(dim, order, valence, np.zeros(shape, dtype=dtype), weight, flavor)

    @classmethod
    def from_jets(cls, jets, valence, weight=0.0, flavor=CONFORMAL):
        """Assemble from a nested sequence (or object array) of Jet values."""
        arr = np.asarray(jets, dtype=object)
        first = arr.reshape(-1)[0]
        dim, order = first.dim, first.order
        out = np.empty(arr.shape + (jet_space_size(dim, order),), dtype=first.coeffs.dtype)
        for idx in np.ndindex(*arr.shape):
            j = arr[idx]
            if j.dim != dim or j.order != order:
                raise StructuralError("all component jets must share dim and order")
            out[idx] = j.coeffs
        return cls(dim, order, valence, out, weight, flavor)

    @classmethod
    def from_constant(cls, array, dim, order, valence, weight=0.0, flavor=CONFORMAL):
        """Promote a constant numeric array to a jet-valued tensor."""
        array = np.asarray(array)
        out = np.zeros(array.shape + (jet_space_size(dim, order),), dtype=array.dtype)
        out[..., 0] = array
        return cls(dim, order, valence, out, weight, flavor)

    # -- basic structure -----------------------------------------------------

    @property
    def rank(self):
        return len(self.valence)

    @property
    def values(self):
        """Constant-term (point value) array."""
        return self.comps[..., 0]

    def jet(self, *index) -> Jet:
        return Jet(self.dim, self.order, self.comps[index])

    def truncated(self, order):
        if order == self.order:
            return self
        n = jet_space_size(self.dim, order)
        return TensorJet(self.dim, order, self.valence, self.comps[..., :n],
                         self.weight, self.flavor)

    def with_weight(self, weight):
        return TensorJet(self.dim, self.order, self.valence, self.comps,
                         weight, self.flavor)

    def copy(self):
        return TensorJet(self.dim, self.order, self.valence, self.comps.copy(),
                         self.weight, self.flavor)

    def __repr__(self):
        return (f"TensorJet(dim={self.dim}, order={self.order}, "
                f"valence={self.valence!r}, weight={self.weight})")

    # -- linear operations ----------------------------------------------------

    def _match(self, other):
        if self.dim != other.dim:
            raise StructuralError("tensor dimension mismatch")
        if self.valence != other.valence:
            raise StructuralError(
                f"valence mismatch: {self.valence!r} vs {other.valence!r}")
        if self.weight != other.weight:
            raise StructuralError(
                f"weight mismatch: {self.weight} vs {other.weight}")
        return min(self.order, other.order)

    def __add__(self, other):
        oo = self._match(other)
        n = jet_space_size(self.dim, oo)
        return TensorJet(self.dim, oo, self.valence,
                         self.comps[..., :n] + other.comps[..., :n],
                         self.weight, self.flavor)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return TensorJet(self.dim, self.order, self.valence, -self.comps,
                         self.weight, self.flavor)

    def __mul__(self, factor):
        """Multiply by a number or a scalar Jet (componentwise)."""
        if isinstance(factor, Jet):
            if factor.dim != self.dim:
                raise StructuralError("jet/tensor dimension mismatch")
            oo = min(self.order, factor.order)
            comps = coeff_mul(self.comps, factor.coeffs, self.dim,
                              self.order, factor.order)
            return TensorJet(self.dim, oo, self.valence, comps,
                             self.weight, self.flavor)
        return TensorJet(self.dim, self.order, self.valence,
                         self.comps * factor, self.weight, self.flavor)

    __rmul__ = __mul__

    def move_slot(self, src, dst):
        """Reorder index slots (pure permutation, no metric involved)."""
        comps = np.moveaxis(self.comps, src, dst)
        val = list(self.valence)
        val.insert(dst, val.pop(src))
        return TensorJet(self.dim, self.order, "".join(val), comps,
                         self.weight, self.flavor)

    def partial(self, axis):
        """Coordinate derivative of every component; order drops by one."""
        src, fac = diff_table(self.dim, self.order, axis)
        return TensorJet(self.dim, self.order - 1, self.valence,
                         self.comps[..., src] * fac, self.weight, self.flavor)


def scalar_to_jet(t: TensorJet) -> Jet:
    if t.rank != 0:
        raise StructuralError("not a scalar tensor")
    return Jet(t.dim, t.order, t.comps)


def tensor_norm(t) -> float:
    """Max absolute coefficient; tuples (direct sums) take the max of parts."""
    if t is None:
        return 0.0
    if isinstance(t, tuple):
        return max((tensor_norm(p) for p in t), default=0.0)
    return float(np.max(np.abs(t.comps))) if t.comps.size else 0.0


# -- jet-valued einsum -------------------------------------------------------


def _jet_einsum_raw(subs, a, b, dim, oa, ob):
    """einsum on component arrays whose last axis is the jet coefficient axis."""
    in_spec, out_spec = subs.split("->")
    s1, s2 = in_spec.split(",")
    I, J, starts, _ = mul_table(dim, oa, ob)
    big = np.einsum(f"{s1}Z,{s2}Z->{out_spec}Z", a[..., I], b[..., J])
    return np.add.reduceat(big, starts, axis=-1)


def _letters(n, used=""):
    pool = [c for c in string.ascii_lowercase if c not in used]
    return "".join(pool[:n])


def tensor_product(a: TensorJet, b: TensorJet) -> TensorJet:
    if a.dim != b.dim:
        raise StructuralError("tensor dimension mismatch")
    la = _letters(a.rank)
    lb = _letters(b.rank, used=la)
    comps = _jet_einsum_raw(f"{la},{lb}->{la}{lb}", a.comps, b.comps,
                            a.dim, a.order, b.order)
    return TensorJet(a.dim, min(a.order, b.order), a.valence + b.valence,
                     comps, a.weight + b.weight, a.flavor)


def pair_contract(a: TensorJet, b: TensorJet, pairs) -> TensorJet:
    """Contract slots of a against slots of b (must be opposite variance).

    pairs is a list of (slot_in_a, slot_in_b).  Weights add; no metric is
    applied here.
    """
    if a.dim != b.dim:
        raise StructuralError("tensor dimension mismatch")
    la = list(_letters(a.rank))
    lb = list(_letters(b.rank, used="".join(la)))
    for i, j in pairs:
        if {a.valence[i], b.valence[j]} != {"u", "d"}:
            raise StructuralError("contraction requires one up and one down slot")
        lb[j] = la[i]
    out = [c for k, c in enumerate(la) if k not in {i for i, _ in pairs}]
    out += [c for k, c in enumerate(lb) if k not in {j for _, j in pairs}]
    val = "".join(
        [a.valence[k] for k in range(a.rank) if k not in {i for i, _ in pairs}]
        + [b.valence[k] for k in range(b.rank) if k not in {j for _, j in pairs}]
    )
    comps = _jet_einsum_raw(
        f"{''.join(la)},{''.join(lb)}->{''.join(out)}",
        a.comps, b.comps, a.dim, a.order, b.order)
    return TensorJet(a.dim, min(a.order, b.order), val, comps,
                     a.weight + b.weight, a.flavor)


def contract(t: TensorJet, i: int, j: int) -> TensorJet:
    """Contract an up slot against a down slot of the same tensor."""
    if {t.valence[i], t.valence[j]} != {"u", "d"}:
        raise StructuralError("contraction requires one up and one down slot")
    letters = list(_letters(t.rank))
    letters[j] = letters[i]
    out = [c for k, c in enumerate(letters) if k not in (i, j)]
    comps = np.einsum(f"{''.join(letters)}Z->{''.join(out)}Z", t.comps)
    val = "".join(c for k, c in enumerate(t.valence) if k not in (i, j))
    return TensorJet(t.dim, t.order, val, comps, t.weight, t.flavor)


# -- permutation symmetries ---------------------------------------------------


def _permute_sum(t: TensorJet, slots, signed: bool) -> TensorJet:
    variances = {t.valence[s] for s in slots}
    if len(variances) > 1:
        raise StructuralError("cannot (anti)symmetrize slots of mixed variance")
    acc = np.zeros_like(t.comps)
    for perm in itertools.permutations(range(len(slots))):
        sign = _perm_sign(perm) if signed else 1.0
        axes = list(range(t.rank + 1))
        for pos, p in zip(slots, perm):
            axes[pos] = slots[p]
        acc += sign * np.transpose(t.comps, axes)
    acc /= math.factorial(len(slots))
    return TensorJet(t.dim, t.order, t.valence, acc, t.weight, t.flavor)


def _perm_sign(perm) -> float:
    sign = 1.0
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def symmetrize(t: TensorJet, slots=None) -> TensorJet:
    return _permute_sum(t, tuple(slots) if slots else tuple(range(t.rank)), False)


def antisymmetrize(t: TensorJet, slots=None) -> TensorJet:
    return _permute_sum(t, tuple(slots) if slots else tuple(range(t.rank)), True)


def alternate_all(t: TensorJet) -> TensorJet:
    """Total antisymmetrization over every slot."""
    return antisymmetrize(t, tuple(range(t.rank)))


# -- metric operations ---------------------------------------------------------


def _metric_for(variance, pack):
    # contracting two 'd' slots needs the inverse metric and vice versa
    return (pack.ginv, -2.0) if variance == "d" else (pack.g, +2.0)


def trace(t: TensorJet, i: int, j: int, pack) -> TensorJet:
    """Metric trace across two like-variance slots (or plain u-d contraction)."""
    if t.valence[i] != t.valence[j]:
        return contract(t, i, j)
    if t.flavor == PROJECTIVE:
        raise StructuralError("projective tensors have no metric trace")
    metric, dw = _metric_for(t.valence[i], pack)
    out = pair_contract(metric, t, [(0, i), (1, j)])
    return out.with_weight(t.weight + dw)


def trace_free_part(t: TensorJet, pack) -> TensorJet:
    """Remove the metric trace of a symmetric 2-tensor."""
    if t.rank != 2 or t.valence[0] != t.valence[1]:
        raise StructuralError("trace_free_part expects a rank-2 like-variance tensor")
    metric, _ = _metric_for("u" if t.valence == "dd" else "d", pack)
    # metric with matching valence to rebuild the pure-trace part
    gsame = pack.g if t.valence == "dd" else pack.ginv
    tr = trace(t, 0, 1, pack)
    piece = tensor_product(gsame, tr) * (1.0 / t.dim)
    return t - piece.with_weight(t.weight)


def raise_index(t: TensorJet, slot: int, pack) -> TensorJet:
    if t.valence[slot] != "d":
        raise StructuralError("slot already up")
    out = pair_contract(pack.ginv, t, [(1, slot)])
    out = out.move_slot(0, slot)
    val = t.valence[:slot] + "u" + t.valence[slot + 1:]
    return TensorJet(t.dim, out.order, val, out.comps, t.weight - 2.0, t.flavor)


def lower_index(t: TensorJet, slot: int, pack) -> TensorJet:
    if t.valence[slot] != "u":
        raise StructuralError("slot already down")
    out = pair_contract(pack.g, t, [(1, slot)])
    out = out.move_slot(0, slot)
    val = t.valence[:slot] + "d" + t.valence[slot + 1:]
    return TensorJet(t.dim, out.order, val, out.comps, t.weight + 2.0, t.flavor)


# -- the Cartan (hook) projection ----------------------------------------------


def cartan_project(t: TensorJet, pack=None, flavor=None, check=True) -> TensorJet:
    """Project a (k antisymmetric slots) + 1 tensor onto the hook subspace.

    The result is annihilated by total antisymmetrization and, for the
    conformal flavor, by every metric trace.  Exact rational coefficients,
    so the projection is idempotent to roundoff.
    """
    flavor = flavor or t.flavor
    k = t.rank - 1
    if k < 1:
        raise StructuralError("hook projection needs rank >= 2")
    if check and k >= 2:
        anti = antisymmetrize(t, tuple(range(k)))
        if tensor_norm(t - anti) > 1e-9 * (1.0 + tensor_norm(t)):
            raise StructuralError("input not antisymmetric in its first k slots")
    hook = t - alternate_all(t)
    if flavor == PROJECTIVE:
        return hook
    if pack is None:
        raise StructuralError("conformal hook projection needs metric data")
    # trace over (first form slot, extra slot), an antisymmetric (k-1)-form
    tau = trace(hook, 0, k, pack)
    corr = TensorJet.zeros(t.dim, min(tau.order, pack.g.order), t.valence,
                           weight=t.weight, flavor=t.flavor,
                           dtype=t.comps.dtype)
    for i in range(k):
        # g_{a_i b} tau_{a_1 .. (skip i) .. a_k} with alternating sign
        piece = tensor_product(pack.g, tau).with_weight(t.weight)
        # slots: (a_i, b, remaining form slots); move into place
        piece = piece.move_slot(1, k)          # extra slot to the end
        piece = piece.move_slot(0, i)          # paired form slot to position i
        corr += ((-1.0) ** i) * piece
    return hook - corr * (1.0 / (t.dim - k + 1.0))


# -- the algebraic products used by the null-frame analysis ---------------------


def sym_product(a: TensorJet, b: TensorJet) -> TensorJet:
    """(AB)_{pr} = A_(p B_r) for two 1-tensors."""
    if a.rank != 1 or b.rank != 1:
        raise StructuralError("sym_product expects two 1-tensors")
    return symmetrize(tensor_product(a, b))


def kn_product(a: TensorJet, b: TensorJet) -> TensorJet:
    """Kulkarni-Nomizu product of two symmetric 2-tensors."""
    if a.rank != 2 or b.rank != 2:
        raise StructuralError("kn_product expects two 2-tensors")
    ab = tensor_product(a, b)  # slots p r q s -> want A_pr B_qs etc.
    t = ab.move_slot(1, 2)     # now (p, q, r, s) with A on (p, r), B on (q, s)
    out = (t.comps
           - np.swapaxes(t.comps, 0, 1)
           - np.swapaxes(t.comps, 2, 3)
           + np.swapaxes(np.swapaxes(t.comps, 0, 1), 2, 3))
    return TensorJet(a.dim, t.order, t.valence, out, t.weight, t.flavor)


def wedge_product(a: TensorJet, b: TensorJet) -> TensorJet:
    """(A ^ B)_{pqr} = A_{pr} B_q - A_{qr} B_p for symmetric A."""
    if a.rank != 2 or b.rank != 1:
        raise StructuralError("wedge_product expects a 2-tensor and a 1-tensor")
    ab = tensor_product(a, b)      # slots (p, r, q)
    t = ab.move_slot(2, 1)         # (p, q, r)
    out = t.comps - np.swapaxes(t.comps, 0, 1)
    return TensorJet(a.dim, t.order, t.valence, out, t.weight, t.flavor)


# -- bundle labels ----------------------------------------------------------------


@dataclass(frozen=True)
class ShapeSpec:
    """Label of a tensor bundle: valence, symmetry type and weight.

    symmetry is one of 'none', 'sym0' (trace-free symmetric), 'sym'
    (symmetric, projective flavor), 'form' (antisymmetric), or 'hook'
    (k-form slots plus one extra slot, Cartan-projected).
    """

    valence: str
    symmetry: str
    weight: float
    flavor: str = CONFORMAL

    def __post_init__(self):
        if self.symmetry not in ("none", "sym0", "sym", "form", "hook"):
            raise StructuralError(f"unknown symmetry tag {self.symmetry!r}")
        if self.symmetry in ("sym0", "sym") and len(self.valence) != 2:
            raise StructuralError("symmetric 2-tensor tag needs two slots")
        if self.symmetry == "hook" and len(self.valence) < 2:
            raise StructuralError("hook tag needs at least two slots")

    @property
    def rank(self):
        return len(self.valence)

    def matches(self, t: TensorJet) -> bool:
        return (t.valence == self.valence
                and abs(t.weight - self.weight) < 1e-12
                and t.flavor == self.flavor)

    def project(self, t: TensorJet, pack) -> TensorJet:
        """Project an arbitrary tensor onto this bundle's symmetry subspace."""
        if self.symmetry == "none":
            out = t
        elif self.symmetry == "sym":
            out = symmetrize(t)
        elif self.symmetry == "sym0":
            out = trace_free_part(symmetrize(t), pack)
        elif self.symmetry == "form":
            out = antisymmetrize(t)
        else:
            out = cartan_project(antisymmetrize(t, tuple(range(self.rank - 1))),
                                 pack, flavor=self.flavor, check=False)
        return TensorJet(t.dim, out.order, self.valence, out.comps,
                         self.weight, self.flavor)


def random_section(spec: ShapeSpec, pack, order: int, rng) -> TensorJet:
    """Draw a random jet-valued section of the bundle labelled by spec.

    Coefficients are i.i.d. uniform on [-1, 1], then projected onto the
    symmetry subspace so the result genuinely lies in the bundle.
    """
    dim = pack.dim
    n = jet_space_size(dim, order)
    comps = rng.uniform(-1.0, 1.0, (dim,) * spec.rank + (n,))
    raw = TensorJet(dim, order, spec.valence, comps, spec.weight, spec.flavor)
    return spec.project(raw, pack)
