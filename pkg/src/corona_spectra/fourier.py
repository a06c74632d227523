"""Fourier calculus on lattice and finite groups.

Lattice transforms are exact trigonometric polynomials (coefficients are
carried symbolically, no quadrature).  Finite-group transforms run through
validated irreducible representation tables.  The symbol range of an
abelian convolution feeds the spectral routes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import groups, kernels
from .errors import DualDataError, NonAbelianGroup, UnsupportedGroup
from .sets import Interval, SpectralSet, set_union, spectral_set


# ---------------------------------------------------------------------------
# trig polynomials (exact dual objects of lattice groups)


@dataclass
class TrigPoly:
    """sum_x c[x] e^{-i theta . x} with exact coefficients."""

    dimension: int
    coeffs: dict = field(default_factory=dict)  # tuple -> complex

    def cleaned(self) -> "TrigPoly":
        return TrigPoly(self.dimension,
                        {x: v for x, v in self.coeffs.items() if v != 0})

    def add(self, other: "TrigPoly") -> "TrigPoly":
        out = dict(self.coeffs)
        for x, v in other.coeffs.items():
            out[x] = out.get(x, 0j) + v
        return TrigPoly(self.dimension, out).cleaned()

    def mul(self, other: "TrigPoly") -> "TrigPoly":
        out = {}
        for x, vx in self.coeffs.items():
            for y, vy in other.coeffs.items():
                z = tuple(a + b for a, b in zip(x, y))
                out[z] = out.get(z, 0j) + vx * vy
        return TrigPoly(self.dimension, out).cleaned()

    def value(self, theta) -> complex:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        out = 0j
        for x, v in self.coeffs.items():
            out += v * np.exp(-1j * float(np.dot(theta, x)))
        return complex(out)

    def evaluate_grid(self, grid: int) -> np.ndarray:
        """Values on the uniform torus grid theta_k = 2 pi k / grid (all
        dimensions), flattened."""
        axes = [np.arange(grid) * (2 * math.pi / grid)] * self.dimension
        mesh = np.meshgrid(*axes, indexing="ij") if axes else []
        total = np.zeros([grid] * self.dimension, dtype=complex)
        for x, v in self.coeffs.items():
            phase = np.zeros([grid] * self.dimension)
            for axis, xi in enumerate(x):
                if xi:
                    phase = phase + mesh[axis] * xi
            total = total + v * np.exp(-1j * phase)
        return total.ravel()

    def lipschitz_bound(self) -> float:
        """Certified Lipschitz constant in the max-norm on the torus."""
        return float(sum(abs(v) * sum(abs(c) for c in x)
                         for x, v in self.coeffs.items()))

    def is_real_symbol(self, tol: float = 0.0) -> bool:
        """True when the symbol is real valued, i.e. c(-x) == conj(c(x))."""
        for x, v in self.coeffs.items():
            mx = tuple(-c for c in x)
            w = self.coeffs.get(mx, 0j)
            if abs(w - v.conjugate()) > tol:
                return False
        return True


# ---------------------------------------------------------------------------
# dual data of finite groups


@dataclass
class DualData:
    group: groups.GroupSpec
    kind: str                   # "torus" | "finite"
    irreps: tuple = ()


def dual_of(g: groups.GroupSpec) -> DualData:
    """Validated dual object: the torus for lattices, the irreducible
    representation table for finite groups."""
    if g.kind == "zn":
        return DualData(group=g, kind="torus")
    if g.kind == "finite":
        irreps = g.data.irreps
        if not irreps:
            raise DualDataError(f"group {g.data.name} carries no representation table")
        _validate_irreps(g, irreps)
        return DualData(group=g, kind="finite", irreps=tuple(irreps))
    raise UnsupportedGroup("duals of product groups are handled factor-wise")


def _validate_irreps(g: groups.GroupSpec, irreps) -> None:
    order = g.data.order
    table = g.data.table
    total = 0
    for idx, rep in enumerate(irreps):
        mats = np.asarray(rep.matrices)
        d = rep.dim
        if mats.shape != (order, d, d):
            raise DualDataError(f"irrep {idx}: matrix stack shape {mats.shape}")
        eye = np.eye(d)
        if np.max(np.abs(mats[g.data.identity] - eye)) > 1e-12:
            raise DualDataError(f"irrep {idx}: identity element not mapped to identity")
        herm = np.max(np.abs(np.einsum("xij,xkj->xik", mats, mats.conj()) - eye))
        if herm > 1e-12:
            raise DualDataError(f"irrep {idx}: matrices not unitary (defect {herm:.2e})")
        comp = mats[table]                       # comp[x, y] = rep(x y)
        prod = np.einsum("xij,yjk->xyik", mats, mats)
        if np.max(np.abs(comp - prod)) > 1e-12:
            raise DualDataError(f"irrep {idx}: not a homomorphism")
        # irreducibility: the commutant must be the scalars
        ident = np.eye(d)
        blocks = [np.kron(ident, m) - np.kron(m.T, ident) for m in mats]
        a = np.concatenate(blocks, axis=0)
        sv = np.linalg.svd(a, compute_uv=False)
        null_dim = int(np.sum(sv < 1e-9))
        if null_dim != 1:
            raise DualDataError(f"irrep {idx}: reducible (commutant dimension {null_dim})")
        total += d * d
    if total != order:
        raise DualDataError(
            f"representation table incomplete: sum of squares {total} != order {order}")
    chars = np.array([[np.trace(np.asarray(rep.matrices)[x]) for x in range(order)]
                      for rep in irreps])
    gram = chars @ chars.conj().T / order
    if np.max(np.abs(gram - np.eye(len(irreps)))) > 1e-9:
        raise DualDataError("characters are not orthonormal: duplicated or wrong irreps")


# ---------------------------------------------------------------------------
# transforms


@dataclass
class OperatorField:
    """Matrix-valued function on the finite dual: one block per irrep."""

    dual: DualData
    blocks: tuple  # ndarray per irrep


def _as_map(u, g: groups.GroupSpec) -> dict:
    if isinstance(u, dict):
        return u
    return {x: u[x] for x in range(g.data.order)}


def fourier(u, g: groups.GroupSpec, dual: DualData = None):
    """Transform of a finitely supported function: u_hat(xi) =
    sum_x u(x) xi(x)^*; a TrigPoly on lattices, an OperatorField on
    finite groups."""
    if g.kind == "zn":
        out = {}
        for x, v in _as_map(u, g).items():
            v = complex(v)
            if v != 0:
                out[x] = out.get(x, 0j) + v
        return TrigPoly(g.dimension, out).cleaned()
    if g.kind == "finite":
        dual = dual or dual_of(g)
        blocks = []
        for rep in dual.irreps:
            mats = np.asarray(rep.matrices)
            acc = np.zeros((rep.dim, rep.dim), dtype=complex)
            for x, v in _as_map(u, g).items():
                acc += complex(v) * mats[x].conj().T  # xi(x)^* = xi(x^-1)
            blocks.append(acc)
        return OperatorField(dual=dual, blocks=tuple(blocks))
    raise UnsupportedGroup("transform product-group data factor-wise")


def inverse_fourier(field, g: groups.GroupSpec) -> dict:
    """Exact inverse: coefficient extraction on lattices, the Peter-Weyl
    reconstruction u(x) = sum_xi (d_xi/|G|) Tr[xi(x) u_hat(xi)] on finite
    groups."""
    if g.kind == "zn":
        if not isinstance(field, TrigPoly):
            raise DualDataError("lattice symbols must be trig polynomials")
        return dict(field.cleaned().coeffs)
    if g.kind == "finite":
        dual = field.dual
        order = g.data.order
        out = {}
        for x in range(order):
            acc = 0j
            for rep, block in zip(dual.irreps, field.blocks):
                mats = np.asarray(rep.matrices)
                acc += rep.dim / order * np.trace(mats[x] @ block)
            out[x] = acc
        return out
    raise UnsupportedGroup("transform product-group data factor-wise")


def op_quantize(field, g: groups.GroupSpec):
    """Convolution profile of the operator with the given symbol; the
    quantization inverts `fourier` exactly, so representing the profile on
    a window commutes with the transform."""
    return inverse_fourier(field, g)


def plancherel_norm(field, g: groups.GroupSpec) -> float:
    if isinstance(field, TrigPoly):
        return math.sqrt(sum(abs(v) ** 2 for v in field.coeffs.values()))
    order = g.data.order
    total = 0.0
    for rep, block in zip(field.dual.irreps, field.blocks):
        total += rep.dim / order * float(np.sum(np.abs(block) ** 2))
    return math.sqrt(total)


def plancherel_defect(u, g: groups.GroupSpec, dual: DualData = None) -> float:
    """| ||u||_2 - ||u_hat||_Plancherel | for validation runs."""
    space = math.sqrt(sum(abs(complex(v)) ** 2 for v in _as_map(u, g).values()))
    freq = plancherel_norm(fourier(u, g, dual), g)
    return abs(space - freq)


# ---------------------------------------------------------------------------
# symbol ranges of abelian convolutions


def _abelian_characters(f: groups.GroupSpec) -> np.ndarray:
    """Character table rows (num_chars, order) of a finite abelian factor."""
    if not groups.is_abelian(f):
        raise NonAbelianGroup(f"{f.data.name} is not abelian")
    dual = dual_of(f)
    rows = []
    for rep in dual.irreps:
        if rep.dim != 1:
            raise NonAbelianGroup(f"{f.data.name} has a higher-dimensional irrep")
        rows.append(np.asarray(rep.matrices)[:, 0, 0])
    return np.array(rows)


def conv_symbol_range(profile, g: groups.GroupSpec, grid: int = 4096) -> SpectralSet:
    """Spectrum of convolution by the profile on an abelian group, through
    the range of its Fourier symbol.

    Real symbols give exact interval primitives per finite character (the
    torus is connected); complex symbols give grid clouds with a certified
    Lipschitz resolution.  Pure finite duals are exact point sets."""
    if isinstance(profile, dict):
        items = list(profile.items())
    else:
        items = list(profile)
    factors = groups.factor_list(g)
    torus_dims = sum(f.dimension for f in factors if f.kind == "zn")
    fin_factors = [f for f in factors if f.kind == "finite"]
    for f in fin_factors:
        if not groups.is_abelian(f):
            raise NonAbelianGroup("symbol ranges need an abelian group")

    char_rows = [_abelian_characters(f) for f in fin_factors]
    combos = [()]
    for rows in char_rows:
        combos = [c + (i,) for c in combos for i in range(len(rows))]

    # one trig polynomial per finite character combination
    polys = {c: {} for c in combos}
    for e, v in items:
        v = complex(v)
        if v == 0:
            continue
        zs, fins = groups.split_element(g, e)
        for c in combos:
            w = v
            for slot, (rows, fi) in enumerate(zip(char_rows, fins)):
                w = w * rows[c[slot]][fi].conjugate()
            polys[c][zs] = polys[c].get(zs, 0j) + w

    pieces = []
    symbol_real = all(TrigPoly(torus_dims, p).is_real_symbol(1e-15)
                      for p in polys.values()) if torus_dims else None
    for c in combos:
        tp = TrigPoly(torus_dims, polys[c]).cleaned()
        if torus_dims == 0:
            val = sum(tp.coeffs.values()) if tp.coeffs else 0j
            pieces.append(spectral_set(points=[val]))
            continue
        vals = tp.evaluate_grid(grid)
        h = 2 * math.pi / grid
        res = tp.lipschitz_bound() * h / 2
        if symbol_real:
            vr = vals.real
            pieces.append(spectral_set(
                intervals=(Interval(float(vr.min()), float(vr.max())),),
                resolution=res))
        else:
            pieces.append(spectral_set(points=vals, resolution=res))
    if not pieces:
        return spectral_set(points=[0j])
    return set_union(*pieces)
