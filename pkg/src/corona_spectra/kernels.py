"""Kernels of band operators with symbolic coefficients.

A kernel is a finite sum of dyads  Phi(q; x) = sum_j a_j(q) * phi_j(x)
with a_j a coefficient symbol and phi_j finitely supported.  The module
implements the noncommutative product induced by operator composition,
the involution induced by the adjoint, window matrices of the represented
operators, and the limit kernels along quasi-orbits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import coeff, groups
from .errors import GroupError, MarginError, TermCapExceeded

TERM_CAP = 10000


@dataclass(frozen=True)
class KernelSymbol:
    group: groups.GroupSpec
    terms: tuple  # ((coefficient, profile), ...), profile = ((element, value), ...)
    tail_bound: float = 0.0  # always 0 for these finite-band kernels


def kernel(g: groups.GroupSpec, terms, tail_bound: float = 0.0) -> KernelSymbol:
    """Build a canonical kernel from (coefficient, profile) pairs.

    Profiles accept dicts or (element, value) iterables; equal coefficient
    symbols are merged, zero coefficients and empty profiles dropped."""
    merged = {}
    order = []
    for a, profile in terms:
        a = coeff.simplify(a, g)
        if a == coeff.Constant(0j):
            continue
        if isinstance(profile, dict):
            items = profile.items()
        else:
            items = profile
        cleaned = {}
        for element, value in items:
            groups.check_element(g, element)
            value = complex(value)
            if value != 0:
                cleaned[element] = cleaned.get(element, 0j) + value
        cleaned = {e: v for e, v in cleaned.items() if v != 0}
        if not cleaned:
            continue
        if a not in merged:
            merged[a] = {}
            order.append(a)
        for e, v in cleaned.items():
            merged[a][e] = merged[a].get(e, 0j) + v
    out = []
    for a in order:
        profile = tuple(sorted(((e, v) for e, v in merged[a].items() if v != 0),
                               key=lambda ev: repr(ev[0])))
        if profile:
            out.append((a, profile))
    out.sort(key=lambda term: (repr(term[0]), repr(term[1])))
    return KernelSymbol(group=g, terms=tuple(out), tail_bound=float(tail_bound))


def identity_kernel(g: groups.GroupSpec) -> KernelSymbol:
    return kernel(g, [(coeff.Constant(1 + 0j), ((groups.identity_of(g), 1 + 0j),))])


def scale_kernel(phi: KernelSymbol, lam: complex) -> KernelSymbol:
    lam = complex(lam)
    return kernel(phi.group, [(coeff.Scale(lam, a), profile) for a, profile in phi.terms],
                  tail_bound=abs(lam) * phi.tail_bound)


def add_kernels(phi: KernelSymbol, psi: KernelSymbol) -> KernelSymbol:
    if not groups.group_equal(phi.group, psi.group):
        raise GroupError("kernel sum across different groups")
    return kernel(phi.group, list(phi.terms) + list(psi.terms),
                  tail_bound=phi.tail_bound + psi.tail_bound)


def shift_kernel(phi: KernelSymbol, z, amplitude: complex = 1.0) -> KernelSymbol:
    """Right-compose with amplitude * delta_z (profiles get translated)."""
    g = phi.group
    out = []
    for a, profile in phi.terms:
        moved = tuple((groups.multiply(g, e, z), complex(amplitude) * v)
                      for e, v in profile)
        out.append((a, moved))
    return kernel(g, out, tail_bound=abs(complex(amplitude)) * phi.tail_bound)


def kernel_value(phi: KernelSymbol, q, x) -> complex:
    out = 0j
    for a, profile in phi.terms:
        pv = 0j
        for e, v in profile:
            if e == x:
                pv += v
        if pv != 0:
            out += coeff.evaluate(a, q, phi.group) * pv
    return out


def diamond(phi: KernelSymbol, psi: KernelSymbol,
            term_cap: int = TERM_CAP) -> KernelSymbol:
    """Kernel of the composed operators:
    (phi <> psi)(q; x) = sum_y phi(q; y) psi(y^-1 q; y^-1 x)."""
    if not groups.group_equal(phi.group, psi.group):
        raise GroupError("kernel product across different groups")
    g = phi.group
    budget = 0
    for a, pa in phi.terms:
        for b, pb in psi.terms:
            budget += len(pa)
    if budget * max((len(pb) for _, pb in psi.terms), default=0) > term_cap:
        raise TermCapExceeded(
            f"diamond product would expand past {term_cap} elementary terms")
    out = []
    for a, pa in phi.terms:
        for b, pb in psi.terms:
            for y, vy in pa:
                moved_profile = tuple((groups.multiply(g, y, z), vy * vz)
                                      for z, vz in pb)
                out.append((coeff.Product((a, coeff.translate(b, y))), moved_profile))
    return kernel(g, out)


def involution(phi: KernelSymbol) -> KernelSymbol:
    """Kernel of the adjoint operator:
    phi*(q; x) = conj(phi(x^-1 q; x^-1))."""
    g = phi.group
    out = []
    for a, profile in phi.terms:
        ca = coeff.conjugate(a)
        for z, v in profile:
            zi = groups.inverse(g, z)
            out.append((coeff.translate(ca, zi), ((zi, complex(v).conjugate()),)))
    return kernel(g, out)


def is_formally_selfadjoint(phi: KernelSymbol) -> bool:
    return involution(phi).terms == phi.terms


def support_points(phi: KernelSymbol) -> list:
    pts = set()
    for _, profile in phi.terms:
        for e, _ in profile:
            pts.add(e)
    return sorted(pts, key=repr)


def support_radius(phi: KernelSymbol) -> int:
    return max((groups.element_radius(phi.group, e) for e in support_points(phi)),
               default=0)


def l1_majorant(phi: KernelSymbol) -> float:
    """sup_q sum_x |phi(q; x)| bounded coefficient-wise; dominates the
    operator norm on l2."""
    total = phi.tail_bound
    for a, profile in phi.terms:
        total += coeff.sup_bound(a) * sum(abs(v) for _, v in profile)
    return total


def constant_profile(phi: KernelSymbol):
    """Collapse an all-constant-coefficient kernel to one convolution
    profile {element: value}; None when a coefficient is not constant."""
    out = {}
    for a, profile in phi.terms:
        if not isinstance(a, coeff.Constant):
            return None
        for e, v in profile:
            out[e] = out.get(e, 0j) + complex(a.value) * v
    return {e: v for e, v in out.items() if v != 0}


def limit_kernel(phi: KernelSymbol, q: coeff.QuasiOrbitSpec,
                 verify: bool = True) -> KernelSymbol:
    """Asymptotic kernel along the quasi-orbit: coefficients are replaced
    by their verified limits, profiles are untouched."""
    g = phi.group
    out = []
    for a, profile in phi.terms:
        la = coeff.asymptotic_coefficient(a, q, g, verify=verify)
        out.append((la, profile))
        verify = False  # the probe tail is checked once per kernel
    return kernel(g, out, tail_bound=phi.tail_bound)


def coefficient_class(phi: KernelSymbol) -> coeff.CoeffClass:
    out = coeff.CoeffClass.CONSTANT
    for a, _ in phi.terms:
        out = coeff.join_class(out, coeff.coeff_class(a))
    return out


# ---------------------------------------------------------------------------
# window matrices


@dataclass
class OperatorMatrix:
    """Finite section of the represented operator on a centered window."""

    group: groups.GroupSpec
    radius: int
    margin: int
    window: tuple
    index: dict
    matrix: np.ndarray
    interior: np.ndarray        # rows whose band is fully inside the window
    hermitian_defect: float
    hermitian: bool = field(init=False)

    def __post_init__(self):
        self.hermitian = self.hermitian_defect <= 1e-12

    @property
    def size(self) -> int:
        return len(self.window)

    def interior_indices(self) -> np.ndarray:
        return np.nonzero(self.interior)[0]


def schrodinger_matrix(phi: KernelSymbol, radius: int,
                       margin: int = None) -> OperatorMatrix:
    """Matrix of the operator (A u)(q) = sum_x phi(q; x) u(x^-1 q) on the
    centered window of the given radius: M[q, y] = phi(q; q y^-1).

    The margin must dominate the kernel support radius so that every row
    marked interior is complete (no band truncation)."""
    g = phi.group
    srad = support_radius(phi)
    if margin is None:
        margin = srad
    if margin < srad:
        raise MarginError(f"margin {margin} below the kernel support radius {srad}")
    if margin > radius:
        raise MarginError(f"margin {margin} exceeds the window radius {radius}")
    window = groups.enumerate_window(g, radius)
    index = {e: i for i, e in enumerate(window)}
    n = len(window)
    m = np.zeros((n, n), dtype=complex)
    for a, profile in phi.terms:
        avals = np.array([coeff.evaluate(a, q, g) for q in window], dtype=complex)
        for s, v in profile:
            si = groups.inverse(g, s)
            for i, q in enumerate(window):
                y = groups.multiply(g, si, q)
                j = index.get(y)
                if j is not None:
                    m[i, j] += avals[i] * v
    interior = np.array([groups.element_radius(g, q) <= radius - margin
                         for q in window], dtype=bool)
    defect = float(np.max(np.abs(m - m.conj().T))) if n else 0.0
    return OperatorMatrix(group=g, radius=radius, margin=margin, window=window,
                          index=index, matrix=m, interior=interior,
                          hermitian_defect=defect)


def conv_matrix(profile, g: groups.GroupSpec, radius: int) -> np.ndarray:
    """Window matrix of plain convolution by the profile (constant
    coefficient 1)."""
    phi = kernel(g, [(coeff.Constant(1 + 0j), profile)])
    return schrodinger_matrix(phi, radius, margin=support_radius(phi)).matrix


def band_arrays(phi: KernelSymbol, n_half: int):
    """Diagonal bands of the window matrix on Z for banded eigensolvers.

    Returns (offsets, bands) where bands[d][j] multiplies u[j - offsets[d]]
    in row j, on the window -n_half..n_half."""
    g = phi.group
    if g.kind != "zn" or g.dimension != 1:
        raise GroupError("band arrays are one-dimensional-lattice only")
    n = 2 * n_half + 1
    qs = np.arange(-n_half, n_half + 1)
    diags = {}
    for a, profile in phi.terms:
        avals = np.array([coeff.evaluate(a, (int(q),), g) for q in qs], dtype=complex)
        for (s,), v in profile:
            # row i couples to column j with q_i - q_j = s
            diags.setdefault(int(s), np.zeros(n, dtype=complex))
            diags[int(s)] += avals * v
    offsets = sorted(diags)
    return offsets, [diags[d] for d in offsets]


def dense_from_bands(offsets, bands) -> np.ndarray:
    n = len(bands[0]) if bands else 0
    m = np.zeros((n, n), dtype=complex)
    for s, diag in zip(offsets, bands):
        for i in range(n):
            j = i - s
            if 0 <= j < n:
                m[i, j] += diag[i]
    return m


# ---------------------------------------------------------------------------
# JSON encoding


def kernel_from_json(data, g: groups.GroupSpec) -> KernelSymbol:
    terms = []
    for entry in data:
        a = coeff.coeff_from_json(entry["coeff"], g)
        profile = tuple((groups.element_from_json(g, p["element"]),
                         coeff._cx(p["value"])) for p in entry["profile"])
        terms.append((a, profile))
    return kernel(g, terms)


def kernel_to_json(phi: KernelSymbol) -> list:
    out = []
    for a, profile in phi.terms:
        out.append({
            "coeff": coeff.coeff_to_json(a, phi.group),
            "profile": [{"element": groups.element_to_json(phi.group, e),
                         "value": [v.real, v.imag]} for e, v in profile],
        })
    return out
