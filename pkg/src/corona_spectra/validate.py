"""Seeded randomized validation of the algebraic identities.

Shared by the command line verify tasks and the test suite: random band
kernels with mixed coefficient classes, residuals of the product and
involution identities against window matrices, and Fourier round trips.
"""

from __future__ import annotations

import numpy as np

from . import coeff, fourier, groups, kernels


def _random_value(rng) -> complex:
    return complex(rng.normal(), rng.normal())


def _random_leaf(g: groups.GroupSpec, rng, allow_so: bool = True):
    if g.kind == "zn":
        pool = ["constant", "vanishing", "periodic"] + (["so"] if allow_so else [])
        pick = pool[rng.integers(len(pool))]
        if pick == "constant":
            return coeff.Constant(_random_value(rng))
        if pick == "vanishing":
            pts = groups.enumerate_window(g, 2)
            chosen = rng.choice(len(pts), size=min(3, len(pts)), replace=False)
            return coeff.Vanishing(tuple(sorted((pts[i], _random_value(rng))
                                                for i in chosen)))
        if pick == "periodic":
            periods = tuple(int(rng.integers(2, 4)) for _ in range(g.dimension))
            size = int(np.prod(periods))
            return coeff.Periodic(periods, tuple(_random_value(rng)
                                                 for _ in range(size)))
        names = list(coeff.SO_CATALOG)
        name = names[rng.integers(len(names))]
        if coeff.SO_CATALOG[name].dims == 1 and g.dimension != 1:
            name = "sin_sqrt"
        return coeff.so_generator(name, float(rng.uniform(0.5, 2.0)))
    if g.kind == "finite":
        if rng.random() < 0.3:
            return coeff.Constant(_random_value(rng))
        return coeff.FiniteTable(tuple(_random_value(rng)
                                       for _ in range(g.data.order)))
    idx = int(rng.integers(len(g.factors)))
    return coeff.FactorLift(idx, _random_leaf(g.factors[idx], rng, allow_so))


def random_coefficient(g: groups.GroupSpec, rng, depth: int = 2,
                       allow_so: bool = True):
    """Random coefficient symbol mixing leaves through sums, products,
    scalings and translations."""
    if depth <= 0 or rng.random() < 0.4:
        return _random_leaf(g, rng, allow_so)
    combiner = rng.integers(4)
    if combiner == 0:
        return coeff.Sum(tuple(random_coefficient(g, rng, depth - 1, allow_so)
                               for _ in range(2)))
    if combiner == 1:
        return coeff.Product(tuple(random_coefficient(g, rng, depth - 1, allow_so)
                                   for _ in range(2)))
    if combiner == 2:
        return coeff.Scale(_random_value(rng),
                           random_coefficient(g, rng, depth - 1, allow_so))
    window = groups.enumerate_window(g, 1)
    shift = window[rng.integers(len(window))]
    return coeff.Translate(shift, random_coefficient(g, rng, depth - 1, allow_so))


def random_band_kernel(g: groups.GroupSpec, rng, radius: int = 2,
                       n_terms: int = 2, allow_so: bool = True) -> kernels.KernelSymbol:
    """Random band kernel of the given support radius with symbolic
    coefficients drawn from the classes available on the group."""
    window = groups.enumerate_window(g, radius)
    terms = []
    for _ in range(n_terms):
        a = random_coefficient(g, rng, allow_so=allow_so)
        k = int(rng.integers(1, 3))
        chosen = rng.choice(len(window), size=min(k, len(window)), replace=False)
        profile = tuple((window[i], _random_value(rng)) for i in chosen)
        terms.append((a, profile))
    return kernels.kernel(g, terms)


def star_identity_residuals(g: groups.GroupSpec, seed: int = 0,
                            trials: int = 6, radius: int = 1) -> dict:
    """Max residuals of the operator algebra identities on random kernels:
    the adjoint exchange rule for products, the double involution, and the
    window representation of products and adjoints.  `radius` bounds the
    support of the random kernels; windows are sized so that the interior
    of a product window is genuinely unaffected by truncation."""
    rng = np.random.default_rng(seed)
    window = groups.enumerate_window(g, 3 if groups.lattice_dimension(g) else 0)
    out = {"star_exchange": 0.0, "double_involution": 0.0,
           "window_product": 0.0, "window_adjoint": 0.0}
    for _ in range(trials):
        phi = random_band_kernel(g, rng, radius=radius)
        psi = random_band_kernel(g, rng, radius=radius)
        lhs = kernels.involution(kernels.diamond(phi, psi))
        rhs = kernels.diamond(kernels.involution(psi), kernels.involution(phi))
        pts = kernels.support_points(lhs) + kernels.support_points(rhs)
        qs = [window[i] for i in rng.choice(len(window), size=min(5, len(window)),
                                            replace=False)]
        for q in qs:
            for x in pts:
                out["star_exchange"] = max(
                    out["star_exchange"],
                    abs(kernels.kernel_value(lhs, q, x) -
                        kernels.kernel_value(rhs, q, x)))
        dbl = kernels.involution(kernels.involution(phi))
        for q in qs:
            for x in kernels.support_points(phi):
                out["double_involution"] = max(
                    out["double_involution"],
                    abs(kernels.kernel_value(dbl, q, x) -
                        kernels.kernel_value(phi, q, x)))
        wr = 2 * radius + 2 if groups.lattice_dimension(g) else 0
        wphi = kernels.schrodinger_matrix(phi, wr)
        wpsi = kernels.schrodinger_matrix(psi, wr)
        wprod = kernels.schrodinger_matrix(kernels.diamond(phi, psi), wr,
                                           margin=2 * radius if wr else 0)
        inner = wprod.interior_indices()
        prod_err = np.abs(wphi.matrix @ wpsi.matrix - wprod.matrix)
        out["window_product"] = max(out["window_product"],
                                    float(prod_err[np.ix_(inner, inner)].max()))
        wstar = kernels.schrodinger_matrix(kernels.involution(phi), wr)
        istar = wstar.interior_indices()
        adj_err = np.abs(wstar.matrix - wphi.matrix.conj().T)
        out["window_adjoint"] = max(out["window_adjoint"],
                                    float(adj_err[np.ix_(istar, istar)].max()))
    return out


def fourier_residuals(g: groups.GroupSpec, seed: int = 0,
                      trials: int = 6) -> dict:
    """Max residuals of the Fourier calculus: transform round trip,
    Plancherel defect, and the quantization triangle (representing a
    convolution on a window commutes with transform plus quantization)."""
    rng = np.random.default_rng(seed)
    out = {"round_trip": 0.0, "plancherel": 0.0, "quantize_triangle": 0.0}
    if g.kind == "finite":
        dual = fourier.dual_of(g)
        for _ in range(trials):
            u = {x: _random_value(rng) for x in range(g.data.order)}
            back = fourier.inverse_fourier(fourier.fourier(u, g, dual), g)
            out["round_trip"] = max(out["round_trip"],
                                    max(abs(u[x] - back[x]) for x in u))
            out["plancherel"] = max(out["plancherel"],
                                    fourier.plancherel_defect(u, g, dual))
            out["quantize_triangle"] = max(out["quantize_triangle"],
                                           _triangle_residual(u, g, dual))
        return out
    if g.kind == "zn":
        window = groups.enumerate_window(g, 2)
        for _ in range(trials):
            chosen = rng.choice(len(window), size=min(4, len(window)), replace=False)
            u = {window[i]: _random_value(rng) for i in chosen}
            back = fourier.inverse_fourier(fourier.fourier(u, g), g)
            out["round_trip"] = max(out["round_trip"],
                                    max(abs(u[x] - back.get(x, 0j)) for x in u))
            out["plancherel"] = max(out["plancherel"], fourier.plancherel_defect(u, g))
            out["quantize_triangle"] = max(out["quantize_triangle"],
                                           _triangle_residual(u, g, None))
        return out
    raise fourier.UnsupportedGroup("validate lattice or finite groups factor-wise")


def _triangle_residual(u: dict, g: groups.GroupSpec, dual) -> float:
    """Window matrix of convolution by u versus the window matrix of the
    quantized transform of u."""
    field = fourier.fourier(u, g, dual) if dual is not None else fourier.fourier(u, g)
    prof = fourier.op_quantize(field, g)
    radius = 3 if groups.lattice_dimension(g) else 0
    k1 = kernels.kernel(g, [(coeff.Constant(1 + 0j), tuple(u.items()))])
    k2 = kernels.kernel(g, [(coeff.Constant(1 + 0j), tuple(prof.items()))])
    m1 = kernels.schrodinger_matrix(k1, radius).matrix
    m2 = kernels.schrodinger_matrix(k2, radius).matrix
    return float(np.max(np.abs(m1 - m2))) if m1.size else 0.0
