"""Symbolic coefficient algebra on a group.

Coefficients are immutable expression trees over a small set of leaves
(constants, vanishing functions, a fixed catalog of slowly oscillating
generators, periodic tables, finite-group tables, factor lifts) closed
under translation, sums, products and scalar multiples.  Behaviour at
infinity is extracted through explicitly constructed escape probes whose
convergence is verified numerically against certified envelopes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import groups
from .errors import (DivergentProbe, GroupError, IncommensurablePeriods,
                     NotSlowlyOscillating, UnsupportedAlgebraPattern)
from .sets import Interval, spectral_set

RESIDUE_CAP = 4096


class CoeffClass(enum.Enum):
    CONSTANT = "constant"
    VANISHING = "vanishing"
    SLOWLY_OSC = "slowly_oscillating"
    PERIODIC = "periodic"
    PERIODIC_SO = "periodic_so"


def join_class(c1: CoeffClass, c2: CoeffClass) -> CoeffClass:
    if c1 == c2:
        return c1
    pair = {c1, c2}
    if CoeffClass.CONSTANT in pair:
        (other,) = pair - {CoeffClass.CONSTANT}
        return other
    if pair == {CoeffClass.VANISHING, CoeffClass.SLOWLY_OSC}:
        return CoeffClass.SLOWLY_OSC
    # anything mixing the periodic and oscillating worlds lands in their span
    return CoeffClass.PERIODIC_SO


# ---------------------------------------------------------------------------
# symbol nodes


@dataclass(frozen=True)
class Constant:
    value: complex


@dataclass(frozen=True)
class Vanishing:
    """Finitely supported values and/or a certified power-decay envelope
    amplitude / (1 + |x|_1) ** power."""

    support: tuple = ()  # ((element, value), ...)
    decay: tuple = None  # (amplitude, power) or None


@dataclass(frozen=True)
class SlowlyOscillating:
    name: str
    scale: float = 1.0


@dataclass(frozen=True)
class Periodic:
    periods: tuple  # per lattice dimension
    table: tuple    # row-major over residues, length prod(periods)


@dataclass(frozen=True)
class FiniteTable:
    values: tuple   # one value per finite-group element


@dataclass(frozen=True)
class Translate:
    shift: object   # group element
    child: object


@dataclass(frozen=True)
class Sum:
    children: tuple


@dataclass(frozen=True)
class Product:
    children: tuple


@dataclass(frozen=True)
class Scale:
    factor: complex
    child: object


@dataclass(frozen=True)
class FactorLift:
    """A function of a single factor of a product group."""

    index: int
    child: object


def ssum(*children):
    return Sum(tuple(children))


def sprod(*children):
    return Product(tuple(children))


# ---------------------------------------------------------------------------
# slowly oscillating catalog
#
# Every generator is real valued with certified metadata: value bound,
# cluster set at infinity, probe style, exact limits and a convergence
# envelope computable from the actual probe point.


def _norm2(x) -> float:
    return math.sqrt(sum(float(c) * float(c) for c in x))


class _SoEntry:
    def __init__(self, kind, dims, func, bound, cluster, limit):
        self.kind = kind      # "signed" | "phase" | "radial"
        self.dims = dims      # 1 or None (any)
        self.func = func
        self.bound = bound
        self.cluster = cluster
        self.limit = limit


SO_CATALOG = {
    "arctan": _SoEntry(
        kind="signed", dims=1,
        func=lambda x, s: math.atan(x[0] / s),
        bound=lambda s: math.pi / 2,
        cluster=lambda s: ("points", (-math.pi / 2, math.pi / 2)),
        limit=lambda direction, phase, s: math.copysign(math.pi / 2, direction[0]),
    ),
    "sin_sqrt": _SoEntry(
        kind="phase", dims=None,
        func=lambda x, s: math.sin(s * math.sqrt(_norm2(x))),
        bound=lambda s: 1.0,
        cluster=lambda s: ("interval", -1.0, 1.0),
        limit=lambda direction, phase, s: math.sin(phase),
    ),
    "arctan_radial": _SoEntry(
        kind="radial", dims=None,
        func=lambda x, s: math.atan(_norm2(x) / s),
        bound=lambda s: math.pi / 2,
        cluster=lambda s: ("points", (math.pi / 2,)),
        limit=lambda direction, phase, s: math.pi / 2,
    ),
}


def so_generator(name: str, scale: float = 1.0) -> SlowlyOscillating:
    if name not in SO_CATALOG:
        raise NotSlowlyOscillating(f"unknown slowly oscillating generator {name!r}")
    if scale <= 0:
        raise NotSlowlyOscillating("generator scale must be positive")
    return SlowlyOscillating(name=name, scale=float(scale))


def _so_envelope(leaf: SlowlyOscillating, probe: Probe, k: int, x) -> float | None:
    """Certified bound on |leaf(x_k) - limit|, or None when the probe style
    cannot pin this generator down (spread test then applies)."""
    entry = SO_CATALOG[leaf.name]
    if entry.kind == "signed":
        return 4.0 * leaf.scale / max(1.0, abs(float(x[0])))
    if entry.kind == "radial":
        return 4.0 * leaf.scale / max(1.0, _norm2(x))
    if probe.rule != "phase" or abs(probe.phase_scale - leaf.scale) > 1e-12:
        return None
    target = 2 * math.pi * k + probe.phase
    return 4.0 * abs(leaf.scale * math.sqrt(_norm2(x)) - target) + 1e-12


# ---------------------------------------------------------------------------
# evaluation


@lru_cache(maxsize=512)
def _support_map(leaf: Vanishing):
    return dict(leaf.support)


def evaluate(a, q, g: groups.GroupSpec) -> complex:
    """Pointwise value of the symbol at a group element."""
    if isinstance(a, Constant):
        return complex(a.value)
    if isinstance(a, Vanishing):
        val = _support_map(a).get(q, 0.0)
        if a.decay is not None:
            amp, power = a.decay
            zs, _ = groups.split_element(g, q)
            val = val + amp / (1.0 + sum(abs(c) for c in zs)) ** power
        return complex(val)
    if isinstance(a, SlowlyOscillating):
        if g.kind != "zn":
            raise GroupError("slowly oscillating leaves live on lattice groups; "
                             "wrap them in FactorLift on products")
        entry = SO_CATALOG[a.name]
        if entry.dims == 1 and g.dimension != 1:
            raise GroupError(f"{a.name} is one-dimensional")
        return complex(entry.func(q, a.scale))
    if isinstance(a, Periodic):
        if g.kind != "zn" or len(a.periods) != g.dimension:
            raise GroupError("periodic table does not match the lattice dimension")
        idx = 0
        for c, p in zip(q, a.periods):
            idx = idx * p + (c % p)
        return complex(a.table[idx])
    if isinstance(a, FiniteTable):
        if g.kind != "finite" or len(a.values) != g.data.order:
            raise GroupError("finite table does not match the group order")
        return complex(a.values[q])
    if isinstance(a, Translate):
        return evaluate(a.child, groups.multiply(g, groups.inverse(g, a.shift), q), g)
    if isinstance(a, Sum):
        return sum((evaluate(c, q, g) for c in a.children), 0j)
    if isinstance(a, Product):
        out = 1.0 + 0j
        for c in a.children:
            out *= evaluate(c, q, g)
        return out
    if isinstance(a, Scale):
        return complex(a.factor) * evaluate(a.child, q, g)
    if isinstance(a, FactorLift):
        if g.kind != "product" or not 0 <= a.index < len(g.factors):
            raise GroupError("factor lift outside a matching product group")
        return evaluate(a.child, q[a.index], g.factors[a.index])
    raise TypeError(f"not a coefficient symbol: {a!r}")


def sup_bound(a) -> float:
    """Cheap certified bound on sup |a|."""
    if isinstance(a, Constant):
        return abs(a.value)
    if isinstance(a, Vanishing):
        best = max((abs(v) for _, v in a.support), default=0.0)
        if a.decay is not None:
            best += a.decay[0]
        return best
    if isinstance(a, SlowlyOscillating):
        return SO_CATALOG[a.name].bound(a.scale)
    if isinstance(a, (Periodic, FiniteTable)):
        vals = a.table if isinstance(a, Periodic) else a.values
        return max((abs(v) for v in vals), default=0.0)
    if isinstance(a, Translate):
        return sup_bound(a.child)
    if isinstance(a, Sum):
        return sum(sup_bound(c) for c in a.children)
    if isinstance(a, Product):
        out = 1.0
        for c in a.children:
            out *= sup_bound(c)
        return out
    if isinstance(a, Scale):
        return abs(a.factor) * sup_bound(a.child)
    if isinstance(a, FactorLift):
        return sup_bound(a.child)
    raise TypeError(f"not a coefficient symbol: {a!r}")


def conjugate(a):
    """Complex conjugate of the symbol (catalog generators are real)."""
    if isinstance(a, Constant):
        return Constant(complex(a.value).conjugate())
    if isinstance(a, Vanishing):
        return Vanishing(tuple((e, complex(v).conjugate()) for e, v in a.support), a.decay)
    if isinstance(a, SlowlyOscillating):
        return a
    if isinstance(a, Periodic):
        return Periodic(a.periods, tuple(complex(v).conjugate() for v in a.table))
    if isinstance(a, FiniteTable):
        return FiniteTable(tuple(complex(v).conjugate() for v in a.values))
    if isinstance(a, Translate):
        return Translate(a.shift, conjugate(a.child))
    if isinstance(a, Sum):
        return Sum(tuple(conjugate(c) for c in a.children))
    if isinstance(a, Product):
        return Product(tuple(conjugate(c) for c in a.children))
    if isinstance(a, Scale):
        return Scale(complex(a.factor).conjugate(), conjugate(a.child))
    if isinstance(a, FactorLift):
        return FactorLift(a.index, conjugate(a.child))
    raise TypeError(f"not a coefficient symbol: {a!r}")


def coeff_class(a) -> CoeffClass:
    """Behaviour class at infinity, derived through the lattice rules
    (vanishing is an ideal, slow oscillation is an algebra)."""
    if isinstance(a, Constant):
        return CoeffClass.CONSTANT
    if isinstance(a, Vanishing):
        return CoeffClass.VANISHING
    if isinstance(a, SlowlyOscillating):
        return CoeffClass.SLOWLY_OSC
    if isinstance(a, (Periodic, FiniteTable)):
        return CoeffClass.PERIODIC
    if isinstance(a, (Translate, Scale, FactorLift)):
        return coeff_class(a.child)
    if isinstance(a, Sum):
        out = CoeffClass.CONSTANT
        for c in a.children:
            out = join_class(out, coeff_class(c))
        return out
    if isinstance(a, Product):
        classes = [coeff_class(c) for c in a.children]
        if CoeffClass.VANISHING in classes:
            return CoeffClass.VANISHING
        out = CoeffClass.CONSTANT
        for c in classes:
            out = join_class(out, c)
        return out
    raise TypeError(f"not a coefficient symbol: {a!r}")


# ---------------------------------------------------------------------------
# translation and simplification


def translate(a, y):
    """Left translation [l_y a](x) = a(y^-1 x), collapsed where that needs
    no group table (lattice shifts)."""
    if isinstance(a, Constant):
        return a
    if isinstance(y, tuple) and all(isinstance(c, int) for c in y):
        if all(c == 0 for c in y):
            return a
        if isinstance(a, Periodic) and len(y) == len(a.periods):
            return _shift_periodic(a, y)
        if isinstance(a, Vanishing) and a.decay is None and _flat_support(a):
            shifted = tuple((tuple(s + t for s, t in zip(e, y)), v) for e, v in a.support)
            return Vanishing(tuple(sorted(shifted)), None)
    if isinstance(a, Sum):
        return Sum(tuple(translate(c, y) for c in a.children))
    if isinstance(a, Product):
        return Product(tuple(translate(c, y) for c in a.children))
    if isinstance(a, Scale):
        return Scale(a.factor, translate(a.child, y))
    return Translate(y, a)


def _flat_support(a: Vanishing) -> bool:
    return all(isinstance(e, tuple) and all(isinstance(c, int) for c in e)
               for e, _ in a.support)


def _shift_periodic(a: Periodic, y: tuple) -> Periodic:
    # [l_y a](x) = a(x - y): new_table[r] = table[(r - y) mod periods]
    size = math.prod(a.periods)
    new = [0j] * size
    for idx in range(size):
        rem, coords = idx, []
        for p in reversed(a.periods):
            coords.append(rem % p)
            rem //= p
        coords.reverse()
        src = 0
        for c, t, p in zip(coords, y, a.periods):
            src = src * p + ((c - t) % p)
        new[idx] = complex(a.table[src])
    return Periodic(a.periods, tuple(new))


def simplify(a, g: groups.GroupSpec):
    """Canonical form: constants folded, zero terms dropped, translations
    pushed down and collapsed where the group arithmetic allows it."""
    if isinstance(a, Constant):
        return Constant(complex(a.value))
    if isinstance(a, Vanishing):
        support = tuple(sorted((e, complex(v)) for e, v in a.support if v != 0))
        if not support and a.decay is None:
            return Constant(0j)
        return Vanishing(support, a.decay)
    if isinstance(a, (SlowlyOscillating, FiniteTable)):
        return a
    if isinstance(a, Periodic):
        return Periodic(tuple(int(p) for p in a.periods),
                        tuple(complex(v) for v in a.table))
    if isinstance(a, Translate):
        child = simplify(a.child, g)
        y = a.shift
        if y == groups.identity_of(g) or isinstance(child, Constant):
            return child
        if isinstance(child, Translate):
            return simplify(Translate(groups.multiply(g, y, child.shift), child.child), g)
        if isinstance(child, Sum):
            return simplify(Sum(tuple(Translate(y, c) for c in child.children)), g)
        if isinstance(child, Product):
            return simplify(Product(tuple(Translate(y, c) for c in child.children)), g)
        if isinstance(child, Scale):
            return simplify(Scale(child.factor, Translate(y, child.child)), g)
        if isinstance(child, FactorLift) and g.kind == "product":
            return simplify(FactorLift(child.index,
                                       Translate(y[child.index], child.child)), g)
        if isinstance(child, Periodic) and g.kind == "zn":
            return _shift_periodic(child, y)
        if isinstance(child, Vanishing) and child.decay is None:
            shifted = tuple(sorted((groups.multiply(g, y, e), complex(v))
                                   for e, v in child.support))
            return simplify(Vanishing(shifted, None), g)
        if isinstance(child, FiniteTable) and g.kind == "finite":
            inv_y = groups.inverse(g, y)
            vals = tuple(child.values[groups.multiply(g, inv_y, x)]
                         for x in range(g.data.order))
            return FiniteTable(vals)
        return Translate(y, child)
    if isinstance(a, Sum):
        flat, const = [], 0j
        for c in a.children:
            c = simplify(c, g)
            if isinstance(c, Sum):
                for cc in c.children:
                    if isinstance(cc, Constant):
                        const += cc.value
                    else:
                        flat.append(cc)
            elif isinstance(c, Constant):
                const += c.value
            else:
                flat.append(c)
        if const != 0 or not flat:
            flat.append(Constant(const))
        flat.sort(key=repr)  # pointwise addition commutes: canonical order
        return flat[0] if len(flat) == 1 else Sum(tuple(flat))
    if isinstance(a, Product):
        flat, scalar = [], 1.0 + 0j
        for c in a.children:
            c = simplify(c, g)
            if isinstance(c, Constant):
                scalar *= c.value
            elif isinstance(c, Scale):
                scalar *= c.factor
                flat.append(c.child)
            elif isinstance(c, Product):
                flat.extend(c.children)
            else:
                flat.append(c)
        if scalar == 0 or not flat:
            return Constant(scalar if not flat else 0j)
        flat.sort(key=repr)  # pointwise multiplication commutes: canonical order
        core = flat[0] if len(flat) == 1 else Product(tuple(flat))
        return core if scalar == 1 else simplify(Scale(scalar, core), g)
    if isinstance(a, Scale):
        child = simplify(a.child, g)
        lam = complex(a.factor)
        if lam == 0:
            return Constant(0j)
        if isinstance(child, Constant):
            return Constant(lam * child.value)
        if isinstance(child, Scale):
            return simplify(Scale(lam * child.factor, child.child), g)
        if lam == 1:
            return child
        return Scale(lam, child)
    if isinstance(a, FactorLift):
        if g.kind != "product":
            raise GroupError("factor lift on a non-product group")
        child = simplify(a.child, g.factors[a.index])
        if isinstance(child, Constant):
            return child
        return FactorLift(a.index, child)
    raise TypeError(f"not a coefficient symbol: {a!r}")


# ---------------------------------------------------------------------------
# probes and quasi-orbits


@dataclass(frozen=True)
class Probe:
    """Deterministic escaping sequence in a lattice: points
    x_k = round(r_k * direction) adjusted to a congruence class, with
    r_k = k^2 (quadratic escape) or r_k = ((2 pi k + phase)/phase_scale)^2."""

    dimension: int
    direction: tuple
    rule: str = "quadratic"  # "quadratic" | "phase"
    phase: float = 0.0
    phase_scale: float = 1.0
    modulus: tuple = ()
    residue: tuple = ()
    samples: int = 64

    def radius(self, k: int) -> float:
        if self.rule == "phase":
            return ((2 * math.pi * k + self.phase) / self.phase_scale) ** 2
        return float(k * k)

    def point(self, k: int) -> tuple:
        r = self.radius(k)
        x = [round(r * d) for d in self.direction]
        if self.modulus:
            x = [res + m * round((xi - res) / m)
                 for xi, m, res in zip(x, self.modulus, self.residue)]
        return tuple(int(c) for c in x)


@dataclass(eq=False)
class QuasiOrbitSpec:
    """A corona point represented by a verified escape probe, together with
    the limit data of every leaf that dies along it."""

    group: groups.GroupSpec
    probe: Probe
    factor_index: int = None          # which product factor escapes
    limit_data: dict = field(default_factory=dict)
    quasi_orbit_id: str = ""
    description: str = ""

    def describe(self) -> dict:
        return {
            "quasi_orbit_id": self.quasi_orbit_id,
            "factor_index": self.factor_index,
            "direction": list(self.probe.direction),
            "rule": self.probe.rule,
            "phase": self.probe.phase,
            "modulus": list(self.probe.modulus),
            "residue": list(self.probe.residue),
            "description": self.description,
            "limits": sorted((repr(k), [complex(v).real, complex(v).imag])
                             for k, v in self.limit_data.items()),
        }


def _escaping_leaves(a, escaping_factor):
    """Leaves of `a` that feel the escape: (leaf, lives_on_escaping_part)."""
    out = []

    def walk(node, factor):
        if isinstance(node, (Constant,)):
            return
        if isinstance(node, (Vanishing, SlowlyOscillating, Periodic, FiniteTable)):
            escapes = (escaping_factor is None and factor is None) or \
                      (factor is not None and factor == escaping_factor)
            out.append((node, escapes))
            return
        if isinstance(node, (Translate, Scale)):
            walk(node.child, factor)
        elif isinstance(node, (Sum, Product)):
            for c in node.children:
                walk(c, factor)
        elif isinstance(node, FactorLift):
            walk(node.child, node.index)
    walk(a, None)
    return out


def verify_probe_limits(a, q: QuasiOrbitSpec, g: groups.GroupSpec,
                        cauchy_tol: float = 1e-9) -> None:
    """Check the stored leaf limits against the sampled probe tail.

    Raises DivergentProbe when a sample violates the generator's certified
    envelope (or, without an envelope, when the tail fails a spread test at
    the given tolerance floor)."""
    probe = q.probe
    ks = range(max(1, probe.samples - 7), probe.samples + 1)
    pts = [probe.point(k) for k in ks]
    for leaf, escapes in _escaping_leaves(a, q.factor_index):
        if not escapes:
            continue
        if isinstance(leaf, SlowlyOscillating):
            if leaf not in q.limit_data:
                raise DivergentProbe(f"no stored limit for {leaf} along {q.quasi_orbit_id}")
            lim = complex(q.limit_data[leaf])
            spread_vals = []
            for k, x in zip(ks, pts):
                v = SO_CATALOG[leaf.name].func(x, leaf.scale)
                env = _so_envelope(leaf, probe, k, x)
                if env is None:
                    spread_vals.append(v)
                elif abs(v - lim) > max(env, cauchy_tol):
                    raise DivergentProbe(
                        f"{leaf} deviates from its limit {lim:g} by {abs(v - lim):.3g} "
                        f"(allowed {max(env, cauchy_tol):.3g}) at sample k={k}")
            if spread_vals:
                spread = max(spread_vals) - min(spread_vals)
                mid = 0.5 * (max(spread_vals) + min(spread_vals))
                if spread > cauchy_tol or abs(mid - lim) > max(spread, cauchy_tol):
                    raise DivergentProbe(
                        f"{leaf} fails the tail spread test along {q.quasi_orbit_id} "
                        f"(spread {spread:.3g}, tol {cauchy_tol:g})")
        elif isinstance(leaf, Vanishing):
            for x in pts[-3:]:
                xe = _embed_point(q, g, x)
                v = abs(evaluate(leaf, xe if q.factor_index is None else xe[q.factor_index],
                                 g if q.factor_index is None else g.factors[q.factor_index]))
                bound = cauchy_tol
                if leaf.decay is not None:
                    amp, power = leaf.decay
                    r = sum(abs(c) for c in x)
                    bound = max(bound, 2 * amp / (1.0 + r) ** power)
                if v > bound:
                    raise DivergentProbe("vanishing leaf does not vanish along the probe")
        elif isinstance(leaf, Periodic):
            if not probe.modulus or len(probe.modulus) != len(leaf.periods) or \
                    any(m % p for m, p in zip(probe.modulus, leaf.periods)):
                raise DivergentProbe(
                    "periodic leaf requires a congruence-constrained probe "
                    f"(periods {leaf.periods}, probe modulus {probe.modulus})")
        elif isinstance(leaf, FiniteTable):
            raise DivergentProbe("finite tables cannot escape to infinity")


def _embed_point(q: QuasiOrbitSpec, g: groups.GroupSpec, x: tuple):
    """Lift a probe point of the escaping factor into the full group."""
    if q.factor_index is None:
        return x
    comps = list(groups.identity_of(g))
    comps[q.factor_index] = x
    return tuple(comps)


def asymptotic_coefficient(a, q: QuasiOrbitSpec, g: groups.GroupSpec = None,
                           verify: bool = True, cauchy_tol: float = 1e-9):
    """Limit of the coefficient along the quasi-orbit, as a symbol on the
    same group: slowly oscillating leaves collapse to their limit constants,
    vanishing leaves die, periodic tables shift by the probe residue."""
    g = g if g is not None else q.group
    if verify:
        verify_probe_limits(a, q, g, cauchy_tol)
    return simplify(_asym(a, q, g), g)


def _asym(a, q: QuasiOrbitSpec, g: groups.GroupSpec):
    escaping = q.factor_index is None
    if isinstance(a, Constant):
        return a
    if isinstance(a, Vanishing):
        return Constant(0j) if escaping else a
    if isinstance(a, SlowlyOscillating):
        if not escaping:
            return a
        if a not in q.limit_data:
            raise DivergentProbe(f"no stored limit for {a}")
        return Constant(complex(q.limit_data[a]))
    if isinstance(a, Periodic):
        if not escaping:
            return a
        return _shift_periodic(a, q.probe.residue or (0,) * len(a.periods))
    if isinstance(a, FiniteTable):
        return a
    if isinstance(a, Translate):
        return Translate(a.shift, _asym(a.child, q, g))
    if isinstance(a, Sum):
        return Sum(tuple(_asym(c, q, g) for c in a.children))
    if isinstance(a, Product):
        return Product(tuple(_asym(c, q, g) for c in a.children))
    if isinstance(a, Scale):
        return Scale(a.factor, _asym(a.child, q, g))
    if isinstance(a, FactorLift):
        if q.factor_index != a.index:
            return a
        inner = QuasiOrbitSpec(group=g.factors[a.index], probe=q.probe,
                               factor_index=None, limit_data=q.limit_data,
                               quasi_orbit_id=q.quasi_orbit_id)
        return FactorLift(a.index, _asym(a.child, inner, g.factors[a.index]))
    raise TypeError(f"not a coefficient symbol: {a!r}")


# ---------------------------------------------------------------------------
# sufficient families


def sufficient_family(a, g: groups.GroupSpec, cluster_points: int = 257,
                      samples: int = 64) -> list:
    """Quasi-orbit specs whose orbits cover the corona for the supported
    coefficient patterns (slowly oscillating, periodic, their span, and
    factor-split product coefficients)."""
    a = simplify(a, g)
    if g.kind == "finite":
        return []  # compact group: empty corona
    if g.kind == "product":
        return _product_family(a, g, cluster_points, samples)
    if g.kind != "zn":
        raise UnsupportedAlgebraPattern(f"unsupported group kind {g.kind}")
    leaves = [leaf for leaf, _ in _escaping_leaves(a, None)]
    if any(isinstance(l, FiniteTable) for l in leaves):
        raise UnsupportedAlgebraPattern("finite tables are not lattice coefficients")
    if any(isinstance(l, FactorLift) for l in leaves):
        raise UnsupportedAlgebraPattern("factor lifts require a product group")
    specs = []
    for probe, limits, orbit_id, desc in _zn_probes(leaves, g.dimension,
                                                    cluster_points, samples, a, g):
        specs.append(QuasiOrbitSpec(group=g, probe=probe, factor_index=None,
                                    limit_data=limits, quasi_orbit_id=orbit_id,
                                    description=desc))
    for q in specs:
        verify_probe_limits(a, q, g)
    return specs


def _zn_probes(leaves, dim, cluster_points, samples, a, g):
    """Probe templates for a lattice factor: (probe, limit_data, id, text)."""
    so_leaves = sorted({l for l in leaves if isinstance(l, SlowlyOscillating)},
                       key=repr)
    per_leaves = sorted({l for l in leaves if isinstance(l, Periodic)}, key=repr)
    signed = [l for l in so_leaves if SO_CATALOG[l.name].kind == "signed"]
    phased = [l for l in so_leaves if SO_CATALOG[l.name].kind == "phase"]
    if signed and dim != 1:
        raise UnsupportedAlgebraPattern("signed generators need a one-dimensional lattice")
    if len({(l.name, l.scale) for l in phased}) > 1:
        raise UnsupportedAlgebraPattern(
            "at most one phase-indexed generator family is supported")

    modulus, residues = (), [()]
    if per_leaves:
        modulus = _common_periods(per_leaves, dim)
        if not phased and not signed:
            # purely periodic: one probe per residue, a single minimal quasi-orbit
            residues = _all_residues(modulus)
        else:
            residues = [(0,) * dim]

    e1 = (1.0,) + (0.0,) * (dim - 1)
    directions = [e1, tuple(-c for c in e1)] if signed else [e1]
    phases = [None]
    if phased:
        targets = np.linspace(-1.0, 1.0, max(2, cluster_points))
        phases = [math.asin(float(t)) for t in targets]

    out = []
    for d in directions:
        for phase in phases:
            for residue in residues:
                if phase is None:
                    probe = Probe(dimension=dim, direction=d, rule="quadratic",
                                  modulus=modulus, residue=residue, samples=samples)
                else:
                    probe = Probe(dimension=dim, direction=d, rule="phase",
                                  phase=phase, phase_scale=phased[0].scale,
                                  modulus=modulus, residue=residue, samples=samples)
                limits = {}
                for l in so_leaves:
                    limits[l] = SO_CATALOG[l.name].limit(d, phase if phase is not None else 0.0,
                                                         l.scale)
                if per_leaves and not phased and not signed:
                    orbit_id = "periodic:minimal"
                    desc = f"residue {residue} representative of the minimal quasi-orbit"
                elif not so_leaves and not per_leaves:
                    orbit_id = "trivial"
                    desc = "single corona point of the constants-plus-vanishing algebra"
                else:
                    bits = [f"d={_fmt_dir(d)}"]
                    if phase is not None:
                        bits.append(f"phase={phase:.9f}")
                    if per_leaves:
                        bits.append(f"residue={residue}")
                    orbit_id = "so:" + ",".join(bits)
                    desc = "slowly oscillating escape " + ", ".join(bits)
                out.append((probe, limits, orbit_id, desc))
    return out


def _fmt_dir(d):
    return "(" + ",".join(f"{c:+g}" for c in d) + ")"


def _common_periods(per_leaves, dim) -> tuple:
    mod = [1] * dim
    for l in per_leaves:
        if len(l.periods) != dim:
            raise UnsupportedAlgebraPattern("periodic table dimension mismatch")
        mod = [math.lcm(m, p) for m, p in zip(mod, l.periods)]
    if math.prod(mod) > RESIDUE_CAP:
        raise IncommensurablePeriods(f"common period lattice {mod} exceeds cap {RESIDUE_CAP}")
    return tuple(mod)


def _all_residues(modulus) -> list:
    out = [()]
    for m in modulus:
        out = [r + (i,) for r in out for i in range(m)]
    return out


def _product_family(a, g, cluster_points, samples):
    """Two-family union for product groups: one family per lattice factor,
    escaping there while every other factor is held at the identity."""
    top = _escaping_leaves(a, None)
    for leaf, escapes in top:
        if escapes:
            raise UnsupportedAlgebraPattern(
                "product-group coefficients must be factor-lifted (except constants)")
    specs = []
    for i, f in enumerate(g.factors):
        if f.kind != "zn":
            continue  # finite factors are compact, no escape
        sub = [leaf for leaf, esc in _escaping_leaves(a, i) if esc]
        for probe, limits, orbit_id, desc in _zn_probes(sub, f.dimension,
                                                        cluster_points, samples, a, g):
            specs.append(QuasiOrbitSpec(group=g, probe=probe, factor_index=i,
                                        limit_data=limits,
                                        quasi_orbit_id=f"factor{i}:{orbit_id}",
                                        description=f"factor {i} escape; {desc}"))
    if not specs:
        raise UnsupportedAlgebraPattern("product group has no lattice factor to escape in")
    for q in specs:
        verify_probe_limits(a, q, g)
    return specs


# ---------------------------------------------------------------------------
# cluster ranges


def cluster_range(a, g: groups.GroupSpec, cluster_points: int = 257):
    """Asymptotic value set of a slowly oscillating class symbol as a
    SpectralSet; exact interval primitive for affine images of the dense
    oscillating generator, finite exact sets otherwise."""
    a = simplify(a, g)
    cls = coeff_class(a)
    if cls not in (CoeffClass.CONSTANT, CoeffClass.VANISHING, CoeffClass.SLOWLY_OSC):
        raise NotSlowlyOscillating(f"class {cls.value} has no scalar cluster range")
    if g.kind == "finite":
        return spectral_set()
    family = sufficient_family(a, g, cluster_points=cluster_points)
    values = []
    for q in family:
        lim = asymptotic_coefficient(a, q, g, verify=False)
        if not isinstance(lim, Constant):
            raise NotSlowlyOscillating("asymptotic value is not a constant")
        values.append(complex(lim.value))
    phased = [l for l, _ in _escaping_leaves(a, None)
              if isinstance(l, SlowlyOscillating) and SO_CATALOG[l.name].kind == "phase"]
    intervals = ()
    resolution = 0.0
    if phased:
        aff = _affine_in(a, phased[0], g)
        if aff is not None and abs(aff[0].imag) < 1e-12 and abs(aff[1].imag) < 1e-12:
            alpha, beta = aff[0].real, aff[1].real
            kind = SO_CATALOG[phased[0].name].cluster(phased[0].scale)
            lo, hi = kind[1], kind[2]
            ends = sorted((beta + alpha * lo, beta + alpha * hi))
            intervals = (Interval(ends[0], ends[1]),)
        else:
            arr = np.sort(np.asarray(values, dtype=complex))
            gaps = np.abs(np.diff(arr)) if len(arr) > 1 else np.array([0.0])
            resolution = float(gaps.max() / 2) if len(gaps) else 0.0
    return spectral_set(points=values, intervals=intervals, resolution=resolution)


# ---------------------------------------------------------------------------
# JSON encoding (used by the CLI config format)


def _cx(entry) -> complex:
    if isinstance(entry, (list, tuple)):
        return complex(float(entry[0]), float(entry[1]))
    return complex(float(entry), 0.0)


def coeff_from_json(data: dict, g: groups.GroupSpec):
    kind = data.get("type")
    if kind == "constant":
        return Constant(_cx(data["value"]))
    if kind == "vanishing":
        support = tuple((groups.element_from_json(g, s["element"]), _cx(s["value"]))
                        for s in data.get("support", ()))
        decay = tuple(data["decay"]) if data.get("decay") else None
        return Vanishing(tuple(sorted(support)), decay)
    if kind == "so":
        return so_generator(data["name"], float(data.get("scale", 1.0)))
    if kind == "periodic":
        return Periodic(tuple(int(p) for p in data["periods"]),
                        tuple(_cx(v) for v in data["table"]))
    if kind == "finite_table":
        return FiniteTable(tuple(_cx(v) for v in data["table"]))
    if kind == "translate":
        return Translate(groups.element_from_json(g, data["shift"]),
                         coeff_from_json(data["child"], g))
    if kind == "sum":
        return Sum(tuple(coeff_from_json(c, g) for c in data["children"]))
    if kind == "product":
        return Product(tuple(coeff_from_json(c, g) for c in data["children"]))
    if kind == "scale":
        return Scale(_cx(data["factor"]), coeff_from_json(data["child"], g))
    if kind == "factor_lift":
        idx = int(data["index"])
        if g.kind != "product" or not 0 <= idx < len(g.factors):
            raise GroupError("factor_lift index outside the product group")
        return FactorLift(idx, coeff_from_json(data["child"], g.factors[idx]))
    raise GroupError(f"unknown coefficient type {kind!r}")


def coeff_to_json(a, g: groups.GroupSpec) -> dict:
    if isinstance(a, Constant):
        return {"type": "constant", "value": [a.value.real, a.value.imag]}
    if isinstance(a, Vanishing):
        out = {"type": "vanishing",
               "support": [{"element": groups.element_to_json(g, e),
                            "value": [complex(v).real, complex(v).imag]}
                           for e, v in a.support]}
        if a.decay is not None:
            out["decay"] = list(a.decay)
        return out
    if isinstance(a, SlowlyOscillating):
        return {"type": "so", "name": a.name, "scale": a.scale}
    if isinstance(a, Periodic):
        return {"type": "periodic", "periods": list(a.periods),
                "table": [[complex(v).real, complex(v).imag] for v in a.table]}
    if isinstance(a, FiniteTable):
        return {"type": "finite_table",
                "table": [[complex(v).real, complex(v).imag] for v in a.values]}
    if isinstance(a, Translate):
        return {"type": "translate", "shift": groups.element_to_json(g, a.shift),
                "child": coeff_to_json(a.child, g)}
    if isinstance(a, Sum):
        return {"type": "sum", "children": [coeff_to_json(c, g) for c in a.children]}
    if isinstance(a, Product):
        return {"type": "product", "children": [coeff_to_json(c, g) for c in a.children]}
    if isinstance(a, Scale):
        return {"type": "scale", "factor": [complex(a.factor).real, complex(a.factor).imag],
                "child": coeff_to_json(a.child, g)}
    if isinstance(a, FactorLift):
        return {"type": "factor_lift", "index": a.index,
                "child": coeff_to_json(a.child, g.factors[a.index])}
    raise TypeError(f"not a coefficient symbol: {a!r}")


def _affine_in(a, leaf, g):
    """Return (alpha, beta) with a == alpha * leaf + beta at infinity, or None."""
    if a == leaf:
        return (1 + 0j, 0j)
    if isinstance(a, Constant):
        return (0j, complex(a.value))
    if isinstance(a, Vanishing):
        return (0j, 0j)
    if isinstance(a, Translate):
        return _affine_in(a.child, leaf, g)  # translation is invisible at infinity
    if isinstance(a, SlowlyOscillating):
        return None  # a different generator
    if isinstance(a, Scale):
        sub = _affine_in(a.child, leaf, g)
        if sub is None:
            return None
        lam = complex(a.factor)
        return (lam * sub[0], lam * sub[1])
    if isinstance(a, Sum):
        alpha, beta = 0j, 0j
        for c in a.children:
            sub = _affine_in(c, leaf, g)
            if sub is None:
                return None
            alpha, beta = alpha + sub[0], beta + sub[1]
        return (alpha, beta)
    if isinstance(a, Product):
        alpha, beta = 0j, 1 + 0j
        for c in a.children:
            sub = _affine_in(c, leaf, g)
            if sub is None:
                return None
            if sub[0] != 0 and alpha != 0:
                return None  # quadratic in the generator
            alpha, beta = alpha * sub[1] + beta * sub[0], beta * sub[1]
        return (alpha, beta)
    return None
