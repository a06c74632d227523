"""Discrete group models: integer lattices, finite groups, and finite products.

Elements are plain hashable values: a tuple of ints for a lattice group,
an int index for a finite group, and a tuple of per-factor components for
a product group.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GroupError, UnsupportedGroup, WindowOverflow

Element = object  # int | tuple; validated per group

WINDOW_CAP = 4_000_000

_VALIDATION_TOL = 1e-12


@dataclass(eq=False)
class Irrep:
    """A unitary irreducible representation given by one matrix per element."""

    dim: int
    matrices: np.ndarray  # shape (order, dim, dim), complex


@dataclass(eq=False)
class FiniteGroupData:
    name: str
    order: int
    table: np.ndarray  # (order, order) int, row-major: table[i, j] = index of x_i x_j
    identity: int = field(default=-1)
    inverse: np.ndarray = field(default=None)
    irreps: tuple = ()

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=np.int64)
        _validate_table(self)


def _validate_table(data: FiniteGroupData) -> None:
    """Check Latin-square structure, locate identity, tabulate inverses."""
    m = data.order
    t = data.table
    if t.shape != (m, m):
        raise GroupError(f"multiplication table must be {m}x{m}, got {t.shape}")
    if t.min() < 0 or t.max() >= m:
        raise GroupError("table entries out of range")
    want = np.arange(m)
    for i in range(m):
        if not np.array_equal(np.sort(t[i]), want) or not np.array_equal(np.sort(t[:, i]), want):
            raise GroupError(f"table is not a Latin square (row/col {i})")
    # identity: the unique e with t[e] == id and t[:, e] == id
    ids = [e for e in range(m) if np.array_equal(t[e], want) and np.array_equal(t[:, e], want)]
    if len(ids) != 1:
        raise GroupError("table has no two-sided identity")
    data.identity = ids[0]
    # associativity, fully vectorized: t[t[i,j],k] == t[i,t[j,k]]
    if not np.array_equal(t[t, :], t[:, t]):
        raise GroupError("table is not associative")
    inv = np.empty(m, dtype=np.int64)
    for i in range(m):
        js = np.nonzero(t[i] == data.identity)[0]
        inv[i] = js[0]
    data.inverse = inv


@dataclass(frozen=True, eq=False)
class GroupSpec:
    """Tagged union over the three supported group kinds."""

    kind: str  # "zn" | "finite" | "product"
    dimension: int = 0
    data: FiniteGroupData = None
    factors: tuple = ()

    def __repr__(self):
        if self.kind == "zn":
            return f"Zn({self.dimension})"
        if self.kind == "finite":
            return f"Finite({self.data.name})"
        return "Product(" + ", ".join(repr(f) for f in self.factors) + ")"


def zn(dimension: int) -> GroupSpec:
    if dimension < 1:
        raise GroupError("lattice dimension must be >= 1")
    return GroupSpec(kind="zn", dimension=int(dimension))


def finite(data: FiniteGroupData) -> GroupSpec:
    return GroupSpec(kind="finite", data=data)


def product(*factors: GroupSpec) -> GroupSpec:
    if not factors:
        raise GroupError("product of an empty factor list is rejected")
    for f in factors:
        if f.kind == "product":
            raise GroupError("product factors must be plain groups (nesting depth <= 2)")
    return GroupSpec(kind="product", factors=tuple(factors))


def group_equal(a: GroupSpec, b: GroupSpec) -> bool:
    if a is b:
        return True
    if a.kind != b.kind:
        return False
    if a.kind == "zn":
        return a.dimension == b.dimension
    if a.kind == "finite":
        return a.data.order == b.data.order and np.array_equal(a.data.table, b.data.table)
    return len(a.factors) == len(b.factors) and all(
        group_equal(x, y) for x, y in zip(a.factors, b.factors)
    )


# ---------------------------------------------------------------------------
# element arithmetic


def identity_of(g: GroupSpec) -> Element:
    if g.kind == "zn":
        return (0,) * g.dimension
    if g.kind == "finite":
        return int(g.data.identity)
    return tuple(identity_of(f) for f in g.factors)


def check_element(g: GroupSpec, x: Element) -> None:
    if g.kind == "zn":
        if not (isinstance(x, tuple) and len(x) == g.dimension):
            raise GroupError(f"expected a {g.dimension}-tuple of ints, got {x!r}")
        for c in x:
            if not isinstance(c, int) or isinstance(c, bool):
                raise GroupError(f"lattice coordinates must be ints, got {x!r}")
    elif g.kind == "finite":
        if not isinstance(x, int) or isinstance(x, bool):
            raise GroupError(f"expected an element index, got {x!r}")
        if not 0 <= x < g.data.order:
            raise GroupError(f"element index {x} out of range for order {g.data.order}")
    else:
        if not (isinstance(x, tuple) and len(x) == len(g.factors)):
            raise GroupError(f"expected a {len(g.factors)}-component tuple, got {x!r}")
        for f, c in zip(g.factors, x):
            check_element(f, c)


def multiply(g: GroupSpec, x: Element, y: Element) -> Element:
    if g.kind == "zn":
        return tuple(a + b for a, b in zip(x, y))
    if g.kind == "finite":
        return int(g.data.table[x, y])
    return tuple(multiply(f, a, b) for f, a, b in zip(g.factors, x, y))


def inverse(g: GroupSpec, x: Element) -> Element:
    if g.kind == "zn":
        return tuple(-a for a in x)
    if g.kind == "finite":
        return int(g.data.inverse[x])
    return tuple(inverse(f, a) for f, a in zip(g.factors, x))


def modular_function(g: GroupSpec, x: Element) -> float:
    """Discrete groups are unimodular; always 1 for a valid element."""
    check_element(g, x)
    return 1.0


def element_radius(g: GroupSpec, x: Element) -> int:
    """Sup-norm radius of the lattice part; finite components contribute zero."""
    if g.kind == "zn":
        return max(abs(c) for c in x)
    if g.kind == "finite":
        return 0
    return max(element_radius(f, c) for f, c in zip(g.factors, x))


def enumerate_window(g: GroupSpec, radius: int, cap: int = WINDOW_CAP) -> list:
    """Deterministic element listing: a centered box for lattices, everything
    for finite groups, the product ordering for products."""
    if radius < 0:
        raise GroupError("window radius must be >= 0")
    size = _window_size(g, radius)
    if size > cap:
        raise WindowOverflow(f"window of size {size} exceeds cap {cap}")
    if g.kind == "zn":
        rng = range(-radius, radius + 1)
        return [tuple(p) for p in itertools.product(rng, repeat=g.dimension)]
    if g.kind == "finite":
        return list(range(g.data.order))
    parts = [enumerate_window(f, radius, cap) for f in g.factors]
    return [tuple(p) for p in itertools.product(*parts)]


def _window_size(g: GroupSpec, radius: int) -> int:
    if g.kind == "zn":
        return (2 * radius + 1) ** g.dimension
    if g.kind == "finite":
        return g.data.order
    return math.prod(_window_size(f, radius) for f in g.factors)


def is_abelian(g: GroupSpec) -> bool:
    if g.kind == "zn":
        return True
    if g.kind == "finite":
        return bool(np.array_equal(g.data.table, g.data.table.T))
    return all(is_abelian(f) for f in g.factors)


def factor_list(g: GroupSpec) -> tuple:
    """The plain factors of g (g itself when it is not a product)."""
    return g.factors if g.kind == "product" else (g,)


def lattice_dimension(g: GroupSpec) -> int:
    """Total number of lattice coordinates across all factors."""
    return sum(f.dimension for f in factor_list(g) if f.kind == "zn")


def split_element(g: GroupSpec, x: Element) -> tuple:
    """Flatten an element into (lattice coordinates, finite indices)."""
    zs, fins = [], []
    comps = x if g.kind == "product" else (x,)
    for f, c in zip(factor_list(g), comps):
        if f.kind == "zn":
            zs.extend(c)
        else:
            fins.append(c)
    return tuple(zs), tuple(fins)


def merge_element(g: GroupSpec, zs: tuple, fins: tuple) -> Element:
    comps = []
    zi = fi = 0
    for f in factor_list(g):
        if f.kind == "zn":
            comps.append(tuple(zs[zi:zi + f.dimension]))
            zi += f.dimension
        else:
            comps.append(fins[fi])
            fi += 1
    return tuple(comps) if g.kind == "product" else comps[0]


# ---------------------------------------------------------------------------
# catalog groups with embedded irrep data


def cyclic(m: int) -> GroupSpec:
    """Z/m with its m characters."""
    if m < 1:
        raise GroupError("cyclic order must be >= 1")
    idx = np.arange(m)
    table = (idx[:, None] + idx[None, :]) % m
    irreps = []
    for k in range(m):
        mats = np.exp(2j * np.pi * k * idx / m).reshape(m, 1, 1)
        irreps.append(Irrep(dim=1, matrices=mats))
    data = FiniteGroupData(name=f"Z{m}", order=m, table=table, irreps=tuple(irreps))
    return finite(data)


def _perm_table(perms):
    m = len(perms)
    index = {p: i for i, p in enumerate(perms)}
    table = np.empty((m, m), dtype=np.int64)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            table[i, j] = index[tuple(p[q[k]] for k in range(len(p)))]
    return table


def symmetric_s3() -> GroupSpec:
    """S3 as permutations of {0,1,2}: trivial, sign, and the standard 2-dim irrep."""
    perms = [(0, 1, 2), (1, 2, 0), (2, 0, 1), (1, 0, 2), (2, 1, 0), (0, 2, 1)]
    table = _perm_table(perms)
    m = len(perms)

    def parity(p):
        inv = sum(1 for a in range(3) for b in range(a + 1, 3) if p[a] > p[b])
        return -1.0 if inv % 2 else 1.0

    triv = Irrep(1, np.ones((m, 1, 1), dtype=complex))
    sign = Irrep(1, np.array([parity(p) for p in perms], dtype=complex).reshape(m, 1, 1))
    # standard rep: restrict the permutation matrices to the plane orthogonal to (1,1,1)
    u = np.array([[1, -1, 0], [1, 1, -2]], dtype=float)
    u[0] /= np.linalg.norm(u[0])
    u[1] /= np.linalg.norm(u[1])
    mats = np.empty((m, 2, 2), dtype=complex)
    for i, p in enumerate(perms):
        pm = np.zeros((3, 3))
        for j in range(3):
            pm[p[j], j] = 1.0
        mats[i] = u @ pm @ u.T
    std = Irrep(2, mats)
    data = FiniteGroupData(name="S3", order=m, table=table, irreps=(triv, sign, std))
    return finite(data)


def dihedral_d4() -> GroupSpec:
    """D4 presented as r^a s^b, element index a + 4*b."""
    m = 8

    def key(a, b):
        return a % 4 + 4 * (b % 2)

    table = np.empty((m, m), dtype=np.int64)
    for a1 in range(4):
        for b1 in range(2):
            for a2 in range(4):
                for b2 in range(2):
                    a = a1 + (a2 if b1 == 0 else -a2)
                    table[key(a1, b1), key(a2, b2)] = key(a, b1 + b2)
    ones = []
    for cr in (1, -1):
        for cs in (1, -1):
            vals = [complex(cr ** a * cs ** b) for b in range(2) for a in range(4)]
            ones.append(Irrep(1, np.array(vals, dtype=complex).reshape(m, 1, 1)))
    rot = np.array([[0, -1], [1, 0]], dtype=complex)
    ref = np.array([[1, 0], [0, -1]], dtype=complex)
    mats = np.empty((m, 2, 2), dtype=complex)
    for b in range(2):
        for a in range(4):
            mats[key(a, b)] = np.linalg.matrix_power(rot, a) @ (ref if b else np.eye(2))
    data = FiniteGroupData(name="D4", order=m, table=table,
                           irreps=tuple(ones) + (Irrep(2, mats),))
    return finite(data)


def quaternion_q8() -> GroupSpec:
    """Q8 = {+-1, +-i, +-j, +-k}, element index 2*axis + (sign < 0)."""
    m = 8

    def key(sign, axis):
        return 2 * axis + (0 if sign > 0 else 1)

    # axis multiplication: (sign, axis) pairs under quaternion rules
    mul_axis = {
        (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
        (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
        (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
        (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
    }
    table = np.empty((m, m), dtype=np.int64)
    for s1 in (1, -1):
        for a1 in range(4):
            for s2 in (1, -1):
                for a2 in range(4):
                    s, a = mul_axis[(a1, a2)]
                    table[key(s1, a1), key(s2, a2)] = key(s1 * s2 * s, a)
    ones = []
    for ci in (1, -1):
        for cj in (1, -1):
            chi = {0: 1.0, 1: float(ci), 2: float(cj), 3: float(ci * cj)}
            vals = np.empty(m, dtype=complex)
            for s in (1, -1):
                for a in range(4):
                    vals[key(s, a)] = chi[a]
            ones.append(Irrep(1, vals.reshape(m, 1, 1)))
    two = {
        0: np.eye(2, dtype=complex),
        1: np.array([[1j, 0], [0, -1j]]),
        2: np.array([[0, 1], [-1, 0]], dtype=complex),
        3: np.array([[0, 1j], [1j, 0]]),
    }
    mats = np.empty((m, 2, 2), dtype=complex)
    for s in (1, -1):
        for a in range(4):
            mats[key(s, a)] = s * two[a]
    data = FiniteGroupData(name="Q8", order=m, table=table,
                           irreps=tuple(ones) + (Irrep(2, mats),))
    return finite(data)


_CATALOG = {
    "S3": symmetric_s3,
    "D4": dihedral_d4,
    "Q8": quaternion_q8,
}


def catalog_group(name: str) -> GroupSpec:
    """Look up a named finite group: Zm (any m >= 1), S3, D4, Q8."""
    if name in _CATALOG:
        return _CATALOG[name]()
    if name.startswith("Z") and name[1:].isdigit():
        return cyclic(int(name[1:]))
    raise GroupError(f"unknown catalog group {name!r}")


# ---------------------------------------------------------------------------
# JSON loading


def group_from_json(obj) -> GroupSpec:
    """Build a GroupSpec from its JSON description, validating on load."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise GroupError("group description must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "zn":
        return zn(int(obj["dimension"]))
    if kind == "finite":
        if "name" in obj:
            return catalog_group(obj["name"])
        return finite(_finite_from_json(obj))
    if kind == "product":
        return product(*(group_from_json(f) for f in obj.get("factors", [])))
    raise GroupError(f"unknown group kind {kind!r}")


def _finite_from_json(obj) -> FiniteGroupData:
    order = int(obj["order"])
    flat = obj["table"]
    if len(flat) != order * order:
        raise GroupError("table length must be order**2 (row-major)")
    table = np.asarray(flat, dtype=np.int64).reshape(order, order)
    irreps = []
    for r in obj.get("irreps", []):
        dim = int(r["dim"])
        mats = r["matrices"]
        if len(mats) != order:
            raise GroupError("irrep needs one matrix per element")
        arr = np.empty((order, dim, dim), dtype=complex)
        for i, mat in enumerate(mats):
            arr[i] = _complex_matrix(mat, dim)
        irreps.append(Irrep(dim=dim, matrices=arr))
    return FiniteGroupData(name=obj.get("name", f"finite{order}"),
                           order=order, table=table, irreps=tuple(irreps))


def _complex_matrix(rows, dim):
    if len(rows) != dim:
        raise GroupError(f"expected a {dim}x{dim} matrix")
    out = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(rows):
        if len(row) != dim:
            raise GroupError(f"expected a {dim}x{dim} matrix")
        for j, cell in enumerate(row):
            out[i, j] = complex(cell[0], cell[1])
    return out


def element_from_json(g: GroupSpec, obj) -> Element:
    if g.kind == "zn":
        x = tuple(int(c) for c in obj)
    elif g.kind == "finite":
        x = int(obj)
    else:
        if not isinstance(obj, (list, tuple)) or len(obj) != len(g.factors):
            raise GroupError(f"bad product element {obj!r}")
        x = tuple(element_from_json(f, c) for f, c in zip(g.factors, obj))
    check_element(g, x)
    return x


def element_to_json(g: GroupSpec, x: Element):
    if g.kind == "zn":
        return list(x)
    if g.kind == "finite":
        return x
    return [element_to_json(f, c) for f, c in zip(g.factors, x)]


def group_to_json(g: GroupSpec):
    if g.kind == "zn":
        return {"kind": "zn", "dimension": g.dimension}
    if g.kind == "finite":
        return {"kind": "finite", "name": g.data.name}
    return {"kind": "product", "factors": [group_to_json(f) for f in g.factors]}
