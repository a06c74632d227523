"""Group arithmetic, window enumeration, and the finite-group catalog."""

import numpy as np
import pytest

from corona_spectra import groups
from corona_spectra.errors import GroupError, WindowOverflow


def test_lattice_window_enumeration():
    z1 = groups.zn(1)
    w = groups.enumerate_window(z1, 3)
    assert w == [(-3,), (-2,), (-1,), (0,), (1,), (2,), (3,)]
    z2 = groups.zn(2)
    w2 = groups.enumerate_window(z2, 1)
    assert len(w2) == 9
    assert (0, 0) in w2 and (-1, 1) in w2


def test_lattice_group_axioms_random():
    rng = np.random.default_rng(3)
    z2 = groups.zn(2)
    for _ in range(50):
        x = tuple(int(v) for v in rng.integers(-9, 10, size=2))
        y = tuple(int(v) for v in rng.integers(-9, 10, size=2))
        z = tuple(int(v) for v in rng.integers(-9, 10, size=2))
        lhs = groups.multiply(z2, groups.multiply(z2, x, y), z)
        rhs = groups.multiply(z2, x, groups.multiply(z2, y, z))
        assert lhs == rhs
        e = groups.identity_of(z2)
        assert groups.multiply(z2, x, groups.inverse(z2, x)) == e


@pytest.mark.parametrize("name", ["S3", "D4", "Q8", "Z5"])
def test_finite_catalog_group_axioms(name):
    g = groups.catalog_group(name)
    n = g.data.order
    e = groups.identity_of(g)
    for x in range(n):
        assert groups.multiply(g, x, groups.inverse(g, x)) == e
        assert groups.multiply(g, e, x) == x
    # associativity over the full table
    for x in range(n):
        for y in range(n):
            for z in range(n):
                lhs = groups.multiply(g, groups.multiply(g, x, y), z)
                rhs = groups.multiply(g, x, groups.multiply(g, y, z))
                assert lhs == rhs


def test_catalog_irrep_dimension_count():
    # sum of squared irrep dimensions equals the group order
    for name, order in (("S3", 6), ("D4", 8), ("Q8", 8)):
        g = groups.catalog_group(name)
        assert sum(ir.dim ** 2 for ir in g.data.irreps) == order


def test_noncommutativity_detection():
    assert groups.is_abelian(groups.zn(3))
    assert groups.is_abelian(groups.catalog_group("Z6"))
    assert not groups.is_abelian(groups.catalog_group("S3"))
    assert not groups.is_abelian(groups.catalog_group("Q8"))


def test_product_group_split_merge_round_trip():
    g = groups.product(groups.zn(2), groups.catalog_group("S3"))
    rng = np.random.default_rng(7)
    for _ in range(40):
        x = ((int(rng.integers(-5, 6)), int(rng.integers(-5, 6))),
             int(rng.integers(0, 6)))
        zs, fins = groups.split_element(g, x)
        assert groups.merge_element(g, zs, fins) == x
    assert groups.lattice_dimension(g) == 2
    assert groups.element_radius(g, ((3, -1), 4)) == 3


def test_unknown_catalog_name_rejected():
    with pytest.raises(GroupError):
        groups.catalog_group("A5")


def test_group_json_round_trip():
    for g in (groups.zn(2), groups.catalog_group("D4"),
              groups.product(groups.zn(1), groups.catalog_group("Z3"))):
        back = groups.group_from_json(groups.group_to_json(g))
        assert groups.group_equal(g, back)
        x = groups.identity_of(g)
        assert groups.element_from_json(back, groups.element_to_json(g, x)) == x


def test_window_cap_guard():
    z3 = groups.zn(3)
    with pytest.raises(WindowOverflow):
        groups.enumerate_window(z3, 500)
