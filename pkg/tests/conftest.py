"""Shared corpus of certified finite structures used across the suite."""

import pytest

from algf.almost import (
    as_groupoid,
    b2_zn_almost_groupoid,
    null_almost_groupoid,
)
from algf.census import cyclic_group_table, dihedral_group_table
from algf.constructions import (
    direct_product_almost,
    disjoint_union_almost,
    semidirect_product,
)
from algf.groupoid import (
    disjoint_union_groupoids,
    pair_groupoid,
    symmetric_groupoid,
)
from algf.kernel import GROUPOID, build_generalized_group


def negation_action(n):
    """The inversion automorphism of a cyclic table with prefix 'g', applied
    when the acting element is not the unit 'g0'."""

    def act(g, h):
        if g == "g0":
            return h
        return f"g{(-int(h[1:])) % n}"

    return act


def z2_z3_negation_semidirect():
    z2 = cyclic_group_table(2)
    z3 = cyclic_group_table(3)

    def act(g, h):
        return h if g == "g0" else f"g{(-int(h[1:])) % 3}"

    return semidirect_product(z2, z3, act)


def left_zero_gg(n):
    """Left-zero multiplication: every element is its own identity/inverse."""
    labels = [f"l{i}" for i in range(n)]
    ident = {a: a for a in labels}
    return build_generalized_group(
        labels, ident, ident, [(a, b, a) for a in labels for b in labels]
    )


def rectangular_band_gg():
    """The 2x2 rectangular band (i,j)*(k,l) = (i,l); four singleton
    identity classes."""
    labels = [f"{i}{j}" for i in (1, 2) for j in (1, 2)]
    ident = {a: a for a in labels}
    return build_generalized_group(
        labels,
        ident,
        ident,
        [(a, b, a[0] + b[1]) for a in labels for b in labels],
    )


def left_zero_times_z2_gg():
    """Two identity classes of size two: letter part is left-zero, digit part
    is addition mod 2."""
    labels = ["x0", "x1", "y0", "y1"]

    def op(a, b):
        return a[0] + str((int(a[1]) + int(b[1])) % 2)

    return build_generalized_group(
        labels,
        {a: a[0] + "0" for a in labels},
        {a: a[0] + str((-int(a[1])) % 2) for a in labels},
        [(a, b, op(a, b)) for a in labels for b in labels],
    )


@pytest.fixture(scope="session")
def groupoid_corpus():
    return [
        pair_groupoid([1]),
        pair_groupoid([1, 2]),
        pair_groupoid([1, 2, 3]),
        symmetric_groupoid([1, 2]),
        symmetric_groupoid([1, 2, 3]),
        cyclic_group_table(5, GROUPOID),
        disjoint_union_groupoids(
            [cyclic_group_table(2, GROUPOID, "a"), cyclic_group_table(3, GROUPOID, "b")]
        ),
        as_groupoid(b2_zn_almost_groupoid(4)),
        as_groupoid(b2_zn_almost_groupoid(6)),
    ]


@pytest.fixture(scope="session")
def almost_corpus():
    z2 = cyclic_group_table(2)
    z3 = cyclic_group_table(3)
    return [
        b2_zn_almost_groupoid(1),
        b2_zn_almost_groupoid(2),
        b2_zn_almost_groupoid(4),
        b2_zn_almost_groupoid(6),
        null_almost_groupoid(["u"]),
        null_almost_groupoid(["u", "v", "w"]),
        cyclic_group_table(6),
        dihedral_group_table(3),
        direct_product_almost(z2, z3),
        disjoint_union_almost(b2_zn_almost_groupoid(2), null_almost_groupoid(["q"])),
        z2_z3_negation_semidirect(),
    ]


@pytest.fixture(scope="session")
def gg_corpus():
    from algf.kernel import GENERALIZED_GROUP

    return [
        cyclic_group_table(1, GENERALIZED_GROUP),
        cyclic_group_table(4, GENERALIZED_GROUP),
        cyclic_group_table(6, GENERALIZED_GROUP),
        left_zero_gg(2),
        left_zero_gg(3),
        rectangular_band_gg(),
        left_zero_times_z2_gg(),
    ]
