import pytest

from algf.almost import (
    b2_zn_almost_groupoid,
    null_almost_groupoid,
    verify_almost_groupoid,
)
from algf.census import (
    are_isomorphic,
    cyclic_group_table,
    dihedral_group_table,
    enumerate_almost_groupoids,
    isotropy_signature,
)
from algf.constructions import (
    direct_product_almost,
    disjoint_union_almost,
    semidirect_product,
    trivial_action,
    verify_action,
)
from algf.kernel import StructureError, relabel_table
from conftest import negation_action


class TestDisjointUnion:
    def test_counts(self):
        S = disjoint_union_almost(b2_zn_almost_groupoid(2), null_almost_groupoid(["q"]))
        assert S.order == 5
        assert len(S.units) == 3

    def test_signature_concatenates(self):
        A = b2_zn_almost_groupoid(2)
        B = cyclic_group_table(3, prefix="h")
        U = disjoint_union_almost(A, B)
        assert isotropy_signature(U) == tuple(
            sorted(isotropy_signature(A) + isotropy_signature(B))
        )

    def test_self_union_after_relabeling(self):
        A = b2_zn_almost_groupoid(3)
        B = relabel_table(A, lambda lab: "copy" + lab)
        U = disjoint_union_almost(A, B)
        assert verify_almost_groupoid(U).verdict
        assert U.order == 2 * A.order

    def test_label_collision(self):
        A = b2_zn_almost_groupoid(2)
        with pytest.raises(StructureError) as exc:
            disjoint_union_almost(A, A)
        assert exc.value.code == "label-collision"


class TestDirectProduct:
    def test_z2_times_z3_is_a_six_cycle(self):
        P = direct_product_almost(
            cyclic_group_table(2, prefix="a"), cyclic_group_table(3, prefix="b")
        )
        assert P.order == 6
        assert len(P.units) == 1
        assert are_isomorphic(P, cyclic_group_table(6)) is not None

    def test_fiber_counts(self):
        P = direct_product_almost(
            b2_zn_almost_groupoid(2), null_almost_groupoid(["u", "v"])
        )
        assert P.order == 8
        assert len(P.units) == 4

    def test_product_with_singleton_is_isomorphic(self):
        A = b2_zn_almost_groupoid(2)
        P = direct_product_almost(A, null_almost_groupoid(["w"]))
        assert are_isomorphic(P, A) is not None

    def test_componentwise_composability(self):
        P = direct_product_almost(
            b2_zn_almost_groupoid(2), cyclic_group_table(2, prefix="h")
        )
        x = P.element("((0,0),h0)")
        y = P.element("((1,0),h1)")
        assert P.product.get((x, y)) is None


class TestVerifyAction:
    def test_trivial_action(self):
        report = verify_action(
            cyclic_group_table(2), cyclic_group_table(3, prefix="h"), lambda g, h: h
        )
        assert report.verdict
        assert report.check("action-units-trivial").passed

    def test_negation_action(self):
        report = verify_action(
            cyclic_group_table(2), cyclic_group_table(3), negation_action(3)
        )
        assert report.verdict
        assert report.check("action-preserves-fiber").passed

    def test_collapse_to_units_fails_unit_existence(self):
        H = cyclic_group_table(3)
        report = verify_action(cyclic_group_table(2), H, lambda g, h: "g0")
        assert not report.verdict
        failed = [c.name for c in report.checks if c.required and not c.passed]
        assert failed == ["action-unit-exists"]
        assert report.check("action-unit-exists").witness.elements == ("g1",)

    def test_action_dict_must_be_total(self):
        with pytest.raises(StructureError) as exc:
            verify_action(cyclic_group_table(2), cyclic_group_table(2, prefix="h"), {})
        assert exc.value.code == "map-not-total"

    def test_weak_unit_reading_reported_separately(self):
        # one unit acts trivially, the other collapses its fiber: the weak
        # reading passes while the informational strong reading fails
        G = null_almost_groupoid(["u", "v"])
        H = cyclic_group_table(2)

        def act(g, h):
            return h if g == "u" else "g0"

        report = verify_action(G, H, act)
        assert report.verdict
        assert not report.check("action-units-trivial").passed


class TestSemidirect:
    def test_trivial_action_equals_direct_product(self):
        pairs = [
            (cyclic_group_table(2, prefix="a"), cyclic_group_table(3, prefix="b")),
            (b2_zn_almost_groupoid(2), cyclic_group_table(2, prefix="h")),
        ]
        for G, H in pairs:
            assert semidirect_product(G, H, trivial_action) == direct_product_almost(G, H)

    def test_negation_twist_gives_dihedral_fiber(self):
        S = semidirect_product(
            cyclic_group_table(2), cyclic_group_table(3), negation_action(3)
        )
        assert verify_almost_groupoid(S).verdict
        assert len(S.units) == 1
        assert are_isomorphic(S, dihedral_group_table(3)) is not None

    def test_unit_and_inverse_formulas_pointwise(self):
        G = cyclic_group_table(2)
        H = cyclic_group_table(3)
        act = negation_action(3)
        S = semidirect_product(G, H, act)
        for g in G.elements:
            for h in H.elements:
                el = S.element(f"({g.label},{h.label})")
                expected_theta = f"({G.source[g].label},{H.source[h].label})"
                assert S.source[el].label == expected_theta
                ig = G.inverse[g]
                expected_inv = f"({ig.label},{act(ig.label, H.inverse[h].label)})"
                assert S.inverse[el].label == expected_inv

    def test_refuses_failing_action(self):
        with pytest.raises(StructureError) as exc:
            semidirect_product(
                cyclic_group_table(2), cyclic_group_table(3), lambda g, h: "g0"
            )
        assert exc.value.code == "action-verification-failed"

    def test_weak_only_action_cannot_build(self):
        # passes the weak unit axiom but not the strong one; the unit law of
        # the pair structure then fails and construction is refused
        G = null_almost_groupoid(["u", "v"])
        H = cyclic_group_table(2)

        def act(g, h):
            return h if g == "u" else "g0"

        assert verify_action(G, H, act).verdict
        with pytest.raises(StructureError) as exc:
            semidirect_product(G, H, act)
        assert exc.value.code == "construction-invalid"


class TestOracleAgreement:
    def test_constructions_found_by_enumeration(self):
        cases = [
            (b2_zn_almost_groupoid(2), 4, 2),
            (direct_product_almost(cyclic_group_table(2, prefix="a"),
                                   cyclic_group_table(3, prefix="b")), 6, 1),
            (semidirect_product(cyclic_group_table(2), cyclic_group_table(3),
                                negation_action(3)), 6, 1),
            (null_almost_groupoid(["u", "v", "w"]), 3, 3),
            (disjoint_union_almost(b2_zn_almost_groupoid(2),
                                   null_almost_groupoid(["q"])), 5, 3),
        ]
        for built, order, units in cases:
            assert built.order == order and len(built.units) == units
            catalogue = enumerate_almost_groupoids(order, units)
            assert any(are_isomorphic(built, member) is not None for member in catalogue)
