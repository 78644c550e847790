from fractions import Fraction as F

import pytest

from algf import matrices
from algf.census import cyclic_group_table
from algf.gengroup import (
    check_generalized_subgroup,
    check_gg_homomorphism,
    component_subgroup,
    derived_gg_properties,
    is_normal_gg,
    rstar_group,
    sqrtdet_generalized_group,
    triangular_generalized_group,
    verify_generalized_group,
)
from algf.kernel import GENERALIZED_GROUP, StructureError, build_generalized_group
from conftest import left_zero_times_z2_gg, rectangular_band_gg

A1 = ((F(-1), F(1)), (F(-2), F(-2)))
A2 = ((F(1), F(-2)), (F(3), F(3)))

C = ((F(1), F(-1), F(2)), (F(0), F(1), F(0)), (F(0), F(0), F(0)))
D = ((F(2), F(1), F(-1)), (F(0), F(1), F(0)), (F(0), F(0), F(0)))


class TestVerify:
    def test_group_is_generalized_group(self):
        assert verify_generalized_group(cyclic_group_table(3, GENERALIZED_GROUP)).verdict

    def test_corpus(self, gg_corpus):
        for S in gg_corpus:
            assert verify_generalized_group(S).verdict, S

    def test_triangular_sampled(self):
        assert verify_generalized_group(
            triangular_generalized_group(), samples=500, seed=1
        ).verdict

    def test_two_local_identities_fails_uniqueness(self):
        # meet-semilattice on two points: both elements are identities for
        # the bottom element
        t = build_generalized_group(
            ["x", "y"],
            {"x": "x", "y": "y"},
            {"x": "x", "y": "y"},
            [("x", "x", "x"), ("x", "y", "x"), ("y", "x", "x"), ("y", "y", "y")],
        )
        report = verify_generalized_group(t)
        assert not report.verdict
        check = report.check("identity-unique")
        assert not check.passed
        assert set(check.witness.elements) == {"x", "y"}


class TestSqrtDet:
    def test_exercise_values_exact(self):
        G = sqrtdet_generalized_group()
        assert matrices.det(A1) == 4
        assert matrices.det(A2) == 9
        assert G.product(A1, A2) == matrices.mat_scale(F(2), A2)
        assert G.product(A1, A2) == ((F(2), F(-4)), (F(6), F(6)))
        assert G.product(A2, A1) == matrices.mat_scale(F(3), A1)
        assert G.product(A2, A1) == ((F(-3), F(3)), (F(-6), F(-6)))
        assert G.source(A1) == matrices.mat_scale(F(1, 2), A1)
        assert G.source(A2) == matrices.mat_scale(F(1, 3), A2)
        assert G.inverse(A1) == matrices.mat_scale(F(1, 4), A1)
        assert G.inverse(A2) == matrices.mat_scale(F(1, 9), A2)

    def test_noncommutative(self):
        G = sqrtdet_generalized_group()
        assert G.product(A1, A2) != G.product(A2, A1)

    def test_membership(self):
        G = sqrtdet_generalized_group()
        assert G.membership(A1)
        assert not G.membership(((F(2), F(0)), (F(0), F(1))))  # det 2 not a square
        assert not G.membership(((F(-1), F(0)), (F(0), F(1))))  # det < 0

    def test_sampled_verification_rational(self):
        assert verify_generalized_group(
            sqrtdet_generalized_group(), samples=300, seed=5
        ).verdict

    def test_sampled_verification_float(self):
        assert verify_generalized_group(
            sqrtdet_generalized_group("float"), samples=300, seed=6
        ).verdict

    def test_sampler_stays_in_carrier(self):
        import random

        G = sqrtdet_generalized_group()
        rng = random.Random(9)
        for _ in range(50):
            assert G.membership(G.sample(rng))

    def test_normality(self):
        # e(A.B) collapses to e(B) on both sides, so the identity map is
        # multiplicative here
        assert is_normal_gg(sqrtdet_generalized_group(), samples=200, seed=7).passed

    def test_unknown_mode(self):
        with pytest.raises(StructureError):
            sqrtdet_generalized_group("decimal")


class TestTriangular:
    def test_products(self):
        M = triangular_generalized_group()
        assert M.product(C, D) == (
            (F(2), F(0), F(-1)),
            (F(0), F(1), F(0)),
            (F(0), F(0), F(0)),
        )
        # by the row-times-column rule the reverse product is [[2,-1,4],...]
        assert M.product(D, C) == (
            (F(2), F(-1), F(4)),
            (F(0), F(1), F(0)),
            (F(0), F(0), F(0)),
        )
        assert M.product(C, D) != M.product(D, C)

    def test_membership_rejects_zero_leading_entry(self):
        M = triangular_generalized_group()
        bad = ((F(0), F(1), F(1)), (F(0), F(1), F(0)), (F(0), F(0), F(0)))
        assert not M.membership(bad)

    def test_identity_law_sampled(self):
        import random

        M = triangular_generalized_group()
        rng = random.Random(3)
        for _ in range(100):
            A = M.sample(rng)
            assert M.product(M.source(A), A) == A
            assert M.product(A, M.source(A)) == A

    def test_normality_sampled(self):
        assert is_normal_gg(triangular_generalized_group(), samples=100, seed=8).passed

    def test_projection_homomorphism(self):
        M = triangular_generalized_group()
        report = check_gg_homomorphism(
            M, rstar_group(), lambda A: A[0][0], samples=200, seed=9
        )
        assert report.verdict
        assert report.check("respects-identities").passed
        assert report.check("respects-inverses").passed

    def test_image_closure_sampled(self):
        import random

        M = triangular_generalized_group()
        R = rstar_group()
        rng = random.Random(4)
        image = [M.sample(rng)[0][0] for _ in range(100)]
        for a in image:
            for b in image:
                q = R.product(a, R.inverse(b))
                assert R.membership(q)


class TestDerived:
    def test_corpus(self, gg_corpus):
        for S in gg_corpus:
            assert derived_gg_properties(S).verdict, S

    def test_exercise_matrices(self):
        G = sqrtdet_generalized_group()
        for A in (A1, A2):
            assert G.source(G.inverse(A)) == G.source(A)
            assert G.source(G.source(A)) == G.source(A)
            assert G.inverse(G.inverse(A)) == A

    def test_triangular_identity_idempotent_sampled(self):
        assert derived_gg_properties(
            triangular_generalized_group(), samples=100, seed=10
        ).verdict


def sandwich_gg():
    """Order-8 structure with two row and two column indices over a 2-cycle,
    twisted by the pattern P = [[0,0],[0,1]]; verified but not normal."""
    P = [[0, 0], [0, 1]]
    keys = [(i, g, l) for i in (0, 1) for g in (0, 1) for l in (0, 1)]

    def lab(k):
        return f"({k[0]},{k[1]},{k[2]})"

    def op(a, b):
        (i, g, l), (j, h, m) = a, b
        return (i, (g + P[l][j] + h) % 2, m)

    labels = [lab(k) for k in keys]
    e = {lab(k): lab((k[0], (-P[k[2]][k[0]]) % 2, k[2])) for k in keys}
    inv = {lab(k): lab(k) for k in keys}
    entries = [(lab(a), lab(b), lab(op(a, b))) for a in keys for b in keys]
    return build_generalized_group(labels, e, inv, entries)


class TestNormality:
    def test_groups_are_normal(self):
        assert is_normal_gg(cyclic_group_table(5, GENERALIZED_GROUP)).passed

    def test_identity_map_structures_are_normal(self):
        # when e is the identity map, e(ab) = ab = e(a)e(b) holds trivially
        assert is_normal_gg(rectangular_band_gg()).passed

    def test_sandwich_structure_not_normal(self):
        S = sandwich_gg()
        assert verify_generalized_group(S).verdict
        result = is_normal_gg(S)
        assert not result.passed
        assert result.witness is not None


class TestSubgroups:
    def test_whole_carrier(self, gg_corpus):
        for S in gg_corpus:
            assert check_generalized_subgroup(S, [e.label for e in S.elements]).passed

    def test_component_is_subgroup(self):
        S = left_zero_times_z2_gg()
        comp = component_subgroup(S, "x0")
        assert sorted(e.label for e in comp.elements) == ["x0", "x1"]
        assert check_generalized_subgroup(S, ["x0", "x1"]).passed
        assert verify_generalized_group(comp).verdict
        assert len(comp.units) == 1

    def test_component_of_group_is_whole(self):
        S = cyclic_group_table(4, GENERALIZED_GROUP)
        assert component_subgroup(S, "g1").order == 4

    def test_cross_class_union_can_fail(self):
        band = rectangular_band_gg()
        result = check_generalized_subgroup(band, ["11", "22"])
        assert not result.passed
        assert result.witness.elements == ("11", "22")

    def test_union_of_all_classes_passes(self):
        S = left_zero_times_z2_gg()
        assert check_generalized_subgroup(S, [e.label for e in S.elements]).passed

    def test_intersection_of_subgroups(self):
        S = cyclic_group_table(6, GENERALIZED_GROUP)
        h1 = ["g0", "g2", "g4"]
        h2 = ["g0", "g3"]
        assert check_generalized_subgroup(S, h1).passed
        assert check_generalized_subgroup(S, h2).passed
        inter = sorted(set(h1) & set(h2))
        assert inter == ["g0"]
        assert check_generalized_subgroup(S, inter).passed

    def test_not_a_subgroup_witness(self):
        S = cyclic_group_table(4, GENERALIZED_GROUP)
        result = check_generalized_subgroup(S, ["g1"])
        assert not result.passed

    def test_empty_subset(self):
        S = cyclic_group_table(2, GENERALIZED_GROUP)
        with pytest.raises(StructureError) as exc:
            check_generalized_subgroup(S, [])
        assert exc.value.code == "empty-subset"


class TestHomomorphisms:
    def test_identity(self):
        S = cyclic_group_table(4, GENERALIZED_GROUP)
        report = check_gg_homomorphism(S, S, {e.label: e.label for e in S.elements})
        assert report.verdict and report.is_isomorphism

    def test_mod_two_projection_and_images(self):
        z4 = cyclic_group_table(4, GENERALIZED_GROUP)
        z2 = cyclic_group_table(2, GENERALIZED_GROUP)
        f = {f"g{i}": f"g{i % 2}" for i in range(4)}
        report = check_gg_homomorphism(z4, z2, f)
        assert report.verdict and not report.is_isomorphism
        # image of the subgroup {0,2} and preimage of {0} are subgroups
        image = sorted({f[h] for h in ["g0", "g2"]})
        assert check_generalized_subgroup(z2, image).passed
        preimage = sorted(lab for lab, v in f.items() if v == "g0")
        assert preimage == ["g0", "g2"]
        assert check_generalized_subgroup(z4, preimage).passed

    def test_constant_map_to_identity_class(self):
        S = conftest_left_zero()
        trivial = cyclic_group_table(1, GENERALIZED_GROUP)
        report = check_gg_homomorphism(S, trivial, {e.label: "g0" for e in S.elements})
        assert report.verdict

    def test_non_homomorphism(self):
        z4 = cyclic_group_table(4, GENERALIZED_GROUP)
        f = {"g0": "g0", "g1": "g0", "g2": "g1", "g3": "g0"}
        z2 = cyclic_group_table(2, GENERALIZED_GROUP)
        assert not check_gg_homomorphism(z4, z2, f).verdict


def conftest_left_zero():
    from conftest import left_zero_gg

    return left_zero_gg(2)
