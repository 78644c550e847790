"""Generalized groups: total product, one local identity e(a) per element.

The identity map is stored in the table's source/target slot, so the unit
set is its image and the composable set is total.  Exact rational arithmetic
is the default for the rule-backed matrix families; a float mode exists for
carriers whose square roots are not rational.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Iterable, Union

from . import matrices
from .kernel import (
    DEFAULT_SEED,
    GENERALIZED_GROUP,
    CheckResult,
    FiniteStructureTable,
    MorphismReport,
    RuleStructure,
    StructureError,
    VerificationReport,
    Witness,
    build_generalized_group,
    first_failure,
    is_rule_structure,
    sample_elements,
)
from .groupoid import _as_finite_map, _labels, _sorted_product, associativity_first_failure

Structure = Union[FiniteStructureTable, RuleStructure]


def verify_generalized_group(
    S: Structure, *, samples: int = 200, seed: int = DEFAULT_SEED
) -> VerificationReport:
    """Check totality, associativity, the identity laws with uniqueness of
    each local identity, and the inverse laws.

    Uniqueness is scanned exhaustively on finite tables.  On rule structures
    it cannot be scanned, so the provided identity map is checked to satisfy
    the identity laws and to be idempotent, and uniqueness is trusted to the
    structure theory of the axioms.
    """
    if is_rule_structure(S):
        return _verify_gg_rule(S, samples, seed)
    return _verify_gg_finite(S)


def _verify_gg_finite(S: FiniteStructureTable) -> VerificationReport:
    prod = S.product
    e = S.source
    checks = []

    def total():
        for x in S.elements:
            for y in S.elements:
                if (x, y) not in prod:
                    yield Witness(_labels(x, y), f"{x}*{y} is undefined; the product must be total")

    checks.append(first_failure("product-total", total()))

    w = associativity_first_failure(S)
    checks.append(CheckResult("associativity", w is None, w))

    def identity_laws():
        for a in S.elements:
            ea = e[a]
            if prod.get((a, ea)) != a or prod.get((ea, a)) != a:
                yield Witness((a.label,), f"{a}*e({a}) or e({a})*{a} differs from {a}")

    checks.append(first_failure("identity-laws", identity_laws()))

    def identity_unique():
        for a in S.elements:
            cands = [
                u for u in S.elements if prod.get((a, u)) == a and prod.get((u, a)) == a
            ]
            if len(cands) != 1:
                yield Witness(
                    (a.label,) + tuple(c.label for c in cands),
                    f"{a} has {len(cands)} local identities: "
                    + ", ".join(str(c) for c in cands),
                )
            elif cands[0] != e[a]:
                yield Witness(
                    (a.label, cands[0].label),
                    f"the unique local identity of {a} is {cands[0]}, not the stored e({a}) = {e[a]}",
                )

    checks.append(first_failure("identity-unique", identity_unique()))

    def inverse_laws():
        for a in S.elements:
            ia = S.inverse[a]
            if prod.get((a, ia)) != e[a] or prod.get((ia, a)) != e[a]:
                yield Witness((a.label,), f"{a}*{ia} or {ia}*{a} differs from e({a})")

    checks.append(first_failure("inverse-laws", inverse_laws()))
    return VerificationReport(tuple(checks))


def _verify_gg_rule(S: RuleStructure, samples: int, seed: int) -> VerificationReport:
    rng = random.Random(seed)
    elems = sample_elements(S, rng, samples)
    pairs = [(S.sample(rng), S.sample(rng)) for _ in range(samples)]
    triples = [(S.sample(rng), S.sample(rng), S.sample(rng)) for _ in range(samples)]
    checks = []

    def total():
        for x, y in pairs:
            if S.product(x, y) is None:
                yield Witness((S.fmt(x), S.fmt(y)), "total product returned undefined")

    checks.append(first_failure("product-total", total()))

    def assoc():
        for x, y, z in triples:
            left = S.product(S.product(x, y), z)
            right = S.product(x, S.product(y, z))
            if not S.eq(left, right):
                yield Witness(
                    (S.fmt(x), S.fmt(y), S.fmt(z)),
                    f"(xy)z = {S.fmt(left)} but x(yz) = {S.fmt(right)}",
                )

    checks.append(first_failure("associativity", assoc()))

    def identity_laws():
        for a in elems:
            ea = S.source(a)
            if not S.eq(S.product(a, ea), a) or not S.eq(S.product(ea, a), a):
                yield Witness((S.fmt(a),), "a*e(a) or e(a)*a differs from a")

    checks.append(first_failure("identity-laws", identity_laws()))

    def identity_idempotent():
        for a in elems:
            ea = S.source(a)
            if not S.eq(S.source(ea), ea):
                yield Witness((S.fmt(a),), "e(e(a)) != e(a)")
            elif not S.is_unit(ea):
                yield Witness((S.fmt(a),), "e(a) is not a fixed point of e")

    checks.append(first_failure("identity-idempotent", identity_idempotent()))

    def inverse_laws():
        for a in elems:
            ia = S.inverse(a)
            ea = S.source(a)
            if not S.eq(S.product(a, ia), ea) or not S.eq(S.product(ia, a), ea):
                yield Witness((S.fmt(a),), "a*inverse(a) or inverse(a)*a differs from e(a)")

    checks.append(first_failure("inverse-laws", inverse_laws()))
    return VerificationReport(tuple(checks))


def derived_gg_properties(
    S: Structure, *, samples: int = 200, seed: int = DEFAULT_SEED
) -> VerificationReport:
    """Consequences for a verified structure: unique inverses, e(a) = e(a^-1),
    idempotence of the identity map and double inversion."""
    if is_rule_structure(S):
        return _derived_gg_rule(S, samples, seed)
    return _derived_gg_finite(S)


def _derived_gg_finite(S: FiniteStructureTable) -> VerificationReport:
    prod = S.product
    e = S.source
    checks = []

    def inverse_unique():
        for a in S.elements:
            cands = [
                b for b in S.elements if prod.get((a, b)) == e[a] and prod.get((b, a)) == e[a]
            ]
            if cands != [S.inverse[a]]:
                yield Witness(
                    (a.label,) + tuple(c.label for c in cands),
                    f"{a} has inverse candidates {[str(c) for c in cands]}",
                )

    checks.append(first_failure("inverse-unique", inverse_unique()))

    def identity_of_inverse():
        for a in S.elements:
            if e[S.inverse[a]] != e[a]:
                yield Witness((a.label,), f"e(inverse({a})) != e({a})")

    checks.append(first_failure("identity-of-inverse", identity_of_inverse()))

    def identity_idempotent():
        for a in S.elements:
            if e[e[a]] != e[a]:
                yield Witness((a.label,), f"e(e({a})) != e({a})")

    checks.append(first_failure("identity-idempotent", identity_idempotent()))

    def double_inverse():
        for a in S.elements:
            if S.inverse[S.inverse[a]] != a:
                yield Witness((a.label,), f"inverse(inverse({a})) != {a}")

    checks.append(first_failure("double-inverse", double_inverse()))
    return VerificationReport(tuple(checks))


def _derived_gg_rule(S: RuleStructure, samples: int, seed: int) -> VerificationReport:
    rng = random.Random(seed)
    elems = sample_elements(S, rng, samples)
    checks = []

    def identity_of_inverse():
        for a in elems:
            if not S.eq(S.source(S.inverse(a)), S.source(a)):
                yield Witness((S.fmt(a),), "e(inverse(a)) != e(a)")

    checks.append(first_failure("identity-of-inverse", identity_of_inverse()))

    def identity_idempotent():
        for a in elems:
            ea = S.source(a)
            if not S.eq(S.source(ea), ea):
                yield Witness((S.fmt(a),), "e(e(a)) != e(a)")

    checks.append(first_failure("identity-idempotent", identity_idempotent()))

    def double_inverse():
        for a in elems:
            if not S.eq(S.inverse(S.inverse(a)), a):
                yield Witness((S.fmt(a),), "inverse(inverse(a)) != a")

    checks.append(first_failure("double-inverse", double_inverse()))
    return VerificationReport(tuple(checks))


def is_normal_gg(
    S: Structure, *, samples: int = 200, seed: int = DEFAULT_SEED
) -> CheckResult:
    """True iff the identity map is multiplicative: e(ab) = e(a)e(b)."""
    if is_rule_structure(S):
        rng = random.Random(seed)

        def gen_rule():
            for _ in range(samples):
                a, b = S.sample(rng), S.sample(rng)
                lhs = S.source(S.product(a, b))
                rhs = S.product(S.source(a), S.source(b))
                if rhs is None or not S.eq(lhs, rhs):
                    yield Witness(
                        (S.fmt(a), S.fmt(b)),
                        f"e(ab) = {S.fmt(lhs)} but e(a)e(b) = {'undefined' if rhs is None else S.fmt(rhs)}",
                    )

        return first_failure("normal-identity-map", gen_rule())

    def gen():
        for (a, b), ab in _sorted_product(S):
            lhs = S.source[ab]
            rhs = S.product.get((S.source[a], S.source[b]))
            if rhs != lhs:
                yield Witness(_labels(a, b), f"e({a}*{b}) = {lhs} but e({a})*e({b}) = {rhs}")

    return first_failure("normal-identity-map", gen())


def check_generalized_subgroup(S: FiniteStructureTable, H: Iterable[str]) -> CheckResult:
    """True iff a*b^-1 stays in H for all a, b in the nonempty subset H."""
    ids = {S.element(h) for h in H}
    if not ids:
        raise StructureError("empty-subset", "H must be nonempty")

    def gen():
        for a in sorted(ids, key=lambda x: x.index):
            for b in sorted(ids, key=lambda x: x.index):
                q = S.product.get((a, S.inverse[b]))
                if q is None or q not in ids:
                    yield Witness(
                        _labels(a, b),
                        f"{a}*inverse({b}) = {'undefined' if q is None else str(q)} is outside H",
                    )

    return first_failure("generalized-subgroup", gen())


def component_subgroup(S: FiniteStructureTable, a) -> FiniteStructureTable:
    """The class { x : e(x) = e(a) } with the restricted product; a group
    with identity e(a)."""
    aid = S.element(a)
    e = S.source
    members = [x for x in S.elements if e[x] == e[aid]]
    member_set = set(members)
    entries = []
    for x in members:
        for y in members:
            xy = S.product.get((x, y))
            if xy is None or xy not in member_set:
                raise StructureError(
                    "construction-invalid",
                    f"the identity class of {aid.label!r} is not closed at {x}*{y}",
                )
            entries.append((x.label, y.label, xy.label))
    return build_generalized_group(
        [x.label for x in members],
        {x.label: e[x].label for x in members},
        {x.label: S.inverse[x].label for x in members},
        entries,
    )


def check_gg_homomorphism(
    S: Structure, S2: Structure, f, *, samples: int = 200, seed: int = DEFAULT_SEED
) -> MorphismReport:
    """Check multiplicativity of f; also reports, informationally, the derived
    facts f(e(a)) = e(f(a)) and f(a^-1) = f(a)^-1."""
    if is_rule_structure(S) != is_rule_structure(S2):
        raise StructureError(
            "mixed-structure-unsupported",
            "homomorphism checks need both structures finite or both rule-backed",
        )
    if is_rule_structure(S):
        return _check_gg_hom_rule(S, S2, f, samples, seed)
    return _check_gg_hom_finite(S, S2, f)


def _check_gg_hom_finite(S: FiniteStructureTable, S2: FiniteStructureTable, f) -> MorphismReport:
    fm = _as_finite_map("f", f, S.elements, S2)
    checks = []

    def multiplicative():
        for (a, b), ab in _sorted_product(S):
            img = S2.product.get((fm(a), fm(b)))
            if img != fm(ab):
                yield Witness(
                    _labels(a, b),
                    f"f({a}*{b}) = {fm(ab)} but f({a})*f({b}) = {img}",
                )

    checks.append(first_failure("multiplicative", multiplicative()))

    def respects_identities():
        for a in S.elements:
            if fm(S.source[a]) != S2.source[fm(a)]:
                yield Witness((a.label,), f"f(e({a})) != e(f({a}))")

    checks.append(first_failure("respects-identities", respects_identities(), required=False))

    def respects_inverses():
        for a in S.elements:
            if fm(S.inverse[a]) != S2.inverse[fm(a)]:
                yield Witness((a.label,), f"f(inverse({a})) != inverse(f({a}))")

    checks.append(first_failure("respects-inverses", respects_inverses(), required=False))

    images = {fm(a) for a in S.elements}
    iso = len(images) == len(S.elements) and images == set(S2.elements)
    return MorphismReport(tuple(checks), is_isomorphism=iso)


def _check_gg_hom_rule(S: RuleStructure, S2: RuleStructure, f, samples: int, seed: int) -> MorphismReport:
    rng = random.Random(seed)
    elems = sample_elements(S, rng, samples)
    pairs = [(S.sample(rng), S.sample(rng)) for _ in range(samples)]
    checks = []

    def multiplicative():
        for a, b in pairs:
            lhs = f(S.product(a, b))
            rhs = S2.product(f(a), f(b))
            if rhs is None or not S2.eq(lhs, rhs):
                yield Witness(
                    (S.fmt(a), S.fmt(b)),
                    f"f(ab) = {S2.fmt(lhs)} but f(a)f(b) = {'undefined' if rhs is None else S2.fmt(rhs)}",
                )

    checks.append(first_failure("multiplicative", multiplicative()))

    def respects_identities():
        for a in elems:
            if not S2.eq(f(S.source(a)), S2.source(f(a))):
                yield Witness((S.fmt(a),), "f(e(a)) != e(f(a))")

    checks.append(first_failure("respects-identities", respects_identities(), required=False))

    def respects_inverses():
        for a in elems:
            if not S2.eq(f(S.inverse(a)), S2.inverse(f(a))):
                yield Witness((S.fmt(a),), "f(inverse(a)) != inverse(f(a))")

    checks.append(first_failure("respects-inverses", respects_inverses(), required=False))
    return MorphismReport(tuple(checks), is_isomorphism=None)


# ---------------------------------------------------------------------------
# concrete generalized groups
# ---------------------------------------------------------------------------

def _is_square_fraction(q: Fraction) -> bool:
    return q > 0 and matrices.sqrt_exact(q) is not None


def _rational_matrix(rng: random.Random, n: int):
    return tuple(
        tuple(Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(n))
        for _ in range(n)
    )


def sqrtdet_generalized_group(mode: str = "rational") -> RuleStructure:
    """2x2 matrices of positive determinant with A*B = sqrt(det(A)) . B.

    The identity of A is A scaled by 1/sqrt(det(A)) and its inverse is A
    scaled by 1/det(A).  Rational mode additionally restricts the carrier to
    determinants that are perfect squares of rationals, which keeps every
    computation exact; float mode covers the general carrier at tolerance
    1e-9.
    """
    if mode == "rational":

        def member(a) -> bool:
            return (
                isinstance(a, tuple)
                and len(a) == 2
                and all(len(r) == 2 and all(isinstance(x, Fraction) for x in r) for r in a)
                and _is_square_fraction(matrices.det(a))
            )

        def root(a) -> Fraction:
            return matrices.sqrt_exact(matrices.det(a))

        def sample(rng: random.Random):
            while True:
                m = _rational_matrix(rng, 2)
                d = matrices.det(m)
                if d != 0:
                    # scaling one row by det makes the determinant det^2 > 0
                    return (tuple(d * x for x in m[0]), m[1])

        return RuleStructure(
            kind=GENERALIZED_GROUP,
            name="sqrtdet(rational)",
            value_domain="rational-matrix-2x2",
            membership=member,
            source=lambda a: matrices.mat_scale(1 / root(a), a),
            target=lambda a: matrices.mat_scale(1 / root(a), a),
            inverse=lambda a: matrices.mat_scale(1 / matrices.det(a), a),
            product=lambda a, b: matrices.mat_scale(root(a), b),
            is_unit=lambda a: matrices.det(a) == 1,
            sample=sample,
            eq=lambda a, b: a == b,
            fmt=matrices.fmt_matrix,
        )

    if mode == "float":

        def member_f(a) -> bool:
            return isinstance(a, tuple) and len(a) == 2 and matrices.det(a) > 0

        def sample_f(rng: random.Random):
            while True:
                a = tuple(tuple(rng.uniform(-2.0, 2.0) for _ in range(2)) for _ in range(2))
                if matrices.det(a) >= 0.1:
                    return a

        return RuleStructure(
            kind=GENERALIZED_GROUP,
            name="sqrtdet(float)",
            value_domain="float-matrix",
            membership=member_f,
            source=lambda a: matrices.mat_scale(1.0 / math.sqrt(matrices.det(a)), a),
            target=lambda a: matrices.mat_scale(1.0 / math.sqrt(matrices.det(a)), a),
            inverse=lambda a: matrices.mat_scale(1.0 / matrices.det(a), a),
            product=lambda a, b: matrices.mat_scale(math.sqrt(matrices.det(a)), b),
            is_unit=lambda a: abs(matrices.det(a) - 1.0) <= matrices.FLOAT_TOLERANCE,
            sample=sample_f,
            eq=matrices.mat_close,
            fmt=matrices.fmt_matrix,
        )

    raise StructureError("unknown-mode", f"mode must be rational or float, got {mode!r}")


def triangular_generalized_group() -> RuleStructure:
    """3x3 rational matrices [[a,b,c],[0,1,0],[0,0,0]] with a != 0 under the
    usual matrix product.

    The identity of A is [[1,0,c/a],[0,1,0],[0,0,0]] and its inverse is
    [[1/a,-b/a,c/a^2],[0,1,0],[0,0,0]]; membership rejects a = 0, which the
    identity formula divides by.
    """

    def member(m) -> bool:
        return (
            isinstance(m, tuple)
            and len(m) == 3
            and all(len(r) == 3 and all(isinstance(x, Fraction) for x in r) for r in m)
            and m[1] == (Fraction(0), Fraction(1), Fraction(0))
            and m[2] == (Fraction(0), Fraction(0), Fraction(0))
            and m[0][0] != 0
        )

    def make(a, b, c):
        return (
            (Fraction(a), Fraction(b), Fraction(c)),
            (Fraction(0), Fraction(1), Fraction(0)),
            (Fraction(0), Fraction(0), Fraction(0)),
        )

    def identity_of(m):
        a, _b, c = m[0]
        return make(1, 0, c / a)

    def inverse_of(m):
        a, b, c = m[0]
        return make(1 / a, -b / a, c / (a * a))

    def sample(rng: random.Random):
        a = Fraction(rng.choice([n for n in range(-4, 5) if n != 0]), rng.randint(1, 3))
        b = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        c = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        return make(a, b, c)

    return RuleStructure(
        kind=GENERALIZED_GROUP,
        name="triangular",
        value_domain="rational-matrix-3x3",
        membership=member,
        source=identity_of,
        target=identity_of,
        inverse=inverse_of,
        product=matrices.mat_mul,
        is_unit=lambda m: m[0][0] == 1 and m[0][1] == 0,
        sample=sample,
        eq=lambda a, b: a == b,
        fmt=matrices.fmt_matrix,
    )


def rstar_group(mode: str = "rational") -> RuleStructure:
    """Nonzero numbers under multiplication, as a one-identity structure;
    the usual codomain for determinant-style maps."""
    if mode == "rational":
        return RuleStructure(
            kind=GENERALIZED_GROUP,
            name="rstar(rational)",
            value_domain="rational-scalar",
            membership=lambda x: isinstance(x, Fraction) and x != 0,
            source=lambda x: Fraction(1),
            target=lambda x: Fraction(1),
            inverse=lambda x: 1 / x,
            product=lambda x, y: x * y,
            is_unit=lambda x: x == 1,
            sample=lambda rng: Fraction(
                rng.choice([n for n in range(-9, 10) if n != 0]), rng.randint(1, 9)
            ),
            eq=lambda x, y: x == y,
            fmt=matrices.fmt_number,
        )
    if mode == "float":
        return RuleStructure(
            kind=GENERALIZED_GROUP,
            name="rstar(float)",
            value_domain="float-scalar",
            membership=lambda x: isinstance(x, float) and x != 0.0,
            source=lambda x: 1.0,
            target=lambda x: 1.0,
            inverse=lambda x: 1.0 / x,
            product=lambda x, y: x * y,
            is_unit=lambda x: abs(x - 1.0) <= matrices.FLOAT_TOLERANCE,
            sample=lambda rng: rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 4.0),
            eq=lambda x, y: abs(x - y) <= matrices.FLOAT_TOLERANCE,
            fmt=matrices.fmt_number,
        )
    raise StructureError("unknown-mode", f"mode must be rational or float, got {mode!r}")
