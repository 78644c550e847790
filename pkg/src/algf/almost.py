"""Almost groupoids: one unit map theta, product defined on theta-equal pairs.

Theta is stored once and mirrored into the table's source and target slots,
so all the groupoid-generic tooling (isotropy, substructure scans) applies
unchanged.  The verifier reads theta from the source slot of whatever table
it is given, which lets a structure built under another kind be re-checked
under these axioms; mismatches surface as fail verdicts with witnesses.
"""

from __future__ import annotations

import dataclasses
import random
from typing import Iterable, Sequence, Union

from .kernel import (
    ALMOST_GROUPOID,
    DEFAULT_SEED,
    GROUPOID,
    CheckResult,
    ElementId,
    FiniteStructureTable,
    MorphismReport,
    RuleStructure,
    StructureError,
    VerificationReport,
    Witness,
    build_finite_table,
    first_failure,
    is_rule_structure,
    sample_composable_pairs,
    sample_composable_triples,
    sample_elements,
)
from .groupoid import (
    Classification,
    _as_finite_map,
    _definedness_checks,
    _labels,
    _sorted_product,
    _surjectivity_check,
    associativity_first_failure,
    verify_groupoid,
)

Structure = Union[FiniteStructureTable, RuleStructure]


def theta_of(S: FiniteStructureTable, x: ElementId) -> ElementId:
    return S.source[x]


def verify_almost_groupoid(
    S: Structure, *, samples: int = 200, seed: int = DEFAULT_SEED
) -> VerificationReport:
    """Check the almost-groupoid axioms with theta read from the source map.

    Checks: theta surjective onto the units, "defined iff theta-equal" in both
    directions, associativity with agreement of definedness, the unit laws
    theta(x)*x = x*theta(x) = x, and the inverse laws
    x*inverse(x) = inverse(x)*x = theta(x).
    """
    if is_rule_structure(S):
        return _verify_almost_rule(S, samples, seed)
    return _verify_almost_finite(S)


def _verify_almost_finite(S: FiniteStructureTable) -> VerificationReport:
    prod = S.product
    theta = S.source
    checks = [_surjectivity_check("theta", S, theta)]
    checks.extend(
        _definedness_checks(S, "theta(x) = theta(y)", lambda x, y: theta[x] == theta[y])
    )

    w = associativity_first_failure(S)
    checks.append(CheckResult("associativity", w is None, w))

    def units():
        for x in S.elements:
            if prod.get((theta[x], x)) != x or prod.get((x, theta[x])) != x:
                yield Witness((x.label,), f"theta({x})*{x} or {x}*theta({x}) differs from {x}")

    checks.append(first_failure("units", units()))

    def inverses():
        for x in S.elements:
            ix = S.inverse[x]
            if prod.get((x, ix)) != theta[x] or prod.get((ix, x)) != theta[x]:
                yield Witness((x.label,), f"{x}*{ix} or {ix}*{x} differs from theta({x})")

    checks.append(first_failure("inverses", inverses()))
    return VerificationReport(tuple(checks))


def _verify_almost_rule(S: RuleStructure, samples: int, seed: int) -> VerificationReport:
    rng = random.Random(seed)
    elems = sample_elements(S, rng, samples)
    pairs = sample_composable_pairs(S, rng.randrange(2**32), samples)
    triples = sample_composable_triples(S, rng, samples)
    free_pairs = [(S.sample(rng), S.sample(rng)) for _ in range(samples)]
    checks = []

    def theta_into_units():
        for x in elems:
            if not S.is_unit(S.source(x)):
                yield Witness((S.fmt(x),), "theta(x) is not a unit")

    checks.append(first_failure("theta-into-units", theta_into_units()))

    def definedness():
        for x, y in pairs + free_pairs:
            defined = S.product(x, y) is not None
            if defined != S.eq(S.source(x), S.source(y)):
                word = "defined" if defined else "undefined"
                yield Witness(
                    (S.fmt(x), S.fmt(y)), f"product is {word} but theta-equality says otherwise"
                )

    checks.append(first_failure("defined-pairs-composable", definedness()))

    def assoc():
        for x, y, z in triples:
            xy, yz = S.product(x, y), S.product(y, z)
            left = S.product(xy, z) if xy is not None else None
            right = S.product(x, yz) if yz is not None else None
            if (left is None) != (right is None):
                yield Witness(
                    (S.fmt(x), S.fmt(y), S.fmt(z)),
                    "one grouping of the triple product is defined, the other is not",
                )
            elif left is not None and not S.eq(left, right):
                yield Witness((S.fmt(x), S.fmt(y), S.fmt(z)), "(xy)z != x(yz)")

    checks.append(first_failure("associativity", assoc()))

    def units():
        for x in elems:
            t = S.source(x)
            lu, ru = S.product(t, x), S.product(x, t)
            if lu is None or ru is None or not S.eq(lu, x) or not S.eq(ru, x):
                yield Witness((S.fmt(x),), "theta(x)*x or x*theta(x) differs from x")

    checks.append(first_failure("units", units()))

    def inverses():
        for x in elems:
            ix = S.inverse(x)
            t = S.source(x)
            li, ri = S.product(x, ix), S.product(ix, x)
            if li is None or ri is None or not S.eq(li, t) or not S.eq(ri, t):
                yield Witness((S.fmt(x),), "x*inverse(x) or inverse(x)*x differs from theta(x)")

    checks.append(first_failure("inverses", inverses()))
    return VerificationReport(tuple(checks))


def derived_almost_properties(
    S: Structure, *, samples: int = 200, seed: int = DEFAULT_SEED
) -> VerificationReport:
    """Consequences for a certified structure: unit fixed points, theta of
    products and inverses, idempotence of theta, the inverse-of-product rule,
    double inversion, symmetry of definedness, and definedness of the square
    and cube of every element."""
    if is_rule_structure(S):
        return _derived_almost_rule(S, samples, seed)
    return _derived_almost_finite(S)


def _derived_almost_finite(S: FiniteStructureTable) -> VerificationReport:
    prod = S.product
    theta = S.source
    checks = []

    def unit_fixed():
        for u in S.units:
            if theta[u] != u:
                yield Witness((u.label,), f"theta({u}) != {u}")
            elif prod.get((u, u)) != u or S.inverse[u] != u:
                yield Witness((u.label,), f"{u}*{u} != {u} or inverse({u}) != {u}")

    checks.append(first_failure("unit-fixed-points", unit_fixed()))

    def theta_of_product():
        for (x, y), xy in _sorted_product(S):
            if theta[xy] != theta[x]:
                yield Witness(_labels(x, y), f"theta({x}*{y}) != theta({x})")

    checks.append(first_failure("theta-of-product", theta_of_product()))

    def theta_of_inverse():
        for x in S.elements:
            if theta[S.inverse[x]] != theta[x]:
                yield Witness((x.label,), f"theta(inverse({x})) != theta({x})")

    checks.append(first_failure("theta-of-inverse", theta_of_inverse()))

    def theta_idempotent():
        for x in S.elements:
            if theta[theta[x]] != theta[x]:
                yield Witness((x.label,), f"theta(theta({x})) != theta({x})")

    checks.append(first_failure("theta-idempotent", theta_idempotent()))

    def inverse_of_product():
        for (x, y), xy in _sorted_product(S):
            rev = prod.get((S.inverse[y], S.inverse[x]))
            if rev is None:
                yield Witness(_labels(x, y), "the reversed inverse pair is not composable")
            elif rev != S.inverse[xy]:
                yield Witness(_labels(x, y), f"inverse({x}*{y}) != inverse({y})*inverse({x})")

    checks.append(first_failure("inverse-of-product", inverse_of_product()))

    def double_inverse():
        for x in S.elements:
            if S.inverse[S.inverse[x]] != x:
                yield Witness((x.label,), f"inverse(inverse({x})) != {x}")

    checks.append(first_failure("double-inverse", double_inverse()))

    def definedness_symmetric():
        for x in S.elements:
            for y in S.elements:
                if ((x, y) in prod) != ((y, x) in prod):
                    yield Witness(_labels(x, y), f"{x}*{y} and {y}*{x} disagree on definedness")

    checks.append(first_failure("definedness-symmetric", definedness_symmetric()))

    def powers_defined():
        for a in S.elements:
            sq = prod.get((a, a))
            if sq is None:
                yield Witness((a.label,), f"{a}*{a} is undefined")
            elif prod.get((sq, a)) is None:
                yield Witness((a.label,), f"({a}*{a})*{a} is undefined")

    checks.append(first_failure("powers-defined", powers_defined()))
    return VerificationReport(tuple(checks))


def _derived_almost_rule(S: RuleStructure, samples: int, seed: int) -> VerificationReport:
    rng = random.Random(seed)
    elems = sample_elements(S, rng, samples)
    pairs = sample_composable_pairs(S, rng.randrange(2**32), samples)
    checks = []

    def theta_of_product():
        for x, y in pairs:
            xy = S.product(x, y)
            if xy is None or not S.eq(S.source(xy), S.source(x)):
                yield Witness((S.fmt(x), S.fmt(y)), "theta(x*y) != theta(x)")

    checks.append(first_failure("theta-of-product", theta_of_product()))

    def theta_of_inverse():
        for x in elems:
            if not S.eq(S.source(S.inverse(x)), S.source(x)):
                yield Witness((S.fmt(x),), "theta(inverse(x)) != theta(x)")

    checks.append(first_failure("theta-of-inverse", theta_of_inverse()))

    def theta_idempotent():
        for x in elems:
            t = S.source(x)
            if not S.eq(S.source(t), t):
                yield Witness((S.fmt(x),), "theta(theta(x)) != theta(x)")

    checks.append(first_failure("theta-idempotent", theta_idempotent()))

    def inverse_of_product():
        for x, y in pairs:
            xy = S.product(x, y)
            rev = S.product(S.inverse(y), S.inverse(x))
            if xy is None or rev is None or not S.eq(S.inverse(xy), rev):
                yield Witness((S.fmt(x), S.fmt(y)), "inverse of the product is wrong")

    checks.append(first_failure("inverse-of-product", inverse_of_product()))

    def double_inverse():
        for x in elems:
            if not S.eq(S.inverse(S.inverse(x)), x):
                yield Witness((S.fmt(x),), "inverse(inverse(x)) != x")

    checks.append(first_failure("double-inverse", double_inverse()))

    def definedness_symmetric():
        for x, y in pairs:
            if S.product(y, x) is None:
                yield Witness((S.fmt(x), S.fmt(y)), "x*y is defined but y*x is not")

    checks.append(first_failure("definedness-symmetric", definedness_symmetric()))

    def powers_defined():
        for a in elems:
            sq = S.product(a, a)
            if sq is None or S.product(sq, a) is None:
                yield Witness((S.fmt(a),), "a*a or (a*a)*a is undefined")

    checks.append(first_failure("powers-defined", powers_defined()))
    return VerificationReport(tuple(checks))


def as_groupoid(S: Structure) -> Structure:
    """The same structure viewed with source = target = theta; the result
    passes the groupoid verifier, and its anchor misses every cross-unit
    pair, so it is never transitive with more than one unit."""
    if is_rule_structure(S):
        return dataclasses.replace(S, kind=GROUPOID)
    table = build_finite_table(
        [e.label for e in S.elements],
        [u.label for u in S.units],
        {x.label: S.source[x].label for x in S.elements},
        {x.label: S.target[x].label for x in S.elements},
        {x.label: S.inverse[x].label for x in S.elements},
        [(x.label, y.label, z.label) for (x, y), z in S.product.items()],
        GROUPOID,
    )
    report = verify_groupoid(table)
    if not report.verdict:
        w = report.witness
        raise StructureError(
            "construction-invalid",
            f"groupoid view failed verification: {w.detail if w else 'unknown'}",
        )
    return table


def isotropy_group_almost(S: FiniteStructureTable, u) -> FiniteStructureTable:
    """The theta-fiber over a unit, with the restricted (total) product."""
    uid = S.element(u)
    if uid not in set(S.units):
        raise StructureError("unit-not-found", f"{uid.label!r} is not a unit")
    members = [x for x in S.elements if S.source[x] == uid]
    member_set = set(members)
    entries = []
    for x in members:
        for y in members:
            xy = S.product.get((x, y))
            if xy is None or xy not in member_set:
                raise StructureError(
                    "construction-invalid", f"fiber over {uid.label!r} is not closed at {x}*{y}"
                )
            entries.append((x.label, y.label, xy.label))
    const = {x.label: uid.label for x in members}
    return build_finite_table(
        [x.label for x in members],
        [uid.label],
        const,
        const,
        {x.label: S.inverse[x].label for x in members},
        entries,
        ALMOST_GROUPOID,
    )


def is_commutative_almost(S: FiniteStructureTable) -> CheckResult:
    """Commutativity in the fiberwise sense: every isotropy group is abelian
    (not global commutativity of the partial product)."""
    def gen():
        for u in S.units:
            fiber = [x for x in S.elements if S.source[x] == u]
            for x in fiber:
                for y in fiber:
                    if S.product.get((x, y)) != S.product.get((y, x)):
                        yield Witness(
                            _labels(x, y), f"{x}*{y} != {y}*{x} inside the fiber of {u}"
                        )

    return first_failure("commutative-fibers", gen())


def classify_almost_substructure(
    S: FiniteStructureTable, H: Iterable[str], H0: Iterable[str]
) -> Classification:
    """Classify (H, H0) as not-sub, sub, wide or normal.

    Sub requires theta(H) = H0 and closure under the defined products and
    inversion; wide additionally requires H0 to be the full unit set; normal
    additionally requires closure under every defined conjugation g*h*g^-1.
    """
    H_ids = {S.element(h) for h in H}
    H0_ids = {S.element(h) for h in H0}
    if not H_ids or not H0_ids:
        raise StructureError("empty-subset", "H and H0 must be nonempty")
    theta = S.source

    image = {theta[x] for x in H_ids}
    if image != H0_ids:
        off = sorted(image.symmetric_difference(H0_ids), key=lambda e: e.index)[0]
        return Classification(
            "not-sub", Witness((off.label,), f"theta(H) and H0 disagree at {off}")
        )
    for x in sorted(H_ids, key=lambda e: e.index):
        if S.inverse[x] not in H_ids:
            return Classification(
                "not-sub", Witness((x.label,), f"inverse({x}) is outside H")
            )
        for y in sorted(H_ids, key=lambda e: e.index):
            xy = S.product.get((x, y))
            if xy is not None and xy not in H_ids:
                return Classification(
                    "not-sub", Witness(_labels(x, y), f"{x}*{y} = {xy} is outside H")
                )

    if H0_ids != set(S.units):
        missing = next(u for u in S.units if u not in H0_ids)
        return Classification("sub", Witness((missing.label,), f"unit {missing} is not in H0"))

    for g in S.elements:
        ig = S.inverse[g]
        for h in sorted(H_ids, key=lambda e: e.index):
            gh = S.product.get((g, h))
            if gh is None:
                continue
            conj = S.product.get((gh, ig))
            if conj is not None and conj not in H_ids:
                return Classification(
                    "wide", Witness(_labels(g, h), f"{g}*{h}*{ig} = {conj} leaves H")
                )
    return Classification("normal", None)


def check_almost_morphism(
    S: Structure,
    S2: Structure,
    f,
    f0,
    *,
    samples: int = 200,
    seed: int = DEFAULT_SEED,
) -> MorphismReport:
    """Check that (f, f0) is an almost-groupoid morphism: multiplicative on
    composable pairs and theta-compatible (theta' after f equals f0 after
    theta).  Reports whether the pair is an isomorphism on finite inputs."""
    if is_rule_structure(S) != is_rule_structure(S2):
        raise StructureError(
            "mixed-structure-unsupported",
            "morphism checks need both structures finite or both rule-backed",
        )
    if is_rule_structure(S):
        return _check_almost_morphism_rule(S, S2, f, f0, samples, seed)
    return _check_almost_morphism_finite(S, S2, f, f0)


def _check_almost_morphism_finite(S, S2, f, f0) -> MorphismReport:
    fm = _as_finite_map("f", f, S.elements, S2)
    f0m = _as_finite_map("f0", f0, S.units, S2)
    checks = []

    def multiplicative():
        for (x, y), xy in _sorted_product(S):
            img = S2.product.get((fm(x), fm(y)))
            if img is None:
                yield Witness(_labels(x, y), f"images of {x}, {y} are not composable")
            elif img != fm(xy):
                yield Witness(_labels(x, y), f"f({x}*{y}) = {fm(xy)} but f({x})*f({y}) = {img}")

    checks.append(first_failure("multiplicative", multiplicative()))

    def unit_compatible():
        for x in S.elements:
            if S2.source[fm(x)] != f0m(S.source[x]):
                yield Witness(
                    (x.label,),
                    f"theta(f({x})) = {S2.source[fm(x)]} but f0(theta({x})) = {f0m(S.source[x])}",
                )

    checks.append(first_failure("unit-compatible", unit_compatible()))

    images = {fm(x) for x in S.elements}
    unit_images = {f0m(u) for u in S.units}
    iso = (
        len(images) == len(S.elements)
        and images == set(S2.elements)
        and len(unit_images) == len(S.units)
        and unit_images == set(S2.units)
    )
    return MorphismReport(tuple(checks), is_isomorphism=iso)


def _check_almost_morphism_rule(S, S2, f, f0, samples, seed) -> MorphismReport:
    rng = random.Random(seed)
    pairs = sample_composable_pairs(S, rng.randrange(2**32), samples)
    elems = sample_elements(S, rng, samples)
    checks = []

    def multiplicative():
        for x, y in pairs:
            xy = S.product(x, y)
            img = S2.product(f(x), f(y))
            if img is None or not S2.eq(img, f(xy)):
                yield Witness((S.fmt(x), S.fmt(y)), "f(x*y) != f(x)*f(y)")

    checks.append(first_failure("multiplicative", multiplicative()))

    def unit_compatible():
        for x in elems:
            if not S2.eq(S2.source(f(x)), f0(S.source(x))):
                yield Witness((S.fmt(x),), "theta(f(x)) != f0(theta(x))")

    checks.append(first_failure("unit-compatible", unit_compatible()))
    return MorphismReport(tuple(checks), is_isomorphism=None)


# ---------------------------------------------------------------------------
# concrete almost groupoids
# ---------------------------------------------------------------------------

def _certify_almost(table: FiniteStructureTable) -> FiniteStructureTable:
    report = verify_almost_groupoid(table)
    if not report.verdict:
        w = report.witness
        raise StructureError(
            "construction-invalid",
            f"construction failed verification: {w.detail if w else 'unknown check'}",
        )
    return table


def b2_zn_almost_groupoid(n: int) -> FiniteStructureTable:
    """Two disjoint additive cycles of length n indexed by a bit: elements
    (a, c) with a in {0, 1} and c mod n, composable only when the bits agree.
    Order 2n with exactly two units (0,0) and (1,0)."""
    if n < 1:
        raise StructureError("nonpositive-n", f"n must be >= 1, got {n}")

    def lab(a, c):
        return f"({a},{c})"

    labels = [lab(a, c) for a in (0, 1) for c in range(n)]
    theta = {lab(a, c): lab(a, 0) for a in (0, 1) for c in range(n)}
    inverse = {lab(a, c): lab(a, (-c) % n) for a in (0, 1) for c in range(n)}
    entries = [
        (lab(a, j), lab(a, k), lab(a, (j + k) % n))
        for a in (0, 1)
        for j in range(n)
        for k in range(n)
    ]
    table = build_finite_table(
        labels, [lab(0, 0), lab(1, 0)], theta, theta, inverse, entries, ALMOST_GROUPOID
    )
    return _certify_almost(table)


def null_almost_groupoid(units: Sequence[str]) -> FiniteStructureTable:
    """Every element is its own unit and u*u = u is the only product."""
    labels = [str(u) for u in units]
    if not labels:
        raise StructureError("empty-set", "the unit set must be nonempty")
    ident = {u: u for u in labels}
    entries = [(u, u, u) for u in labels]
    table = build_finite_table(labels, labels, ident, ident, ident, entries, ALMOST_GROUPOID)
    return _certify_almost(table)
