"""Groupoids: verification, derived properties, substructures and morphisms.

A groupoid here is a structure whose partial product is defined exactly when
``target(x) == source(y)``.  Verifiers work on any finite table (whatever its
declared kind) by reading the raw maps, so a structure built as one kind can
be re-checked under this kind's rules; failures come back as fail verdicts
with witnesses, never exceptions.

Finite inputs are checked exhaustively, rule-backed inputs on deterministic
samples drawn from an explicit seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from . import matrices
from .kernel import (
    ALMOST_GROUPOID,
    DEFAULT_SEED,
    GROUPOID,
    CheckResult,
    ElementId,
    FiniteStructureTable,
    MorphismPair,
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

Structure = Union[FiniteStructureTable, RuleStructure]


def _sorted_product(S: FiniteStructureTable):
    return sorted(S.product.items(), key=lambda kv: (kv[0][0].index, kv[0][1].index))


def _labels(*eids) -> tuple[str, ...]:
    return tuple(e.label for e in eids)


# ---------------------------------------------------------------------------
# exhaustive scans shared with the almost-groupoid verifier
# ---------------------------------------------------------------------------

def associativity_first_failure(S: FiniteStructureTable) -> Optional[Witness]:
    """First triple, in carrier order, where (xy)z and x(yz) disagree.

    Disagreement covers both directions of definedness as well as unequal
    values; definedness is read from the raw product table.
    """
    prod = S.product
    by_first: dict[ElementId, list[tuple[ElementId, ElementId]]] = {}
    entries = _sorted_product(S)
    for (a, b), ab in entries:
        by_first.setdefault(a, []).append((b, ab))

    cand: Optional[tuple[tuple[int, int, int], Witness]] = None
    for (x, y), xy in entries:
        for z, left in by_first.get(xy, ()):
            yz = prod.get((y, z))
            if yz is None:
                w = Witness(
                    _labels(x, y, z),
                    f"({x}*{y})*{z} is defined but {y}*{z} is not",
                )
            else:
                right = prod.get((x, yz))
                if right is None:
                    w = Witness(
                        _labels(x, y, z),
                        f"({x}*{y})*{z} is defined but {x}*({y}*{z}) is not",
                    )
                elif right != left:
                    w = Witness(
                        _labels(x, y, z),
                        f"({x}*{y})*{z} = {left} but {x}*({y}*{z}) = {right}",
                    )
                else:
                    continue
            cand = ((x.index, y.index, z.index), w)
            break
        if cand:
            break

    for x in S.elements:
        if cand and cand[0][0] < x.index:
            break
        for (y, z), yz in entries:
            if prod.get((x, yz)) is None:
                continue
            xy = prod.get((x, y))
            if xy is not None and prod.get((xy, z)) is not None:
                continue
            key = (x.index, y.index, z.index)
            if cand is None or key < cand[0]:
                cand = (
                    key,
                    Witness(
                        _labels(x, y, z),
                        f"{x}*({y}*{z}) is defined but ({x}*{y})*{z} is not",
                    ),
                )
            break
    return cand[1] if cand else None


def _definedness_checks(
    S: FiniteStructureTable, rule_name: str, rule: Callable[[ElementId, ElementId], bool]
) -> list[CheckResult]:
    """The two halves of "defined iff composable" under the given rule."""

    def outside():
        for (x, y), _z in _sorted_product(S):
            if not rule(x, y):
                yield Witness(
                    _labels(x, y),
                    f"product table defines {x}*{y} but the pair is not composable ({rule_name})",
                )

    def missing():
        for x in S.elements:
            for y in S.elements:
                if rule(x, y) and (x, y) not in S.product:
                    yield Witness(
                        _labels(x, y),
                        f"pair is composable ({rule_name}) but the product table has no entry",
                    )

    return [
        first_failure("defined-pairs-composable", outside()),
        first_failure("composable-pairs-defined", missing()),
    ]


def _surjectivity_check(name: str, S: FiniteStructureTable, m: Mapping) -> CheckResult:
    image = {m[x] for x in S.elements}

    def gen():
        for u in S.units:
            if u not in image:
                yield Witness((u.label,), f"unit {u} is not in the image of {name}")

    return first_failure(f"{name}-surjective", gen())


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def verify_groupoid(
    S: Structure, *, samples: int = 200, seed: int = DEFAULT_SEED
) -> VerificationReport:
    """Check the groupoid axioms exhaustively (finite) or on samples (rule).

    Checks: source/target surjective onto the units, "defined iff composable",
    associativity including agreement of definedness between the two
    groupings, the identity laws, the inverse laws, and injectivity of the
    inversion map.  A failed axiom is a fail verdict carrying the first
    witness in carrier order, not an error.
    """
    if is_rule_structure(S):
        return _verify_groupoid_rule(S, samples, seed)
    return _verify_groupoid_finite(S)


def _verify_groupoid_finite(S: FiniteStructureTable) -> VerificationReport:
    prod = S.product
    checks = [
        _surjectivity_check("source", S, S.source),
        _surjectivity_check("target", S, S.target),
    ]
    checks.extend(
        _definedness_checks(S, "target(x) = source(y)", lambda x, y: S.target[x] == S.source[y])
    )

    w = associativity_first_failure(S)
    checks.append(CheckResult("associativity", w is None, w))

    def identities():
        for x in S.elements:
            left = prod.get((S.source[x], x))
            if left != x:
                got = "undefined" if left is None else str(left)
                yield Witness((x.label,), f"source({x})*{x} = {got}, expected {x}")
                continue
            right = prod.get((x, S.target[x]))
            if right != x:
                got = "undefined" if right is None else str(right)
                yield Witness((x.label,), f"{x}*target({x}) = {got}, expected {x}")

    checks.append(first_failure("identities", identities()))

    def inverses():
        for x in S.elements:
            ix = S.inverse[x]
            left = prod.get((x, ix))
            if left != S.source[x]:
                got = "undefined" if left is None else str(left)
                yield Witness((x.label,), f"{x}*{ix} = {got}, expected source({x}) = {S.source[x]}")
                continue
            right = prod.get((ix, x))
            if right != S.target[x]:
                got = "undefined" if right is None else str(right)
                yield Witness((x.label,), f"{ix}*{x} = {got}, expected target({x}) = {S.target[x]}")

    checks.append(first_failure("inverses", inverses()))

    def injective():
        seen: dict[ElementId, ElementId] = {}
        for x in S.elements:
            ix = S.inverse[x]
            if ix in seen:
                yield Witness((seen[ix].label, x.label), f"inverse({seen[ix]}) = inverse({x}) = {ix}")
            seen[ix] = x

    checks.append(first_failure("inversion-injective", injective()))
    return VerificationReport(tuple(checks))


def _verify_groupoid_rule(S: RuleStructure, samples: int, seed: int) -> VerificationReport:
    rng = random.Random(seed)
    elems = sample_elements(S, rng, samples)
    pairs = sample_composable_pairs(S, rng.randrange(2**32), samples)
    triples = sample_composable_triples(S, rng, samples)
    free_pairs = [(S.sample(rng), S.sample(rng)) for _ in range(samples)]

    checks = []

    def anchors_are_units():
        for x in elems:
            if not S.is_unit(S.source(x)):
                yield Witness((S.fmt(x),), f"source({S.fmt(x)}) is not a unit")
            elif not S.is_unit(S.target(x)):
                yield Witness((S.fmt(x),), f"target({S.fmt(x)}) is not a unit")

    checks.append(first_failure("anchors-are-units", anchors_are_units()))

    def definedness():
        for x, y in pairs + free_pairs:
            defined = S.product(x, y) is not None
            if defined != S.composable(x, y):
                word = "defined" if defined else "undefined"
                yield Witness(
                    (S.fmt(x), S.fmt(y)),
                    f"product is {word} but composability by the anchor maps says otherwise",
                )

    checks.append(first_failure("defined-pairs-composable", definedness()))

    def assoc():
        for x, y, z in triples:
            xy = S.product(x, y)
            yz = S.product(y, z)
            left = S.product(xy, z) if xy is not None else None
            right = S.product(x, yz) if yz is not None else None
            if (left is None) != (right is None):
                yield Witness(
                    (S.fmt(x), S.fmt(y), S.fmt(z)),
                    "one grouping of the triple product is defined, the other is not",
                )
            elif left is not None and not S.eq(left, right):
                yield Witness(
                    (S.fmt(x), S.fmt(y), S.fmt(z)),
                    f"(xy)z = {S.fmt(left)} but x(yz) = {S.fmt(right)}",
                )

    checks.append(first_failure("associativity", assoc()))

    def identities():
        for x in elems:
            left = S.product(S.source(x), x)
            if left is None or not S.eq(left, x):
                yield Witness((S.fmt(x),), "source(x)*x != x")
                continue
            right = S.product(x, S.target(x))
            if right is None or not S.eq(right, x):
                yield Witness((S.fmt(x),), "x*target(x) != x")

    checks.append(first_failure("identities", identities()))

    def inverses():
        for x in elems:
            ix = S.inverse(x)
            left = S.product(x, ix)
            if left is None or not S.eq(left, S.source(x)):
                yield Witness((S.fmt(x),), "x*inverse(x) != source(x)")
                continue
            right = S.product(ix, x)
            if right is None or not S.eq(right, S.target(x)):
                yield Witness((S.fmt(x),), "inverse(x)*x != target(x)")

    checks.append(first_failure("inverses", inverses()))

    def injective():
        probe = elems[: min(len(elems), 100)]
        for i, x in enumerate(probe):
            for y in probe[i + 1 :]:
                if not S.eq(x, y) and S.eq(S.inverse(x), S.inverse(y)):
                    yield Witness((S.fmt(x), S.fmt(y)), "two distinct elements share an inverse")

    checks.append(first_failure("inversion-injective", injective()))
    return VerificationReport(tuple(checks))


def derived_property_report(
    S: Structure, *, samples: int = 200, seed: int = DEFAULT_SEED
) -> VerificationReport:
    """Consequence checks for a structure that already passed verify_groupoid:
    unit fixed points, anchors of products, inversion swapping the anchors,
    double inversion, the cancellation laws and the inverse-of-product rule.
    Acts as a self-test of the verifier: certified structures must pass."""
    if is_rule_structure(S):
        return _derived_groupoid_rule(S, samples, seed)
    return _derived_groupoid_finite(S)


def _derived_groupoid_finite(S: FiniteStructureTable) -> VerificationReport:
    prod = S.product
    checks = []

    def unit_fixed():
        for u in S.units:
            if S.source[u] != u or S.target[u] != u:
                yield Witness((u.label,), f"anchors of unit {u} are not {u}")
            elif S.inverse[u] != u:
                yield Witness((u.label,), f"inverse({u}) != {u}")
            elif prod.get((u, u)) != u:
                yield Witness((u.label,), f"{u}*{u} != {u}")

    checks.append(first_failure("unit-fixed-points", unit_fixed()))

    def anchors_of_product():
        for (x, y), xy in _sorted_product(S):
            if S.source[xy] != S.source[x]:
                yield Witness(_labels(x, y), f"source({x}*{y}) != source({x})")
            elif S.target[xy] != S.target[y]:
                yield Witness(_labels(x, y), f"target({x}*{y}) != target({y})")

    checks.append(first_failure("anchors-of-product", anchors_of_product()))

    def inversion_swaps():
        for x in S.elements:
            ix = S.inverse[x]
            if S.source[ix] != S.target[x] or S.target[ix] != S.source[x]:
                yield Witness((x.label,), f"anchors of inverse({x}) are not swapped")

    checks.append(first_failure("inversion-swaps-anchors", inversion_swaps()))

    def double_inverse():
        for x in S.elements:
            if S.inverse[S.inverse[x]] != x:
                yield Witness((x.label,), f"inverse(inverse({x})) != {x}")

    checks.append(first_failure("double-inverse", double_inverse()))

    def cancellation():
        left: dict[tuple[ElementId, ElementId], ElementId] = {}
        right: dict[tuple[ElementId, ElementId], ElementId] = {}
        for (x, y), xy in _sorted_product(S):
            k = (x, xy)
            if k in left and left[k] != y:
                yield Witness(
                    (x.label, left[k].label, y.label),
                    f"{x}*{left[k]} = {x}*{y} but {left[k]} != {y}",
                )
            left[k] = y
            k = (y, xy)
            if k in right and right[k] != x:
                yield Witness(
                    (right[k].label, x.label, y.label),
                    f"{right[k]}*{y} = {x}*{y} but {right[k]} != {x}",
                )
            right[k] = x

    checks.append(first_failure("cancellation", cancellation()))

    def inverse_of_product():
        for (x, y), xy in _sorted_product(S):
            ix, iy = S.inverse[x], S.inverse[y]
            rev = prod.get((iy, ix))
            if rev is None:
                yield Witness(_labels(x, y), f"inverse pair ({iy}, {ix}) is not composable")
            elif rev != S.inverse[xy]:
                yield Witness(_labels(x, y), f"inverse({x}*{y}) != {iy}*{ix}")

    checks.append(first_failure("inverse-of-product", inverse_of_product()))
    return VerificationReport(tuple(checks))


def _derived_groupoid_rule(S: RuleStructure, samples: int, seed: int) -> VerificationReport:
    rng = random.Random(seed)
    elems = sample_elements(S, rng, samples)
    pairs = sample_composable_pairs(S, rng.randrange(2**32), samples)
    checks = []

    def unit_fixed():
        for x in elems:
            u = S.source(x)
            if not (S.eq(S.source(u), u) and S.eq(S.target(u), u) and S.eq(S.inverse(u), u)):
                yield Witness((S.fmt(u),), "unit is not fixed by the structure maps")
            else:
                uu = S.product(u, u)
                if uu is None or not S.eq(uu, u):
                    yield Witness((S.fmt(u),), "u*u != u for a unit")

    checks.append(first_failure("unit-fixed-points", unit_fixed()))

    def anchors_of_product():
        for x, y in pairs:
            xy = S.product(x, y)
            if xy is None:
                continue
            if not S.eq(S.source(xy), S.source(x)) or not S.eq(S.target(xy), S.target(y)):
                yield Witness((S.fmt(x), S.fmt(y)), "anchors of the product are wrong")

    checks.append(first_failure("anchors-of-product", anchors_of_product()))

    def inversion_swaps():
        for x in elems:
            ix = S.inverse(x)
            if not S.eq(S.source(ix), S.target(x)) or not S.eq(S.target(ix), S.source(x)):
                yield Witness((S.fmt(x),), "anchors of the inverse are not swapped")

    checks.append(first_failure("inversion-swaps-anchors", inversion_swaps()))

    def double_inverse():
        for x in elems:
            if not S.eq(S.inverse(S.inverse(x)), x):
                yield Witness((S.fmt(x),), "double inversion is not the identity")

    checks.append(first_failure("double-inverse", double_inverse()))

    def cancellation():
        for x, y in pairs:
            if S.right_factor is None:
                return
            y2 = S.right_factor(x, rng)
            xy, xy2 = S.product(x, y), S.product(x, y2)
            if xy is not None and xy2 is not None and S.eq(xy, xy2) and not S.eq(y, y2):
                yield Witness((S.fmt(x), S.fmt(y), S.fmt(y2)), "left cancellation fails")

    checks.append(first_failure("cancellation", cancellation()))

    def inverse_of_product():
        for x, y in pairs:
            xy = S.product(x, y)
            rev = S.product(S.inverse(y), S.inverse(x))
            if xy is None or rev is None or not S.eq(S.inverse(xy), rev):
                yield Witness((S.fmt(x), S.fmt(y)), "inverse of the product is not the reversed product of inverses")

    checks.append(first_failure("inverse-of-product", inverse_of_product()))
    return VerificationReport(tuple(checks))


# ---------------------------------------------------------------------------
# transitivity, isotropy, substructures
# ---------------------------------------------------------------------------

def is_transitive(S: Structure) -> CheckResult:
    """True iff the anchor x -> (source(x), target(x)) hits every unit pair.

    Undecidable by sampling, so rule structures are rejected.
    """
    if is_rule_structure(S):
        raise StructureError(
            "unsupported-for-rule-structure",
            "transitivity requires an explicit finite carrier",
        )
    image = {(S.source[x], S.target[x]) for x in S.elements}

    def gen():
        for u in S.units:
            for v in S.units:
                if (u, v) not in image:
                    yield Witness(
                        (u.label, v.label), f"no element has source {u} and target {v}"
                    )

    return first_failure("transitive", gen())


def isotropy_group(S: FiniteStructureTable, u) -> FiniteStructureTable:
    """The loops at unit u with the restricted product; always a group,
    returned as a one-unit table."""
    uid = S.element(u)
    if uid not in set(S.units):
        raise StructureError("unit-not-found", f"{uid.label!r} is not a unit")
    members = [x for x in S.elements if S.source[x] == uid and S.target[x] == uid]
    labels = [x.label for x in members]
    member_set = set(members)
    entries = []
    for x in members:
        for y in members:
            xy = S.product.get((x, y))
            if xy is None or xy not in member_set:
                raise StructureError(
                    "construction-invalid",
                    f"isotropy at {uid.label!r} is not closed: {x}*{y} escapes",
                )
            entries.append((x.label, y.label, xy.label))
    const = {lab: uid.label for lab in labels}
    inv = {x.label: S.inverse[x].label for x in members}
    return build_finite_table(labels, [uid.label], const, const, inv, entries, ALMOST_GROUPOID)


def isotropy_bundle(S: FiniteStructureTable) -> FiniteStructureTable:
    """The union of all isotropy groups, as a standalone structure."""
    members = [x for x in S.elements if S.source[x] == S.target[x]]
    member_set = set(members)
    labels = [x.label for x in members]
    entries = []
    for x in members:
        for y in members:
            xy = S.product.get((x, y))
            if xy is not None:
                if xy not in member_set:
                    raise StructureError(
                        "construction-invalid", f"isotropy bundle not closed at {x}*{y}"
                    )
                entries.append((x.label, y.label, xy.label))
    return build_finite_table(
        labels,
        [u.label for u in S.units],
        {x.label: S.source[x].label for x in members},
        {x.label: S.target[x].label for x in members},
        {x.label: S.inverse[x].label for x in members},
        entries,
        S.kind,
    )


@dataclass(frozen=True)
class Classification:
    """Strongest applicable class plus the witness blocking the next level."""

    level: str
    witness: Optional[Witness] = None


def classify_substructure(
    S: FiniteStructureTable, K: Iterable[str], K0: Iterable[str]
) -> Classification:
    """Classify (K, K0) as not-closed, subgroupoid, wide or normal.

    Closure means K is closed under the defined products and inversion; wide
    means K0 equals the unit set; normal additionally requires that every
    defined conjugate x*a*x^-1 with a in K stays in K.
    """
    K_ids = {S.element(k) for k in K}
    K0_ids = {S.element(k) for k in K0}
    if not K_ids or not K0_ids:
        raise StructureError("empty-subset", "K and K0 must be nonempty")
    units = set(S.units)
    for u in K0_ids:
        if u not in units:
            raise StructureError("unit-not-found", f"{u.label!r} is not a unit")

    for x in sorted(K_ids, key=lambda e: e.index):
        if S.inverse[x] not in K_ids:
            return Classification(
                "not-closed",
                Witness((x.label,), f"inverse({x}) = {S.inverse[x]} is outside K"),
            )
        for y in sorted(K_ids, key=lambda e: e.index):
            xy = S.product.get((x, y))
            if xy is not None and xy not in K_ids:
                return Classification(
                    "not-closed", Witness(_labels(x, y), f"{x}*{y} = {xy} is outside K")
                )

    if K0_ids != units:
        missing = next(u for u in S.units if u not in K0_ids)
        return Classification(
            "subgroupoid", Witness((missing.label,), f"unit {missing} is not in K0")
        )

    for g in S.elements:
        ig = S.inverse[g]
        for a in sorted(K_ids, key=lambda e: e.index):
            ga = S.product.get((g, a))
            if ga is None:
                continue
            conj = S.product.get((ga, ig))
            if conj is not None and conj not in K_ids:
                return Classification(
                    "wide",
                    Witness(
                        _labels(g, a),
                        f"{g}*{a}*{ig} = {conj} leaves K",
                    ),
                )
    return Classification("normal", None)


# ---------------------------------------------------------------------------
# morphisms
# ---------------------------------------------------------------------------

def _as_finite_map(name: str, f, domain: Sequence[ElementId], codomain: FiniteStructureTable):
    if callable(f):
        return lambda x: codomain.element(f(x.label))
    table = {}
    for x in domain:
        if x.label not in f:
            raise StructureError("map-not-total", f"{name} has no image for {x.label!r}")
        table[x] = codomain.element(f[x.label])
    return lambda x: table[x]


def check_groupoid_morphism(
    S: Structure,
    S2: Structure,
    f,
    f0,
    *,
    samples: int = 200,
    seed: int = DEFAULT_SEED,
) -> MorphismReport:
    """Check that (f, f0) is a groupoid morphism from S to S2.

    Verifies multiplicativity on composable pairs (including that images stay
    composable) and compatibility of both anchor maps with f0.  For finite
    structures the report also says whether the pair is an isomorphism; for
    rule structures bijectivity is not decidable and is reported as None.
    """
    if is_rule_structure(S) != is_rule_structure(S2):
        raise StructureError(
            "mixed-structure-unsupported",
            "morphism checks need both structures finite or both rule-backed",
        )
    if is_rule_structure(S):
        return _check_morphism_rule(S, S2, f, f0, samples, seed, anchored=True)
    return _check_morphism_finite(S, S2, f, f0, anchored=True)


def _check_morphism_finite(
    S: FiniteStructureTable, S2: FiniteStructureTable, f, f0, anchored: bool
) -> MorphismReport:
    fm = _as_finite_map("f", f, S.elements, S2)
    f0m = _as_finite_map("f0", f0, S.units, S2)
    checks = []

    def multiplicative():
        for (x, y), xy in _sorted_product(S):
            img = S2.product.get((fm(x), fm(y)))
            if img is None:
                yield Witness(
                    _labels(x, y),
                    f"images f({x}) = {fm(x)}, f({y}) = {fm(y)} are not composable",
                )
            elif img != fm(xy):
                yield Witness(
                    _labels(x, y), f"f({x}*{y}) = {fm(xy)} but f({x})*f({y}) = {img}"
                )

    checks.append(first_failure("multiplicative", multiplicative()))

    if anchored:

        def source_compat():
            for x in S.elements:
                if S2.source[fm(x)] != f0m(S.source[x]):
                    yield Witness(
                        (x.label,),
                        f"source(f({x})) = {S2.source[fm(x)]} but f0(source({x})) = {f0m(S.source[x])}",
                    )

        def target_compat():
            for x in S.elements:
                if S2.target[fm(x)] != f0m(S.target[x]):
                    yield Witness(
                        (x.label,),
                        f"target(f({x})) = {S2.target[fm(x)]} but f0(target({x})) = {f0m(S.target[x])}",
                    )

        checks.append(first_failure("source-compatible", source_compat()))
        checks.append(first_failure("target-compatible", target_compat()))

    images = {fm(x) for x in S.elements}
    unit_images = {f0m(u) for u in S.units}
    iso = (
        len(images) == len(S.elements)
        and images == set(S2.elements)
        and len(unit_images) == len(S.units)
        and unit_images == set(S2.units)
    )
    return MorphismReport(tuple(checks), is_isomorphism=iso)


def _check_morphism_rule(
    S: RuleStructure, S2: RuleStructure, f, f0, samples: int, seed: int, anchored: bool
) -> MorphismReport:
    rng = random.Random(seed)
    pairs = sample_composable_pairs(S, rng.randrange(2**32), samples)
    elems = sample_elements(S, rng, samples)
    checks = []

    def multiplicative():
        for x, y in pairs:
            xy = S.product(x, y)
            img = S2.product(f(x), f(y))
            if img is None:
                yield Witness((S.fmt(x), S.fmt(y)), "images are not composable")
            elif not S2.eq(img, f(xy)):
                yield Witness(
                    (S.fmt(x), S.fmt(y)),
                    f"f(x*y) = {S2.fmt(f(xy))} but f(x)*f(y) = {S2.fmt(img)}",
                )

    checks.append(first_failure("multiplicative", multiplicative()))

    if anchored:

        def source_compat():
            for x in elems:
                if not S2.eq(S2.source(f(x)), f0(S.source(x))):
                    yield Witness((S.fmt(x),), "source(f(x)) != f0(source(x))")

        def target_compat():
            for x in elems:
                if not S2.eq(S2.target(f(x)), f0(S.target(x))):
                    yield Witness((S.fmt(x),), "target(f(x)) != f0(target(x))")

        checks.append(first_failure("source-compatible", source_compat()))
        checks.append(first_failure("target-compatible", target_compat()))

    return MorphismReport(tuple(checks), is_isomorphism=None)


# ---------------------------------------------------------------------------
# quasipermutations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Quasipermutation:
    """An injective map from a nonempty subset of a base set into it."""

    mapping: tuple[tuple[str, str], ...]  # sorted by source label

    def __post_init__(self):
        if not self.mapping:
            raise StructureError("empty-set", "a quasipermutation needs a nonempty domain")
        values = [v for _, v in self.mapping]
        if len(set(values)) != len(values):
            raise StructureError("not-injective", f"mapping {self.mapping!r} is not injective")

    @staticmethod
    def from_map(m: Mapping[str, str]) -> "Quasipermutation":
        return Quasipermutation(tuple(sorted(m.items())))

    @staticmethod
    def identity_on(labels: Iterable[str]) -> "Quasipermutation":
        return Quasipermutation(tuple(sorted((x, x) for x in labels)))

    @property
    def domain(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.mapping)

    @property
    def codomain(self) -> tuple[str, ...]:
        return tuple(sorted(v for _, v in self.mapping))

    def apply(self, x: str) -> str:
        for k, v in self.mapping:
            if k == x:
                return v
        raise StructureError("element-not-in-carrier", f"{x!r} is outside the domain")

    def invert(self) -> "Quasipermutation":
        return Quasipermutation(tuple(sorted((v, k) for k, v in self.mapping)))

    def compose_after(self, inner: "Quasipermutation") -> "Quasipermutation":
        """self o inner; requires the range of inner to equal this domain."""
        if inner.codomain != self.domain:
            raise StructureError(
                "not-composable",
                f"range {inner.codomain!r} does not match domain {self.domain!r}",
            )
        return Quasipermutation(tuple(sorted((k, self.apply(v)) for k, v in inner.mapping)))

    @property
    def label(self) -> str:
        return "{" + ", ".join(f"{k}>{v}" for k, v in self.mapping) + "}"


# ---------------------------------------------------------------------------
# concrete groupoids
# ---------------------------------------------------------------------------

def _certify(table: FiniteStructureTable, verify) -> FiniteStructureTable:
    report = verify(table)
    if not report.verdict:
        w = report.witness
        raise StructureError(
            "construction-invalid",
            f"construction failed verification: {w.detail if w else 'unknown check'}",
        )
    return table


def pair_groupoid(X: Sequence) -> FiniteStructureTable:
    """All ordered pairs over X; (x,y)*(y,z) = (x,z) and (x,y)^-1 = (y,x)."""
    points = [str(x) for x in X]
    if not points:
        raise StructureError("empty-set", "the base set must be nonempty")
    if len(set(points)) != len(points):
        raise StructureError("duplicate-label", "base set labels must be distinct")

    def lab(x, y):
        return f"({x},{y})"

    labels = [lab(x, y) for x in points for y in points]
    source = {lab(x, y): lab(x, x) for x in points for y in points}
    target = {lab(x, y): lab(y, y) for x in points for y in points}
    inverse = {lab(x, y): lab(y, x) for x in points for y in points}
    units = [lab(x, x) for x in points]
    entries = [
        (lab(x, y), lab(y, z), lab(x, z)) for x in points for y in points for z in points
    ]
    table = build_finite_table(labels, units, source, target, inverse, entries, GROUPOID)
    return _certify(table, verify_groupoid)


def _nonzero_fraction(rng: random.Random) -> Fraction:
    num = rng.choice([n for n in range(-9, 10) if n != 0])
    den = rng.randint(1, 9)
    return Fraction(num, den)


def _fmt_pair(p) -> str:
    return f"({matrices.fmt_number(p[0])}, {matrices.fmt_number(p[1])})"


def rstar2_groupoid(a) -> RuleStructure:
    """Pairs of nonzero rationals with the one-parameter family of products
    (x,y) * (b*y, u) = (x, u) where b = 1/a; units are the pairs (t, a*t)."""
    a = Fraction(a)
    if a == 0:
        raise StructureError("zero-parameter", "the parameter must be nonzero")
    b = 1 / a

    def member(p) -> bool:
        return (
            isinstance(p, tuple)
            and len(p) == 2
            and all(isinstance(c, Fraction) and c != 0 for c in p)
        )

    def product(p, q):
        (x, y), (z, u) = p, q
        if z == b * y:
            return (x, u)
        return None

    return RuleStructure(
        kind=GROUPOID,
        name=f"rstar2(a={a})",
        value_domain="rational-pair",
        membership=member,
        source=lambda p: (p[0], a * p[0]),
        target=lambda p: (b * p[1], p[1]),
        inverse=lambda p: (b * p[1], a * p[0]),
        product=product,
        is_unit=lambda p: p[1] == a * p[0],
        sample=lambda rng: (_nonzero_fraction(rng), _nonzero_fraction(rng)),
        eq=lambda p, q: p == q,
        fmt=_fmt_pair,
        right_factor=lambda p, rng: (b * p[1], _nonzero_fraction(rng)),
    )


def symmetric_groupoid(M: Sequence, max_size_guard: int = 4) -> FiniteStructureTable:
    """All quasipermutations of M.  (f, g) is composable when the range of f
    equals the domain of g, and the product is "f then g".  The units are the
    identities on the nonempty subsets of M."""
    base = [str(m) for m in M]
    if not base:
        raise StructureError("empty-set", "the base set must be nonempty")
    if len(set(base)) != len(base):
        raise StructureError("duplicate-label", "base set labels must be distinct")
    if len(base) > max_size_guard:
        raise StructureError(
            "carrier-too-large",
            f"|M| = {len(base)} exceeds the guard {max_size_guard}",
        )

    qps: list[Quasipermutation] = []
    for k in range(1, len(base) + 1):
        for dom in combinations(sorted(base), k):
            for img in permutations(sorted(base), k):
                qps.append(Quasipermutation(tuple(zip(dom, img))))
    qps.sort(key=lambda q: q.label)
    by_label = {q.label: q for q in qps}

    labels = [q.label for q in qps]
    units = [Quasipermutation.identity_on(dom).label
             for k in range(1, len(base) + 1)
             for dom in combinations(sorted(base), k)]
    source = {q.label: Quasipermutation.identity_on(q.domain).label for q in qps}
    target = {q.label: Quasipermutation.identity_on(q.codomain).label for q in qps}
    inverse = {q.label: q.invert().label for q in qps}
    entries = []
    by_domain: dict[tuple[str, ...], list[Quasipermutation]] = {}
    for q in qps:
        by_domain.setdefault(q.domain, []).append(q)
    for f in qps:
        for g in by_domain.get(f.codomain, ()):
            entries.append((f.label, g.label, g.compose_after(f).label))
    table = build_finite_table(labels, units, source, target, inverse, entries, GROUPOID)
    return _certify(table, verify_groupoid)


def left_translation(S: FiniteStructureTable, a: ElementId) -> Quasipermutation:
    """The partial map x -> a*x on { x : (a, x) composable }."""
    return Quasipermutation.from_map(
        {
            x.label: S.product[(a, x)].label
            for x in S.elements
            if (a, x) in S.product
        }
    )


def left_translation_groupoid(
    S: FiniteStructureTable, max_size_guard: int = 64
) -> tuple[FiniteStructureTable, MorphismPair]:
    """The translations L_a = (x -> a*x) of a finite groupoid, with the map
    a -> L_a.

    The translations are honest quasipermutations of the carrier, and their
    set is closed under both composition orders.  The returned structure
    composes them as functions (L_a then-applied-after L_b is L_{a*b}), which
    makes a -> L_a a morphism; its source is the identity on the range and
    its target the identity on the domain.
    """
    if len(S.elements) > max_size_guard:
        raise StructureError(
            "carrier-too-large",
            f"carrier of size {len(S.elements)} exceeds the guard {max_size_guard}",
        )
    trans = {x: left_translation(S, x) for x in S.elements}
    labels = [trans[x].label for x in S.elements]
    source = {trans[x].label: trans[S.source[x]].label for x in S.elements}
    target = {trans[x].label: trans[S.target[x]].label for x in S.elements}
    inverse = {trans[x].label: trans[S.inverse[x]].label for x in S.elements}
    units = [trans[u].label for u in S.units]
    entries = [
        (trans[x].label, trans[y].label, trans[xy].label)
        for (x, y), xy in _sorted_product(S)
    ]
    table = build_finite_table(labels, units, source, target, inverse, entries, GROUPOID)
    table = _certify(table, verify_groupoid)
    phi = MorphismPair(
        f={x.label: trans[x].label for x in S.elements},
        f0={u.label: trans[u].label for u in S.units},
    )
    return table, phi


def disjoint_union_groupoids(parts: Sequence[FiniteStructureTable]) -> FiniteStructureTable:
    """Union of groupoids with disjoint labels; composition stays inside one
    summand."""
    if not parts:
        raise StructureError("empty-set", "need at least one summand")
    labels: list[str] = []
    seen: set[str] = set()
    for p in parts:
        for e in p.elements:
            if e.label in seen:
                raise StructureError(
                    "label-collision", f"label {e.label!r} appears in two summands"
                )
            seen.add(e.label)
            labels.append(e.label)
    units = [u.label for p in parts for u in p.units]
    source = {x.label: p.source[x].label for p in parts for x in p.elements}
    target = {x.label: p.target[x].label for p in parts for x in p.elements}
    inverse = {x.label: p.inverse[x].label for p in parts for x in p.elements}
    entries = [
        (x.label, y.label, xy.label) for p in parts for (x, y), xy in p.product.items()
    ]
    table = build_finite_table(labels, units, source, target, inverse, entries, GROUPOID)
    return _certify(table, verify_groupoid)


def gl_groupoid(n: int) -> RuleStructure:
    """Invertible float matrices of every size up to n, composable only
    within one size; the disjoint-union groupoid of the general linear
    groups of order 1..n."""
    if not 1 <= n <= 3:
        raise StructureError("order-too-large", "matrix sizes 1..3 are supported")

    def member(a) -> bool:
        return (
            isinstance(a, tuple)
            and 1 <= len(a) <= n
            and all(len(row) == len(a) for row in a)
            and abs(matrices.det(a)) > 0
        )

    def sample(rng: random.Random):
        k = rng.randint(1, n)
        while True:
            a = tuple(tuple(rng.uniform(-2.0, 2.0) for _ in range(k)) for _ in range(k))
            if abs(matrices.det(a)) >= 0.1:
                return a

    def same_size(a, rng: random.Random):
        k = len(a)
        while True:
            b = tuple(tuple(rng.uniform(-2.0, 2.0) for _ in range(k)) for _ in range(k))
            if abs(matrices.det(b)) >= 0.1:
                return b

    def unit(a):
        return matrices.identity(len(a), 1.0)

    return RuleStructure(
        kind=GROUPOID,
        name=f"gl({n})",
        value_domain="float-matrix",
        membership=member,
        source=unit,
        target=unit,
        inverse=matrices.inverse,
        product=lambda a, b: matrices.mat_mul(a, b) if len(a) == len(b) else None,
        is_unit=lambda a: matrices.mat_close(a, matrices.identity(len(a), 1.0)),
        sample=sample,
        eq=matrices.mat_close,
        fmt=matrices.fmt_matrix,
        right_factor=same_size,
    )
