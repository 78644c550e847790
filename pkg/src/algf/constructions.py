"""New almost groupoids from old: disjoint union, direct product, and the
semidirect product twisted by a verified action.

The semidirect pair product acts on the second coordinate by the action of
the first factor:

    (g1, h1) * (g2, h2) = (g1 x g2,  h1 x (g1 . h2))

with unit map (g, h) -> (theta1(g), theta2(h)) and inverse
(g, h) -> (inv(g), inv(g) . inv(h)).  With the trivial action this is the
direct product table entry for entry.
"""

from __future__ import annotations

from typing import Callable, Mapping, Union

from .almost import verify_almost_groupoid
from .kernel import (
    ALMOST_GROUPOID,
    FiniteStructureTable,
    StructureError,
    VerificationReport,
    Witness,
    build_finite_table,
    first_failure,
    is_rule_structure,
)


def _require_finite(S, what: str) -> FiniteStructureTable:
    if is_rule_structure(S):
        raise StructureError(
            "unsupported-for-rule-structure", f"{what} needs finite tables"
        )
    if S.kind != ALMOST_GROUPOID:
        raise StructureError(
            "kind-mismatch", f"{what} needs almost_groupoid tables, got {S.kind!r}"
        )
    return S


def _certify(table: FiniteStructureTable) -> FiniteStructureTable:
    report = verify_almost_groupoid(table)
    if not report.verdict:
        w = report.witness
        raise StructureError(
            "construction-invalid",
            f"constructed structure failed verification: {w.detail if w else 'unknown'}",
        )
    return table


def disjoint_union_almost(
    G: FiniteStructureTable, G2: FiniteStructureTable
) -> FiniteStructureTable:
    """Carrier union with composition only inside one summand; the unit set
    is the union of the summands' units."""
    _require_finite(G, "disjoint union")
    _require_finite(G2, "disjoint union")
    overlap = set(e.label for e in G.elements) & set(e.label for e in G2.elements)
    if overlap:
        raise StructureError(
            "label-collision", f"carriers share labels {sorted(overlap)!r}"
        )
    labels = [e.label for e in G.elements] + [e.label for e in G2.elements]
    units = [u.label for u in G.units] + [u.label for u in G2.units]
    theta = {}
    inverse = {}
    entries = []
    for part in (G, G2):
        theta.update({x.label: part.source[x].label for x in part.elements})
        inverse.update({x.label: part.inverse[x].label for x in part.elements})
        entries.extend(
            (x.label, y.label, z.label) for (x, y), z in part.product.items()
        )
    table = build_finite_table(labels, units, theta, theta, inverse, entries, ALMOST_GROUPOID)
    return _certify(table)


def direct_product_almost(
    G1: FiniteStructureTable, G2: FiniteStructureTable
) -> FiniteStructureTable:
    """Componentwise structure on the product carrier; pairs are composable
    exactly when both coordinates are."""
    _require_finite(G1, "direct product")
    _require_finite(G2, "direct product")

    def lab(g, h):
        return f"({g.label},{h.label})"

    labels = [lab(g, h) for g in G1.elements for h in G2.elements]
    units = [lab(u, v) for u in G1.units for v in G2.units]
    theta = {
        lab(g, h): lab(G1.source[g], G2.source[h])
        for g in G1.elements
        for h in G2.elements
    }
    inverse = {
        lab(g, h): lab(G1.inverse[g], G2.inverse[h])
        for g in G1.elements
        for h in G2.elements
    }
    entries = [
        (lab(g1, h1), lab(g2, h2), lab(gp, hp))
        for (g1, g2), gp in G1.product.items()
        for (h1, h2), hp in G2.product.items()
    ]
    table = build_finite_table(labels, units, theta, theta, inverse, entries, ALMOST_GROUPOID)
    return _certify(table)


ActionMap = Union[Callable[[str, str], str], Mapping[tuple[str, str], str]]


def _as_action(G: FiniteStructureTable, H: FiniteStructureTable, act: ActionMap):
    if callable(act):
        raw = act
    else:
        table = dict(act)

        def raw(g, h):
            if (g, h) not in table:
                raise StructureError(
                    "map-not-total", f"action has no value for ({g!r}, {h!r})"
                )
            return table[(g, h)]

    def resolved(g, h):
        return H.element(raw(g.label, h.label))

    return resolved


def verify_action(
    G: FiniteStructureTable, H: FiniteStructureTable, act: ActionMap
) -> VerificationReport:
    """Check the action axioms of one almost groupoid on another.

    Required checks: compatibility with the acting product, distribution over
    the acted-on product (including that images stay composable), existence
    of a unit fixing each element (the weakest reading of the unit axiom),
    units of H being fixed, and preservation of theta-fibers, which the
    semidirect construction needs for its product to be defined.  Whether
    every unit acts trivially is reported informationally.
    """
    _require_finite(G, "action verification")
    _require_finite(H, "action verification")
    a = _as_action(G, H, act)
    checks = []

    def associative():
        for (g1, g2), g12 in sorted(
            G.product.items(), key=lambda kv: (kv[0][0].index, kv[0][1].index)
        ):
            for h in H.elements:
                if a(g12, h) != a(g1, a(g2, h)):
                    yield Witness(
                        (g1.label, g2.label, h.label),
                        f"(g1*g2).h = {a(g12, h)} but g1.(g2.h) = {a(g1, a(g2, h))}",
                    )

    checks.append(first_failure("action-associative", associative()))

    def distributes():
        for g in G.elements:
            for (h1, h2), h12 in sorted(
                H.product.items(), key=lambda kv: (kv[0][0].index, kv[0][1].index)
            ):
                lhs = a(g, h12)
                rhs = H.product.get((a(g, h1), a(g, h2)))
                if rhs is None:
                    yield Witness(
                        (g.label, h1.label, h2.label),
                        f"images g.{h1} and g.{h2} are not composable",
                    )
                elif rhs != lhs:
                    yield Witness(
                        (g.label, h1.label, h2.label),
                        f"g.(h1*h2) = {lhs} but (g.h1)*(g.h2) = {rhs}",
                    )

    checks.append(first_failure("action-distributes", distributes()))

    def unit_exists():
        for h in H.elements:
            if not any(a(u, h) == h for u in G.units):
                yield Witness((h.label,), f"no unit of the acting structure fixes {h}")

    checks.append(first_failure("action-unit-exists", unit_exists()))

    def fixes_units():
        for g in G.elements:
            for h in H.elements:
                t = H.source[h]
                if a(g, t) != t:
                    yield Witness((g.label, h.label), f"{g}.theta({h}) != theta({h})")

    checks.append(first_failure("action-fixes-units", fixes_units()))

    def preserves_fiber():
        for g in G.elements:
            for h in H.elements:
                if H.source[a(g, h)] != H.source[h]:
                    yield Witness((g.label, h.label), f"theta({g}.{h}) != theta({h})")

    checks.append(first_failure("action-preserves-fiber", preserves_fiber()))

    def units_trivial():
        for u in G.units:
            for h in H.elements:
                if a(u, h) != h:
                    yield Witness((u.label, h.label), f"unit {u} moves {h}")

    checks.append(first_failure("action-units-trivial", units_trivial(), required=False))
    return VerificationReport(tuple(checks))


def trivial_action(g_label: str, h_label: str) -> str:
    return h_label


def semidirect_product(
    G: FiniteStructureTable, H: FiniteStructureTable, act: ActionMap
) -> FiniteStructureTable:
    """Product carrier with the second coordinate twisted by the action of
    the first factor; refuses to build on an action that fails verification,
    and re-verifies the result."""
    _require_finite(G, "semidirect product")
    _require_finite(H, "semidirect product")
    action_report = verify_action(G, H, act)
    if not action_report.verdict:
        w = action_report.witness
        raise StructureError(
            "action-verification-failed",
            f"action failed verification: {w.detail if w else 'unknown check'}",
        )
    a = _as_action(G, H, act)

    def lab(g, h):
        return f"({g.label},{h.label})"

    labels = [lab(g, h) for g in G.elements for h in H.elements]
    units = [lab(u, v) for u in G.units for v in H.units]
    theta = {
        lab(g, h): lab(G.source[g], H.source[h])
        for g in G.elements
        for h in H.elements
    }
    inverse = {}
    for g in G.elements:
        for h in H.elements:
            ig = G.inverse[g]
            inverse[lab(g, h)] = lab(ig, a(ig, H.inverse[h]))
    entries = []
    for (g1, g2), gp in G.product.items():
        for h1 in H.elements:
            for h2 in H.elements:
                if H.source[h1] != H.source[h2]:
                    continue
                twisted = a(g1, h2)
                hp = H.product.get((h1, twisted))
                if hp is None:
                    raise StructureError(
                        "construction-invalid",
                        f"twisted factor {h1}*({g1}.{h2}) is undefined",
                    )
                entries.append((lab(g1, h1), lab(g2, h2), lab(gp, hp)))
    table = build_finite_table(labels, units, theta, theta, inverse, entries, ALMOST_GROUPOID)
    return _certify(table)
