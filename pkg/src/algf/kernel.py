"""Shared carrier/table representations for partial-product structures.

Three kinds of structure share one finite-table format and one rule-backed
format:

* ``groupoid``          -- product defined exactly when ``target(x) == source(y)``
* ``almost_groupoid``   -- one unit map, mirrored into source and target;
  product defined exactly when ``source(x) == source(y)``
* ``generalized_group`` -- total product; ``source == target`` is the
  per-element identity map and the unit set is its image

Building a table validates *structural* consistency only (totality of maps,
"defined iff composable" for the product).  Algebraic axioms are checked by
the verifiers in the ``groupoid``, ``gengroup`` and ``almost`` modules, which
return a :class:`VerificationReport` rather than raising.

All values here are immutable after construction and safe to share between
concurrent readers; every operation is a pure function of its inputs plus,
for sampled operations, an explicit seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

GROUPOID = "groupoid"
ALMOST_GROUPOID = "almost_groupoid"
GENERALIZED_GROUP = "generalized_group"
KINDS = frozenset({GROUPOID, ALMOST_GROUPOID, GENERALIZED_GROUP})

DEFAULT_SEED = 0
SAMPLER_RETRY_BUDGET = 200


class StructureError(Exception):
    """Contract violation carrying a stable machine-readable ``code``."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class ElementId:
    """A carrier element: position in the element list plus display label."""

    index: int
    label: str

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class Witness:
    """Offending elements plus which equality failed, for a failing check."""

    elements: tuple[str, ...]
    detail: str


@dataclass(frozen=True)
class CheckResult:
    """One named axiom/property check. Informational checks set required=False."""

    name: str
    passed: bool
    witness: Optional[Witness] = None
    required: bool = True

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {"name": self.name, "passed": self.passed}
        if not self.required:
            doc["required"] = False
        doc["witness"] = (
            None
            if self.witness is None
            else {"elements": list(self.witness.elements), "detail": self.witness.detail}
        )
        return doc


@dataclass(frozen=True)
class VerificationReport:
    """Pass/fail per check; verdict passes iff every required check passes."""

    checks: tuple[CheckResult, ...]

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    @property
    def witness(self) -> Optional[Witness]:
        for c in self.checks:
            if c.required and not c.passed:
                return c.witness
        return None

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "verdict": "pass" if self.verdict else "fail",
            "checks": [c.to_dict() for c in self.checks],
        }


@dataclass(frozen=True)
class MorphismReport(VerificationReport):
    """Morphism check result; is_isomorphism is None when not decidable."""

    is_isomorphism: Optional[bool] = None

    def to_dict(self) -> dict:
        doc = super().to_dict()
        doc["isomorphism"] = self.is_isomorphism
        return doc


@dataclass(frozen=True)
class MorphismPair:
    """An element map plus a unit map, both keyed by labels."""

    f: Mapping[str, str]
    f0: Mapping[str, str]


@dataclass(frozen=True, eq=True)
class FiniteStructureTable:
    """Explicit finite structure: carrier, units, structure maps, sparse product.

    ``source``/``target`` always land in ``units``; ``product`` is stored only
    on the composable set, which is derived from the maps and the ``kind``,
    never from table presence.
    """

    kind: str
    elements: tuple[ElementId, ...]
    units: tuple[ElementId, ...]
    source: Mapping[ElementId, ElementId]
    target: Mapping[ElementId, ElementId]
    inverse: Mapping[ElementId, ElementId]
    product: Mapping[tuple[ElementId, ElementId], ElementId]
    pairs: tuple[tuple[ElementId, ElementId], ...] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_by_label", {e.label: e for e in self.elements}
        )

    # -- lookups ---------------------------------------------------------

    def element(self, ref) -> ElementId:
        if isinstance(ref, ElementId):
            if ref.index < len(self.elements) and self.elements[ref.index] == ref:
                return ref
            raise StructureError(
                "element-not-in-carrier", f"element {ref.label!r} is not in the carrier"
            )
        eid = self._by_label.get(ref)
        if eid is None:
            raise StructureError(
                "element-not-in-carrier", f"element {ref!r} is not in the carrier"
            )
        return eid

    def has_label(self, label: str) -> bool:
        return label in self._by_label

    def source_of(self, x: ElementId) -> ElementId:
        return self.source[x]

    def target_of(self, x: ElementId) -> ElementId:
        return self.target[x]

    def inverse_of(self, x: ElementId) -> ElementId:
        return self.inverse[x]

    def product_of(self, x: ElementId, y: ElementId) -> Optional[ElementId]:
        return self.product.get((x, y))

    def composable(self, x: ElementId, y: ElementId) -> bool:
        """Composability as declared by the kind, derived from the maps."""
        if self.kind == GROUPOID:
            return self.target[x] == self.source[y]
        if self.kind == ALMOST_GROUPOID:
            return self.source[x] == self.source[y]
        return True

    def is_unit(self, x: ElementId) -> bool:
        return x in self._unit_set()

    def _unit_set(self) -> frozenset:
        cached = getattr(self, "_units_frozen", None)
        if cached is None:
            cached = frozenset(self.units)
            object.__setattr__(self, "_units_frozen", cached)
        return cached

    @property
    def order(self) -> int:
        return len(self.elements)

    def labels(self) -> list[str]:
        return [e.label for e in self.elements]


def _unique_labels(labels: Sequence[str]) -> None:
    seen = set()
    for lab in labels:
        if lab in seen:
            raise StructureError("duplicate-label", f"duplicate element label {lab!r}")
        seen.add(lab)


def _resolve_map(
    name: str,
    raw: Mapping[str, str],
    by_label: Mapping[str, ElementId],
    elements: Sequence[ElementId],
) -> dict[ElementId, ElementId]:
    out: dict[ElementId, ElementId] = {}
    for e in elements:
        if e.label not in raw:
            raise StructureError(
                "map-not-total", f"{name} map is missing an entry for {e.label!r}"
            )
        val = raw[e.label]
        if val not in by_label:
            raise StructureError(
                "map-not-total",
                f"{name} map sends {e.label!r} to unknown element {val!r}",
            )
        out[e] = by_label[val]
    extra = set(raw) - {e.label for e in elements}
    if extra:
        raise StructureError(
            "map-not-total",
            f"{name} map has entries for unknown elements {sorted(extra)!r}",
        )
    return out


def build_finite_table(
    elements: Sequence[str],
    units: Iterable[str],
    source: Mapping[str, str],
    target: Mapping[str, str],
    inverse: Mapping[str, str],
    product_entries: Iterable[tuple[str, str, str]],
    kind: str,
) -> FiniteStructureTable:
    """Build and structurally validate a finite table.

    Checks label uniqueness, totality of the maps, that source/target land in
    the unit set, and that the product entries cover the composable set of the
    declared kind exactly.  Does *not* verify any algebraic axiom.
    """
    if kind not in KINDS:
        raise StructureError("unknown-kind", f"unknown structure kind {kind!r}")
    labels = list(elements)
    if not labels:
        raise StructureError("empty-set", "carrier must be nonempty")
    _unique_labels(labels)
    eids = tuple(ElementId(i, lab) for i, lab in enumerate(labels))
    by_label = {e.label: e for e in eids}

    unit_labels = list(units)
    if not unit_labels:
        raise StructureError("empty-set", "unit set must be nonempty")
    for u in unit_labels:
        if u not in by_label:
            raise StructureError("unit-not-in-elements", f"unit {u!r} is not an element")
    unit_ids = tuple(sorted({by_label[u] for u in unit_labels}, key=lambda e: e.index))
    unit_set = set(unit_ids)

    src = _resolve_map("source", source, by_label, eids)
    tgt = _resolve_map("target", target, by_label, eids)
    inv = _resolve_map("inverse", inverse, by_label, eids)

    for name, m in (("source", src), ("target", tgt)):
        for x, u in m.items():
            if u not in unit_set:
                raise StructureError(
                    "value-not-a-unit",
                    f"{name}({x.label}) = {u.label!r} is not in the unit set",
                )
    if kind in (ALMOST_GROUPOID, GENERALIZED_GROUP) and src != tgt:
        bad = next(x for x in eids if src[x] != tgt[x])
        raise StructureError(
            "source-target-mismatch",
            f"kind {kind!r} stores one unit map, but source({bad.label}) != target({bad.label})",
        )
    if kind == GENERALIZED_GROUP and {src[x] for x in eids} != unit_set:
        raise StructureError(
            "units-not-identity-image",
            "generalized_group units must equal the image of the identity map",
        )

    prod: dict[tuple[ElementId, ElementId], ElementId] = {}
    for x_lab, y_lab, z_lab in product_entries:
        for lab in (x_lab, y_lab, z_lab):
            if lab not in by_label:
                raise StructureError(
                    "element-not-in-carrier",
                    f"product entry ({x_lab!r}, {y_lab!r}) -> {z_lab!r} references unknown element {lab!r}",
                )
        x, y, z = by_label[x_lab], by_label[y_lab], by_label[z_lab]
        key = (x, y)
        if key in prod:
            raise StructureError(
                "duplicate-product-entry",
                f"product entry for ({x_lab!r}, {y_lab!r}) appears twice",
            )
        prod[key] = z

    table = FiniteStructureTable(
        kind=kind,
        elements=eids,
        units=unit_ids,
        source=src,
        target=tgt,
        inverse=inv,
        product=prod,
        pairs=(),
    )
    pairs = []
    for x in eids:
        for y in eids:
            comp = table.composable(x, y)
            present = (x, y) in prod
            if present and not comp:
                raise StructureError(
                    "product-entry-outside-composable-set",
                    f"product entry ({x.label!r}, {y.label!r}) is outside the composable set",
                )
            if comp and not present:
                raise StructureError(
                    "map-not-total",
                    f"product map is missing the composable pair ({x.label!r}, {y.label!r})",
                )
            if comp:
                pairs.append((x, y))
    object.__setattr__(table, "pairs", tuple(pairs))
    return table


def build_generalized_group(
    elements: Sequence[str],
    e: Mapping[str, str],
    inverse: Mapping[str, str],
    product_entries: Iterable[tuple[str, str, str]],
) -> FiniteStructureTable:
    """Generalized-group table: units are derived as the image of ``e``."""
    seen: list[str] = []
    for lab in elements:
        if lab in e and e[lab] not in seen:
            seen.append(e[lab])
    return build_finite_table(
        elements, seen, e, e, inverse, product_entries, GENERALIZED_GROUP
    )


def group_table(
    labels: Sequence[str],
    op: Callable[[str, str], str],
    identity_label: str,
    kind: str = ALMOST_GROUPOID,
) -> FiniteStructureTable:
    """One-unit table from a total operation; inverses found by scanning."""
    inv: dict[str, str] = {}
    for a in labels:
        for b in labels:
            if op(a, b) == identity_label and op(b, a) == identity_label:
                inv[a] = b
                break
        else:
            raise StructureError("map-not-total", f"no inverse found for {a!r}")
    const = {a: identity_label for a in labels}
    entries = [(a, b, op(a, b)) for a in labels for b in labels]
    return build_finite_table(labels, [identity_label], const, const, inv, entries, kind)


def relabel_table(
    table: FiniteStructureTable, rename: Callable[[str], str]
) -> FiniteStructureTable:
    """Relabelled copy; the renaming must stay injective on the carrier."""
    labels = [rename(e.label) for e in table.elements]
    old = {e.label: rename(e.label) for e in table.elements}
    return build_finite_table(
        labels,
        [old[u.label] for u in table.units],
        {old[x.label]: old[table.source[x].label] for x in table.elements},
        {old[x.label]: old[table.target[x].label] for x in table.elements},
        {old[x.label]: old[table.inverse[x].label] for x in table.elements},
        [(old[x.label], old[y.label], old[z.label]) for (x, y), z in table.product.items()],
        table.kind,
    )


def lookup_product(S: FiniteStructureTable, x, y) -> Optional[ElementId]:
    """m(x, y) when the pair is composable, None otherwise; never raises on
    non-composable pairs."""
    ex = S.element(x)
    ey = S.element(y)
    return S.product_of(ex, ey)


@dataclass(frozen=True)
class RuleStructure:
    """Predicate/closure-backed structure over an infinite carrier.

    ``product`` returns None on non-composable pairs.  ``sample`` draws one
    carrier element from the given RNG; ``right_factor``, when present, draws
    a y with (x, y) composable (needed when composability has measure zero
    under independent sampling).  All maps are deterministic for fixed input.
    """

    kind: str
    name: str
    value_domain: str
    membership: Callable[[Any], bool]
    source: Callable[[Any], Any]
    target: Callable[[Any], Any]
    inverse: Callable[[Any], Any]
    product: Callable[[Any, Any], Optional[Any]]
    is_unit: Callable[[Any], bool]
    sample: Callable[[random.Random], Any]
    eq: Callable[[Any, Any], bool]
    fmt: Callable[[Any], str]
    right_factor: Optional[Callable[[Any, random.Random], Any]] = None

    def composable(self, x, y) -> bool:
        if self.kind == GROUPOID:
            return self.eq(self.target(x), self.source(y))
        if self.kind == ALMOST_GROUPOID:
            return self.eq(self.source(x), self.source(y))
        return True


def is_rule_structure(S) -> bool:
    return isinstance(S, RuleStructure)


def sample_elements(S: RuleStructure, rng: random.Random, count: int) -> list:
    return [S.sample(rng) for _ in range(count)]


def sample_composable_pairs(S: RuleStructure, seed: int, count: int) -> list:
    """Deterministic composable pairs; raises after a bounded retry budget."""
    if count < 1:
        raise StructureError("invalid-count", f"count must be >= 1, got {count}")
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        if S.right_factor is not None:
            x = S.sample(rng)
            y = S.right_factor(x, rng)
            if not S.composable(x, y):
                raise StructureError(
                    "sampler-exhausted",
                    f"right_factor of {S.name} produced a non-composable pair",
                )
            out.append((x, y))
            continue
        for _attempt in range(SAMPLER_RETRY_BUDGET):
            x = S.sample(rng)
            y = S.sample(rng)
            if S.composable(x, y) and S.product(x, y) is not None:
                out.append((x, y))
                break
        else:
            raise StructureError(
                "sampler-exhausted",
                f"no composable pair for {S.name} after {SAMPLER_RETRY_BUDGET} attempts",
            )
    return out


def sample_composable_triples(S: RuleStructure, rng: random.Random, count: int) -> list:
    """Triples (x, y, z) with (x, y) and (y, z) composable."""
    out = []
    for _ in range(count):
        if S.right_factor is not None:
            x = S.sample(rng)
            y = S.right_factor(x, rng)
            z = S.right_factor(y, rng)
            out.append((x, y, z))
            continue
        for _attempt in range(SAMPLER_RETRY_BUDGET):
            x, y, z = S.sample(rng), S.sample(rng), S.sample(rng)
            if S.composable(x, y) and S.composable(y, z):
                out.append((x, y, z))
                break
        else:
            raise StructureError(
                "sampler-exhausted",
                f"no composable triple for {S.name} after {SAMPLER_RETRY_BUDGET} attempts",
            )
    return out


def first_failure(name: str, witnesses: Iterable[Witness], required: bool = True) -> CheckResult:
    """Materialize a check from a witness generator; first witness wins."""
    for w in witnesses:
        return CheckResult(name, False, w, required)
    return CheckResult(name, True, None, required)
