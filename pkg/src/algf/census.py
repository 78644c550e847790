"""Brute-force ground truth: exhaustive enumeration of small structures,
isomorphism testing by pruned bijection search, and canonical forms.

Canonical forms relabel the carrier with the units in a leading block and
take the lexicographically least encoding over all such relabelings, so two
structures within the size bound are isomorphic exactly when their canonical
forms are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cache
from itertools import combinations_with_replacement, permutations
from typing import Iterable, Optional, Sequence

from .almost import check_almost_morphism, verify_almost_groupoid
from .gengroup import check_gg_homomorphism, verify_generalized_group
from .groupoid import check_groupoid_morphism, isotropy_group
from .kernel import (
    ALMOST_GROUPOID,
    GENERALIZED_GROUP,
    GROUPOID,
    FiniteStructureTable,
    MorphismPair,
    StructureError,
    build_finite_table,
    build_generalized_group,
    group_table,
)

CANONICAL_MAX_ORDER = 8
ISO_MAX_ORDER = 12


# ---------------------------------------------------------------------------
# reference group tables
# ---------------------------------------------------------------------------

def cyclic_group_table(
    n: int, kind: str = ALMOST_GROUPOID, prefix: str = "g"
) -> FiniteStructureTable:
    """The additive cycle of length n with labels prefix0..prefix{n-1}."""
    if n < 1:
        raise StructureError("nonpositive-n", f"n must be >= 1, got {n}")
    labels = [f"{prefix}{i}" for i in range(n)]

    def op(a: str, b: str) -> str:
        return labels[(labels.index(a) + labels.index(b)) % n]

    return group_table(labels, op, labels[0], kind)


def dihedral_group_table(n: int, kind: str = ALMOST_GROUPOID) -> FiniteStructureTable:
    """Symmetries of a regular n-gon, order 2n; labels r{i} and s{i}."""
    if n < 1:
        raise StructureError("nonpositive-n", f"n must be >= 1, got {n}")
    labels = [f"r{i}" for i in range(n)] + [f"s{i}" for i in range(n)]

    def decode(lab: str) -> tuple[int, int]:
        return (0 if lab[0] == "r" else 1, int(lab[1:]))

    def op(a: str, b: str) -> str:
        f1, i1 = decode(a)
        f2, i2 = decode(b)
        f = (f1 + f2) % 2
        i = ((i1 if f2 == 0 else -i1) + i2) % n
        return f"{'r' if f == 0 else 's'}{i}"

    return group_table(labels, op, "r0", kind)


# ---------------------------------------------------------------------------
# canonical forms and signatures
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class CanonicalForm:
    """Lexicographically least relabeled encoding; equal iff isomorphic
    within the supported size bound."""

    key: tuple


def canonical_form(S: FiniteStructureTable) -> CanonicalForm:
    n = S.order
    if n > CANONICAL_MAX_ORDER:
        raise StructureError(
            "order-too-large", f"canonical form supports order <= {CANONICAL_MAX_ORDER}"
        )
    units = list(S.units)
    others = [e for e in S.elements if e not in set(units)]
    best = None
    for pu in permutations(units):
        for pn in permutations(others):
            order = list(pu) + list(pn)
            pos = {e: i for i, e in enumerate(order)}
            key = (
                S.kind,
                n,
                len(units),
                tuple(pos[S.source[e]] for e in order),
                tuple(pos[S.target[e]] for e in order),
                tuple(pos[S.inverse[e]] for e in order),
                tuple(
                    pos[S.product[(x, y)]] if (x, y) in S.product else -1
                    for x in order
                    for y in order
                ),
            )
            if best is None or key < best:
                best = key
    return CanonicalForm(best)


def isotropy_signature(S: FiniteStructureTable) -> tuple:
    """Multiset of (fiber size, canonical fiber group) over the units; an
    isomorphism invariant."""
    parts = []
    for u in S.units:
        fiber = isotropy_group(S, u)
        parts.append((fiber.order, canonical_form(fiber).key))
    return tuple(sorted(parts))


# ---------------------------------------------------------------------------
# isomorphism search
# ---------------------------------------------------------------------------

def _profile(S: FiniteStructureTable, x) -> tuple:
    src_fiber = sum(1 for y in S.elements if S.source[y] == S.source[x])
    tgt_fiber = sum(1 for y in S.elements if S.target[y] == S.target[x])
    xx = S.product.get((x, x))
    return (
        x in set(S.units),
        S.inverse[x] == x,
        src_fiber,
        tgt_fiber,
        xx == x if xx is not None else None,
    )


def are_isomorphic(
    S: FiniteStructureTable, T: FiniteStructureTable
) -> Optional[MorphismPair]:
    """A bijective morphism pair between the structures, or None.

    Exhaustive backtracking over element images, pruned by unit membership
    and cheap invariants; inputs above order 12 are rejected.
    """
    if S.kind != T.kind:
        raise StructureError(
            "kind-mismatch", f"cannot compare kinds {S.kind!r} and {T.kind!r}"
        )
    if S.order > ISO_MAX_ORDER or T.order > ISO_MAX_ORDER:
        raise StructureError(
            "order-too-large", f"isomorphism search supports order <= {ISO_MAX_ORDER}"
        )
    if S.order != T.order or len(S.units) != len(T.units):
        return None
    try:
        if isotropy_signature(S) != isotropy_signature(T):
            return None
    except StructureError:
        pass  # oversized fibers: skip the pruning invariant

    sel, tel = S.elements, T.elements
    n = S.order
    sprof = [_profile(S, x) for x in sel]
    tprof = [_profile(T, y) for y in tel]
    if sorted(sprof) != sorted(tprof):
        return None
    candidates = [
        [j for j in range(n) if tprof[j] == sprof[i]] for i in range(n)
    ]
    img: list[Optional[int]] = [None] * n
    inv_img: list[Optional[int]] = [None] * n
    maps = ((S.source, T.source), (S.target, T.target), (S.inverse, T.inverse))

    def consistent() -> bool:
        placed = [i for i in range(n) if img[i] is not None]
        for i in placed:
            x, y = sel[i], tel[img[i]]
            for mS, mT in maps:
                v, w = mS[x].index, mT[y].index
                if img[v] is not None:
                    if img[v] != w:
                        return False
                elif inv_img[w] is not None:
                    return False
        for i in placed:
            for k in placed:
                xy = S.product.get((sel[i], sel[k]))
                uv = T.product.get((tel[img[i]], tel[img[k]]))
                if (xy is None) != (uv is None):
                    return False
                if xy is not None:
                    v, w = xy.index, uv.index
                    if img[v] is not None:
                        if img[v] != w:
                            return False
                    elif inv_img[w] is not None:
                        return False
        return True

    def search(i: int) -> bool:
        if i == n:
            return True
        for j in candidates[i]:
            if inv_img[j] is not None:
                continue
            img[i], inv_img[j] = j, i
            if consistent() and search(i + 1):
                return True
            img[i], inv_img[j] = None, None
        return False

    if not search(0):
        return None
    pair = MorphismPair(
        f={sel[i].label: tel[img[i]].label for i in range(n)},
        f0={u.label: tel[img[u.index]].label for u in S.units},
    )
    checker = {
        GROUPOID: lambda: check_groupoid_morphism(S, T, pair.f, pair.f0),
        ALMOST_GROUPOID: lambda: check_almost_morphism(S, T, pair.f, pair.f0),
        GENERALIZED_GROUP: lambda: check_gg_homomorphism(S, T, pair.f),
    }[S.kind]
    report = checker()
    if not (report.verdict and report.is_isomorphism):
        raise StructureError(
            "construction-invalid", "isomorphism search produced an invalid witness"
        )
    return pair


# ---------------------------------------------------------------------------
# exhaustive enumeration
# ---------------------------------------------------------------------------

@cache
def _group_tables(m: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All group multiplication tables on 0..m-1 with identity 0, up to
    isomorphism.  Generated as Latin squares with a fixed identity, filtered
    by associativity, deduplicated by minimal relabeling."""
    if m == 1:
        return (((0,),),)
    tables = []
    grid = [[None] * m for _ in range(m)]
    for j in range(m):
        grid[0][j] = j
        grid[j][0] = j
    row_used = [set() for _ in range(m)]
    col_used = [set() for _ in range(m)]
    for i in range(m):
        for j in range(m):
            if grid[i][j] is not None:
                row_used[i].add(grid[i][j])
                col_used[j].add(grid[i][j])

    cells = [(i, j) for i in range(1, m) for j in range(1, m)]

    def fill(idx: int):
        if idx == len(cells):
            if _is_associative(grid, m):
                tables.append(tuple(tuple(row) for row in grid))
            return
        i, j = cells[idx]
        for v in range(m):
            if v in row_used[i] or v in col_used[j]:
                continue
            grid[i][j] = v
            row_used[i].add(v)
            col_used[j].add(v)
            fill(idx + 1)
            grid[i][j] = None
            row_used[i].remove(v)
            col_used[j].remove(v)

    fill(0)

    seen = {}
    for t in tables:
        key = _min_relabeling_fixing_identity(t, m)
        if key not in seen:
            seen[key] = t
    return tuple(seen[k] for k in sorted(seen))


def _is_associative(grid, m: int) -> bool:
    for x in range(m):
        for y in range(m):
            xy = grid[x][y]
            for z in range(m):
                if grid[xy][z] != grid[x][grid[y][z]]:
                    return False
    return True


def _min_relabeling_fixing_identity(t, m: int) -> tuple:
    best = None
    for perm in permutations(range(1, m)):
        p = (0,) + perm
        relab = tuple(
            tuple(p[t[_inv(p, i)][_inv(p, j)]] for j in range(m)) for i in range(m)
        )
        if best is None or relab < best:
            best = relab
    return best


def _inv(p: tuple, i: int) -> int:
    return p.index(i)


def _partitions_into(n: int, k: int, max_part: Optional[int] = None):
    """Nonincreasing k-part partitions of n."""
    if max_part is None:
        max_part = n
    if k == 1:
        if 1 <= n <= max_part:
            yield (n,)
        return
    for first in range(min(n - k + 1, max_part), 0, -1):
        for rest in _partitions_into(n - first, k - 1, first):
            yield (first,) + rest


def _assemble_almost(fibers: Sequence[tuple[int, tuple]]) -> FiniteStructureTable:
    labels = []
    theta = {}
    inverse = {}
    entries = []
    units = []
    for f, (size, table) in enumerate(fibers):
        labs = [f"{f}.{i}" for i in range(size)]
        labels.extend(labs)
        units.append(labs[0])
        for i in range(size):
            theta[labs[i]] = labs[0]
            inverse[labs[i]] = labs[table[i].index(0)]
            for j in range(size):
                entries.append((labs[i], labs[j], labs[table[i][j]]))
    return build_finite_table(labels, units, theta, theta, inverse, entries, ALMOST_GROUPOID)


def enumerate_almost_groupoids(
    order: int, unit_count: int, fiber_sizes: Optional[Iterable[int]] = None
) -> list[FiniteStructureTable]:
    """All almost groupoids of the given order and unit count, up to
    isomorphism.

    Since the theta-fibers of any almost groupoid are groups, generation runs
    fiberwise over group tables; every candidate is still pushed through the
    verifier and deduplicated by canonical form.
    """
    wanted = tuple(sorted(fiber_sizes, reverse=True)) if fiber_sizes is not None else None
    return list(_enumerate_almost_cached(order, unit_count, wanted))


@cache
def _enumerate_almost_cached(
    order: int, unit_count: int, wanted: Optional[tuple]
) -> tuple[FiniteStructureTable, ...]:
    if order > 6:
        raise StructureError("order-too-large", "enumeration supports order <= 6")
    if not 1 <= unit_count <= order:
        raise StructureError(
            "invalid-count", f"unit count must lie in 1..{order}, got {unit_count}"
        )
    results = {}
    for sizes in _partitions_into(order, unit_count):
        if wanted is not None and sizes != wanted:
            continue
        pools = [_group_tables(s) for s in sizes]
        for choice in _multiset_choices(sizes, pools):
            table = _assemble_almost(list(zip(sizes, choice)))
            if not verify_almost_groupoid(table).verdict:
                continue
            key = canonical_form(table)
            if key not in results:
                results[key] = table
    return tuple(results[k] for k in sorted(results))


def _multiset_choices(sizes: Sequence[int], pools: Sequence[tuple]):
    """Choices of one table per fiber, deduplicated across equal fiber sizes."""
    runs: list[tuple[int, int]] = []  # (size, run length)
    for s in sizes:
        if runs and runs[-1][0] == s:
            runs[-1] = (s, runs[-1][1] + 1)
        else:
            runs.append((s, 1))
    per_run = []
    idx = 0
    for s, length in runs:
        pool = pools[idx]
        per_run.append([c for c in combinations_with_replacement(pool, length)])
        idx += length
    def rec(r: int):
        if r == len(per_run):
            yield ()
            return
        for head in per_run[r]:
            for tail in rec(r + 1):
                yield head + tail
    return rec(0)


def _associative_tables(n: int):
    """All associative total tables on 0..n-1, by backtracking with partial
    associativity pruning."""
    cells = [(i, j) for i in range(n) for j in range(n)]
    t: dict[tuple[int, int], int] = {}

    def partial_ok(a: int, b: int) -> bool:
        for z in range(n):
            ab = t.get((a, b))
            bz = t.get((b, z))
            if ab is not None and bz is not None:
                left = t.get((ab, z))
                right = t.get((a, bz))
                if left is not None and right is not None and left != right:
                    return False
            xa = t.get((z, a))
            ab2 = t.get((a, b))
            if xa is not None and ab2 is not None:
                left = t.get((xa, b))
                right = t.get((z, ab2))
                if left is not None and right is not None and left != right:
                    return False
        return True

    def full_ok() -> bool:
        for x in range(n):
            for y in range(n):
                xy = t[(x, y)]
                for z in range(n):
                    if t[(xy, z)] != t[(x, t[(y, z)])]:
                        return False
        return True

    def fill(idx: int):
        if idx == len(cells):
            if full_ok():
                yield dict(t)
            return
        i, j = cells[idx]
        for v in range(n):
            t[(i, j)] = v
            if partial_ok(i, j):
                yield from fill(idx + 1)
            del t[(i, j)]

    yield from fill(0)


def enumerate_generalized_groups(order: int) -> list[FiniteStructureTable]:
    """All generalized groups of the given order up to isomorphism, found by
    scanning the associative total tables and keeping those where every
    element has a unique local identity and an inverse."""
    return list(_enumerate_gg_cached(order))


@cache
def _enumerate_gg_cached(order: int) -> tuple[FiniteStructureTable, ...]:
    if order > 4:
        raise StructureError("order-too-large", "enumeration supports order <= 4")
    labels = [f"x{i}" for i in range(order)]
    results = {}
    for t in _associative_tables(order):
        e_map = {}
        ok = True
        for a in range(order):
            cands = [u for u in range(order) if t[(a, u)] == a and t[(u, a)] == a]
            if len(cands) != 1:
                ok = False
                break
            e_map[a] = cands[0]
        if not ok:
            continue
        inv_map = {}
        for a in range(order):
            cands = [
                b
                for b in range(order)
                if t[(a, b)] == e_map[a] and t[(b, a)] == e_map[a]
            ]
            if not cands:
                ok = False
                break
            inv_map[a] = cands[0]
        if not ok:
            continue
        table = build_generalized_group(
            labels,
            {labels[a]: labels[e_map[a]] for a in range(order)},
            {labels[a]: labels[inv_map[a]] for a in range(order)},
            [(labels[a], labels[b], labels[t[(a, b)]]) for a in range(order) for b in range(order)],
        )
        if not verify_generalized_group(table).verdict:
            continue
        key = canonical_form(table)
        if key not in results:
            results[key] = table
    return tuple(results[k] for k in sorted(results))
