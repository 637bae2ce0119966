"""Partial semigroups (finite categories viewed as one composition table),
Green's relations, and ideal chains.

The composition table is dense int32 with -1 for undefined products; at the
size guard (5000 elements) that is well under 100MB and keeps every sweep a
plain numpy gather.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import elements as el
from .errors import GuardError, ValidationError

ObjectId = int

DEFAULT_MAX_ELEMENTS = 5000


def max_elements() -> int:
    try:
        return int(os.environ.get("CONGWB_MAX_ELEMENTS", DEFAULT_MAX_ELEMENTS))
    except ValueError:
        return DEFAULT_MAX_ELEMENTS


@dataclass
class PartialSemigroup:
    """Finite set of elements with a partially defined associative product.

    table[i, j] is the index of elements[i] * elements[j], or -1 when bd/br
    mismatch.  bd/br hold the (co)domain object ids per element.
    """

    elements: list
    bd: np.ndarray
    br: np.ndarray
    table: np.ndarray
    spec: el.FamilySpec | None = None
    parent: "PartialSemigroup | None" = None
    parent_index: np.ndarray | None = None
    index: dict = field(default_factory=dict)
    hom_index: dict = field(default_factory=dict)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def __post_init__(self):
        if not self.index:
            self.index = {x: i for i, x in enumerate(self.elements)}
        if not self.hom_index:
            homs: dict[tuple[int, int], list[int]] = {}
            for i in range(self.n_elements):
                homs.setdefault((int(self.bd[i]), int(self.br[i])), []).append(i)
            self.hom_index = {k: np.array(v, dtype=np.int32) for k, v in homs.items()}

    def left_translators(self, obj: ObjectId) -> np.ndarray:
        """Indices of c with c*x defined for bd(x) == obj."""
        cache = self.__dict__.setdefault("_lt_cache", {})
        got = cache.get(obj)
        if got is None:
            got = cache[obj] = np.flatnonzero(self.br == obj).astype(np.int32)
        return got

    def right_translators(self, obj: ObjectId) -> np.ndarray:
        cache = self.__dict__.setdefault("_rt_cache", {})
        got = cache.get(obj)
        if got is None:
            got = cache[obj] = np.flatnonzero(self.bd == obj).astype(np.int32)
        return got

    def objects(self) -> list[int]:
        return sorted({int(v) for v in self.bd} | {int(v) for v in self.br})

    def rank_of(self, i: int) -> int:
        return el.rank(self.elements[i])


def _check_associativity(S: PartialSemigroup, seed: int = 7) -> None:
    n = S.n_elements
    t = S.table
    if n <= 300:
        it = range(n)
        exhaustive = True
    else:
        rng = np.random.default_rng(seed)
        exhaustive = False
    if exhaustive:
        for i in it:
            row = t[i]  # (ij) for all j
            ij_ok = row >= 0
            lhs = np.where(ij_ok[:, None], t[np.where(ij_ok, row, 0)], -1)
            jk = t  # (jk)
            rhs = np.where(jk >= 0, t[i][np.where(jk >= 0, jk, 0)], -1)
            both = ij_ok[:, None] & (jk >= 0)
            if not np.array_equal(np.where(both, lhs, -1), np.where(both, rhs, -1)):
                raise ValidationError("composition is not associative")
    else:
        m = 100_000
        i = rng.integers(0, n, m)
        j = rng.integers(0, n, m)
        k = rng.integers(0, n, m)
        ij = t[i, j]
        jk = t[j, k]
        ok = (ij >= 0) & (jk >= 0)
        lhs = t[ij[ok], k[ok]]
        rhs = t[i[ok], jk[ok]]
        if not np.array_equal(lhs, rhs):
            raise ValidationError("composition is not associative (sampled)")


def build_partial_semigroup(elems: list, composer=None, *, spec=None,
                            force: bool = False) -> PartialSemigroup:
    """Close the table over the given elements; every defined product must
    land back in the set."""
    n = len(elems)
    if n == 0:
        raise ValidationError("no elements")
    if n > max_elements() and not force:
        raise GuardError(
            f"{n} elements exceeds the guard ({max_elements()}); "
            "set CONGWB_MAX_ELEMENTS or pass force=True")
    if composer is None:
        composer = el.compose
    index = {}
    for i, x in enumerate(elems):
        if x in index:
            raise ValidationError(f"duplicate element at {i}")
        index[x] = i
    bd = np.array([el.bd(x) for x in elems], dtype=np.int32)
    br = np.array([el.br(x) for x in elems], dtype=np.int32)
    table = np.full((n, n), -1, dtype=np.int32)
    homs: dict[tuple[int, int], list[int]] = {}
    for i in range(n):
        homs.setdefault((int(bd[i]), int(br[i])), []).append(i)
    for (a1, b1), I in homs.items():
        for (a2, b2), J in homs.items():
            if b1 != a2:
                continue
            for i in I:
                xi = elems[i]
                row = table[i]
                for j in J:
                    prod = composer(xi, elems[j])
                    pi = index.get(prod)
                    if pi is None:
                        raise ValidationError(
                            f"product of {i} and {j} left the element set")
                    row[j] = pi
    S = PartialSemigroup(list(elems), bd, br, table, spec=spec, index=index)
    _check_associativity(S)
    return S


def _build_matrix_family(spec: el.FamilySpec, force: bool) -> PartialSemigroup:
    """Vectorized table for L/PL: encode matrices as base-p integers."""
    p = spec.field_p
    elems = []
    for a in spec.objects:
        for b in spec.objects:
            elems.extend(el.generate_homset(spec, a, b))
    n = len(elems)
    if n > max_elements() and not force:
        raise GuardError(
            f"{n} elements exceeds the guard ({max_elements()}); "
            "set CONGWB_MAX_ELEMENTS or pass force=True")
    index = {x: i for i, x in enumerate(elems)}
    bd = np.array([x.dom for x in elems], dtype=np.int32)
    br = np.array([x.cod for x in elems], dtype=np.int32)
    table = np.full((n, n), -1, dtype=np.int32)
    projective = spec.tag == "PL"
    by_shape: dict[tuple[int, int], list[int]] = {}
    for i, x in enumerate(elems):
        by_shape.setdefault((x.dom, x.cod), []).append(i)
    inv = [0] * p
    for v in range(1, p):
        inv[v] = pow(v, p - 2, p)
    inv_arr = np.array(inv, dtype=np.int64)
    for (a1, b1), I in by_shape.items():
        A = np.array([elems[i].entries for i in I], dtype=np.int64)  # (k,a1,b1)
        for (a2, b2), J in by_shape.items():
            if b1 != a2:
                continue
            B = np.array([elems[j].entries for j in J], dtype=np.int64)
            weights = p ** np.arange(a1 * b2, dtype=np.int64)
            lut = np.full(p ** (a1 * b2), -1, dtype=np.int32)
            for j_idx in by_shape.get((a1, b2), []):
                e = np.array(elems[j_idx].entries, dtype=np.int64).ravel()
                lut[int(e @ weights)] = j_idx
            I_arr = np.array(I)
            chunk = max(1, 2_000_000 // max(1, len(J) * a1 * b2))
            for s in range(0, len(I), chunk):
                Ac = A[s:s + chunk]
                prod = np.einsum("iab,jbc->ijac", Ac, B) % p
                flat = prod.reshape(len(Ac), len(J), a1 * b2)
                if projective:
                    nz = flat != 0
                    any_nz = nz.any(axis=2)
                    first = np.argmax(nz, axis=2)
                    lead = np.take_along_axis(flat, first[..., None], axis=2)[..., 0]
                    scale = np.where(any_nz, inv_arr[lead], 1)
                    flat = (flat * scale[..., None]) % p
                codes = flat @ weights
                hit = lut[codes]
                if (hit < 0).any():
                    raise ValidationError("matrix product left the element set")
                table[np.ix_(I_arr[s:s + chunk], np.array(J))] = hit
    S = PartialSemigroup(elems, bd, br, table, spec=spec, index=index)
    _check_associativity(S)
    return S


def build_category(spec: el.FamilySpec, *, force: bool = False) -> PartialSemigroup:
    """Generate every hom-set of the family and assemble the table."""
    if spec.tag in el.MATRIX_TAGS:
        return _build_matrix_family(spec, force)
    elems = []
    for a in spec.objects:
        for b in spec.objects:
            elems.extend(el.generate_homset(spec, a, b))
    return build_partial_semigroup(elems, spec=spec, force=force)


# ---------------------------------------------------------------------------
# Green's relations


@dataclass
class GreenData:
    r_class: np.ndarray
    l_class: np.ndarray
    h_class: np.ndarray
    d_class: np.ndarray
    j_class: np.ndarray
    j_leq: np.ndarray        # j_leq[a, b] iff J_a <= J_b in the ideal order
    idempotents: np.ndarray

    @property
    def n_j(self) -> int:
        return self.j_leq.shape[0]

    def members(self, kind: str, cid: int) -> np.ndarray:
        arr = getattr(self, f"{kind}_class")
        return np.flatnonzero(arr == cid)

    def class_sizes(self, kind: str) -> np.ndarray:
        arr = getattr(self, f"{kind}_class")
        return np.bincount(arr)


def _scc(n: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    if len(src) == 0:
        return np.arange(n, dtype=np.int32)
    g = csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n))
    _, labels = connected_components(g, directed=True, connection="strong")
    return labels.astype(np.int32)


def _canon_labels(labels: np.ndarray) -> np.ndarray:
    """Relabel class ids by first appearance."""
    _, first = np.unique(labels, return_index=True)
    remap = np.empty(int(labels.max()) + 1, dtype=np.int32)
    remap[labels[np.sort(first)]] = np.arange(len(first), dtype=np.int32)
    return remap[labels]


def green_relations(S: PartialSemigroup) -> GreenData:
    n = S.n_elements
    t = S.table
    rows, cols = np.nonzero(t >= 0)
    prods = t[rows, cols]
    # right Cayley graph: x -> x*c ; left: x -> c*x
    r_class = _canon_labels(_scc(n, rows, prods))
    l_class = _canon_labels(_scc(n, cols, prods))
    j_class = _canon_labels(_scc(
        n, np.concatenate([rows, cols]), np.concatenate([prods, prods])))
    # H = R meet L
    h_code = r_class.astype(np.int64) * (l_class.max() + 1) + l_class
    _, h_class = np.unique(h_code, return_inverse=True)
    h_class = _canon_labels(h_class.astype(np.int32))
    # D = join of R and L, via union-find on class reps
    parent = np.arange(n, dtype=np.int32)

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for arr in (r_class, l_class):
        order = np.argsort(arr, kind="stable")
        sorted_cls = arr[order]
        same = sorted_cls[1:] == sorted_cls[:-1]
        for a, b in zip(order[:-1][same], order[1:][same]):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    d_class = _canon_labels(np.array([find(v) for v in range(n)], dtype=np.int32))
    if not np.array_equal(d_class, _canon_labels(j_class)):
        raise ValidationError("D and J differ; out of scope for this toolkit")
    j_class = d_class
    # eggbox check: every (R,L) cell of a D-class is non-empty
    for d in range(j_class.max() + 1):
        m = np.flatnonzero(d_class == d)
        rs = np.unique(r_class[m])
        ls = np.unique(l_class[m])
        cells = {(int(a), int(b)) for a, b in zip(r_class[m], l_class[m])}
        if len(cells) != len(rs) * len(ls):
            raise ValidationError("R o L != L o R on a D-class")
    # J order on class ids: edges J(x) >= J(x*c), J(c*x)
    nj = j_class.max() + 1
    leq = np.eye(nj, dtype=bool)
    src_j = j_class[np.concatenate([rows, cols])]
    dst_j = j_class[np.concatenate([prods, prods])]
    leq[dst_j, src_j] = True  # product's class <= factor's class
    # transitive closure (nj is small)
    for _ in range(nj):
        new = leq | (leq.astype(np.uint8) @ leq.astype(np.uint8)).astype(bool)
        if np.array_equal(new, leq):
            break
        leq = new
    diag = t.diagonal()
    idem = np.flatnonzero(diag == np.arange(n))
    return GreenData(r_class, l_class, h_class, d_class, j_class, leq,
                     idem.astype(np.int32))


def is_stable(S: PartialSemigroup, G: GreenData) -> bool:
    """x J x*a implies x R x*a, and dually on the left."""
    t = S.table
    rows, cols = np.nonzero(t >= 0)
    prods = t[rows, cols]
    same_j = G.j_class[rows] == G.j_class[prods]
    if not np.all(G.r_class[rows][same_j] == G.r_class[prods][same_j]):
        return False
    same_j = G.j_class[cols] == G.j_class[prods]
    return bool(np.all(G.l_class[cols][same_j] == G.l_class[prods][same_j]))


def is_regular(S: PartialSemigroup, x: int | None = None) -> bool:
    """x = x*a*x for some a (checked literally)."""
    t = S.table
    if x is not None:
        cands = S.hom_index.get((int(S.br[x]), int(S.bd[x])))
        if cands is None or len(cands) == 0:
            return False
        u = t[x, cands]
        ok = u >= 0
        return bool(np.any(t[u[ok], x] == x))
    return all(is_regular(S, i) for i in range(S.n_elements))


def is_regular_class(S: PartialSemigroup, G: GreenData, d: int) -> bool:
    """A D-class is regular iff it contains an idempotent."""
    return bool(np.any(G.d_class[G.idempotents] == d))


def is_h_trivial_class(S: PartialSemigroup, G: GreenData, d: int) -> bool:
    m = np.flatnonzero(G.d_class == d)
    return len(np.unique(G.h_class[m])) == len(m)


def is_stable_class(S: PartialSemigroup, G: GreenData, d: int) -> bool:
    """Stability restricted to products falling in class d."""
    t = S.table
    rows, cols = np.nonzero(t >= 0)
    prods = t[rows, cols]
    in_d = G.j_class[prods] == d
    rows, cols, prods = rows[in_d], cols[in_d], prods[in_d]
    same_j = G.j_class[rows] == d
    if not np.all(G.r_class[rows][same_j] == G.r_class[prods][same_j]):
        return False
    same_j = G.j_class[cols] == d
    return bool(np.all(G.l_class[cols][same_j] == G.l_class[prods][same_j]))


# ---------------------------------------------------------------------------
# ideal chains


@dataclass
class IdealChain:
    """J-classes sorted bottom to top (requires the J-order to be a chain),
    with the element rank of each level."""

    S: PartialSemigroup
    G: GreenData
    levels: list[tuple[int, int]]  # (rank, j_class_id), ascending

    def level_of_rank(self, r: int) -> int:
        for k, (rank, _) in enumerate(self.levels):
            if rank == r:
                return k
        raise ValidationError(
            f"no J-class of rank {r}; ranks present: {[rk for rk, _ in self.levels]}")

    def ideal_elements(self, k: int) -> np.ndarray:
        """All elements in levels 0..k."""
        ids = [cid for _, cid in self.levels[: k + 1]]
        return np.flatnonzero(np.isin(self.G.j_class, ids)).astype(np.int32)

    def ideal_by_rank(self, r: int) -> np.ndarray:
        return self.ideal_elements(self.level_of_rank(r))

    @property
    def ranks(self) -> list[int]:
        return [rk for rk, _ in self.levels]


def ideal_chain(S: PartialSemigroup, G: GreenData) -> IdealChain:
    nj = G.n_j
    order = sorted(range(nj), key=lambda c: int(G.j_leq[:, c].sum()))
    # verify total order
    for a, b in zip(order, order[1:]):
        if not G.j_leq[a, b]:
            raise ValidationError("J-classes do not form a chain")
    levels = []
    for cid in order:
        rep = int(np.flatnonzero(G.j_class == cid)[0])
        levels.append((S.rank_of(rep), cid))
    return IdealChain(S, G, levels)


def restrict_to_ideal(S: PartialSemigroup, indices: np.ndarray) -> PartialSemigroup:
    """Sub-partial-semigroup on an ideal; verifies closure."""
    indices = np.asarray(sorted(int(i) for i in indices), dtype=np.int32)
    n = S.n_elements
    inside = np.zeros(n, dtype=bool)
    inside[indices] = True
    t = S.table
    prods_r = t[indices, :]
    prods_c = t[:, indices]
    for prods in (prods_r, prods_c):
        defined = prods >= 0
        if not np.all(inside[prods[defined]]):
            raise ValidationError("subset is not an ideal")
    old_to_new = np.full(n, -1, dtype=np.int32)
    old_to_new[indices] = np.arange(len(indices), dtype=np.int32)
    sub = t[np.ix_(indices, indices)]
    sub_table = np.where(sub >= 0, old_to_new[np.where(sub >= 0, sub, 0)], -1)
    return PartialSemigroup(
        [S.elements[i] for i in indices], S.bd[indices].copy(),
        S.br[indices].copy(), sub_table.astype(np.int32), spec=S.spec,
        parent=S, parent_index=indices)
