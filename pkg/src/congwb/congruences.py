"""Congruences of a partial semigroup and the brute-force enumerator.

A congruence is stored as its class array: class_of[i] is the least element
index in i's class, so equal arrays mean equal congruences and the byte string
of the array is a dictionary key.

The enumerator computes every principal congruence once (unordered pairs that
are mutually reachable under one-sided translation generate the same
congruence, so one worklist closure per strongly connected component of the
pair-translation graph suffices) and then closes the distinct principals
under join.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .core import PartialSemigroup
from .errors import GuardError, ValidationError

ALL_CONGRUENCES_GUARD = 2500
MAX_LATTICE_NODES = 100_000


def canonical_classes(labels: np.ndarray) -> np.ndarray:
    """Relabel an arbitrary integer labelling to least-member representatives."""
    labels = np.asarray(labels)
    n = len(labels)
    order = np.argsort(labels, kind="stable")
    sl = labels[order]
    first = np.ones(n, dtype=bool)
    first[1:] = sl[1:] != sl[:-1]
    reps = order[first]
    vals = sl[first]
    pos = np.searchsorted(vals, labels)
    return reps[pos].astype(np.int32)


class Congruence:
    """An equivalence compatible with composition on both sides."""

    __slots__ = ("S", "class_of", "label", "_key", "_n_classes")

    def __init__(self, S: PartialSemigroup, class_of: np.ndarray, label: str = ""):
        arr = np.ascontiguousarray(class_of, dtype=np.int32)
        arr.setflags(write=False)
        self.S = S
        self.class_of = arr
        self.label = label
        self._key = arr.tobytes()
        self._n_classes = None

    @property
    def key(self) -> bytes:
        return self._key

    @property
    def n_classes(self) -> int:
        if self._n_classes is None:
            self._n_classes = int(len(np.unique(self.class_of)))
        return self._n_classes

    def same(self, x: int, y: int) -> bool:
        return self.class_of[x] == self.class_of[y]

    def classes(self) -> list[np.ndarray]:
        order = np.argsort(self.class_of, kind="stable")
        sl = self.class_of[order]
        cuts = np.flatnonzero(sl[1:] != sl[:-1]) + 1
        return np.split(order, cuts)

    def relabel(self, label: str) -> "Congruence":
        c = Congruence(self.S, self.class_of, label)
        return c

    def __eq__(self, other):
        return isinstance(other, Congruence) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        name = self.label or "congruence"
        return f"<{name}: {self.n_classes} classes on {len(self.class_of)} elements>"


def diagonal(S: PartialSemigroup) -> Congruence:
    return Congruence(S, np.arange(S.n_elements, dtype=np.int32), "Delta")


def full_hom(S: PartialSemigroup) -> Congruence:
    """The largest congruence: same bd and br (one class per hom-set)."""
    code = S.bd.astype(np.int64) * (S.br.max() + 1) + S.br
    return Congruence(S, canonical_classes(code), "Nabla")


def hom_compatible(S: PartialSemigroup, x: int, y: int) -> bool:
    return S.bd[x] == S.bd[y] and S.br[x] == S.br[y]


def is_congruence(S: PartialSemigroup, class_of: np.ndarray) -> bool:
    """C1 (respects bd/br) plus left and right compatibility."""
    lab = np.asarray(class_of)
    if not (np.array_equal(S.bd[lab], S.bd) and np.array_equal(S.br[lab], S.br)):
        return False
    t = S.table
    order = np.argsort(lab, kind="stable")
    sl = lab[order]
    cuts = np.flatnonzero(sl[1:] != sl[:-1]) + 1
    for m in np.split(order, cuts):
        if len(m) < 2:
            continue
        o1, o2 = int(S.bd[m[0]]), int(S.br[m[0]])
        lc = S.left_translators(o1)
        if len(lc):
            v = lab[t[np.ix_(lc, m)]]
            if not np.all(v == v[:, :1]):
                return False
        rc = S.right_translators(o2)
        if len(rc):
            v = lab[t[np.ix_(m, rc)]]
            if not np.all(v == v[:1, :]):
                return False
    return True


# ---------------------------------------------------------------------------
# worklist closure


def _merge_pairs(lab: np.ndarray, I: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Equivalence closure of the labelling lab together with edges (I, J)."""
    n = len(lab)
    src = np.concatenate([I, np.arange(n, dtype=np.int32)])
    dst = np.concatenate([J, lab])
    g = csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n))
    _, comp = connected_components(g, directed=False)
    return canonical_classes(comp)


def congruence_generated(S: PartialSemigroup, pairs, *, start: Congruence | None = None,
                         label: str = "") -> Congruence:
    """Least congruence containing the given element pairs (and start).

    Round-based closure: merge the current batch of pairs, then translate a
    spanning set of the new merges (one pair per old-class boundary inside
    each new class, so at most n-1 pairs per round).  Translates of a
    spanning chain compose transitively, so nothing else needs translating.
    """
    n = S.n_elements
    t = S.table
    lab = (start.class_of.astype(np.int32).copy() if start is not None
           else np.arange(n, dtype=np.int32))
    I = np.array([p[0] for p in pairs], dtype=np.int32)
    J = np.array([p[1] for p in pairs], dtype=np.int32)
    for x, y in zip(I, J):
        if not hom_compatible(S, int(x), int(y)):
            raise ValidationError(f"pair ({x},{y}) not in the same hom-set")
    while len(I):
        bridging = lab[I] != lab[J]
        if not bridging.any():
            break
        old = lab
        lab = _merge_pairs(lab, I[bridging], J[bridging])
        order = np.lexsort((old, lab))
        sn, so = lab[order], old[order]
        adj = (sn[1:] == sn[:-1]) & (so[1:] != so[:-1])
        Ib = order[:-1][adj].astype(np.int32)
        Jb = order[1:][adj].astype(np.int32)
        if len(Ib) == 0:
            break
        parts_I: list[np.ndarray] = []
        parts_J: list[np.ndarray] = []

        def translate(trans: np.ndarray, ci: np.ndarray, cj: np.ndarray,
                      left: bool) -> None:
            step = max(1, 2_000_000 // len(trans))
            for k in range(0, len(ci), step):
                a, b = ci[k:k + step], cj[k:k + step]
                if left:
                    u = t[np.ix_(trans, a)].ravel()
                    v = t[np.ix_(trans, b)].ravel()
                else:
                    u = t[np.ix_(a, trans)].ravel()
                    v = t[np.ix_(b, trans)].ravel()
                lo = np.minimum(u, v)
                hi = np.maximum(u, v)
                keep = lab[lo] != lab[hi]
                if keep.any():
                    parts_I.append(lo[keep])
                    parts_J.append(hi[keep])

        for obj in np.unique(S.bd[Ib]):
            lc = S.left_translators(int(obj))
            if len(lc):
                m = S.bd[Ib] == obj
                translate(lc, Ib[m], Jb[m], True)
        for obj in np.unique(S.br[Ib]):
            rc = S.right_translators(int(obj))
            if len(rc):
                m = S.br[Ib] == obj
                translate(rc, Ib[m], Jb[m], False)
        if not parts_I:
            break
        pi = np.concatenate(parts_I)
        pj = np.concatenate(parts_J)
        codes = np.unique(pi.astype(np.int64) * n + pj)
        I = (codes // n).astype(np.int32)
        J = (codes % n).astype(np.int32)
    return Congruence(S, lab, label)


def principal_congruence(S: PartialSemigroup, pairs) -> Congruence:
    """Least congruence merging the given pairs."""
    return congruence_generated(S, pairs)


# ---------------------------------------------------------------------------
# all congruences


class PrincipalCache:
    """Principal congruence of every hom-compatible pair, grouped by the
    strongly connected components of the pair-translation graph."""

    def __init__(self, S: PartialSemigroup):
        self.S = S
        n = S.n_elements
        I_parts, J_parts = [], []
        for _, members in sorted(S.hom_index.items()):
            k = len(members)
            if k < 2:
                continue
            iu, ju = np.triu_indices(k, 1)
            I_parts.append(members[iu])
            J_parts.append(members[ju])
        if I_parts:
            I = np.concatenate(I_parts).astype(np.int64)
            J = np.concatenate(J_parts).astype(np.int64)
        else:
            I = np.empty(0, dtype=np.int64)
            J = np.empty(0, dtype=np.int64)
        codes = I * n + J
        order = np.argsort(codes)
        self.I = I[order].astype(np.int32)
        self.J = J[order].astype(np.int32)
        self.codes = codes[order]
        self.comp, self._comp_edges = self._components()
        self._closure_id: np.ndarray | None = None
        self._labels: list[np.ndarray] = []
        self._results: dict[int, Congruence] = {}

    def _components(self) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray]]:
        """Strong components of the pair-translation graph, plus the deduped
        edge list of the condensation DAG (comp -> comp of a translate)."""
        S, n = self.S, self.S.n_elements
        P = len(self.codes)
        empty = (np.empty(0, dtype=np.int32), np.empty(0, dtype=np.int32))
        if P == 0:
            return np.empty(0, dtype=np.int32), empty
        t = S.table
        src_parts, dst_parts = [], []
        base = np.arange(P, dtype=np.int32)
        for side in ("left", "right"):
            for obj in S.objects():
                if side == "left":
                    sel = np.flatnonzero(S.bd[self.I] == obj)
                    trans = S.left_translators(obj)
                else:
                    sel = np.flatnonzero(S.br[self.I] == obj)
                    trans = S.right_translators(obj)
                if len(sel) == 0 or len(trans) == 0:
                    continue
                Ii, Jj = self.I[sel], self.J[sel]
                for c in trans:
                    if side == "left":
                        u, v = t[c, Ii], t[c, Jj]
                    else:
                        u, v = t[Ii, c], t[Jj, c]
                    lo = np.minimum(u, v).astype(np.int64)
                    hi = np.maximum(u, v).astype(np.int64)
                    keep = lo != hi
                    if not keep.any():
                        continue
                    dst = np.searchsorted(self.codes, lo[keep] * n + hi[keep])
                    src_parts.append(base[sel][keep])
                    dst_parts.append(dst.astype(np.int32))
        if not src_parts:
            return np.arange(P, dtype=np.int32), empty
        src = np.concatenate(src_parts)
        dst = np.concatenate(dst_parts)
        g = csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(P, P))
        _, labels = connected_components(g, directed=True, connection="strong")
        labels = labels.astype(np.int32)
        C = int(labels.max()) + 1
        cs = labels[src].astype(np.int64)
        cd = labels[dst].astype(np.int64)
        cross = cs != cd
        e = np.unique(cs[cross] * C + cd[cross])
        return labels, ((e // C).astype(np.int32), (e % C).astype(np.int32))

    def _compute_closures(self) -> None:
        """Closure label array per component, sinks of the condensation first.

        The closure of a component is the equivalence closure of its own
        pairs together with the (already closed) labellings of its successor
        components, so one pass in reverse topological order computes every
        principal congruence with no repeated translation work."""
        if self._closure_id is not None:
            return
        n = self.S.n_elements
        P = len(self.codes)
        C = int(self.comp.max()) + 1 if P else 0
        csrc, cdst = self._comp_edges
        order = np.argsort(csrc, kind="stable")
        csrc_s, cdst_s = csrc[order], cdst[order]
        sstart = np.searchsorted(csrc_s, np.arange(C + 1))
        indeg = np.bincount(cdst, minlength=C)
        stack = [int(c) for c in np.flatnonzero(indeg == 0)]
        topo: list[int] = []
        while stack:
            c = stack.pop()
            topo.append(c)
            for s in cdst_s[sstart[c]:sstart[c + 1]]:
                indeg[s] -= 1
                if indeg[s] == 0:
                    stack.append(int(s))
        pair_order = np.argsort(self.comp, kind="stable")
        pstart = np.searchsorted(self.comp[pair_order], np.arange(C + 1))
        identity = np.arange(n, dtype=np.int32)
        ids = np.full(C, -1, dtype=np.int64)
        distinct: dict[bytes, int] = {}
        labels: list[np.ndarray] = []
        for c in reversed(topo):
            idx = pair_order[pstart[c]:pstart[c + 1]]
            I_c, J_c = self.I[idx], self.J[idx]
            succ = np.unique(ids[cdst_s[sstart[c]:sstart[c + 1]]])
            if len(succ) == 0:
                lab = identity
            else:
                lab = labels[int(succ[0])]
                for sid in succ[1:]:
                    lab = join_labels(lab, labels[int(sid)])
                if np.array_equal(lab[I_c], lab[J_c]):
                    if len(succ) == 1:
                        ids[c] = int(succ[0])
                        continue
                    key = lab.tobytes()
                    got = distinct.get(key)
                    if got is None:
                        got = len(labels)
                        labels.append(lab)
                        distinct[key] = got
                    ids[c] = got
                    continue
            merged = _merge_pairs(lab, I_c, J_c)
            key = merged.tobytes()
            got = distinct.get(key)
            if got is None:
                got = len(labels)
                labels.append(merged)
                distinct[key] = got
            ids[c] = got
        self._closure_id = ids
        self._labels = labels

    def pair_pos(self, x: int, y: int) -> int:
        n = self.S.n_elements
        lo, hi = (x, y) if x < y else (y, x)
        pos = int(np.searchsorted(self.codes, lo * n + hi))
        if pos >= len(self.codes) or self.codes[pos] != lo * n + hi:
            raise ValidationError(f"({x},{y}) is not a hom-compatible pair")
        return pos

    def pair_closure_ids(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All hom-compatible pairs (I[k] < J[k]) with the closure id of
        each; ids index into closure_label."""
        self._compute_closures()
        return self.I, self.J, self._closure_id[self.comp]

    def closure_label(self, sid: int) -> np.ndarray:
        self._compute_closures()
        return self._labels[int(sid)]

    def cg(self, x: int, y: int) -> Congruence:
        """Principal congruence of the pair, memoized per closure."""
        self._compute_closures()
        sid = int(self._closure_id[self.comp[self.pair_pos(x, y)]])
        got = self._results.get(sid)
        if got is None:
            got = self._results[sid] = Congruence(self.S, self._labels[sid])
        return got

    def distinct_principals(self) -> list[Congruence]:
        self._compute_closures()
        used = np.unique(self._closure_id) if len(self._labels) else []
        return [Congruence(self.S, self._labels[int(sid)]) for sid in used]


def join_labels(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """Transitive closure of the union of two labellings by alternating
    min-label propagation.  Labels must be element indices constant on each
    class; the result is least-member canonical."""
    n = len(pa)
    lab = pa
    buf = np.empty(n, dtype=np.int32)
    while True:
        buf.fill(n)
        np.minimum.at(buf, pb, lab)
        lab2 = buf[pb]
        buf.fill(n)
        np.minimum.at(buf, pa, lab2)
        lab3 = buf[pa]
        if np.array_equal(lab3, lab):
            return lab3
        lab = lab3


def join(a: Congruence, b: Congruence) -> Congruence:
    """Transitive closure of the union."""
    return Congruence(a.S, join_labels(a.class_of, b.class_of))


def meet(a: Congruence, b: Congruence) -> Congruence:
    n = len(a.class_of)
    code = a.class_of.astype(np.int64) * n + b.class_of
    return Congruence(a.S, canonical_classes(code))


def refines(a: Congruence, b: Congruence) -> bool:
    """True when a is contained in b (a's classes refine b's)."""
    return np.array_equal(b.class_of[a.class_of], b.class_of)


@dataclass
class CongruenceSet:
    S: PartialSemigroup
    congruences: list[Congruence]

    def __post_init__(self):
        self.congruences = sorted(
            self.congruences, key=lambda c: (-c.n_classes, c.key))
        self.by_key = {c.key: c for c in self.congruences}

    def __len__(self):
        return len(self.congruences)

    def __iter__(self):
        return iter(self.congruences)

    def __contains__(self, c: Congruence):
        return c.key in self.by_key

    def keys(self) -> set[bytes]:
        return set(self.by_key)


def all_congruences(S: PartialSemigroup, *, force: bool = False,
                    cache: PrincipalCache | None = None) -> CongruenceSet:
    """Every congruence: distinct principals closed under join, plus Delta."""
    n = S.n_elements
    if n > ALL_CONGRUENCES_GUARD and not force:
        raise GuardError(
            f"all_congruences on {n} elements exceeds the guard "
            f"({ALL_CONGRUENCES_GUARD}); pass force=True")
    if cache is None:
        cache = PrincipalCache(S)
    gens = cache.distinct_principals()
    d = diagonal(S)
    known: dict[bytes, Congruence] = {d.key: d}
    for g in gens:
        known.setdefault(g.key, g)
    work = list(known.values())
    while work:
        sigma = work.pop()
        for g in gens:
            if refines(g, sigma):
                continue
            tau = join(sigma, g)
            if tau.key not in known:
                if len(known) >= MAX_LATTICE_NODES:
                    raise GuardError(
                        f"more than {MAX_LATTICE_NODES} congruences; giving up")
                known[tau.key] = tau
                work.append(tau)
    return CongruenceSet(S, list(known.values()))


# ---------------------------------------------------------------------------
# greatest congruence below an equivalence


def largest_congruence_below(S: PartialSemigroup, theta: np.ndarray,
                             label: str = "") -> Congruence:
    """Greatest congruence contained in the equivalence theta (given as a
    label array).  Standard partition refinement: split classes by the
    label vectors of all one-sided translates until stable."""
    t = S.table
    nab = full_hom(S).class_of.astype(np.int64)
    lab = canonical_classes(nab * (int(np.max(theta)) + 1) + np.asarray(theta))
    while True:
        codes = np.empty(S.n_elements, dtype=np.int64)
        offset = 0
        for _, members in sorted(S.hom_index.items()):
            o1, o2 = int(S.bd[members[0]]), int(S.br[members[0]])
            lc = S.left_translators(o1)
            rc = S.right_translators(o2)
            sig = [lab[members][None, :]]
            if len(lc):
                sig.append(lab[t[np.ix_(lc, members)]])
            if len(rc):
                sig.append(lab[t[np.ix_(members, rc)]].T)
            mat = np.vstack(sig).T  # rows are signature vectors per member
            _, inv = np.unique(mat, axis=0, return_inverse=True)
            codes[members] = inv + offset
            offset += int(inv.max()) + 1
        new = canonical_classes(codes)
        if len(np.unique(new)) == len(np.unique(lab)):
            return Congruence(S, new, label)
        lab = new


def max_h_congruence(S: PartialSemigroup, G) -> Congruence:
    """Greatest congruence contained in the H-relation; it separates
    idempotents (an H-class holds at most one), which we assert."""
    zeta = largest_congruence_below(S, G.h_class, "zeta")
    idem = G.idempotents
    assert len(np.unique(zeta.class_of[idem])) == len(idem), \
        "max H-congruence failed to separate idempotents"
    return zeta


# ---------------------------------------------------------------------------
# moving congruences between an ideal and its parent


def restrict_congruence(sigma: Congruence, R: PartialSemigroup) -> Congruence:
    """Restriction of a parent congruence to the ideal R (R built by
    restrict_to_ideal, so R.parent_index maps local to parent indices)."""
    if R.parent is not sigma.S:
        raise ValidationError("R is not an ideal restriction of sigma's parent")
    return Congruence(R, canonical_classes(sigma.class_of[R.parent_index]))


def extend_by_diagonal(sigma: Congruence, T: PartialSemigroup) -> Congruence:
    """sigma on an ideal of T, extended by the diagonal elsewhere."""
    R = sigma.S
    if R.parent is not T:
        raise ValidationError("sigma does not live on an ideal restriction of T")
    lab = np.arange(T.n_elements, dtype=np.int32)
    lab[R.parent_index] = R.parent_index[sigma.class_of]
    return Congruence(T, lab, sigma.label)


def is_liftable(sigma: Congruence, T: PartialSemigroup) -> bool:
    """Does sigma (on an ideal of T) extend by the diagonal to a congruence
    of T?"""
    ext = extend_by_diagonal(sigma, T)
    return is_congruence(T, ext.class_of)


def liftable_congruences(T: PartialSemigroup, R: PartialSemigroup,
                         congs: CongruenceSet) -> list[Congruence]:
    return [c for c in congs if is_liftable(c, T)]
