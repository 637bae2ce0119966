"""Finite lattices (order matrices with labels), lattices of congruences and
of equivalences, isomorphism testing, and the generation/separation property
checker for a partial semigroup sitting on top of its next ideal down.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .congruences import (CongruenceSet, PrincipalCache, canonical_classes,
                          full_hom, max_h_congruence)
from .core import (GreenData, PartialSemigroup, green_relations,
                   is_regular_class, is_stable_class, restrict_to_ideal)
from .errors import GuardError, ValidationError

MAX_MATRIX_NODES = 5000


@dataclass
class AbstractLattice:
    """Partial order as a boolean matrix, leq[a, b] iff a <= b."""

    leq: np.ndarray
    labels: list[str]

    @property
    def n(self) -> int:
        return self.leq.shape[0]

    def covers(self) -> list[tuple[int, int]]:
        lt = self.leq & ~np.eye(self.n, dtype=bool)
        # float32 matmul so large lattices go through BLAS
        f = lt.astype(np.float32)
        cov = lt & ~((f @ f) > 0.5)
        return [(int(a), int(b)) for a, b in zip(*np.nonzero(cov))]

    def bottom(self) -> int:
        rows = np.flatnonzero(self.leq.sum(axis=1) == self.n)
        if len(rows) != 1:
            raise ValidationError("no unique bottom element")
        return int(rows[0])

    def top(self) -> int:
        cols = np.flatnonzero(self.leq.sum(axis=0) == self.n)
        if len(cols) != 1:
            raise ValidationError("no unique top element")
        return int(cols[0])

    def is_lattice(self) -> bool:
        """Every pair has a least upper bound and a greatest lower bound."""
        n, leq = self.n, self.leq
        for a in range(n):
            for b in range(a + 1, n):
                idx = np.flatnonzero(leq[a] & leq[b])
                if len(idx) == 0 or not leq[np.ix_(idx, idx)].all(axis=1).any():
                    return False
                idx = np.flatnonzero(leq[:, a] & leq[:, b])
                if len(idx) == 0 or not leq[np.ix_(idx, idx)].all(axis=0).any():
                    return False
        return True


def chain_lattice(k: int) -> AbstractLattice:
    leq = np.triu(np.ones((k, k), dtype=bool))
    return AbstractLattice(leq, [str(i) for i in range(k)])


def direct_product(A: AbstractLattice, B: AbstractLattice) -> AbstractLattice:
    leq = np.kron(A.leq, B.leq)
    labels = [f"{la}*{lb}" for la in A.labels for lb in B.labels]
    return AbstractLattice(leq, labels)


def adjoin_top(A: AbstractLattice, label: str = "top") -> AbstractLattice:
    n = A.n
    leq = np.zeros((n + 1, n + 1), dtype=bool)
    leq[:n, :n] = A.leq
    leq[:, n] = True
    return AbstractLattice(leq, list(A.labels) + [label])


def is_chain(A: AbstractLattice) -> bool:
    return bool(np.all(A.leq | A.leq.T))


def eq_lattice(n: int) -> AbstractLattice:
    """The lattice of all equivalences on n points, ordered by refinement."""
    from .elements import _set_partitions
    if n > 6:
        raise GuardError(
            f"eq_lattice(n={n}) would have Bell({n}) nodes; capped at n = 6")
    labs = []
    names = []
    for blocks in _set_partitions(n):
        arr = np.zeros(n, dtype=np.int32)
        for b in blocks:
            arr[list(b)] = min(b)
        labs.append(arr)
        names.append("|".join("".join(str(v + 1) for v in sorted(b))
                              for b in blocks))
    m = len(labs)
    L = np.stack(labs)
    leq = np.zeros((m, m), dtype=bool)
    for j in range(m):
        b = L[j]
        leq[:, j] = np.all(b[L] == b[None, :], axis=1)
    return AbstractLattice(leq, names)


def normal_subgroup_lattice(subs, labels: list[str] | None = None
                            ) -> AbstractLattice:
    """Normal subgroups ordered by inclusion (they always form a lattice)."""
    if labels is None:
        labels = [N.label or f"o{N.order}" for N in subs]
    sets = [frozenset(N.members) for N in subs]
    m = len(sets)
    leq = np.zeros((m, m), dtype=bool)
    for i in range(m):
        for j in range(m):
            leq[i, j] = sets[i] <= sets[j]
    return AbstractLattice(leq, list(labels))


def stack_lattices(base: AbstractLattice, groups,
                   top_labels: list[str] | None = None) -> AbstractLattice:
    """Glue a sequence of group layers above a base lattice.

    Each layer is an AbstractLattice (typically a normal subgroup lattice);
    its bottom node is identified with the current top, the remaining nodes
    sit above everything built so far, and a fresh top closes the stage.
    Node count grows by (layer.n - 1) + 1 per layer.
    """
    groups = list(groups)
    if top_labels is None:
        top_labels = [f"top{i + 1}" for i in range(len(groups))]
    if len(top_labels) != len(groups):
        raise ValidationError("need one top label per glued layer")
    L = base
    expect = base.n + sum(g.n for g in groups)
    for g, tl in zip(groups, top_labels):
        L.top()  # insist the current stage has one
        keep = [i for i in range(g.n) if i != g.bottom()]
        n1, n2 = L.n, len(keep)
        leq = np.zeros((n1 + n2, n1 + n2), dtype=bool)
        leq[:n1, :n1] = L.leq
        leq[:n1, n1:] = True
        leq[n1:, n1:] = g.leq[np.ix_(keep, keep)]
        L = adjoin_top(AbstractLattice(leq, list(L.labels)
                                       + [g.labels[i] for i in keep]), tl)
    assert L.n == expect
    return L


def congruence_lattice(congs: CongruenceSet,
                       labels: list[str] | None = None) -> AbstractLattice:
    """Order matrix of a set of congruences under refinement."""
    m = len(congs)
    if m > MAX_MATRIX_NODES:
        raise GuardError(
            f"{m} nodes exceeds the order-matrix guard ({MAX_MATRIX_NODES}); "
            "compare such lattices through product coordinates instead")
    L = np.stack([c.class_of for c in congs.congruences])
    leq = np.zeros((m, m), dtype=bool)
    for j in range(m):
        b = L[j]
        leq[:, j] = np.all(b[L] == b[None, :], axis=1)
    if labels is None:
        labels = [c.label or f"c{i}" for i, c in enumerate(congs.congruences)]
    return AbstractLattice(leq, labels)


# ---------------------------------------------------------------------------
# isomorphism


def _refine_invariants(A: AbstractLattice) -> np.ndarray:
    lt = A.leq & ~np.eye(A.n, dtype=bool)
    inv = np.array([lt[v].sum() * (A.n + 1) + lt[:, v].sum() for v in range(A.n)],
                   dtype=np.int64)
    for _ in range(A.n):
        table: dict[tuple, int] = {}
        new = np.empty(A.n, dtype=np.int64)
        for v in range(A.n):
            up = tuple(sorted(inv[lt[v]].tolist()))
            down = tuple(sorted(inv[lt[:, v]].tolist()))
            key = (int(inv[v]), up, down)
            new[v] = table.setdefault(key, len(table))
        if len(np.unique(new)) == len(np.unique(inv)):
            return new
        inv = new
    return inv


def find_isomorphism(A: AbstractLattice, B: AbstractLattice) -> np.ndarray | None:
    """An order isomorphism as a node map, or None.  Invariant refinement
    first, then backtracking inside invariant classes."""
    if A.n != B.n:
        return None
    if A.n > MAX_MATRIX_NODES:
        raise GuardError("lattice too large for isomorphism search")
    ia, ib = _refine_invariants(A), _refine_invariants(B)
    va, ca = np.unique(ia, return_counts=True)
    vb, cb = np.unique(ib, return_counts=True)
    # invariant values are renamed per lattice; compare the class-size and
    # class-content profile instead
    if sorted(ca.tolist()) != sorted(cb.tolist()):
        return None
    # candidates per node of A: nodes of B in a class of the same size whose
    # members relate to already-matched nodes consistently
    size_a = {int(v): int(c) for v, c in zip(va, ca)}
    order = sorted(range(A.n), key=lambda v: (size_a[int(ia[v])], int(ia[v]), v))
    cand_pool: dict[int, list[int]] = {}
    f = np.full(A.n, -1, dtype=np.int64)
    used = np.zeros(B.n, dtype=bool)

    def consistent(v: int, w: int, placed: list[int]) -> bool:
        for u in placed:
            fu = f[u]
            if A.leq[u, v] != B.leq[fu, w] or A.leq[v, u] != B.leq[w, fu]:
                return False
        return True

    placed: list[int] = []

    def backtrack(k: int) -> bool:
        if k == len(order):
            return True
        v = order[k]
        pool = cand_pool.get(int(ia[v]))
        if pool is None:
            # pair invariant classes by matching size; ambiguous only when
            # several classes share a size, handled by trying each
            pool = [w for w in range(B.n)
                    if int(np.sum(ib == ib[w])) == size_a[int(ia[v])]]
            cand_pool[int(ia[v])] = pool
        for w in pool:
            if used[w] or not consistent(v, w, placed):
                continue
            f[v] = w
            used[w] = True
            placed.append(v)
            if backtrack(k + 1):
                return True
            placed.pop()
            used[w] = False
            f[v] = -1
        return False

    if backtrack(0):
        return f.copy()
    return None


def is_isomorphic(A: AbstractLattice, B: AbstractLattice) -> bool:
    return find_isomorphism(A, B) is not None


# ---------------------------------------------------------------------------
# generation/separation properties


@dataclass
class PropertyReport:
    """Outcome of the property suite for one partial semigroup T over its
    ideal S = T minus the top class.  None means not applicable."""

    n_elements: int
    dmax_T: bool
    dmax_S: bool | None = None
    ngen: bool | None = None
    sep1: bool | None = None
    sep2: bool | None = None
    sep3: bool | None = None
    sepz3: bool | None = None
    mult1: bool | None = None
    mult2: bool | None = None
    mult3: bool | None = None
    multz3: bool | None = None
    failures: dict = field(default_factory=dict)

    def _all(self, *vals):
        if any(v is None for v in vals):
            return None
        return all(vals)

    @property
    def sep(self):
        return self._all(self.dmax_T, self.dmax_S, self.sep1, self.sep2, self.sep3)

    @property
    def sepb(self):
        return self._all(self.dmax_T, self.dmax_S, self.sep1, self.sep2)

    @property
    def sepz(self):
        return self._all(self.dmax_T, self.dmax_S, self.sep1, self.sep2, self.sepz3)

    @property
    def mult(self):
        return self._all(self.dmax_T, self.dmax_S, self.mult1, self.mult2, self.mult3)

    @property
    def multb(self):
        return self._all(self.dmax_T, self.dmax_S, self.mult1, self.mult2)

    @property
    def multz(self):
        return self._all(self.dmax_T, self.dmax_S, self.mult1, self.mult2,
                         self.multz3)

    def check_grid(self) -> None:
        """The implication grid between the six properties must hold."""
        pairs = [(self.mult, self.multz), (self.multz, self.multb),
                 (self.sep, self.sepz), (self.sepz, self.sepb),
                 (self.mult, self.sep), (self.multz, self.sepz),
                 (self.multb, self.sepb)]
        for strong, weak in pairs:
            if strong is True and weak is False:
                raise ValidationError("property implication grid violated")


def _top_class(G: GreenData) -> int | None:
    cols = np.flatnonzero(G.j_leq.sum(axis=0) == G.n_j)
    if len(cols) != 1:
        return None
    return int(cols[0])


def _hom_pairs(S: PartialSemigroup, xs: np.ndarray, ys: np.ndarray):
    """Unordered hom-compatible pairs (x, y), x from xs, y from ys, x != y."""
    seen = set()
    out = []
    ys_by_hom: dict[tuple[int, int], list[int]] = {}
    for y in ys:
        ys_by_hom.setdefault((int(S.bd[y]), int(S.br[y])), []).append(int(y))
    for x in xs:
        for y in ys_by_hom.get((int(S.bd[x]), int(S.br[x])), ()):
            if int(x) == y:
                continue
            key = (min(int(x), y), max(int(x), y))
            if key not in seen:
                seen.add(key)
                out.append(key)
    return out


def check_properties(T: PartialSemigroup, G: GreenData | None = None,
                     cache: PrincipalCache | None = None) -> PropertyReport:
    if G is None:
        G = green_relations(T)
    report = PropertyReport(n_elements=T.n_elements, dmax_T=False)
    top = _top_class(G)
    if top is None or not (is_regular_class(T, G, top)
                           and is_stable_class(T, G, top)):
        return report
    report.dmax_T = True
    DT = np.flatnonzero(G.j_class == top).astype(np.int32)
    S_idx = np.flatnonzero(G.j_class != top).astype(np.int32)

    # ngen needs only T
    if cache is None:
        cache = PrincipalCache(T)
    nab_key = full_hom(T).key
    in_DT = np.zeros(T.n_elements, dtype=bool)
    in_DT[DT] = True
    others = np.arange(T.n_elements, dtype=np.int32)
    ngen_pairs = [
        (x, y) for (x, y) in _hom_pairs(T, DT, others)
        if G.h_class[x] != G.h_class[y]]
    report.ngen = True
    for x, y in ngen_pairs:
        if cache.cg(x, y).key != nab_key:
            report.ngen = False
            report.failures["ngen"] = (x, y)
            break

    if len(S_idx) == 0:
        return report
    Ssub = restrict_to_ideal(T, S_idx)
    GS = green_relations(Ssub)
    tops = _top_class(GS)
    if tops is None or not (is_regular_class(Ssub, GS, tops)
                            and is_stable_class(Ssub, GS, tops)):
        report.dmax_S = False
        return report
    report.dmax_S = True

    in_S = np.zeros(T.n_elements, dtype=bool)
    in_S[S_idx] = True
    in_DS = np.zeros(T.n_elements, dtype=bool)
    in_DS[S_idx[GS.j_class == tops]] = True
    h_S = np.full(T.n_elements, -1, dtype=np.int32)
    h_S[S_idx] = GS.h_class

    pop1 = _hom_pairs(T, DT, S_idx)
    pop2 = [(x, y) for (x, y) in _hom_pairs(T, DT, DT)
            if G.h_class[x] != G.h_class[y]]
    pop3 = [(x, y) for (x, y) in _hom_pairs(T, DT, DT)
            if G.h_class[x] == G.h_class[y]]

    def sep_witness_strong(lab: np.ndarray) -> bool:
        # a class holding an element of D_S and two h_S values inside S
        cls = lab[S_idx]
        order = np.argsort(cls, kind="stable")
        sl = cls[order]
        cuts = np.flatnonzero(sl[1:] != sl[:-1]) + 1
        for grp in np.split(S_idx[order], cuts):
            if len(grp) < 2:
                continue
            if in_DS[grp].any() and len(np.unique(h_S[grp])) >= 2:
                return True
        return False

    def sep_witness_drop(lab: np.ndarray) -> bool:
        # a class meeting both D_T and S
        return bool(np.intersect1d(np.unique(lab[DT]), np.unique(lab[S_idx])).size)

    def run_sep(pop, witness, name):
        done: dict[int, bool] = {}
        for x, y in pop:
            comp = int(cache.comp[cache.pair_pos(x, y)])
            got = done.get(comp)
            if got is None:
                got = witness(cache.cg(x, y).class_of)
                done[comp] = got
            if not got:
                report.failures[name] = (x, y)
                return False
        return True

    report.sep1 = run_sep(pop1, sep_witness_strong, "sep1")
    report.sep2 = run_sep(pop2, sep_witness_drop, "sep2")
    report.sep3 = run_sep(pop3, sep_witness_strong, "sep3")
    if pop3 and report.sep3 is False:
        zeta = max_h_congruence(T, G)
        pop3z = [(x, y) for (x, y) in pop3 if not zeta.same(x, y)]
        report.sepz3 = run_sep(pop3z, sep_witness_strong, "sepz3")
    else:
        report.sepz3 = report.sep3

    t = T.table

    def mult_witness(x: int, y: int, drop_only: bool) -> bool:
        lefts = T.left_translators(int(T.bd[x]))
        U = np.concatenate([[x], t[lefts, x]])
        V = np.concatenate([[y], t[lefts, y]])
        keep = U != V
        U, V = U[keep], V[keep]
        if len(U) == 0:
            return False
        rights = T.right_translators(int(T.br[x]))
        for u, v in zip(U, V):
            W1 = np.concatenate([[u], t[u, rights]])
            W2 = np.concatenate([[v], t[v, rights]])
            if drop_only:
                hit = (in_DT[W1] & in_S[W2]) | (in_DT[W2] & in_S[W1])
            else:
                hit = ((in_DS[W1] & in_S[W2] & (h_S[W1] != h_S[W2]))
                       | (in_DS[W2] & in_S[W1] & (h_S[W1] != h_S[W2])))
            if hit.any():
                return True
        return False

    def run_mult(pop, drop_only, name):
        for x, y in pop:
            if not mult_witness(x, y, drop_only):
                report.failures[name] = (x, y)
                return False
        return True

    report.mult1 = run_mult(pop1, False, "mult1")
    report.mult2 = run_mult(pop2, True, "mult2")
    report.mult3 = run_mult(pop3, False, "mult3")
    if pop3 and report.mult3 is False:
        zeta = max_h_congruence(T, G)
        pop3z = [(x, y) for (x, y) in pop3 if not zeta.same(x, y)]
        report.multz3 = run_mult(pop3z, False, "multz3")
    else:
        report.multz3 = report.mult3

    report.check_grid()
    return report
