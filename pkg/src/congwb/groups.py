"""Group H-classes, their normal subgroups (computed by brute force), and the
canonical embeddings of abstract groups at each rank level.

The rank-q embedding sends an abstract permutation pi of [q] (or an invertible
q x q matrix) to the canonical element that acts like pi on the first q points
of the smallest admissible object and collapses or pads the rest:

* transformations: i -> pi(i) for i < q, everything from q on -> pi(q-1)
* partitions: transversals {i, pi(i)'} for i < q, all other points singletons
* matchings: transversals {i, pi(i)'} for i < q, then identical adjacent
  pairs {q,q+1},... on both rows (needs object size = q mod 2)
* matrices: block diagonal (A, 0)
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import elements as el
from .core import GreenData, PartialSemigroup
from .errors import GuardError, ValidationError

NORMAL_SUBGROUP_GUARD = 10_000


@dataclass
class GroupHClass:
    """A group H-class: member indices (sorted), local multiplication table,
    identity and inverses, all verified at construction."""

    S: PartialSemigroup
    members: np.ndarray          # global element indices, sorted
    identity: int                # global index of the idempotent
    mult: np.ndarray             # local k x k table
    inverse: np.ndarray          # local inverses
    pos: dict = field(default_factory=dict)  # global index -> local

    @property
    def order(self) -> int:
        return len(self.members)

    def local(self, g: int) -> int:
        return self.pos[int(g)]

    def element_orders(self) -> np.ndarray:
        k = self.order
        e = self.local(self.identity)
        out = np.zeros(k, dtype=np.int32)
        for g in range(k):
            x, o = g, 1
            while x != e:
                x = int(self.mult[x, g])
                o += 1
            out[g] = o
        return out


def group_h_class(S: PartialSemigroup, G: GreenData, e: int) -> GroupHClass:
    """The H-class of the idempotent e, as a group."""
    if S.table[e, e] != e:
        raise ValidationError(f"element {e} is not idempotent")
    members = np.flatnonzero(G.h_class == G.h_class[e]).astype(np.int32)
    pos = {int(g): i for i, g in enumerate(members)}
    k = len(members)
    sub = S.table[np.ix_(members, members)]
    glob2loc = np.full(S.n_elements + 1, -1, dtype=np.int32)
    glob2loc[members] = np.arange(k, dtype=np.int32)
    mult = glob2loc[np.where(sub >= 0, sub, S.n_elements)]
    if (mult < 0).any():
        raise ValidationError("H-class is not closed under composition")
    e_loc = pos[e]
    if not (np.all(mult[e_loc] == np.arange(k)) and np.all(mult[:, e_loc] == np.arange(k))):
        raise ValidationError("idempotent is not an identity of its H-class")
    inverse = np.argmax(mult == e_loc, axis=1).astype(np.int32)
    for g in range(k):
        if mult[g, inverse[g]] != e_loc or mult[inverse[g], g] != e_loc:
            raise ValidationError("H-class element without inverse")
    return GroupHClass(S, members, e, mult, inverse, pos)


@dataclass(frozen=True)
class NormalSubgroup:
    group: GroupHClass
    members: tuple  # sorted global indices
    label: str = ""

    @property
    def order(self) -> int:
        return len(self.members)

    def local_set(self) -> frozenset:
        return frozenset(self.group.local(g) for g in self.members)

    def __le__(self, other: "NormalSubgroup") -> bool:
        return set(self.members) <= set(other.members)


def _subgroup_closure(mult: np.ndarray, seed: set[int]) -> frozenset:
    """Sub(semi)group generated by seed; in a finite group that is already a
    subgroup."""
    k = mult.shape[0]
    inside = np.zeros(k, dtype=bool)
    idx = np.array(sorted(seed), dtype=np.int32)
    inside[idx] = True
    frontier = idx
    while len(frontier):
        cur = np.flatnonzero(inside)
        prods = np.unique(np.concatenate([
            mult[np.ix_(frontier, cur)].ravel(),
            mult[np.ix_(cur, frontier)].ravel()]))
        new = prods[~inside[prods]]
        inside[new] = True
        frontier = new
    return frozenset(int(v) for v in np.flatnonzero(inside))


def _conjugacy_classes(G: GroupHClass) -> list[np.ndarray]:
    k = G.order
    mult, inv = G.mult, G.inverse
    # conj[a, g] = a^-1 g a
    conj = np.empty((k, k), dtype=np.int32)
    ar = np.arange(k)
    for a in range(k):
        conj[a] = mult[mult[inv[a], ar], a]
    seen = np.zeros(k, dtype=bool)
    out = []
    for g in range(k):
        if seen[g]:
            continue
        orbit = {g}
        frontier = [g]
        while frontier:
            f = np.array(frontier, dtype=np.int32)
            new = np.unique(conj[:, f])
            frontier = [int(v) for v in new if int(v) not in orbit]
            orbit.update(frontier)
        arr = np.array(sorted(orbit), dtype=np.int32)
        seen[arr] = True
        out.append(arr)
    return out


def normal_subgroups(G: GroupHClass) -> list[NormalSubgroup]:
    """All normal subgroups: join-closure of normal closures of the
    conjugacy classes."""
    k = G.order
    if k > NORMAL_SUBGROUP_GUARD:
        raise GuardError(f"group of order {k} exceeds the guard "
                         f"({NORMAL_SUBGROUP_GUARD})")
    e = G.local(G.identity)
    found: set[frozenset] = {frozenset([e])}
    classes = _conjugacy_classes(G)
    ncls = []
    for cls in classes:
        ncl = _subgroup_closure(G.mult, set(int(v) for v in cls) | {e})
        if ncl not in found:
            found.add(ncl)
            ncls.append(ncl)
    work = list(found)
    while work:
        A = work.pop()
        for B in list(found):
            if A <= B or B <= A:
                continue
            C = _subgroup_closure(G.mult, set(A) | set(B))
            if C not in found:
                found.add(C)
                work.append(C)
    out = []
    for sub in found:
        members = tuple(sorted(int(G.members[v]) for v in sub))
        out.append(NormalSubgroup(G, members))
    out.sort(key=lambda N: (N.order, N.members))
    # sanity: conjugation-closed
    for N in out:
        arr = np.array(sorted(N.local_set()), dtype=np.int32)
        inside = np.zeros(k, dtype=bool)
        inside[arr] = True
        for a in range(k):
            if not inside[G.mult[G.mult[G.inverse[a], arr], a]].all():
                raise ValidationError("normal subgroup closure bug")
    return out


# ---------------------------------------------------------------------------
# natural embeddings


@dataclass
class NaturalEmbedding:
    """Map from an abstract group (permutations of [q], or invertible q x q
    matrices) onto the rank-q group H-class."""

    S: PartialSemigroup
    q: int
    anchor: int                      # object size used
    group: GroupHClass
    to_element: dict                 # abstract key -> global element index
    from_element: dict               # global element index -> abstract key

    def subgroup(self, keys) -> NormalSubgroup:
        members = tuple(sorted(self.to_element[k] for k in keys))
        return NormalSubgroup(self.group, members)

    def abstract_members(self, N: NormalSubgroup):
        return sorted(self.from_element[g] for g in N.members)


def _perm_natural(spec: el.FamilySpec, n: int, q: int, pi: tuple[int, ...]):
    tag = spec.tag
    if tag in el.TRANSFORMATION_TAGS:
        images = [pi[i] for i in range(q - 1)] + [pi[q - 1]] * (n - q + 1) \
            if q >= 1 else [0] * n
        return el.Transformation(n, tuple(images))
    if tag in el.MATCHING_TAGS:
        blocks = [[i, n + pi[i]] for i in range(q)]
        for s in range(q, n - 1, 2):
            blocks.append([s, s + 1])
            blocks.append([n + s, n + s + 1])
        return el.Partition.make(n, n, blocks)
    # partition style: pad with singletons
    blocks = [[i, n + pi[i]] for i in range(q)]
    blocks += [[j] for j in range(q, n)]
    blocks += [[n + j] for j in range(q, n)]
    return el.Partition.make(n, n, blocks)


def _matrix_natural(spec: el.FamilySpec, n: int, q: int, entries):
    rows = []
    for i in range(n):
        row = [0] * n
        if i < q:
            for j in range(q):
                row[j] = entries[i][j]
        rows.append(tuple(row))
    if spec.tag == "PL":
        return el.ProjectivePoint.make(spec.field_p, rows)
    return el.Matrix(spec.field_p, tuple(rows))


def _admissible_anchor(spec: el.FamilySpec, q: int) -> int:
    for n in spec.objects:
        if n < q:
            continue
        if spec.tag in el.MATCHING_TAGS and (n - q) % 2:
            continue
        return n
    raise ValidationError(f"no object admits rank {q} in {spec.objects}")


def _gl_matrices(p: int, q: int):
    if q == 0:
        yield ()
        return
    for rows in itertools.product(itertools.product(range(p), repeat=q), repeat=q):
        if el.matrix_rank(p, rows) == q:
            yield rows


def natural_embedding(S: PartialSemigroup, G: GreenData, q: int) -> NaturalEmbedding:
    spec = S.spec
    if spec is None:
        raise ValidationError("semigroup was not built from a family spec")
    n = _admissible_anchor(spec, q)
    to_element = {}
    if spec.tag in el.MATRIX_TAGS:
        p = spec.field_p
        if q == 0:
            zero = _matrix_natural(spec, n, 0, ())
            to_element[()] = S.index[zero]
        else:
            for rows in _gl_matrices(p, q):
                cand = _matrix_natural(spec, n, q, rows)
                idx = S.index.get(cand)
                if idx is not None:
                    key = rows
                    if spec.tag == "PL":
                        key = el.pl_canonicalize(p, rows)
                    to_element[key] = idx
    else:
        if q == 0:
            if spec.tag in el.TRANSFORMATION_TAGS or spec.tag in el.MATCHING_TAGS:
                raise ValidationError(f"rank 0 embedding undefined for {spec.tag}")
            cand = _perm_natural(spec, n, 0, ())
            to_element[()] = S.index[cand]
        else:
            for pi in itertools.permutations(range(q)):
                cand = _perm_natural(spec, n, q, pi)
                idx = S.index.get(cand)
                if idx is not None:
                    to_element[pi] = idx
    if not to_element:
        raise ValidationError(f"no rank-{q} canonical elements exist")
    ident = tuple(range(q)) if spec.tag not in el.MATRIX_TAGS else \
        tuple(tuple(int(i == j) for j in range(q)) for i in range(q))
    if q == 0:
        ident = ()
    if spec.tag == "PL" and q > 0:
        ident = el.pl_canonicalize(spec.field_p, ident)
    e_idx = to_element[ident]
    group = group_h_class(S, G, e_idx)
    if set(int(v) for v in group.members) != set(to_element.values()):
        raise ValidationError("canonical embedding does not fill the H-class")
    emb = NaturalEmbedding(S, q, n, group, to_element,
                           {v: k for k, v in to_element.items()})
    _verify_embedding(S, spec, emb)
    return emb


def _verify_embedding(S: PartialSemigroup, spec: el.FamilySpec,
                      emb: NaturalEmbedding) -> None:
    """Homomorphism check (full when small, sampled when large)."""
    keys = list(emb.to_element)
    if emb.q == 0 or not keys:
        return
    import random
    rng = random.Random(13)
    if len(keys) <= 60:
        pairs = [(a, b) for a in keys for b in keys]
    else:
        pairs = [(rng.choice(keys), rng.choice(keys)) for _ in range(4000)]
    p = spec.field_p
    for a, b in pairs:
        if spec.tag in el.MATRIX_TAGS:
            prod = tuple(tuple(sum(x * y for x, y in zip(row, col)) % p
                               for col in zip(*b)) for row in a)
            if spec.tag == "PL":
                prod = el.pl_canonicalize(p, prod)
        else:
            prod = tuple(b[v] for v in a)
        lhs = S.table[emb.to_element[a], emb.to_element[b]]
        if int(lhs) != emb.to_element[prod]:
            raise ValidationError("embedding is not a homomorphism")


# ---------------------------------------------------------------------------
# structure probe and labels (labels only; nothing downstream depends on them)


_SIGNATURES = {
    (1, 9, 8, 6): "S4",      # order 24: counts of orders 1,2,3,4
    (1, 3, 8): "A4",
    (1, 1, 6): "Q8",
    (1, 1, 8, 6, 8): "SL2(3)",
}


def describe_group(G: GroupHClass) -> str:
    k = G.order
    if k > 200:
        return f"G{k}"
    if k == 1:
        return "1"
    orders = G.element_orders()
    if (orders == k).any():
        return f"C{k}"
    hist = np.bincount(orders)
    sig = tuple(int(hist[o]) for o in sorted(np.unique(orders)))
    if sig in _SIGNATURES:
        return _SIGNATURES[sig]
    if k == 4:
        return "K4"
    # dihedral: cyclic subgroup of index 2 plus an inverting involution
    if k % 2 == 0:
        m = k // 2
        cyc = [g for g in range(k) if _order_of(G, g) == m]
        for r in cyc:
            for s in range(k):
                if _order_of(G, s) == 2 and \
                        int(G.mult[G.mult[s, r], s]) == int(G.inverse[r]):
                    gen = _subgroup_closure(G.mult, {r, s})
                    if len(gen) == k:
                        return f"D{m}"
    return f"G{k}"


def _order_of(G: GroupHClass, g: int) -> int:
    e = G.local(G.identity)
    x, o = g, 1
    while x != e:
        x = int(G.mult[x, g])
        o += 1
    return o


def subgroup_label(emb: NaturalEmbedding, N: NormalSubgroup) -> str:
    """Best-effort canonical name for a normal subgroup of the rank-q group."""
    q = emb.q
    keys = emb.abstract_members(N)
    k = len(keys)
    if k == 1:
        return "1"
    if emb.S.spec.tag == "L":
        p = emb.S.spec.field_p
        scalars = [tuple(tuple((c if i == j else 0) for j in range(q))
                         for i in range(q)) for c in range(1, p)]
        if all(key in scalars for key in keys):
            return f"Z{k}"
        dets = {_det(p, key) for key in keys}
        full = {key for key in _gl_matrices(p, q) if _det(p, key) in dets}
        if set(keys) == full:
            if dets == {1}:
                return f"SL{q}"
            if len(dets) == p - 1:
                return f"GL{q}"
            return f"DET{len(dets)}"
        return f"N{k}"
    if emb.S.spec.tag == "PL":
        total = emb.group.order
        if k == total:
            return f"PGL{q}"
        return f"N{k}"
    # permutation-backed
    perms = set(keys)
    if k == _factorial(q):
        return f"S{q}"
    if k == _factorial(q) // 2 and all(_perm_sign(pi) == 1 for pi in perms):
        return f"A{q}"
    rot = tuple((i + 1) % q for i in range(q))
    rot_group = set()
    cur = tuple(range(q))
    for _ in range(q):
        rot_group.add(cur)
        cur = tuple(rot[v] for v in cur)
    if q == 4:
        kle = {tuple(range(4)), (1, 0, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0)}
        if perms == kle:
            return "K"
        if perms == {tuple(range(4)), (2, 1, 0, 3), (0, 3, 2, 1), (2, 3, 0, 1)}:
            return "Kbar"
    if perms <= rot_group:
        return f"C{k}"
    if k == 2 * q and all(
            pi in rot_group or _is_reflection(pi) for pi in perms):
        return f"D{q}"
    if k == 2:
        return "C2"
    return f"N{k}"


def _factorial(q: int) -> int:
    out = 1
    for v in range(2, q + 1):
        out *= v
    return out


def _perm_sign(pi) -> int:
    seen = [False] * len(pi)
    sign = 1
    for i in range(len(pi)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = pi[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _is_reflection(pi) -> bool:
    q = len(pi)
    # reflections of the cycle: pi(i) = c - i mod q for some c
    c = (pi[0]) % q
    return all(pi[i] == (c - i) % q for i in range(q))


def _det(p: int, rows) -> int:
    n = len(rows)
    m = [list(r) for r in rows]
    det = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] % p), None)
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = (-det) % p
        det = (det * m[c][c]) % p
        inv = pow(m[c][c], p - 2, p)
        for i in range(c + 1, n):
            f = (m[i][c] * inv) % p
            if f:
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[c])]
    return det % p


# ---------------------------------------------------------------------------
# subgroups of the unit group of Z_p (used by the matrix families)


def units_subgroups(p: int) -> list[tuple[int, ...]]:
    """All subgroups of Z_p^* (cyclic), each as a sorted tuple of values."""
    units = list(range(1, p))
    g = next(u for u in units
             if len({pow(u, i, p) for i in range(1, p)}) == p - 1)
    out = []
    npow = p - 1
    for d in range(1, npow + 1):
        if npow % d:
            continue
        step = npow // d
        sub = sorted({pow(g, step * i, p) for i in range(d)})
        out.append(tuple(sub))
    out.sort(key=lambda s: (len(s), s))
    return out
