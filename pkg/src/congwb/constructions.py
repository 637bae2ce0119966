"""Named congruence constructions: Rees congruences, the group-kernel
relation nu_N on a stable regular D-class, their unions R_{I,N}, retractions
onto the minimal ideal and the theta/lambda/rho/mu/eta families they induce,
descent of group pieces to lower ranks, and tuple congruences inside the
H-relation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .congruences import (Congruence, canonical_classes, congruence_generated,
                          is_congruence, join_labels)
from .core import GreenData, IdealChain, PartialSemigroup
from .errors import ValidationError
from .groups import NaturalEmbedding, NormalSubgroup

# ---------------------------------------------------------------------------
# small helpers


@dataclass
class PartialEquivalence:
    """An equivalence on a subset of the elements (labels are least members,
    as global indices)."""

    members: np.ndarray
    labels: np.ndarray

    def merge_into(self, lab: np.ndarray) -> np.ndarray:
        other = np.arange(len(lab), dtype=np.int32)
        other[self.members] = self.labels
        return join_labels(lab, other)


def assemble(S: PartialSemigroup, parts: list[PartialEquivalence],
             label: str = "", verify: bool = True) -> Congruence:
    """Union of partial equivalences, extended by the diagonal, closed
    transitively; verified to be a congruence unless verify=False."""
    lab = np.arange(S.n_elements, dtype=np.int32)
    for part in parts:
        lab = part.merge_into(lab)
    if verify and not is_congruence(S, lab):
        raise ValidationError(f"assembled relation {label!r} is not a congruence")
    return Congruence(S, lab, label)


def hom_equivalence(S: PartialSemigroup, members: np.ndarray) -> PartialEquivalence:
    """Members grouped by hom-set (the Rees classes of an ideal)."""
    code = S.bd[members].astype(np.int64) * (S.br.max() + 1) + S.br[members]
    order = np.argsort(code, kind="stable")
    sl = code[order]
    first = np.ones(len(members), dtype=bool)
    first[1:] = sl[1:] != sl[:-1]
    reps = members[order][first]
    labels = reps[np.searchsorted(sl[first], code)]
    return PartialEquivalence(members, labels.astype(np.int32))


def as_partial_on_parent(sigma: Congruence) -> PartialEquivalence:
    """A congruence of an ideal restriction, viewed as a partial equivalence
    on the parent's elements."""
    R = sigma.S
    if R.parent is None:
        raise ValidationError("congruence does not live on an ideal restriction")
    members = R.parent_index.astype(np.int32)
    return PartialEquivalence(members, members[sigma.class_of])


# ---------------------------------------------------------------------------
# Rees congruences


def rees(S: PartialSemigroup, ideal: np.ndarray, label: str = "") -> Congruence:
    """Collapse each hom-set of the ideal, diagonal elsewhere."""
    ideal = np.asarray(ideal, dtype=np.int32)
    return assemble(S, [hom_equivalence(S, ideal)], label or "R_I")


# ---------------------------------------------------------------------------
# nu_N


def nu_sharp(S: PartialSemigroup, emb: NaturalEmbedding, N: NormalSubgroup,
             label: str = "") -> Congruence:
    """The congruence generated by {(e, g): g in N}."""
    e = emb.group.identity
    pairs = [(e, g) for g in N.members if g != e]
    if not pairs:
        return Congruence(S, np.arange(S.n_elements, dtype=np.int32), label)
    return congruence_generated(S, pairs, label=label)


def nu(S: PartialSemigroup, G: GreenData, emb: NaturalEmbedding,
       N: NormalSubgroup) -> PartialEquivalence:
    """The restriction of that congruence to the D-class of the group:
    pairs (a x b, a y b) with x, y in N and both products in the class."""
    sharp = nu_sharp(S, emb, N)
    d = G.d_class[emb.group.identity]
    members = np.flatnonzero(G.d_class == d).astype(np.int32)
    labels = canonical_classes(sharp.class_of[members])
    return PartialEquivalence(members, members[labels])


def nu_direct(S: PartialSemigroup, G: GreenData, emb: NaturalEmbedding,
              N: NormalSubgroup) -> PartialEquivalence:
    """Literal enumeration of {(a x b, a y b)}; only for small D-classes,
    used to cross-check nu()."""
    d = G.d_class[emb.group.identity]
    members = np.flatnonzero(G.d_class == d).astype(np.int32)
    n = S.n_elements
    in_d = np.zeros(n + 1, dtype=bool)
    in_d[members] = True
    t = S.table
    Ns = np.array(N.members, dtype=np.int32)
    bdN = int(S.bd[Ns[0]])
    brN = int(S.br[Ns[0]])
    # a ranges over D union {1}: left factors in D, plus the missing-factor case
    A = members[S.br[members] == bdN]
    B = members[S.bd[members] == brN]
    all_u = [np.empty(0, dtype=np.int32)]
    all_v = [np.empty(0, dtype=np.int32)]
    for x in Ns:
        for y in Ns:
            if x == y:
                continue
            ax = np.concatenate([t[A, x], [x]])
            ay = np.concatenate([t[A, y], [y]])
            ok = (ax >= 0) & (ay >= 0)
            ax, ay = ax[ok], ay[ok]
            axb = np.concatenate([t[np.ix_(ax, B)].ravel(), ax])
            ayb = np.concatenate([t[np.ix_(ay, B)].ravel(), ay])
            keep = in_d[np.where(axb >= 0, axb, n)] & in_d[np.where(ayb >= 0, ayb, n)]
            all_u.append(axb[keep].astype(np.int32))
            all_v.append(ayb[keep].astype(np.int32))
    lab = _pairs_to_labels(n, np.concatenate(all_u), np.concatenate(all_v))
    labels = canonical_classes(lab[members])
    return PartialEquivalence(members, members[labels])


def _pairs_to_labels(n: int, I: np.ndarray, J: np.ndarray) -> np.ndarray:
    lab = np.arange(n, dtype=np.int32)
    # small union-find over the listed pairs
    parent = lab.copy()

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return int(v)

    for a, b in zip(I, J):
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            parent[rb] = ra
    for v in range(n):
        parent[v] = find(v)
    return parent


# ---------------------------------------------------------------------------
# IN-pairs and R_{I,N}


@dataclass
class INPair:
    ideal: np.ndarray            # element indices of the ideal I
    emb: NaturalEmbedding        # embedding at the D-class carrying N
    N: NormalSubgroup

    def __post_init__(self):
        self.ideal = np.asarray(self.ideal, dtype=np.int32)


def make_in_pair(S: PartialSemigroup, G: GreenData, chain: IdealChain,
                 level: int, N: NormalSubgroup, emb: NaturalEmbedding) -> INPair:
    """IN-pair with I = levels strictly below `level`; checks that the
    group's class is stable, regular, and minimal outside I."""
    if level == 0:
        raise ValidationError("need a nonempty ideal below the group level")
    ideal = chain.ideal_elements(level - 1)
    cid = chain.levels[level][1]
    d_of_group = int(G.d_class[emb.group.identity])
    if d_of_group != cid:
        raise ValidationError("embedding level does not match chain level")
    from .core import is_regular_class, is_stable_class
    if not is_regular_class(S, G, cid):
        raise ValidationError("group level is not regular")
    if not is_stable_class(S, G, cid):
        raise ValidationError("group level is not stable")
    below = {chain.levels[k][1] for k in range(level)}
    for other in range(G.n_j):
        if other in below or other == cid:
            continue
        if G.j_leq[other, cid]:
            raise ValidationError("group level is not minimal outside the ideal")
    return INPair(ideal, emb, N)


def r_in(S: PartialSemigroup, G: GreenData, pair: INPair,
         label: str = "") -> Congruence:
    """R_{I,N}: Rees classes on I, nu_N on the group's D-class, diagonal
    above."""
    parts = [hom_equivalence(S, pair.ideal), nu(S, G, pair.emb, pair.N)]
    return assemble(S, parts, label or "R_IN")


# ---------------------------------------------------------------------------
# retractions


@dataclass
class Retraction:
    """A map f: I -> M (minimal ideal) with x ~ f(x), f multiplicative,
    f identity on M.  f is stored as a full-length array, -1 outside I."""

    S: PartialSemigroup
    ideal: np.ndarray
    target: np.ndarray
    f: np.ndarray


class RetractionAmbiguity(RuntimeError):
    """Two distinct valid retractions exist; report, never pick silently."""


def minimal_ideal(S: PartialSemigroup, G: GreenData) -> np.ndarray:
    bottom = np.flatnonzero(G.j_leq.sum(axis=0) == 1)
    return np.flatnonzero(np.isin(G.j_class, bottom)).astype(np.int32)


def _is_multiplicative(t: np.ndarray, I: np.ndarray, f: np.ndarray) -> bool:
    sub = t[np.ix_(I, I)]
    defined = sub >= 0
    lhs = np.where(defined, f[np.where(defined, sub, 0)], -1)
    fI = f[I]
    rhs = np.where(defined, t[np.ix_(fI, fI)], -1)
    return np.array_equal(lhs, rhs)


def build_retraction(S: PartialSemigroup, G: GreenData,
                     ideal: np.ndarray) -> Retraction | None:
    """Search for a retraction of the ideal onto the minimal ideal.

    For x outside M the image f(x) must satisfy m*f(x) = m*x and
    f(x)*m = x*m for every composable m in M (both are forced by
    multiplicativity, since m*x and x*m already lie in M).  We collect the
    candidates per element and verify the full multiplicative law for each
    assignment.  Returns None when no assignment works; raises when two do.
    """
    t = S.table
    M = minimal_ideal(S, G)
    in_M = np.zeros(S.n_elements, dtype=bool)
    in_M[M] = True
    ideal = np.asarray(ideal, dtype=np.int32)
    free = [int(x) for x in ideal if not in_M[x]]
    options: list[np.ndarray] = []
    total = 1
    for x in free:
        cands = M[(S.bd[M] == S.bd[x]) & (S.br[M] == S.br[x])]
        left_m = M[S.br[M] == S.bd[x]]
        right_m = M[S.bd[M] == S.br[x]]
        ok = np.ones(len(cands), dtype=bool)
        if len(left_m):
            ok &= np.all(t[np.ix_(left_m, cands)] == t[left_m, x][:, None], axis=0)
        if len(right_m):
            ok &= np.all(t[np.ix_(cands, right_m)] == t[x, right_m][None, :], axis=1)
        hits = cands[ok]
        if len(hits) == 0:
            return None
        options.append(hits)
        total *= len(hits)
        if total > 4096:
            raise RetractionAmbiguity(
                "too many candidate maps to enumerate; inspect manually")
    found: Retraction | None = None
    for choice in itertools.product(*options):
        f = np.full(S.n_elements, -1, dtype=np.int32)
        f[M] = M
        for x, y in zip(free, choice):
            f[x] = y
        if _is_multiplicative(t, ideal, f):
            if found is not None:
                raise RetractionAmbiguity("the ideal admits two retractions")
            found = Retraction(S, ideal, M, f)
    return found


def retractable_pair(S: PartialSemigroup, target: np.ndarray,
                     N: NormalSubgroup) -> bool:
    """The |Nx| <= 1 and |xN| <= 1 condition, checked literally over the
    retract target: every element of the target must be unable to tell the
    members of N apart under one-sided multiplication."""
    t = S.table
    Ns = np.array(N.members, dtype=np.int32)
    if len(Ns) < 2:
        return True
    bdN, brN = int(S.bd[Ns[0]]), int(S.br[Ns[0]])
    xs = target[S.bd[target] == brN]
    if len(xs) and not np.all(t[np.ix_(Ns, xs)] == t[Ns[0], xs][None, :]):
        return False
    xs = target[S.br[target] == bdN]
    return not len(xs) or bool(
        np.all(t[np.ix_(xs, Ns)] == t[xs, Ns[0]][:, None]))


# ---------------------------------------------------------------------------
# theta family


def theta_family(S: PartialSemigroup, retr: Retraction, ideal: np.ndarray,
                 tau: PartialEquivalence | Congruence, label: str = "",
                 verify: bool = True) -> Congruence:
    """theta_{I,tau}: x, y in the ideal are related iff their retracts are
    tau-related; diagonal elsewhere.  tau lives on the minimal ideal."""
    ideal = np.asarray(ideal, dtype=np.int32)
    if isinstance(tau, Congruence):
        tau_lab = tau.class_of
    else:
        tau_lab = np.arange(S.n_elements, dtype=np.int32)
        tau_lab[tau.members] = tau.labels
    fx = retr.f[ideal]
    if (fx < 0).any():
        raise ValidationError("retraction does not cover the ideal")
    labels = canonical_classes(tau_lab[fx])
    part = PartialEquivalence(ideal, ideal[labels])
    return assemble(S, [part], label or "theta", verify=verify)


def _green_mode_labels(S: PartialSemigroup, G: GreenData, mode: str,
                       reps: np.ndarray) -> np.ndarray:
    if mode == "eta":
        return reps.astype(np.int64)
    if mode == "mu":
        return G.h_class[reps].astype(np.int64)
    if mode == "lam":
        return G.l_class[reps].astype(np.int64)
    if mode == "rho":
        return G.r_class[reps].astype(np.int64)
    raise ValidationError(f"unknown mode {mode!r}")


def green_family(S: PartialSemigroup, G: GreenData, retr: Retraction,
                 ideal: np.ndarray, mode: str,
                 nu_part: PartialEquivalence | None = None,
                 label: str = "", verify: bool = True) -> Congruence:
    """lambda/rho/mu/eta over a retractable ideal: x ~ y, both in the ideal,
    with retracts L/R/H-related (or equal), optionally joined with a nu."""
    ideal = np.asarray(ideal, dtype=np.int32)
    fx = retr.f[ideal]
    if (fx < 0).any():
        raise ValidationError("retraction does not cover the ideal")
    hom = S.bd[ideal].astype(np.int64) * (S.br.max() + 1) + S.br[ideal]
    code = hom * (S.n_elements + 1) + _green_mode_labels(S, G, mode, fx)
    labels = canonical_classes(code)
    parts = [PartialEquivalence(ideal, ideal[labels])]
    if nu_part is not None:
        parts.append(nu_part)
    return assemble(S, parts, label or mode, verify=verify)


# ---------------------------------------------------------------------------
# descent and tuple congruences


def tau_n(T: PartialSemigroup, R_sub: PartialSemigroup,
          emb: NaturalEmbedding, N: NormalSubgroup) -> Congruence:
    """Restriction to the ideal R_sub of the congruence of T generated by
    nu_N at the top."""
    from .congruences import restrict_congruence
    sharp = nu_sharp(T, emb, N)
    return restrict_congruence(sharp, R_sub)


def n_down(S: PartialSemigroup, emb_from: NaturalEmbedding,
           emb_to: NaturalEmbedding, N: NormalSubgroup) -> NormalSubgroup:
    """Push N at one level down to another: all g in the lower group with
    (e_low, g) in the congruence generated by nu_N."""
    sharp = nu_sharp(S, emb_from, N)
    e = emb_to.group.identity
    members = tuple(int(g) for g in emb_to.group.members
                    if sharp.same(e, int(g)))
    return NormalSubgroup(emb_to.group, members)


def theta_tuple(S: PartialSemigroup, G: GreenData,
                pieces: list[tuple[NaturalEmbedding, NormalSubgroup]],
                label: str = "", verify: bool = True) -> Congruence:
    """Union of nu_{N_q} over levels (diagonal where trivial)."""
    parts = [nu(S, G, emb, N) for emb, N in pieces if N.order > 1]
    return assemble(S, parts, label or "Theta", verify=verify)


def zeta_subgroups(S: PartialSemigroup, G: GreenData, zeta: Congruence,
                   embs: list[NaturalEmbedding]) -> list[NormalSubgroup]:
    """Z_q per level: group elements zeta-related to the identity."""
    out = []
    for emb in embs:
        e = emb.group.identity
        members = tuple(int(g) for g in emb.group.members
                        if zeta.same(e, int(g)))
        out.append(NormalSubgroup(emb.group, members))
    return out


@dataclass
class NZTuple:
    embs: list[NaturalEmbedding]
    Ns: tuple[NormalSubgroup, ...]

    def congruence(self, S: PartialSemigroup, G: GreenData,
                   label: str = "") -> Congruence:
        return theta_tuple(S, G, list(zip(self.embs, self.Ns)), label)


def enumerate_nz_tuples(S: PartialSemigroup, G: GreenData,
                        embs: list[NaturalEmbedding],
                        zeta: Congruence) -> list[NZTuple]:
    """All tuples (N_q), N_q normal in G_q, N_q inside Z_q, compatible with
    descent: N_t pushed down to level p lands inside N_p for p < t."""
    from .groups import normal_subgroups
    Zs = zeta_subgroups(S, G, zeta, embs)
    candidates: list[list[NormalSubgroup]] = []
    for emb, Z in zip(embs, Zs):
        opts = [N for N in normal_subgroups(emb.group)
                if set(N.members) <= set(Z.members)]
        candidates.append(opts)
    # pre-compute descents
    down: dict[tuple[int, int, tuple], set] = {}
    for t in range(len(embs)):
        for N in candidates[t]:
            for p in range(t):
                d = n_down(S, embs[t], embs[p], N)
                down[(t, p, N.members)] = set(d.members)
    out = []
    for combo in itertools.product(*candidates):
        ok = True
        for t in range(len(embs)):
            for p in range(t):
                if not down[(t, p, combo[t].members)] <= set(combo[p].members):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(NZTuple(list(embs), tuple(combo)))
    return out


# ---------------------------------------------------------------------------
# phi


def phi(S: PartialSemigroup, emb: NaturalEmbedding, x: int, y: int):
    """Find a, b (possibly missing) with a*x*b = e; return the abstract key
    of a*y*b.  Defined for H-related pairs in the group's D-class; the result
    is well defined up to conjugacy, so membership in a normal subgroup is
    canonical."""
    t = S.table
    e = emb.group.identity
    lefts = np.concatenate([np.array([-1], dtype=np.int32),
                            S.left_translators(int(S.bd[x]))])
    for a in lefts:
        u = int(t[a, x]) if a >= 0 else x
        v = int(t[a, y]) if a >= 0 else y
        rights = S.right_translators(int(S.br[u]))
        hit = np.flatnonzero(t[u, rights] == e)
        if len(hit):
            b = int(rights[hit[0]])
            return emb.from_element.get(int(t[v, b]))
    raise ValidationError("pair is not in the group's D-class")


def phi_in(S: PartialSemigroup, emb: NaturalEmbedding, N: NormalSubgroup,
           x: int, y: int) -> bool:
    key = phi(S, emb, x, y)
    if key is None:
        return False
    return emb.to_element[key] in set(N.members)
