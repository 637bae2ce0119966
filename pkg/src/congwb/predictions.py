"""Catalogue builders and the catalogue-vs-enumeration verifier.

A catalogue is the list of congruences an instance is supposed to have,
assembled purely from the named constructions (Rees quotients, group-layer
relations, retraction families) without ever looking at the brute-force
enumeration.  The builder is chosen by shape, not by family name:

  * a single stable regular H-trivial class: all products of equivalences
    on the one-sided class sets,
  * two chain levels with a retraction onto the minimal ideal: base
    congruences crossed with the normal subgroups of the top group, plus a
    retraction layer on top,
  * matrix instances with three or more levels: an ideal cut plus one
    normal subgroup at the next level and scalar groups above it,
  * everything else: the ladder, with Rees and group-layer congruences at
    every level and retraction families wherever a retraction exists and
    the one-sided collapse condition holds.

verify_theorem() compares a catalogue with all_congruences() as sets of
partitions and reports witnesses for either direction of failure.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .congruences import (Congruence, CongruenceSet, PrincipalCache,
                          all_congruences, canonical_classes, diagonal,
                          extend_by_diagonal, full_hom, is_congruence,
                          is_liftable, max_h_congruence, refines)
from .constructions import (PartialEquivalence, Retraction,
                            as_partial_on_parent, assemble, build_retraction,
                            enumerate_nz_tuples, green_family,
                            hom_equivalence, make_in_pair, nu,
                            retractable_pair, theta_family)
from .core import (GreenData, IdealChain, PartialSemigroup, green_relations,
                   ideal_chain, is_h_trivial_class, is_regular_class,
                   is_stable_class, restrict_to_ideal)
from .errors import GuardError, ValidationError
from .groups import (natural_embedding, normal_subgroups, subgroup_label,
                     units_subgroups)
from .lattices import (MAX_MATRIX_NODES, AbstractLattice, adjoin_top,
                       check_properties, congruence_lattice, direct_product,
                       eq_lattice, find_isomorphism, normal_subgroup_lattice)

PRB_PRODUCT_GUARD = 120_000
ISO_NODE_LIMIT = 300

SMALL_VARIANTS = ("retractable-h2", "nonretract-h2", "nonretract-h3")


@dataclass
class Catalogue:
    """A predicted congruence set.

    coords/coord_leq are present when the catalogue is a known direct
    product: coords maps a congruence key to its coordinate tuple and
    coord_leq is the product order.  abstract is an order-matrix copy of
    the promised lattice shape when it is small enough to materialise.
    """

    S: PartialSemigroup
    kind: str
    congruences: list[Congruence]
    coords: dict[bytes, tuple] | None = None
    coord_leq: Callable[[tuple, tuple], bool] | None = None
    abstract: AbstractLattice | None = None

    def __post_init__(self):
        self._by_key = {c.key: c for c in self.congruences}

    def __len__(self):
        return len(self.congruences)

    def __iter__(self):
        return iter(self.congruences)

    def keys(self) -> set[bytes]:
        return set(self._by_key)

    def label_of(self, key: bytes) -> str:
        return self._by_key[key].label

    def by_label(self, label: str) -> Congruence:
        for c in self.congruences:
            if c.label == label:
                return c
        raise KeyError(label)


def _dedupe(congs: list[Congruence]) -> list[Congruence]:
    seen: dict[bytes, Congruence] = {}
    for c in congs:
        seen.setdefault(c.key, c)
    return list(seen.values())


# ---------------------------------------------------------------------------
# one class: products of equivalences


def _eq_labellings(k: int) -> list[tuple[int, ...]]:
    from .elements import _set_partitions
    out = []
    for blocks in _set_partitions(k):
        lab = [0] * k
        for b in blocks:
            m = min(b)
            for v in b:
                lab[v] = m
        out.append(tuple(lab))
    return out


def _blocks_name(lab) -> str:
    blocks: dict[int, list[int]] = {}
    for i, v in enumerate(lab):
        blocks.setdefault(int(v), []).append(i + 1)
    return "|".join("".join(str(x) for x in b) for b in blocks.values())


def _prb_leq(c1: tuple, c2: tuple) -> bool:
    for a, b in zip(c1, c2):
        if any(b[a[i]] != b[i] for i in range(len(a))):
            return False
    return True


def _prb_sides(S: PartialSemigroup, G: GreenData):
    sides = []
    for kind, cls, by in (("R", G.r_class, S.bd), ("L", G.l_class, S.br)):
        for obj in S.objects():
            ids = np.unique(cls[by == obj])
            if len(ids):
                sides.append((kind, int(obj), ids.astype(np.int32)))
    return sides


def predict_prb(S: PartialSemigroup, G: GreenData | None = None) -> Catalogue:
    """Catalogue for a single stable regular H-trivial class: one choice of
    equivalence on the R-classes of each domain object and on the L-classes
    of each codomain object, all combinations."""
    if G is None:
        G = green_relations(S)
    if G.n_j != 1:
        raise ValidationError(
            f"flat catalogue needs a single class, found {G.n_j}")
    for name, test in (("stable", is_stable_class),
                       ("regular", is_regular_class),
                       ("H-trivial", is_h_trivial_class)):
        if not test(S, G, 0):
            raise ValidationError(
                f"flat catalogue hypothesis failed: class is not {name}")
    sides = _prb_sides(S, G)
    per_side = []
    for kind, obj, ids in sides:
        if len(ids) > 6:
            raise GuardError(
                f"side {kind}{obj} has {len(ids)} classes; equivalence "
                "enumeration is capped at 6")
        per_side.append(_eq_labellings(len(ids)))
    total = 1
    for opts in per_side:
        total *= len(opts)
    if total > PRB_PRODUCT_GUARD:
        raise GuardError(
            f"{total} product congruences exceed the guard ({PRB_PRODUCT_GUARD})")

    nr = int(G.r_class.max()) + 1
    nl = int(G.l_class.max()) + 1
    big = sum(len(ids) for kind, _, ids in sides if kind == "L") + 1
    verify_all = total <= 64
    sample = set()
    if not verify_all:
        rng = np.random.default_rng(0)
        sample = {int(v) for v in rng.integers(0, total, size=24)}
    congs: list[Congruence] = []
    coords: dict[bytes, tuple] = {}
    for idx, combo in enumerate(itertools.product(*per_side)):
        rv = np.zeros(nr, dtype=np.int64)
        lv = np.zeros(nl, dtype=np.int64)
        ro = lo = 0
        names = []
        coord = []
        for (kind, obj, ids), lab in zip(sides, combo):
            arr = np.asarray(lab, dtype=np.int64)
            if kind == "R":
                rv[ids] = arr + ro
                ro += len(ids)
            else:
                lv[ids] = arr + lo
                lo += len(ids)
            names.append(f"{kind}{obj}:{_blocks_name(lab)}")
            coord.append(tuple(lab))
        code = rv[G.r_class] * big + lv[G.l_class]
        c = Congruence(S, canonical_classes(code),
                       "prb[" + " ".join(names) + "]")
        if (verify_all or idx in sample) and not is_congruence(S, c.class_of):
            raise ValidationError("flat catalogue produced a non-congruence")
        congs.append(c)
        coords[c.key] = tuple(coord)
    if len({c.key for c in congs}) != total:
        raise ValidationError("flat catalogue collision")
    abstract = None
    if total <= MAX_MATRIX_NODES:
        lat = None
        for kind, obj, ids in sides:
            e = eq_lattice(len(ids))
            lat = e if lat is None else direct_product(lat, e)
        abstract = lat
    return Catalogue(S, "flat", congs, coords, _prb_leq, abstract)


# ---------------------------------------------------------------------------
# two and three chain levels


def _h2_leq(c1: tuple, c2: tuple) -> bool:
    (t1, d1), (t2, d2) = c1, c2
    if not _prb_leq(t1, t2):
        return False
    if d2 is None:
        return True
    if d1 is None:
        return False
    return set(d1) <= set(d2)


def predict_small(S: PartialSemigroup, variant: str,
                  G: GreenData | None = None) -> Catalogue:
    """Catalogue for a two- or three-level chain.  Every hypothesis is
    checked mechanically and the error says which one failed.

    retractable-h2: two levels, the whole instance retracts onto the
        minimal ideal; congruences are base-times-subgroup plus a
        retraction layer.
    nonretract-h2: two levels, H-trivial bottom; congruences are the
        one-sided families over the bottom class, the Rees-with-subgroup
        cuts, and the full relation.
    nonretract-h3: three levels, H-trivial bottom, separation, and a
        retractable middle ideal; one-sided families at both depths, cut
        off above the largest top subgroup whose translations the
        retraction target cannot tell apart.
    """
    if variant not in SMALL_VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}")
    if G is None:
        G = green_relations(S)
    chain = ideal_chain(S, G)
    want = 3 if variant == "nonretract-h3" else 2
    if len(chain.levels) != want:
        raise ValidationError(
            f"{variant} hypothesis failed: needs {want} chain levels, "
            f"found {len(chain.levels)}")
    top_cid = chain.levels[-1][1]
    for name, test in (("stable", is_stable_class),
                       ("regular", is_regular_class)):
        if not test(S, G, top_cid):
            raise ValidationError(
                f"{variant} hypothesis failed: top class is not {name}")
    emb = natural_embedding(S, G, chain.levels[-1][0])
    subs = normal_subgroups(emb.group)
    if variant == "retractable-h2":
        return _retractable_h2(S, G, chain, emb, subs)
    if variant == "nonretract-h2":
        return _small_h2(S, G, chain, emb, subs)
    return _small_h3(S, G, chain, emb, subs)


def _level_members(S: PartialSemigroup, G: GreenData, chain: IdealChain,
                   lev: int) -> np.ndarray:
    return np.flatnonzero(G.j_class == chain.levels[lev][1]).astype(np.int32)


def _identity_retraction(S: PartialSemigroup, members: np.ndarray) -> Retraction:
    f = np.full(S.n_elements, -1, dtype=np.int32)
    f[members] = members
    return Retraction(S, members, members, f)


def _check_pair_descent(S, G, cache: PrincipalCache, upper: np.ndarray,
                        lower: np.ndarray, variant: str) -> None:
    """Every pair of non-H-related elements of the upper class must relate
    an upper element to a lower one in its principal congruence."""
    I, J, sid = cache.pair_closure_ids()
    up = np.zeros(S.n_elements, dtype=bool)
    up[upper] = True
    need = up[I] & up[J] & (G.h_class[I] != G.h_class[J])
    for s in np.unique(sid[need]):
        lab = cache.closure_label(int(s))
        meets = np.intersect1d(np.unique(lab[upper]), np.unique(lab[lower]),
                               assume_unique=True)
        if meets.size == 0:
            w = int(np.flatnonzero(need & (sid == s))[0])
            raise ValidationError(
                f"{variant} hypothesis failed: the pair "
                f"({int(I[w])},{int(J[w])}) does not relate the two levels")


def _check_one_sided_collapse(S, G, cache: PrincipalCache, lam: Congruence,
                              rho: Congruence, variant: str,
                              f: np.ndarray | None = None) -> None:
    """Pairs that are not L-related must generate rho over the bottom class,
    and dually; when a retraction is supplied, pairs whose retracts are
    L-related (resp. R-related) are exempt."""
    I, J, sid = cache.pair_closure_ids()
    closures: dict[int, Congruence] = {}
    for green, fam, word in ((G.l_class, rho, "L"), (G.r_class, lam, "R")):
        mask = green[I] != green[J]
        if f is not None:
            fI, fJ = f[I], f[J]
            both = (fI >= 0) & (fJ >= 0)
            same_retract = both & (green[np.where(both, fI, 0)]
                                   == green[np.where(both, fJ, 0)])
            mask &= ~same_retract
        for s in np.unique(sid[mask]):
            c = closures.get(int(s))
            if c is None:
                c = closures[int(s)] = Congruence(S, cache.closure_label(int(s)))
            if not refines(fam, c):
                w = int(np.flatnonzero(mask & (sid == s))[0])
                raise ValidationError(
                    f"{variant} hypothesis failed: the non-{word}-related "
                    f"pair ({int(I[w])},{int(J[w])}) does not collapse the "
                    "bottom class on the expected side")


def _check_group_witnesses(S, members, e: int, D0: np.ndarray, left: bool,
                           right: bool, variant: str) -> None:
    """Each listed group element must act differently from the identity on
    some bottom element, on the required side(s)."""
    t = S.table
    A = D0[S.br[D0] == S.bd[e]]
    B = D0[S.bd[D0] == S.br[e]]
    for x in members:
        x = int(x)
        if x == e:
            continue
        if left and not (len(A) and np.any(t[A, e] != t[A, x])):
            raise ValidationError(
                f"{variant} hypothesis failed: group element {x} acts like "
                "the identity on the bottom class from the right")
        if right and not (len(B) and np.any(t[e, B] != t[x, B])):
            raise ValidationError(
                f"{variant} hypothesis failed: group element {x} acts like "
                "the identity on the bottom class from the left")


def _retractable_h2(S, G, chain, emb, subs) -> Catalogue:
    whole = np.arange(S.n_elements, dtype=np.int32)
    retr = build_retraction(S, G, whole)
    if retr is None:
        raise ValidationError(
            "retractable-h2 hypothesis failed: no retraction onto the "
            "minimal ideal")
    for N in subs:
        if not retractable_pair(S, retr.target, N):
            raise ValidationError(
                "retractable-h2 hypothesis failed: subgroup "
                f"{subgroup_label(emb, N)} does not collapse one-sided "
                "products over the minimal ideal")
    _check_pair_descent(S, G, PrincipalCache(S),
                        _level_members(S, G, chain, 1),
                        _level_members(S, G, chain, 0), "retractable-h2")
    R0 = restrict_to_ideal(S, chain.ideal_elements(0))
    base = predict_prb(R0)
    nus = {N.members: nu(S, G, emb, N) for N in subs if N.order > 1}
    verify = len(base) * (len(subs) + 1) <= 600
    congs: list[Congruence] = []
    coords: dict[bytes, tuple] = {}
    for tau in base.congruences:
        part = as_partial_on_parent(tau)
        tcoord = base.coords[tau.key]
        for N in subs:
            parts = [part]
            lab = tau.label
            if N.order > 1:
                parts.append(nus[N.members])
                lab = f"{tau.label}+nu_{subgroup_label(emb, N)}"
            c = assemble(S, parts, lab, verify=verify)
            congs.append(c)
            coords[c.key] = (tcoord, N.members)
        c = theta_family(S, retr, whole, part,
                         label=f"theta[{tau.label}]", verify=verify)
        congs.append(c)
        coords[c.key] = (tcoord, None)
    if len({c.key for c in congs}) != len(base) * (len(subs) + 1):
        raise ValidationError("two-level catalogue collision")
    abstract = None
    if base.abstract is not None:
        nsl = adjoin_top(normal_subgroup_lattice(
            subs, [subgroup_label(emb, N) for N in subs]), "theta")
        if base.abstract.n * nsl.n <= MAX_MATRIX_NODES:
            abstract = direct_product(base.abstract, nsl)
    return Catalogue(S, "two-level", congs, coords, _h2_leq, abstract)


def _small_h2(S, G, chain, emb, subs) -> Catalogue:
    """Two levels, no retraction needed: the one-sided diamond over the
    bottom class, Rees-with-subgroup cuts, and the full relation."""
    variant = "nonretract-h2"
    d0 = chain.levels[0][1]
    if not is_h_trivial_class(S, G, d0):
        raise ValidationError(
            f"{variant} hypothesis failed: bottom class is not H-trivial")
    if not is_regular_class(S, G, d0):
        raise ValidationError(
            f"{variant} hypothesis failed: bottom class is not regular")
    D0 = _level_members(S, G, chain, 0)
    D1 = _level_members(S, G, chain, 1)
    r0 = chain.levels[0][0]
    retr0 = _identity_retraction(S, D0)
    lam = green_family(S, G, retr0, D0, "lam", None, f"lam_I{r0}")
    rho = green_family(S, G, retr0, D0, "rho", None, f"rho_I{r0}")
    cache = PrincipalCache(S)
    _check_pair_descent(S, G, cache, D1, D0, variant)
    _check_one_sided_collapse(S, G, cache, lam, rho, variant)
    n = S.n_elements
    e = int(emb.group.identity)
    _check_group_witnesses(S, emb.group.members, e, D0,
                           left=rho.n_classes < n, right=lam.n_classes < n,
                           variant=variant)
    hom_part = hom_equivalence(S, D0)
    congs = [diagonal(S)]
    for N in subs:
        parts = [hom_part]
        lab = f"R_I{r0}"
        if N.order > 1:
            parts.append(nu(S, G, emb, N))
            lab += f"_{subgroup_label(emb, N)}"
        congs.append(assemble(S, parts, lab))
    congs += [lam, rho, full_hom(S)]
    return Catalogue(S, variant, _dedupe(congs))


def _small_h3(S, G, chain, emb, subs) -> Catalogue:
    """Three levels with a retractable middle ideal and separation: the
    one-sided families at both depths, with the top families cut off above
    the largest subgroup the retraction target cannot tell apart."""
    variant = "nonretract-h3"
    d0 = chain.levels[0][1]
    if not is_h_trivial_class(S, G, d0):
        raise ValidationError(
            f"{variant} hypothesis failed: bottom class is not H-trivial")
    if not is_regular_class(S, G, d0):
        raise ValidationError(
            f"{variant} hypothesis failed: bottom class is not regular")
    D0 = _level_members(S, G, chain, 0)
    D1 = _level_members(S, G, chain, 1)
    r0, r1 = chain.levels[0][0], chain.levels[1][0]
    mid = chain.ideal_elements(1)
    retr = build_retraction(S, G, mid)
    if retr is None:
        raise ValidationError(
            f"{variant} hypothesis failed: the middle ideal does not "
            "retract onto the bottom class")
    rep = check_properties(S, G)
    if rep.sep is not True:
        raise ValidationError(
            f"{variant} hypothesis failed: separation does not hold "
            f"(first witness {rep.failures})")
    retr0 = _identity_retraction(S, D0)
    lam0 = green_family(S, G, retr0, D0, "lam", None, f"lam_I{r0}")
    rho0 = green_family(S, G, retr0, D0, "rho", None, f"rho_I{r0}")
    cache = PrincipalCache(S)
    _check_pair_descent(S, G, cache, D1, D0, variant)
    _check_one_sided_collapse(S, G, cache, lam0, rho0, variant, f=retr.f)
    retractable = [N for N in subs if retractable_pair(S, retr.target, N)]
    H = max(retractable, key=lambda N: N.order)
    Hm = set(H.members)
    if any(not set(N.members) <= Hm for N in retractable):
        raise ValidationError(
            f"{variant} hypothesis failed: no largest subgroup passes the "
            "one-sided collapse over the retraction target")
    e = int(emb.group.identity)
    others = [g for g in emb.group.members if int(g) not in Hm]
    _check_group_witnesses(S, others, e, D0, left=True, right=True,
                           variant=variant)
    emb1 = natural_embedding(S, G, r1)
    congs = [diagonal(S)]
    for lev_emb, lev_retr, lev_ideal, rank, allowed in (
            (emb1, retr0, D0, r0, None),
            (emb, retr, mid, r1, Hm)):
        hom_part = hom_equivalence(S, lev_ideal)
        for N in normal_subgroups(lev_emb.group):
            nu_part = nu(S, G, lev_emb, N) if N.order > 1 else None
            suffix = "" if N.order == 1 else f"_{subgroup_label(lev_emb, N)}"
            parts = [hom_part] + ([nu_part] if nu_part is not None else [])
            congs.append(assemble(S, parts, f"R_I{rank}{suffix}"))
            if allowed is not None and not set(N.members) <= allowed:
                continue
            for mode in ("mu", "lam", "rho"):
                congs.append(green_family(S, G, lev_retr, lev_ideal, mode,
                                          nu_part, f"{mode}_I{rank}{suffix}"))
    congs.append(full_hom(S))
    return Catalogue(S, variant, _dedupe(congs))


# ---------------------------------------------------------------------------
# the ladder


def _ladder(S: PartialSemigroup, G: GreenData, chain: IdealChain) -> Catalogue:
    top = len(chain.levels) - 1
    congs = [diagonal(S)]
    for lev in range(top):
        rank_here = chain.levels[lev][0]
        emb = natural_embedding(S, G, chain.levels[lev + 1][0])
        subs = normal_subgroups(emb.group)
        ideal = chain.ideal_elements(lev)
        hom_part = hom_equivalence(S, ideal)
        nus: dict[tuple, PartialEquivalence] = {}
        for N in subs:
            make_in_pair(S, G, chain, lev + 1, N, emb)
            parts = [hom_part]
            lab = f"R_I{rank_here}"
            if N.order > 1:
                nus[N.members] = nu(S, G, emb, N)
                parts.append(nus[N.members])
                lab += f"_{subgroup_label(emb, N)}"
            congs.append(assemble(S, parts, lab))
        retr = build_retraction(S, G, ideal)
        if retr is None:
            continue
        for N in subs:
            if not retractable_pair(S, retr.target, N):
                continue
            nu_part = nus.get(N.members)
            suffix = "" if N.order == 1 else f"_{subgroup_label(emb, N)}"
            for mode in ("eta", "mu", "lam", "rho"):
                congs.append(green_family(
                    S, G, retr, ideal, mode, nu_part,
                    f"{mode}_I{rank_here}{suffix}"))
    congs.append(full_hom(S))
    return Catalogue(S, "ladder", _dedupe(congs))


# ---------------------------------------------------------------------------
# matrix instances, three or more levels


def _linear(S: PartialSemigroup, G: GreenData, chain: IdealChain) -> Catalogue:
    p = S.spec.field_p
    top = len(chain.levels) - 1
    if chain.ranks != list(range(top + 1)):
        raise ValidationError("matrix chain must have one level per rank")
    embs = {q: natural_embedding(S, G, q) for q in range(1, top + 1)}
    units = units_subgroups(p)

    def scalar_subgroup(q: int, H: tuple[int, ...]):
        keys = tuple(tuple(tuple((c if i == j else 0) for j in range(q))
                           for i in range(q)) for c in H)
        return embs[q].subgroup(keys)

    nu_cache: dict[tuple, PartialEquivalence] = {}

    def nu_part(q, N):
        key = (q, N.members)
        if key not in nu_cache:
            nu_cache[key] = nu(S, G, embs[q], N)
        return nu_cache[key]

    congs = [diagonal(S)]
    for q in range(top):
        ideal = chain.ideal_elements(q)
        hom_part = hom_equivalence(S, ideal)
        chains: list[tuple] = [()]
        for t in range(q + 2, top + 1):
            chains = [ch + (H,) for ch in chains for H in units
                      if (set(H) <= set(ch[-1]) if ch else True)]
        for N in normal_subgroups(embs[q + 1].group):
            make_in_pair(S, G, chain, q + 1, N, embs[q + 1])
            base_name = subgroup_label(embs[q + 1], N)
            for ch in chains:
                if ch:
                    scal = scalar_subgroup(q + 1, ch[0])
                    if not set(scal.members) <= set(N.members):
                        continue
                parts = [hom_part]
                names = [base_name]
                if N.order > 1:
                    parts.append(nu_part(q + 1, N))
                for t, H in zip(range(q + 2, top + 1), ch):
                    ZN = scalar_subgroup(t, H)
                    names.append(subgroup_label(embs[t], ZN))
                    if len(H) > 1:
                        parts.append(nu_part(t, ZN))
                if all(nm == "1" for nm in names):
                    lab = f"R_I{q}"
                elif len(names) == 1:
                    lab = f"R_I{q}_{names[0]}"
                else:
                    lab = f"R_I{q}(" + ",".join(names) + ")"
                congs.append(assemble(S, parts, lab))
    congs.append(full_hom(S))
    return Catalogue(S, "matrix-tuples", _dedupe(congs))


# ---------------------------------------------------------------------------
# dispatch


def predict_theorem(S: PartialSemigroup,
                    G: GreenData | None = None) -> Catalogue:
    """Pick the catalogue builder matching the instance's shape."""
    if G is None:
        G = green_relations(S)
    chain = ideal_chain(S, G)
    top = len(chain.levels) - 1
    if top == 0:
        return predict_prb(S, G)
    if S.spec is not None and S.spec.tag == "L" and top >= 2:
        return _linear(S, G, chain)
    if top == 1:
        try:
            return predict_small(S, "retractable-h2", G)
        except ValidationError:
            pass
    return _ladder(S, G, chain)


# ---------------------------------------------------------------------------
# H-congruences


def predict_h_congruences(S: PartialSemigroup, G: GreenData | None = None):
    """All tuple congruences inside the H-relation: one normal subgroup per
    level, inside the zeta layer, compatible with pushing down.  Returns
    (tuples, congruences)."""
    if G is None:
        G = green_relations(S)
    chain = ideal_chain(S, G)
    zeta = max_h_congruence(S, G)
    embs = [natural_embedding(S, G, rank) for rank in chain.ranks]
    tuples = enumerate_nz_tuples(S, G, embs, zeta)
    out = []
    for tup in tuples:
        names = ",".join(subgroup_label(e, N)
                         for e, N in zip(tup.embs, tup.Ns))
        out.append(tup.congruence(S, G, label=f"Theta({names})"))
    return tuples, out


def brute_h_congruences(S: PartialSemigroup, G: GreenData,
                        congs: CongruenceSet) -> list[Congruence]:
    """The enumerated congruences contained in the H-relation."""
    h_eq = Congruence(S, canonical_classes(G.h_class), "H")
    return [c for c in congs if refines(c, h_eq)]


# ---------------------------------------------------------------------------
# verification


@dataclass
class TheoremReport:
    S: PartialSemigroup
    catalogue: Catalogue
    oracle: CongruenceSet
    missing: list[Congruence]
    extra: list[Congruence]
    iso_ok: bool | None = None

    @property
    def equal(self) -> bool:
        return not self.missing and not self.extra

    def summary(self) -> str:
        name = self.S.spec.key() if self.S.spec is not None else "instance"
        if self.equal:
            line = (f"{name}: EQUAL, {len(self.catalogue)} predicted = "
                    f"{len(self.oracle)} enumerated")
            if self.iso_ok is not None:
                line += (", order isomorphism "
                         + ("ok" if self.iso_ok else "FAILED"))
            return line
        lines = [f"{name}: MISMATCH, {len(self.catalogue)} predicted vs "
                 f"{len(self.oracle)} enumerated"]
        for c in self.missing[:5]:
            lines.append(
                f"  enumerated but not predicted: {c.n_classes} classes")
        for c in self.extra[:5]:
            lines.append(f"  predicted but not enumerated: {c.label!r}")
        return "\n".join(lines)


def verify_theorem(S: PartialSemigroup, G: GreenData | None = None, *,
                   force: bool = False, iso_limit: int = ISO_NODE_LIMIT,
                   cache: PrincipalCache | None = None) -> TheoremReport:
    """Build the catalogue, enumerate by brute force, compare as sets.

    When the sets agree, the catalogue carries an abstract lattice shape
    and the instance is small, additionally check that the enumerated order
    is isomorphic to the promised shape."""
    if G is None:
        G = green_relations(S)
    cat = predict_theorem(S, G)
    oracle = all_congruences(S, force=force, cache=cache)
    ckeys = cat.keys()
    missing = [c for c in oracle if c.key not in ckeys]
    extra = [c for c in cat.congruences if c.key not in oracle.by_key]
    report = TheoremReport(S, cat, oracle, missing, extra)
    if report.equal and cat.abstract is not None and len(oracle) <= iso_limit:
        L = congruence_lattice(
            oracle, [cat.label_of(c.key) for c in oracle])
        report.iso_ok = find_isomorphism(L, cat.abstract) is not None
    return report


def check_coordinate_order(cat: Catalogue, n_samples: int = 500,
                           seed: int = 0) -> bool:
    """Sampled check that refinement between catalogue members agrees with
    the promised product order on their coordinates."""
    if cat.coords is None or cat.coord_leq is None:
        raise ValidationError("catalogue carries no coordinates")
    rng = np.random.default_rng(seed)
    cs = cat.congruences
    m = len(cs)
    for _ in range(n_samples):
        a = cs[int(rng.integers(m))]
        b = cs[int(rng.integers(m))]
        if refines(a, b) != cat.coord_leq(cat.coords[a.key],
                                          cat.coords[b.key]):
            return False
    return True
