"""Command line front end.

Subcommands: build, green, cong-lattice, principal, named, check-properties,
verify, verify-all.  Exit codes: 0 success, 1 verification mismatch,
2 validation error, 3 size guard.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .congruences import (CongruenceSet, all_congruences,
                          congruence_generated, max_h_congruence)
from .constructions import (build_retraction, green_family, make_in_pair,
                            minimal_ideal, nu, nu_sharp, r_in, rees,
                            theta_tuple)
from .core import (GreenData, IdealChain, PartialSemigroup, build_category,
                   green_relations, ideal_chain, is_regular_class,
                   is_h_trivial_class, is_stable, is_stable_class,
                   restrict_to_ideal)
from .elements import FamilySpec, canonical_str, parse_objects
from .errors import GuardError, ValidationError
from .groups import group_h_class, natural_embedding, normal_subgroups, \
    subgroup_label
from .lattices import AbstractLattice, check_properties, congruence_lattice
from .predictions import predict_theorem, verify_theorem

NAMED_CHOICES = ("rees", "nu", "rin", "lam", "rho", "mu", "eta",
                 "theta-tuple", "zeta")


@dataclass
class RunConfig:
    command: str = ""
    family: str | None = None
    objects: str | None = None
    field: int | None = None
    rank: int | None = None
    force: bool = False
    threads: int = 1
    json_path: str | None = None
    dot_path: str | None = None
    pair: str | None = None
    name: str | None = None
    ideal: int | None = None
    level: int | None = None
    subgroup: str | None = None
    tuple_labels: str | None = None

    def validate(self) -> None:
        if self.threads < 1:
            raise ValidationError("--threads must be at least 1")
        if self.rank is not None and self.rank < 0:
            raise ValidationError("--rank must be nonnegative")


def _merge_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    file_values: dict = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            file_values = json.load(fh)
        unknown = set(file_values) - {f for f in RunConfig.__dataclass_fields__}
        if unknown:
            raise ValidationError(
                f"unknown config keys: {', '.join(sorted(unknown))}")
    for name in RunConfig.__dataclass_fields__:
        if name == "command":
            continue
        flag = getattr(args, name, None)
        if flag is not None and flag is not False:
            setattr(cfg, name, flag)
        elif name in file_values:
            setattr(cfg, name, file_values[name])
    cfg.validate()
    return cfg


def _spec(cfg: RunConfig) -> FamilySpec:
    if not cfg.family or cfg.objects is None:
        raise ValidationError("--family and --objects are required")
    return FamilySpec(cfg.family, parse_objects(str(cfg.objects)),
                      field_p=cfg.field)


def _instance(cfg: RunConfig):
    """Build the category, restrict to the requested rank ideal if any."""
    S = build_category(_spec(cfg), force=cfg.force)
    G = green_relations(S)
    chain = ideal_chain(S, G)
    if cfg.rank is not None and cfg.rank != chain.ranks[-1]:
        S = restrict_to_ideal(S, chain.ideal_by_rank(cfg.rank))
        G = green_relations(S)
        chain = ideal_chain(S, G)
    return S, G, chain


# ---------------------------------------------------------------------------
# serialization


def lattice_json(S: PartialSemigroup, congs: CongruenceSet,
                 labels: list[str], covers: list[tuple[int, int]],
                 rank: int) -> dict:
    spec = S.spec
    return {
        "family": spec.tag if spec else None,
        "objects": list(spec.objects) if spec else [],
        "field": spec.field_p if spec else None,
        "rank": rank,
        "n_elements": S.n_elements,
        "elements": [canonical_str(x) for x in S.elements],
        "congruences": [
            {"id": k, "label": labels[k],
             "classes": [[int(i) for i in cls] for cls in c.classes()]}
            for k, c in enumerate(congs.congruences)],
        "covers": sorted([int(a), int(b)] for a, b in covers),
    }


def dump_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def lattice_from_json(obj: dict) -> dict:
    """Re-canonicalize a parsed lattice document; a round trip through
    dump_json must be byte-identical."""
    congs = [{"id": int(c["id"]), "label": str(c["label"]),
              "classes": [sorted(int(i) for i in cls) for cls in c["classes"]]}
             for c in obj["congruences"]]
    for c in congs:
        c["classes"].sort(key=lambda cls: cls[0])
    return {
        "family": obj["family"],
        "objects": [int(v) for v in obj["objects"]],
        "field": obj["field"],
        "rank": int(obj["rank"]),
        "n_elements": int(obj["n_elements"]),
        "elements": [str(s) for s in obj["elements"]],
        "congruences": congs,
        "covers": sorted([int(a), int(b)] for a, b in obj["covers"]),
    }


def _heights(n: int, covers: list[tuple[int, int]]) -> np.ndarray:
    h = np.zeros(n, dtype=np.int32)
    changed = True
    while changed:
        changed = False
        for a, b in covers:
            if h[b] < h[a] + 1:
                h[b] = h[a] + 1
                changed = True
    return h


def _is_rees_label(label: str) -> bool:
    if label in ("Delta", "Nabla"):
        return True
    return label.startswith("R_I") and label[3:].isdigit()


def lattice_dot(L: AbstractLattice) -> str:
    covers = L.covers()
    h = _heights(L.n, covers)
    lines = ["digraph cong_lattice {", "  rankdir=BT;",
             "  node [shape=ellipse, fontsize=10];"]
    for i, lab in enumerate(L.labels):
        style = ", style=filled, fillcolor=\"gray85\"" if _is_rees_label(lab) \
            else ""
        lines.append(f"  c{i} [label=\"{lab}\"{style}];")
    for lev in range(int(h.max()) + 1 if L.n else 0):
        row = [f"c{i}" for i in np.flatnonzero(h == lev)]
        lines.append("  { rank=same; " + "; ".join(row) + "; }")
    for a, b in covers:
        lines.append(f"  c{a} -> c{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_build(cfg: RunConfig) -> int:
    S, G, chain = _instance(cfg)
    sizes = {}
    for (a, b), members in sorted(S.hom_index.items()):
        sizes[f"{a}->{b}"] = len(members)
    steps = []
    for rank, cid in chain.levels:
        steps.append(f"D{rank}({int((G.j_class == cid).sum())})")
    print(f"{S.n_elements} elements, D-classes: " + " < ".join(steps))
    print("hom-sets: " + ", ".join(f"{k}: {v}" for k, v in sizes.items()))
    reg = all(is_regular_class(S, G, cid) for _, cid in chain.levels)
    print(f"stable: {'yes' if is_stable(S, G) else 'no'}, "
          f"regular: {'yes' if reg else 'no'}")
    return 0


def cmd_green(cfg: RunConfig) -> int:
    S, G, chain = _instance(cfg)
    print(f"{S.n_elements} elements, {G.n_j} D-classes")
    for rank, cid in chain.levels:
        members = np.flatnonzero(G.j_class == cid)
        nr = len(np.unique(G.r_class[members]))
        nl = len(np.unique(G.l_class[members]))
        regular = is_regular_class(S, G, cid)
        trivial = is_h_trivial_class(S, G, cid)
        line = (f"D{rank}: {len(members)} elements, {nr} R-classes, "
                f"{nl} L-classes, regular: {'yes' if regular else 'no'}, "
                f"H-trivial: {'yes' if trivial else 'no'}")
        if regular and not trivial:
            idem = [e for e in G.idempotents if G.j_class[e] == cid]
            grp = group_h_class(S, G, int(idem[0]))
            line += f", group order {grp.order}"
        print(line)
    return 0


def _labelled_lattice(S: PartialSemigroup, G: GreenData,
                      congs: CongruenceSet):
    """Label enumerated congruences by matching the predicted catalogue."""
    by_key: dict[bytes, str] = {}
    try:
        cat = predict_theorem(S, G)
        by_key = {c.key: c.label for c in cat.congruences}
    except (ValidationError, GuardError):
        pass
    labels = []
    for k, c in enumerate(congs.congruences):
        labels.append(by_key.get(c.key, c.label or f"c{k}"))
    return congruence_lattice(congs, labels), labels


def cmd_cong_lattice(cfg: RunConfig) -> int:
    S, G, chain = _instance(cfg)
    congs = all_congruences(S, force=cfg.force)
    L, labels = _labelled_lattice(S, G, congs)
    covers = L.covers()
    doc = lattice_json(S, congs, labels, covers, chain.ranks[-1])
    _write(cfg.json_path, dump_json(doc))
    if cfg.dot_path:
        _write(cfg.dot_path, lattice_dot(L))
    return 0


def _single_congruence_doc(S: PartialSemigroup, chain: IdealChain, c) -> dict:
    congs = CongruenceSet(S, [c])
    return lattice_json(S, congs, [c.label], [], chain.ranks[-1])


def cmd_principal(cfg: RunConfig) -> int:
    S, G, chain = _instance(cfg)
    if not cfg.pair:
        raise ValidationError("--pair x,y is required")
    try:
        x, y = (int(v) for v in cfg.pair.split(","))
    except ValueError:
        raise ValidationError(f"bad --pair {cfg.pair!r}") from None
    if not (0 <= x < S.n_elements and 0 <= y < S.n_elements):
        raise ValidationError("pair indices out of range")
    c = congruence_generated(S, [(x, y)], label=f"cg({x},{y})")
    _write(cfg.json_path, dump_json(_single_congruence_doc(S, chain, c)))
    return 0


def _resolve_subgroup(emb, token: str):
    subs = normal_subgroups(emb.group)
    for N in subs:
        if subgroup_label(emb, N) == token:
            return N
    names = sorted({subgroup_label(emb, N) for N in subs})
    raise ValidationError(
        f"no normal subgroup named {token!r} at rank {emb.q}; "
        f"available: {', '.join(names)}")


def cmd_named(cfg: RunConfig) -> int:
    S, G, chain = _instance(cfg)
    name = cfg.name
    if name == "zeta":
        c = max_h_congruence(S, G)
    elif name == "rees":
        if cfg.ideal is None:
            raise ValidationError("rees needs --ideal RANK")
        c = rees(S, chain.ideal_by_rank(cfg.ideal), f"R_I{cfg.ideal}")
    elif name == "nu":
        if cfg.level is None or not cfg.subgroup:
            raise ValidationError("nu needs --level RANK and --subgroup NAME")
        emb = natural_embedding(S, G, cfg.level)
        N = _resolve_subgroup(emb, cfg.subgroup)
        c = nu_sharp(S, emb, N, f"nu_sharp_q{cfg.level}_{cfg.subgroup}")
    elif name == "rin":
        if cfg.ideal is None or not cfg.subgroup:
            raise ValidationError("rin needs --ideal RANK and --subgroup NAME")
        level = chain.level_of_rank(cfg.ideal) + 1
        if level >= len(chain.levels):
            raise ValidationError("no level above the given ideal")
        q = chain.ranks[level]
        emb = natural_embedding(S, G, q)
        N = _resolve_subgroup(emb, cfg.subgroup)
        pair = make_in_pair(S, G, chain, level, N, emb)
        c = r_in(S, G, pair, f"R_I{cfg.ideal}_{cfg.subgroup}")
    elif name in ("lam", "rho", "mu", "eta"):
        if cfg.ideal is None:
            raise ValidationError(f"{name} needs --ideal RANK")
        ideal = chain.ideal_by_rank(cfg.ideal)
        retr = build_retraction(S, G, ideal)
        if retr is None:
            raise ValidationError(
                f"the rank-{cfg.ideal} ideal admits no retraction")
        nu_part = None
        suffix = ""
        if cfg.subgroup:
            level = chain.level_of_rank(cfg.ideal) + 1
            if level >= len(chain.levels):
                raise ValidationError("no level above the given ideal")
            emb = natural_embedding(S, G, chain.ranks[level])
            N = _resolve_subgroup(emb, cfg.subgroup)
            nu_part = nu(S, G, emb, N)
            suffix = f"_{cfg.subgroup}"
        c = green_family(S, G, retr, ideal, name, nu_part,
                         f"{name}_I{cfg.ideal}{suffix}")
    elif name == "theta-tuple":
        if not cfg.tuple_labels:
            raise ValidationError(
                "theta-tuple needs --tuple NAME,NAME,... (one per level)")
        tokens = [s.strip() for s in str(cfg.tuple_labels).split(",")]
        if len(tokens) != len(chain.levels):
            raise ValidationError(
                f"need {len(chain.levels)} names (levels {chain.ranks}), "
                f"got {len(tokens)}")
        pieces = []
        for q, token in zip(chain.ranks, tokens):
            emb = natural_embedding(S, G, q)
            pieces.append((emb, _resolve_subgroup(emb, token)))
        c = theta_tuple(S, G, pieces, "Theta(" + ",".join(tokens) + ")")
    else:
        raise ValidationError(
            f"unknown construction {name!r}; choose from "
            + ", ".join(NAMED_CHOICES))
    print(f"{c.label}: {c.n_classes} classes on {S.n_elements} elements")
    _write(cfg.json_path, dump_json(_single_congruence_doc(S, chain, c)))
    return 0


def cmd_check_properties(cfg: RunConfig) -> int:
    S, G, chain = _instance(cfg)
    rep = check_properties(S, G)
    rep.check_grid()
    print(f"n_elements: {rep.n_elements}")
    for attr in ("dmax_T", "dmax_S", "ngen", "sep", "sepb", "sepz",
                 "mult", "multb", "multz"):
        val = getattr(rep, attr)
        text = "n/a" if val is None else ("yes" if val else "no")
        print(f"{attr}: {text}")
    for key, wit in rep.failures.items():
        print(f"witness {key}: {wit}")
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    S, G, chain = _instance(cfg)
    rep = verify_theorem(S, G, force=cfg.force)
    print(rep.summary())
    return 0 if rep.equal and rep.iso_ok is not False else 1


VERIFY_ALL_CELLS: list[tuple[str, tuple[int, ...], int | None, int | None]] = [
    ("T", (4,), None, 1), ("T", (4,), None, 2), ("T", (4,), None, 3),
    ("T", (4,), None, None),
    ("OP-T", (4,), None, None), ("OPR-T", (4,), None, None),
    ("OriP-T", (4,), None, None), ("OriPR-T", (4,), None, None),
    ("P", (3,), None, 0), ("P", (3,), None, 1), ("P", (3,), None, 2),
    ("P", (3,), None, None),
    ("B", (3,), None, None), ("B", (4,), None, 2), ("B", (4,), None, None),
    ("TL", (4,), None, None), ("TL", (5,), None, None),
    ("TL", (6,), None, None), ("TLpm", (4,), None, None),
    ("J", (4,), None, None), ("Jpm", (4,), None, None),
    ("J", (5,), None, None),
    ("L", (2,), 2, 0), ("L", (2,), 2, 1), ("L", (2,), 2, None),
    ("L", (2,), 3, 0), ("L", (2,), 3, 1), ("L", (2,), 3, None),
    ("PL", (2,), 3, None),
]


def _verify_cell(cell) -> tuple[str, bool]:
    family, objects, field, rank = cell
    cfg = RunConfig(family=family,
                    objects=",".join(map(str, objects)),
                    field=field, rank=rank, force=True)
    S, G, chain = _instance(cfg)
    rep = verify_theorem(S, G, force=True)
    where = f"r={rank}" if rank is not None else "full"
    ok = rep.equal and rep.iso_ok is not False
    return f"{_spec(cfg).key()} {where}: {rep.summary().split(': ', 1)[1]}", ok


def cmd_verify_all(cfg: RunConfig) -> int:
    results: list[tuple[str, bool]]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_verify_cell, VERIFY_ALL_CELLS))
    else:
        results = [_verify_cell(cell) for cell in VERIFY_ALL_CELLS]
    all_ok = True
    for line, ok in results:
        print(line)
        all_ok = all_ok and ok
    print(f"{sum(ok for _, ok in results)}/{len(results)} cells EQUAL")
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", help="family tag, e.g. T, P, B, TL, J, L, PL")
    p.add_argument("--objects", help="comma-separated object sizes, e.g. 4 or 2,4")
    p.add_argument("--field", type=int, help="field prime for L/PL")
    p.add_argument("--rank", type=int, help="restrict to the rank-r ideal")
    p.add_argument("--force", action="store_true",
                   help="bypass the feasibility guard")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (output is identical regardless)")
    p.add_argument("--config", help="JSON file with the same keys as the flags")
    p.add_argument("--json", dest="json_path",
                   help="write JSON here ('-' = stdout)")
    p.add_argument("--dot", dest="dot_path", help="write Graphviz DOT here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="congwb",
        description="Build finite diagram/transformation/matrix categories "
                    "and verify their congruence lattices.")
    sub = ap.add_subparsers(dest="command", required=True)
    for cname, helptext in (
            ("build", "construct an instance and print its shape"),
            ("green", "print the D-class / Green's relations summary"),
            ("cong-lattice", "enumerate all congruences; emit JSON and DOT"),
            ("principal", "principal congruence of one pair"),
            ("named", "build one named congruence"),
            ("check-properties", "run the separation/multiplicativity report"),
            ("verify", "compare predicted vs enumerated congruences"),
            ("verify-all", "verify the built-in instance matrix")):
        p = sub.add_parser(cname, help=helptext)
        _add_common(p)
        if cname == "principal":
            p.add_argument("--pair", help="element indices, e.g. 3,17")
        if cname == "named":
            p.add_argument("name", choices=NAMED_CHOICES)
            p.add_argument("--ideal", type=int,
                           help="ideal rank for rees/rin/lam/rho/mu/eta")
            p.add_argument("--level", type=int,
                           help="group rank for nu")
            p.add_argument("--subgroup", help="normal subgroup name, e.g. A3")
            p.add_argument("--tuple", dest="tuple_labels",
                           help="per-level subgroup names for theta-tuple")
    return ap


COMMANDS = {
    "build": cmd_build,
    "green": cmd_green,
    "cong-lattice": cmd_cong_lattice,
    "principal": cmd_principal,
    "named": cmd_named,
    "check-properties": cmd_check_properties,
    "verify": cmd_verify,
    "verify-all": cmd_verify_all,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _merge_config(args)
        return COMMANDS[args.command](cfg)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except GuardError as e:
        print(f"guard: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
