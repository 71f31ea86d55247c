"""Command-line front end: homology, bounds, reductions and the PSL(2,7) reproduction."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__
from .groups import (DEFAULT_MAX_ORDER, DEFAULT_MAX_POSET, GroupInputError, OrderCapExceeded, PermGroup,
                     SubgroupTable, all_subgroups, catalog_group, coset_poset, format_group, parse_group,
                     subgroup_lattice_full, subgroup_lattice_proper)
from .homology import (HomologyGroup, HomologyProfile, hdim, mobius_bottom_top, poset_homology, reduced_euler)
from .poset import Poset, PosetError, as_bounded_lattice, format_poset, read_poset
from .reduce import (MeetUnavailable, NotAnAntichain, coatom_meet_reduction, psl27_pipeline, remove_antichain,
                     verify_wedge_homology)
from .simplicial import order_complex
from .spectral import (DecreasingClassifier, bound_table, decreasing_sufficiency, group_fiber_classes,
                       lcs_relation_check, poset_fiber_classes)

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3

# full homology above this many poset elements needs --allow-large
LARGE_POSET = 2000


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    catalog: Optional[str] = None
    group_file: Optional[str] = None
    poset_file: Optional[str] = None
    lattice: str = "L"
    reduce: str = "none"
    max_order: int = DEFAULT_MAX_ORDER
    max_poset: int = DEFAULT_MAX_POSET
    allow_large: bool = False
    jobs: int = 1
    cache_dir: Optional[str] = None
    format: str = "human"
    facts: dict = field(default_factory=dict)
    actual: bool = False
    level: Optional[int] = None
    remove_class: Optional[str] = None
    skip_reduction: bool = False

    def __post_init__(self):
        if self.max_order <= 0 or self.max_poset <= 0:
            raise InputError("caps must be positive")
        sources = [s for s in (self.catalog, self.group_file, self.poset_file) if s is not None]
        if len(sources) > 1:
            raise InputError("give exactly one of --catalog, --group-file, --poset-file")

    @property
    def is_group(self) -> bool:
        return self.poset_file is None


# cache ----------------------------------------------------------------------

class ResultCache:
    """Subgroup tables and fiber homology keyed by a hash of the input text.

    One directory per hash; ``index.txt`` maps hashes to readable names.
    """

    def __init__(self, root):
        self.root = Path(root) if root else None

    def key(self, content: str) -> str:
        return hashlib.sha256(f"{__version__}\n{content}".encode()).hexdigest()[:16]

    def _path(self, key: str, name: str) -> Optional[Path]:
        return self.root / key / name if self.root else None

    def load(self, key: str, name: str):
        path = self._path(key, name)
        if path is None or not path.exists():
            return None
        return json.loads(path.read_text())

    def store(self, key: str, name: str, data, label: str = "") -> None:
        path = self._path(key, name)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(data, indent=1))
        tmp.replace(path)
        index = self.root / "index.txt"
        line = f"{key} {label}".rstrip()
        lines = index.read_text().splitlines() if index.exists() else []
        if line not in lines:
            lines.append(line)
            index.write_text("\n".join(sorted(lines)) + "\n")


def table_to_dict(t: SubgroupTable) -> dict:
    return {"masks": [format(m, "x") for m in t.masks], "orders": t.orders, "classes": t.classes,
            "names": t.names, "gens": t.gens}


def table_from_dict(g: PermGroup, d: dict) -> SubgroupTable:
    classes = [list(c) for c in d["classes"]]
    class_of = [0] * len(d["masks"])
    for c, members in enumerate(classes):
        for s in members:
            class_of[s] = c
    return SubgroupTable(g, [int(m, 16) for m in d["masks"]], list(d["orders"]), classes, class_of,
                         list(d["names"]), [list(x) for x in d["gens"]])


def fibers_to_dict(cache: dict) -> dict:
    return {f"{w}:{c}": {"homology": h.to_dict(), "dim": dim} for (w, c), (h, dim) in sorted(cache.items())}


def fibers_from_dict(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        w, c = k.split(":")
        out[(w, int(c))] = (HomologyProfile.from_dict(v["homology"]), v["dim"])
    return out


# inputs -----------------------------------------------------------------------

@dataclass
class GroupInput:
    group: PermGroup
    table: SubgroupTable
    key: str
    name: str
    fibers: dict


def load_group(cfg: RunConfig, cache: ResultCache) -> GroupInput:
    if cfg.group_file:
        try:
            text = Path(cfg.group_file).read_text(encoding="utf-8")
        except OSError as e:
            raise InputError(str(e)) from None
        g = parse_group(text, max_order=cfg.max_order)
        name = Path(cfg.group_file).stem
    else:
        g = catalog_group(cfg.catalog or "", max_order=cfg.max_order)
        name = cfg.catalog
    key = cache.key(format_group(g))
    stored = cache.load(key, "subgroups.json")
    if stored is not None:
        table = table_from_dict(g, stored)
    else:
        table = all_subgroups(g, max_order=cfg.max_order)
        cache.store(key, "subgroups.json", table_to_dict(table), name)
    fibers = fibers_from_dict(cache.load(key, "fibers.json") or {})
    return GroupInput(g, table, key, name, fibers)


def save_fibers(cache: ResultCache, gi: GroupInput) -> None:
    if gi.fibers:
        cache.store(gi.key, "fibers.json", fibers_to_dict(gi.fibers), gi.name)


def load_poset_file(cfg: RunConfig) -> Poset:
    try:
        return read_poset(cfg.poset_file)
    except OSError as e:
        raise InputError(str(e)) from None


def group_poset(cfg: RunConfig, gi: GroupInput):
    """(poset, meet, bottom) for the selected lattice; meet is None when unavailable."""
    t = gi.table
    if cfg.lattice == "L":
        return subgroup_lattice_proper(t), t.meet, t.trivial
    cp = coset_poset(t, punctured=cfg.lattice == "S", max_poset=cfg.max_poset)
    if cfg.lattice == "S":
        return cp.poset, None, None
    by_mask = {m: c for c, m in zip(cp.poset.labels, cp.masks)}
    masks = dict(zip(cp.poset.labels, cp.masks))

    def meet(a, b):
        return by_mask.get(masks[a] & masks[b])

    return cp.poset, meet, None


def lattice_closure(p: Poset):
    """Meet of ``p`` with a bottom and top adjoined, or InputError if that is not a lattice."""
    bottom, top = ("bottom",), ("top",)
    labels = [bottom] + list(p.labels) + [top]
    full = Poset.from_relation(labels, lambda a, b: a != b and (a == bottom or b == top or (
        a not in (bottom, top) and b not in (bottom, top) and p.less(a, b))))
    try:
        lat = as_bounded_lattice(full)
    except PosetError as e:
        raise InputError(f"coatom reduction needs a lattice: {e}") from None
    return lat.meet, bottom


def build_poset(cfg: RunConfig, cache: ResultCache):
    gi = None
    if cfg.is_group:
        gi = load_group(cfg, cache)
        p, meet, bottom = group_poset(cfg, gi)
    else:
        p = load_poset_file(cfg)
        meet, bottom = (None, None)
        if cfg.reduce == "coatom":
            meet, bottom = lattice_closure(p)
    original = p
    if cfg.reduce == "coatom":
        if meet is None:
            raise InputError(f"coatom reduction is not available for lattice {cfg.lattice}")
        p = coatom_meet_reduction(p, meet, bottom)
    return gi, original, p


def guard_size(cfg: RunConfig, p: Poset) -> None:
    if len(p) > LARGE_POSET and not cfg.allow_large:
        raise OrderCapExceeded(f"poset has {len(p)} elements; full homology above {LARGE_POSET} needs --allow-large")


# commands ------------------------------------------------------------------------

def cmd_homology(cfg: RunConfig, cache: ResultCache) -> tuple:
    gi, original, p = build_poset(cfg, cache)
    guard_size(cfg, p)
    h = poset_homology(p)
    x = order_complex(p)
    rep = {
        "command": "homology",
        "input": describe(cfg, gi),
        "size": len(p),
        "size_before_reduction": len(original),
        "dim": p.dim,
        "f_vector": x.f_vector(),
        "homology": h.to_dict(),
        "euler_faces": reduced_euler(x),
        "euler_ranks": h.euler(),
        "hdim": hdim(h),
        "torsion_free": h.is_torsion_free(),
    }
    if gi is not None and cfg.lattice == "L":
        rep["mobius"] = mobius_bottom_top(as_bounded_lattice(subgroup_lattice_full(gi.table)))
    ok = rep["euler_faces"] == rep["euler_ranks"] and rep.get("mobius", rep["euler_faces"]) == rep["euler_faces"]
    if cfg.reduce == "coatom":
        before = poset_homology(original) if len(original) <= LARGE_POSET or cfg.allow_large else None
        if before is not None:
            rep["reduction_preserves_homology"] = before == h
            ok = ok and before == h
    rep["ok"] = ok
    lines = [f"{rep['input']}: {len(p)} elements, dim {p.dim}", h.report(),
             f"reduced Euler characteristic {rep['euler_faces']} (faces) / {rep['euler_ranks']} (ranks)"]
    if "mobius" in rep:
        lines.append(f"Mobius mu(0,1) = {rep['mobius']}")
    lines.append(f"Hdim = {rep['hdim']}")
    if "reduction_preserves_homology" in rep:
        lines.append(f"coatom reduction {len(original)} -> {len(p)}, homology preserved: {rep['reduction_preserves_homology']}")
    return rep, lines, ok


def cmd_bounds(cfg: RunConfig, cache: ResultCache) -> tuple:
    if cfg.is_group:
        gi = load_group(cfg, cache)
        classes = group_fiber_classes(gi.table, cfg.lattice, gi.fibers, cfg.jobs)
        save_fibers(cache, gi)
        nonempty = not (cfg.lattice == "L" and len(gi.table) <= 2)
        actual_poset = (lambda: group_poset(cfg, gi)[0]) if cfg.actual else None
    else:
        gi = None
        p = load_poset_file(cfg)
        classes = poset_fiber_classes(p)
        nonempty = len(p) > 0
        actual_poset = (lambda: p) if cfg.actual else None
    bt = bound_table(classes, cfg.facts, nonempty)
    actual = None
    if actual_poset is not None:
        ap = actual_poset()
        guard_size(cfg, ap)
        actual = poset_homology(ap)
    rows = bt.rows(actual)
    ok = True
    if actual is not None:
        ok = all(r["lower"] <= r["actual"] <= r["upper"] and r["refined_lower"] <= r["actual"] <= r["refined_upper"]
                 for r in rows)
    rep = {
        "command": "bounds",
        "input": describe(cfg, gi),
        "facts": {str(m): r for m, r in sorted(cfg.facts.items())},
        "rows": rows,
        "fiber_classes": [{"class": fc.label, "count": fc.count, "level": fc.level, "homology": fc.homology.to_dict()}
                          for fc in classes] if gi is not None else len(classes),
        "conclusions": [c for c in bt.conclusions.values() if c["vanishes_above"] or c["torsion_free"]],
        "ok": ok,
    }
    head = ["m", "lower", "upper", "refined_lower", "refined_upper"] + (["actual"] if actual is not None else [])
    lines = [f"{rep['input']}: Betti bounds (unreduced ranks)"]
    if cfg.facts:
        lines.append("facts (reduced ranks): " + ", ".join(f"H~[{m}]={r}" for m, r in sorted(cfg.facts.items())))
    lines.append("  ".join(f"{h:>13}" for h in head))
    for r in rows:
        lines.append("  ".join(f"{r[h]:>13}" for h in head))
    for c in bt.conclusions.values():
        if c["vanishes_above"]:
            lines.append(f"all fibers have H~[{c['m']}] = 0, so H[{c['m'] + 1}] = 0")
    tf = [c["m"] for c in bt.conclusions.values() if c["torsion_free"]]
    if tf:
        lines.append("torsion-free by fiber propagation: " + ", ".join(f"H[{m}]" for m in tf))
    return rep, lines, ok


def cmd_psl27(cfg: RunConfig, cache: ResultCache) -> tuple:
    if cfg.catalog not in (None, "PSL27") or cfg.group_file or cfg.poset_file:
        raise InputError("psl27 runs on the catalog group PSL27 only")
    cfg.catalog = "PSL27"
    gi = load_group(cfg, cache)
    report = psl27_pipeline(gi.table, remove_class=cfg.remove_class, skip_reduction=cfg.skip_reduction)
    rep = {"command": "psl27", **report.to_dict()}
    lines = []
    for s in report.steps:
        lines.append(f"[{'ok' if s.ok else 'FAIL'}] {s.name}: {s.size} elements; {s.homology.report().replace(chr(10), ', ')}")
        for k, v in s.notes.items():
            lines.append(f"      {k}: {v}")
    if report.attempts:
        lines.append("class attempts: " + ", ".join(f"{a['class']}={'ok' if a['ok'] else 'failed'}" for a in report.attempts))
    f = report.final
    if report.ok:
        lines.append(f"{f.rank(1)} circles + {f.rank(2)} spheres verified")
    else:
        lines.append("verification FAILED")
    return rep, lines, report.ok


def cmd_decreasing(cfg: RunConfig, cache: ResultCache) -> tuple:
    gi, _, p = build_poset(cfg, cache)
    guard_size(cfg, p)
    cl = DecreasingClassifier(p)
    v = cl.verdict()
    fibers = cl.all_verdicts()
    ok = v.hdim_bound_ok and v.lemma_ok and all(f.hdim_bound_ok and f.lemma_ok for f in fibers)
    rep = {"command": "decreasing", "input": describe(cfg, gi), "size": len(p), **v.to_dict(), "checks_ok": ok}
    lines = [f"{rep['input']}: {len(p)} elements",
             f"{'decreasing' if v.is_decreasing else 'not decreasing'}: Hdim {v.hdim}, dim {v.dim}, "
             f"decreasing levels {rep['decreasing_levels']} (s = {v.s})",
             f"Hdim <= dim - s: {v.hdim_bound_ok}"]
    if cfg.level is not None:
        suff = decreasing_sufficiency(p, cfg.level, cl)
        rep["sufficiency"] = {k: (str(x) if k == "elements" else x) for k, x in suff.items() if k != "elements"}
        lines.append(f"level {cfg.level}: {suff['reason']}")
    rep["ok"] = ok
    return rep, lines, ok


def cmd_reduce(cfg: RunConfig, cache: ResultCache) -> tuple:
    gi, original, p = build_poset(cfg, cache)
    guard_size(cfg, original)
    h_before = poset_homology(original)
    h_after = poset_homology(p)
    ok = h_before == h_after
    rep = {"command": "reduce", "input": describe(cfg, gi), "size_before": len(original), "size_after": len(p),
           "homology": h_after.to_dict(), "homology_preserved": ok}
    lines = [f"{rep['input']}: {len(original)} -> {len(p)} elements", h_after.report(),
             f"homology preserved: {ok}"]
    if gi is not None and cfg.lattice == "L":
        labels = gi.table.class_labels()
        dropped = sorted({labels[gi.table.class_of[x]] for x in original.labels} - {labels[gi.table.class_of[x]] for x in p.labels})
        rep["dropped_classes"] = dropped
        lines.append("dropped classes: " + (", ".join(dropped) or "none"))
        if cfg.remove_class:
            members = [x for x in p.labels if labels[gi.table.class_of[x]] == cfg.remove_class]
            if not members:
                raise InputError(f"class {cfg.remove_class!r} not present; classes: {sorted(set(labels))}")
            d = remove_antichain(p, members)
            wr = verify_wedge_homology(p, d, h_after)
            rep["removed"] = {"class": cfg.remove_class, "count": len(members), "remainder": wr.remainder.to_dict(),
                              "summands": wr.summands.to_dict(), "equal": wr.equal}
            ok = ok and wr.equal
            lines.append(f"removed {len(members)} x {cfg.remove_class}: remainder {wr.remainder.report()}; "
                         f"summands {wr.summands.report()}; wedge homology equal: {wr.equal}")
    rep["ok"] = ok
    return rep, lines, ok


def cmd_lcs(cfg: RunConfig, cache: ResultCache) -> tuple:
    if not cfg.is_group:
        raise InputError("lcs-check needs a group")
    gi = load_group(cfg, cache)
    size = sum(gi.table.index(s) for s in range(len(gi.table) - 1))
    if size > LARGE_POSET and not cfg.allow_large:
        raise OrderCapExceeded(f"coset poset has {size} elements; needs --allow-large")
    r = lcs_relation_check(gi.table, cfg.max_poset)
    rep = {"command": "lcs-check", "input": describe(cfg, gi), "order": r["order"],
           "L": r["L"].to_dict(), "C": r["C"].to_dict(), "S": r["S"].to_dict(),
           "relative": r["relative"].to_dict(), "expected_relative": r["expected_relative"].to_dict(),
           "relative_matches": r["relative_matches"], "inequalities": r["inequalities"],
           "corollary": r["corollary"], "ok": r["ok"]}
    lines = [f"{rep['input']} (order {r['order']})",
             "L: " + r["L"].report().replace("\n", ", "),
             "C: " + r["C"].report().replace("\n", ", "),
             "S: " + r["S"].report().replace("\n", ", "),
             f"pair (C, S): {r['relative'].report().replace(chr(10), ', ')}; "
             f"{r['order']} suspended copies of L: {r['expected_relative'].report().replace(chr(10), ', ')}; "
             f"match: {r['relative_matches']}"]
    for i in r["inequalities"]:
        sym = "<=" if i["kind"] == "injection" else ">="
        lines.append(f"rank H~[{i['m']}](C) = {i['lhs']} {sym} {i['rhs']}: {i['holds']}")
    c = r["corollary"]
    lines.append(f"top-dimension bound (n = {c['n']}): {c['lhs']} <= {c['rhs']}: {c['holds']}")
    return rep, lines, r["ok"]


COMMANDS = {
    "homology": cmd_homology,
    "bounds": cmd_bounds,
    "psl27": cmd_psl27,
    "decreasing": cmd_decreasing,
    "reduce": cmd_reduce,
    "lcs-check": cmd_lcs,
}


def describe(cfg: RunConfig, gi: Optional[GroupInput]) -> str:
    if gi is None:
        return f"poset {cfg.poset_file}" + (" (coatom-reduced)" if cfg.reduce == "coatom" else "")
    if cfg.command == "lcs-check":
        return f"group {gi.name}"
    name = {"L": "subgroup lattice", "C": "coset poset", "S": "punctured coset poset"}[cfg.lattice]
    return f"{name} of {gi.name}" + (" (coatom-reduced)" if cfg.reduce == "coatom" else "")


def parse_fact(text: str) -> tuple:
    """``m=r`` or ``Hm=r``: the reduced rank of H~_m."""
    lhs, sep, rhs = text.partition("=")
    try:
        m, r = int(lhs.lstrip("Hh~")), int(rhs)
    except ValueError:
        raise argparse.ArgumentTypeError(f"fact must look like 'm=r' or 'Hm=r', got {text!r}") from None
    if not sep or m < 0 or r < 0:
        raise argparse.ArgumentTypeError(f"bad fact {text!r}")
    return m, r


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("input")
    src.add_argument("--catalog", help="catalog group: S3 Z6 Z12 D8 Q8 S4 A4 A5 PSL27 Z2^3 or Zn")
    src.add_argument("--group-file", help="group file ('deg n' and 'gen (..)' lines)")
    src.add_argument("--poset-file", help="poset file ('e label' and 'r a b' lines)")
    common.add_argument("--lattice", choices=("L", "C", "S"), default="L",
                        help="subgroup lattice, coset poset or punctured coset poset")
    common.add_argument("--reduce", choices=("coatom", "none"),
                        help="poset reduction before homology (default: coatom for 'reduce', none otherwise)")
    common.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER)
    common.add_argument("--max-poset", type=int, default=DEFAULT_MAX_POSET)
    common.add_argument("--allow-large", action="store_true", help=f"allow full homology above {LARGE_POSET} elements")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common.add_argument("--cache-dir")
    common.add_argument("--format", choices=("human", "structured"), default="human")

    ap = argparse.ArgumentParser(prog="grouplattice", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("homology", parents=[common], help="reduced integer homology")
    b = sub.add_parser("bounds", parents=[common], help="Betti bounds from lower fibers")
    b.add_argument("--fact", type=parse_fact, action="append", default=[], metavar="Hm=r",
                   help="known reduced rank, e.g. H1=0 (repeatable)")
    b.add_argument("--connected", action="store_true", help="shorthand for H0=0")
    b.add_argument("--simply-connected", action="store_true", help="shorthand for H0=0 and H1=0")
    b.add_argument("--actual", action="store_true", help="also compute the homology and check the bounds")
    p = sub.add_parser("psl27", parents=[common], help="reduce the subgroup lattice of PSL(2,7)")
    p.add_argument("--remove-class", help="force the class removed in the third step (e.g. S4a)")
    p.add_argument("--skip-reduction", action="store_true", help="direct homology only")
    d = sub.add_parser("decreasing", parents=[common], help="decreasing-poset classification")
    d.add_argument("--level", type=int, help="also evaluate the sufficient condition at this level")
    r = sub.add_parser("reduce", parents=[common], help="coatom reduction and class removal with homology checks")
    r.add_argument("--remove-class", help="after reduction, remove this subgroup class as an antichain")
    sub.add_parser("lcs-check", parents=[common], help="compare the pair (C G, S G) with L G")
    return ap


def config_from_args(args) -> RunConfig:
    facts = dict(getattr(args, "fact", []) or [])
    if getattr(args, "connected", False):
        facts.setdefault(0, 0)
    if getattr(args, "simply_connected", False):
        facts.setdefault(0, 0)
        facts.setdefault(1, 0)
    if args.catalog is None and args.group_file is None and args.poset_file is None and args.command != "psl27":
        raise InputError("one of --catalog, --group-file, --poset-file is required")
    return RunConfig(
        command=args.command, catalog=args.catalog, group_file=args.group_file, poset_file=args.poset_file,
        lattice=args.lattice, reduce=args.reduce or ("coatom" if args.command == "reduce" else "none"), max_order=args.max_order, max_poset=args.max_poset,
        allow_large=args.allow_large, jobs=max(1, args.jobs), cache_dir=args.cache_dir, format=args.format,
        facts=facts, actual=getattr(args, "actual", False), level=getattr(args, "level", None),
        remove_class=getattr(args, "remove_class", None), skip_reduction=getattr(args, "skip_reduction", False),
    )


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    rep, lines, ok = COMMANDS[cfg.command](cfg, ResultCache(cfg.cache_dir))
    if cfg.format == "structured":
        out.write(json.dumps(rep, indent=2, default=str) + "\n")
    else:
        out.write("\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_FAILED


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return run(cfg)
    except OrderCapExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    except (InputError, GroupInputError, PosetError, MeetUnavailable, NotAnAntichain, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
