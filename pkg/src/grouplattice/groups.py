"""Permutation groups, their subgroup lattices and coset posets.

Elements of a group are numbered ``0 .. |G|-1`` (identity first) and every
subset of the group, subgroups and cosets included, is a Python-int bitset
over those numbers.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .poset import Poset, bits, popcount

DEFAULT_MAX_ORDER = 400
DEFAULT_MAX_POSET = 25_000


class OrderCapExceeded(RuntimeError):
    pass


class GroupInputError(ValueError):
    pass


Perm = tuple  # images of 0..n-1


def identity(n: int) -> Perm:
    return tuple(range(n))


def compose(a: Perm, b: Perm) -> Perm:
    """Apply ``a`` first, then ``b`` (left-to-right, as in cycle notation products)."""
    return tuple(b[x] for x in a)


def inverse(a: Perm) -> Perm:
    inv = [0] * len(a)
    for i, x in enumerate(a):
        inv[x] = i
    return tuple(inv)


def parse_cycles(text: str, n: int) -> Perm:
    """Parse 1-based cycle notation such as ``(1 2 3)(4 5)``."""
    img = list(range(n))
    text = text.strip()
    if text in ("", "()"):
        return tuple(img)
    if not re.fullmatch(r"(\(\s*\d+(?:[\s,]+\d+)*\s*\))+", text.replace(" ", " ")):
        raise GroupInputError(f"bad cycle notation: {text!r}")
    seen = set()
    for cyc in re.findall(r"\(([^)]*)\)", text):
        pts = [int(t) - 1 for t in re.split(r"[\s,]+", cyc.strip())]
        for x in pts:
            if not 0 <= x < n:
                raise GroupInputError(f"point {x + 1} out of range 1..{n}")
            if x in seen:
                raise GroupInputError(f"point {x + 1} repeated in {text!r}")
            seen.add(x)
        for a, b in zip(pts, pts[1:] + pts[:1]):
            img[a] = b
    return tuple(img)


def format_cycles(p: Perm) -> str:
    seen, out = set(), []
    for i in range(len(p)):
        if i in seen or p[i] == i:
            continue
        cyc, j = [], i
        while j not in seen:
            seen.add(j)
            cyc.append(j + 1)
            j = p[j]
        out.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(out) or "()"


def perm_order(p: Perm) -> int:
    from math import lcm

    seen, res = set(), 1
    for i in range(len(p)):
        if i in seen:
            continue
        k, j = 0, i
        while j not in seen:
            seen.add(j)
            j = p[j]
            k += 1
        res = lcm(res, k)
    return res


class PermGroup:
    """Group generated by permutations of ``0..degree-1``, closed by BFS."""

    def __init__(self, degree: int, gens: Sequence[Perm], max_order: int = DEFAULT_MAX_ORDER, name: str | None = None):
        for g in gens:
            if len(g) != degree or sorted(g) != list(range(degree)):
                raise GroupInputError(f"{g} is not a permutation of {degree} points")
        self.degree = degree
        self.gens = [tuple(g) for g in gens]
        self.name = name
        e = identity(degree)
        elements = [e]
        index = {e: 0}
        frontier = [e]
        while frontier:
            nxt = []
            for x in frontier:
                for g in self.gens:
                    y = compose(x, g)
                    if y not in index:
                        index[y] = len(elements)
                        elements.append(y)
                        nxt.append(y)
                        if len(elements) > max_order:
                            raise OrderCapExceeded(f"group order exceeds cap {max_order}")
            frontier = nxt
        self.elements = elements
        self.index = index
        n = len(elements)
        self.mul = [[index[compose(a, b)] for b in elements] for a in elements]
        self.inv = [self.mul[a].index(0) for a in range(n)]
        self.gen_ids = [index[g] for g in self.gens]

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def full_mask(self) -> int:
        return (1 << self.order) - 1

    def __repr__(self):
        return f"PermGroup({self.name or '?'}, order={self.order})"

    def element_order(self, x: int) -> int:
        k, y = 1, x
        while y != 0:
            y = self.mul[y][x]
            k += 1
        return k

    def generate(self, gens: Sequence[int], start: int = 1) -> int:
        """Bitset of the subgroup generated by element ids ``gens`` and the bitset ``start``."""
        mask = start | 1
        frontier = list(bits(mask))
        gens = [g for g in gens]
        while frontier:
            nxt = []
            for x in frontier:
                row = self.mul[x]
                for g in gens:
                    y = row[g]
                    if not mask >> y & 1:
                        mask |= 1 << y
                        nxt.append(y)
            frontier = nxt
        return mask

    def conjugate_mask(self, mask: int, g: int) -> int:
        gi = self.inv[g]
        out = 0
        for x in bits(mask):
            out |= 1 << self.mul[self.mul[gi][x]][g]
        return out

    def is_abelian(self) -> bool:
        return all(self.mul[a][b] == self.mul[b][a] for a in self.gen_ids for b in self.gen_ids)

    def subgroups(self) -> "SubgroupTable":
        return all_subgroups(self)


def group_from_generators(n: int, gens: Sequence, max_order: int = DEFAULT_MAX_ORDER, name=None) -> PermGroup:
    """Accepts permutations as image tuples (0-based) or 1-based cycle strings."""
    perms = [parse_cycles(g, n) if isinstance(g, str) else tuple(g) for g in gens]
    return PermGroup(n, perms, max_order=max_order, name=name)


# subgroup naming --------------------------------------------------------

_NAMES = {
    (4, (1, 3)): "V4",
    (6, (1, 3, 2)): "S3",
    (8, (1, 5, 0, 2)): "D8",
    (8, (1, 1, 0, 6)): "Q8",
    (8, (1, 7)): "Z2^3",
    (8, (1, 3, 0, 4)): "Z4xZ2",
    (10, (1, 5, 0, 0, 4)): "D10",
    (12, (1, 3, 8)): "A4",
    (21, (1, 0, 14, 0, 0, 0, 6)): "F21",
    (24, (1, 9, 8, 6)): "S4",
    (60, (1, 15, 20, 0, 24)): "A5",
    (168, (1, 21, 56, 42, 0, 0, 48)): "PSL(2,7)",
}


def structure_name(order: int, element_orders: Counter) -> str:
    """Readable name from the order and element-order statistics (small groups only)."""
    if order == 1:
        return "1"
    if max(element_orders, default=1) == order:
        return f"Z{order}"
    top = max(element_orders)
    prof = tuple(element_orders.get(k, 0) for k in range(1, top + 1))
    while prof and not prof[-1]:
        prof = prof[:-1]
    return _NAMES.get((order, prof), f"G{order}[{','.join(map(str, prof))}]")


@dataclass
class SubgroupTable:
    """All subgroups of a group, sorted by order, with conjugacy classes."""

    group: PermGroup
    masks: list
    orders: list
    classes: list  # list of lists of subgroup ids
    class_of: list
    names: list  # per subgroup
    gens: list = field(repr=False)  # small generating set per subgroup
    _id: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._id = {m: i for i, m in enumerate(self.masks)}

    def __len__(self):
        return len(self.masks)

    def id_of(self, mask: int) -> int:
        return self._id[mask]

    @property
    def trivial(self) -> int:
        return 0

    @property
    def whole(self) -> int:
        return len(self.masks) - 1

    def leq(self, a: int, b: int) -> bool:
        return self.masks[a] & ~self.masks[b] == 0

    def meet(self, a: int, b: int) -> int:
        return self._id[self.masks[a] & self.masks[b]]

    def join(self, a: int, b: int) -> int:
        return self._id[self.group.generate(self.gens[a] + self.gens[b])]

    def index(self, a: int) -> int:
        return self.group.order // self.orders[a]

    def subgroups_of(self, a: int) -> list:
        """Ids of all subgroups contained in subgroup ``a`` (inclusive)."""
        m = self.masks[a]
        return [i for i, x in enumerate(self.masks) if x & ~m == 0]

    def class_name(self, c: int) -> str:
        return self.names[self.classes[c][0]]

    def class_labels(self) -> list:
        """Names per class; classes sharing a name get suffixes a, b, ..."""
        base = [self.class_name(c) for c in range(len(self.classes))]
        counts = Counter(base)
        seen: Counter = Counter()
        out = []
        for b in base:
            if counts[b] > 1:
                out.append(f"{b}{'abcdefghij'[seen[b]]}")
                seen[b] += 1
            else:
                out.append(b)
        return out

    def summary(self) -> list:
        """(label, order, class size) per conjugacy class."""
        labels = self.class_labels()
        return [(labels[c], self.orders[cl[0]], len(cl)) for c, cl in enumerate(self.classes)]

    def subtable(self, a: int) -> "SubgroupTable":
        """Subgroup table of subgroup ``a`` with classes taken under conjugation by ``a``."""
        sub = PermGroup(self.group.degree, [self.group.elements[g] for g in self.gens[a]] or [identity(self.group.degree)],
                        max_order=self.group.order)
        return all_subgroups(sub)


def _min_gens(g: PermGroup, mask: int) -> list:
    gens, cur = [], 1
    for x in sorted(bits(mask), key=lambda x: -g.element_order(x)):
        if not cur >> x & 1:
            gens.append(x)
            cur = g.generate(gens)
            if cur == mask:
                break
    return gens


def all_subgroups(g: PermGroup, max_order: int = DEFAULT_MAX_ORDER) -> SubgroupTable:
    """Every subgroup exactly once: cyclic seeds closed under joins with cyclic subgroups."""
    if g.order > max_order:
        raise OrderCapExceeded(f"|G| = {g.order} exceeds cap {max_order}")
    cyclic: dict[int, int] = {}
    for x in range(g.order):
        m = g.generate([x])
        cyclic.setdefault(m, x)
    found: dict[int, list] = {1: []}
    for m, x in cyclic.items():
        found.setdefault(m, [x] if m != 1 else [])
    queue = list(found)
    cyc_items = list(cyclic.items())
    while queue:
        m = queue.pop()
        gens = found[m]
        for cm, x in cyc_items:
            if cm & ~m == 0:
                continue
            j = g.generate(gens + [x], start=m)
            if j not in found:
                found[j] = gens + [x]
                queue.append(j)
    masks = sorted(found, key=lambda m: (popcount(m), m))
    orders = [popcount(m) for m in masks]
    ids = {m: i for i, m in enumerate(masks)}
    gens = [_min_gens(g, m) for m in masks]
    class_of = [-1] * len(masks)
    classes = []
    for i, m in enumerate(masks):
        if class_of[i] >= 0:
            continue
        orbit, frontier = {m}, [m]
        while frontier:
            nxt = []
            for y in frontier:
                for t in g.gen_ids:
                    z = g.conjugate_mask(y, t)
                    if z not in orbit:
                        orbit.add(z)
                        nxt.append(z)
            frontier = nxt
        members = sorted(ids[z] for z in orbit)
        for k in members:
            class_of[k] = len(classes)
        classes.append(members)
    names = []
    for m in masks:
        eo = Counter(g.element_order(x) for x in bits(m))
        names.append(structure_name(popcount(m), eo))
    return SubgroupTable(g, masks, orders, classes, class_of, names, gens)


def subgroup_lattice_proper(table: SubgroupTable) -> Poset:
    """Proper nontrivial subgroups under inclusion; labels are subgroup ids."""
    inner = list(range(1, len(table) - 1))
    if table.group.order == 1:
        inner = []
    pos = {s: k for k, s in enumerate(inner)}
    below = []
    for s in inner:
        m = table.masks[s]
        b = 0
        for t in inner:
            if t != s and table.masks[t] & ~m == 0:
                b |= 1 << pos[t]
        below.append(b)
    return Poset(inner, below)


def subgroup_lattice_full(table: SubgroupTable) -> Poset:
    ids = list(range(len(table)))
    below = []
    for s in ids:
        m = table.masks[s]
        below.append(sum(1 << t for t in ids if t != s and table.masks[t] & ~m == 0))
    return Poset(ids, below)


@dataclass(frozen=True, order=True)
class Coset:
    """Left coset x*H with canonical (smallest) representative ``rep``."""

    subgroup: int
    rep: int

    def __str__(self):
        return f"{self.rep}H{self.subgroup}"


@dataclass
class CosetPoset:
    table: SubgroupTable
    poset: Poset
    masks: list  # element bitset per poset element
    punctured: bool

    def __len__(self):
        return len(self.poset)


def _coset_ids(table: SubgroupTable, h: int) -> list:
    """For subgroup h: the canonical representative of x*h for every element x."""
    g = table.group
    hm = list(bits(table.masks[h]))
    rep = [-1] * g.order
    for x in range(g.order):
        if rep[x] >= 0:
            continue
        members = [g.mul[x][y] for y in hm]
        r = min(members)
        for z in members:
            rep[z] = r
    return rep


def coset_poset(table: SubgroupTable, punctured: bool = False, max_poset: int = DEFAULT_MAX_POSET,
                subgroups: Sequence[int] | None = None) -> CosetPoset:
    """Cosets xH of proper subgroups H under inclusion.

    ``subgroups`` restricts to the proper subgroups of one subgroup (ids in
    ``table``); the resulting poset is the coset poset of that subgroup.
    ``punctured`` drops the singletons.
    """
    g = table.group
    if subgroups is None:
        top = table.whole
        subs = list(range(len(table) - 1))
    else:
        subs = sorted(subgroups, key=lambda s: table.orders[s])
        top = subs[-1]
        subs = subs[:-1]
    top_mask = table.masks[top]
    if punctured:
        subs = [s for s in subs if s != table.trivial]
    size = sum(table.orders[top] // table.orders[s] for s in subs)
    if size > max_poset:
        raise OrderCapExceeded(f"coset poset would have {size} elements (cap {max_poset})")
    reps = {s: _coset_ids(table, s) for s in subs}
    labels, masks = [], []
    pos: dict = {}
    for s in subs:
        for x in bits(top_mask):
            r = reps[s][x]
            c = Coset(s, r)
            if c in pos:
                continue
            pos[c] = len(labels)
            labels.append(c)
            masks.append(sum(1 << g.mul[r][y] for y in bits(table.masks[s])))
    below = []
    for c, m in zip(labels, masks):
        b = 0
        K = table.masks[c.subgroup]
        for s in subs:
            if s == c.subgroup or table.masks[s] & ~K:
                continue
            rs = reps[s]
            for x in bits(m):
                b |= 1 << pos[Coset(s, rs[x])]
        below.append(b)
    return CosetPoset(table, Poset(labels, below), masks, punctured)


def fiber_isomorphism_key(cp: CosetPoset, x: Coset) -> int:
    """Conjugacy class of the subgroup under ``x``; equal keys give isomorphic lower fibers."""
    return cp.table.class_of[x.subgroup]


# catalog ------------------------------------------------------------------

def _cyclic(n: int):
    return n, ["(" + " ".join(str(i) for i in range(1, n + 1)) + ")"] if n > 1 else []


def _psl27():
    # PSL(2,7) on the projective line F7 u {inf}; point x -> x+1, inf -> 8
    def idx(x):
        return 7 if x is None else x

    def mk(f):
        img = [0] * 8
        for x in list(range(7)) + [None]:
            img[idx(x)] = idx(f(x))
        return tuple(img)

    t = mk(lambda x: None if x is None else (x + 1) % 7)
    d = mk(lambda x: None if x is None else (2 * x) % 7)
    s = mk(lambda x: 0 if x is None else (None if x == 0 else (-pow(x, 5, 7)) % 7))
    return 8, [t, d, s]


CATALOG = {
    "S3": lambda: (3, ["(1 2)", "(1 2 3)"]),
    "Z6": lambda: _cyclic(6),
    "Z12": lambda: _cyclic(12),
    "D8": lambda: (4, ["(1 2 3 4)", "(1 3)"]),
    "Q8": lambda: (8, ["(1 2 4 7)(3 6 8 5)", "(1 3 4 8)(2 5 7 6)"]),
    "S4": lambda: (4, ["(1 2 3 4)", "(1 2)"]),
    "A4": lambda: (4, ["(1 2 3)", "(2 3 4)"]),
    "A5": lambda: (5, ["(1 2 3 4 5)", "(1 2 3)"]),
    "PSL27": _psl27,
    "Z2^3": lambda: (6, ["(1 2)", "(3 4)", "(5 6)"]),
}
CATALOG_ORDERS = {"S3": 6, "Z6": 6, "Z12": 12, "D8": 8, "Q8": 8, "S4": 24, "A4": 12, "A5": 60, "PSL27": 168, "Z2^3": 8}
SOLVABLE = ("Z6", "Z12", "D8", "Q8", "S4", "A4", "Z2^3")


def catalog_group(name: str, max_order: int = DEFAULT_MAX_ORDER) -> PermGroup:
    """Named group; ``Zn`` gives the cyclic group of order n for any n."""
    key = name.replace("PSL(2,7)", "PSL27").replace("(Z2)^3", "Z2^3")
    if key in CATALOG:
        n, gens = CATALOG[key]()
    elif re.fullmatch(r"Z\d+", key):
        n, gens = _cyclic(int(key[1:]))
    else:
        raise GroupInputError(f"unknown catalog group {name!r}; known: {sorted(CATALOG)} or Zn")
    g = group_from_generators(n, gens, max_order=max_order, name=key)
    expected = CATALOG_ORDERS.get(key)
    if expected is not None and g.order != expected:
        raise AssertionError(f"catalog {key} has order {g.order}, expected {expected}")
    return g


def parse_group(text: str, max_order: int = DEFAULT_MAX_ORDER) -> PermGroup:
    deg, gens = None, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        if key == "deg":
            try:
                deg = int(rest)
            except ValueError:
                raise GroupInputError(f"line {lineno}: bad degree {rest!r}") from None
        elif key == "gen":
            if deg is None:
                raise GroupInputError(f"line {lineno}: 'gen' before 'deg'")
            gens.append(parse_cycles(rest, deg))
        else:
            raise GroupInputError(f"line {lineno}: cannot parse {raw!r}")
    if deg is None:
        raise GroupInputError("missing 'deg' line")
    return PermGroup(deg, gens, max_order=max_order)


def format_group(g: PermGroup) -> str:
    return f"deg {g.degree}\n" + "".join(f"gen {format_cycles(p)}\n" for p in g.gens)
