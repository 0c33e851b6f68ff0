"""Symbolic calculus of modified normal bundles on rational and nodal curves.

An expression ``N_C(k)(D)[D1 -> F1]...[Dn -> Fn]`` is a :class:`ModBundleExpr`.
Linear-position facts (which named points are independent, which spans fill
the ambient space) are declared up front in a :class:`Facts` store carried by
the expression's :class:`Geometry`; rewrite rules consume facts and raise
:class:`MissingFact` if one is absent.

Every rule returns a :class:`RewriteStep` whose Euler-characteristic ledger is
asserted: chi(output) - chi(input) must equal the rule's own delta.
"""
from __future__ import annotations

import itertools
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .bn_arith import BNPair, chi_normal

# goals a replay can be working toward
INTERPOLATION = "INTERPOLATION"
H0_ZERO = "H0_ZERO"
H1_ZERO = "H1_ZERO"

TRUSTED = "TRUSTED-SEMICONTINUITY"
AXIOM = "AXIOM-BACKED"


class CalculusError(ValueError):
    pass


class MissingFact(CalculusError):
    pass


class NotTreeLike(CalculusError):
    pass


class LedgerError(CalculusError):
    pass


def name_key(s: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", s)]


# --------------------------------------------------------------------------
# split bundles on P^1


@dataclass(frozen=True)
class SplitBundle:
    """Splitting type of a direct sum of line bundles on P^1 (sorted descending)."""

    degrees: tuple[int, ...]

    def __post_init__(self):
        if not self.degrees:
            raise ValueError("a split bundle needs rank >= 1")
        object.__setattr__(self, "degrees",
                           tuple(sorted((int(a) for a in self.degrees), reverse=True)))

    @classmethod
    def of(cls, degrees: Iterable[int]) -> "SplitBundle":
        return cls(tuple(degrees))

    @property
    def rank(self) -> int:
        return len(self.degrees)

    @property
    def deg(self) -> int:
        return sum(self.degrees)

    @property
    def chi(self) -> int:
        return sum(a + 1 for a in self.degrees)

    @property
    def h0(self) -> int:
        return sum(max(0, a + 1) for a in self.degrees)

    @property
    def h1(self) -> int:
        return sum(max(0, -a - 1) for a in self.degrees)

    @property
    def is_balanced(self) -> bool:
        return self.degrees[0] - self.degrees[-1] <= 1

    def twist(self, n: int) -> "SplitBundle":
        return SplitBundle(tuple(a + n for a in self.degrees))

    def __str__(self):
        return "{" + ",".join(str(a) for a in self.degrees) + "}"

    def to_json(self):
        return {"split": list(self.degrees), "rank": self.rank, "chi": self.chi,
                "h0": self.h0, "h1": self.h1}


def interpolation_split(s: SplitBundle) -> bool:
    """Interpolation for a sum of line bundles on P^1: balanced with min >= -1."""
    return s.is_balanced and s.degrees[-1] >= -1


def interpolation_oracle(s: SplitBundle) -> bool:
    """Brute force: h1(E) = 0 and every twist E(-n) has h0 = 0 or h1 = 0."""
    if s.h1:
        return False
    top = max(s.degrees) + 2
    for n in range(0, top + 1):
        t = s.twist(-n)
        if t.h0 and t.h1:
            return False
    return True


# --------------------------------------------------------------------------
# geometry: components, nodes, marks, position facts


@dataclass(frozen=True)
class Component:
    name: str
    kind: str  # line | conic | curve
    d: int
    g: int = 0
    r: int = 4

    def __post_init__(self):
        if self.kind not in ("line", "conic", "curve"):
            raise CalculusError(f"unknown component kind {self.kind!r}")
        if self.kind == "line" and (self.d, self.g) != (1, 0):
            raise CalculusError("a line has degree 1 and genus 0")
        if self.kind == "conic" and (self.d, self.g) != (2, 0):
            raise CalculusError("a conic has degree 2 and genus 0")


@dataclass(frozen=True)
class Node:
    """A node ``point`` joining components ``a`` and ``b``.

    ``dir_a`` names a point on the tangent line of ``a`` at the node; it is the
    target of the Hartshorne-Hirschowitz modification when restricting to ``b``.
    """

    point: str
    a: str
    b: str
    dir_a: str
    dir_b: str

    def other(self, comp: str) -> str:
        return self.b if comp == self.a else self.a

    def direction_of(self, comp: str) -> str:
        return self.dir_a if comp == self.a else self.dir_b


@dataclass(frozen=True)
class Facts:
    indep: frozenset = frozenset()    # sets of names in general position
    full: frozenset = frozenset()     # frozensets whose span is everything
    spans: frozenset = frozenset()    # side-condition token sets spanning P^r
    summand: tuple = ()               # (generator, summand) for the conic pattern
    notes: tuple = ()

    def summand_of(self, gen: str) -> str | None:
        for g, s in self.summand:
            if g == gen:
                return s
        return None

    def with_summand(self, gen: str, s: str) -> "Facts":
        rest = tuple((g, t) for g, t in self.summand if g != gen)
        return replace(self, summand=rest + ((gen, s),))

    def add(self, kind: str, names: Iterable[str]) -> "Facts":
        fs = frozenset(names)
        if kind == "indep":
            return replace(self, indep=self.indep | {fs})
        if kind == "full":
            return replace(self, full=self.full | {fs})
        if kind == "span":
            return replace(self, spans=self.spans | {fs})
        raise CalculusError(f"unknown fact kind {kind!r}")

    def to_json(self):
        def srt(sets):
            return sorted((sorted(s, key=name_key) for s in sets))
        return {"indep": srt(self.indep), "full": srt(self.full),
                "span": srt(self.spans),
                "summand": {g: s for g, s in sorted(self.summand)}}


@dataclass(frozen=True)
class Geometry:
    components: tuple = ()   # Component
    nodes: tuple = ()        # Node
    marks: tuple = ()        # (point, component)
    facts: Facts = Facts()

    def comp(self, name: str) -> Component:
        for c in self.components:
            if c.name == name:
                return c
        raise CalculusError(f"unknown component {name!r}")

    def node(self, point: str) -> Node | None:
        for n in self.nodes:
            if n.point == point:
                return n
        return None

    def internal_nodes(self, comps: frozenset) -> list[Node]:
        return [n for n in self.nodes if n.a in comps and n.b in comps]

    def home(self, point: str, comps: frozenset) -> str | None:
        """Component of ``comps`` carrying ``point`` (None if not on it)."""
        n = self.node(point)
        if n is not None:
            if n.a in comps:
                return n.a
            if n.b in comps:
                return n.b
        for p, c in self.marks:
            if p == point and c in comps:
                return c
        if len(comps) == 1:
            return next(iter(comps))
        return None

    def with_marks(self, pairs: Iterable[tuple[str, str]]) -> "Geometry":
        pairs = list(pairs)
        names = {p for p, _ in pairs}
        kept = tuple((p, c) for p, c in self.marks if p not in names)
        return replace(self, marks=kept + tuple(pairs))

    def with_facts(self, facts: Facts) -> "Geometry":
        return replace(self, facts=facts)

    def with_component(self, comp: Component) -> "Geometry":
        kept = tuple(c for c in self.components if c.name != comp.name)
        return replace(self, components=kept + (comp,))


def single_geometry(name: str, kind: str, d: int, g: int = 0, r: int = 4,
                    facts: Facts = Facts()) -> Geometry:
    return Geometry((Component(name, kind, d, g, r),), (), (), facts)


# --------------------------------------------------------------------------
# expressions


def _div(items: Mapping[str, int] | Iterable) -> tuple:
    d = dict(items) if not isinstance(items, dict) else items
    return tuple(sorted(((p, int(c)) for p, c in d.items() if c), key=lambda t: name_key(t[0])))


def div_add(a: tuple, b: tuple, sign: int = 1) -> tuple:
    acc = Counter(dict(a))
    for p, c in b:
        acc[p] += sign * c
    return _div(acc)


def div_deg(a: tuple) -> int:
    return sum(c for _, c in a)


def div_text(a: tuple) -> str:
    out = []
    for p, c in a:
        sign = "-" if c < 0 else "+"
        m = abs(c)
        term = (str(m) if m != 1 else "") + p
        out.append(sign + term)
    s = "".join(out)
    return s[1:] if s.startswith("+") else s


@dataclass(frozen=True)
class Mod:
    divisor: tuple           # ((point, multiplicity >= 1), ...)
    target: frozenset        # generator names

    def __post_init__(self):
        object.__setattr__(self, "divisor", _div(dict(self.divisor)))
        object.__setattr__(self, "target", frozenset(self.target))
        if not self.divisor:
            raise CalculusError("a modification needs a nonempty divisor")
        if any(c < 1 for _, c in self.divisor):
            raise CalculusError("modification multiplicities must be >= 1")
        if not self.target:
            raise CalculusError("a modification needs a nonempty target")

    @classmethod
    def make(cls, divisor, target) -> "Mod":
        if isinstance(divisor, str):
            divisor = {divisor: 1}
        if isinstance(target, str):
            target = [target]
        return cls(_div(dict(divisor)), frozenset(target))

    @property
    def deg(self) -> int:
        return div_deg(self.divisor)

    @property
    def points(self) -> list[str]:
        return [p for p, _ in self.divisor]

    def key(self):
        return (self.divisor, tuple(sorted(self.target, key=name_key)))

    def __str__(self):
        return f"[{div_text(self.divisor)}->{'+'.join(sorted(self.target, key=name_key))}]"

    def to_json(self):
        return {"divisor": dict(self.divisor),
                "target": sorted(self.target, key=name_key)}


@dataclass(frozen=True)
class ModBundleExpr:
    geometry: Geometry = field(compare=False, repr=False)
    comps: frozenset
    twist: int = 0
    divisor: tuple = ()
    mods: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "comps", frozenset(self.comps))
        object.__setattr__(self, "divisor", _div(dict(self.divisor)))
        object.__setattr__(self, "mods", tuple(self.mods))
        if not self.comps:
            raise CalculusError("empty carrier")
        rs = {self.geometry.comp(c).r for c in self.comps}
        if len(rs) != 1:
            raise CalculusError("components live in different ambient spaces")
        self._check_support()
        self.check_tree_like()

    # ---- carrier arithmetic
    @property
    def r(self) -> int:
        return self.geometry.comp(next(iter(self.comps))).r

    @property
    def rank(self) -> int:
        return self.r - 1

    @property
    def d(self) -> int:
        return sum(self.geometry.comp(c).d for c in self.comps)

    @property
    def g(self) -> int:
        comps = [self.geometry.comp(c) for c in self.comps]
        nodes = self.geometry.internal_nodes(self.comps)
        return sum(c.g for c in comps) + len(nodes) - len(comps) + 1

    @property
    def facts(self) -> Facts:
        return self.geometry.facts

    def comp_list(self) -> list[str]:
        return sorted(self.comps, key=name_key)

    def nodes(self) -> list[Node]:
        return self.geometry.internal_nodes(self.comps)

    # ---- position facts
    def target_rank(self, gens: frozenset) -> int:
        gens = frozenset(gens)
        f = self.facts
        if any(s <= gens for s in f.full):
            return self.rank
        if len(gens) == 1:
            return 1
        if any(gens <= s for s in f.indep):
            # declared general position: any subset spans as much as it can
            return min(len(gens), self.rank)
        raise MissingFact("no position fact gives the span of "
                          + "+".join(sorted(gens, key=name_key)))

    def corank(self, m: Mod) -> int:
        return self.rank - self.target_rank(m.target)

    def independent(self, targets: list[frozenset]) -> bool:
        union = frozenset().union(*targets)
        try:
            total = self.target_rank(union)
            parts = sum(self.target_rank(t) for t in targets)
        except MissingFact:
            return False
        return total == parts

    def check_tree_like(self):
        by_point: dict[str, list[frozenset]] = {}
        for m in self.mods:
            for p in m.points:
                by_point.setdefault(p, []).append(m.target)
        for p, targets in by_point.items():
            n = len(targets)
            for size in range(2, n + 1):
                for idx in itertools.combinations(range(n), size):
                    sub = [targets[i] for i in idx]
                    nested = any(a <= b or b <= a for a, b in itertools.combinations(sub, 2))
                    if nested or self.independent(sub):
                        continue
                    shown = ", ".join("+".join(sorted(t, key=name_key)) for t in sub)
                    raise NotTreeLike(f"modifications at {p} toward {{{shown}}} are "
                                      "neither nested nor provably independent")

    def _check_support(self):
        nodes = {n.point for n in self.nodes()}
        for p, _ in self.divisor:
            if p in nodes:
                raise CalculusError(f"divisor supported at node {p}")
            if self.geometry.home(p, self.comps) is None:
                raise CalculusError(f"point {p} is not on the carrier")
        for m in self.mods:
            for p in m.points:
                if p in nodes:
                    raise CalculusError(f"modification at node {p}; use hh_restrict")
                if self.geometry.home(p, self.comps) is None:
                    raise CalculusError(f"point {p} is not on the carrier")

    # ---- Euler characteristic
    @property
    def chi(self) -> int:
        base = chi_normal(BNPair(self.d, self.g, self.r), self.twist)
        return (base + self.rank * div_deg(self.divisor)
                - sum(self.corank(m) * m.deg for m in self.mods))

    # ---- constructors
    def evolve(self, **kw) -> "ModBundleExpr":
        return replace(self, **kw)

    def with_mods(self, mods) -> "ModBundleExpr":
        return replace(self, mods=tuple(mods))

    def points_on(self, comp: str) -> set[str]:
        pts = {p for p, _ in self.divisor}
        for m in self.mods:
            pts.update(m.points)
        return {p for p in pts if self.geometry.home(p, self.comps) == comp}

    # ---- presentation
    def carrier_text(self) -> str:
        names = self.comp_list()
        return names[0] if len(names) == 1 else "{" + "+".join(names) + "}"

    def __str__(self):
        s = "N_" + self.carrier_text()
        if self.twist:
            s += f"({self.twist})"
        if self.divisor:
            s += f"({div_text(self.divisor)})"
        return s + "".join(str(m) for m in self.mods)

    def canonical(self):
        return (tuple(self.comp_list()), self.twist, self.divisor,
                tuple(sorted(Counter(m.key() for m in self.mods).items())))

    def same_as(self, other: "ModBundleExpr") -> bool:
        return self.canonical() == other.canonical()

    def to_json(self):
        return {"text": str(self), "carrier": self.comp_list(), "d": self.d,
                "g": self.g, "r": self.r, "rank": self.rank, "chi": self.chi,
                "twist": self.twist, "divisor": dict(self.divisor),
                "mods": [m.to_json() for m in self.mods]}


# --------------------------------------------------------------------------
# rewrite steps


@dataclass
class RewriteStep:
    rule: str
    anchor: str
    input: ModBundleExpr
    output: object  # ModBundleExpr | SplitBundle
    delta: int
    side_conditions: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    rank_delta: int = 0

    @property
    def chi_before(self) -> int:
        return self.input.chi

    @property
    def chi_after(self) -> int:
        return self.output.chi

    def check_ledger(self):
        if self.chi_after - self.chi_before != self.delta:
            raise LedgerError(
                f"{self.rule}: chi {self.chi_before} -> {self.chi_after}, "
                f"rule delta {self.delta}")
        if self.output.rank - self.input.rank != self.rank_delta:
            raise LedgerError(f"{self.rule}: rank {self.input.rank} -> {self.output.rank}")
        return self

    def to_json(self):
        return {"rule": self.rule, "anchor": self.anchor,
                "side_conditions": list(self.side_conditions),
                "chi_before": self.chi_before, "chi_after": self.chi_after,
                "delta": self.delta, "rank_before": self.input.rank,
                "rank_after": self.output.rank, "flags": list(self.flags),
                "notes": list(self.notes),
                "input": str(self.input), "output": str(self.output)}


def _step(rule, anchor, e, out, delta, side=(), flags=(), notes=(), rank_delta=0):
    return RewriteStep(rule, anchor, e, out, delta, list(side), list(flags),
                       list(notes), rank_delta).check_ledger()


def find_mod(e: ModBundleExpr, m: Mod, skip: Iterable[int] = ()) -> int:
    skip = set(skip)
    for i, x in enumerate(e.mods):
        if i not in skip and x.key() == m.key():
            return i
    raise CalculusError(f"modification {m} not present in {e}")


# ---- reordering modifications, commuting with twists

def commute(e: ModBundleExpr, order: list[int]) -> RewriteStep:
    if sorted(order) != list(range(len(e.mods))):
        raise CalculusError("commute needs a permutation of the modifications")
    out = e.with_mods([e.mods[i] for i in order])
    return _step("commute", "commuting modifications", e, out, 0)


def twist(e: ModBundleExpr, k: int = 0, divisor: Mapping[str, int] | None = None) -> RewriteStep:
    div = _div(dict(divisor or {}))
    out = e.evolve(twist=e.twist + k, divisor=div_add(e.divisor, div))
    delta = e.rank * (k * e.d + div_deg(div))
    return _step("twist_commute", "commuting with twists", e, out, delta)


# ---- combining modifications, and the reverse splits

def combine_same_divisor(e: ModBundleExpr, a: Mod, b: Mod) -> RewriteStep:
    i = find_mod(e, a)
    j = find_mod(e, b, skip=[i])
    ma, mb = e.mods[i], e.mods[j]
    if ma.divisor != mb.divisor:
        raise CalculusError("combine_same_divisor needs equal divisors")
    if not e.independent([ma.target, mb.target]):
        raise MissingFact(f"targets of {ma} and {mb} are not provably independent")
    merged = Mod(ma.divisor, ma.target | mb.target)
    mods = [m for k, m in enumerate(e.mods) if k not in (i, j)]
    mods.insert(min(i, j), merged)
    out = e.evolve(mods=tuple(mods), divisor=div_add(e.divisor, ma.divisor, -1))
    return _step("combine_same_divisor", "combining modifications at the same divisor",
                 e, out, 0, side=[f"independent: {'+'.join(sorted(ma.target, key=name_key))}"
                                  f" | {'+'.join(sorted(mb.target, key=name_key))}"])


def split_same_divisor(e: ModBundleExpr, m: Mod, part: Iterable[str]) -> RewriteStep:
    i = find_mod(e, m)
    part = frozenset(part)
    rest = m.target - part
    if not part or not rest or not part <= m.target:
        raise CalculusError("split needs a proper nonempty sub-target")
    if not e.independent([part, rest]):
        raise MissingFact("split pieces are not provably independent")
    mods = list(e.mods)
    mods[i:i + 1] = [Mod(m.divisor, part), Mod(m.divisor, rest)]
    out = e.evolve(mods=tuple(mods), divisor=div_add(e.divisor, m.divisor))
    return _step("split_same_divisor", "combining modifications at the same divisor (reverse)",
                 e, out, 0)


def combine_same_target(e: ModBundleExpr, a: Mod, b: Mod) -> RewriteStep:
    i = find_mod(e, a)
    j = find_mod(e, b, skip=[i])
    ma, mb = e.mods[i], e.mods[j]
    if ma.target != mb.target:
        raise CalculusError("combine_same_target needs equal targets")
    merged = Mod(div_add(ma.divisor, mb.divisor), ma.target)
    mods = [m for k, m in enumerate(e.mods) if k not in (i, j)]
    mods.insert(min(i, j), merged)
    out = e.with_mods(mods)
    return _step("combine_same_target", "combining modifications to the same bundle",
                 e, out, 0)


def split_same_target(e: ModBundleExpr, m: Mod, first: Mapping[str, int]) -> RewriteStep:
    i = find_mod(e, m)
    first = _div(dict(first))
    second = div_add(m.divisor, first, -1)
    if not first or not second or any(c < 0 for _, c in second):
        raise CalculusError("split_same_target needs a proper sub-divisor")
    mods = list(e.mods)
    mods[i:i + 1] = [Mod(first, m.target), Mod(second, m.target)]
    out = e.with_mods(mods)
    return _step("split_same_target", "combining modifications to the same bundle (reverse)",
                 e, out, 0)


def saturate_full_space(e: ModBundleExpr, m: Mod) -> RewriteStep:
    i = find_mod(e, m)
    if e.target_rank(e.mods[i].target) != e.rank:
        raise MissingFact(f"target of {m} does not provably fill the fibre")
    out = e.with_mods([x for k, x in enumerate(e.mods) if k != i])
    return _step("saturate_full_space", "modification toward a spanning target is trivial",
                 e, out, 0, side=[f"span of {'+'.join(sorted(m.target, key=name_key))} is everything"])


# ---- specialization

def limit_points(e: ModBundleExpr, subs: Mapping[str, str]) -> RewriteStep:
    """Specialize marked points or targets.  ``'@S'`` values assign a target
    direction to summand ``S`` of the conic decomposition."""
    geo = e.geometry
    plain = {}
    side = []
    for old, new in subs.items():
        if new.startswith("@"):
            geo = geo.with_facts(geo.facts.with_summand(old, new[1:]))
            side.append(f"{old} specialized into summand {new[1:]}")
        elif old != new:
            plain[old] = new

    def sd(div):
        acc = Counter()
        for p, c in div:
            acc[plain.get(p, p)] += c
        return _div(acc)

    moved = []
    for old, new in plain.items():
        home = geo.home(old, e.comps)
        if home is not None and geo.home(new, e.comps) is None:
            moved.append((new, home))
    if moved:
        geo = geo.with_marks(moved)
    mods = [Mod(sd(m.divisor), frozenset(plain.get(t, t) for t in m.target)) for m in e.mods]
    out = ModBundleExpr(geo, e.comps, e.twist, sd(e.divisor), tuple(mods))
    side += [f"{o} -> {n}" for o, n in plain.items()]
    side.append("tree-like after specialization")
    return _step("limit_points", "semicontinuity under specialization", e, out, 0,
                 side=side, flags=[TRUSTED])


# ---- Hartshorne-Hirschowitz restriction

def hh_restrict(e: ModBundleExpr, comps: Iterable[str]) -> ModBundleExpr:
    """Restriction of the bundle on a nodal union to the sub-union ``comps``."""
    comps = frozenset(comps)
    if not comps <= e.comps:
        raise CalculusError("restriction to components outside the carrier")
    geo = e.geometry
    div = {p: c for p, c in e.divisor if geo.home(p, e.comps) in comps}
    mods = [m for m in e.mods if all(geo.home(p, e.comps) in comps for p in m.points)]
    for m in e.mods:
        homes = {geo.home(p, e.comps) in comps for p in m.points}
        if len(homes) > 1:
            raise CalculusError(f"{m} straddles the restriction")
    for n in e.nodes():
        ina, inb = n.a in comps, n.b in comps
        if ina == inb:
            continue
        here = n.a if ina else n.b
        there = n.other(here)
        div[n.point] = div.get(n.point, 0) + 1
        mods.append(Mod(((n.point, 1),), frozenset([n.direction_of(there)])))
    return ModBundleExpr(geo, comps, e.twist, _div(div), tuple(mods))


def boundary_nodes(e: ModBundleExpr, comp: str) -> list[Node]:
    return [n for n in e.nodes() if comp in (n.a, n.b)]


# ---- evaluation on a line or a conic


def evaluate_on_line_labeled(e: ModBundleExpr) -> list[tuple[str | None, int]]:
    if len(e.comps) != 1:
        raise CalculusError("evaluate_on_line needs a single line")
    comp = e.geometry.comp(next(iter(e.comps)))
    if comp.kind != "line":
        raise CalculusError(f"{comp.name} is not a line")
    gens = frozenset().union(*[m.target for m in e.mods]) if e.mods else frozenset()
    if len(gens) > e.rank:
        raise MissingFact("more target directions than the rank; no adapted hyperplanes")
    if len(gens) > 1 and not any(gens <= s for s in e.facts.indep):
        raise MissingFact("targets " + "+".join(sorted(gens, key=name_key))
                          + " are not declared independent")
    base = 1 + e.twist + div_deg(e.divisor)
    out = []
    for gname in sorted(gens, key=name_key):
        out.append((gname, base - sum(m.deg for m in e.mods if gname not in m.target)))
    for _ in range(e.rank - len(gens)):
        out.append((None, base - sum(m.deg for m in e.mods)))
    return out


def evaluate_on_line(e: ModBundleExpr) -> SplitBundle:
    return SplitBundle.of(a for _, a in evaluate_on_line_labeled(e))


CONIC_SUMMANDS = ("Q", "H1", "H2")


def evaluate_on_conic(e: ModBundleExpr) -> SplitBundle:
    if len(e.comps) != 1:
        raise CalculusError("evaluate_on_conic needs a single conic")
    comp = e.geometry.comp(next(iter(e.comps)))
    if comp.kind != "conic" or e.r != 4:
        raise CalculusError("evaluate_on_conic needs a conic in P^4")
    base = {"Q": 2 + e.twist, "H1": 1 + e.twist, "H2": 1 + e.twist}
    deg = {s: 2 * base[s] + div_deg(e.divisor) for s in CONIC_SUMMANDS}
    for m in e.mods:
        where = set()
        for gname in m.target:
            s = e.facts.summand_of(gname)
            if s not in CONIC_SUMMANDS:
                raise CalculusError(f"target {gname} is not specialized into a summand")
            where.add(s)
        for s in CONIC_SUMMANDS:
            if s not in where:
                deg[s] -= m.deg
    return SplitBundle.of(deg.values())


def evaluation_step(e: ModBundleExpr) -> RewriteStep:
    kind = e.geometry.comp(next(iter(e.comps))).kind if len(e.comps) == 1 else None
    if kind == "line":
        return _step("evaluate_on_line", "adapted hyperplane decomposition of N_L",
                     e, evaluate_on_line(e), 0,
                     side=["targets in linear general position (declared)"])
    if kind == "conic":
        return _step("evaluate_on_conic", "quadric/hyperplane decomposition of N_N",
                     e, evaluate_on_conic(e), 0,
                     side=["targets specialized into named summands"])
    raise CalculusError("evaluation needs a single line or conic")


# ---- secant peeling


def _line_setup(e: ModBundleExpr, line: str):
    if line not in e.comps or e.geometry.comp(line).kind != "line":
        raise CalculusError(f"{line} is not a line of the carrier")
    if len(e.comps) < 2:
        raise CalculusError("nothing to peel the line from")
    return boundary_nodes(e, line)


def _only_mod_on(e: ModBundleExpr, line: str, x: str) -> int:
    pts = e.points_on(line)
    if pts != {x}:
        raise CalculusError(f"{line} must carry only the point {x}; found {sorted(pts)}")
    if any(p == x for p, _ in e.divisor):
        raise CalculusError(f"{x} may not appear in the twist")
    idx = [i for i, m in enumerate(e.mods) if x in m.points]
    if len(idx) != 1 or e.mods[idx[0]].divisor != ((x, 1),):
        raise CalculusError(f"{line} needs exactly one modification [{x}->...]")
    return idx[0]


def peel_1_secant(e: ModBundleExpr, line: str, x: str) -> RewriteStep:
    nodes = _line_setup(e, line)
    if len(nodes) != 1:
        raise CalculusError(f"{line} is not 1-secant")
    if e.twist != -1:
        raise CalculusError("the 1-secant lemma is for the twist by O(-1)")
    p = nodes[0].point
    i = _only_mod_on(e, line, x)
    tgt = e.mods[i].target
    if e.target_rank(tgt | {x}) != 1 + e.target_rank(tgt):
        raise MissingFact(f"{'+'.join(sorted(tgt))} must lie off the tangent plane at {p}")
    mods = [m for k, m in enumerate(e.mods) if k != i]
    mods += [Mod(((p, 1),), frozenset([x])), Mod(((p, 1),), tgt | {x})]
    out = ModBundleExpr(e.geometry, e.comps - {line}, e.twist,
                        div_add(e.divisor, ((p, 1),)), tuple(mods))
    return _step("peel_1_secant", "1-secant lemma", e, out, 0,
                 side=[f"{line} meets the rest only at {p}",
                       f"{'+'.join(sorted(tgt))} off the tangent plane at {p}"])


def peel_2_secant(e: ModBundleExpr, line: str, x: str) -> RewriteStep:
    nodes = _line_setup(e, line)
    if len(nodes) != 2:
        raise CalculusError(f"{line} is not 2-secant")
    if e.twist != -1 or e.r != 4:
        raise CalculusError("the 2-secant lemma is for N(-1) in P^4")
    p, q = sorted((n.point for n in nodes), key=name_key)
    i = _only_mod_on(e, line, x)
    tgt = e.mods[i].target
    if len(tgt) != 1:
        raise CalculusError("the 2-secant lemma modifies toward a single point")
    need = frozenset({f"T_{p}", f"T_{q}"}) | tgt
    if need not in e.facts.spans:
        raise MissingFact(f"span fact missing: {' '.join(sorted(need))}")
    mods = [m for k, m in enumerate(e.mods) if k != i]
    mods += [Mod(((p, 1),), frozenset([q])), Mod(((q, 1),), frozenset([p]))]
    out = ModBundleExpr(e.geometry, e.comps - {line}, e.twist, e.divisor, tuple(mods))
    return _step("peel_2_secant", "2-secant lemma", e, out, -e.rank,
                 side=[f"tangent lines at {p}, {q} and {next(iter(tgt))} span P^4"],
                 notes=["one general point y on the line is absorbed"])


def _restricted_line(e: ModBundleExpr, line: str):
    here = hh_restrict(e, [line])
    return here, evaluate_on_line_labeled(here)


def _rest_after_line(e: ModBundleExpr, line: str, vanish: bool, extra: Iterable[Mod] = ()):
    rest = hh_restrict(e, e.comps - {line})
    div = rest.divisor
    if vanish:
        for n in boundary_nodes(e, line):
            div = div_add(div, ((n.point, 1),), -1)
    return ModBundleExpr(rest.geometry, rest.comps, rest.twist, div,
                         rest.mods + tuple(extra))


def peel_line_h0_zero(e: ModBundleExpr, line: str, anchor: str = "gluing with a line "
                      "whose restriction has no sections", rule: str = "peel_line_h0_zero") -> RewriteStep:
    _line_setup(e, line)
    _, labeled = _restricted_line(e, line)
    split = SplitBundle.of(a for _, a in labeled)
    if split.h0:
        raise CalculusError(f"restriction to {line} is {split}, which has sections")
    out = _rest_after_line(e, line, vanish=True)
    return _step(rule, anchor, e, out, split.h1,
                 side=[f"restriction to {line} is {split} with h0 = 0"])


def peel_3_secant_twist(e: ModBundleExpr, line: str) -> RewriteStep:
    nodes = _line_setup(e, line)
    if len(nodes) != 3:
        raise CalculusError(f"{line} is not 3-secant")
    if e.twist != -1:
        raise CalculusError("the twisted 3-secant lemma needs N(-1)")
    return peel_line_h0_zero(e, line, anchor="twisted 3-secant lemma",
                             rule="peel_3_secant_twist")


def peel_3_secant(e: ModBundleExpr, line: str) -> RewriteStep:
    nodes = _line_setup(e, line)
    if len(nodes) != 3:
        raise CalculusError(f"{line} is not 3-secant")
    _, labeled = _restricted_line(e, line)
    split = SplitBundle.of(a for _, a in labeled)
    if split.degrees != (2,) * e.rank:
        raise CalculusError(f"restriction to {line} is {split}, not O(2)^{e.rank}")
    out = _rest_after_line(e, line, vanish=False)
    return _step("peel_3_secant", "3-secant lemma", e, out,
                 e.rank * len(nodes) - split.chi,
                 side=[f"restriction to {line} is {split}; evaluation at the nodes is an isomorphism"])


def h0_glue_line(e: ModBundleExpr, line: str) -> RewriteStep:
    nodes = _line_setup(e, line)
    if len(nodes) != 1:
        raise CalculusError(f"{line} must meet the rest at a single node")
    p = nodes[0].point
    _, labeled = _restricted_line(e, line)
    split = SplitBundle.of(a for _, a in labeled)
    zero = [lab for lab, a in labeled if a == 0]
    if len(zero) != 1 or any(a > 0 for _, a in labeled):
        raise CalculusError(f"restriction to {line} is {split}; need exactly one trivial summand")
    if zero[0] is None:
        raise CalculusError("the section lies in a summand with no named direction")
    out = _rest_after_line(e, line, vanish=False,
                           extra=[Mod(((p, 1),), frozenset([zero[0]]))])
    return _step("h0_glue_line", "gluing sections across a node", e, out, split.h1,
                 side=[f"restriction to {line} is {split}; its section points to {zero[0]}"
                       f" and does not vanish at {p}"])


# ---- single-divisor criterion

def check_one_apply(e: ModBundleExpr, points: list[tuple[str, str]]) -> tuple[RewriteStep, str]:
    chi, rk = e.chi, e.rank
    if chi < 0:
        raise CalculusError("check_one needs chi >= 0")
    res = chi % rk
    if res == 0:
        n, goal = chi // rk, H0_ZERO
    elif res == 1:
        n, goal = chi // rk, H1_ZERO
    elif res == rk - 1:
        n, goal = -(-chi // rk), H0_ZERO
    else:
        raise CalculusError(f"chi = {chi} is not within one of a multiple of {rk}")
    if len(points) != n:
        raise CalculusError(f"check_one needs {n} general points, got {len(points)}")
    geo = e.geometry.with_marks(points)
    div = div_add(e.divisor, tuple((p, 1) for p, _ in points), -1)
    out = ModBundleExpr(geo, e.comps, e.twist, div, e.mods)
    step = _step("check_one_apply", "single-divisor criterion", e, out, -rk * n,
                 side=[f"chi = {chi} = {chi // rk}*{rk} + {res}", f"goal {goal}",
                       "input assumed nonspecial"])
    return step, goal


# ---- degenerations


def canonical_attach(e: ModBundleExpr, comps: Iterable[str], points: list[str]) -> RewriteStep:
    comps = frozenset(comps)
    if len(e.comps) != 1 or e.mods or e.divisor or e.twist != -1:
        raise CalculusError("canonical_attach starts from N_Y(-1) on a single curve")
    geo = e.geometry
    out = ModBundleExpr(geo, comps, -1, (),
                        tuple(Mod(((p, 1),), frozenset([p + "'"])) for p in points))
    if len(points) != 3:
        raise CalculusError("the canonical degeneration uses three 2-secant lines")
    lines = {geo.home(p, comps) for p in points}
    if len(lines) != 3 or any(geo.comp(c).kind != "line" for c in lines):
        raise CalculusError("each p_i must lie on its own line L_i")
    if (e.d, e.g) != (out.d + 8, out.g + 10):
        raise CalculusError(f"({e.d},{e.g}) is not C + canonical curve for C=({out.d},{out.g})")
    return _step("canonical_attach", "canonical-curve degeneration", e, out, -4 * e.rank,
                 side=[f"({e.d},{e.g}) = ({out.d},{out.g}) + (8,5) glued at 6 points",
                       "restriction to D is a sum of K_D(p_i+q_i) (axiom-backed)"],
                 flags=[AXIOM], notes=["four general points x, y, z, w are absorbed"])


def quartic_attach(e: ModBundleExpr, comp: str, pairs: list[tuple[str, str]],
                   variant: str) -> RewriteStep:
    if len(e.comps) != 1 or e.mods:
        raise CalculusError("quartic_attach starts from a single curve")
    geo = e.geometry
    X = geo.comp(comp)
    if (e.d, e.g) != (X.d + 4, X.g + 5):
        raise CalculusError(f"({e.d},{e.g}) is not X + rational quartic for X=({X.d},{X.g})")
    if len(pairs) != 3:
        raise CalculusError("three 2-secant lines")
    mods = []
    for p, q in pairs:
        mods += [Mod(((p, 1),), frozenset([q])), Mod(((q, 1),), frozenset([p]))]
    if variant == "twisted":
        if e.twist != -1 or e.divisor:
            raise CalculusError("twisted variant starts from N_Y(-1)")
        out = ModBundleExpr(geo, frozenset([comp]), -1, (), tuple(mods))
        delta = -5 * e.rank
        note = "general points on M (two) and on each L_i (one) are absorbed"
    elif variant == "untwisted":
        if e.twist != 0 or e.divisor:
            raise CalculusError("untwisted variant starts from N_Y")
        div = tuple((p, 1) for pq in pairs for p in pq)
        out = ModBundleExpr(geo, frozenset([comp]), 0, div, tuple(mods))
        delta = -3 * e.rank
        note = "one general point on each L_i is absorbed"
    elif variant == "twisted_h0":
        if e.twist != -1 or div_deg(e.divisor) != -5 or any(c != -1 for _, c in e.divisor):
            raise CalculusError("h0 variant starts from N_Y(-1) minus five general points")
        out = ModBundleExpr(geo, frozenset([comp]), -1, (), tuple(mods))
        delta = 0
        note = "the five general points specialize two onto M and one onto each L_i"
    else:
        raise CalculusError(f"unknown quartic variant {variant!r}")
    return _step("quartic_attach", "rational quartic degeneration", e, out, delta,
                 side=[f"({e.d},{e.g}) = ({X.d},{X.g}) + M u L1 u L2 u L3 at 6 points",
                       "L_i and M span P^4"], notes=[note])


def mod_on_secant(e: ModBundleExpr, comp: str, x: str, y: str, p1: str, q1: str,
                  p2: str, q2: str, D1: Mapping[str, int], D2: Mapping[str, int]) -> RewriteStep:
    if len(e.comps) != 1 or e.twist != -1:
        raise CalculusError("mod_on_secant acts on N_X'(-1) on a single curve")
    geo = e.geometry
    C = geo.comp(comp)
    if (e.d, e.g) != (C.d + 1, C.g + 1):
        raise CalculusError("the secant degeneration drops degree and genus by one")
    want = [Mod(((p1, 1),), frozenset([q1])), Mod(((p2, 1),), frozenset([q2]))]
    D1, D2 = _div(dict(D1)), _div(dict(D2))
    if D1:
        want.append(Mod(D1, frozenset([p1])))
    if D2:
        want.append(Mod(D2, frozenset([p2])))
    used = []
    for m in want:
        used.append(find_mod(e, m, skip=used))
    rest = [m for k, m in enumerate(e.mods) if k not in used]
    for m in rest:
        if {p1, p2} & (set(m.points) | m.target):
            raise CalculusError(f"{m} involves the points moving onto the line")
    if any(p in (p1, p2) for p, _ in e.divisor):
        raise CalculusError("twist supported at the points moving onto the line")
    new = [Mod(((x, 1),), frozenset([y])), Mod(((y, 2),), frozenset([x]))]
    if D1:
        new.append(Mod(D1, frozenset([x])))
    if D2:
        new.append(Mod(D2, frozenset([x])))
    out = ModBundleExpr(geo, frozenset([comp]), -1, div_add(e.divisor, ((y, 1),)),
                        tuple(rest + new))
    return _step("mod_on_secant", "modifications on a 2-secant line", e, out, 0,
                 side=[f"{p1}, {p2} general on the secant line through {x}, {y}",
                       f"{q1}, {q2} general on {comp}"])


def project_from_point(e: ModBundleExpr, center: str, comp: str, goal: str) -> RewriteStep:
    if len(e.comps) != 1:
        raise CalculusError("projection acts on a single curve")
    geo = e.geometry
    P = geo.comp(comp)
    if (P.d, P.g, P.r) != (e.d - 1, e.g, e.r - 1):
        raise CalculusError("projection from a point of the curve drops degree and ambient by one")
    sub_deg = e.d + 2 + e.twist * e.d + div_deg(e.divisor)
    qdiv = div_add(e.divisor, ((center, e.twist + 1),))
    qmods = []
    for m in e.mods:
        if m.target == frozenset([center]):
            qdiv = div_add(qdiv, m.divisor, -1)
        elif center in m.target:
            raise CalculusError(f"{m} mixes the center with other directions")
        else:
            sub_deg -= m.deg
            qmods.append(m)
    quot = ModBundleExpr(geo, frozenset([comp]), e.twist, qdiv, tuple(qmods))
    sub_chi = sub_deg + 1 - e.g
    if sub_chi + quot.chi != e.chi:
        raise LedgerError("projection sequence does not balance")
    if goal == H0_ZERO:
        side = [f"sub line bundle of degree {sub_deg} has no sections (general of degree "
                f"{sub_deg} on genus {e.g}; axiom-backed)"]
        if sub_deg > e.g - 1:
            raise CalculusError("sub line bundle has sections")
    else:
        side = [f"sub line bundle of degree {sub_deg} is nonspecial and interpolates",
                "balanced extension (axiom-backed)"]
        if sub_deg < 2 * e.g - 1 and e.g > 0 and sub_deg != e.g - 1:
            side.append("nonspecial by generality of the twisting points")
    return _step("project_from_point", "projection from a point of the curve", e, quot,
                 -sub_chi, side=side + [f"image curve ({P.d},{P.g}) in P^{P.r}"],
                 flags=[AXIOM], notes=["pullback normal bundle computed on the image curve"],
                 rank_delta=-1)


def untwist_general(e: ModBundleExpr) -> RewriteStep:
    deg = e.twist * e.d + div_deg(e.divisor)
    out = e.evolve(twist=0, divisor=())
    return _step("untwist_general", "twisting by a general line bundle", e, out,
                 -e.rank * deg,
                 side=[f"O({e.twist})({div_text(e.divisor) or '0'}) is a general line bundle "
                       f"of degree {deg}"], flags=[AXIOM])


# --------------------------------------------------------------------------
# witness pattern recognition for good(...) calls


def match_pattern(e: ModBundleExpr) -> tuple[tuple[int, int, int], dict]:
    """Read off the P100/P101 pattern of an expression ready for good(...)."""
    if len(e.comps) != 1 or e.twist or e.divisor:
        raise CalculusError("good(...) expects an untwisted bundle on a single curve")
    mods = list(e.mods)
    p101 = 0
    used = set()
    for i, a in enumerate(mods):
        if i in used or a.deg != 1 or len(a.target) != 1:
            continue
        (pa,) = a.points
        (ta,) = a.target
        for j in range(i + 1, len(mods)):
            b = mods[j]
            if j in used or b.deg != 1 or len(b.target) != 1:
                continue
            if b.points == [ta] and b.target == frozenset([pa]):
                used |= {i, j}
                p101 += 1
                break
    rest = [m for k, m in enumerate(mods) if k not in used]
    targets = {m.target for m in rest}
    if len(targets) > 1 or any(len(t) != 1 for t in targets):
        raise CalculusError("remaining modifications do not share one target point")
    if any(c != 1 for m in rest for _, c in m.divisor):
        raise CalculusError("P100 marks are reduced points")
    p100 = sum(len(m.divisor) for m in rest)
    return (e.d, e.g, e.r), {"P100": p100, "P101": p101}
