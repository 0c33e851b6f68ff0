"""Parser for the text form of modified normal bundles.

Grammar (whitespace is ignored)::

    expr     := 'N_' carrier group* mod* (';' fact)*
    carrier  := NAME | 'line' | 'conic' | '{' d ',' g '}' | '{' NAME ('+' NAME)* '}'
                optionally followed by '@P3'
    group    := '(' INT ')' | '(' divisor ')'
    divisor  := ['-'] term (('+' | '-') term)*      term := [INT] NAME
    mod      := '[' divisor ('->' | '→') NAME ('+' NAME)* ']'
    fact     := ('indep' | 'full' | 'span') NAME+ | 'summand' NAME '=' NAME | 'r' '=' INT

Names are letters, digits and underscores, with optional trailing primes.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

from .bundle_calculus import (CalculusError, Component, Facts, Geometry, Mod,
                              ModBundleExpr, _div)


class ExprSyntaxError(ValueError):
    def __init__(self, text: str, pos: int, msg: str):
        self.text, self.pos, self.msg = text, pos, msg
        super().__init__(f"{msg}\n  {text}\n  {' ' * pos}^")


_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z][A-Za-z0-9_]*'*)|(?P<int>\d+)|"
                    r"(?P<arrow>->|→)|(?P<sym>[()\[\]{}+\-,;=@]))")


def tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            stripped = len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(text, pos + stripped, "unexpected character")
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


@dataclass
class RawExpr:
    carrier: list                 # component names, or a single ad hoc spec
    ad_hoc: tuple | None          # (kind, d, g) for calc carriers
    r: int = 4
    twist: int = 0
    divisor: dict = field(default_factory=dict)
    mods: list = field(default_factory=list)  # (divisor dict, [targets])
    facts: list = field(default_factory=list)  # (kind, args)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self, kind=None, value=None, what=None):
        t = self.peek()
        if (kind and t[0] != kind) or (value is not None and t[1] != value):
            want = what or (repr(value) if value is not None else kind)
            got = "end of input" if t[0] == "end" else repr(t[1])
            raise ExprSyntaxError(self.text, t[2], f"expected {want}, got {got}")
        self.i += 1
        return t

    def at(self, value):
        return self.peek()[1] == value and self.peek()[0] in ("sym", "arrow")

    def parse(self) -> RawExpr:
        t = self.take("name", what="'N_...'")
        if not t[1].startswith("N_"):
            raise ExprSyntaxError(self.text, t[2], "expressions start with N_")
        rest = t[1][2:]
        raw = RawExpr([], None)
        if rest:
            self._named_carrier(raw, rest, t[2] + 2)
        else:
            self.take("sym", "{", what="carrier")
            self._braced_carrier(raw)
        if self.at("@"):
            self.take()
            t = self.take("name", what="'P3'")
            if t[1] not in ("P3", "P4"):
                raise ExprSyntaxError(self.text, t[2], "ambient must be P3 or P4")
            raw.r = int(t[1][1])
        while self.at("("):
            self._group(raw)
        while self.at("["):
            raw.mods.append(self._mod())
        while self.at(";"):
            self.take()
            raw.facts.append(self._fact(raw))
        self.take("end", what="end of expression")
        return raw

    def _named_carrier(self, raw, name, pos):
        if name == "line":
            raw.ad_hoc = ("line", 1, 0)
        elif name == "conic":
            raw.ad_hoc = ("conic", 2, 0)
        else:
            raw.carrier = [name]
        # 'N_' glued to name; a brace form never reaches here

    def _braced_carrier(self, raw):
        t = self.peek()
        if t[0] == "int":
            d = int(self.take()[1])
            self.take("sym", ",")
            g = int(self.take("int", what="genus")[1])
            self.take("sym", "}")
            raw.ad_hoc = ("curve", d, g)
            return
        raw.carrier.append(self.take("name", what="component name")[1])
        while self.at("+"):
            self.take()
            raw.carrier.append(self.take("name", what="component name")[1])
        self.take("sym", "}", what="'}'")

    def _group(self, raw):
        self.take("sym", "(")
        t0, t1 = self.peek(), self.peek(1)
        if t0[0] == "int" and t1[1] == ")":
            raw.twist += int(self.take()[1])
        elif t0[1] == "-" and t1[0] == "int" and self.peek(2)[1] == ")":
            self.take()
            raw.twist -= int(self.take()[1])
        else:
            for p, c in self._divisor(signed=True).items():
                raw.divisor[p] = raw.divisor.get(p, 0) + c
        self.take("sym", ")", what="')'")

    def _divisor(self, signed: bool) -> dict:
        acc = Counter()
        sign = 1
        first = True
        while True:
            if self.at("-") or self.at("+"):
                t = self.take()
                if t[1] == "-" and not signed:
                    raise ExprSyntaxError(self.text, t[2], "modification divisors are effective")
                sign = -1 if t[1] == "-" else 1
            elif not first:
                break
            coef = 1
            if self.peek()[0] == "int":
                coef = int(self.take()[1])
            name = self.take("name", what="point name")[1]
            acc[name] += sign * coef
            sign, first = 1, False
            if not (self.at("+") or self.at("-")):
                break
        return {p: c for p, c in acc.items() if c}

    def _mod(self):
        self.take("sym", "[")
        start = self.peek()[2]
        div = self._divisor(signed=False)
        if not div:
            raise ExprSyntaxError(self.text, start, "empty modification divisor")
        self.take("arrow", what="'->'")
        targets = [self.take("name", what="target point")[1]]
        while self.at("+"):
            self.take()
            targets.append(self.take("name", what="target point")[1])
        self.take("sym", "]", what="']'")
        return div, targets

    def _fact(self, raw):
        t = self.take("name", what="fact keyword")
        kw = t[1]
        if kw in ("indep", "full", "span"):
            names = []
            while self.peek()[0] == "name":
                names.append(self.take()[1])
            if not names:
                raise ExprSyntaxError(self.text, self.peek()[2], "fact needs point names")
            return kw, names
        if kw == "summand":
            g = self.take("name")[1]
            self.take("sym", "=")
            s = self.take("name")[1]
            return kw, [g, s]
        if kw == "r":
            self.take("sym", "=")
            v = self.take("int")
            raw.r = int(v[1])
            return kw, [v[1]]
        raise ExprSyntaxError(self.text, t[2], f"unknown fact {kw!r}")


def parse_raw(text: str) -> RawExpr:
    return _Parser(text).parse()


def apply_facts(facts: Facts, raw_facts) -> Facts:
    for kind, args in raw_facts:
        if kind == "summand":
            facts = facts.with_summand(args[0], args[1])
        elif kind in ("indep", "full", "span"):
            facts = facts.add(kind, args)
    return facts


def bind(raw: RawExpr, geometry: Geometry | None = None) -> ModBundleExpr:
    """Attach a parsed expression to a geometry (an ad hoc one for calc)."""
    if raw.ad_hoc is not None:
        kind, d, g = raw.ad_hoc
        name = {"line": "L", "conic": "N"}.get(kind, "C")
        geometry = Geometry((Component(name, kind, d, g, raw.r),), (), (), Facts())
        comps = [name]
    else:
        if geometry is None:
            if len(raw.carrier) != 1:
                raise CalculusError("a union carrier needs a declared geometry")
            raise CalculusError(f"unknown carrier {raw.carrier[0]!r}; use N_line, "
                                "N_conic or N_{d,g}")
        comps = raw.carrier
        for c in comps:
            geometry.comp(c)
    geometry = geometry.with_facts(apply_facts(geometry.facts, raw.facts))
    mods = tuple(Mod(_div(dv), frozenset(t)) for dv, t in raw.mods)
    return ModBundleExpr(geometry, frozenset(comps), raw.twist, _div(raw.divisor), mods)


def parse_expr(text: str, geometry: Geometry | None = None) -> ModBundleExpr:
    return bind(parse_raw(text), geometry)


def parse_mod(text: str) -> Mod:
    p = _Parser(text)
    div, targets = p._mod()
    p.take("end", what="end of modification")
    return Mod(_div(div), frozenset(targets))


def parse_divisor(text: str) -> dict:
    text = text.strip()
    if not text or text == "0":
        return {}
    p = _Parser(text)
    div = p._divisor(signed=True)
    p.take("end", what="end of divisor")
    return div
