"""Citable table of external results.

The engine never re-proves results from other work.  Each such input is an
entry ``id | pattern | citation``; traces list every entry they consume, and
a trace that consumes an id missing from the active table is reported as
open rather than proved.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

_NAMES = ("d", "g", "r", "rho")
_ALLOWED = (ast.Expression, ast.BoolOp, ast.And, ast.Or, ast.UnaryOp, ast.Not,
            ast.USub, ast.Compare, ast.Eq, ast.NotEq, ast.Lt, ast.LtE, ast.Gt,
            ast.GtE, ast.In, ast.NotIn, ast.BinOp, ast.Add, ast.Sub, ast.Mult,
            ast.Name, ast.Load, ast.Constant, ast.Tuple)


class AxiomTableError(ValueError):
    pass


def _compile(pattern: str, where: str):
    if pattern.strip() == "*":
        return None
    try:
        tree = ast.parse(pattern, mode="eval")
    except SyntaxError as exc:
        raise AxiomTableError(f"{where}: bad pattern {pattern!r}: {exc.msg}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED):
            raise AxiomTableError(f"{where}: {type(node).__name__} not allowed in {pattern!r}")
        if isinstance(node, ast.Name) and node.id not in _NAMES:
            raise AxiomTableError(f"{where}: unknown name {node.id!r} in {pattern!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, int):
            raise AxiomTableError(f"{where}: only integer constants allowed")
    return compile(tree, where, "eval")


@dataclass(frozen=True)
class Axiom:
    id: str
    pattern: str
    citation: str

    def applies(self, d: int, g: int, r: int = 4) -> bool:
        code = _compile(self.pattern, self.id)
        if code is None:
            return True
        env = {"d": d, "g": g, "r": r, "rho": (r + 1) * d - r * g - r * (r + 1)}
        return bool(eval(code, {"__builtins__": {}}, env))

    def to_json(self) -> dict:
        return {"id": self.id, "pattern": self.pattern, "citation": self.citation}


class AxiomTable:
    def __init__(self, entries=()):
        self._entries: dict[str, Axiom] = {}
        for a in entries:
            if a.id in self._entries:
                raise AxiomTableError(f"duplicate axiom id {a.id!r}")
            _compile(a.pattern, a.id)
            self._entries[a.id] = a

    @classmethod
    def parse(cls, text: str, source: str = "<axioms>") -> "AxiomTable":
        out = []
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split("|", 2)]
            if len(parts) != 3 or not all(parts):
                raise AxiomTableError(f"{source}:{n}: expected 'id | pattern | citation'")
            out.append(Axiom(*parts))
        return cls(out)

    @classmethod
    def load(cls, path) -> "AxiomTable":
        p = Path(path)
        return cls.parse(p.read_text(encoding="utf-8"), str(p))

    @classmethod
    def default(cls) -> "AxiomTable":
        text = resources.files("bninterp").joinpath("axioms.txt").read_text(encoding="utf-8")
        return cls.parse(text, "axioms.txt")

    @classmethod
    def empty(cls) -> "AxiomTable":
        return cls()

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def __getitem__(self, key: str) -> Axiom:
        return self._entries[key]

    def __iter__(self):
        return iter(self._entries.values())

    def __len__(self):
        return len(self._entries)

    def ids(self) -> list[str]:
        return sorted(self._entries)

    def resolve(self, uses) -> tuple[list[dict], list[str], list[str]]:
        """Check ``(id, (d, g, r) or None)`` uses against the table.

        Returns (cited entries, missing ids, pattern violations).
        """
        cited, missing, bad = {}, set(), set()
        for aid, pair in uses:
            a = self._entries.get(aid)
            if a is None:
                missing.add(aid)
                continue
            cited[aid] = a.to_json()
            if pair is not None and not a.applies(*pair):
                bad.add(f"{aid} at {tuple(pair)}")
        return [cited[k] for k in sorted(cited)], sorted(missing), sorted(bad)
