"""Proof search for interpolation of N_C(-1) (twisted) or N_C (untwisted).

:func:`reduce` turns a Brill-Noether pair in P^4 into a :class:`ProofTrace`,
a tree whose internal nodes are hyperplane attachments and whose leaves are
the nonspecial base case, a scripted special leaf, or an exception backed by
an external citation.  Every arithmetic side condition is stored with its
inputs so :func:`validate_trace` can recheck it without searching again.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

from .axioms import AxiomTable
from .bn_arith import (TWISTED_EXCEPTIONS, UNTWISTED_EXCEPTIONS, BNPair,
                       NotBrillNoether, chi_normal, d_min, rho)

MODES = ("twisted", "untwisted")

# pairs settled by a scripted degeneration instead of the induction
TWISTED_LEAVES = {(9, 5): "9_5", (11, 8): "11_8", (12, 10): "12_10",
                  (13, 10): "13_10", (13, 11): "13_11", (14, 12): "14_12"}
UNTWISTED_LEAVES = {(8, 5): "8_5_untwisted", (9, 6): "9_6", (10, 7): "10_7_untwisted"}

# curves X in a hyperplane: (d'', g'') -> s, with g'' = 2s + 1 - d''
X_CURVES = {(9, 6): 7, (3, 0): 1, (6, 3): 4, (7, 4): 5, (8, 5): 6}

# g -> (d_min, three cells for d_min, d_min + 1, d_min + 2).  A cell is
# ("attach", X, Y), ("leaf",) or ("base",).
CERT_TABLE = {
    6: (10, (("attach", (6, 3), (4, 0)), ("attach", (6, 3), (5, 0)), ("base",))),
    7: (11, (("attach", (6, 3), (5, 1)), ("attach", (6, 3), (6, 1)),
             ("attach", (6, 3), (7, 1)))),
    8: (11, (("leaf",), ("attach", (7, 4), (5, 0)), ("attach", (6, 3), (7, 2)))),
    9: (12, (("attach", (7, 4), (5, 1)), ("attach", (6, 3), (7, 3)),
             ("attach", (6, 3), (8, 3)))),
    10: (12, (("leaf",), ("leaf",), ("attach", (6, 3), (8, 4)))),
    11: (13, (("leaf",), ("attach", (7, 4), (7, 3)), ("attach", (6, 3), (9, 5)))),
    12: (14, (("leaf",), ("attach", (7, 4), (8, 4)), ("attach", (6, 3), (10, 6)))),
    13: (15, (("attach", (8, 5), (7, 3)), ("attach", (7, 4), (9, 5)),
              ("attach", (6, 3), (11, 7)))),
    14: (16, (("attach", (8, 5), (8, 4)), ("attach", (6, 3), (11, 8)),
              ("attach", (6, 3), (12, 8)))),
}

ALLOWED_LEAVES = ("BASE_NONSPECIAL", "LEAF", "EXCEPTION")


class ReductionError(RuntimeError):
    pass


def _chi(d: int, g: int, mode: str) -> int:
    return chi_normal(BNPair(d, g, 4), -1 if mode == "twisted" else 0)


def attach_conditions(d: int, g: int, x: tuple, y: tuple, s: int) -> list[dict]:
    """Side conditions for gluing X in a hyperplane to Y along s points."""
    d2, g2 = x
    d1, g1 = y
    return [
        {"name": "genus_of_X", "expr": "g'' = 2s + 1 - d''", "ok": g2 == 2 * s + 1 - d2},
        {"name": "enough_degree", "expr": "d'' >= s + 1", "ok": d2 >= s + 1},
        {"name": "points_on_Y", "expr": "d' >= s", "ok": d1 >= s},
        {"name": "degree_sum", "expr": "d = d' + d''", "ok": d == d1 + d2},
        {"name": "genus_sum", "expr": "g = g' + 3s - d''", "ok": g == g1 + 3 * s - d2},
        {"name": "rho_shift", "expr": "rho(C) - rho(Y) = 9d'' - 12s",
         "ok": rho(BNPair(d, g)) - rho(BNPair(d1, g1)) == 9 * d2 - 12 * s},
        {"name": "Y_is_bn", "expr": "rho(Y) >= 0", "ok": rho(BNPair(d1, g1)) >= 0},
    ]


@dataclass
class TraceNode:
    rule: str
    pair: tuple
    mode: str
    anchor: str
    side_conditions: list
    params: dict = field(default_factory=dict)
    children: list = field(default_factory=list)
    leaf: dict | None = None
    axioms: list = field(default_factory=list)   # [(id, (d, g, r) or None)]
    verdict: str = "GOOD"

    @property
    def chi_before(self) -> int:
        return _chi(*self.pair, self.mode)

    @property
    def chi_after(self) -> int:
        if self.children:
            c = self.children[0]
            return _chi(*c.pair, c.mode)
        return self.chi_before

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def to_json(self) -> dict:
        return {"rule": self.rule, "pair": list(self.pair), "mode": self.mode,
                "anchor": self.anchor, "side_conditions": self.side_conditions,
                "params": self.params, "chi_before": self.chi_before,
                "chi_after": self.chi_after,
                "axioms": [{"id": a, "at": list(p) if p else None} for a, p in self.axioms],
                "children": [c.to_json() for c in self.children],
                "leaf": self.leaf, "verdict": self.verdict}


@dataclass
class ProofTrace:
    pair: tuple
    mode: str
    root: TraceNode
    verdict: str
    reason: str = ""
    axioms: list = field(default_factory=list)
    missing_axioms: list = field(default_factory=list)
    axiom_violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def leaves(self) -> list[TraceNode]:
        return [n for n in self.root.walk() if not n.children]

    def leaf_cases(self) -> list[str]:
        return sorted({n.params["case"] for n in self.leaves() if n.rule == "LEAF"})

    def to_json(self) -> dict:
        return {"root": {"d": self.pair[0], "g": self.pair[1], "r": 4, "mode": self.mode},
                "verdict": self.verdict, "reason": self.reason,
                "trace": self.root.to_json(), "axioms": self.axioms,
                "missing_axioms": self.missing_axioms,
                "axiom_violations": self.axiom_violations,
                "leaf_cases": self.leaf_cases(), "notes": self.notes,
                "caveat": ("interpolation is certified for a general curve only; "
                           "failure at the exceptional pairs is cited, never computed")}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _check_table():
    for g, (dm, _) in CERT_TABLE.items():
        if d_min(g) != dm:
            raise ReductionError(f"computed d_min({g}) = {d_min(g)} disagrees with "
                                 f"the certificate table ({dm})")


@lru_cache(maxsize=None)
def _leaf_run(case: str, seed: int, retries):
    from .degeneration_leaves import run_leaf
    return run_leaf(case, seed=seed, retries=retries)


@lru_cache(maxsize=None)
def _leaf_static(case: str):
    from .degeneration_leaves import load_script
    return tuple(load_script(case).axiom_ids())


def _leaf_node(d, g, mode, case, leaves, seed, retries) -> TraceNode:
    pair3 = (d, g, 4)
    node = TraceNode("LEAF", (d, g), mode, f"special leaf {case}",
                     [{"name": "special_pair", "expr": f"({d},{g}) has a scripted leaf",
                       "ok": True}], {"case": case})
    if leaves == "run":
        tr = _leaf_run(case, seed, retries)
        node.leaf = {"kind": "leaf", "case": case, "verdict": tr.verdict,
                     "terminal": tr.terminal, "steps": len(tr.steps), "seed": seed}
        node.axioms = [(a, pair3) for a in tr.axioms]
        node.verdict = "GOOD" if tr.verdict == "GOOD" else "INCONCLUSIVE"
    else:
        node.leaf = {"kind": "leaf", "case": case, "verdict": "REFERENCED"}
        node.axioms = [(a, pair3) for a in _leaf_static(case)]
    return node


def _attach_node(rule, d, g, mode, x, y, anchor, child, extra=()) -> TraceNode:
    s = X_CURVES[x]
    conds = attach_conditions(d, g, x, y, s)
    if not all(c["ok"] for c in conds):
        bad = [c["expr"] for c in conds if not c["ok"]]
        raise ReductionError(f"attachment X={x}, Y={y} fails {bad} for ({d},{g})")
    ax = [("p3_interpolation", (x[0], x[1], 3)), ("in_transverse", None),
          ("bn_membership", None), *extra]
    return TraceNode(rule, (d, g), mode, anchor, conds,
                     {"X": list(x), "Y": list(y), "s": s}, [child], None, ax,
                     child.verdict)


def _twisted(d, g, leaves, seed, retries) -> TraceNode:
    mode = "twisted"
    if (d, g) in TWISTED_EXCEPTIONS:
        return TraceNode("EXCEPTION", (d, g), mode, "exceptional pair",
                         [{"name": "listed_exception", "expr": "(d,g) in twisted exceptions",
                           "ok": True}], {}, [],
                         {"kind": "axiom", "id": "quadrics_exception"},
                         [("quadrics_exception", (d, g, 4))], "EXCEPTION")
    if (d, g) in TWISTED_LEAVES:
        return _leaf_node(d, g, mode, TWISTED_LEAVES[(d, g)], leaves, seed, retries)
    if d >= 2 * g:
        chi = chi_normal(BNPair(d, g, 4))
        conds = [{"name": "nonspecial", "expr": "d >= 2g", "ok": True},
                 {"name": "twist_bound", "expr": "chi(N_C) >= 3(d + g)",
                  "ok": chi >= 3 * (d + g)}]
        return TraceNode("BASE_NONSPECIAL", (d, g), mode, "nonspecial base case", conds,
                         {}, [], {"kind": "axiom", "id": "base_nonspecial"},
                         [("base_nonspecial", (d, g, 4))])
    if g > 14:
        child = _twisted(d - 9, g - 12, leaves, seed, retries)
        node = _attach_node("PLUS9", d, g, mode, (9, 6), (d - 9, g - 12),
                            "attach a (9,6) curve along 7 points", child,
                            [("dplus9_bn", (d, g, 4))])
        node.side_conditions.append({"name": "residual_degree", "expr": "d - 9 >= 7",
                                     "ok": d - 9 >= 7})
        return node
    if 6 <= g <= 14:
        dm, cells = CERT_TABLE[g]
        k = d - dm
        if k >= 3:
            child = _twisted(d - 3, g, leaves, seed, retries)
            return _attach_node("PLUS3", d, g, mode, (3, 0), (d - 3, g),
                                "attach a twisted cubic at one point", child)
        if 0 <= k:
            cell = cells[k]
            if cell[0] != "attach":
                raise ReductionError(f"table cell ({d},{g}) should have been dispatched earlier")
            _, x, y = cell
            child = _twisted(*y, leaves, seed, retries)
            node = _attach_node("TABLE_CERT", d, g, mode, x, y,
                                f"certificate table, row g={g}, column d_min+{k}", child)
            node.params.update({"d_min": dm, "column": k})
            return node
    raise ReductionError(f"no reduction rule applies to ({d},{g})")


def _untwisted(d, g, leaves, seed, retries) -> TraceNode:
    mode = "untwisted"
    if (d, g) in UNTWISTED_EXCEPTIONS:
        return TraceNode("EXCEPTION", (d, g), mode, "exceptional pair",
                         [{"name": "listed_exception", "expr": "(d,g) in untwisted exceptions",
                           "ok": True}], {}, [],
                         {"kind": "axiom", "id": "joint_thm_1_3"},
                         [("joint_thm_1_3", (d, g, 4))], "EXCEPTION")
    if (d, g) in UNTWISTED_LEAVES:
        return _leaf_node(d, g, mode, UNTWISTED_LEAVES[(d, g)], leaves, seed, retries)
    child = _twisted(d, g, leaves, seed, retries)
    return TraceNode("UNTWIST", (d, g), mode, "N_C(-1) interpolation implies N_C",
                     [{"name": "twisted_good", "expr": "N_C(-1) satisfies interpolation",
                       "ok": child.verdict == "GOOD"}], {}, [child], None,
                     [("twist_to_untwist", (d, g, 4))], child.verdict)


def reduce(p: BNPair, mode: str = "twisted", axioms: AxiomTable | None = None,
           leaves: str = "reference", seed: int = 0, retries=None) -> ProofTrace:
    """Build the proof trace for ``p`` in ``mode``.

    ``leaves="reference"`` cites special leaves by case id; ``"run"`` replays
    each one and folds its verdict in.  Axiom ids missing from ``axioms``
    make the verdict ``OPEN``.
    """
    if p.r != 4:
        raise ValueError("the reduction is only defined in P^4")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if leaves not in ("reference", "run"):
        raise ValueError("leaves must be 'reference' or 'run'")
    p.require_bn()
    _check_table()
    table = AxiomTable.default() if axioms is None else axioms
    build = _twisted if mode == "twisted" else _untwisted
    root = build(p.d, p.g, leaves, seed, retries)
    uses = [u for n in root.walk() for u in n.axioms]
    cited, missing, bad = table.resolve(uses)
    verdict = root.verdict
    reason = ""
    if verdict == "EXCEPTION":
        reason = (f"({p.d},{p.g}) is exceptional; failure is cited "
                  f"({root.leaf['id']}), not computed")
    if missing or bad:
        reason = "; ".join(filter(None, [reason,
                                         f"missing axioms: {', '.join(missing)}" if missing else "",
                                         f"pattern violations: {', '.join(bad)}" if bad else ""]))
        verdict = "OPEN"
    notes = []
    if any(n.rule == "LEAF" and n.leaf["verdict"] == "REFERENCED" for n in root.walk()):
        notes.append("special leaves are cited by id; replay them with leaves='run'")
    return ProofTrace((p.d, p.g), mode, root, verdict, reason, cited, missing, bad, notes)


# --------------------------------------------------------------------------
# independent checking


def _rho(d, g):
    return 5 * d - 4 * g - 20


def validate_trace(trace) -> list[str]:
    """Recheck every side condition of a trace from its stored parameters.

    Accepts a :class:`ProofTrace` or its JSON dict.  Returns a list of
    problems; an empty list means the trace checks out.
    """
    js = trace.to_json() if isinstance(trace, ProofTrace) else trace
    problems: list[str] = []
    known = {a["id"] for a in js.get("axioms", [])}

    def visit(n, where):
        d, g = n["pair"]
        rule = n["rule"]
        here = f"{where}{rule}({d},{g})"
        if n["mode"] == "twisted":
            if n["chi_before"] != 2 * d - g + 1:
                problems.append(f"{here}: chi_before {n['chi_before']} != 2d - g + 1")
        elif n["chi_before"] != 5 * d - g + 1:
            problems.append(f"{here}: chi_before {n['chi_before']} != 5d - g + 1")
        if _rho(d, g) < 0:
            problems.append(f"{here}: not a BN pair")
        for a in n["axioms"]:
            if js.get("missing_axioms") == [] and a["id"] not in known:
                problems.append(f"{here}: axiom {a['id']} not in the trace's citation list")
        kids = n["children"]
        if rule in ("PLUS9", "PLUS3", "TABLE_CERT"):
            pr = n["params"]
            (d2, g2), (d1, g1), s = pr["X"], pr["Y"], pr["s"]
            checks = {
                "g'' = 2s + 1 - d''": g2 == 2 * s + 1 - d2,
                "d'' >= s + 1": d2 >= s + 1,
                "d' >= s": d1 >= s,
                "d = d' + d''": d == d1 + d2,
                "g = g' + 3s - d''": g == g1 + 3 * s - d2,
                "rho(C) - rho(Y) = 9d'' - 12s": _rho(d, g) - _rho(d1, g1) == 9 * d2 - 12 * s,
            }
            if rule == "PLUS9":
                checks["X = (9,6), s = 7"] = (d2, g2, s) == (9, 6, 7)
                checks["d - 9 >= 7"] = d1 >= 7
                checks["genus drops by 12"] = g - g1 == 12
            if rule == "PLUS3":
                checks["X = (3,0), s = 1"] = (d2, g2, s) == (3, 0, 1)
                checks["genus unchanged"] = g1 == g
            if rule == "TABLE_CERT":
                dm, k = pr["d_min"], pr["column"]
                dm2 = next(e for e in range(g + 1, 10 * g + 30)
                           if _rho(e, g) >= 0 and (e, g) not in {(6, 2), (8, 5), (9, 6), (10, 7)})
                checks["d_min recomputed"] = dm == dm2
                checks["column = d - d_min in 0..2"] = k == d - dm and 0 <= k <= 2
                checks["6 <= g <= 14"] = 6 <= g <= 14
            for expr, ok in checks.items():
                if not ok:
                    problems.append(f"{here}: {expr} fails")
            if len(kids) != 1 or tuple(kids[0]["pair"]) != (d1, g1):
                problems.append(f"{here}: child is not Y = ({d1},{g1})")
        elif rule == "UNTWIST":
            if len(kids) != 1 or tuple(kids[0]["pair"]) != (d, g) or kids[0]["mode"] != "twisted":
                problems.append(f"{here}: child must be the twisted trace of the same pair")
        elif rule == "BASE_NONSPECIAL":
            if not (d >= 2 * g and 5 * d - g + 1 >= 3 * (d + g)):
                problems.append(f"{here}: not in the nonspecial range")
        elif rule == "LEAF":
            special = {(9, 5), (11, 8), (12, 10), (13, 10), (13, 11), (14, 12)} \
                if n["mode"] == "twisted" else {(8, 5), (9, 6), (10, 7)}
            if (d, g) not in special:
                problems.append(f"{here}: not a special pair")
        elif rule == "EXCEPTION":
            exc = {(6, 2), (8, 5), (9, 6), (10, 7)} if n["mode"] == "twisted" else {(6, 2)}
            if (d, g) not in exc:
                problems.append(f"{here}: not an exceptional pair")
        else:
            problems.append(f"{here}: unknown rule")
        if not kids and rule not in ALLOWED_LEAVES:
            problems.append(f"{here}: leaf of kind {rule} is not allowed")
        for c in n["side_conditions"]:
            if not c["ok"]:
                problems.append(f"{here}: recorded condition {c['expr']} is false")
        for i, k in enumerate(kids):
            visit(k, f"{here} > ")

    visit(js["trace"], "")
    return problems


# --------------------------------------------------------------------------
# table audit and sweep


def verify_table() -> dict:
    """Audit every cell of the certificate table."""
    cells, failures = [], []
    for g in sorted(CERT_TABLE):
        dm, row = CERT_TABLE[g]
        dm_ok = d_min(g) == dm
        if not dm_ok:
            failures.append(f"g={g}: d_min recomputed as {d_min(g)}, table says {dm}")
        for k, cell in enumerate(row):
            d = dm + k
            entry = {"g": g, "d": d, "column": k, "d_min_ok": dm_ok}
            if cell[0] == "attach":
                _, x, y = cell
                s = X_CURVES.get(x)
                conds = attach_conditions(d, g, x, y, s) if s is not None else []
                entry.update({"kind": "attach", "X": list(x), "Y": list(y), "s": s,
                              "checks": {c["expr"]: c["ok"] for c in conds}})
                ok = s is not None and all(c["ok"] for c in conds)
                try:
                    sub = reduce(BNPair(*y), "twisted")
                    entry["Y_verdict"] = sub.verdict
                    entry["Y_leaves"] = sub.leaf_cases()
                    ok = ok and sub.verdict == "GOOD"
                except (ReductionError, NotBrillNoether) as exc:
                    entry["Y_verdict"] = f"error: {exc}"
                    ok = False
            elif cell[0] == "leaf":
                case = TWISTED_LEAVES.get((d, g))
                entry.update({"kind": "special_leaf", "case": case})
                ok = case is not None
            else:
                entry.update({"kind": "base", "checks": {"d >= 2g": d >= 2 * g}})
                ok = d >= 2 * g
            entry["ok"] = bool(ok)
            if not ok:
                failures.append(f"cell ({d},{g}) fails")
            cells.append(entry)
    return {"cells": cells, "count": len(cells), "failures": failures,
            "ok": not failures and len(cells) == 27}


def _sweep_one(args):
    d, g, mode, axioms = args
    tr = reduce(BNPair(d, g, 4), mode, axioms=axioms)
    return (d, g, tr.verdict, validate_trace(tr), tr.leaf_cases(),
            sorted({n.rule for n in tr.leaves()}))


def sweep(d_max: int, g_max: int, mode: str = "twisted", workers: int = 1,
          axioms: AxiomTable | None = None) -> dict:
    """Reduce every BN pair with d <= d_max, g <= g_max."""
    if d_max < 1 or g_max < 0:
        raise ValueError("bounds must be d_max >= 1, g_max >= 0")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    jobs = [(d, g, mode, axioms) for g in range(g_max + 1) for d in range(1, d_max + 1)
            if _rho(d, g) >= 0]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(_sweep_one, jobs, chunksize=16))
    else:
        rows = [_sweep_one(j) for j in jobs]
    expected = TWISTED_EXCEPTIONS if mode == "twisted" else UNTWISTED_EXCEPTIONS
    exceptions = sorted((d, g) for d, g, v, *_ in rows if v == "EXCEPTION")
    invalid = {f"{d},{g}": p for d, g, _, p, *_ in rows if p}
    other = sorted((d, g, v) for d, g, v, *_ in rows if v not in ("GOOD", "EXCEPTION"))
    want = sorted(e for e in expected if e[0] <= d_max and e[1] <= g_max)
    return {"mode": mode, "d_max": d_max, "g_max": g_max,
            "matrix": [{"d": d, "g": g, "verdict": v, "leaf_cases": lc, "leaf_rules": lr}
                       for d, g, v, _, lc, lr in rows],
            "pairs": len(rows), "exceptions": [list(e) for e in exceptions],
            "expected_exceptions": [list(e) for e in want],
            "invalid_traces": invalid, "unsettled": [list(x) for x in other],
            "ok": exceptions == want and not invalid and not other}
