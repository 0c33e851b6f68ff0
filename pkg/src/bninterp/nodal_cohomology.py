"""Exact h0/h1 of modified normal bundles on nodal unions of rational curves.

Each component is an affine polynomial map f(u) of degree e into k^{r+1}.
Using the presentation

    0 -> O(1)^2 --(df/ds, df/dt)--> O(e)^{r+1} -> N_f -> 0

a section of N_f(M) (M >= -2) is a polynomial vector F of degree <= e + M
modulo T = span{u^i f', u^i (e f - u f') : 0 <= i <= M + 1}.  A section of the
twisted, modified bundle is F / c with c a scalar polynomial collecting the
positive part of the divisor and the nodes; the remaining conditions are
local jet conditions at marks and gluing conditions at nodes.  Gluing is
tested against quadrics osculating both branches to second order: for such a
quadric q the function <grad q, s> must be regular at the node and take the
same value on both branches.

Everything is exact over Q.  Dimensions are ranks of one integer system.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

from . import linalg
from .bn_arith import BNPair, chi_normal

GENERAL = "GENERAL"
DEFAULT_BOX = 10 ** 4
DEFAULT_RETRIES = 5

SEMICONTINUITY = "SEMICONTINUITY"
BN_MEMBERSHIP = "BN-MEMBERSHIP-AXIOM"
PATTERN_ASSUMPTION = "P100/P101-INTERPRETATION"
WITNESS_ONLY = "WITNESS-ONLY: failure is never evidence against the general curve"


class WitnessError(ValueError):
    pass


class NonGenericSample(WitnessError):
    pass


def _fr(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _vec(v) -> tuple:
    return tuple(_fr(x) for x in v)


# --------------------------------------------------------------------------
# polynomials: coefficient lists, lowest degree first


def poly_eval(p: Sequence[Fraction], u: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * u + c
    return acc


def poly_taylor(p: Sequence[Fraction], u: Fraction, n: int) -> list[Fraction]:
    """First n Taylor coefficients of p at u."""
    out = []
    for i in range(n):
        out.append(sum((comb(m, i) * c * u ** (m - i) for m, c in enumerate(p) if m >= i),
                       Fraction(0)))
    return out


def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_gcd_degree(polys: Iterable[Sequence[Fraction]]) -> int:
    g: list = []
    for p in polys:
        p = _trim(p)
        a, b = g, p
        while b:
            # a mod b
            a = list(a)
            while len(a) >= len(b) and a:
                f = a[-1] / b[-1]
                shift = len(a) - len(b)
                for i, c in enumerate(b):
                    a[i + shift] -= f * c
                a = _trim(a)
            a, b = b, a
        g = a
    return max(0, len(g) - 1) if g else 0


# --------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class RationalComponent:
    name: str
    coords: tuple           # r+1 coefficient tuples
    marks: tuple = ()       # (mark name, parameter)

    def __post_init__(self):
        coords = tuple(tuple(_fr(c) for c in p) for p in self.coords)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "marks", tuple((n, _fr(u)) for n, u in self.marks))
        if len(coords) < 4:
            raise WitnessError("ambient dimension must be at least 3")
        e = self.e
        if e < 1:
            raise WitnessError(f"{self.name}: constant map")
        if poly_gcd_degree(coords) > 0:
            raise WitnessError(f"{self.name}: coordinate polynomials share a factor")
        if not any(len(p) > e and p[e] != 0 for p in coords):
            raise WitnessError(f"{self.name}: base point at infinity")
        for n, u in self.marks:
            self.require_unramified(u, n)

    @property
    def r(self) -> int:
        return len(self.coords) - 1

    @property
    def e(self) -> int:
        return max((len(_trim(p)) - 1 for p in self.coords), default=0)

    def point(self, u) -> tuple:
        u = _fr(u)
        return tuple(poly_eval(p, u) for p in self.coords)

    def taylor(self, u, n: int) -> list[tuple]:
        """Vectors f(u), f'(u), f''(u)/2, ... (n of them)."""
        cols = [poly_taylor(p, _fr(u), n) for p in self.coords]
        return [tuple(col[i] for col in cols) for i in range(n)]

    def require_unramified(self, u, label=""):
        f0, f1 = self.taylor(u, 2)
        if linalg.rank([f0, f1]) < 2:
            raise WitnessError(f"{self.name}: ramified or degenerate at {label or u}")

    def mark(self, name: str) -> Fraction:
        for n, u in self.marks:
            if n == name:
                return u
        raise KeyError(name)

    def with_marks(self, marks) -> "RationalComponent":
        return RationalComponent(self.name, self.coords, self.marks + tuple(marks))

    def to_json(self):
        return {"name": self.name, "coords": [[_pair(c) for c in p] for p in self.coords],
                "marks": {n: _pair(u) for n, u in self.marks}}


@dataclass(frozen=True)
class NodeSpec:
    comp_a: str
    mark_a: str
    comp_b: str
    mark_b: str


@dataclass(frozen=True)
class CurveConfig:
    components: tuple
    nodes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "nodes", tuple(self.nodes))
        rs = {c.r for c in self.components}
        if len(rs) != 1:
            raise WitnessError("components in different ambient spaces")
        names = [n for c in self.components for n, _ in c.marks]
        if len(names) != len(set(names)):
            raise WitnessError("mark names must be unique across components")
        for nd in self.nodes:
            ca, cb = self.comp(nd.comp_a), self.comp(nd.comp_b)
            a, b = ca.mark(nd.mark_a), cb.mark(nd.mark_b)
            pa, pb = ca.point(a), cb.point(b)
            if linalg.rank([pa, pb]) != 1:
                raise WitnessError(f"node {nd.mark_a}~{nd.mark_b}: images differ")
            if linalg.rank([pa, ca.taylor(a, 2)[1], cb.taylor(b, 2)[1]]) != 3:
                raise WitnessError(f"node {nd.mark_a}~{nd.mark_b} is not an ordinary node")

    @property
    def r(self) -> int:
        return self.components[0].r

    @property
    def degree(self) -> int:
        return sum(c.e for c in self.components)

    @property
    def genus(self) -> int:
        return len(self.nodes) - len(self.components) + 1

    def comp(self, name: str) -> RationalComponent:
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(name)

    def locate(self, mark: str) -> tuple[RationalComponent, Fraction]:
        for c in self.components:
            for n, u in c.marks:
                if n == mark:
                    return c, u
        raise WitnessError(f"unknown mark {mark!r}")

    def node_marks(self) -> set[str]:
        return {m for nd in self.nodes for m in (nd.mark_a, nd.mark_b)}

    def with_marks(self, comp: str, marks) -> "CurveConfig":
        comps = tuple(c.with_marks(marks) if c.name == comp else c for c in self.components)
        return CurveConfig(comps, self.nodes)

    def to_json(self):
        return {"components": [c.to_json() for c in self.components],
                "nodes": [[n.comp_a, n.mark_a, n.comp_b, n.mark_b] for n in self.nodes],
                "degree": self.degree, "genus": self.genus, "r": self.r}


@dataclass(frozen=True)
class ModSpec:
    mark: str
    mult: int
    targets: tuple   # exact vectors, or GENERAL labels (str)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(
            t if isinstance(t, str) else _vec(t) for t in self.targets))


@dataclass(frozen=True)
class BundleSpec:
    twist: int = 0
    divisor: tuple = ()     # (mark, coefficient)
    mods: tuple = ()        # ModSpec

    def __post_init__(self):
        d = {}
        for m, c in (self.divisor.items() if isinstance(self.divisor, dict) else self.divisor):
            d[m] = d.get(m, 0) + int(c)
        object.__setattr__(self, "divisor", tuple(sorted((m, c) for m, c in d.items() if c)))
        object.__setattr__(self, "mods", tuple(self.mods))

    def with_points(self, marks: Iterable[str]) -> "BundleSpec":
        d = dict(self.divisor)
        for m in marks:
            d[m] = d.get(m, 0) - 1
        return BundleSpec(self.twist, d, self.mods)

    def general_labels(self) -> list[str]:
        out = []
        for m in self.mods:
            for t in m.targets:
                if isinstance(t, str) and t not in out:
                    out.append(t)
        return out

    def instantiate(self, points: dict) -> "BundleSpec":
        mods = tuple(ModSpec(m.mark, m.mult, tuple(points[t] if isinstance(t, str) else t
                                                   for t in m.targets)) for m in self.mods)
        return BundleSpec(self.twist, self.divisor, mods)


def spec_chi(config: CurveConfig, spec: BundleSpec) -> int:
    r = config.r
    rank = r - 1
    chi = chi_normal(BNPair(config.degree, config.genus, r), spec.twist)
    chi += rank * sum(c for _, c in spec.divisor)
    for m in spec.mods:
        if any(isinstance(t, str) for t in m.targets):
            raise WitnessError("uninstantiated GENERAL target")
        t = linalg.rank(m.targets)
        chi -= (rank - t) * m.mult
    return chi


# --------------------------------------------------------------------------
# the linear system


class _Block:
    """Unknown coefficients of one component's polynomial vector F."""

    def __init__(self, comp: RationalComponent, M: int, offset: int):
        self.comp = comp
        self.M = M
        self.E = comp.e + M
        self.offset = offset
        self.r1 = comp.r + 1

    @property
    def size(self) -> int:
        return self.r1 * (self.E + 1)

    def idx(self, j: int, m: int) -> int:
        return self.offset + j * (self.E + 1) + m

    def jet_row(self, total: int, u: Fraction, j: int, order: int) -> dict:
        """Sparse row: Taylor coefficient of order ``order`` of coordinate j at u."""
        return {self.idx(j, m): comb(m, order) * u ** (m - order)
                for m in range(order, self.E + 1)}

    def kernel_vectors(self, total: int) -> list[list[Fraction]]:
        f = self.comp.coords
        e = self.comp.e
        fp = [[(m + 1) * p[m + 1] for m in range(len(p) - 1)] for p in f]
        eu = []
        for j in range(self.r1):
            p = list(f[j]) + [Fraction(0)] * 2
            q = [Fraction(0)] + list(fp[j])
            eu.append([e * (p[m] if m < len(p) else 0) - (q[m] if m < len(q) else 0)
                       for m in range(max(len(p), len(q)))])
        out = []
        for gen in (fp, eu):
            for i in range(self.M + 2):
                v = [Fraction(0)] * total
                for j in range(self.r1):
                    for m, c in enumerate(gen[j]):
                        if c:
                            if m + i > self.E:
                                raise AssertionError("kernel vector out of range")
                            v[self.idx(j, m + i)] = c
                out.append(v)
        return out


def _dense(row: dict, total: int) -> list:
    v = [0] * total
    for k, c in row.items():
        v[k] += c
    return v


def _combine(rows: list[tuple[Fraction, dict]], total: int) -> list:
    v = [Fraction(0)] * total
    for coef, row in rows:
        if coef:
            for k, c in row.items():
                v[k] += coef * c
    return v


def _sym_matrix(q: Sequence[Fraction], n: int) -> list[list[Fraction]]:
    S = [[Fraction(0)] * n for _ in range(n)]
    k = 0
    for a in range(n):
        for b in range(a, n):
            if a == b:
                S[a][a] = 2 * q[k]
            else:
                S[a][b] = S[b][a] = q[k]
            k += 1
    return S


def _bil(S, x, y) -> Fraction:
    return sum(x[a] * S[a][b] * y[b] for a in range(len(x)) for b in range(len(y)) if S[a][b])


def _sym_pairs(n):
    return [(a, b) for a in range(n) for b in range(a, n)]


def osculating_quadrics(ta: list[tuple], tb: list[tuple]) -> list[list[Fraction]]:
    """Quadrics vanishing to order 3 along both branches (Taylor data ta, tb)."""
    n = len(ta[0])
    pairs = _sym_pairs(n)
    rows = []
    for t in (ta, tb):
        f0, f1, f2 = t[0], t[1], t[2]
        r0, r1, r2 = [], [], []
        for a, b in pairs:
            if a == b:
                r0.append(f0[a] * f0[a])
                r1.append(2 * f0[a] * f1[a])
                r2.append(f1[a] * f1[a] + 2 * f0[a] * f2[a])
            else:
                r0.append(f0[a] * f0[b])
                r1.append(f0[a] * f1[b] + f0[b] * f1[a])
                r2.append(f1[a] * f1[b] + f0[a] * f2[b] + f0[b] * f2[a])
        rows += [r0, r1, r2]
    return linalg.nullspace(rows, len(pairs))


@dataclass
class _Assembled:
    rows: list
    total: int
    kernel: list
    blocks: dict


def _assemble(config: CurveConfig, spec: BundleSpec) -> _Assembled:
    r1 = config.r + 1
    k = spec.twist
    div = dict(spec.divisor)
    mods_at: dict[str, ModSpec] = {}
    for m in spec.mods:
        if m.mark in mods_at:
            raise WitnessError(f"more than one modification at {m.mark}")
        if m.mult < 1:
            raise WitnessError("modification multiplicity must be positive")
        if any(isinstance(t, str) for t in m.targets):
            raise WitnessError("uninstantiated GENERAL target")
        mods_at[m.mark] = m
    node_marks = config.node_marks()
    for mk in list(div) + list(mods_at):
        if mk in node_marks:
            raise WitnessError(f"twist or modification at node {mk}")
        config.locate(mk)

    blocks: dict[str, _Block] = {}
    cfac: dict[str, list[tuple[Fraction, int]]] = {}
    aux: dict[str, tuple[Fraction, int]] = {}
    offset = 0
    for comp in config.components:
        pos = []
        for n, u in comp.marks:
            if n in node_marks:
                mult = sum(1 for nd in config.nodes
                           for c, mm in ((nd.comp_a, nd.mark_a), (nd.comp_b, nd.mark_b))
                           if c == comp.name and mm == n)
                pos.append((u, mult))
            elif div.get(n, 0) > 0:
                pos.append((u, div[n]))
        base = k * comp.e + sum(m for _, m in pos)
        a = max(0, -base)
        if a:
            taken = {u for _, u in comp.marks}
            t = Fraction(1)
            while True:
                if t not in taken:
                    try:
                        comp.require_unramified(t)
                        break
                    except WitnessError:
                        pass
                t += 1
            aux[comp.name] = (t, a)
            pos.append((t, a))
        cfac[comp.name] = pos
        blocks[comp.name] = _Block(comp, base + a, offset)
        offset += blocks[comp.name].size
    total = offset
    rows: list = []

    def local(block: _Block, u: Fraction, v: int, mod: ModSpec | None):
        kk = mod.mult if mod else 0
        lam = list(mod.targets) if mod else []
        m = v + kk
        if m == 0:
            return
        tay = block.comp.taylor(u, m + 1)
        f = tay[:m]
        fp = [tuple((i + 1) * x for x in tay[i + 1]) for i in range(m)]
        dim = r1 * m
        span = []

        def put(order_shift, series):
            vec = [Fraction(0)] * dim
            for i, coeffs in enumerate(series):
                o = i + order_shift
                if o >= m:
                    break
                for j in range(r1):
                    vec[o * r1 + j] = coeffs[j]
            span.append(vec)

        for s in range(m):
            put(s, f)
            put(s, fp)
        for i in range(kk):
            for L in lam:
                put(v + i, [L])
        if linalg.rank(span) != len(span):
            raise WitnessError(f"{block.comp.name}: pointing bundle undefined or map "
                               f"ramified at parameter {u}")
        for y in linalg.nullspace(span, dim):
            parts = []
            for o in range(m):
                for j in range(r1):
                    c = y[o * r1 + j]
                    if c:
                        parts.append((c, block.jet_row(total, u, j, o)))
            rows.append(_combine(parts, total))

    for comp in config.components:
        b = blocks[comp.name]
        for n, u in comp.marks:
            if n in node_marks:
                continue
            v = max(0, -div.get(n, 0))
            local(b, u, v, mods_at.get(n))
        if comp.name in aux:
            t, a = aux[comp.name]
            local(b, t, a, None)

    def ctilde(comp: RationalComponent, u: Fraction) -> Fraction:
        val = Fraction(1)
        removed = False
        for p, mult in cfac[comp.name]:
            if p == u and not removed:
                mult -= 1
                removed = True
            val *= (u - p) ** mult
        return val

    for nd in config.nodes:
        ca, cb = config.comp(nd.comp_a), config.comp(nd.comp_b)
        ua, ub = ca.mark(nd.mark_a), cb.mark(nd.mark_b)
        ta, tb = ca.taylor(ua, 3), cb.taylor(ub, 3)
        ell = next(j for j in range(r1) if ta[0][j] != 0)
        quads = osculating_quadrics(ta, tb)
        if len(quads) != len(_sym_pairs(r1)) - 5:
            raise WitnessError("node branches are not in general position")
        for q in quads:
            S = _sym_matrix(q, r1)
            sides = []
            for comp, u, t in ((ca, ua, ta), (cb, ub, tb)):
                blk = blocks[comp.name]
                g0 = [sum(S[a][bb] * t[0][bb] for bb in range(r1)) for a in range(r1)]
                g1 = [sum(S[a][bb] * t[1][bb] for bb in range(r1)) for a in range(r1)]
                reg = [(g0[j], blk.jet_row(total, u, j, 0)) for j in range(r1)]
                rows.append(_combine(reg, total))
                scale = 1 / (ctilde(comp, u) * t[0][ell] ** (2 + k))
                val = [(scale * g1[j], blk.jet_row(total, u, j, 0)) for j in range(r1)]
                val += [(scale * g0[j], blk.jet_row(total, u, j, 1)) for j in range(r1)]
                sides.append(_combine(val, total))
            rows.append([x - y for x, y in zip(*sides)])

    kernel = []
    for b in blocks.values():
        kernel += b.kernel_vectors(total)
    return _Assembled(rows, total, kernel, blocks)


def section_dims(config: CurveConfig, spec: BundleSpec, self_check: bool = True) -> tuple[int, int]:
    """(h0, h1) of the twisted, modified normal bundle."""
    sysm = _assemble(config, spec)
    if self_check:
        for v in sysm.kernel:
            for row in sysm.rows:
                if sum(a * b for a, b in zip(row, v) if a and b):
                    raise AssertionError("zero section violates a local condition")
    chi = spec_chi(config, spec)
    ker = linalg.rank(sysm.kernel, sysm.total)
    # mod-p rank can only undercount, so h0_p >= h0 >= max(0, chi); equality
    # with the lower bound pins h0 exactly without the rational elimination
    rk = linalg.rank_mod_p(sysm.rows, sysm.total) if sysm.rows else 0
    h0 = None
    if rk is not None and sysm.total - rk - ker == max(0, chi):
        h0 = max(0, chi)
    if h0 is None:
        rk = linalg.rank(sysm.rows, sysm.total) if sysm.rows else 0
        h0 = sysm.total - rk - ker
    h1 = h0 - chi
    if h1 < 0:
        raise AssertionError(f"h0 = {h0} below chi = {chi}: inconsistent system")
    return h0, h1


# --------------------------------------------------------------------------
# sampling


def _pair(x: Fraction) -> list[int]:
    x = _fr(x)
    return [x.numerator, x.denominator]


def sample_general(seed, count: int, ambient: int, constraints=None,
                   box: int = DEFAULT_BOX) -> list[tuple]:
    """``count`` exact points of P^ambient.

    ``constraints`` is None, ``("on", component)`` or ``("hyperplane", coeffs)``.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    out = []
    for _ in range(count):
        if constraints is None:
            while True:
                p = tuple(Fraction(rng.randint(-box, box)) for _ in range(ambient + 1))
                if any(p):
                    out.append(p)
                    break
        elif constraints[0] == "on":
            comp = constraints[1]
            if comp.r != ambient:
                raise WitnessError("component lives in another ambient space")
            out.append(comp.point(rng.randint(-box, box)))
        elif constraints[0] == "hyperplane":
            h = [_fr(c) for c in constraints[1]]
            if len(h) != ambient + 1 or not any(h):
                raise WitnessError("infeasible hyperplane constraint")
            piv = next(j for j in range(len(h)) if h[j])
            while True:
                p = [Fraction(rng.randint(-box, box)) for _ in range(ambient + 1)]
                p[piv] = -sum(h[j] * p[j] for j in range(len(h)) if j != piv) / h[piv]
                if any(p):
                    out.append(tuple(p))
                    break
        else:
            raise WitnessError(f"unknown constraint {constraints[0]!r}")
    return out


# --------------------------------------------------------------------------
# certificates


@dataclass
class Certificate:
    kind: str
    seed: int
    points: list
    dims: list          # [divisor degree, h0, h1]
    caveats: list
    anchors: list
    witness: dict = field(default_factory=dict)

    def to_json(self):
        return {"kind": self.kind, "seed": self.seed,
                "points": [[_pair(c) for c in p] for p in self.points],
                "dims": [list(d) for d in self.dims],
                "caveats": list(self.caveats), "anchors": list(self.anchors),
                "witness": self.witness}


@dataclass
class Inconclusive:
    reason: str
    seed: int
    attempts: int
    dims: list = field(default_factory=list)

    def to_json(self):
        return {"kind": "INCONCLUSIVE", "reason": self.reason, "seed": self.seed,
                "attempts": self.attempts, "dims": self.dims, "caveats": [WITNESS_ONLY]}


def ladder_plan(chi: int, rank: int) -> tuple[int, str]:
    """Number of general points to twist down by, and the vanishing to check."""
    if chi < 0:
        raise WitnessError("check_interpolation needs chi >= 0")
    res = chi % rank
    if res == 0:
        return chi // rank, "h0"
    if res == 1:
        return chi // rank, "h1"
    return -(-chi // rank), "h0"


def _fresh_param(rng, taken, comp, box):
    while True:
        u = Fraction(rng.randint(-box, box))
        if u in taken:
            continue
        try:
            comp.require_unramified(u)
        except WitnessError:
            continue
        taken.add(u)
        return u


def distribute(config: CurveConfig, count: int) -> list[str]:
    """Component for each of ``count`` points, in an order whose every prefix
    is spread over the components in proportion to degree (ties go to the
    earlier component)."""
    comps = list(config.components)
    total = config.degree
    have = [0] * len(comps)
    out = []
    for k in range(1, count + 1):
        i = max(range(len(comps)),
                key=lambda j: (Fraction(k * comps[j].e, total) - have[j], -j))
        have[i] += 1
        out.append(comps[i].name)
    return out


def add_general_points(config: CurveConfig, count: int, rng, prefix: str = "x",
                       box: int = DEFAULT_BOX) -> tuple[CurveConfig, list[str]]:
    """Fresh marks at random parameters, spread over components by degree."""
    names = []
    for i, cname in enumerate(distribute(config, count)):
        comp = config.comp(cname)
        taken = {u for _, u in comp.marks}
        u = _fresh_param(rng, taken, comp, box)
        name = f"{prefix}{i + 1}"
        config = config.with_marks(cname, [(name, u)])
        names.append(name)
    return config, names


def _ladder(config, spec, n, rng, box):
    cfg, names = add_general_points(config, n, rng, prefix="_g", box=box)
    pts = [cfg.locate(m)[0].point(cfg.locate(m)[1]) for m in names]
    dims = []
    for j in range(n + 1):
        h0, h1 = section_dims(cfg, spec.with_points(names[:j]), self_check=(j == 0))
        dims.append([j, h0, h1])
    return dims, pts, cfg, names


def check_interpolation(config: CurveConfig, spec: BundleSpec, seed: int = 0,
                        retries: int = DEFAULT_RETRIES, box: int = DEFAULT_BOX,
                        anchors: Sequence[str] = (), caveats: Sequence[str] = (),
                        extra_points: Sequence = ()):
    """Certificate that ``spec`` on ``config`` satisfies interpolation, or Inconclusive."""
    rank = config.r - 1
    chi = spec_chi(config, spec)
    n, which = ladder_plan(chi, rank)
    rng = random.Random(seed)
    last = []
    for attempt in range(1, retries + 1):
        dims, pts, cfg, names = _ladder(config, spec, n, rng, box)
        last = dims
        expect = [max(0, chi - rank * j) for j in range(n + 1)]
        ok = all(d[1] == x for d, x in zip(dims, expect)) and dims[0][2] == 0
        final = dims[-1][1] if which == "h0" else dims[-1][2]
        if ok and final == 0:
            return Certificate(
                "interpolation_witness", seed, list(extra_points) + pts, dims,
                [SEMICONTINUITY] + list(caveats),
                ["single-divisor criterion", "[joint] Prop 4.6"] + list(anchors),
                {"config": cfg.to_json(), "spec": _spec_to_json(spec), "ladder": names,
                 "chi": chi, "rank": rank,
                 "check": f"{which} = 0 after {n} general points", "attempts": attempt})
    return Inconclusive("no sample attained the expected dimensions", seed, retries, last)


def certify_vanishing(config: CurveConfig, spec: BundleSpec, which: str, seed: int = 0):
    h0, h1 = section_dims(config, spec)
    val = h0 if which == "h0" else h1
    if val:
        return Inconclusive(f"{which} = {val}", seed, 1, [[0, h0, h1]])
    return Certificate(f"{which}_vanishing", seed, [], [[0, h0, h1]], [SEMICONTINUITY],
                       ["exact rank computation"],
                       {"config": config.to_json(), "spec": _spec_to_json(spec), "ladder": []})


# --------------------------------------------------------------------------
# witness recipes


def _line_through(name, p, q, marks=()):
    coords = [(a, b - a) for a, b in zip(p, q)]
    return RationalComponent(name, coords, marks)


def rational_normal_curve(name: str, r: int, marks=()) -> RationalComponent:
    coords = [tuple(Fraction(1) if m == j else Fraction(0) for m in range(r + 1))
              for j in range(r + 1)]
    return RationalComponent(name, coords, marks)


def _secant(curve: RationalComponent, line: str, a, b, na, nb):
    line_c = _line_through(line, curve.point(a), curve.point(b),
                           marks=[(line + "_0", 0), (line + "_1", 1)])
    curve = curve.with_marks([(na, _fr(a)), (nb, _fr(b))])
    nodes = [NodeSpec(curve.name, na, line, line + "_0"),
             NodeSpec(curve.name, nb, line, line + "_1")]
    return curve, line_c, nodes


SUPPORTED = {(3, 0, 3), (4, 0, 4), (4, 1, 3), (5, 1, 4), (6, 2, 4)}


def witness_config(d: int, g: int, r: int, rng: random.Random,
                   box: int = DEFAULT_BOX) -> CurveConfig:
    """Nodal rational witness for a general BN-curve of type (d, g, r)."""
    if (d, g, r) not in SUPPORTED:
        raise WitnessError(f"no witness recipe for ({d},{g},{r})")
    base = rational_normal_curve("R", r)
    if g == 0:
        return CurveConfig((base,))
    taken: set = set()
    params = [_fresh_param(rng, taken, base, box) for _ in range(2 * g)]
    comps, nodes = [], []
    for i in range(g):
        base, line, nd = _secant(base, f"L{i + 1}", params[2 * i], params[2 * i + 1],
                                 f"a{i + 1}", f"b{i + 1}")
        comps.append(line)
        nodes += nd
    return CurveConfig((base,) + tuple(comps), tuple(nodes))


def instantiate_pattern(config: CurveConfig, p100: int, p101: int, rng: random.Random,
                        box: int = DEFAULT_BOX) -> tuple[CurveConfig, BundleSpec, list]:
    mods = []
    points = []
    for i in range(p101):
        config, (z, w) = add_general_points(config, 2, rng, prefix=f"_m{i}_", box=box)
        pz = config.locate(z)[0].point(config.locate(z)[1])
        pw = config.locate(w)[0].point(config.locate(w)[1])
        mods += [ModSpec(z, 1, (pw,)), ModSpec(w, 1, (pz,))]
        points += [pz, pw]
    if p100:
        # the shared target is a general point of the curve itself
        config, (t,) = add_general_points(config, 1, rng, prefix="_t", box=box)
        target = config.locate(t)[0].point(config.locate(t)[1])
        config, marks = add_general_points(config, p100, rng, prefix="_q", box=box)
        points.append(target)
        mods += [ModSpec(m, 1, (target,)) for m in marks]
    return config, BundleSpec(0, (), tuple(mods)), points


def good(d: int, g: int, r: int, p100: int = 0, p101: int = 0, seed: int = 0,
         seeds: int = 2, box: int = DEFAULT_BOX, retries: int = DEFAULT_RETRIES):
    """Run the witness check for good(Curve(d,g,r) + P101^p101 + P100^p100).

    Uses ``seeds`` independent seeds; their dimension tables must agree.
    Returns the certificate of the first seed (with the others' tables
    attached) or an Inconclusive record.
    """
    certs = []
    for s in range(seed, seed + seeds):
        rng = random.Random(s)
        cfg = witness_config(d, g, r, rng, box)
        cfg, spec, pts = instantiate_pattern(cfg, p100, p101, rng, box)
        res = check_interpolation(
            cfg, spec, seed=s, retries=retries, box=box, extra_points=pts,
            anchors=[f"good(Curve({d},{g},{r}) + P100x{p100} + P101x{p101})"],
            caveats=[BN_MEMBERSHIP, PATTERN_ASSUMPTION])
        if isinstance(res, Inconclusive):
            return res
        certs.append(res)
    tables = [c.dims for c in certs]
    if any(t != tables[0] for t in tables):
        raise NonGenericSample(f"seeds disagree: {tables}")
    head = certs[0]
    head.witness["stable_seeds"] = list(range(seed, seed + seeds))
    return head


def _spec_to_json(spec: BundleSpec) -> dict:
    return {"twist": spec.twist, "divisor": [[m, c] for m, c in spec.divisor],
            "mods": [{"mark": m.mark, "mult": m.mult,
                      "targets": [[_pair(c) for c in t] for t in m.targets]} for m in spec.mods]}


def _spec_from_json(js: dict) -> BundleSpec:
    mods = tuple(ModSpec(m["mark"], m["mult"],
                         tuple(tuple(Fraction(n, dd) for n, dd in t) for t in m["targets"]))
                 for m in js["mods"])
    return BundleSpec(js["twist"], tuple((m, c) for m, c in js["divisor"]), mods)


def _config_from_json(js: dict) -> CurveConfig:
    comps = []
    for c in js["components"]:
        comps.append(RationalComponent(
            c["name"], [[Fraction(n, dd) for n, dd in p] for p in c["coords"]],
            [(m, Fraction(n, dd)) for m, (n, dd) in c["marks"].items()]))
    return CurveConfig(tuple(comps), tuple(NodeSpec(*n) for n in js["nodes"]))


def recompute(cert: dict) -> list:
    """Recompute the dimension table of a serialized interpolation certificate."""
    w = cert["witness"]
    cfg = _config_from_json(w["config"])
    spec = _spec_from_json(w["spec"])
    ladder = w["ladder"]
    return [[j, *section_dims(cfg, spec.with_points(ladder[:j]), self_check=False)]
            for j in range(len(ladder) + 1)]


def line_instance(rng: random.Random, box: int = 50, max_gens: int = 3):
    """Random line in P^4 with a random twist, divisor and pointing modifications.

    Returns (config, spec, description) where description names the
    modifications symbolically for the bundle calculus.
    """
    p, q = sample_general(rng, 2, 4, box=box)
    while linalg.rank([p, q]) < 2:
        p, q = sample_general(rng, 2, 4, box=box)
    while True:
        ngen = rng.randint(0, max_gens)
        gens = sample_general(rng, ngen, 4, box=box)
        if linalg.rank([p, q] + gens) == 2 + ngen:
            break
    twist = rng.choice([-1, 0, 1])
    nmarks = rng.randint(0, 4)
    line = _line_through("L", p, q)
    taken: set = set()
    marks = [(f"p{i + 1}", _fresh_param(rng, taken, line, box)) for i in range(nmarks)]
    line = line.with_marks(marks)
    cfg = CurveConfig((line,))
    div, mods, sym = {}, [], []
    for name, _ in marks:
        c = rng.randint(-2, 2)
        if c:
            div[name] = c
        if gens and rng.random() < 0.7:
            k = rng.randint(1, 2)
            chosen = sorted(rng.sample(range(ngen), rng.randint(1, ngen)))
            mods.append(ModSpec(name, k, tuple(gens[i] for i in chosen)))
            sym.append((name, k, [f"g{i + 1}" for i in chosen]))
    spec = BundleSpec(twist, div, tuple(mods))
    return cfg, spec, {"twist": twist, "divisor": div, "mods": sym,
                       "gens": [f"g{i + 1}" for i in range(ngen)]}
