"""Closed-form Brill-Noether arithmetic for curves in P^3 and P^4.

Everything here is exact integer arithmetic on plain ``int``; there is no
overflow regime.
"""
from __future__ import annotations

from dataclasses import dataclass, field

TWISTED_EXCEPTIONS = frozenset({(6, 2), (8, 5), (9, 6), (10, 7)})
UNTWISTED_EXCEPTIONS = frozenset({(6, 2)})


class NotBrillNoether(ValueError):
    """Raised when an operation needs rho >= 0 and the pair has rho < 0."""


@dataclass(frozen=True)
class BNPair:
    d: int
    g: int
    r: int = 4

    def __post_init__(self):
        if self.r not in (3, 4):
            raise ValueError(f"ambient dimension must be 3 or 4, got {self.r}")
        if self.g < 0:
            raise ValueError("genus must be non-negative")

    @property
    def is_bn(self) -> bool:
        return rho(self) >= 0

    def require_bn(self) -> "BNPair":
        if not self.is_bn:
            raise NotBrillNoether(
                f"({self.d},{self.g}) in P^{self.r} has rho = {rho(self)} < 0")
        return self

    def __str__(self):
        return f"({self.d},{self.g},{self.r})"


def rho(p: BNPair) -> int:
    r = p.r
    return (r + 1) * p.d - r * p.g - r * (r + 1)


def component_dimension(p: BNPair) -> int:
    p.require_bn()
    return (p.r + 1) * p.d - (p.r - 3) * (p.g - 1)


def f_points(p: BNPair) -> int:
    """Expected number of general points a general BN-curve passes through."""
    return component_dimension(p) // (p.r - 1)


def normal_degree(d: int, g: int, r: int) -> int:
    return (r + 1) * d + 2 * g - 2


def chi_normal(p: BNPair, twist: int = 0, extra_divisor_degree: int = 0,
               modification_corank_sum: int = 0) -> int:
    """Euler characteristic of N_C(twist)(-D)[mods].

    ``extra_divisor_degree`` is the degree of an effective divisor twisted
    *down*; ``modification_corank_sum`` is the sum over modifications of
    corank times divisor degree.
    """
    rank = p.r - 1
    return (normal_degree(p.d, p.g, p.r) + twist * rank * p.d
            - rank * extra_divisor_degree - modification_corank_sum
            + rank * (1 - p.g))


def d_min(g: int, r: int = 4,
          exceptions: frozenset = TWISTED_EXCEPTIONS) -> int:
    """Smallest degree d with rho(d, g, r) >= 0 and (d, g) not excepted."""
    d = 1
    while rho(BNPair(d, g, r)) < 0 or (d, g) in exceptions:
        d += 1
    return d


@dataclass(frozen=True)
class InterpolationStatus:
    pair: BNPair
    is_bn: bool
    twisted_good: bool | None = None
    untwisted_good: bool | None = None
    point_count: int | None = None
    constrained_answers: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "d": self.pair.d, "g": self.pair.g, "r": self.pair.r,
            "rho": rho(self.pair),
            "brill_noether": self.is_bn,
            "twisted_good": self.twisted_good,
            "untwisted_good": self.untwisted_good,
            "f": self.point_count,
            "constrained": self.constrained_answers,
        }


_QUADRICS = "[quadrics] Theorem 1.6"

_CONSTRAINED_SPECIAL = {
    (8, 5): {
        "d_on_hyperplane": False,
        "d_minus_1_on_hyperplane": True,
        "quadric_complete_intersection_points": 13,
        "note": ("hyperplane section is 8 points on a complete intersection of "
                 "3 quadrics; 7 of them determine the 8th, so the curve passes "
                 "through f+1 = 13 points with 8 on such a complete intersection"),
        "citations": [_QUADRICS, "[joint] Proposition 4.12"],
    },
    (9, 6): {
        "d_on_hyperplane": False,
        "d_minus_1_on_hyperplane": True,
        "quadric_complete_intersection_points": 13,
        "note": ("the curve lies on a quartic del Pezzo surface; it passes "
                 "through f = 13 points with 9 on an elliptic normal curve in "
                 "the hyperplane, but not through 14 such points"),
        "citations": [_QUADRICS, "del Pezzo surface lemmas (axiom-backed)"],
    },
    (10, 7): {
        "d_on_hyperplane": False,
        "d_minus_1_on_hyperplane": True,
        "quadric_complete_intersection_points": 15,
        "note": ("hyperplane section is 10 general points on a quadric; the "
                 "curve passes through f+1 = 15 points with 10 on a quadric in "
                 "the hyperplane"),
        "citations": [_QUADRICS, "good(Curve(4,1,3).add(P101).add(P100))"],
    },
}


def status(p: BNPair, query: bool = False) -> InterpolationStatus:
    """Theorem-level interpolation status of a pair in P^4.

    With ``query=True`` a non-BN pair gives a status with ``is_bn=False``
    instead of raising.
    """
    if p.r != 4:
        raise ValueError("status is only hard-coded for r = 4; P^3 statuses "
                         "come from the axiom table")
    if not p.is_bn:
        if query:
            return InterpolationStatus(p, False)
        raise NotBrillNoether(f"{p} is not a Brill-Noether pair")
    key = (p.d, p.g)
    twisted = key not in TWISTED_EXCEPTIONS
    untwisted = key not in UNTWISTED_EXCEPTIONS
    if key in _CONSTRAINED_SPECIAL:
        constrained = dict(_CONSTRAINED_SPECIAL[key])
    else:
        constrained = {
            "d_on_hyperplane": True,
            "d_minus_1_on_hyperplane": True,
            "quadric_complete_intersection_points": None,
            "note": "f points, d of them on a transverse hyperplane",
            "citations": [],
        }
    constrained["unconstrained_points"] = f_points(p)
    return InterpolationStatus(p, True, twisted, untwisted, f_points(p),
                               constrained)
