"""Purity bound, model surfaces and region classification.

All functions here are closed-form; the vectorised ``*_arr`` helpers back the
scalar API and the Monte Carlo audits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bloch import ModelPoint, marginal_bloch_lengths
from .matcore import DensityMatrix, UnsupportedConfigurationError

SATURATION_TOL = 1e-9
SURFACE_TOL = 1e-10
BALL_RADIUS_SQ = 1.0 / 3.0


class Region(str, Enum):
    PURELY_ENTANGLED = "purely-entangled"
    SEPARABLE_BALL = "purely-separable-ball"
    SEPARABLE_EXTENDED = "purely-separable-extended"
    MIXED = "mixed-region"
    OUTSIDE = "outside-model"

    def __str__(self) -> str:
        return self.value

    @property
    def separable(self) -> bool:
        return self in (Region.SEPARABLE_BALL, Region.SEPARABLE_EXTENDED)


@dataclass(frozen=True)
class RegionVerdict:
    """``margin`` is positive when the point lies strictly inside ``kind``."""

    kind: Region
    margin: float

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "margin": self.margin}


@dataclass(frozen=True)
class BoundReport:
    bound_value: float
    actual_value: float

    @property
    def slack(self) -> float:
        return self.bound_value - self.actual_value

    @property
    def saturated(self) -> bool:
        return abs(self.slack) <= SATURATION_TOL


def _check_d(d: int) -> int:
    if int(d) != d or d < 2:
        raise ValueError(f"local dimension must be an integer >= 2, got {d}")
    return int(d)


def purity_bound(delta, d: int = 2):
    """Largest ``Tr rho^2`` allowed when the local Bloch lengths differ by ``delta``.

    ``(d - sqrt(2d) delta + delta^2) / d``.  Accepts scalars or arrays.
    """
    d = _check_d(d)
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0):
        raise ValueError("delta must be non-negative")
    out = (d - math.sqrt(2 * d) * delta + delta ** 2) / d
    return float(out) if out.ndim == 0 else out


def triangle_comparison_bound(delta, d: int = 2):
    """Purity bound from the linear-entropy triangle inequality at fixed ``delta``.

    ``S_L(AB) >= |S_L(A) - S_L(B)| = |a^2 - b^2| / d``; at fixed ``|a - b|``
    the right side is smallest for ``b = 0``, giving ``(d - delta^2) / d``.
    ``delta`` is clipped to the reachable range ``[0, sqrt(d - 1)]``.
    """
    d = _check_d(d)
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0):
        raise ValueError("delta must be non-negative")
    delta = np.minimum(delta, math.sqrt(d - 1))
    out = (d - delta ** 2) / d
    return float(out) if out.ndim == 0 else out


def purity_curves(n: int = 1001, d: int = 2) -> np.ndarray:
    """Rows ``(delta, purity_bound, triangle_bound)`` over ``[0, sqrt(d-1)]``."""
    delta = np.linspace(0.0, math.sqrt(d - 1), n)
    return np.column_stack([delta, purity_bound(delta, d), triangle_comparison_bound(delta, d)])


def check_theorem1(rho: DensityMatrix, d: int | None = None) -> BoundReport:
    """Compare ``Tr rho^2`` to :func:`purity_bound` of the marginal length gap."""
    dims = tuple(rho.dims)
    if len(dims) != 2 or dims[0] != dims[1]:
        raise UnsupportedConfigurationError(f"need equal local dimensions, got {list(dims)}")
    if d is not None and d != dims[0]:
        raise UnsupportedConfigurationError(f"d={d} does not match dims {list(dims)}")
    a, b = marginal_bloch_lengths(rho)
    return BoundReport(purity_bound(abs(a - b), dims[0]), rho.purity())


def tripartite_bound(a_len: float, b_len: float, d: int = 2) -> float:
    """Largest ``|c|^2`` for a pure tripartite state with local lengths ``a``, ``b``.

    For any ``d >= 2`` the unclamped value is ``>= d/2 - 1 >= 0``, so the
    infeasibility branch only guards against out-of-range inputs.
    """
    d = _check_d(d)
    if a_len < 0 or b_len < 0:
        raise ValueError("Bloch lengths must be non-negative")
    delta = abs(a_len - b_len)
    raw = d - 1 - math.sqrt(2 * d) * delta + delta ** 2
    if raw < -SURFACE_TOL:
        raise ValueError(f"infeasible marginal pair (bound {raw:.3e})")
    return max(0.0, raw)


def qubit_monogamy_slack(a_len: float, b_len: float, c_len: float) -> float:
    """``1 + |b| - |a| - |c|``; non-negative for pure three-qubit states."""
    return 1.0 + b_len - a_len - c_len


def min_monogamy_slack(lengths) -> float:
    """Smallest slack over the three choices of middle party."""
    a, b, c = lengths
    return min(qubit_monogamy_slack(a, b, c), qubit_monogamy_slack(b, a, c),
               qubit_monogamy_slack(a, c, b))


# --- model surfaces --------------------------------------------------------

def lower_surface_arr(x, y):
    return np.maximum(0.0, np.asarray(x) + np.asarray(y) - 1.0)


def upper_radicand_arr(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 3.0 + x ** 2 + y ** 2 - 4.0 * x * y - 4.0 * np.abs(x - y)


def upper_surface_arr(x, y):
    """Upper surface ``sqrt(3 + x^2 + y^2 - 4xy - 4|x - y|)``; NaN where empty."""
    rad = upper_radicand_arr(x, y)
    with np.errstate(invalid="ignore"):
        return np.where(rad < -SURFACE_TOL, np.nan, np.sqrt(np.maximum(rad, 0.0)))


def lower_surface(x: float, y: float) -> float:
    return float(lower_surface_arr(x, y))


def upper_surface(x: float, y: float) -> float:
    """Upper model surface at ``(x, y)``; ``nan`` where no ``z`` is allowed."""
    return float(upper_surface_arr(x, y))


def separable_surface_arr(x, y):
    """Largest ``|T|`` guaranteeing separability at local lengths ``(x, y)``."""
    s = np.asarray(x, dtype=float) + np.asarray(y, dtype=float)
    with np.errstate(invalid="ignore"):
        ball = np.sqrt(np.maximum((2.0 - 3.0 * s ** 2) / 6.0, 0.0))
    return np.where(s <= 2.0 / 3.0, ball, np.where(s <= 1.0, 1.0 - s, s - 1.0))


def separable_surface(x: float, y: float) -> float:
    return float(separable_surface_arr(x, y))


def entangled_threshold_arr(x, y):
    """``1 - |x^2 - y^2|``: points with ``z^2`` above it host only entangled states."""
    return 1.0 - np.abs(np.asarray(x) ** 2 - np.asarray(y) ** 2)


def in_model_arr(points: np.ndarray) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    up = upper_surface_arr(x, y)
    ok = (x >= 0) & (y >= 0) & (z >= 0)
    ok &= (x <= 1 + SURFACE_TOL) & (y <= 1 + SURFACE_TOL)
    ok &= z >= lower_surface_arr(x, y) - SURFACE_TOL
    with np.errstate(invalid="ignore"):
        ok &= np.isfinite(up) & (z <= up + SURFACE_TOL)
    return ok


def in_model(p: ModelPoint) -> bool:
    return bool(in_model_arr(np.array(p.as_tuple()))[()])


def classify_arr(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`classify_point`; returns ``(kinds, margins)``.

    ``kinds`` is an object array of :class:`Region` members.
    """
    p = np.atleast_2d(np.asarray(points, dtype=float))
    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    n = len(p)
    kinds = np.empty(n, dtype=object)
    kinds[:] = Region.MIXED

    ent_gap = z ** 2 - entangled_threshold_arr(x, y)
    ball_gap = BALL_RADIUS_SQ - (x ** 2 + y ** 2 + z ** 2)
    sep_gap = separable_surface_arr(x, y) - z
    # mixed-region margin: distance to whichever deciding surface is closer
    margins = np.minimum(-ent_gap, -sep_gap)

    up = upper_surface_arr(x, y)
    with np.errstate(invalid="ignore"):
        outside_gap = np.maximum.reduce([
            lower_surface_arr(x, y) - z,
            np.where(np.isfinite(up), z - up, np.inf),
            x - 1.0, y - 1.0,
        ])
    outside = ~in_model_arr(p)

    ext = sep_gap >= -SURFACE_TOL
    kinds[ext] = Region.SEPARABLE_EXTENDED
    margins = np.where(ext, sep_gap, margins)
    ball = ball_gap >= 0.0
    kinds[ball] = Region.SEPARABLE_BALL
    margins = np.where(ball, ball_gap, margins)
    ent = ent_gap > SURFACE_TOL
    kinds[ent] = Region.PURELY_ENTANGLED
    margins = np.where(ent, ent_gap, margins)
    kinds[outside] = Region.OUTSIDE
    margins = np.where(outside, outside_gap, margins)
    return kinds, margins


def classify_point(p: ModelPoint) -> RegionVerdict:
    """Most specific region of the model that contains ``p``.

    Points within 1e-10 of the entanglement threshold count as mixed-region,
    since separable states reach that boundary.
    """
    kinds, margins = classify_arr(np.array([p.as_tuple()]))
    return RegionVerdict(kinds[0], float(margins[0]))


def chsh_violation_possible(p: ModelPoint) -> bool:
    """Necessary condition ``|T| > 1`` for a CHSH violation."""
    return p.z > 1.0


def surface_mesh(grid: int) -> np.ndarray:
    """Rows ``(x, y, z_lower, z_upper)`` on a ``grid x grid`` mesh of the unit square."""
    if grid < 2:
        raise ValueError("grid must be >= 2")
    g = np.linspace(0.0, 1.0, grid)
    xx, yy = np.meshgrid(g, g, indexing="ij")
    x, y = xx.ravel(), yy.ravel()
    lo = lower_surface_arr(x, y)
    up = upper_surface_arr(x, y)
    lo = np.where(np.isfinite(up), lo, np.nan)
    return np.column_stack([x, y, lo, up])
