"""Random and grid ensembles, point clouds, and Monte Carlo inequality audits.

Samples are produced in blocks of ``BLOCK`` states; block ``b`` draws from
``seeded_rng(split_seed(seed, b))``, so the sample at offset ``k`` can be
regenerated from block ``k // BLOCK`` alone (see :func:`regenerate`).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import bounds, families
from .bloch import marginal_lengths_batch, model_points_batch, purity_batch
from .entanglement import (
    BOUNDARY_UPPER,
    CONCURRENCE_TOL,
    NPT_TOL,
    concurrence_batch,
    ppt_min_batch,
    witness_batch,
)
from .matcore import DensityMatrix, eigvalsh_batch, ket_to_dm, partial_trace_array, seeded_rng, split_seed

BLOCK = 1000
SCHEMA_VERSION = "v1"
SEPARABLE_COMPONENTS = 8
THREADS_ENV = "BLOCHBODY_THREADS"

KINDS = ("haar-pure", "hs-mixed", "fixed-rank", "product", "separable-mixture", "family-grid")
GRID_FAMILIES = ("lb", "ub", "boundary", "werner", "mems", "diagonal", "cc")


@dataclass(frozen=True)
class EnsembleSpec:
    """What to sample.

    For ``family-grid`` the ``count`` is the number of grid points per
    parameter axis and ``family`` picks one of :data:`GRID_FAMILIES`.
    """

    kind: str
    count: int
    dims: tuple[int, ...] = (2, 2)
    seed: int = 0
    rank: int | None = None
    family: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}; known: {', '.join(KINDS)}")
        if int(self.count) < 1:
            raise ValueError("count must be >= 1")
        if not self.dims or any(d < 2 for d in self.dims):
            raise ValueError(f"invalid dims {list(self.dims)}")
        total = int(np.prod(self.dims))
        if total > 64:
            raise ValueError(f"total dimension {total} exceeds 64")
        if self.kind == "fixed-rank":
            if self.rank is None or not 1 <= self.rank <= total:
                raise ValueError(f"fixed-rank needs 1 <= rank <= {total}, got {self.rank}")
        elif self.rank is not None:
            raise ValueError("rank is only used by fixed-rank ensembles")
        if self.kind == "family-grid":
            if self.dims != (2, 2):
                raise ValueError("family-grid ensembles are two-qubit only")
            if self.family not in GRID_FAMILIES:
                raise ValueError(f"family-grid needs family in {GRID_FAMILIES}, got {self.family!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def pure(self) -> bool:
        return self.kind == "haar-pure" or (self.kind == "fixed-rank" and self.rank == 1)

    def to_json(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}


# ---------------------------------------------------------------------------
# Sampling


def _gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def haar_kets(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    v = _gaussian(rng, (n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def induced_states(rng: np.random.Generator, n: int, dim: int, ancilla: int) -> np.ndarray:
    """Partial trace over an ``ancilla``-dimensional part of Haar-random pure states.

    ``ancilla == dim`` gives the Hilbert-Schmidt measure.
    """
    psi = haar_kets(rng, n, dim * ancilla)
    return partial_trace_array(ket_to_dm(psi), (dim, ancilla), [0])


def _product_states(rng: np.random.Generator, n: int, dims: Sequence[int], pure: bool) -> np.ndarray:
    out = None
    for d in dims:
        local = ket_to_dm(haar_kets(rng, n, d)) if pure else induced_states(rng, n, d, d)
        out = local if out is None else np.einsum("nij,nkl->nikjl", out, local).reshape(
            n, out.shape[1] * d, out.shape[2] * d)
    return out


def _separable_mixtures(rng: np.random.Generator, n: int, dims: Sequence[int]) -> np.ndarray:
    weights = rng.dirichlet(np.ones(SEPARABLE_COMPONENTS), size=n)
    total = int(np.prod(dims))
    out = np.zeros((n, total, total), dtype=complex)
    for k in range(SEPARABLE_COMPONENTS):
        out += weights[:, k, None, None] * _product_states(rng, n, dims, pure=True)
    return out


def _draw_block(spec: EnsembleSpec, block: int, n: int) -> np.ndarray:
    rng = seeded_rng(split_seed(spec.seed, block))
    dim = spec.total_dim
    if spec.kind == "haar-pure":
        return ket_to_dm(haar_kets(rng, n, dim))
    if spec.kind == "hs-mixed":
        return induced_states(rng, n, dim, dim)
    if spec.kind == "fixed-rank":
        return induced_states(rng, n, dim, spec.rank)
    if spec.kind == "product":
        return _product_states(rng, n, spec.dims, pure=False)
    if spec.kind == "separable-mixture":
        return _separable_mixtures(rng, n, spec.dims)
    raise AssertionError(spec.kind)


def _simplex_grid(n: int) -> list[tuple[float, float]]:
    step = 1.0 / (n - 1) if n > 1 else 0.0
    return [(i * step, j * step) for i in range(n) for j in range(n) if i + j <= n - 1]


def family_grid(family: str, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic grid of family members: ``(matrices, params)``.

    ``params`` has two columns (unused ones are NaN).
    """
    lin = np.linspace(0.0, 1.0, n) if n > 1 else np.array([0.5])
    params: list[tuple[float, float]] = []
    mats: list[np.ndarray] = []
    if family == "lb":
        for p, q in _simplex_grid(n):
            params.append((p, q))
            mats.append(families.rho_lb(p, q).matrix)
    elif family == "ub":
        for p in lin:
            for q in lin:
                params.append((p, q))
                mats.append(families.rho_ub(p, q).matrix)
    elif family == "boundary":
        for x in lin:
            for y in lin:
                params.append((x, y))
                mats.append(families.boundary_state(x, y).matrix)
    elif family == "werner":
        for p in lin:
            params.append((p, math.nan))
            mats.append(families.werner(p).matrix)
    elif family == "mems":
        for c in lin:
            params.append((c, math.nan))
            mats.append(families.mems_optimal(c).matrix)
    elif family == "diagonal":
        step = 1.0 / (n - 1) if n > 1 else 0.0
        for i in range(n):
            for j in range(n - i):
                for k in range(n - i - j):
                    p = np.array([i, j, k, n - 1 - i - j - k], dtype=float) * step
                    if n == 1:
                        p = np.full(4, 0.25)
                    params.append((p[0], p[1]))
                    mats.append(families.diagonal_state(p).matrix)
    elif family == "cc":
        params.append((math.nan, math.nan))
        mats.append(families.cc_state().matrix)
    else:
        raise ValueError(f"unknown grid family {family!r}")
    return np.array(mats), np.array(params, dtype=float)


def sample_blocks(spec: EnsembleSpec) -> Iterator[tuple[int, np.ndarray, np.ndarray | None]]:
    """Yield ``(offset, matrices, params)`` blocks covering the ensemble."""
    if spec.kind == "family-grid":
        mats, params = family_grid(spec.family, spec.count)
        for start in range(0, len(mats), BLOCK):
            yield start, mats[start:start + BLOCK], params[start:start + BLOCK]
        return
    for b, start in enumerate(range(0, spec.count, BLOCK)):
        n = min(BLOCK, spec.count - start)
        yield start, _draw_block(spec, b, n), None


def regenerate(spec: EnsembleSpec, offset: int) -> DensityMatrix:
    """Rebuild the single sample at ``offset`` (e.g. a reported worst case)."""
    if spec.kind == "family-grid":
        mats, _ = family_grid(spec.family, spec.count)
        return DensityMatrix.hermitized(mats[offset], spec.dims)
    if not 0 <= offset < spec.count:
        raise ValueError(f"offset {offset} outside ensemble of size {spec.count}")
    b = offset // BLOCK
    n = min(BLOCK, spec.count - b * BLOCK)
    return DensityMatrix.hermitized(_draw_block(spec, b, n)[offset - b * BLOCK], spec.dims)


def sample(spec: EnsembleSpec) -> Iterator[DensityMatrix]:
    """Validated states of the ensemble, in order."""
    for _, mats, _ in sample_blocks(spec):
        for m in mats:
            yield DensityMatrix.hermitized(m, spec.dims)


# ---------------------------------------------------------------------------
# Point clouds


@dataclass(frozen=True)
class SampleRecord:
    point: tuple[float, float, float]
    purity: float
    concurrence: float
    pt_min_eig: float
    verdict: bounds.RegionVerdict
    seed_offset: int
    family: str | None = None
    params: tuple[float, float] | None = None

    CSV_HEADER = "x,y,z,purity,concurrence,pt_min_eig,verdict,family,p1,p2,seed_offset"


def _require_two_qubit_spec(spec: EnsembleSpec) -> None:
    if spec.dims != (2, 2):
        raise ValueError(f"point clouds need dims [2, 2], got {list(spec.dims)}")


def point_cloud(spec: EnsembleSpec) -> Iterator[SampleRecord]:
    _require_two_qubit_spec(spec)
    for start, mats, params in sample_blocks(spec):
        pts = model_points_batch(mats)
        pur = purity_batch(mats)
        conc = concurrence_batch(mats)
        ptm = ppt_min_batch(mats)
        kinds, margins = bounds.classify_arr(pts)
        for k in range(len(mats)):
            yield SampleRecord(
                point=tuple(float(v) for v in pts[k]),
                purity=float(pur[k]),
                concurrence=float(conc[k]),
                pt_min_eig=float(ptm[k]),
                verdict=bounds.RegionVerdict(kinds[k], float(margins[k])),
                seed_offset=start + k,
                family=spec.family,
                params=None if params is None else (float(params[k, 0]), float(params[k, 1])),
            )


# ---------------------------------------------------------------------------
# Audits


@dataclass
class CheckResult:
    """One audited inequality.

    ``max_violation`` is the largest residual seen (positive = violated,
    negative = worst-case margin); ``boundary`` counts samples left undecided
    because they sit in a tolerance band.
    """

    name: str
    samples: int = 0
    violations: int = 0
    max_violation: float = -math.inf
    worst_seed_offset: int = -1
    boundary: int = 0

    def absorb(self, residual: np.ndarray, violated: np.ndarray, offset: int,
               boundary: np.ndarray | None = None, applies: np.ndarray | None = None) -> None:
        if applies is None:
            applies = np.ones(len(residual), dtype=bool)
        self.samples += int(applies.sum())
        self.violations += int((violated & applies).sum())
        if boundary is not None:
            self.boundary += int((boundary & applies).sum())
        if applies.any():
            r = np.where(applies, residual, -np.inf)
            k = int(np.argmax(r))
            self._offer(float(r[k]), offset + k)

    def _offer(self, value: float, where: int) -> None:
        if value > self.max_violation or (value == self.max_violation and 0 <= where < self.worst_seed_offset):
            self.max_violation = value
            self.worst_seed_offset = where

    def merge(self, other: "CheckResult") -> "CheckResult":
        out = CheckResult(self.name, self.samples + other.samples, self.violations + other.violations,
                          self.max_violation, self.worst_seed_offset, self.boundary + other.boundary)
        if other.worst_seed_offset >= 0:
            out._offer(other.max_violation, other.worst_seed_offset)
        return out

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "samples": self.samples,
            "violations": self.violations,
            "max_violation": None if self.worst_seed_offset < 0 else self.max_violation,
            "worst_seed_offset": self.worst_seed_offset,
            "boundary": self.boundary,
        }


@dataclass
class AuditReport:
    spec: EnsembleSpec
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.violations == 0 for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "ensemble": self.spec.to_json(),
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
        }


BIPARTITE_QUBIT_CHECKS = (
    "theorem1", "model-membership", "classifier-soundness", "concurrence-ppt",
    "witness-soundness", "mems-dominance", "memms-dominance", "full-rank-ball",
)
ALL_CHECKS = BIPARTITE_QUBIT_CHECKS + ("pure-arc", "tripartite", "monogamy", "family-property")

BOUND_TOL = 1e-9
MEMBERSHIP_TOL = 1e-10
DOMINANCE_TOL = 1e-6
ARC_TOL = 1e-10
BALL_MARGIN = 1e-6
FULL_RANK_EIG = 1e-10
FAMILY_TOL = 1e-9


def compatible_checks(spec: EnsembleSpec) -> tuple[str, ...]:
    dims = spec.dims
    equal = len(set(dims)) == 1
    if dims == (2, 2):
        extra = ("pure-arc",) if spec.pure else ()
        fam = ("family-property",) if spec.kind == "family-grid" else ()
        return BIPARTITE_QUBIT_CHECKS + extra + fam
    if len(dims) == 2 and equal:
        return ("theorem1",)
    if len(dims) == 3 and equal and spec.pure:
        return ("tripartite", "monogamy") if dims[0] == 2 else ("tripartite",)
    return ()


def resolve_checks(spec: EnsembleSpec, checks: Sequence[str] | str) -> tuple[str, ...]:
    allowed = compatible_checks(spec)
    if checks == "all" or list(checks) == ["all"]:
        if not allowed:
            raise ValueError(f"no audit checks apply to {spec.kind} with dims {list(spec.dims)}")
        return allowed
    out = []
    for name in checks:
        if name not in ALL_CHECKS:
            raise ValueError(f"unknown check {name!r}; known: {', '.join(ALL_CHECKS)}")
        if name not in allowed:
            raise ValueError(f"check {name!r} is incompatible with {spec.kind} dims {list(spec.dims)}")
        if name not in out:
            out.append(name)
    return tuple(out)


def _family_property(family: str, mats: np.ndarray, params: np.ndarray, pts: np.ndarray,
                     pur: np.ndarray, conc: np.ndarray) -> np.ndarray:
    """Residual of the documented property of each grid family."""
    x, y, z = pts.T
    if family == "lb":
        return np.abs(z - (x + y - 1.0))
    if family == "ub":
        p, q = params.T
        purity_err = np.abs(pur - (1 - 2 * p + 2 * p ** 2))
        gap = np.abs(bounds.upper_surface_arr(x, y) - z)
        on_locus = np.array([families.ub_saturates(a, b) for a, b in params])
        return np.maximum(purity_err, np.where(on_locus, gap, 0.0))
    if family == "boundary":
        return np.abs(bounds.upper_surface_arr(x, y) - z)
    if family == "werner":
        p = params[:, 0]
        return np.maximum(np.abs(conc - np.maximum(0.0, (3 * p - 1) / 2)),
                          np.abs(z - math.sqrt(3) * p) + x + y)
    if family == "mems":
        return np.abs(conc - params[:, 0])
    if family == "diagonal":
        return np.maximum.reduce([x + y - z - 1, x - y + z - 1, -x + y + z - 1,
                                  np.abs(ppt_min_batch(mats) - np.min(np.real(
                                      np.diagonal(mats, axis1=1, axis2=2)), axis=1))])
    if family == "cc":
        return np.abs(pts - np.array([0.0, 0.0, 1.0])).max(axis=1) + conc
    raise ValueError(family)


def _audit_block(spec: EnsembleSpec, names: tuple[str, ...], start: int, mats: np.ndarray,
                 params: np.ndarray | None) -> dict[str, CheckResult]:
    res = {name: CheckResult(name) for name in names}
    n = len(mats)
    dims = spec.dims

    if dims == (2, 2):
        pts = model_points_batch(mats)
        x, y, z = pts.T
        pur = purity_batch(mats)
        need_ent = {"classifier-soundness", "concurrence-ppt", "witness-soundness",
                    "mems-dominance", "memms-dominance", "family-property"} & set(names)
        conc = concurrence_batch(mats) if need_ent else None
        ptm = ppt_min_batch(mats) if need_ent else None
        if ptm is not None:
            npt = ptm < -NPT_TOL
            band = (ptm >= -NPT_TOL) & (ptm <= BOUNDARY_UPPER)

        if "theorem1" in res:
            r = pur - bounds.purity_bound(np.abs(x - y), 2)
            res["theorem1"].absorb(r, r > BOUND_TOL, start)
        if "model-membership" in res:
            up = bounds.upper_surface_arr(x, y)
            r = np.maximum.reduce([bounds.lower_surface_arr(x, y) - z,
                                   np.where(np.isfinite(up), z - up, np.inf), x - 1, y - 1])
            res["model-membership"].absorb(r, ~bounds.in_model_arr(pts), start)
        if "classifier-soundness" in res:
            kinds, _ = bounds.classify_arr(pts)
            ent_cls = kinds == bounds.Region.PURELY_ENTANGLED
            sep_cls = np.array([k.separable for k in kinds], dtype=bool)
            bad_ent = ent_cls & ~npt & ~band
            bad_sep = sep_cls & npt
            r = np.where(ent_cls, ptm, np.where(sep_cls, -ptm, -np.inf))
            res["classifier-soundness"].absorb(r, bad_ent | bad_sep, start, boundary=band,
                                               applies=ent_cls | sep_cls)
        if "concurrence-ppt" in res:
            pos = conc > CONCURRENCE_TOL
            r = np.where(npt, CONCURRENCE_TOL - conc, conc - CONCURRENCE_TOL)
            res["concurrence-ppt"].absorb(r, (npt != pos) & ~band, start, boundary=band)
        if "witness-soundness" in res:
            wit = witness_batch(pts)
            res["witness-soundness"].absorb(ptm, wit & ~npt & ~band, start, boundary=band, applies=wit)
        if "mems-dominance" in res:
            r = conc - families.mems_frontier(pur)
            res["mems-dominance"].absorb(r, r > DOMINANCE_TOL, start)
        if "memms-dominance" in res:
            r = conc - families.memms_concurrence(x, y)
            res["memms-dominance"].absorb(r, r > DOMINANCE_TOL, start)
        if "full-rank-ball" in res:
            inside = np.sqrt(x ** 2 + y ** 2 + z ** 2) < 1.0 / 3.0 - BALL_MARGIN
            r = np.full(n, -np.inf)
            if inside.any():
                r[inside] = FULL_RANK_EIG - eigvalsh_batch(mats[inside], check=False)[:, -1]
            res["full-rank-ball"].absorb(r, r >= 0, start, applies=inside)
        if "pure-arc" in res:
            r = np.maximum(np.abs(x - y), np.abs(np.sqrt(x ** 2 + y ** 2 + z ** 2) - math.sqrt(3)))
            res["pure-arc"].absorb(r, r > ARC_TOL, start)
        if "family-property" in res:
            r = _family_property(spec.family, mats, params, pts, pur, conc)
            res["family-property"].absorb(r, r > FAMILY_TOL, start)
        return res

    lengths = marginal_lengths_batch(mats, dims)
    d = dims[0]
    if "theorem1" in res:
        pur = purity_batch(mats)
        r = pur - bounds.purity_bound(np.abs(lengths[:, 0] - lengths[:, 1]), d)
        res["theorem1"].absorb(r, r > BOUND_TOL, start)
    if "tripartite" in res:
        worst = np.full(n, -np.inf)
        for ia, ib, ic in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
            delta = np.abs(lengths[:, ia] - lengths[:, ib])
            bound = d - 1 - math.sqrt(2 * d) * delta + delta ** 2
            worst = np.maximum(worst, lengths[:, ic] ** 2 - np.maximum(bound, 0.0))
        res["tripartite"].absorb(worst, worst > BOUND_TOL, start)
    if "monogamy" in res:
        a, b, c = lengths.T
        slack = np.minimum.reduce([1 + b - a - c, 1 + a - b - c, 1 + c - a - b])
        res["monogamy"].absorb(-slack, -slack > BOUND_TOL, start)
    return res


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def audit(spec: EnsembleSpec, checks: Sequence[str] | str = "all") -> AuditReport:
    """Run the selected checks over every sample of ``spec``.

    Blocks may be processed in parallel (``BLOCHBODY_THREADS``); merging uses
    only sums and maxima, so the report does not depend on scheduling.
    """
    names = resolve_checks(spec, checks)
    totals = {name: CheckResult(name) for name in names}

    def work(item):
        start, mats, params = item
        return _audit_block(spec, names, start, mats, params)

    threads = _threads()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, sample_blocks(spec)))
    else:
        parts = map(work, sample_blocks(spec))
    for part in parts:
        for name in names:
            totals[name] = totals[name].merge(part[name])
    return AuditReport(spec, [totals[name] for name in names])
