"""Named two-qubit (and one three-qubit) state families.

Every constructor returns a validated :class:`DensityMatrix`.  Basis order is
``|00>, |01>, |10>, |11>`` with the first label on subsystem A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bloch import BlochDecomposition, reconstruct
from .entanglement import NPT_TOL, ppt_min_batch
from .matcore import DensityMatrix, NotAStateError, ket_to_dm

KET = {label: np.eye(4, dtype=complex)[k] for k, label in enumerate(("00", "01", "10", "11"))}
ZERO = np.array([1, 0], dtype=complex)
PARAM_TOL = 1e-12


class ExtremalSearchError(RuntimeError):
    """No entangled state found in the extremal ansatz for the given inputs."""


def _in_range(name: str, v: float, lo: float, hi: float) -> float:
    v = float(v)
    if not (lo - PARAM_TOL <= v <= hi + PARAM_TOL):
        raise ValueError(f"{name}={v} outside [{lo}, {hi}]")
    return min(max(v, lo), hi)


def _proj(label: str) -> np.ndarray:
    return ket_to_dm(KET[label])


def phi_plus() -> DensityMatrix:
    return DensityMatrix((2, 2), ket_to_dm((KET["00"] + KET["11"]) / math.sqrt(2)))


def rho_lb(p: float, q: float) -> DensityMatrix:
    """``p |0><0| x I/2 + q I/2 x |0><0| + (1-p-q) |00><00|``.

    Lies on the lower surface ``|T| = |a| + |b| - 1``.
    """
    p = _in_range("p", p, 0.0, 1.0)
    q = _in_range("q", q, 0.0, 1.0)
    if p + q > 1.0 + PARAM_TOL:
        raise ValueError(f"need p + q <= 1, got {p + q}")
    zero = ket_to_dm(ZERO)
    half = np.eye(2) / 2
    m = p * np.kron(zero, half) + q * np.kron(half, zero) + (1 - p - q) * _proj("00")
    return DensityMatrix.hermitized(m, (2, 2))


def phi_q(q: float) -> np.ndarray:
    """``sqrt(q)|00> + sqrt(1-q)|11>``."""
    return math.sqrt(q) * KET["00"] + math.sqrt(1 - q) * KET["11"]


def rho_ub(p: float, q: float, i: int = 0, j: int = 1) -> DensityMatrix:
    """``p |phi(q)><phi(q)| + (1-p) |ij><ij|`` with ``i != j``.

    The purity is ``1 - 2p + 2p^2``.  The state reaches the upper model
    surface only where the local Bloch vectors are parallel, see
    :func:`ub_saturates`; :func:`boundary_state` covers the whole surface.
    """
    p = _in_range("p", p, 0.0, 1.0)
    q = _in_range("q", q, 0.0, 1.0)
    if i not in (0, 1) or j not in (0, 1):
        raise ValueError("i and j must be bits")
    if i == j:
        raise ValueError("rho_ub needs i != j")
    m = p * ket_to_dm(phi_q(q)) + (1 - p) * _proj(f"{i}{j}")
    return DensityMatrix.hermitized(m, (2, 2))


def memms(p: float, q: float, i: int = 0, j: int = 1) -> DensityMatrix:
    """Alias of :func:`rho_ub` (upper-boundary states are the MEMMS)."""
    return rho_ub(p, q, i, j)


def ub_local_z(p: float, q: float, i: int = 0, j: int = 1) -> tuple[float, float]:
    """Signed ``<s_z x I>`` and ``<I x s_z>`` of :func:`rho_ub`."""
    zi = 1.0 - 2.0 * i
    zj = 1.0 - 2.0 * j
    return p * (2 * q - 1) + (1 - p) * zi, p * (2 * q - 1) + (1 - p) * zj


def ub_saturates(p: float, q: float, tol: float = 1e-12) -> bool:
    """Closed-form locus on which :func:`rho_ub` saturates the purity bound.

    Saturation needs ``| |a| - |b| | = 1 - |1 - 2p|``.  That holds at the
    pure ends (``p`` in {0, 1}), for product ``phi`` (``q`` in {0, 1}), and
    when ``p >= 1/2`` with both local z components of equal sign,
    ``p |2q - 1| >= 1 - p``.
    """
    if min(p, 1 - p) <= tol or min(q, 1 - q) <= tol:
        return True
    return p >= 0.5 - tol and p * abs(2 * q - 1) >= 1 - p - tol


def boundary_state(x: float, y: float) -> DensityMatrix:
    """Rank-2 state on the upper model surface with local lengths ``(x, y)``.

    ``(1 - w) |phi(q)><phi(q)| + w |ij><ij|`` with ``w = |x - y| / 2`` and
    ``q`` chosen so both Bloch vectors point along +z; ``|01>`` is used when
    ``x >= y``, ``|10>`` otherwise.
    """
    x = _in_range("x", x, 0.0, 1.0)
    y = _in_range("y", y, 0.0, 1.0)
    w = abs(x - y) / 2
    u = (x + y) / 2
    q = 0.5 * (1.0 + u / (1.0 - w))
    q = min(max(q, 0.0), 1.0)
    proj = _proj("01") if x >= y else _proj("10")
    m = (1 - w) * ket_to_dm(phi_q(q)) + w * proj
    return DensityMatrix.hermitized(m, (2, 2))


def memms_concurrence(x, y):
    """Largest concurrence at local lengths ``(x, y)``: ``sqrt((1 - max)(1 + min))``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    hi = np.maximum(x, y)
    lo = np.minimum(x, y)
    return np.sqrt(np.maximum((1 - hi) * (1 + lo), 0.0))


def werner(p: float) -> DensityMatrix:
    """``p |phi+><phi+| + (1-p) I/4``."""
    p = _in_range("p", p, 0.0, 1.0)
    m = p * phi_plus().matrix + (1 - p) * np.eye(4) / 4
    return DensityMatrix.hermitized(m, (2, 2))


def cc_state() -> DensityMatrix:
    """Classically correlated ``(|00><00| + |11><11|) / 2``."""
    return DensityMatrix((2, 2), (_proj("00") + _proj("11")) / 2)


def entangling_unitary(theta: float) -> np.ndarray:
    """Rotation by ``theta`` in span{|00>, |11>}, identity on |01>, |10>."""
    c, s = math.cos(theta), math.sin(theta)
    u = np.eye(4, dtype=complex)
    u[0, 0] = c
    u[3, 3] = c
    u[3, 0] = s
    u[0, 3] = -s
    return u


def rotated_lower_edge(p: float, theta: float) -> DensityMatrix:
    """``U(theta) rho_lb(p, 0) U(theta)^dagger``."""
    u = entangling_unitary(theta)
    return DensityMatrix.hermitized(u @ rho_lb(p, 0.0).matrix @ u.conj().T, (2, 2))


def rotated_edge_saturates(p: float, theta: float, tol: float = 1e-12) -> bool:
    """Where :func:`rotated_lower_edge` sits on the upper surface.

    The rotated state is ``(1 - p/2) |phi_theta> + (p/2) |01>``; it saturates
    iff ``p = 0`` or ``(2 - p) |cos 2 theta| >= p``.
    """
    if p <= tol:
        return True
    return (2 - p) * abs(math.cos(2 * theta)) >= p - tol


def mems(x: float, theta: float) -> DensityMatrix:
    """``x(|00><00| + |11><11|) + (1-2x-theta)|01><01| + theta |phi+><phi+|``.

    Concurrence equals ``theta``.
    """
    theta = _in_range("theta", theta, 0.0, 1.0)
    x = float(x)
    if x < -PARAM_TOL or 2 * x + theta > 1 + PARAM_TOL:
        raise ValueError(f"need x >= 0 and 2x + theta <= 1, got x={x}, theta={theta}")
    x = max(x, 0.0)
    w01 = max(1 - 2 * x - theta, 0.0)
    m = x * (_proj("00") + _proj("11")) + w01 * _proj("01") + theta * phi_plus().matrix
    return DensityMatrix.hermitized(m, (2, 2))


def mems_optimal(c: float) -> DensityMatrix:
    """Member of the MEMS family with concurrence ``c`` on the optimal branch."""
    c = _in_range("C", c, 0.0, 1.0)
    if c <= 2.0 / 3.0:
        return mems(1.0 / 3.0 - c / 2.0, c)
    return mems(0.0, c)


def mems_frontier(purity):
    """Largest concurrence at a given global purity."""
    p = np.asarray(purity, dtype=float)
    low = np.sqrt(np.maximum(2.0 * (p - 1.0 / 3.0), 0.0))
    high = 0.5 * (1.0 + np.sqrt(np.maximum(2.0 * p - 1.0, 0.0)))
    return np.where(p <= 5.0 / 9.0, low, high)


def tripartite_saturating(x: float, y: float) -> np.ndarray:
    """``sqrt((x-y)/2)|001> + sqrt((1+y)/2)|010> + sqrt((1-x)/2)|100>``.

    Needs ``-1 <= y <= x <= 1``.  Local lengths are ``(|x|, |y|, |1 - x + y|)``,
    which saturate ``|a| + |c| <= 1 + |b|`` whenever ``0 <= y <= x``.
    """
    x, y = float(x), float(y)
    amps = np.array([(x - y) / 2, (1 + y) / 2, (1 - x) / 2])
    if np.any(amps < -PARAM_TOL):
        raise ValueError(f"need -1 <= y <= x <= 1, got x={x}, y={y}")
    amps = np.sqrt(np.maximum(amps, 0.0))
    psi = np.zeros(8, dtype=complex)
    psi[0b001], psi[0b010], psi[0b100] = amps
    return psi


def axial_correlation_state(a_z: float, b_z: float, c_zz: float, c_xx: float, c_yy: float) -> DensityMatrix:
    """Diagonal-marginal ansatz with only ``c_zz, c_xx, c_yy`` correlations."""
    t = np.diag([c_xx, c_yy, c_zz])
    return reconstruct(BlochDecomposition([0, 0, a_z], [0, 0, b_z], t))


EXTREMAL_STEPS = 100


def appendix_extremal(a_z: float, b_z: float, eps: float) -> DensityMatrix:
    """Entangled state just above the separable surface at ``(a_z, b_z)``.

    With ``s = a_z + b_z`` the ansatz uses ``c_zz = -1/3`` for ``s <= 2/3``
    and ``c_zz = s - 1`` otherwise; on the separable surface this is the PPT
    edge.  ``c_xx = c_yy`` is set so that ``|T| = surface + eps`` and lowered
    in steps of ``eps / 100`` until the state is valid and NPT, so the result
    sits as far above the surface as the ansatz allows.  ``eps = 0`` returns
    the surface state itself.

    Raises
    ------
    ExtremalSearchError
        If no valid NPT state exists on that segment.
    """
    a_z = float(a_z)
    b_z = float(b_z)
    eps = float(eps)
    if a_z < 0 or b_z < 0 or a_z + b_z > 2:
        raise ValueError(f"need a_z, b_z >= 0 and a_z + b_z <= 2, got {a_z}, {b_z}")
    if not 0.0 <= eps <= 0.05:
        raise ValueError(f"eps must lie in [0, 0.05], got {eps}")
    s = a_z + b_z
    if s <= 2.0 / 3.0:
        c_zz = -1.0 / 3.0
        surface = math.sqrt((2.0 - 3.0 * s * s) / 6.0)
    else:
        c_zz = s - 1.0
        surface = abs(s - 1.0)

    def build(z: float) -> DensityMatrix:
        c = math.sqrt(max(z * z - c_zz * c_zz, 0.0) / 2.0)
        return axial_correlation_state(a_z, b_z, c_zz, c, c)

    if eps == 0.0:
        try:
            return build(surface)
        except NotAStateError as exc:
            raise ExtremalSearchError(f"surface state at ({a_z}, {b_z}) is not valid: {exc}") from exc
    last_error = None
    for k in range(EXTREMAL_STEPS, 0, -1):
        try:
            rho = build(surface + eps * k / EXTREMAL_STEPS)
        except NotAStateError as exc:
            last_error = exc
            continue
        if ppt_min_batch(rho.matrix[None])[0] < -NPT_TOL:
            return rho
    reason = f": {last_error}" if last_error is not None else ""
    raise ExtremalSearchError(
        f"no valid NPT state within eps={eps} of the separable surface at ({a_z}, {b_z}){reason}")


def diagonal_state(p) -> DensityMatrix:
    """Diagonal state with populations ``p`` over ``|00>, |01>, |10>, |11>``."""
    p = np.asarray(p, dtype=float).ravel()
    if p.shape != (4,) or np.any(p < -PARAM_TOL) or abs(p.sum() - 1) > 1e-12:
        raise ValueError(f"invalid probability 4-vector {p.tolist()}")
    return DensityMatrix((2, 2), np.diag(np.maximum(p, 0.0)).astype(complex))


# --- name/parameter registry -------------------------------------------------


@dataclass(frozen=True)
class FamilySpec:
    name: str
    params: dict[str, float] = field(default_factory=dict)


def _diag_from_params(p0: float, p1: float, p2: float, p3: float) -> DensityMatrix:
    return diagonal_state([p0, p1, p2, p3])


def _tri_from_params(x: float, y: float) -> DensityMatrix:
    return DensityMatrix.from_ket(tripartite_saturating(x, y), (2, 2, 2))


def _ub_from_params(p: float, q: float, i: float = 0, j: float = 1) -> DensityMatrix:
    return rho_ub(p, q, int(i), int(j))


FAMILIES: dict[str, tuple[Callable[..., DensityMatrix], tuple[str, ...]]] = {
    "lb": (rho_lb, ("p", "q")),
    "ub": (_ub_from_params, ("p", "q", "i", "j")),
    "memms": (_ub_from_params, ("p", "q", "i", "j")),
    "boundary": (boundary_state, ("x", "y")),
    "werner": (werner, ("p",)),
    "mems": (mems, ("x", "theta")),
    "mems-optimal": (mems_optimal, ("C",)),
    "cc": (cc_state, ()),
    "tripartite-saturating": (_tri_from_params, ("x", "y")),
    "appendix-extremal": (appendix_extremal, ("aZ", "bZ", "eps")),
    "diagonal": (_diag_from_params, ("p0", "p1", "p2", "p3")),
    "rotated-edge": (rotated_lower_edge, ("p", "theta")),
}


def build(spec: FamilySpec) -> DensityMatrix:
    """Construct the family member named by ``spec``."""
    if spec.name not in FAMILIES:
        raise ValueError(f"unknown family {spec.name!r}; known: {', '.join(sorted(FAMILIES))}")
    fn, names = FAMILIES[spec.name]
    unknown = set(spec.params) - set(names)
    if unknown:
        raise ValueError(f"unknown parameter(s) {sorted(unknown)} for family {spec.name}")
    return fn(**spec.params)
