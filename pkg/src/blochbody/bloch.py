"""Pauli decomposition of two-qubit states and basis-free Bloch lengths.

Two-qubit states are expanded as

    rho = 1/4 (I + sum_i a_i s_i x I + sum_j b_j I x s_j + sum_ij t_ij s_i x s_j)

with the Pauli matrices ordered (x, y, z).  For larger local dimension no
Bloch basis is built; lengths come from ``sqrt(d Tr rho^2 - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import (
    ConsistencyError,
    DensityMatrix,
    NotAStateError,
    UnsupportedConfigurationError,
    ValidationError,
    eigvalsh_batch,
    partial_trace_array,
    PSD_TOL,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
ID2 = np.eye(2, dtype=complex)

_LOCAL_A = np.array([np.kron(s, ID2) for s in PAULIS])
_LOCAL_B = np.array([np.kron(ID2, s) for s in PAULIS])
_CORR = np.array([[np.kron(si, sj) for sj in PAULIS] for si in PAULIS])

IMAG_TOL = 1e-10


@dataclass(frozen=True)
class BlochDecomposition:
    a: np.ndarray
    b: np.ndarray
    t: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=float).reshape(3)
        b = np.asarray(self.b, dtype=float).reshape(3)
        t = np.asarray(self.t, dtype=float).reshape(3, 3)
        for arr in (a, b, t):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "t", t)

    def total_length_squared(self) -> float:
        return float(self.a @ self.a + self.b @ self.b + np.sum(self.t ** 2))

    def to_json(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist(), "t": self.t.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "BlochDecomposition":
        try:
            a, b, t = obj["a"], obj["b"], obj["t"]
        except (KeyError, TypeError) as exc:
            raise ValidationError("decomposition keys", detail="expected a, b, t") from exc
        if len(a) != 3 or len(b) != 3 or len(t) != 3 or any(len(r) != 3 for r in t):
            raise ValidationError("decomposition shape", detail="a, b need 3 entries, t 3x3")
        return cls(np.array(a, float), np.array(b, float), np.array(t, float))


@dataclass(frozen=True)
class ModelPoint:
    """Coordinates (|a|, |b|, |T|) in the three-dimensional model.

    Only finiteness and non-negativity are enforced, so arbitrary query
    points can be classified; points coming from states also satisfy
    ``x, y <= 1`` and ``z <= sqrt(3)``.
    """

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0.0:
                raise ValueError(f"model coordinate {name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def radius(self) -> float:
        return float(np.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2))


def _require_two_qubits(rho: DensityMatrix) -> None:
    if tuple(rho.dims) != (2, 2):
        raise ValueError(f"expected a two-qubit state with dims [2, 2], got {list(rho.dims)}")


def _real_part(values: np.ndarray) -> np.ndarray:
    im = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if im > IMAG_TOL:
        raise ConsistencyError(f"Pauli coefficient has imaginary part {im:.3e}")
    return values.real


def decompose_batch(rhos: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(a, b, t)`` with shapes ``(N, 3)``, ``(N, 3)``, ``(N, 3, 3)``.

    Uses ``Tr(rho P) = sum_kl rho_kl P_lk``.
    """
    rhos = np.asarray(rhos, dtype=complex)
    a = np.einsum("nkl,ilk->ni", rhos, _LOCAL_A)
    b = np.einsum("nkl,ilk->ni", rhos, _LOCAL_B)
    t = np.einsum("nkl,ijlk->nij", rhos, _CORR)
    return _real_part(a), _real_part(b), _real_part(t)


def model_points_batch(rhos: np.ndarray) -> np.ndarray:
    """Model coordinates for a stack of two-qubit matrices, shape ``(N, 3)``."""
    a, b, t = decompose_batch(rhos)
    return np.stack([np.linalg.norm(a, axis=1), np.linalg.norm(b, axis=1),
                     np.sqrt(np.sum(t ** 2, axis=(1, 2)))], axis=1)


def decompose(rho: DensityMatrix) -> BlochDecomposition:
    _require_two_qubits(rho)
    a, b, t = decompose_batch(rho.matrix[None])
    return BlochDecomposition(a[0], b[0], t[0])


def reconstruct_matrix(d: BlochDecomposition) -> np.ndarray:
    m = np.eye(4, dtype=complex)
    m = m + np.einsum("i,ikl->kl", d.a, _LOCAL_A)
    m = m + np.einsum("j,jkl->kl", d.b, _LOCAL_B)
    m = m + np.einsum("ij,ijkl->kl", d.t, _CORR)
    return m / 4.0


def reconstruct(d: BlochDecomposition) -> DensityMatrix:
    """Inverse of :func:`decompose`.

    Raises
    ------
    NotAStateError
        If the coefficients describe a non-positive operator.
    """
    m = reconstruct_matrix(d)
    lam_min = float(eigvalsh_batch(m, check=False)[-1])
    if lam_min < -PSD_TOL:
        raise NotAStateError(lam_min)
    return DensityMatrix.hermitized(m, (2, 2))


def _lengths_batch(m: np.ndarray) -> np.ndarray:
    """``sqrt(d Tr rho^2 - 1)`` evaluated as ``sqrt(d) ||rho - I/d||_F``.

    The two agree algebraically; the second has no cancellation near the
    maximally mixed state, where the first loses half the digits.
    """
    m = np.asarray(m)
    d = m.shape[-1]
    dev = m - np.eye(d) / d
    return np.sqrt(d * np.real(np.einsum("...kl,...kl->...", dev, np.conj(dev))))


def purity_batch(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    return np.real(np.einsum("...kl,...kl->...", m, np.conj(m)))


def bloch_length(rho: DensityMatrix) -> float:
    """Basis-independent Bloch length ``sqrt(D Tr rho^2 - 1)``."""
    return float(_lengths_batch(rho.matrix))


def _equal_local_dim(dims: tuple[int, ...]) -> int:
    if len(dims) not in (2, 3):
        raise UnsupportedConfigurationError(f"need 2 or 3 subsystems, got dims {list(dims)}")
    if len(set(dims)) != 1:
        raise UnsupportedConfigurationError(f"unequal local dimensions {list(dims)}")
    return dims[0]


def marginal_lengths_batch(m: np.ndarray, dims: tuple[int, ...]) -> np.ndarray:
    """Local Bloch lengths for every single-party marginal, shape ``(N, n)``."""
    _equal_local_dim(tuple(dims))
    out = []
    for k in range(len(dims)):
        red = partial_trace_array(m, dims, [k])
        out.append(_lengths_batch(red))
    return np.stack(out, axis=-1)


def marginal_bloch_lengths(rho: DensityMatrix) -> tuple[float, ...]:
    """Basis-free local Bloch lengths, one per party (bi- or tripartite)."""
    lengths = marginal_lengths_batch(rho.matrix, rho.dims)
    return tuple(float(v) for v in lengths)


def model_point(rho: DensityMatrix) -> ModelPoint:
    _require_two_qubits(rho)
    x, y, z = model_points_batch(rho.matrix[None])[0]
    return ModelPoint(x, y, z)
