"""Dense complex matrix numerics for small density operators.

Conventions
-----------
* Subsystem 0 is the leftmost tensor factor; ``np.kron(A, B)`` places ``A``
  on subsystem 0.  A basis index ``i`` of a ``[d0, d1, ...]`` system is the
  row-major multi-index ``(i0, i1, ...)``.
* Every array routine accepts an optional leading batch axis, so a stack of
  ``N`` matrices has shape ``(N, D, D)``.  The object-level API
  (:class:`DensityMatrix`, :func:`partial_trace`, ...) wraps those routines.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
EIGEN_INPUT_TOL = 1e-10
JACOBI_TOL = 1e-14
MAX_SWEEPS = 60
MAX_DIM = 64

# ComplexMatrix is a plain complex ndarray; the alias only documents intent.
ComplexMatrix = np.ndarray


class ValidationError(ValueError):
    """An input violates a stated invariant.

    ``prop`` names the violated property and ``residual`` is the measured
    deviation, so callers (and the CLI) can report both.
    """

    def __init__(self, prop: str, residual: float | None = None, detail: str = ""):
        self.prop = prop
        self.residual = residual
        msg = prop
        if residual is not None:
            msg += f" (residual {residual:.3e})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NotAStateError(ValidationError):
    """A Hermitian, unit-trace matrix that is not positive semidefinite."""

    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__("positive semidefinite", -min_eigenvalue,
                         f"not a state, min eigenvalue {min_eigenvalue:.3e}")


class UnsupportedConfigurationError(ValueError):
    """The subsystem layout is not covered by the requested operation."""


class ConsistencyError(RuntimeError):
    """An internal identity failed by more than numerical noise."""


# ---------------------------------------------------------------------------
# Jacobi eigensolver


def _jacobi(a: np.ndarray, want_vectors: bool) -> tuple[np.ndarray, np.ndarray | None]:
    """Cyclic complex Jacobi on a stack ``(N, n, n)`` of Hermitian matrices.

    Each rotation first removes the phase of ``a[p, q]`` and then applies the
    real symmetric rotation that annihilates it.  Sweeps stop once the
    off-diagonal Frobenius mass of every matrix is below
    ``JACOBI_TOL * max(1, ||A||_F)``.
    """
    a = np.array(a, dtype=complex, copy=True)
    nb, n, _ = a.shape
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy() if want_vectors else None
    if n == 1:
        return a[:, 0, 0].real.copy()[:, None], v
    scale = np.maximum(1.0, np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2))))
    offmask = ~np.eye(n, dtype=bool)
    rows = np.arange(nb)

    for _ in range(MAX_SWEEPS):
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        active = off >= JACOBI_TOL * scale
        if not active.any():
            break
        idx = rows[active]
        sub = a[idx]
        vsub = v[idx] if want_vectors else None
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = sub[:, p, q]
                mag = np.abs(apq)
                nz = mag > 0.0
                if not nz.any():
                    continue
                safe = np.where(nz, mag, 1.0)
                phase = np.where(nz, apq / safe, 1.0)  # e^{i phi}
                app = sub[:, p, p].real
                aqq = sub[:, q, q].real
                tau = (aqq - app) / (2.0 * safe)
                sgn = np.where(tau >= 0.0, 1.0, -1.0)
                t = np.where(nz, sgn / (np.abs(tau) + np.sqrt(1.0 + tau * tau)), 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                cph = np.conj(phase)  # e^{-i phi}

                # columns: A <- A J
                colp = sub[:, :, p].copy()
                colq = sub[:, :, q].copy()
                sub[:, :, p] = c[:, None] * colp - (s * cph)[:, None] * colq
                sub[:, :, q] = s[:, None] * colp + (c * cph)[:, None] * colq
                # rows: A <- J^H A
                rowp = sub[:, p, :].copy()
                rowq = sub[:, q, :].copy()
                sub[:, p, :] = c[:, None] * rowp - (s * phase)[:, None] * rowq
                sub[:, q, :] = s[:, None] * rowp + (c * phase)[:, None] * rowq
                sub[:, p, q] = 0.0
                sub[:, q, p] = 0.0
                sub[:, p, p] = sub[:, p, p].real
                sub[:, q, q] = sub[:, q, q].real
                if want_vectors:
                    vp = vsub[:, :, p].copy()
                    vq = vsub[:, :, q].copy()
                    vsub[:, :, p] = c[:, None] * vp - (s * cph)[:, None] * vq
                    vsub[:, :, q] = s[:, None] * vp + (c * cph)[:, None] * vq
        a[idx] = sub
        if want_vectors:
            v[idx] = vsub

    w = np.real(np.diagonal(a, axis1=1, axis2=2)).copy()
    return w, v


def _as_stack(m: np.ndarray) -> tuple[np.ndarray, bool]:
    m = np.asarray(m)
    if m.ndim == 2:
        return m[None], True
    return m, False


def _check_square_hermitian(m: np.ndarray, tol: float) -> None:
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValidationError("square", detail=f"shape {m.shape}")
    if m.size == 0:
        raise ValidationError("square", detail="empty matrix")
    herm = float(np.max(np.abs(m - np.conj(np.swapaxes(m, -1, -2)))))
    if herm > tol:
        raise ValidationError("Hermitian", herm)


def eigh_batch(m: np.ndarray, *, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors (columns) for ``m``.

    ``m`` may be a single matrix or a stack.  The Hermitian part is used after
    the optional check.
    """
    m, single = _as_stack(np.asarray(m, dtype=complex))
    if check:
        _check_square_hermitian(m, EIGEN_INPUT_TOL)
    herm = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    w, v = _jacobi(herm, want_vectors=True)
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    if single:
        return w[0], v[0]
    return w, v


def eigvalsh_batch(m: np.ndarray, *, check: bool = True) -> np.ndarray:
    """Descending eigenvalues of a Hermitian matrix or stack of matrices."""
    m, single = _as_stack(np.asarray(m, dtype=complex))
    if check:
        _check_square_hermitian(m, EIGEN_INPUT_TOL)
    herm = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    w, _ = _jacobi(herm, want_vectors=False)
    w = -np.sort(-w, axis=1)
    return w[0] if single else w


def hermitian_eigenvalues(m: np.ndarray | "DensityMatrix") -> np.ndarray:
    """Return all eigenvalues of a Hermitian matrix sorted descending.

    Raises
    ------
    ValidationError
        If ``m`` is not square or deviates from Hermitian by more than 1e-10.
    """
    if isinstance(m, DensityMatrix):
        m = m.matrix
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValidationError("square", detail=f"expected a matrix, got shape {m.shape}")
    return eigvalsh_batch(m)


def psd_sqrt_batch(m: np.ndarray, floor: float = 1e-14) -> np.ndarray:
    """Matrix square root of PSD matrices.

    Eigenvalues at or below ``floor`` (including clamped negative residues)
    are treated as exact zeros before the square root.
    """
    w, v = eigh_batch(m, check=False)
    w = np.where(w > floor, w, 0.0)
    return (v * np.sqrt(w)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


# ---------------------------------------------------------------------------
# Tensor structure


def _check_dims(dims: Sequence[int], size: int) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ValidationError("dims", detail=f"invalid subsystem dimensions {dims}")
    if int(np.prod(dims)) != size:
        raise ValidationError("dims", detail=f"product of {dims} != matrix size {size}")
    return dims


def partial_trace_array(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Partial trace keeping the subsystems in ``keep`` (sorted, original order).

    ``m`` has shape ``(..., D, D)``.
    """
    m = np.asarray(m)
    dims = tuple(dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    batch = m.shape[:-2]
    t = m.reshape(batch + dims + dims)
    nb = len(batch)
    letters = "abcdefghijklmnopqrstuvwxyz"
    bl = "ABCDEFGH"[:nb]
    ket = list(letters[:n])
    bra = list(letters[n:2 * n])
    for i in range(n):
        if i not in keep:
            bra[i] = ket[i]
    out = bl + "".join(ket[i] for i in keep) + "".join(bra[i] for i in keep)
    r = np.einsum(bl + "".join(ket) + "".join(bra) + "->" + out, t)
    dk = int(np.prod([dims[i] for i in keep]))
    return r.reshape(batch + (dk, dk))


def partial_transpose_array(m: np.ndarray, dims: Sequence[int], subsystem: int) -> np.ndarray:
    """Transpose subsystem ``subsystem`` of ``m`` (shape ``(..., D, D)``)."""
    m = np.asarray(m)
    dims = tuple(dims)
    n = len(dims)
    batch = m.shape[:-2]
    nb = len(batch)
    t = m.reshape(batch + dims + dims)
    axes = list(range(nb + 2 * n))
    i, j = nb + subsystem, nb + n + subsystem
    axes[i], axes[j] = axes[j], axes[i]
    return np.transpose(t, axes).reshape(m.shape)


def kron_all(*ops: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def ket_to_dm(psi: np.ndarray) -> np.ndarray:
    """``|psi><psi|`` for a vector or a stack of vectors (last axis)."""
    psi = np.asarray(psi, dtype=complex)
    return psi[..., :, None] * np.conj(psi[..., None, :])


# ---------------------------------------------------------------------------
# DensityMatrix


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density operator on ``prod(dims)``-dimensional space.

    Construction checks Hermiticity (1e-12), unit trace (1e-12) and positive
    semidefiniteness (min eigenvalue >= -1e-10).  The stored matrix is a
    read-only copy.
    """

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("square", detail=f"shape {m.shape}")
        if m.shape[0] > MAX_DIM:
            raise UnsupportedConfigurationError(f"dimension {m.shape[0]} exceeds {MAX_DIM}")
        dims = _check_dims(self.dims, m.shape[0])
        if not np.all(np.isfinite(m)):
            raise ValidationError("finite entries")
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > HERMITIAN_TOL:
            raise ValidationError("Hermitian", herm)
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError("unit trace", abs(tr - 1.0))
        lam_min = float(eigvalsh_batch(m, check=False)[-1])
        if lam_min < -PSD_TOL:
            raise NotAStateError(lam_min)
        m.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_ket(cls, psi: np.ndarray, dims: Sequence[int]) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > 1e-12:
            raise ValidationError("normalized vector", abs(norm - 1.0))
        return cls(tuple(dims), ket_to_dm(psi))

    @classmethod
    def hermitized(cls, m: np.ndarray, dims: Sequence[int]) -> "DensityMatrix":
        """Build from ``m`` after removing anti-Hermitian rounding residue."""
        m = np.asarray(m, dtype=complex)
        return cls(tuple(dims), 0.5 * (m + m.conj().T))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def eigenvalues(self) -> np.ndarray:
        """Spectrum sorted descending."""
        return eigvalsh_batch(self.matrix, check=False)

    def __repr__(self) -> str:
        return f"DensityMatrix(dims={list(self.dims)}, purity={self.purity():.6g})"


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the subsystems listed in ``keep``."""
    keep = sorted(set(int(k) for k in keep))
    n = len(rho.dims)
    if not keep or len(keep) == n:
        raise ValueError(f"keep must be a nonempty proper subset of 0..{n - 1}, got {keep}")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"subsystem index out of range in {keep}")
    red = partial_trace_array(rho.matrix, rho.dims, keep)
    return DensityMatrix.hermitized(red, [rho.dims[k] for k in keep])


def partial_transpose(rho: DensityMatrix, subsystem: int = 1) -> np.ndarray:
    """Partial transpose on one subsystem.  The result need not be PSD."""
    if not 0 <= subsystem < len(rho.dims):
        raise ValueError(f"subsystem {subsystem} out of range for dims {list(rho.dims)}")
    return partial_transpose_array(rho.matrix, rho.dims, subsystem)


def tensor(*states: DensityMatrix) -> DensityMatrix:
    dims: list[int] = []
    for s in states:
        dims.extend(s.dims)
    return DensityMatrix.hermitized(kron_all(*(s.matrix for s in states)), dims)


def maximally_mixed(dims: Sequence[int]) -> DensityMatrix:
    d = int(np.prod(dims))
    return DensityMatrix(tuple(dims), np.eye(d, dtype=complex) / d)


# ---------------------------------------------------------------------------
# Randomness


def seeded_rng(seed: int) -> np.random.Generator:
    """Deterministic PCG64 stream for a 64-bit seed."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))


def split_seed(master: int, worker: int) -> int:
    """Seed for worker ``worker``: ``master XOR worker`` re-hashed by SeedSequence."""
    mixed = (int(master) ^ int(worker)) & (2**64 - 1)
    return int(np.random.SeedSequence(mixed).generate_state(1, np.uint64)[0])
