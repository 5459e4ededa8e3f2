"""Two-qubit entanglement ground truth: Wootters concurrence and PPT."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bloch import SIGMA_Y, model_points_batch, purity_batch
from .bounds import SURFACE_TOL, entangled_threshold_arr
from .matcore import (
    ConsistencyError,
    DensityMatrix,
    eigvalsh_batch,
    partial_trace_array,
    partial_transpose_array,
    psd_sqrt_batch,
)

NPT_TOL = 1e-10
CONCURRENCE_TOL = 1e-9
BOUNDARY_UPPER = 1e-9
CLAMP_TOL = 1e-10

YY = np.kron(SIGMA_Y, SIGMA_Y)


def _require_two_qubits(rho: DensityMatrix) -> None:
    if tuple(rho.dims) != (2, 2):
        raise ValueError(f"expected a two-qubit state with dims [2, 2], got {list(rho.dims)}")


def spin_flip_batch(rhos: np.ndarray) -> np.ndarray:
    """``(Y x Y) rho* (Y x Y)``."""
    return YY @ np.conj(rhos) @ YY


def concurrence_lambdas_batch(rhos: np.ndarray) -> np.ndarray:
    """Descending square roots of the spectrum of ``rho rho~``.

    Computed from the Hermitian partner ``sqrt(rho) rho~ sqrt(rho)``, which
    has the same eigenvalues; residues down to ``-1e-10`` are clamped to 0.
    """
    rhos = np.asarray(rhos, dtype=complex)
    root = psd_sqrt_batch(rhos)
    partner = root @ spin_flip_batch(rhos) @ root
    mu = eigvalsh_batch(partner, check=False)
    worst = float(np.min(mu))
    if worst < -CLAMP_TOL:
        raise ValueError(f"spin-flip partner has eigenvalue {worst:.3e}; input is not a state")
    return np.sqrt(np.maximum(mu, 0.0))


def concurrence_batch(rhos: np.ndarray) -> np.ndarray:
    lam = concurrence_lambdas_batch(rhos)
    return np.maximum(0.0, lam[:, 0] - lam[:, 1] - lam[:, 2] - lam[:, 3])


def ppt_min_batch(rhos: np.ndarray) -> np.ndarray:
    pt = partial_transpose_array(np.asarray(rhos, dtype=complex), (2, 2), 1)
    return eigvalsh_batch(pt, check=False)[:, -1]


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``."""
    _require_two_qubits(rho)
    return float(concurrence_batch(rho.matrix[None])[0])


def ppt_min_eigenvalue(rho: DensityMatrix) -> float:
    """Smallest eigenvalue of the partial transpose; negative iff entangled."""
    _require_two_qubits(rho)
    return float(ppt_min_batch(rho.matrix[None])[0])


def linear_entropy(rho: DensityMatrix) -> float:
    return 1.0 - rho.purity()


def witness_batch(points: np.ndarray) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    return p[:, 2] ** 2 - entangled_threshold_arr(p[:, 0], p[:, 1]) > SURFACE_TOL


def entropy_entanglement_witness(rho: DensityMatrix) -> bool:
    """True when ``|T|^2 > 1 - | |a|^2 - |b|^2 |``, which certifies entanglement.

    ``False`` is inconclusive.
    """
    _require_two_qubits(rho)
    return bool(witness_batch(model_points_batch(rho.matrix[None]))[0])


@dataclass(frozen=True)
class EntanglementReport:
    concurrence: float
    pt_min_eigenvalue: float
    linear_entropy_global: float
    linear_entropy_marginals: tuple[float, float]

    @property
    def entangled(self) -> bool:
        return self.pt_min_eigenvalue < -NPT_TOL

    @property
    def boundary(self) -> bool:
        """PPT minimum eigenvalue inside the undecided band [-1e-10, 1e-9]."""
        return -NPT_TOL <= self.pt_min_eigenvalue <= BOUNDARY_UPPER

    def consistent(self) -> bool:
        return self.boundary or self.entangled == (self.concurrence > CONCURRENCE_TOL)

    def to_json(self) -> dict:
        return {
            "concurrence": self.concurrence,
            "pt_min_eigenvalue": self.pt_min_eigenvalue,
            "entangled": self.entangled,
            "boundary": self.boundary,
            "linear_entropy_global": self.linear_entropy_global,
            "linear_entropy_marginals": list(self.linear_entropy_marginals),
        }


def entanglement_report(rho: DensityMatrix) -> EntanglementReport:
    """Concurrence, PPT and linear entropies of a two-qubit state.

    Raises :class:`ConsistencyError` if concurrence and PPT disagree outside
    the boundary band.
    """
    _require_two_qubits(rho)
    m = rho.matrix[None]
    s_a = 1.0 - float(purity_batch(partial_trace_array(m, (2, 2), [0]))[0])
    s_b = 1.0 - float(purity_batch(partial_trace_array(m, (2, 2), [1]))[0])
    rep = EntanglementReport(
        concurrence=float(concurrence_batch(m)[0]),
        pt_min_eigenvalue=float(ppt_min_batch(m)[0]),
        linear_entropy_global=linear_entropy(rho),
        linear_entropy_marginals=(s_a, s_b),
    )
    if not rep.consistent():
        raise ConsistencyError(
            f"concurrence {rep.concurrence:.3e} disagrees with PPT minimum {rep.pt_min_eigenvalue:.3e}")
    return rep
