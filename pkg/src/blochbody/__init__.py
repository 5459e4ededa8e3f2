"""Bloch-geometry toolkit for two-qubit and equal-dimension multipartite states.

Submodules: :mod:`matcore` (validated density matrices, eigensolver, partial
trace), :mod:`bloch` (Pauli decomposition, model points), :mod:`bounds`
(purity bound, model surfaces, region classifier), :mod:`families` (extremal
state families), :mod:`entanglement` (concurrence, PPT), :mod:`ensembles`
(random ensembles and audits) and :mod:`cli`.
"""

from .bloch import (
    BlochDecomposition,
    ModelPoint,
    bloch_length,
    decompose,
    marginal_bloch_lengths,
    model_point,
    reconstruct,
)
from .bounds import (
    BoundReport,
    Region,
    RegionVerdict,
    check_theorem1,
    chsh_violation_possible,
    classify_point,
    in_model,
    lower_surface,
    purity_bound,
    triangle_comparison_bound,
    tripartite_bound,
    upper_surface,
)
from .entanglement import (
    EntanglementReport,
    concurrence,
    entanglement_report,
    entropy_entanglement_witness,
    ppt_min_eigenvalue,
)
from .ensembles import AuditReport, EnsembleSpec, audit, point_cloud, sample
from .families import FamilySpec, build
from .matcore import (
    ConsistencyError,
    DensityMatrix,
    NotAStateError,
    UnsupportedConfigurationError,
    ValidationError,
    hermitian_eigenvalues,
    partial_trace,
    partial_transpose,
    seeded_rng,
    split_seed,
    tensor,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
