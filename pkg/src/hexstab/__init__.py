"""Stabilized one-point integration for trilinear hexahedral elements.

The package provides the reference element with the corrected midpoint
quadrature rule, linear and Mooney-Rivlin element systems under seven
integration schemes, structured beam meshes, a sparse Newton solver and
a benchmark runner with a command-line front end.
"""

from .bench import (
    StudyRow,
    StudySpec,
    StudyTable,
    bench_material,
    emit_csv,
    run_study,
)
from .element import (
    ElementSystem,
    IntegrationScheme,
    element_load,
    element_system_linear,
    element_system_nonlinear,
)
from .errors import (
    ElementInverted,
    HexstabError,
    InvertedElement,
    NewtonDivergence,
    NonPositiveDefinite,
    SingularJacobian,
    SolveFailure,
)
from .material import (
    MaterialParams,
    d_matrix,
    invariants_and_derivatives,
    modified_invariant_derivatives,
    strain_energy_density,
    stress_and_tangent,
)
from .mesh import HexMesh, box_mesh, distorted_beam_mesh, refined_box_mesh
from .solver import (
    NewtonConfig,
    SolveReport,
    assemble,
    extract_tip_displacement,
    solve_linear,
    solve_newton,
)

__version__ = "0.1.0"

__all__ = [
    "ElementSystem",
    "IntegrationScheme",
    "element_load",
    "element_system_linear",
    "element_system_nonlinear",
    "HexstabError",
    "SingularJacobian",
    "InvertedElement",
    "ElementInverted",
    "NonPositiveDefinite",
    "SolveFailure",
    "NewtonDivergence",
    "MaterialParams",
    "d_matrix",
    "invariants_and_derivatives",
    "modified_invariant_derivatives",
    "stress_and_tangent",
    "strain_energy_density",
    "HexMesh",
    "box_mesh",
    "refined_box_mesh",
    "distorted_beam_mesh",
    "NewtonConfig",
    "SolveReport",
    "assemble",
    "solve_linear",
    "solve_newton",
    "extract_tip_displacement",
    "StudySpec",
    "StudyRow",
    "StudyTable",
    "bench_material",
    "run_study",
    "emit_csv",
    "__version__",
]
