"""Global assembly, linear solves and load-stepped Newton iteration.

Dirichlet conditions are imposed by reducing the system to the free
degrees of freedom.  The sparse factorization is wrapped so that rank
deficiency (the hourglass instability of the plain one-point scheme)
surfaces as :class:`~hexstab.errors.SolveFailure` rather than as a
silent garbage solution.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import splu

from .element import (
    IntegrationScheme,
    element_load,
    element_system_linear,
    element_system_nonlinear,
)
from .errors import ElementInverted, NewtonDivergence, SolveFailure

# Factor by which the solve residual may exceed machine precision times
# the natural problem scale before the solution is rejected.
_RESIDUAL_RTOL = 1e-8

# Smallest acceptable pivot of the LU factor, relative to the largest.
# Rank-deficient operators land many orders below this, well-conditioned
# ones many orders above.
_PIVOT_RTOL = 1e-12


@dataclass
class GlobalSystem:
    """Assembled operator with load, internal force and free dof set."""

    k: "coo_matrix"
    f: np.ndarray
    f_int: np.ndarray
    free_dofs: np.ndarray


def _dof_map(mesh):
    return (3 * mesh.elements[:, :, None] + np.arange(3)).reshape(-1, 24)


def _scatter_matrix(k_e, dof_map, n_dofs):
    n_el = dof_map.shape[0]
    rows = np.broadcast_to(dof_map[:, :, None], (n_el, 24, 24))
    cols = np.broadcast_to(dof_map[:, None, :], (n_el, 24, 24))
    return coo_matrix(
        (k_e.ravel(), (rows.ravel(), cols.ravel())), shape=(n_dofs, n_dofs)
    ).tocsr()


def _scatter_vector(v_e, dof_map, n_dofs):
    return np.bincount(dof_map.ravel(), weights=v_e.ravel(), minlength=n_dofs)


def load_vector(mesh, body_force):
    """Assembled consistent load vector for a constant body force."""
    fe = element_load(mesh.element_coords(), body_force)
    return _scatter_vector(fe, _dof_map(mesh), mesh.n_dofs)


def assemble(mesh, params, scheme, a=None, body_force=None, d_mat=None):
    """Assemble stiffness, loads and internal forces.

    Parameters
    ----------
    mesh : HexMesh
    params : MaterialParams
    scheme : IntegrationScheme
    a : ndarray, shape (n_dofs,), optional
        Current displacements.  When given, the large-deformation
        tangent and internal force are assembled; otherwise the linear
        stiffness.
    body_force : array_like, shape (3,), optional
        Constant force per undeformed volume.
    d_mat : ndarray (6, 6), optional
        Moduli override for the linear branch.

    Returns
    -------
    GlobalSystem
    """
    coords = mesh.element_coords()
    dof_map = _dof_map(mesh)
    n = mesh.n_dofs

    if a is None:
        sys_e = element_system_linear(coords, params, scheme, d_mat=d_mat)
    else:
        sys_e = element_system_nonlinear(coords, params, a[dof_map], scheme)

    k = _scatter_matrix(sys_e.k, dof_map, n)
    f_int = _scatter_vector(sys_e.f_int, dof_map, n)
    f = np.zeros(n) if body_force is None else load_vector(mesh, body_force)

    free = np.setdiff1d(np.arange(n), mesh.fixed_dofs, assume_unique=False)
    return GlobalSystem(k=k, f=f, f_int=f_int, free_dofs=free)


def _solve_sparse(k_ff, rhs):
    """Direct sparse solve with rank-deficiency detection.

    An (effectively) singular operator either breaks the factorization,
    leaves a collapsed pivot on the LU diagonal, or yields a solution
    that fails the residual backstop; all three surface as
    :class:`SolveFailure`.
    """
    try:
        lu = splu(k_ff.tocsc(), permc_spec="MMD_AT_PLUS_A")
    except RuntimeError as exc:
        raise SolveFailure(f"sparse factorization failed: {exc}") from exc
    pivots = np.abs(lu.U.diagonal())
    if pivots.min() <= _PIVOT_RTOL * pivots.max():
        raise SolveFailure(
            f"collapsed pivot (ratio {pivots.min() / pivots.max():.3e}); "
            "stiffness matrix is rank deficient"
        )
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise SolveFailure("solve produced non-finite entries")
    k_scale = np.abs(k_ff).sum(axis=1).max()
    residual = np.linalg.norm(k_ff @ x - rhs)
    scale = np.linalg.norm(rhs) + k_scale * np.linalg.norm(x)
    if residual > _RESIDUAL_RTOL * scale:
        raise SolveFailure(
            f"solve residual {residual:.3e} exceeds {_RESIDUAL_RTOL:.1e} "
            "times the problem scale"
        )
    return x


def solve_linear(mesh, params, scheme, body_force, d_mat=None):
    """Solve the linear-elastic problem under a constant body force.

    Returns
    -------
    ndarray, shape (n_dofs,)
        Displacements, zero on the clamped face.
    """
    system = assemble(
        mesh, params, scheme, body_force=body_force, d_mat=d_mat
    )
    free = system.free_dofs
    k_ff = system.k[free][:, free]
    u = np.zeros(mesh.n_dofs)
    u[free] = _solve_sparse(k_ff, system.f[free])
    return u


@dataclass
class NewtonConfig:
    """Tolerances and stepping controls for the Newton solve.

    ``max_backtracks`` bounds the step halvings applied when a full
    update inverts an element, produces a non-finite residual, or, once
    a load step is past its initial transient, raises the residual
    norm; zero disables the damping.  Full steps are always tried
    first, so the quadratic convergence of consistent tangents is
    unaffected.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-6
    max_iterations: int = 20
    load_steps: int = 10
    max_backtracks: int = 12


@dataclass
class StepRecord:
    """Iteration history of a single load step."""

    load_factor: float
    iterations: int = 0
    residual_norms: list = field(default_factory=list)


@dataclass
class SolveReport:
    """Per-step iteration records of a Newton solve."""

    steps: list = field(default_factory=list)
    converged: bool = False

    @property
    def total_iterations(self):
        return sum(s.iterations for s in self.steps)


def solve_newton(mesh, params, scheme, body_force, config=None):
    """Load-stepped Newton iteration for the large-deformation problem.

    The load is ramped in equal increments.  Each step iterates until
    the residual norm drops below ``max(rel_tol * r0, abs_tol)`` with
    ``r0`` the residual at the start of the step; at least one solve is
    performed per step.

    Returns
    -------
    u : ndarray, shape (n_dofs,)
    report : SolveReport

    Raises
    ------
    NewtonDivergence
        If a step exceeds ``max_iterations``; the partial report is
        attached to the exception.
    ElementInverted
        Propagated from assembly; the report so far is attached.
    """
    cfg = config or NewtonConfig()
    u = np.zeros(mesh.n_dofs)
    f_full = load_vector(mesh, body_force)
    report = SolveReport()

    def assemble_at(disp):
        try:
            return assemble(mesh, params, scheme, a=disp)
        except ElementInverted as exc:
            exc.report = report
            raise

    system = assemble_at(u)
    free = system.free_dofs

    for factor in np.linspace(1.0 / cfg.load_steps, 1.0, cfg.load_steps):
        f_target = factor * f_full
        record = StepRecord(load_factor=float(factor))
        report.steps.append(record)
        residual = (f_target - system.f_int)[free]
        r_norm = float(np.linalg.norm(residual))
        r0 = r_norm
        tol = max(cfg.rel_tol * r0, cfg.abs_tol)
        while True:
            if record.iterations >= cfg.max_iterations:
                raise NewtonDivergence(
                    f"no convergence within {cfg.max_iterations} iterations "
                    f"at load factor {factor:.3f}",
                    report=report,
                )
            du = _solve_sparse(system.k[free][:, free], residual)
            record.iterations += 1
            # Full update first; halved steps are tried only when the
            # trial inverts an element, yields a non-finite residual,
            # or raises the residual norm while damping is engaged.
            # Damping engages once the step is past its transient (the
            # residual has dropped below its start value) or half the
            # iteration budget is spent, so plain Newton paths are
            # reproduced exactly, overshoots included.
            damped = cfg.max_backtracks > 0 and (
                r_norm < r0 or 2 * record.iterations > cfg.max_iterations
            )
            scale = 1.0
            for backtrack in range(cfg.max_backtracks + 1):
                trial = u.copy()
                trial[free] += scale * du
                last = backtrack == cfg.max_backtracks
                try:
                    trial_system = assemble_at(trial)
                except ElementInverted:
                    if last:
                        raise
                    scale *= 0.5
                    continue
                trial_residual = (f_target - trial_system.f_int)[free]
                trial_norm = float(np.linalg.norm(trial_residual))
                if not np.isfinite(trial_norm):
                    if last:
                        raise NewtonDivergence(
                            "residual diverged at load factor "
                            f"{factor:.3f}",
                            report=report,
                        )
                    scale *= 0.5
                    continue
                acceptable = (
                    not damped
                    or trial_norm <= tol
                    or trial_norm < r_norm
                )
                if acceptable or last:
                    break
                scale *= 0.5
            u = trial
            system = trial_system
            residual = trial_residual
            r_norm = trial_norm
            record.residual_norms.append(r_norm)
            if r_norm <= tol:
                break

    report.converged = True
    return u, report


def extract_tip_displacement(mesh, u):
    """Average displacement of the free end face.

    Returns
    -------
    mean : ndarray, shape (3,)
        Componentwise average over the tip-face nodes.
    magnitude : float
        Euclidean norm of the average.
    """
    ids = mesh.tip_nodes()
    disp = u.reshape(-1, 3)[ids]
    mean = disp.mean(axis=0)
    return mean, float(np.linalg.norm(mean))
