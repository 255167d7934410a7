"""Element stiffness, residual and load integration for the trilinear hex.

Displacement vectors are ordered node-major: entry ``3 n + c`` is the
``c``-th displacement component of local node ``n``.  Strain operators
follow the Voigt layout of :mod:`hexstab.material` with engineering
shear rows.

Seven integration schemes are provided.  ``FULL`` is the 2x2x2 Gauss
rule.  ``ONE_POINT`` is the plain midpoint rule, which is rank deficient
(hourglassing).  The stabilized one-point schemes add the curvature
correction of the midpoint rule, restricted to the strain-operator
derivative terms; their ``CONST_J`` variants freeze the Jacobian when
differentiating the operators.  ``ONE_POINT_VOL`` integrates only the
volumetric material response at the midpoint and keeps full Gauss for
the isochoric response, and the ``ISO`` stabilized variants stabilize
only the isochoric part.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ElementInverted
from .material import (
    d_matrix,
    stress_and_tangent,
    sym_to_voigt,
    voigt_to_sym,
)
from .refelem import (
    MIDPOINT,
    gauss_rule,
    jacobian_state,
    physical_gradient_xi_derivative,
    physical_gradients,
    shape_ref_derivatives,
    shape_values,
)


class IntegrationScheme(enum.Enum):
    """Quadrature variants, keyed by their command-line tokens."""

    FULL = "full"
    ONE_POINT = "one-point"
    ONE_POINT_VOL = "1p-vol"
    ONE_POINT_STAB = "1p-stab"
    ONE_POINT_STAB_ISO = "1p-stab-iso"
    ONE_POINT_STAB_CONST_J = "1p-stab-constj"
    ONE_POINT_STAB_ISO_CONST_J = "1p-stab-iso-constj"

    @property
    def token(self):
        return self.value

    @property
    def stabilized(self):
        return self in _STABILIZED

    @property
    def constant_jacobian(self):
        """Stabilization drops the Jacobian-derivative correction."""
        return self in (
            IntegrationScheme.ONE_POINT_STAB_CONST_J,
            IntegrationScheme.ONE_POINT_STAB_ISO_CONST_J,
        )

    @property
    def iso_only_stabilization(self):
        return self in (
            IntegrationScheme.ONE_POINT_STAB_ISO,
            IntegrationScheme.ONE_POINT_STAB_ISO_CONST_J,
        )

    @property
    def linear_capable(self):
        """Usable for linear elasticity, where no volumetric/isochoric
        split exists."""
        return self in _LINEAR_CAPABLE

    @classmethod
    def from_token(cls, token):
        for scheme in cls:
            if scheme.value == token:
                return scheme
        tokens = ", ".join(s.value for s in cls)
        raise ValueError(f"unknown scheme {token!r}; expected one of: {tokens}")


_STABILIZED = frozenset(
    {
        IntegrationScheme.ONE_POINT_STAB,
        IntegrationScheme.ONE_POINT_STAB_ISO,
        IntegrationScheme.ONE_POINT_STAB_CONST_J,
        IntegrationScheme.ONE_POINT_STAB_ISO_CONST_J,
    }
)

_LINEAR_CAPABLE = frozenset(
    {
        IntegrationScheme.FULL,
        IntegrationScheme.ONE_POINT,
        IntegrationScheme.ONE_POINT_STAB,
        IntegrationScheme.ONE_POINT_STAB_CONST_J,
    }
)

_MID_GRAD, _MID_SECOND = shape_ref_derivatives(MIDPOINT)
_GAUSS2_PTS, _GAUSS2_WTS = gauss_rule(2)


def grad_matrix(phys_grads):
    """Displacement-gradient operator, shape ``(..., 9, 24)``.

    Maps element displacements to the row-major entries of grad u,
    ``row 3 a + j = d u_a / d x_j``.

    Parameters
    ----------
    phys_grads : ndarray, shape (..., 8, 3)
    """
    g = np.asarray(phys_grads)
    out = np.zeros(g.shape[:-2] + (9, 24))
    gt = np.swapaxes(g, -1, -2)
    for c in range(3):
        out[..., 3 * c : 3 * c + 3, c::3] = gt
    return out


def _strain_rows(f_mat, phys_grads):
    """Rows ``sym(F^T dF)`` in engineering Voigt order for operator F.

    With ``f_mat`` equal to the identity this is the linear
    strain-displacement operator; with the current deformation gradient
    it is the large-deformation one.
    """
    g = np.asarray(phys_grads)
    batch = np.broadcast_shapes(f_mat.shape[:-2], g.shape[:-2])
    rows = np.empty(batch + (6, 8, 3))
    pairs = ((0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (2, 0))
    for r, (p, q) in enumerate(pairs):
        if p == q:
            rows[..., r, :, :] = np.einsum(
                "...c,...n->...nc", f_mat[..., :, p], g[..., :, p]
            )
        else:
            rows[..., r, :, :] = np.einsum(
                "...c,...n->...nc", f_mat[..., :, p], g[..., :, q]
            ) + np.einsum(
                "...c,...n->...nc", f_mat[..., :, q], g[..., :, p]
            )
    return rows.reshape(batch + (6, 24))


_EYE3 = np.eye(3)


def b_linear(phys_grads):
    """Small-strain operator, shape ``(..., 6, 24)``, engineering shear."""
    return _strain_rows(_EYE3, phys_grads)


def b_linear_xi_derivative(state, phys_grads, ref_second, axis,
                           constant_jacobian=False):
    """Reference derivative of the small-strain operator along one axis."""
    dg = physical_gradient_xi_derivative(
        state, phys_grads, ref_second, axis, constant_jacobian
    )
    return b_linear(dg)


def deformation_gradient(phys_grads, a):
    """Deformation gradient ``F = I + grad u`` from element displacements.

    Parameters
    ----------
    phys_grads : ndarray, shape (..., 8, 3)
    a : ndarray, shape (..., 24)

    Returns
    -------
    ndarray, shape (..., 3, 3)
    """
    a = np.asarray(a, dtype=float)
    nodal = a.reshape(a.shape[:-1] + (8, 3))
    grad_u = np.einsum("...ni,...nj->...ij", nodal, phys_grads)
    return _EYE3 + grad_u


def right_cauchy_green(f_mat):
    """Voigt components of ``C = F^T F``."""
    c = np.einsum("...ci,...cj->...ij", f_mat, f_mat)
    return sym_to_voigt(c)


def b_nonlinear(f_mat, phys_grads):
    """Large-deformation strain operators.

    Returns
    -------
    b_l : ndarray, shape (..., 6, 24)
        Maps displacement increments to Green-Lagrange strain increments
        (engineering shear).  Equals :func:`b_linear` when F is the
        identity.
    b_nl : ndarray, shape (..., 9, 24)
        The displacement-gradient operator used with the geometric
        stress block.
    """
    return _strain_rows(f_mat, phys_grads), grad_matrix(phys_grads)


def b_nonlinear_xi_derivative(state, f_mat, phys_grads, ref_second, axis,
                              constant_jacobian=False):
    """Reference derivatives of both large-deformation operators.

    The deformation gradient is held fixed; only the shape-gradient
    factors are differentiated.
    """
    dg = physical_gradient_xi_derivative(
        state, phys_grads, ref_second, axis, constant_jacobian
    )
    return _strain_rows(f_mat, dg), grad_matrix(dg)


def stress_block_matrix(s_voigt):
    """Block-diagonal geometric stress matrix, shape ``(..., 9, 9)``."""
    s_hat = voigt_to_sym(s_voigt)
    out = np.zeros(s_hat.shape[:-2] + (9, 9))
    for c in range(3):
        out[..., 3 * c : 3 * c + 3, 3 * c : 3 * c + 3] = s_hat
    return out


@dataclass(frozen=True)
class ElementSystem:
    """Element stiffness, internal force and volume, batch shaped."""

    k: np.ndarray  # (..., 24, 24)
    f_int: np.ndarray  # (..., 24)
    volume: np.ndarray  # (...)


def _btdb(b, d):
    """``b^T d b`` with an unbatched 6x6 or batched operator d."""
    if d.ndim == 2:
        return np.einsum("...ia,ij,...jb->...ab", b, d, b)
    return np.einsum("...ia,...ij,...jb->...ab", b, d, b)


def element_system_linear(coords, params, scheme, d_mat=None):
    """Linear-elastic element stiffness for one or many elements.

    Parameters
    ----------
    coords : ndarray, shape (..., 8, 3)
    params : MaterialParams
    scheme : IntegrationScheme
        Must be linear capable (``full``, ``one-point``, ``1p-stab`` or
        ``1p-stab-constj``).
    d_mat : ndarray, shape (6, 6), optional
        Override for the moduli matrix; defaults to the isotropic one
        built from ``params``.

    Returns
    -------
    ElementSystem
        ``f_int`` is zero; loads are assembled separately.
    """
    coords = np.asarray(coords, dtype=float)
    batch = coords.shape[:-2]
    if not scheme.linear_capable:
        raise ValueError(
            f"scheme {scheme.token!r} is not defined for linear elasticity"
        )
    if d_mat is None:
        d_mat = d_matrix(params)

    if scheme is IntegrationScheme.FULL:
        k = np.zeros(batch + (24, 24))
        vol = np.zeros(batch)
        for pt, w in zip(_GAUSS2_PTS, _GAUSS2_WTS):
            grad, _ = shape_ref_derivatives(pt)
            state = jacobian_state(coords, pt)
            b = b_linear(physical_gradients(state, grad))
            k += w * state.det[..., None, None] * _btdb(b, d_mat)
            vol = vol + w * state.det
        return ElementSystem(k=k, f_int=np.zeros(batch + (24,)), volume=vol)

    state = jacobian_state(coords, MIDPOINT)
    g = physical_gradients(state, _MID_GRAD)
    k = state.det[..., None, None] * _btdb(b_linear(g), d_mat)
    if scheme.stabilized:
        stab = np.zeros(batch + (24, 24))
        for axis in range(3):
            db = b_linear_xi_derivative(
                state, g, _MID_SECOND, axis, scheme.constant_jacobian
            )
            stab += _btdb(db, d_mat)
        k = k + (state.det / 12.0)[..., None, None] * stab
    return ElementSystem(
        k=k, f_int=np.zeros(batch + (24,)), volume=state.det
    )


def _check_deformation(f_mat):
    det = np.linalg.det(f_mat)
    bad = det <= 0.0
    if np.any(bad):
        indices = np.flatnonzero(np.atleast_1d(bad))
        raise ElementInverted(
            f"deformation gradient not invertible for {indices.size} "
            f"element(s), first indices {indices[:5].tolist()}",
            element_indices=indices,
        )


def _point_kinematics(coords, a, pt, ref_grad):
    state = jacobian_state(coords, pt)
    g = physical_gradients(state, ref_grad)
    f_mat = deformation_gradient(g, a)
    _check_deformation(f_mat)
    return state, g, f_mat, right_cauchy_green(f_mat)


def element_system_nonlinear(coords, params, a, scheme):
    """Large-deformation tangent stiffness and internal force.

    The material tangent couples through the strain operator, the stress
    through the displacement-gradient operator with the geometric stress
    block.  Stabilized schemes evaluate everything at the midpoint and
    add the curvature correction built from the operator derivatives;
    their internal force carries the matching stabilization force so the
    converged residual is consistent with the stiffness.

    Parameters
    ----------
    coords : ndarray, shape (..., 8, 3)
    params : MaterialParams
    a : ndarray, shape (..., 24)
        Element displacements.
    scheme : IntegrationScheme

    Returns
    -------
    ElementSystem

    Raises
    ------
    ElementInverted
        If ``det F <= 0`` at any quadrature point used.
    """
    coords = np.asarray(coords, dtype=float)
    a = np.asarray(a, dtype=float)
    batch = np.broadcast_shapes(coords.shape[:-2], a.shape[:-1])

    k = np.zeros(batch + (24, 24))
    f_int = np.zeros(batch + (24,))
    vol = np.zeros(batch)

    if scheme in (IntegrationScheme.FULL, IntegrationScheme.ONE_POINT_VOL):
        for pt, w in zip(_GAUSS2_PTS, _GAUSS2_WTS):
            ref_grad, _ = shape_ref_derivatives(pt)
            state, g, f_mat, c = _point_kinematics(coords, a, pt, ref_grad)
            st = stress_and_tangent(c, params)
            b_l, b_nl = b_nonlinear(f_mat, g)
            if scheme is IntegrationScheme.FULL:
                s, l_mat = st.s, st.l
            else:
                s, l_mat = st.s_iso, st.l_iso
            wdet = w * state.det
            k += wdet[..., None, None] * (
                _btdb(b_l, l_mat) + _btdb(b_nl, stress_block_matrix(s))
            )
            f_int += wdet[..., None] * np.einsum("...ia,...i->...a", b_l, s)
            vol = vol + wdet
        if scheme is IntegrationScheme.ONE_POINT_VOL:
            state, g, f_mat, c = _point_kinematics(coords, a, MIDPOINT, _MID_GRAD)
            st = stress_and_tangent(c, params)
            b_l, b_nl = b_nonlinear(f_mat, g)
            k += state.det[..., None, None] * (
                _btdb(b_l, st.l_vol)
                + _btdb(b_nl, stress_block_matrix(st.s_vol))
            )
            f_int += state.det[..., None] * np.einsum(
                "...ia,...i->...a", b_l, st.s_vol
            )
        return ElementSystem(k=k, f_int=f_int, volume=vol)

    state, g, f_mat, c = _point_kinematics(coords, a, MIDPOINT, _MID_GRAD)
    st = stress_and_tangent(c, params)
    b_l, b_nl = b_nonlinear(f_mat, g)
    det = state.det
    k = det[..., None, None] * (
        _btdb(b_l, st.l) + _btdb(b_nl, stress_block_matrix(st.s))
    )
    f_int = det[..., None] * np.einsum("...ia,...i->...a", b_l, st.s)

    if scheme.stabilized:
        if scheme.iso_only_stabilization:
            l_stab, t_stab = st.l_iso, stress_block_matrix(st.s_iso)
        else:
            l_stab, t_stab = st.l, stress_block_matrix(st.s)
        stab = np.zeros(batch + (24, 24))
        for axis in range(3):
            db_l, db_nl = b_nonlinear_xi_derivative(
                state, f_mat, g, _MID_SECOND, axis, scheme.constant_jacobian
            )
            stab += _btdb(db_l, l_stab) + _btdb(db_nl, t_stab)
        stab *= (det / 12.0)[..., None, None]
        k = k + stab
        f_int = f_int + np.einsum("...ab,...b->...a", stab, a)

    return ElementSystem(k=k, f_int=f_int, volume=det)


def element_load(coords, body_force):
    """Consistent nodal load vector for a constant body force density.

    Always integrated with the full 2x2x2 Gauss rule, independent of the
    stiffness scheme.

    Parameters
    ----------
    coords : ndarray, shape (..., 8, 3)
    body_force : array_like, shape (3,)
        Force per undeformed volume.

    Returns
    -------
    ndarray, shape (..., 24)
    """
    coords = np.asarray(coords, dtype=float)
    body = np.asarray(body_force, dtype=float)
    batch = coords.shape[:-2]
    f = np.zeros(batch + (8, 3))
    for pt, w in zip(_GAUSS2_PTS, _GAUSS2_WTS):
        phi = shape_values(pt)
        state = jacobian_state(coords, pt)
        f += (w * state.det)[..., None, None] * np.einsum("n,c->nc", phi, body)
    return f.reshape(batch + (24,))
