"""Trilinear reference hexahedron on the unit cube.

The reference element lives on ``[0, 1]^3``.  Node ``n`` (0-based) sits at
the corner whose coordinates are the bits of ``n``: bit 0 gives the first
reference coordinate, bit 1 the second, bit 2 the third.  All quadrature
rules used by the element routines are expressed on this domain, in
particular the midpoint rule with its curvature correction

    int f  ~=  f(m) + 1/24 * sum_i d^2 f / dxi_i^2 (m),    m = (1/2, 1/2, 1/2),

which integrates polynomials of total degree <= 2 exactly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SingularJacobian

# Corner coordinates of the 8 nodes, bit pattern of the node index.
NODE_XI = np.array(
    [[(n >> d) & 1 for d in range(3)] for n in range(8)], dtype=float
)

MIDPOINT = np.array([0.5, 0.5, 0.5])

# Relative determinant threshold below which the map counts as singular.
_DET_RTOL = 1e-14


def shape_values(xi):
    """Evaluate the 8 trilinear shape functions at a reference point.

    Parameters
    ----------
    xi : array_like, shape (3,)
        Point in the unit cube.

    Returns
    -------
    ndarray, shape (8,)
        Shape function values; they sum to one.
    """
    xi = np.asarray(xi, dtype=float)
    factors = np.where(NODE_XI == 1.0, xi, 1.0 - xi)
    return factors.prod(axis=1)


def shape_ref_derivatives(xi):
    """First and second reference derivatives of the shape functions.

    Parameters
    ----------
    xi : array_like, shape (3,)
        Point in the unit cube.

    Returns
    -------
    grad : ndarray, shape (8, 3)
        ``grad[n, d]`` is the derivative of shape function ``n`` with
        respect to reference coordinate ``d``.
    second : ndarray, shape (8, 3, 3)
        Mixed second derivatives.  The diagonal ``second[:, d, d]`` is
        zero because each shape function is linear per coordinate.
    """
    xi = np.asarray(xi, dtype=float)
    factors = np.where(NODE_XI == 1.0, xi, 1.0 - xi)
    signs = np.where(NODE_XI == 1.0, 1.0, -1.0)

    grad = np.empty((8, 3))
    for d in range(3):
        e, f = (d + 1) % 3, (d + 2) % 3
        grad[:, d] = signs[:, d] * factors[:, e] * factors[:, f]

    second = np.zeros((8, 3, 3))
    for d in range(3):
        for e in range(d + 1, 3):
            f = 3 - d - e
            mixed = signs[:, d] * signs[:, e] * factors[:, f]
            second[:, d, e] = mixed
            second[:, e, d] = mixed
    return grad, second


@dataclass(frozen=True)
class JacobianState:
    """Jacobian data of the isoparametric map at one reference point.

    The Jacobian rows are indexed by the reference coordinate:
    ``mat[i, j] = d x_j / d xi_i``.  With this convention physical
    gradients follow as ``inv @ ref_grad``.  ``a[i]`` holds the
    logarithmic derivative ``inv @ d(mat)/d xi_i``, which vanishes
    identically when the element geometry is an affine image of the
    reference cube.

    All fields carry the leading batch shape of the node coordinates
    they were built from.
    """

    mat: np.ndarray  # (..., 3, 3)
    inv: np.ndarray  # (..., 3, 3)
    det: np.ndarray  # (...)
    a: np.ndarray  # (..., 3, 3, 3), a[..., i, :, :] for axis i


def jacobian_state(coords, xi):
    """Build the Jacobian state of one or many elements at a point.

    Parameters
    ----------
    coords : array_like, shape (..., 8, 3)
        Node coordinates, canonical corner order, with optional leading
        batch axes.
    xi : array_like, shape (3,)
        Reference point.

    Returns
    -------
    JacobianState

    Raises
    ------
    SingularJacobian
        If any determinant magnitude falls below ``1e-14`` times the
        cube of the element diameter.
    """
    coords = np.asarray(coords, dtype=float)
    grad, second = shape_ref_derivatives(xi)

    mat = np.einsum("ni,...nj->...ij", grad, coords)
    det = np.linalg.det(mat)

    diameter = np.linalg.norm(
        coords.max(axis=-2) - coords.min(axis=-2), axis=-1
    )
    bad = np.abs(det) <= _DET_RTOL * diameter**3
    if np.any(bad):
        indices = np.flatnonzero(np.atleast_1d(bad))
        raise SingularJacobian(
            f"isoparametric map singular for {indices.size} element(s), "
            f"first indices {indices[:5].tolist()}",
            element_indices=indices,
        )

    inv = np.linalg.inv(mat)
    # d(mat)/d xi_i, then a_i = inv @ d(mat)/d xi_i.
    dmat = np.einsum("nil,...nj->...lij", second, coords)
    a = np.einsum("...im,...lmj->...lij", inv, dmat)
    return JacobianState(mat=mat, inv=inv, det=det, a=a)


def physical_gradients(state, ref_grads):
    """Map reference shape gradients to physical ones.

    Parameters
    ----------
    state : JacobianState
    ref_grads : ndarray, shape (8, 3)
        Reference gradients at the same point the state was built at.

    Returns
    -------
    ndarray, shape (..., 8, 3)
        ``[..., n, j]`` is the derivative of shape function ``n`` with
        respect to physical coordinate ``j``.
    """
    return np.einsum("...ji,ni->...nj", state.inv, ref_grads)


def physical_gradient_xi_derivative(
    state, phys_grads, ref_second, axis, constant_jacobian=False
):
    """Reference-direction derivative of the physical shape gradients.

    Differentiating ``inv @ ref_grad`` along reference axis ``i`` gives

        d/d xi_i (grad phi) = inv @ d(ref_grad)/d xi_i - a_i @ grad phi.

    The first term alone corresponds to freezing the Jacobian at the
    evaluation point; ``constant_jacobian=True`` selects that variant.
    Both agree whenever the geometry is affine.

    Parameters
    ----------
    state : JacobianState
    phys_grads : ndarray, shape (..., 8, 3)
        Output of :func:`physical_gradients` for the same state.
    ref_second : ndarray, shape (8, 3, 3)
        Mixed second reference derivatives at the same point.
    axis : int
        Reference direction, 0, 1 or 2.
    constant_jacobian : bool, optional
        Drop the ``a_i`` correction term.

    Returns
    -------
    ndarray, shape (..., 8, 3)
    """
    out = np.einsum("...jm,nm->...nj", state.inv, ref_second[:, :, axis])
    if not constant_jacobian:
        out = out - np.einsum(
            "...jm,...nm->...nj", state.a[..., axis, :, :], phys_grads
        )
    return out


def gauss_rule(n):
    """Tensor-product Gauss-Legendre rule on the unit cube.

    Parameters
    ----------
    n : int
        Points per axis.

    Returns
    -------
    points : ndarray, shape (n**3, 3)
    weights : ndarray, shape (n**3,)
        Weights summing to one (the cube volume).
    """
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    pts = np.stack(
        [g.ravel() for g in np.meshgrid(x, x, x, indexing="ij")], axis=-1
    )
    wts = (w[:, None, None] * w[None, :, None] * w[None, None, :]).ravel()
    return pts, wts


def corrected_midpoint_rule(f):
    """Integrate a callable over the unit cube with the corrected midpoint rule.

    The curvature term is formed from central second differences with
    step 1/2, which is exact for the polynomial degrees the rule itself
    is exact for (total degree <= 2).

    Parameters
    ----------
    f : callable
        Maps a reference point of shape (3,) to a scalar or ndarray.

    Returns
    -------
    scalar or ndarray
        Approximation of the integral of ``f`` over ``[0, 1]^3``.
    """
    step = 0.5
    center = f(MIDPOINT)
    curvature = 0.0
    for i in range(3):
        offset = np.zeros(3)
        offset[i] = step
        curvature = curvature + (
            f(MIDPOINT + offset) - 2.0 * center + f(MIDPOINT - offset)
        ) / step**2
    return center + curvature / 24.0
