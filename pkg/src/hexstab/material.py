"""Isotropic material models in Voigt notation.

Voigt convention used throughout the package
--------------------------------------------
Symmetric 3x3 tensors are stored as 6-vectors in the component order

    (11, 22, 33, 12, 23, 31),

holding the *raw* tensor components: the shear slots carry the off
diagonal entry once, with no factor of 2.  Derivative vectors and
Hessians with respect to the right Cauchy-Green tensor C also hold raw
tensor components.  Because C is symmetric, a perturbation dC touches
each off-diagonal pair twice, so scalar chains contract against the
weight vector ``VOIGT_WEIGHTS = (1, 1, 1, 2, 2, 2)``:

    dg        = sum_b  dg_dC[b] * W[b] * dC[b]
    d(dg_dC)a = sum_b  d2g_dC2[a, b] * W[b] * dC[b]

The strain-displacement operators in :mod:`hexstab.element` produce
*engineering* shear rows (factor 2 built in), which is exactly the
``W * dC`` pairing above; stresses and tangent moduli from this module
therefore combine with those operators without extra weights.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveDefinite

VOIGT_WEIGHTS = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])

# (row, col) index of each Voigt slot in the 3x3 tensor.
_VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (2, 0))


def sym_to_voigt(mat):
    """Extract the 6 Voigt components (raw, unweighted) of ``(..., 3, 3)``."""
    mat = np.asarray(mat)
    return np.stack([mat[..., i, j] for i, j in _VOIGT_PAIRS], axis=-1)


def voigt_to_sym(vec):
    """Rebuild the symmetric ``(..., 3, 3)`` tensor from Voigt components."""
    vec = np.asarray(vec)
    out = np.empty(vec.shape[:-1] + (3, 3), dtype=vec.dtype)
    for slot, (i, j) in enumerate(_VOIGT_PAIRS):
        out[..., i, j] = vec[..., slot]
        out[..., j, i] = vec[..., slot]
    return out


@dataclass(frozen=True)
class MaterialParams:
    """Elastic constants shared by the linear and hyperelastic models.

    ``lam`` and ``mu`` are the Lame constants of the linear model.
    ``K``, ``K1`` and ``K2`` parameterize the volumetric/isochoric split
    of the Mooney-Rivlin energy; they are stored explicitly because more
    than one convention for the bulk factor is in common use.
    """

    E: float
    nu: float
    lam: float
    mu: float
    K: float
    K1: float
    K2: float

    @classmethod
    def from_elastic(cls, E, nu, K=None, K1=None, K2=None):
        """Derive the parameter set from Young's modulus and Poisson ratio.

        Parameters
        ----------
        E : float
            Young's modulus, must be positive.
        nu : float
            Poisson ratio in ``[0, 0.5)``.
        K : float, optional
            Bulk factor of the volumetric energy term.  Defaults to the
            standard bulk modulus ``E / (3 (1 - 2 nu))``.
        K1, K2 : float, optional
            Mooney-Rivlin coefficients.  Both default to ``mu / 2``.
        """
        if E <= 0.0:
            raise ValueError(f"Young's modulus must be positive, got {E}")
        if not 0.0 <= nu < 0.5:
            raise ValueError(f"Poisson ratio must lie in [0, 0.5), got {nu}")
        lam = E * nu / ((1.0 - 2.0 * nu) * (1.0 + nu))
        mu = E / (2.0 * (1.0 + nu))
        if K is None:
            K = E / (3.0 * (1.0 - 2.0 * nu))
        if K1 is None:
            K1 = 0.5 * mu
        if K2 is None:
            K2 = 0.5 * mu
        return cls(E=E, nu=nu, lam=lam, mu=mu, K=K, K1=K1, K2=K2)


def d_matrix(params):
    """Isotropic linear-elastic moduli as a 6x6 Voigt matrix.

    Shear rows act on engineering strain, so the shear diagonal is
    ``mu`` rather than ``2 mu``.
    """
    lam, mu = params.lam, params.mu
    d = np.zeros((6, 6))
    d[:3, :3] = lam
    d[:3, :3] += 2.0 * mu * np.eye(3)
    d[3:, 3:] = mu * np.eye(3)
    return d


@dataclass(frozen=True)
class Invariants:
    """Principal invariants of C with first and second C-derivatives.

    Derivative entries are raw tensor components (see module docstring
    for the contraction weights).  All fields broadcast over the leading
    batch shape of the input.
    """

    i1: np.ndarray
    i2: np.ndarray
    i3: np.ndarray
    d_i1: np.ndarray  # (..., 6)
    d_i2: np.ndarray
    d_i3: np.ndarray
    d2_i1: np.ndarray  # (..., 6, 6)
    d2_i2: np.ndarray
    d2_i3: np.ndarray


def invariants_and_derivatives(C):
    """Invariants of the right Cauchy-Green tensor in Voigt form.

    Parameters
    ----------
    C : array_like, shape (..., 6)
        Symmetric positive definite tensor(s), Voigt components.

    Returns
    -------
    Invariants

    Raises
    ------
    NonPositiveDefinite
        If ``det C <= 0`` anywhere in the batch.
    """
    C = np.asarray(C, dtype=float)
    c11, c22, c33, c12, c23, c31 = np.moveaxis(C, -1, 0)
    batch = C.shape[:-1]

    i1 = c11 + c22 + c33
    i2 = (
        c11 * c22 + c22 * c33 + c33 * c11 - c12**2 - c23**2 - c31**2
    )
    i3 = (
        c11 * c22 * c33
        + 2.0 * c12 * c23 * c31
        - c11 * c23**2
        - c22 * c31**2
        - c33 * c12**2
    )
    if np.any(i3 <= 0.0):
        raise NonPositiveDefinite("det C <= 0; tensor is not positive definite")

    zeros = np.zeros(batch)
    d_i1 = np.stack(
        [np.ones(batch)] * 3 + [zeros] * 3, axis=-1
    )
    d_i2 = np.stack(
        [c22 + c33, c11 + c33, c11 + c22, -c12, -c23, -c31], axis=-1
    )
    # Cofactor vector of C.
    d_i3 = np.stack(
        [
            c22 * c33 - c23**2,
            c33 * c11 - c31**2,
            c11 * c22 - c12**2,
            c23 * c31 - c33 * c12,
            c31 * c12 - c11 * c23,
            c12 * c23 - c22 * c31,
        ],
        axis=-1,
    )

    d2_i1 = np.zeros(batch + (6, 6))
    d2_i2 = np.zeros(batch + (6, 6))
    d2_i2[..., :3, :3] = 1.0 - np.eye(3)
    d2_i2[..., 3:, 3:] = -0.5 * np.eye(3)

    h = np.zeros(batch + (6, 6))
    half = 0.5
    h[..., 0, 1] = h[..., 1, 0] = c33
    h[..., 0, 2] = h[..., 2, 0] = c22
    h[..., 1, 2] = h[..., 2, 1] = c11
    h[..., 0, 4] = h[..., 4, 0] = -c23
    h[..., 1, 5] = h[..., 5, 1] = -c31
    h[..., 2, 3] = h[..., 3, 2] = -c12
    h[..., 3, 3] = -half * c33
    h[..., 4, 4] = -half * c11
    h[..., 5, 5] = -half * c22
    h[..., 3, 4] = h[..., 4, 3] = half * c31
    h[..., 3, 5] = h[..., 5, 3] = half * c23
    h[..., 4, 5] = h[..., 5, 4] = half * c12

    return Invariants(
        i1=i1, i2=i2, i3=i3,
        d_i1=d_i1, d_i2=d_i2, d_i3=d_i3,
        d2_i1=d2_i1, d2_i2=d2_i2, d2_i3=h,
    )


@dataclass(frozen=True)
class ModifiedInvariants:
    """Volume-scaled invariants with first and second C-derivatives.

    ``j1`` and ``j2`` are the isochoric invariants ``I1 I3^(-1/3)`` and
    ``I2 I3^(-2/3)``; ``j3 = I3^(1/2)`` equals the determinant of the
    deformation gradient.
    """

    j1: np.ndarray
    j2: np.ndarray
    j3: np.ndarray
    d_j1: np.ndarray
    d_j2: np.ndarray
    d_j3: np.ndarray
    d2_j1: np.ndarray
    d2_j2: np.ndarray
    d2_j3: np.ndarray


def _outer(u, v):
    return np.einsum("...a,...b->...ab", u, v)


def modified_invariant_derivatives(C):
    """Modified invariants J1, J2, J3 and their C-derivative chains.

    Parameters
    ----------
    C : array_like, shape (..., 6)

    Returns
    -------
    ModifiedInvariants
    """
    inv = invariants_and_derivatives(C)
    i1, i2, i3 = inv.i1, inv.i2, inv.i3

    p13 = i3 ** (-1.0 / 3.0)
    p23 = i3 ** (-2.0 / 3.0)
    p43 = i3 ** (-4.0 / 3.0)
    p53 = i3 ** (-5.0 / 3.0)
    p73 = i3 ** (-7.0 / 3.0)
    p83 = i3 ** (-8.0 / 3.0)
    sqrt_i3 = np.sqrt(i3)

    j1 = i1 * p13
    j2 = i2 * p23
    j3 = sqrt_i3

    def bscale(s, arr):
        return s[..., None] * arr

    def bscale2(s, arr):
        return s[..., None, None] * arr

    d_j1 = bscale(p13, inv.d_i1) - bscale(i1 * p43 / 3.0, inv.d_i3)
    d_j2 = bscale(p23, inv.d_i2) - bscale(2.0 * i2 * p53 / 3.0, inv.d_i3)
    d_j3 = bscale(0.5 / sqrt_i3, inv.d_i3)

    d2_j1 = (
        bscale2(p13, inv.d2_i1)
        + bscale2(4.0 * i1 * p73 / 9.0, _outer(inv.d_i3, inv.d_i3))
        - bscale2(p43 / 3.0,
                  _outer(inv.d_i1, inv.d_i3)
                  + _outer(inv.d_i3, inv.d_i1)
                  + bscale2(i1, inv.d2_i3))
    )
    d2_j2 = (
        bscale2(p23, inv.d2_i2)
        + bscale2(10.0 * i2 * p83 / 9.0, _outer(inv.d_i3, inv.d_i3))
        - bscale2(2.0 * p53 / 3.0,
                  _outer(inv.d_i2, inv.d_i3)
                  + _outer(inv.d_i3, inv.d_i2)
                  + bscale2(i2, inv.d2_i3))
    )
    d2_j3 = (
        bscale2(0.5 / sqrt_i3, inv.d2_i3)
        - bscale2(0.25 * i3 ** (-1.5), _outer(inv.d_i3, inv.d_i3))
    )

    return ModifiedInvariants(
        j1=j1, j2=j2, j3=j3,
        d_j1=d_j1, d_j2=d_j2, d_j3=d_j3,
        d2_j1=d2_j1, d2_j2=d2_j2, d2_j3=d2_j3,
    )


@dataclass(frozen=True)
class StressTangent:
    """Second Piola-Kirchhoff stress and tangent moduli, split into the
    isochoric and volumetric contributions.

    Stresses are Voigt 6-vectors with raw components; the 6x6 moduli
    pair with engineering-shear strain operators.
    """

    s_iso: np.ndarray
    s_vol: np.ndarray
    l_iso: np.ndarray
    l_vol: np.ndarray

    @property
    def s(self):
        return self.s_iso + self.s_vol

    @property
    def l(self):
        return self.l_iso + self.l_vol


def stress_and_tangent(C, params):
    """Mooney-Rivlin stress and tangent from the right Cauchy-Green tensor.

    The energy density is

        psi = K1 (J1 - 3) + K2 (J2 - 3) + K/2 (J3 - 1)^2,

    giving ``S = 2 d(psi)/dC`` and ``L = 2 dS/dC``, each split into the
    isochoric part (K1, K2 terms) and the volumetric part (K term).

    Parameters
    ----------
    C : array_like, shape (..., 6)
    params : MaterialParams

    Returns
    -------
    StressTangent
    """
    m = modified_invariant_derivatives(C)
    k1, k2, k = params.K1, params.K2, params.K

    s_iso = 2.0 * (k1 * m.d_j1 + k2 * m.d_j2)
    s_vol = 2.0 * k * (m.j3 - 1.0)[..., None] * m.d_j3

    l_iso = 4.0 * (k1 * m.d2_j1 + k2 * m.d2_j2)
    l_vol = 4.0 * k * (
        (m.j3 - 1.0)[..., None, None] * m.d2_j3 + _outer(m.d_j3, m.d_j3)
    )
    return StressTangent(s_iso=s_iso, s_vol=s_vol, l_iso=l_iso, l_vol=l_vol)


def strain_energy_density(C, params):
    """Mooney-Rivlin energy per undeformed volume.

    Parameters
    ----------
    C : array_like, shape (..., 6)
    params : MaterialParams

    Returns
    -------
    ndarray, batch shaped
    """
    m = modified_invariant_derivatives(C)
    return (
        params.K1 * (m.j1 - 3.0)
        + params.K2 * (m.j2 - 3.0)
        + 0.5 * params.K * (m.j3 - 1.0) ** 2
    )
