"""Shared fixtures and geometry helpers for the test suite."""

import numpy as np
import pytest

from hexstab.errors import SingularJacobian
from hexstab.refelem import MIDPOINT, NODE_XI, gauss_rule, jacobian_state

_CHECK_PTS = np.vstack([gauss_rule(2)[0], MIDPOINT[None, :]])


def random_hex(rng, magnitude=0.25):
    """Draw a random non-inverted hexahedron near the unit cube.

    Corner coordinates are the unit-cube corners plus a uniform
    perturbation; draws are rejected until the Jacobian determinant is
    positive at the center and at the eight points of the 2x2x2 Gauss
    rule.

    Parameters
    ----------
    rng : numpy.random.Generator
    magnitude : float, optional
        Side length of the perturbation cube.

    Returns
    -------
    ndarray, shape (8, 3)
    """
    while True:
        coords = NODE_XI + magnitude * (rng.random((8, 3)) - 0.5)
        try:
            dets = [jacobian_state(coords, pt).det for pt in _CHECK_PTS]
        except SingularJacobian:
            continue
        if min(dets) > 0.0:
            return coords


def perturbed_cube(shift=(0.1, 0.0, 0.0), node=6):
    """Unit cube with one corner shifted; a mildly distorted geometry."""
    coords = NODE_XI.copy()
    coords[node] += np.asarray(shift, dtype=float)
    return coords


@pytest.fixture
def rng():
    """Deterministic random generator, fresh per test."""
    return np.random.default_rng(20260822)
