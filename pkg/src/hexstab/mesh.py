"""Structured hexahedral meshes for the cantilever studies.

The beam axis is the first coordinate; the clamped face sits at
``x1 = 0``.  Node ``(i, j, k)`` of the structured grid gets the id
``i + j (nx+1) + k (nx+1)(ny+1)``, and element connectivity follows the
canonical corner order of :mod:`hexstab.refelem`.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvertedElement
from .refelem import MIDPOINT, NODE_XI, shape_ref_derivatives


@dataclass
class HexMesh:
    """Node coordinates, connectivity and the clamped node set."""

    nodes: np.ndarray  # (n_nodes, 3)
    elements: np.ndarray  # (n_elements, 8)
    fixed_nodes: np.ndarray  # ids of clamped nodes
    lengths: tuple = field(default=(0.0, 0.0, 0.0))

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    @property
    def n_dofs(self):
        return 3 * self.n_nodes

    @property
    def fixed_dofs(self):
        return (3 * self.fixed_nodes[:, None] + np.arange(3)).ravel()

    def element_coords(self):
        """Node coordinates per element, shape ``(n_elements, 8, 3)``."""
        return self.nodes[self.elements]

    def tip_nodes(self):
        """Ids of the nodes on the free end face ``x1 = L``."""
        x = self.nodes[:, 0]
        return np.flatnonzero(x >= x.max() - 1e-9 * max(self.lengths[0], 1.0))


def _validate_orientation(nodes, elements):
    """Require a positive Jacobian determinant at the corners and center.

    Corner checks catch tangled elements whose midpoint determinant is
    still positive.
    """
    coords = nodes[elements]
    bad = np.zeros(elements.shape[0], dtype=bool)
    for pt in np.vstack([NODE_XI, MIDPOINT[None, :]]):
        grad, _ = shape_ref_derivatives(pt)
        mat = np.einsum("ni,enj->eij", grad, coords)
        bad |= np.linalg.det(mat) <= 0.0
    if np.any(bad):
        indices = np.flatnonzero(bad)
        raise InvertedElement(
            f"{indices.size} element(s) inverted or degenerate, "
            f"first indices {indices[:5].tolist()}",
            element_indices=indices,
        )


def _grid(counts, lengths):
    nx, ny, nz = counts
    lin = [np.linspace(0.0, lengths[d], counts[d] + 1) for d in range(3)]
    zz, yy, xx = np.meshgrid(lin[2], lin[1], lin[0], indexing="ij")
    nodes = np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])

    def node_id(i, j, k):
        return i + j * (nx + 1) + k * (nx + 1) * (ny + 1)

    kk, jj, ii = np.meshgrid(
        np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij"
    )
    ii, jj, kk = ii.ravel(), jj.ravel(), kk.ravel()
    corners = []
    for m in range(8):
        bx, by, bz = m & 1, (m >> 1) & 1, (m >> 2) & 1
        corners.append(node_id(ii + bx, jj + by, kk + bz))
    elements = np.column_stack(corners)
    fixed = np.flatnonzero(nodes[:, 0] == 0.0)
    return nodes, elements, fixed


def box_mesh(counts, lengths):
    """Regular grid of box elements.

    Parameters
    ----------
    counts : tuple of int
        Elements along each axis, ``(nx, ny, nz)`` with ``nx`` axial.
    lengths : tuple of float
        Physical extents ``(L, W, H)``.

    Returns
    -------
    HexMesh
    """
    nodes, elements, fixed = _grid(counts, lengths)
    _validate_orientation(nodes, elements)
    return HexMesh(
        nodes=nodes, elements=elements, fixed_nodes=fixed,
        lengths=tuple(lengths),
    )


def refined_box_mesh(base_counts, lengths, level):
    """Box mesh with every subdivision count doubled per level.

    Level 0 returns the base grid; level 1 doubles ``nx``, ``ny`` and
    ``nz``; and so on.
    """
    if level < 0:
        raise ValueError(f"refinement level must be >= 0, got {level}")
    counts = tuple(int(c) * 2**level for c in base_counts)
    return box_mesh(counts, lengths)


def distorted_beam_mesh(counts, lengths, d):
    """Beam mesh whose interior cross-section planes tilt alternately.

    Every interior plane ``i = 1 .. nx-1`` is sheared along the beam
    axis by ``(-1)^i d (2 x3 - H)`` with ``H`` the beam height, so each
    plane tilts with slope ``2 d`` and the elements become trapezoids
    in the bending plane.  The clamped face and the tip face are not
    moved.  Adjacent planes tilt in opposite directions, so elements
    stay valid while ``2 d H`` is below the axial spacing.

    Parameters
    ----------
    counts : tuple of int
    lengths : tuple of float
    d : float
        Dimensionless tilt parameter, ``>= 0``.

    Returns
    -------
    HexMesh

    Raises
    ------
    InvertedElement
        If the distortion inverts or tangles an element.
    """
    nodes, elements, fixed = _grid(counts, lengths)
    nx = counts[0]
    h = lengths[0] / nx
    height = lengths[2]

    plane = np.rint(nodes[:, 0] / h).astype(int)
    interior = (plane > 0) & (plane < nx)
    sign = np.where(plane % 2 == 1, 1.0, -1.0)
    nodes[interior, 0] += (
        d * sign[interior] * (2.0 * nodes[interior, 2] - height)
    )

    _validate_orientation(nodes, elements)
    return HexMesh(
        nodes=nodes, elements=elements, fixed_nodes=fixed,
        lengths=tuple(lengths),
    )
