"""Exception types raised by the element, mesh and solver layers."""


class HexstabError(Exception):
    """Base class for all errors raised by this package."""


class SingularJacobian(HexstabError):
    """Isoparametric map is (numerically) singular at an evaluation point."""

    def __init__(self, message, element_indices=None):
        super().__init__(message)
        self.element_indices = element_indices


class InvertedElement(HexstabError):
    """Mesh contains elements with non-positive Jacobian determinant."""

    def __init__(self, message, element_indices=None):
        super().__init__(message)
        self.element_indices = element_indices


class ElementInverted(HexstabError):
    """Deformation gradient lost positive determinant at a quadrature point."""

    def __init__(self, message, element_indices=None):
        super().__init__(message)
        self.element_indices = element_indices
        self.report = None


class NonPositiveDefinite(HexstabError):
    """Right Cauchy-Green tensor is not positive definite."""


class SolveFailure(HexstabError):
    """Global linear system could not be solved reliably."""


class NewtonDivergence(HexstabError):
    """Newton iteration exceeded the allowed number of iterations."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
