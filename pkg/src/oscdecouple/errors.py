"""Exception hierarchy for the decoupling pipeline."""


class DecouplingError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(DecouplingError, ValueError):
    pass


class NotNearIdentity(DecouplingError, ValueError):
    """Series inversion needs a map whose linear part is the identity."""


class ResidualTooLarge(DecouplingError):
    pass


class NoConvergence(DecouplingError):
    pass


class SingularJacobian(DecouplingError):
    pass


class DefectiveMatrix(DecouplingError):
    pass


class UnpairedComplexEigenvalue(DecouplingError):
    pass


class AmbiguousGrouping(DecouplingError):
    """A left-eigenvector entry sits on the axis splitting the two groups."""


class SmallDivisor(DecouplingError):
    """A decoupling denominator is (near) resonant.

    ``component`` and ``exponents`` name the offending tuple.
    """

    def __init__(self, component, exponents, divisor):
        self.component = component
        self.exponents = tuple(exponents)
        self.divisor = divisor
        super().__init__(
            f"small divisor {abs(divisor):.3e} for component {component}, "
            f"monomial exponents {self.exponents}"
        )


class PreconditionNotDecoupled(DecouplingError):
    pass


class CosineSingular(DecouplingError):
    pass


class ImaginaryResidue(DecouplingError):
    pass


class NotSimplified(DecouplingError):
    pass


class NoPositiveRoot(DecouplingError):
    pass


class NonFinite(DecouplingError):
    """Integration diverged (a state left the finite range)."""


class GridMismatch(DecouplingError, ValueError):
    pass
