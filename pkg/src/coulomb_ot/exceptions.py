"""Exception hierarchy shared by every module of :mod:`coulomb_ot`."""


class CoulombOTError(ValueError):
    """Base class for all library errors."""


class ZeroMass(CoulombOTError):
    pass


class NegativeValue(CoulombOTError):
    pass


class DisconnectedSupport(CoulombOTError):
    pass


class NotRadial(CoulombOTError):
    pass


class UnboundedDomainWithoutTruncation(CoulombOTError):
    pass


class OriginSingularity(CoulombOTError):
    """A radial map was evaluated inside its untabulated core around 0."""


class SingularCost(CoulombOTError):
    pass


class InvalidCost(CoulombOTError):
    """A user supplied cost profile violates monotonicity or convexity."""


class Infeasible(CoulombOTError):
    pass


class NoFiniteCostPlan(CoulombOTError):
    pass


class TooLarge(CoulombOTError):
    pass


class MarginalMismatch(CoulombOTError):
    pass


class GridMismatch(CoulombOTError):
    pass


class ZeroTransfer(CoulombOTError):
    pass


class BetaOutOfRange(CoulombOTError):
    pass


class UnsupportedKernel(CoulombOTError):
    pass


class NonConvergent(CoulombOTError, RuntimeError):
    pass


class VanishingGradient(CoulombOTError):
    pass


class AllInfinite(CoulombOTError):
    pass
