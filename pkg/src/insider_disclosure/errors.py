"""Exception hierarchy.

Two families matter to callers: :class:`InvalidInput` (bad parameters, the
CLI maps it to exit code 2) and :class:`NumericalFailure` (a computation that
could not be completed in floating point, exit code 3).
"""


class ModelError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(ModelError, ValueError):
    pass


class NumericalFailure(ModelError, ArithmeticError):
    pass


class InvalidParams(InvalidInput):
    """A market parameter violates its constraint."""

    def __init__(self, field: str, constraint: str, value=None):
        self.field = field
        self.constraint = constraint
        self.value = value
        super().__init__(f"{field}: expected {constraint}, got {value!r}")


class WrongN(InvalidInput):
    """A two-period routine was called with auctions != 2."""

    def __init__(self, auctions: int):
        self.auctions = auctions
        super().__init__(f"two-period closed form needs auctions == 2, got {auctions}")


class MonopolistHasNoA(InvalidInput):
    """The limiting cubic degenerates when there is a single insider."""

    def __init__(self):
        super().__init__("MonopolistHasNoA: the limit constant A is defined only for insiders >= 2")


class DegenerateVariance(NumericalFailure):
    """Residual variance underflowed before the final auction."""

    def __init__(self, auction: int, value: float):
        self.auction = auction
        self.value = value
        super().__init__(
            f"residual variance underflowed to {value!r} after auction {auction}; "
            "reduce insiders or auctions"
        )


class NoBracket(NumericalFailure):
    def __init__(self, lo, hi, flo, fhi):
        self.lo, self.hi, self.flo, self.fhi = lo, hi, flo, fhi
        super().__init__(f"no sign change on [{lo}, {hi}]: f = ({flo}, {fhi})")


class BracketSignError(NoBracket):
    """The analytic bracket for A does not contain a sign change of f."""


class ShootingDiverged(NumericalFailure):
    pass


class SecondOrderViolated(NumericalFailure):
    def __init__(self, auction: int, lam: float, alpha: float):
        self.auction, self.lam, self.alpha = auction, lam, alpha
        super().__init__(
            f"second-order condition lambda*(1 - alpha*lambda) > 0 fails at auction {auction} "
            f"(lambda={lam!r}, alpha={alpha!r})"
        )


class EmptySimulation(InvalidInput):
    pass


class ConventionMismatch(ModelError):
    """Two noise conventions disagree on an observable statistic."""

    def __init__(self, statistic: str, z_score: float):
        self.statistic = statistic
        self.z_score = z_score
        super().__init__(f"conventions disagree on {statistic} ({z_score:.2f} joint standard errors)")
