"""Exception types shared across the package."""


class CanonSpecError(Exception):
    """Base class for all package errors."""


class InsufficientMoments(CanonSpecError, ValueError):
    pass


class Singular(CanonSpecError, ValueError):
    pass


class NotPositiveDefinite(CanonSpecError, ValueError):
    """Raised when a moment sequence fails the Caratheodory-Toeplitz test.

    ``order`` is the index n of the first truncated Toeplitz matrix J_n that
    is not positive definite.
    """

    def __init__(self, order, value=None):
        self.order = order
        self.value = value
        msg = f"moment sequence is not positive definite at order {order}"
        if value is not None:
            msg += f" (Delta = {value:.6g})"
        super().__init__(msg)


class InvalidVerblunsky(CanonSpecError, ValueError):
    pass


class InvalidHeights(CanonSpecError, ValueError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"step height h[{index}] = {value!r} is not a positive finite number")


class InvalidHamiltonian(CanonSpecError, ValueError):
    pass


class InvalidPotential(CanonSpecError, ValueError):
    pass


class GridTooSmall(CanonSpecError, ValueError):
    pass


class QuadratureFailure(CanonSpecError, RuntimeError):
    pass
