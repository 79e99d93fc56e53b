"""Exception types raised when a state leaves the domain of the dynamics."""
from __future__ import annotations


class DomainError(ValueError):
    """A state is outside the domain where the vector field is defined."""


class VortexCollision(DomainError):
    def __init__(self, i: int, j: int, distance: float):
        self.pair = (i, j)
        self.distance = distance
        super().__init__(f"vortex collision between vortices {i + 1} and {j + 1} (distance {distance:.3e})")


class LiftedCollision(DomainError):
    def __init__(self, i: int, j: int, value: float):
        self.pair = (i, j)
        super().__init__(f"lifted collision between vortices {i + 1} and {j + 1} (log argument {value:.3e})")


class LogDomainError(DomainError):
    def __init__(self, what: str, value: float):
        self.what = what
        super().__init__(f"nonpositive log argument for {what}: {value:.3e}")


class ShapeUndefined(DomainError):
    def __init__(self, i: int, j: int):
        self.pair = (i, j)
        super().__init__(f"shape undefined: antipodal vortices ({i + 1},{j + 1})")
