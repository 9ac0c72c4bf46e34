"""Exception hierarchy shared across the package.

Errors split into two families: input/validation problems (rejected before any
computation runs) and certified failures discovered mid-computation. The CLI
maps the former to exit code 2 and the latter to exit code 1.
"""


class SpectileError(Exception):
    """Base class for all package errors."""


class InvalidLatticeError(SpectileError):
    """Basis matrix is not square, not finite, or numerically singular."""


class BoundaryCollisionError(SpectileError):
    """A sample point landed on a box face (or a lattice translate of one)."""


class ConfigError(SpectileError):
    """Configuration document failed validation.

    ``pointer`` is a JSON pointer into the offending document.
    """

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}")


class WrongMultiplicityError(SpectileError):
    """A sample point did not see exactly ``level`` covering lattice shifts."""

    def __init__(self, point, observed: int, expected: int):
        self.point = point
        self.observed = observed
        self.expected = expected
        super().__init__(
            f"covering multiplicity {observed} != {expected} at {point}"
        )


class WindowTooSmallError(SpectileError):
    """A covering lattice shift fell outside the coordinate window."""


class NonNormalOperatorError(SpectileError):
    """Diagonalization was requested for an operator field that is not normal."""

    def __init__(self, max_commutator: float, tolerance: float):
        self.max_commutator = max_commutator
        self.tolerance = tolerance
        super().__init__(
            f"operator field is not normal: max commutator norm "
            f"{max_commutator:.3e} exceeds {tolerance:.3e}"
        )


class EigensolverError(SpectileError):
    """Per-fiber eigensolver failed; carries the grid index for diagnosis."""

    def __init__(self, grid_index: int, detail: str):
        self.grid_index = grid_index
        super().__init__(f"eigensolver failed at grid index {grid_index}: {detail}")
