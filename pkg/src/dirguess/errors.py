"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class DirguessError(Exception):
    """Base class for structured errors raised by the package."""


class DimensionError(DirguessError, ValueError):
    """Operand shapes are incompatible."""


class NotHermitianError(DirguessError, ValueError):
    pass


class NotPositiveError(DirguessError, ValueError):
    pass


class SupportError(DirguessError, ValueError):
    """An operator has weight outside the support it is required to live on."""


class CompletenessError(DirguessError, ValueError):
    pass


class ScoreError(DirguessError, ValueError):
    pass


class InfeasibleError(DirguessError, ValueError):
    """Requested optimum or constraint cannot be met for these parameters."""


class AlwaysAbstainsError(DirguessError, ValueError):
    pass


class NoAcceptedTrialsError(DirguessError, RuntimeError):
    pass


class WalkError(DirguessError, ValueError):
    pass


class LatticeOverflowError(WalkError):
    pass


class ProgramLeakError(WalkError):
    def __init__(self, message: str, positions: list[int]):
        super().__init__(message)
        self.positions = positions


class UntabulatedError(DirguessError, KeyError):
    def __str__(self) -> str:  # KeyError repr-quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class ProgramFormatError(DirguessError, ValueError):
    pass
