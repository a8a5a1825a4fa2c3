# -*- coding: utf-8 -*-

"""
Exception and warning hierarchy.

Every error raised on purpose by ``hamstate`` derives from :class:`HamstateError`
and from the closest built-in exception, so callers can catch either::

    try:
        rec = reconstruct(...)
    except IllPosedReconstructionError as e:  # or ArithmeticError
        ...

Warnings are emitted with :func:`warnings.warn` and derive from
:class:`HamstateWarning`, so they can be filtered or turned into errors with the
standard ``warnings`` machinery (``pytest.warns`` in the test suite).
"""

import typing as T


class HamstateError(Exception):
    """
    Base class of all ``hamstate`` errors.
    """


class GridMismatchError(HamstateError, ValueError):
    pass


class DimensionError(HamstateError, ValueError):
    pass


class SingularGramError(HamstateError, ArithmeticError):
    pass


class IllPosedReconstructionError(HamstateError, ArithmeticError):
    pass


class RankDeficiencyError(HamstateError, ArithmeticError):
    pass


class RankCollapseError(HamstateError, ArithmeticError):
    pass


class ParameterOutOfBoxError(HamstateError, ValueError):
    pass


class BinaryFormatError(HamstateError, ValueError):
    pass


class ConfigError(HamstateError, ValueError):
    pass


class NewtonConvergenceError(HamstateError, RuntimeError):
    """
    Newton iteration of the implicit midpoint rule did not reach the tolerance.

    :param residual: V-norm of the nonlinear defect at the last iterate
    :param iterations: number of Newton iterations performed
    """

    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"Newton did not converge in {iterations} iterations, "
            f"residual = {residual:.3e}"
        )


class StepFailureError(HamstateError, RuntimeError):
    """
    A time step of a trajectory solve failed.
    """

    def __init__(self, step: int, cause: NewtonConvergenceError):
        self.step = step
        self.cause = cause
        super().__init__(f"time step {step} failed: {cause}")


class HamstateWarning(UserWarning):
    pass


class UnderResolvedRepresenterWarning(HamstateWarning):
    pass


class NearSingularGramWarning(HamstateWarning):
    pass


class EigenvalueCrossingWarning(HamstateWarning):
    pass


def make_grid_mismatch_error(what: str, expected: T.Any, got: T.Any) -> GridMismatchError:
    """
    Create a descriptive error for operands that do not live on the same grid.

    :param what: name of the offending operand, e.g. ``"g"`` or ``"u.q"``
    :param expected: what the operation expected (a grid or a size)
    :param got: what it received
    """
    return GridMismatchError(f"{what!r} does not match the grid: expected {expected}, got {got}")


def make_singular_gram_error(cond: float) -> SingularGramError:
    return SingularGramError(
        f"observation Gram matrix A is not positive definite "
        f"(condition number = {cond:.3e}); are two sensors at the same position?"
    )


def make_ill_posed_error(beta: float, beta_min: float) -> IllPosedReconstructionError:
    return IllPosedReconstructionError(
        f"stability constant beta = {beta:.3e} is not above the floor "
        f"beta_min = {beta_min:.3e}, the reconstruction is ill-posed"
    )


def make_config_error(path: str, message: str) -> ConfigError:
    """
    Create a :class:`ConfigError` that names the dotted path of the offending key.

    :param path: dotted path, e.g. ``"placement.l_max"``; ``""`` for the root
    :param message: what is wrong with the value
    """
    if path == "":
        path = "."
    return ConfigError(f"config value at {path!r} is invalid: {message}")
