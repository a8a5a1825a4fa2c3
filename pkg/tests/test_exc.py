# -*- coding: utf-8 -*-

import logging

import pytest
from rich.logging import RichHandler

from hamstate import exc
from hamstate.logger import setup_logging


def test_hierarchy():
    for cls in (
        exc.GridMismatchError,
        exc.DimensionError,
        exc.ParameterOutOfBoxError,
        exc.BinaryFormatError,
        exc.ConfigError,
    ):
        assert issubclass(cls, exc.HamstateError)
        assert issubclass(cls, ValueError)
    for cls in (
        exc.SingularGramError,
        exc.IllPosedReconstructionError,
        exc.RankDeficiencyError,
        exc.RankCollapseError,
    ):
        assert issubclass(cls, ArithmeticError)
    assert issubclass(exc.EigenvalueCrossingWarning, exc.HamstateWarning)


def test_messages():
    e = exc.make_config_error("placement.l_max", "must be >= 0, got -1")
    assert "'placement.l_max'" in str(e)
    assert "'.'" in str(exc.make_config_error("", "unknown key"))
    assert "1.000e-12" in str(exc.make_ill_posed_error(1e-12, 1e-10))
    assert "same position" in str(exc.make_singular_gram_error(1e17))

    cause = exc.NewtonConvergenceError(residual=1e-3, iterations=25)
    failure = exc.StepFailureError(7, cause)
    assert failure.step == 7
    assert failure.cause is cause
    assert "time step 7" in str(failure)
    with pytest.raises(RuntimeError):
        raise failure


def test_setup_logging():
    logger = setup_logging(verbose=True)
    assert logger.name == "hamstate"
    assert logger.level == logging.DEBUG
    setup_logging()
    assert logger.level == logging.INFO
    handlers = [h for h in logger.handlers if isinstance(h, RichHandler)]
    assert len(handlers) == 1


if __name__ == "__main__":
    from hamstate.tests import run_cov_test

    run_cov_test(
        __file__,
        "hamstate.exc",
        preview=False,
    )
