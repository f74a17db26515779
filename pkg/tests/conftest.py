import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from glspec.core import Precision, make_params


@pytest.fixture(scope="session")
def p_half():
    return make_params(0.5, 1.0)


@pytest.fixture(scope="session")
def p_three_quarter():
    return make_params(0.75, 0.5)


@pytest.fixture(scope="session")
def p_classical():
    return make_params(1.0, 0.0)


@pytest.fixture(scope="session")
def p_half_ext():
    return make_params(0.5, 1.0, precision=Precision("extended", 128))


@pytest.fixture(scope="session")
def p_three_quarter_ext():
    return make_params(0.75, 0.5, precision=Precision("extended", 128))
