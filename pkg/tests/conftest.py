import pytest

from maltkit.closure import compute_closure
from maltkit.library import builtin_system
from maltkit.terms import parse_system

EXAMPLE_CM = """\
signature f/3
identity f(x,x,y) = y
identity f(x,y,z) = f(z,y,x)
"""


@pytest.fixture(scope="session")
def cmaltsev_spec():
    return parse_system(EXAMPLE_CM, name="cmaltsev")


@pytest.fixture(scope="session")
def cmaltsev_closure(cmaltsev_spec):
    return compute_closure(cmaltsev_spec)


@pytest.fixture(scope="session")
def maltsev_spec():
    return builtin_system("maltsev")


@pytest.fixture(scope="session")
def maltsev_closure(maltsev_spec):
    return compute_closure(maltsev_spec)
