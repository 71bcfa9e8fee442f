import pathlib

import pytest

from csx.desugar import desugar
from csx.parser import parse
from csx.semantics import analyze

SPEC_DIR = pathlib.Path(__file__).resolve().parent.parent / "specs"


def load_result(name: str):
    text = (SPEC_DIR / name).read_text()
    return analyze(desugar(parse(text, filename=name)))


@pytest.fixture(scope="session")
def trim_result():
    return load_result("trim.csx")


@pytest.fixture(scope="session")
def trim_ts(trim_result):
    assert trim_result.ok
    return trim_result.typed


@pytest.fixture(scope="session")
def binder_result():
    return load_result("perfect_binder.csx")


@pytest.fixture(scope="session")
def binder_ts(binder_result):
    assert binder_result.ok
    return binder_result.typed


@pytest.fixture(scope="session")
def booklet_result():
    return load_result("booklet_maker.csx")


@pytest.fixture(scope="session")
def booklet_ts(booklet_result):
    assert booklet_result.ok
    return booklet_result.typed
