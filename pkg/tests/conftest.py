from fractions import Fraction

import pytest

from adelic_okounkov.logq import LogQ
from adelic_okounkov.model import INF, AffinePiece, DiagonalModel, Place, WeightFunction, from_max_family

LOG2 = LogQ.log(2)
LOG3 = LogQ.log(3)


def const_model(dim: int, c, degree: int = 1) -> DiagonalModel:
    return DiagonalModel(dim, degree, ((INF, WeightFunction.constant(LogQ.coerce(c), dim)),))


def affine_model(dim: int, pieces, degree: int = 1, place=INF) -> DiagonalModel:
    """pieces: list of (gradient, offset) with gradient of length dim+1."""
    w = WeightFunction(tuple(AffinePiece(tuple(LogQ.coerce(g) for g in grad), LogQ.coerce(off))
                             for grad, off in pieces))
    return DiagonalModel(dim, degree, ((place, w),))


def tent_model(depth=Fraction(-3, 10), slope=2) -> DiagonalModel:
    """P^1 weight min(depth + slope*u1, depth + slope*u0): negative at both vertices."""
    return affine_model(1, [((slope, 0), depth), ((0, slope), depth)])


def max_family(*a, degree=1):
    a = tuple(Fraction(x) for x in a)
    return from_max_family(len(a) - 1, degree, {INF: a})


@pytest.fixture
def flagship():
    return const_model(1, LOG2)


@pytest.fixture
def plane():
    return const_model(2, LOG2)


@pytest.fixture
def example_family():
    return max_family(Fraction(1, 2), 2, 2)


_ACCEPTANCE: list[tuple[str, bool, float, str]] = []


def record_acceptance(label: str, ok: bool, seconds: float, detail: str = "") -> None:
    _ACCEPTANCE.append((label, ok, seconds, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, secs, detail in sorted(_ACCEPTANCE, key=lambda t: int(t[0].split()[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  ({secs:.2f}s)  {detail}")
