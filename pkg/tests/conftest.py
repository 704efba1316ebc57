import numpy as np
import pytest

from lbmfd import expr as ex
from lbmfd.linalg import OpMatrix, RingPoly


def op(text, dim=1):
    """Operator from text; x, y are shifts and x^-1 their inverses."""
    return ex.to_operator(ex.parse(text), dim)


def poly(dim, *coeffs):
    """RingPoly from ascending coefficient strings."""
    return RingPoly(dim, [op(c, dim) if isinstance(c, str) else c for c in coeffs])


def mat(rows, dim=1):
    return OpMatrix(dim, [[op(str(e), dim) for e in r] for r in rows])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
