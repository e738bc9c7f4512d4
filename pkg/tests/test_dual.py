import numpy as np
import pytest

from rlsigma.dual import (Divergent, christoffels, koszul, lhopital_limit, nabla_limit,
                          nabla_offsigma)
from rlsigma.errors import NotVanishingError, PreconditionError
from rlsigma.expr import parse_expr
from rlsigma.fields import CoordinateField as C
from rlsigma.metric import builtin, tau_at

M0 = builtin("flat")
M1 = builtin("hcurved")
M2 = builtin("iicurved")


def test_koszul_flat():
    p = (0.0, 0.2, -0.1)
    assert koszul(M0, p, C(1), C(1), C(1)) == 0.0
    assert koszul(M0, p, C(3), C(3), C(1)) == -1.0
    assert koszul(M0, p, C(1), C(3), C(3)) == 1.0


def test_christoffels_flat_only_three_entries():
    ct = christoffels(M0, (0.07, 0.3, 0.4))
    nz = {tuple(int(i) + 1 for i in idx) for idx in np.argwhere(ct.gamma != 0)}
    assert nz == {(1, 3, 3), (3, 1, 3), (3, 3, 1)}
    assert ct(1, 3, 3) == -1.0 and ct(3, 1, 3) == 1.0 and ct(3, 3, 1) == 1.0


def test_christoffels_models():
    assert christoffels(M1, (0.0, 0.6, 0.1))(1, 2, 2) == pytest.approx(-0.3)
    assert christoffels(M2, (0.0, 0.3, 0.2))(3, 2, 2) == -0.5


def test_koszul_matches_christoffels_for_coordinate_fields():
    M = builtin("twisted")
    p = (0.05, 0.2, 0.6)
    ct = christoffels(M, p)
    for a in range(1, 4):
        for b in range(1, 4):
            for c in range(1, 4):
                assert koszul(M, p, C(a), C(b), C(c)) == pytest.approx(ct(c, a, b), abs=1e-14)


def test_nabla_offsigma():
    p = (0.1, 0.0, 0.0)
    assert np.allclose(nabla_offsigma(M0, p, C(3), C(3)), [-1, 0, 0])
    assert np.allclose(nabla_offsigma(M0, p, C(1), C(3)), [0, 0, 5])
    assert np.allclose(nabla_offsigma(M0, p, C(2), C(2)), [0, 0, 0])
    with pytest.raises(PreconditionError):
        nabla_offsigma(M0, (0.0, 0, 0), C(1), C(1))


def test_lhopital():
    assert lhopital_limit(M0, (0, 1, 0), parse_expr("x1*(x2+3)", 3)) == 2.0
    assert lhopital_limit(M0, (0, 0.2, 0.3), lambda p: tau_at(M0, p)) == 1.0
    assert lhopital_limit(M0, (0, 0, 0), parse_expr("x1*x1", 3)) == 0.0
    with pytest.raises(NotVanishingError):
        lhopital_limit(M0, (0, 0, 0), parse_expr("1 + x1", 3))


def test_nabla_limit():
    assert np.allclose(nabla_limit(M0, (0, 0.1, 0.2), C(3), C(3)), [-1, 0, 0])
    d = nabla_limit(M2, (0, 0, 0), C(2), C(2))
    assert isinstance(d, Divergent) and d.obstruction == -0.5
    lim = nabla_limit(M1, (0, 0.8, 0), C(2), C(2))
    assert lim[0] == pytest.approx(-0.4)


def test_nabla_limit_matches_offsigma_extrapolation():
    M = builtin("dim4")
    p = np.array([0.0, 0.2, -0.3, 0.1])
    X, Y = C(2), C(4)
    lim = nabla_limit(M, p, X, Y)

    def at(h):
        q = p.copy()
        q[0] = h
        return nabla_offsigma(M, q, X, Y)

    vals = [at(h) for h in (1e-3, 5e-4)]
    extrap = 2 * vals[1] - vals[0]
    assert np.abs(extrap - lim).max() < 1e-6
