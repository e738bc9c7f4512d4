"""Canonical structures on the hypersurface.

The main normal is N = d1 and the main radical is R = d_m.  H and II are
the symmetric forms read off the Christoffel symbols of the dual connection
at x1 = 0:

    H(A, B) = box_A B(N) = Gamma_{1,ab} A^a B^b
    II(A, B) = box_A B(R) = Gamma_{m,ab} A^a B^b

The screen S is the H-orthogonal complement of R inside the tangent space.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dual import christoffels, koszul, nabla_limit, Divergent
from .errors import NonCanonicalError, NonTangentError, NotIIFlatError, PreconditionError
from .fields import CoordinateField, as_field
from .metric import AdaptedMetric, metric_at, sigma_grid, sigma_point

FLAT_TOL = 1e-9
TANGENT_TOL = 1e-12


@dataclass(frozen=True)
class SigmaFrame:
    """Adapted frame at a hypersurface point.

    ``H_matrix`` is expressed in the basis (V_2, ..., V_{m-1}, R) and
    ``II_matrix`` in (N, V_2, ..., V_{m-1}, R).
    """

    point: np.ndarray
    N: np.ndarray
    R: np.ndarray
    screen_basis: tuple
    H_matrix: np.ndarray
    II_matrix: np.ndarray
    raw_screen: tuple

    @property
    def tangent_basis(self) -> list:
        return list(self.screen_basis) + [self.R]

    @property
    def full_basis(self) -> list:
        return [self.N] + list(self.screen_basis) + [self.R]


@dataclass(frozen=True)
class Decomposition:
    nu: float
    screen: np.ndarray
    rho: float


@dataclass(frozen=True)
class Flatness:
    ii_flat: bool
    ii_max: float
    h_flat: bool
    h_max: float

    @property
    def iii_flat(self) -> bool:
        return self.ii_flat and self.h_flat


# forms ---------------------------------------------------------------------

def H_form(M: AdaptedMetric, p, x, y) -> float:
    """H(x, y) for tangent vectors at a hypersurface point."""
    gam = christoffels(M, p).gamma
    return float(np.asarray(x) @ gam[0] @ np.asarray(y))


def II_form(M: AdaptedMetric, p, a, b) -> float:
    """II(a, b) for arbitrary vectors at a hypersurface point."""
    gam = christoffels(M, p).gamma
    return float(np.asarray(a) @ gam[M.m - 1] @ np.asarray(b))


def H_matrix_coords(M, p) -> np.ndarray:
    return christoffels(M, p).gamma[0].copy()


def II_matrix_coords(M, p) -> np.ndarray:
    return christoffels(M, p).gamma[M.m - 1].copy()


def fundamental_H(M: AdaptedMetric, p_sigma, i: int, j: int) -> float:
    """H_ij = -1/2 d1 g_ij on the hypersurface, labels i, j in 2..m."""
    p = sigma_point(M, p_sigma)
    if not (2 <= i <= M.m and 2 <= j <= M.m):
        raise PreconditionError("H is defined on tangent labels 2..m")
    return -0.5 * float(metric_at(M, p).dg[i - 1, j - 1, 0])


def fundamental_II(M: AdaptedMetric, p_sigma, a: int, b: int) -> float:
    """II_ab on the hypersurface, labels in 1..m.

    Tangent entries use -1/2 d_m g_ij; entries with label 1 go through the
    Koszul form with coordinate fields as canonical extensions.
    """
    p = sigma_point(M, p_sigma)
    m = M.m
    if not (1 <= a <= m and 1 <= b <= m):
        raise PreconditionError("labels must lie in 1..m")
    if a == 1 or b == 1:
        return koszul(M, p, CoordinateField(a), CoordinateField(b), CoordinateField(m))
    return -0.5 * float(metric_at(M, p).dg[a - 1, b - 1, m - 1])


# frame -----------------------------------------------------------------------

def screen_frame(M: AdaptedMetric, p_sigma) -> SigmaFrame:
    return _screen_frame_cached(M, tuple(sigma_point(M, p_sigma)))


@lru_cache(maxsize=8192)
def _screen_frame_cached(M, p):
    m = M.m
    pa = np.array(p)
    g = metric_at(M, p).g
    Hc = H_matrix_coords(M, p)
    N = np.eye(m)[0]
    R = np.eye(m)[m - 1]
    raw = []
    for lam in range(1, m - 1):
        w = np.eye(m)[lam]
        # solve H(w + c R, R) = 0 using H(R, R) = -1
        c = (w @ Hc @ R) / -(R @ Hc @ R)
        raw.append(w + c * R)
    basis = []
    for w in raw:
        v = w.copy()
        for e in basis:
            v = v - (v @ g @ e) * e
        nrm2 = v @ g @ v
        if nrm2 <= 0.0:
            raise PreconditionError("screen block is not positive definite")
        basis.append(v / np.sqrt(nrm2))
    tb = basis + [R]
    fb = [N] + tb
    Hm = np.array([[x @ Hc @ y for y in tb] for x in tb])
    IIc = II_matrix_coords(M, p)
    IIm = np.array([[x @ IIc @ y for y in fb] for x in fb])
    return SigmaFrame(pa, N, R, tuple(basis), Hm, IIm, tuple(raw))


def decompose(M: AdaptedMetric, p_sigma, a) -> Decomposition:
    """Split ``a`` as nu N + A^S + rho R."""
    fr = screen_frame(M, p_sigma)
    p = fr.point
    a = np.asarray(a, dtype=float)
    g = metric_at(M, p).g
    nu = float(a @ g @ fr.N)
    rho = -H_form(M, p, a - nu * fr.N, fr.R)
    screen = np.array([float(a @ g @ v) for v in fr.screen_basis])
    return Decomposition(nu, screen, rho)


def reassemble(frame: SigmaFrame, d: Decomposition) -> np.ndarray:
    v = d.nu * frame.N + d.rho * frame.R
    for c, e in zip(d.screen, frame.screen_basis):
        v = v + c * e
    return v


def weingarten(M: AdaptedMetric, p_sigma):
    """Screen Weingarten data ``(H^S, II^S, eig H^S, eig II^S)``."""
    fr = screen_frame(M, p_sigma)
    n = M.m - 2
    HS = fr.H_matrix[:n, :n].copy()
    IIS = fr.II_matrix[1:n + 1, 1:n + 1].copy()
    return HS, IIS, np.linalg.eigvalsh(HS), np.linalg.eigvalsh(IIS)


# rho -------------------------------------------------------------------------

def _check_tangent(x):
    if abs(x[0]) > TANGENT_TOL:
        raise NonTangentError(f"vector has normal component {x[0]!r}")


def rho_form(M: AdaptedMetric, p_sigma, x) -> float:
    """rho(x) = -H(x, R) for a tangent vector."""
    p = sigma_point(M, p_sigma)
    x = np.asarray(x, dtype=float)
    _check_tangent(x)
    return -H_form(M, p, x, np.eye(M.m)[M.m - 1])


def rho_gradient(M: AdaptedMetric, p, X, Y) -> float:
    """X(rho(Y)) along the hypersurface for tangent fields given by (value, grad).

    rho(Y) = -Y^i H_im with H_im = Gamma_{1,im}; only tangential derivatives
    enter since X is tangent.
    """
    m = M.m
    x, _ = X
    y, dy = Y
    ct = christoffels(M, p)
    Hm = ct.gamma[0][:, m - 1]  # H_im
    dHm = ct.dgamma[0][:, m - 1, :]  # [i, k]
    return -float(x @ (dy.T @ Hm) + y @ dHm @ x)


def d_rho(M: AdaptedMetric, p_sigma, X, Y) -> float:
    """d rho(X, Y) = X(rho(Y)) - Y(rho(X)) - rho([X, Y]) for tangent fields."""
    from .fields import field_data

    p = sigma_point(M, p_sigma)
    Xd = field_data(X, M, p)
    Yd = field_data(Y, M, p)
    _check_tangent(Xd[0])
    _check_tangent(Yd[0])
    br = Yd[1] @ Xd[0] - Xd[1] @ Yd[0]
    return rho_gradient(M, p, Xd, Yd) - rho_gradient(M, p, Yd, Xd) - rho_form(M, p, br)


# flatness and III ------------------------------------------------------------

def flatness(M: AdaptedMetric, grid=None) -> Flatness:
    """Check II- and H-flatness of the screen on a grid of hypersurface points."""
    if grid is None:
        grid = sigma_grid(M, 5)
    elif isinstance(grid, int):
        grid = sigma_grid(M, grid)
    ii_max = h_max = 0.0
    for p in grid:
        HS, IIS, _, _ = weingarten(M, p)
        ii_max = max(ii_max, float(np.abs(IIS).max()))
        h_max = max(h_max, float(np.abs(HS).max()))
    return Flatness(ii_max < FLAT_TOL, ii_max, h_max < FLAT_TOL, h_max)


@lru_cache(maxsize=None)
def probe_flatness(M: AdaptedMetric) -> Flatness:
    """Flatness on the default probe grid (cached per model)."""
    return flatness(M, 5)


def require_ii_flat(M: AdaptedMetric) -> None:
    fl = probe_flatness(M)
    if not fl.ii_flat:
        raise NotIIFlatError(f"model is not II-flat (max |II^S| = {fl.ii_max:.3e})")


def _require_canonical_tangent(M, p, *fields):
    for F in fields:
        F = as_field(F)
        if not getattr(F, "canonical", False):
            raise NonCanonicalError(f"field {F!r} is not a canonical extension")
        _check_tangent([j.value for j in F.jets(M, p)])


def third_form(M: AdaptedMetric, p_sigma, X, Y, Z) -> float:
    """III(X, Y, Z) = II(lim nabla_X Y, Z) on a II-flat model."""
    require_ii_flat(M)
    p = sigma_point(M, p_sigma)
    _require_canonical_tangent(M, p, X, Y, Z)
    lim = nabla_limit(M, p, X, Y)
    if isinstance(lim, Divergent):
        raise NotIIFlatError(f"II(X, Y) = {lim.obstruction!r} does not vanish")
    z = np.array([j.value for j in as_field(Z).jets(M, p)])
    return II_form(M, p, lim, z)
