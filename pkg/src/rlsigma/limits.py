"""Curvature near the hypersurface: Upsilon, limits, divergence orders.

Curvature convention: <R(A,B)C,D> with R(A,B) = [nabla_A, nabla_B] - nabla_[A,B].
In coordinates

    R_abcd = d_a Gamma_{d,bc} - d_b Gamma_{d,ac}
             - g^{ef} (Gamma_{f,bc} Gamma_{e,ad} - Gamma_{f,ac} Gamma_{e,bd}).

Replacing g^{-1} by the regular matrix P = tau g^{-1} gives the tensor
Upsilon = tau R, which is smooth across {x1 = 0} and restricts there to
the determinant of II values.  Every quantity below is computed twice:
exactly on the hypersurface, and empirically by sampling x1 = eps.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import product

import numpy as np

from .dual import christoffels
from .errors import PreconditionError
from .fields import (ConstantField, CoordinateField, PerturbedField, ScreenField, as_field,
                     field_data, field_value)
from .metric import (
    AdaptedMetric,
    _as_point,
    builtin,
    g_m_value,
    metric_at,
    sigma_point,
    tau_inverse_metric,
    tau_inverse_metric_x1,
)
from .sigma import H_form, II_form, probe_flatness, rho_form, screen_frame

EPS_SCHEDULE = tuple(10.0 ** (-k / 2) for k in range(2, 9))  # 1e-1 .. 1e-4
UPSILON_TOL = 1e-9
ZERO_TOL = 1e-9
RANK_TOL = 1e-10
BULK_STEP = 1e-3


# tensors -------------------------------------------------------------------

def _quadratic(P, gam):
    # Q[a,b,c,d] = P^{ef} (G_{f,bc} G_{e,ad} - G_{f,ac} G_{e,bd})
    t = np.einsum("ef,fbc,ead->abcd", P, gam, gam)
    return t - np.transpose(t, (1, 0, 2, 3))


def _linear(dgam):
    # L[a,b,c,d] = d_a G_{d,bc} - d_b G_{d,ac}
    t = np.einsum("dbca->abcd", dgam)
    return t - np.transpose(t, (1, 0, 2, 3))


def riemann_tensor(M: AdaptedMetric, p) -> np.ndarray:
    """``R[a,b,c,d] = <R(d_a, d_b) d_c, d_d>`` off the hypersurface."""
    p = _as_point(M, p)
    if p[0] == 0.0:
        raise PreconditionError("metric is singular on the hypersurface")
    ct = christoffels(M, p)
    ginv = np.linalg.inv(metric_at(M, p).g)
    return _linear(ct.dgamma) - _quadratic(ginv, ct.gamma)


def upsilon_tensor(M: AdaptedMetric, p) -> np.ndarray:
    """Regular tensor tau * R, evaluated without dividing by x1."""
    p = _as_point(M, p)
    ct = christoffels(M, p)
    tau = metric_at(M, p).g[M.m - 1, M.m - 1]
    return tau * _linear(ct.dgamma) - _quadratic(tau_inverse_metric(M, p), ct.gamma)


def upsilon_tensor_x1(M: AdaptedMetric, p_sigma) -> np.ndarray:
    """Exact x1-derivative of the Upsilon tensor at a hypersurface point."""
    p = tuple(sigma_point(M, p_sigma))
    ct = christoffels(M, p)
    m = M.m
    dtau = metric_at(M, p).dg[m - 1, m - 1, 0]
    P = tau_inverse_metric(M, p)
    dP = tau_inverse_metric_x1(M, p)
    g1 = ct.dgamma[..., 0]
    t = (np.einsum("ef,fbc,ead->abcd", P, g1, ct.gamma)
         + np.einsum("ef,fbc,ead->abcd", P, ct.gamma, g1))
    dquad = t - np.transpose(t, (1, 0, 2, 3))
    return dtau * _linear(ct.dgamma) - _quadratic(dP, ct.gamma) - dquad


def _vec(F, M, q):
    if hasattr(F, "jets"):
        return field_value(F, M, q)
    return np.asarray(F, dtype=float)


def _contract(T, a, b, c, d):
    return float(np.einsum("abcd,a,b,c,d->", T, a, b, c, d))


def covariant_curvature_offsigma(M: AdaptedMetric, p, A, B, C, D) -> float:
    """<R(A,B)C,D> at a point off the hypersurface."""
    vs = [_vec(F, M, p) for F in (A, B, C, D)]
    return _contract(riemann_tensor(M, p), *vs)


def upsilon_bulk(M: AdaptedMetric, p, A, B, C, D) -> float:
    """tau(p) * <R(A,B)C,D>."""
    p = _as_point(M, p)
    tau = metric_at(M, p).g[M.m - 1, M.m - 1]
    return tau * covariant_curvature_offsigma(M, p, A, B, C, D)


def upsilon_restricted(M: AdaptedMetric, p_sigma, a, b, c, d) -> float:
    """det [[II(a,c), II(a,d)], [II(b,c), II(b,d)]] at a hypersurface point."""
    p = sigma_point(M, p_sigma)
    a, b, c, d = (_vec(F, M, p) for F in (a, b, c, d))
    return II_form(M, p, a, c) * II_form(M, p, b, d) - II_form(M, p, a, d) * II_form(M, p, b, c)


def ricci_tensor(M: AdaptedMetric, p) -> np.ndarray:
    Rt = riemann_tensor(M, p)
    ginv = np.linalg.inv(metric_at(M, p).g)
    return np.einsum("cd,acbd->ab", ginv, Rt)


def ricci_offsigma(M: AdaptedMetric, p, a, b) -> float:
    """Ric(a, b) = g^{cd} <R(a, d_c) b, d_d>."""
    return float(_vec(a, M, p) @ ricci_tensor(M, p) @ _vec(b, M, p))


def _gram(M, p, a, b):
    g = metric_at(M, p).g
    return float((a @ g @ a) * (b @ g @ b) - (a @ g @ b) ** 2)


def sectional_offsigma(M: AdaptedMetric, p, a, b) -> float:
    """K = <R(a,b)a,b> / det(g restricted to a^b)."""
    p = _as_point(M, p)
    va, vb = _vec(a, M, p), _vec(b, M, p)
    det = _gram(M, p, va, vb)
    if det == 0.0:
        raise PreconditionError("the plane a^b is degenerate at this point")
    return _contract(riemann_tensor(M, p), va, vb, va, vb) / det


# probing -------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeFit:
    slope: float
    intercept: float
    residual: float
    classification: str


def probe_fit(samples) -> ProbeFit:
    """Least-squares fit of log|value| against log eps.

    Bands: |slope| < 0.1 bounded, slope near -1 or -2 gives that order,
    anything else is reported as unclassified.
    """
    eps = np.array([s[0] for s in samples], dtype=float)
    val = np.array([s[1] for s in samples], dtype=float)
    keep = val != 0.0
    if not keep.any():
        return ProbeFit(0.0, -math.inf, 0.0, "bounded")
    if keep.sum() < 2:
        raise ValueError("need at least two nonzero samples for a slope fit")
    x = np.log(eps[keep])
    y = np.log(np.abs(val[keep]))
    (slope, intercept), res, *_ = np.polyfit(x, y, 1, full=True)
    resid = float(np.sqrt(res[0] / keep.sum())) if len(res) else 0.0
    return ProbeFit(float(slope), float(intercept), resid, _band(slope))


def _band(slope: float) -> str:
    if -0.1 < slope < 0.1:
        return "bounded"
    if -1.1 < slope < -0.9:
        return "order -1"
    if -2.1 < slope < -1.9:
        return "order -2"
    return "unclassified"


@dataclass
class Probe:
    """Samples of a quantity along the x1-axis with the derived fit."""

    eps: list
    values: list
    slope: float
    intercept: float
    residual: float
    label: str
    extrapolated: float | None = None
    extrapolation_error: float | None = None
    lorentz_values: list | None = None

    @property
    def bounded(self) -> bool:
        return self.label in ("bounded", "vanishing", "zero")

    @property
    def order(self) -> int | None:
        return {"order -1": -1, "order -2": -2}.get(self.label)


def run_probe(func, eps=EPS_SCHEDULE, two_sided=False) -> Probe:
    """Sample ``func(x1)`` on the Riemann side (and optionally the Lorentz side).

    Samples whose magnitude stays below ZERO_TOL are labelled ``zero``; a
    clearly positive slope means the quantity tends to zero and is
    labelled ``vanishing``.  Both count as bounded.
    """
    eps = [float(e) for e in eps]
    values = [float(func(e)) for e in eps]
    lorentz = [float(func(-e)) for e in eps] if two_sided else None
    arr = np.array(values)
    if np.abs(arr).max() < ZERO_TOL:
        pr = Probe(eps, values, 0.0, -math.inf, 0.0, "zero", 0.0, 0.0, lorentz)
        return pr
    fit = probe_fit(list(zip(eps, values)))
    label = fit.classification
    if label == "unclassified" and fit.slope >= 0.1:
        label = "vanishing"
    pr = Probe(eps, values, fit.slope, fit.intercept, fit.residual, label,
               lorentz_values=lorentz)
    if pr.bounded:
        pr.extrapolated, pr.extrapolation_error = _extrapolate(eps, values)
    return pr


def _extrapolate(eps, values):
    e = np.array(eps)
    v = np.array(values)
    small = e <= 1.0001e-2
    c2 = np.polyfit(e[small], v[small], 2)[-1]
    idx = np.argsort(e)[:3]
    c1 = np.polyfit(e[idx], v[idx], 1)[-1]
    return float(c2), float(abs(c2 - c1))


def leading_coefficient(eps, values, order: int) -> float:
    """Coefficient c of c * eps**order fitted on the small-eps samples."""
    e = np.array(eps)
    v = np.array(values) * e ** (-order)
    small = e <= 1.0001e-2
    return float(np.polyfit(e[small], v[small], 2)[-1])


def richardson_limit(func, h0: float = 2e-2, levels: int = 5):
    """Limit of ``func(h)`` as h -> 0 for func smooth in h.  Returns (value, error).

    ``func`` may return floats or arrays; the error is the last correction.
    """
    T = [[np.asarray(func(h0), dtype=float)]]
    for i in range(1, levels):
        row = [np.asarray(func(h0 / 2**i), dtype=float)]
        for j in range(1, i + 1):
            row.append(row[j - 1] + (row[j - 1] - T[i - 1][j - 1]) / (2**j - 1))
        T.append(row)
    val, err = T[-1][-1], np.abs(T[-1][-1] - T[-1][-2])
    if val.ndim == 0:
        return float(val), float(err)
    return val, float(err.max())


def central_x1_derivative(func, h: float = BULK_STEP) -> float:
    """d/dx1 at 0 by central differences at h and h/2 with one Richardson step."""
    d1 = (func(h) - func(-h)) / (2 * h)
    d2 = (func(h / 2) - func(-h / 2)) / h
    return (4.0 * d2 - d1) / 3.0


# reports -------------------------------------------------------------------

@dataclass
class LimitReport:
    """Classification of a curvature quantity approaching the hypersurface."""

    quantity: str
    classification: str  # finite | extension_dependent | divergent
    value: float | None = None
    order: int | None = None
    coefficient: float | None = None
    theorem: dict = field(default_factory=dict)
    probe: Probe | None = None
    details: dict = field(default_factory=dict)

    @property
    def agrees(self) -> bool:
        """Theorem prediction and probe agree on bounded versus divergent order."""
        pred = self.theorem.get("bounded")
        if pred is None or self.probe is None:
            return True
        if pred:
            return self.probe.bounded
        return self.probe.order == self.theorem.get("order")

    def to_dict(self) -> dict:
        d = {
            "quantity": self.quantity,
            "classification": self.classification,
            "value": self.value,
            "order": self.order,
            "coefficient": self.coefficient,
            "theorem": self.theorem,
            "agrees": self.agrees,
            "details": self.details,
        }
        d["probe"] = None if self.probe is None else asdict(self.probe)
        return d


def _frame_vectors(M, p):
    fr = screen_frame(M, p)
    return fr.full_basis


def slot_contractions(M, p, a, b, c, d) -> float:
    """Largest |Upsilon| with one slot replaced by a frame vector."""
    best = 0.0
    quad = [a, b, c, d]
    for e in _frame_vectors(M, p):
        for slot in range(4):
            q = list(quad)
            q[slot] = e
            best = max(best, abs(upsilon_restricted(M, p, *q)))
    return best


def _along(M, p, x1):
    q = np.array(p, dtype=float)
    q[0] = x1
    return q


def _name(F):
    return getattr(F, "name", None) or "vec"


def covariant_limit(M: AdaptedMetric, p_sigma, A, B, C, D, eps=EPS_SCHEDULE,
                    two_sided: bool = False) -> LimitReport:
    """Classify <R(A,B)C,D> as x1 -> 0 along the normal line through ``p_sigma``."""
    p = sigma_point(M, p_sigma)
    fields = [as_field(F) for F in (A, B, C, D)]
    vs = [field_value(F, M, p) for F in fields]
    ups = upsilon_restricted(M, p, *vs)
    slots = slot_contractions(M, p, *vs)
    gm = g_m_value(M, p)

    def sample(x1):
        q = _along(M, p, x1)
        return covariant_curvature_offsigma(M, q, *(field_value(F, M, q) for F in fields))

    probe = run_probe(sample, eps, two_sided)
    qid = "cov:" + ",".join(_name(F) for F in fields)
    bounded = abs(ups) < UPSILON_TOL
    theorem = {"tag": "covariant-extension", "bounded": bounded,
               "order": None if bounded else -1, "upsilon": ups,
               "well_defined": bounded and slots < UPSILON_TOL}
    details = {"upsilon": ups, "max_slot_contraction": slots}
    if not bounded:
        return LimitReport(qid, "divergent", None, -1, ups / gm, theorem, probe, details)

    def bulk(x1):
        q = _along(M, p, x1)
        return upsilon_bulk(M, q, *(field_value(F, M, q) for F in fields))

    value = central_x1_derivative(bulk) / gm
    cls = "finite" if slots < UPSILON_TOL else "extension_dependent"
    return LimitReport(qid, cls, value, None, None, theorem, probe, details)


def covariant_limit_exact(M: AdaptedMetric, p_sigma, A, B, C, D) -> float:
    """Limit of <R(A,B)C,D> by exact L'Hopital on the Upsilon tensor (needs Upsilon = 0)."""
    p = sigma_point(M, p_sigma)
    js = [as_field(F).jets(M, p) for F in (A, B, C, D)]
    vals = [np.array([j.value for j in comp]) for comp in js]
    d1 = [np.array([j.partial(1) for j in comp]) for comp in js]
    U = upsilon_tensor(M, p)
    if abs(_contract(U, *vals)) > UPSILON_TOL:
        raise PreconditionError("Upsilon does not vanish; the limit diverges")
    total = _contract(upsilon_tensor_x1(M, p), *vals)
    for k in range(4):
        args = list(vals)
        args[k] = d1[k]
        total += _contract(U, *args)
    return total / g_m_value(M, p)


@dataclass(frozen=True)
class PerturbationResult:
    deviations: tuple
    predicted: tuple
    max_deviation: float
    max_mismatch: float


def perturbation_check(M: AdaptedMetric, p_sigma, quadruple, perturbations) -> PerturbationResult:
    """Compare limits of perturbed extensions with the Upsilon defect.

    Each perturbation is a 4-tuple of bar fields (or None per slot); slot k
    becomes base_k + tau * bar_k.
    """
    p = sigma_point(M, p_sigma)
    base = [as_field(F) for F in quadruple]
    ref = covariant_limit(M, p, *base)
    if ref.value is None:
        raise PreconditionError("base quadruple has no finite limit")
    vals = [field_value(F, M, p) for F in base]
    devs, preds = [], []
    for bars in perturbations:
        fields = [F if b is None else PerturbedField(F, as_field(b))
                  for F, b in zip(base, bars)]
        rep = covariant_limit(M, p, *fields)
        devs.append(float(rep.value - ref.value))
        pred = 0.0
        for k, b in enumerate(bars):
            if b is None:
                continue
            args = list(vals)
            args[k] = field_value(as_field(b), M, p)
            pred += upsilon_restricted(M, p, *args)
        preds.append(float(pred))
    devs_a, preds_a = np.array(devs), np.array(preds)
    return PerturbationResult(tuple(devs), tuple(preds),
                              float(np.abs(devs_a).max(initial=0.0)),
                              float(np.abs(devs_a - preds_a).max(initial=0.0)))


# sectional -----------------------------------------------------------------

def _gram_x1(M, p, a, b):
    g = metric_at(M, p).g
    g1 = metric_at(M, p).dg[:, :, 0]
    aa, bb, ab = a @ g @ a, b @ g @ b, a @ g @ b
    return float((a @ g1 @ a) * bb + aa * (b @ g1 @ b) - 2 * ab * (a @ g1 @ b))


def sectional_limit(M: AdaptedMetric, p_sigma, A, B, eps=EPS_SCHEDULE,
                    two_sided: bool = False) -> LimitReport:
    """Classify the sectional curvature of the plane A^B approaching the hypersurface."""
    p = sigma_point(M, p_sigma)
    A, B = as_field(A), as_field(B)
    a, b = field_value(A, M, p), field_value(B, M, p)
    det = _gram(M, p, a, b)
    scale = float(np.dot(a, a) * np.dot(b, b))
    gm = g_m_value(M, p)
    qid = f"sec:{_name(A)},{_name(B)}"

    def sample(x1):
        q = _along(M, p, x1)
        return sectional_offsigma(M, q, field_value(A, M, q), field_value(B, M, q))

    probe = run_probe(sample, eps, two_sided)
    ups = upsilon_restricted(M, p, a, b, a, b)
    details = {"gram_det": det, "upsilon": ups}
    if abs(det) >= RANK_TOL * scale:
        details["rank"] = 2
        slots = max(abs(upsilon_restricted(M, p, e, b, a, b)) for e in _frame_vectors(M, p))
        slots = max(slots, max(abs(upsilon_restricted(M, p, a, e, a, b))
                               for e in _frame_vectors(M, p)))
        details["max_slot_contraction"] = slots
        bounded = abs(ups) < UPSILON_TOL
        theorem = {"tag": "sectional-rank2", "bounded": bounded,
                   "order": None if bounded else -1,
                   "well_defined": bounded and slots < UPSILON_TOL}
        if not bounded:
            return LimitReport(qid, "divergent", None, -1, ups / (gm * det), theorem, probe, details)
        num = covariant_limit(M, p, A, B, A, B).value
        cls = "finite" if slots < UPSILON_TOL else "extension_dependent"
        return LimitReport(qid, cls, num / det, None, None, theorem, probe, details)

    # rank 1: the plane contains the radical and det = k tau along the line
    details["rank"] = 1
    ddet = _gram_x1(M, p, a, b)
    details["k"] = ddet / gm
    nu_a, nu_b = float(a[0]), float(b[0])
    if abs(nu_a) > RANK_TOL or abs(nu_b) > RANK_TOL:
        theorem = {"tag": "sectional-rank1", "bounded": False, "order": -2,
                   "well_defined": False}
        return LimitReport(qid, "divergent", None, -2, ups / (gm * ddet), theorem, probe, details)
    num = covariant_limit(M, p, A, B, A, B).value
    details["numerator_limit"] = num
    if abs(num) > UPSILON_TOL:
        theorem = {"tag": "sectional-rank1", "bounded": False, "order": -1,
                   "well_defined": False}
        return LimitReport(qid, "divergent", None, -1, num / ddet, theorem, probe, details)
    theorem = {"tag": "sectional-rank1", "bounded": True, "order": None,
               "well_defined": False}
    return LimitReport(qid, "extension_dependent", None, None, None, theorem, probe, details)


def rank1_sectional_shift(M: AdaptedMetric, p_sigma, V, f: float = 1.0):
    """Shift of lim K between the extensions V and V + tau f N of the plane V^R.

    Returns ``(measured, predicted)``; the prediction is
    (2 f <R(N,R)V,R> + f^2 Upsilon(N,R,N,R)) / k with det = k tau.
    """
    p = sigma_point(M, p_sigma)
    V = as_field(V)
    N = CoordinateField(1)
    R = CoordinateField(M.m)
    Vp = PerturbedField(V, ConstantField(tuple(f if i == 0 else 0.0 for i in range(M.m))))

    def diff(x1):
        q = _along(M, p, x1)
        r = field_value(R, M, q)
        return (sectional_offsigma(M, q, field_value(Vp, M, q), r)
                - sectional_offsigma(M, q, field_value(V, M, q), r))

    measured, _ = richardson_limit(diff)
    v = field_value(V, M, p)
    n = np.eye(M.m)[0]
    r = np.eye(M.m)[M.m - 1]
    k = _gram_x1(M, p, v, r) / g_m_value(M, p)
    cross = covariant_limit(M, p, N, R, V, R).value
    predicted = (2 * f * cross + f * f * upsilon_restricted(M, p, n, r, n, r)) / k
    return measured, predicted


# Ricci ---------------------------------------------------------------------

RICCI_TAGS = ("NN", "NV", "NR", "RV", "RR", "VW")


def _ricci_fields(M, tag, V=None, W=None, N=None, R=None):
    V = as_field(V) if V is not None else ScreenField(2)
    W = as_field(W) if W is not None else V
    N = as_field(N) if N is not None else CoordinateField(1)
    R = as_field(R) if R is not None else CoordinateField(M.m)
    pick = {"N": N, "R": R, "V": V, "W": W}
    return pick[tag[0]], pick[tag[1]]


def _bar(M, p, F):
    """Normal derivative of an extension divided by d1 tau: F = F|S + tau * bar + ..."""
    js = as_field(F).jets(M, p)
    return np.array([j.partial(1) for j in js]) / g_m_value(M, p)


def ricci_prediction(M: AdaptedMetric, p_sigma, tag: str, A, B) -> dict:
    """Boundedness predicted from the hypersurface data for one Ricci tag.

    ``bounded`` is None where the tag's hypotheses (II-flatness) fail.
    """
    p = sigma_point(M, p_sigma)
    m = M.m
    gm = g_m_value(M, p)
    if tag == "NN":
        n = np.eye(m)[0]
        r = np.eye(m)[m - 1]
        return {"tag": "NN", "bounded": False, "order": -2,
                "coefficient": upsilon_restricted(M, p, n, r, n, r) / gm**2}
    if tag == "NV":
        v, dv = field_data(B, M, p)
        bracket = -dv[:, m - 1]  # [V, d_m] for constant R
        c = rho_form(M, p, bracket) + float(metric_at(M, p).g[0] @ _bar(M, p, B))
        bounded = abs(c) < UPSILON_TOL
        return {"tag": "NV", "bounded": bounded, "order": None if bounded else -1,
                "obstruction": c}
    if tag == "RV":
        return {"tag": "RV", "bounded": True, "order": None}
    if tag == "RR":
        return {"tag": "RR", "bounded": False, "order": -1}
    ii_flat = probe_flatness(M).ii_flat
    if tag == "NR":
        if not ii_flat:
            return {"tag": "NR", "bounded": None, "order": None}
        c = float(metric_at(M, p).g[0] @ _bar(M, p, B))
        bounded = abs(c) < UPSILON_TOL
        return {"tag": "NR", "bounded": bounded, "order": None if bounded else -1,
                "obstruction": c}
    if tag == "VW":
        if not ii_flat:
            return {"tag": "VW", "bounded": None, "order": None}
        h = H_form(M, p, field_value(A, M, p), field_value(B, M, p))
        bounded = abs(h) < UPSILON_TOL
        return {"tag": "VW", "bounded": bounded, "order": None if bounded else -1,
                "obstruction": h}
    raise ValueError(f"unknown Ricci tag {tag!r}")


def ricci_limit(M: AdaptedMetric, p_sigma, tag: str, V=None, W=None, N=None, R=None,
                eps=EPS_SCHEDULE, two_sided: bool = False) -> LimitReport:
    """Classify Ric(A, B) as x1 -> 0 for a frame tag such as ``NN`` or ``VW``."""
    if tag not in RICCI_TAGS:
        raise ValueError(f"unknown Ricci tag {tag!r}; expected one of {RICCI_TAGS}")
    p = sigma_point(M, p_sigma)
    A, B = _ricci_fields(M, tag, V, W, N, R)

    def sample(x1):
        q = _along(M, p, x1)
        return ricci_offsigma(M, q, field_value(A, M, q), field_value(B, M, q))

    probe = run_probe(sample, eps, two_sided)
    theorem = ricci_prediction(M, p, tag, A, B)
    qid = f"ric:{tag}"
    pred = theorem.get("bounded")
    bounded = probe.bounded if pred is None else pred
    if not bounded:
        order = theorem.get("order") or probe.order
        coef = theorem.get("coefficient")
        if coef is None and order is not None:
            coef = leading_coefficient(probe.eps, probe.values, order)
        return LimitReport(qid, "divergent", None, order, coef, theorem, probe)
    value, err = richardson_limit(sample)
    # Ricci of the ambient metric never defines a tensor on the hypersurface:
    # the finite value belongs to the chosen extension
    return LimitReport(qid, "finite", value, None, None, theorem, probe,
                       {"extrapolation_error": err})


def ricci_shift(M: AdaptedMetric, p_sigma, tag: str, base: dict, perturbed: dict) -> float:
    """Difference of finite Ricci limits between two choices of extensions."""
    p = sigma_point(M, p_sigma)
    A0, B0 = _ricci_fields(M, tag, **base)
    A1, B1 = _ricci_fields(M, tag, **perturbed)

    def diff(x1):
        q = _along(M, p, x1)
        return (ricci_offsigma(M, q, field_value(A1, M, q), field_value(B1, M, q))
                - ricci_offsigma(M, q, field_value(A0, M, q), field_value(B0, M, q)))

    return richardson_limit(diff)[0]


# cross-checks --------------------------------------------------------------

@dataclass(frozen=True)
class GaussCheck:
    lhs: float
    rhs: float
    defect: float


def gauss_check(M: AdaptedMetric, p_sigma, X, Y, Z, T) -> GaussCheck:
    """Curvature of the tangential connection against the ambient limit minus H terms."""
    from .connections import ConnectionOnSigma, connection_curvature

    p = sigma_point(M, p_sigma)
    conn = ConnectionOnSigma(M, "tangential")
    lhs = connection_curvature(M, conn, p, X, Y, Z, T)
    rep = covariant_limit(M, p, X, Y, Z, T)
    if rep.value is None:
        raise PreconditionError("ambient curvature diverges for this quadruple")
    x, y, z, t = (field_value(as_field(F), M, p) for F in (X, Y, Z, T))
    hh = H_form(M, p, x, z) * H_form(M, p, y, t) - H_form(M, p, y, z) * H_form(M, p, x, t)
    rhs = float(rep.value - hh)
    return GaussCheck(lhs, rhs, abs(lhs - rhs))


def convention_check(M: AdaptedMetric | None = None, x1: float = 1e-2) -> int:
    """Sign relating tau <R(N,R)N,R> off the hypersurface to Upsilon(N,R,N,R) on it.

    Returns +1 when the bulk curvature convention agrees with the
    restricted determinant.
    """
    M = M or builtin("flat")
    m = M.m
    n, r = np.eye(m)[0], np.eye(m)[m - 1]
    p = np.zeros(m)
    restricted = upsilon_restricted(M, p, n, r, n, r)
    p[0] = x1
    bulk = upsilon_bulk(M, p, n, r, n, r)
    return int(np.sign(bulk) * np.sign(restricted))


def frame_quadruples(M: AdaptedMetric):
    """All ordered quadruples of frame field names."""
    from .fields import frame_fields

    names = list(frame_fields(M))
    return list(product(names, repeat=4))
