"""Named numerical checks of the hypersurface theory on one model.

Each suite returns a list of :class:`Check` records (name, measured
defect, tolerance, pass flag).  Random points and fields come from a
seeded generator, so a run is reproducible from ``(model, suite, seed)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from itertools import product

import numpy as np

from . import limits as L
from .connections import (ConnectionOnSigma, connection_curvature, random_admissible,
                          screen_connection, torsion)
from .dual import _inner_jet, koszul, lhopital_limit, nabla_limit, nabla_offsigma, Divergent
from .expr import eval_value, parse_expr
from .fields import (
    ConstantField,
    CoordinateField,
    PerturbedField,
    ScaledField,
    ScreenField,
    field_data,
    field_value,
    frame_fields,
)
from .metric import AdaptedMetric, VectorFieldSpec, g_m_value, metric_at
from .sigma import (
    H_form,
    II_form,
    d_rho,
    decompose,
    probe_flatness,
    reassemble,
    rho_form,
    screen_frame,
    third_form,
)

SUITES = ("frames", "connections", "curvature")


@dataclass(frozen=True)
class Check:
    name: str
    defect: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _check(name, defect, tol) -> Check:
    defect = float(defect)
    return Check(name, defect, tol, bool(np.isfinite(defect) and defect < tol))


# random inputs ----------------------------------------------------------------

def random_sigma_points(M: AdaptedMetric, rng, n: int, margin: float = 0.1) -> list[np.ndarray]:
    """Hypersurface points drawn uniformly from the box shrunk by ``margin`` per side."""
    pts = []
    for _ in range(n):
        p = np.zeros(M.m)
        for k, (lo, hi) in enumerate(M.sigma_box, start=1):
            w = hi - lo
            p[k] = rng.uniform(lo + margin * w, hi - margin * w)
        pts.append(p)
    return pts


def _poly(rng, labels, scale=0.5) -> str:
    c = [float(v) for v in rng.uniform(-scale, scale, size=1 + 2 * len(labels))]
    terms = [repr(c[0])]
    for k, lab in enumerate(labels):
        terms.append(f"({c[1 + k]!r})*x{lab}")
        terms.append(f"({c[1 + len(labels) + k]!r})*x{lab}^2")
    return " + ".join(terms)


def random_tangent_field(M: AdaptedMetric, rng, name="X") -> VectorFieldSpec:
    """Canonical tangent field with random quadratic coefficients in x2..xm."""
    labels = range(2, M.m + 1)
    comps = ["0"] + [_poly(rng, labels) for _ in labels]
    return VectorFieldSpec.parse(comps, M.m, canonical=True, name=name)


def random_field(M: AdaptedMetric, rng, name="A") -> VectorFieldSpec:
    """General field with coefficients depending on all coordinates."""
    labels = range(1, M.m + 1)
    return VectorFieldSpec.parse([_poly(rng, labels) for _ in labels], M.m, name=name)


def random_screen_field(M: AdaptedMetric, rng):
    """Screen field sum_l f_l V_l with random scalar coefficients."""
    from .fields import LinearCombination

    parts = []
    for lam in range(2, M.m):
        f = parse_expr("1 + " + _poly(rng, range(2, M.m + 1)), M.m)
        parts.append((1.0, ScaledField(f, ScreenField(lam))))
    return LinearCombination(tuple(parts))


def random_vanishing_scalar(M: AdaptedMetric, rng):
    """Scalar expression vanishing on the hypersurface: x1 times a random polynomial."""
    labels = range(1, M.m + 1)
    return parse_expr(f"x1*({_poly(rng, labels, 1.0)}) + x1^2*({_poly(rng, labels, 1.0)})", M.m)


def _tangent_fields(M, rng):
    """Coordinate tangent fields plus one screen field and one random tangent field."""
    return ([CoordinateField(k) for k in range(2, M.m + 1)]
            + [ScreenField(2), random_tangent_field(M, rng)])


def _directional(M, p, x, Y, Z) -> float:
    """x applied to the function <Y, Z> at p."""
    mj = metric_at(M, p)
    jet = _inner_jet(mj, Y.jets(M, p), Z.jets(M, p))
    return float(jet.gradient() @ x)


def _inner(M, p, a, b) -> float:
    return float(a @ metric_at(M, p).g @ b)


# frames -----------------------------------------------------------------------

def suite_frames(M: AdaptedMetric, rng, n_points: int = 20) -> list[Check]:
    pts = random_sigma_points(M, rng, n_points)
    m = M.m
    d = dict.fromkeys(("NN", "IINN", "HRR", "IINR", "IIXR", "orth", "sym", "reasm",
                       "nablaRR", "III", "drho", "metric", "torsion", "compat", "lhop"), 0.0)
    ii_flat = probe_flatness(M).ii_flat
    for p in pts:
        fr = screen_frame(M, p)
        N, R = fr.N, fr.R
        d["NN"] = max(d["NN"], abs(_inner(M, p, N, N) - 1.0))
        d["IINN"] = max(d["IINN"], abs(II_form(M, p, N, N)))
        d["HRR"] = max(d["HRR"], abs(H_form(M, p, R, R) + 1.0))
        d["IINR"] = max(d["IINR"], abs(II_form(M, p, N, R) - 1.0))
        for x in fr.tangent_basis:
            d["IIXR"] = max(d["IIXR"], abs(II_form(M, p, x, R)))
        V = np.array(fr.screen_basis)
        gram = V @ metric_at(M, p).g @ V.T
        orth = np.abs(gram - np.eye(m - 2)).max()
        orth = max(orth, max(abs(H_form(M, p, v, R)) + abs(_inner(M, p, v, N)) for v in V))
        d["orth"] = max(d["orth"], orth)
        d["sym"] = max(d["sym"], np.abs(fr.H_matrix - fr.H_matrix.T).max(),
                       np.abs(fr.II_matrix - fr.II_matrix.T).max())
        for a in rng.normal(size=(50 // n_points + 1, m)):
            d["reasm"] = max(d["reasm"], np.abs(reassemble(fr, decompose(M, p, a)) - a).max())
        lim = nabla_limit(M, p, CoordinateField(m), CoordinateField(m))
        d["nablaRR"] = max(d["nablaRR"], np.abs(np.asarray(lim) + N).max()
                           if not isinstance(lim, Divergent) else np.inf)
        X, Y = random_tangent_field(M, rng, "X"), random_tangent_field(M, rng, "Y")
        if ii_flat:
            for Z in fr.screen_basis:
                d["III"] = max(d["III"], abs(third_form(M, p, X, Y, ConstantField(tuple(Z)))))
        S1, S2 = random_screen_field(M, rng), random_screen_field(M, rng)
        x, dx = field_data(S1, M, p)
        y, dy = field_data(S2, M, p)
        br = dy @ x - dx @ y
        d["drho"] = max(d["drho"], abs(d_rho(M, p, S1, S2) + rho_form(M, p, br)))
        # dual connection identities at points near the hypersurface
        q = p.copy()
        q[0] = 0.8 * rng.uniform(*M.box[0])
        A, B, C = (random_field(M, rng, n) for n in "ABC")
        a = field_value(A, M, q)
        lhs = koszul(M, q, A, B, C) + koszul(M, q, A, C, B)
        d["metric"] = max(d["metric"], abs(lhs - _directional(M, q, a, B, C)))
        Ad, Bd = field_data(A, M, q), field_data(B, M, q)
        brab = Bd[1] @ Ad[0] - Ad[1] @ Bd[0]
        tor = koszul(M, q, A, B, C) - koszul(M, q, B, A, C) - _inner(M, q, brab, field_value(C, M, q))
        d["torsion"] = max(d["torsion"], abs(tor))
        if q[0] != 0.0:
            nab = nabla_offsigma(M, q, A, B)
            d["compat"] = max(d["compat"], abs(_inner(M, q, nab, field_value(C, M, q))
                                                - koszul(M, q, A, B, C)))
        f = random_vanishing_scalar(M, rng)
        exact = lhopital_limit(M, p, f)

        def ratio(h, f=f, p=p):
            r = p.copy()
            r[0] = h
            return eval_value(f, r) / metric_at(M, r).g[m - 1, m - 1]

        d["lhop"] = max(d["lhop"], abs(exact - L.richardson_limit(ratio)[0]))
    checks = [
        _check("frame.normal_unit", d["NN"], 1e-10),
        _check("frame.II_NN_zero", d["IINN"], 1e-10),
        _check("frame.H_RR_minus_one", d["HRR"], 1e-10),
        _check("frame.II_NR_one", d["IINR"], 1e-10),
        _check("frame.II_tangent_R_zero", d["IIXR"], 1e-10),
        _check("frame.screen_orthonormal", d["orth"], 1e-10),
        _check("frame.forms_symmetric", d["sym"], 1e-12),
        _check("frame.decompose_reassemble", d["reasm"], 1e-10),
        _check("frame.nabla_RR_minus_N", d["nablaRR"], 1e-8),
        _check("frame.drho_screen_bracket", d["drho"], 1e-8),
        _check("dual.metric", d["metric"], 1e-9),
        _check("dual.torsion_free", d["torsion"], 1e-9),
        _check("dual.levi_civita_compatible", d["compat"], 1e-9),
        _check("dual.lhopital_vs_extrapolation", d["lhop"], 1e-6),
    ]
    if ii_flat:
        checks.append(_check("frame.III_screen_zero", d["III"], 1e-8))
    return checks


# connections ------------------------------------------------------------------

def suite_connections(M: AdaptedMetric, rng, n_points: int = 5) -> list[Check]:
    m = M.m
    ii_flat = probe_flatness(M).ii_flat
    pts = random_sigma_points(M, rng, n_points, margin=0.15)
    screen = ConnectionOnSigma(M, "screen_op")
    main = ConnectionOnSigma(M, "main")
    madm = ConnectionOnSigma(M, "main_admissible")
    sig1, sig2 = random_admissible(m, rng), random_admissible(m, rng)
    adm1 = ConnectionOnSigma(M, "admissible", sig1)
    adm2 = ConnectionOnSigma(M, "admissible", sig2)
    tang = ConnectionOnSigma(M, "tangential") if ii_flat else None
    d = dict.fromkeys(("smetric", "scompat", "mmetric", "mtor", "atorsion", "ttor", "tmetric",
                       "troute", "antisym", "adm"), 0.0)
    for p in pts:
        X, Y, Z, T = (random_tangent_field(M, rng, n) for n in "XYZT")
        x, y, z, t = (field_value(F, M, p) for F in (X, Y, Z, T))
        Sv, Sw = random_screen_field(M, rng), random_screen_field(M, rng)
        v, w = field_value(Sv, M, p), field_value(Sw, M, p)
        dv, dw = screen(p, X, Sv), screen(p, X, Sw)
        d["smetric"] = max(d["smetric"], abs(_inner(M, p, dv, w) + _inner(M, p, v, dw)
                                             - _directional(M, p, x, Sv, Sw)))
        A = random_field(M, rng, "A")
        d["scompat"] = max(d["scompat"], abs(_inner(M, p, screen_connection(M, p, X, A), v)
                                             - koszul(M, p, X, A, Sv)))
        defect = (_directional(M, p, x, Y, Z) - _inner(M, p, main(p, X, Y), z)
                  - _inner(M, p, y, main(p, X, Z)))
        expected = 0.0 if ii_flat else II_form(M, p, x, rho_form(M, p, y) * z + rho_form(M, p, z) * y)
        d["mmetric"] = max(d["mmetric"], abs(defect - expected))
        R = np.eye(m)[m - 1]
        d["mtor"] = max(d["mtor"], np.abs(torsion(M, main, p, X, Y) - d_rho(M, p, X, Y) * R).max())
        for conn in (madm, adm1):
            d["atorsion"] = max(d["atorsion"], np.abs(torsion(M, conn, p, X, Y)).max())
        ca = connection_curvature(M, adm1, p, X, Y, Z, T)
        cb = connection_curvature(M, adm1, p, Y, X, Z, T)
        d["antisym"] = max(d["antisym"], abs(ca + cb))
        c2 = connection_curvature(M, adm2, p, X, Y, Z, T)
        cm = connection_curvature(M, madm, p, X, Y, Z, T)
        for sg, cs in ((sig1, ca), (sig2, c2)):
            corr = -sg(p, y, z) * II_form(M, p, x, t) + sg(p, x, z) * II_form(M, p, y, t)
            d["adm"] = max(d["adm"], abs((cs - cm) - corr))
        if tang is not None:
            d["ttor"] = max(d["ttor"], np.abs(torsion(M, tang, p, X, Y)).max())
            tm = (_directional(M, p, x, Y, Z) - _inner(M, p, tang(p, X, Y), z)
                  - _inner(M, p, y, tang(p, X, Z)))
            d["tmetric"] = max(d["tmetric"], abs(tm))
            lim = nabla_limit(M, p, X, Y)
            route = np.asarray(lim).copy()
            route[0] = 0.0
            d["troute"] = max(d["troute"], np.abs(route - tang(p, X, Y)).max())
    checks = [
        _check("screen.metric", d["smetric"], 1e-8),
        _check("screen.compatible_with_dual", d["scompat"], 1e-9),
        _check("main.metric_defect", d["mmetric"], 1e-8),
        _check("main.torsion_is_drho_R", d["mtor"], 1e-8),
        _check("admissible.torsion_free", d["atorsion"], 1e-8),
        _check("admissible.curvature_antisymmetric", d["antisym"], 1e-6),
        _check("admissible.curvature_offset_correction", d["adm"], 1e-6),
    ]
    if tang is not None:
        checks += [
            _check("tangential.torsion_free", d["ttor"], 1e-8),
            _check("tangential.metric", d["tmetric"], 1e-8),
            _check("tangential.matches_levi_civita_limit", d["troute"], 1e-8),
        ]
    return checks


# curvature --------------------------------------------------------------------

def suite_curvature(M: AdaptedMetric, rng, n_points: int = 10) -> list[Check]:
    m = M.m
    fl = probe_flatness(M)
    pts = random_sigma_points(M, rng, n_points, margin=0.15)
    ff = frame_fields(M)
    names = list(ff)
    d = dict.fromkeys(("anchor", "sym", "route", "remark", "gauss", "pert", "rank1"), 0.0)
    mismatches = 0
    ric_bad = 0
    for i, p in enumerate(pts):
        fr = screen_frame(M, p)
        basis = fr.full_basis
        d["anchor"] = max(d["anchor"], abs(L.upsilon_restricted(M, p, fr.N, fr.R, fr.N, fr.R) + 1))
        # symmetries of the restricted and bulk tensors on random vectors
        a, b, c, e = rng.normal(size=(4, m))
        q = p.copy()
        q[0] = 0.05
        for f in (lambda *v: L.upsilon_restricted(M, p, *v), lambda *v: L.upsilon_bulk(M, q, *v)):
            u = f(a, b, c, e)
            d["sym"] = max(d["sym"], abs(u + f(b, a, c, e)), abs(u + f(a, b, e, c)),
                           abs(u - f(c, e, a, b)))
        # route agreement: extrapolated bulk tensor versus restricted determinant
        B = np.array(basis)

        def bulk(h, p=p, B=B):
            r = p.copy()
            r[0] = h
            return np.einsum("abcd,ia,jb,kc,ld->ijkl", L.upsilon_tensor(M, r), B, B, B, B)

        lim, _ = L.richardson_limit(bulk)
        II = fr.II_matrix
        restricted = (np.einsum("ik,jl->ijkl", II, II) - np.einsum("il,jk->ijkl", II, II))
        d["route"] = max(d["route"], np.abs(lim - restricted).max())
        if i < 2:
            for quad in L.frame_quadruples(M):
                rep = L.covariant_limit(M, p, *(ff[k] for k in quad))
                ups = abs(rep.details["upsilon"])
                if rep.probe.bounded != (ups < L.UPSILON_TOL):
                    mismatches += 1
        N, R = ff["N"], ff["R"]
        remark = 0.0
        for V in [ff[k] for k in names[1:-1]]:
            for W in [ff[k] for k in names[1:-1]] + [R]:
                rep = L.covariant_limit(M, p, N, V, N, W)
                remark += 0 if rep.probe.bounded else 1
        rep = L.covariant_limit(M, p, N, R, N, R)
        remark += 0 if rep.classification == "divergent" and rep.probe.order == -1 else 1
        d["remark"] = max(d["remark"], remark)
        if fl.ii_flat and i < 5:
            X, Y, Z, T = (random_tangent_field(M, rng, n) for n in "XYZT")
            d["gauss"] = max(d["gauss"], L.gauss_check(M, p, X, Y, Z, T).defect)
            d["gauss"] = max(d["gauss"], L.gauss_check(M, p, ScreenField(2), R, ScreenField(2), Y).defect)
        if i < 3:
            quad = (ScreenField(2), R, ScreenField(2), R)
            bars = [tuple(random_field(M, rng, f"B{k}") if rng.random() < 0.5 else None
                          for k in range(4)) for _ in range(2)]
            bars.append((None, None, None, None))
            res = L.perturbation_check(M, p, quad, bars)
            d["pert"] = max(d["pert"], res.max_mismatch)
            meas, pred = L.rank1_sectional_shift(M, p, ScreenField(2), float(rng.uniform(0.5, 1.5)))
            d["rank1"] = max(d["rank1"], abs(meas - pred))
        if i < 3:
            for tag in L.RICCI_TAGS:
                if not L.ricci_limit(M, p, tag).agrees:
                    ric_bad += 1
    checks = [
        _check("curvature.sign_convention", abs(L.convention_check() - 1), 0.5),
        _check("upsilon.NRNR_minus_one", d["anchor"], 1e-10),
        _check("upsilon.symmetries", d["sym"], 1e-9),
        _check("upsilon.bulk_limit_matches_restricted", d["route"], 1e-6),
        _check("covariant.extends_iff_upsilon_zero", mismatches, 0.5),
        _check("covariant.remark_NVNW_bounded_NRNR_divergent", d["remark"], 0.5),
        _check("covariant.perturbation_defect", d["pert"], 1e-6),
        _check("sectional.rank1_shift_predicted", d["rank1"], 1e-6),
        _check("ricci.theorem_matches_probe", ric_bad, 0.5),
    ]
    p0 = pts[0]
    sec = [L.sectional_limit(M, p0, ff[a], ff[b]) for a, b in (("N", "R"), ("N", "V2"))]
    checks.append(_check("sectional.NR_order_minus_two", abs(sec[0].probe.slope + 2), 0.05))
    checks.append(_check("sectional.NV_theorem_matches_probe", 0 if sec[1].agrees else 1, 0.5))
    if fl.ii_flat:
        checks.append(_check("gauss.formula", d["gauss"], 1e-6))
    if fl.iii_flat:
        shift = L.ricci_shift(M, p0, "VW", {}, {
            "V": PerturbedField(ScreenField(2), CoordinateField(1)),
            "W": PerturbedField(ScreenField(2), CoordinateField(1))})
        # nonzero shift: the finite Ricci limit depends on the extension
        checks.append(_check("ricci.VW_extension_dependent", 1.0 / max(abs(shift), 1e-300), 1e6))
    elif fl.ii_flat:
        rep = L.ricci_limit(M, p0, "VW")
        checks.append(_check("ricci.VW_diverges_without_III_flatness",
                             abs(rep.probe.slope + 1), 0.1))
    return checks


def run_suite(M: AdaptedMetric, suite: str = "all", seed: int = 0) -> list[Check]:
    """Run one suite (or ``all``) with a generator seeded per suite name."""
    names = SUITES if suite == "all" else (suite,)
    out = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}")
        rng = np.random.default_rng([seed, SUITES.index(name)])
        out.extend(globals()[f"suite_{name}"](M, rng))
    return out
