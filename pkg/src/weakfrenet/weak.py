"""Refinement limits: weak tantrix, weak binormal, weak normal.

Inscribed polygonal sequences with shrinking modulus are built level by
level; the indicatrices of the levels, reparameterized to constant speed on
a common domain, are compared on a fixed grid.  The returned limit object is
the finest level's curve together with the observed Cauchy gap.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .curves import Inscription, inscribe
from .errors import (
    AmbiguousReturnPoint,
    DegeneratePolygonal,
    NotConverged,
    UnboundedVariationWarning,
    ZeroTorsion,
)
from .polygonal import (
    Polygonal3,
    binormal_indicatrix,
    discrete_frenet,
    normal_indicatrix,
    sanitize,
    tantrix,
)
from .sphere import (
    GeodesicPolyline,
    proj_distance,
    sphere_distance,
    unit,
)

DEFAULT_TOL = 1e-3
GRID = 1024


@dataclass(frozen=True)
class RefinementLevel:
    n_params: int
    inscription: Inscription
    polygonal: Polygonal3  # sanitized
    tc: float
    tat: float
    ct: float

    @property
    def mesh(self):
        return self.inscription.mesh

    @property
    def modulus(self):
        return self.inscription.modulus


@dataclass(frozen=True)
class RefinementSequence:
    curve: object
    levels: tuple

    @property
    def final(self):
        return self.levels[-1]

    def table(self):
        return [
            {
                "level": i,
                "segments": lv.n_params,
                "mesh": lv.mesh,
                "modulus": lv.modulus,
                "tc": lv.tc,
                "tat": lv.tat,
                "ct": lv.ct,
            }
            for i, lv in enumerate(self.levels)
        ]


def _level_params(curve, n, rng=None, parent=None):
    a, b = curve.domain
    if rng is None:
        return np.linspace(a, b, n + 1)
    # randomized nested refinement: keep the parent's params, split each cell
    # at a random interior point
    if parent is None:
        return np.linspace(a, b, n + 1)
    mids = parent[:-1] + np.diff(parent) * rng.uniform(0.35, 0.65, size=len(parent) - 1)
    return np.sort(np.concatenate([parent, mids]))


def refine(curve, levels, base_n, rng=None):
    """Inscribe `levels` nested polygonals with base_n * 2^h uniform cells
    (or randomized nested cells when rng is given) and tabulate TC/TAT/CT."""
    if levels < 2 or base_n < 4:
        raise ValueError("need levels >= 2 and base_n >= 4")
    out = []
    params = None
    for h in range(levels):
        n = base_n * 2**h
        params = _level_params(curve, n, rng=rng, parent=params)
        ins = inscribe(curve, params)
        P = sanitize(ins.polygonal)
        fr = discrete_frenet(P) if not P.return_points else None
        if fr is None:
            # return points block the discrete data; record lengths only
            out.append(RefinementLevel(n, ins, P, np.nan, np.nan, np.nan))
        else:
            out.append(RefinementLevel(n, ins, P, fr.tc, fr.tat, fr.ct))
    return RefinementSequence(curve=curve, levels=tuple(out))


def estimate_limit(values, meshes, n_use=5):
    """Limit estimate of a refinement sequence by least squares against
    1 + sqrt(mesh) + mesh.

    Inscribed totals converge like O(mesh) for curves with bounded curvature
    and like O(sqrt(mesh)) when the curvature blows up at an endpoint; the
    two-term model covers both.  Falls back to the last value when fewer
    than three levels are available.
    """
    values = np.asarray(values, dtype=float)
    meshes = np.asarray(meshes, dtype=float)
    good = np.isfinite(values) & np.isfinite(meshes)
    values, meshes = values[good], meshes[good]
    if values.size < 3:
        return float(values[-1]) if values.size else float("nan")
    v = values[-n_use:]
    m = meshes[-n_use:]
    basis = np.column_stack([np.ones_like(m), np.sqrt(m), m])
    coef, *_ = np.linalg.lstsq(basis, v, rcond=None)
    est = float(coef[0])
    # reject wild extrapolations (non-settling sequences)
    if not np.isfinite(est) or abs(est - v[-1]) > 10 * abs(v[-1] - v[0]) + 1e-12:
        return float(v[-1])
    return est


@dataclass(frozen=True)
class WeakIndicatrix:
    """Constant-speed limit curve of a refinement sequence.

    `curve` is the finest level's indicatrix (arc-length parameterized);
    eval_scaled maps any domain [0, total] onto it with constant speed.
    """

    curve: GeodesicPolyline
    total_length: float
    cauchy_gap: float
    level_lengths: tuple
    warning: str = ""

    @property
    def space(self):
        return self.curve.space

    def eval(self, s):
        return self.curve.eval(s)

    def eval_scaled(self, s, total):
        s = np.asarray(s, dtype=float)
        if total <= 0:
            raise ValueError("total must be positive")
        return self.curve.eval(s * (self.curve.total_length / total))


def _cauchy_gap(prev_curve, cur_curve, projective):
    s = np.linspace(0.0, 1.0, GRID)
    a = prev_curve.eval(s * prev_curve.total_length)
    b = cur_curve.eval(s * cur_curve.total_length)
    d = proj_distance(a, b) if projective else sphere_distance(a, b)
    return float(np.max(d))


def weak_binormal(seq, tol=DEFAULT_TOL):
    """Weak binormal: constant-speed limit of the binormal indicatrices."""
    curves = []
    for lv in seq.levels[-2:]:
        try:
            curves.append(binormal_indicatrix(lv.polygonal))
        except ZeroTorsion:
            curves.append(None)
    if curves[-1] is None or seq.final.tat < 1e-12:
        raise ZeroTorsion("final level has (numerically) zero total torsion")
    if curves[0] is None:
        raise NotConverged("previous level is planar; refine further")
    gap = _cauchy_gap(curves[0], curves[1], projective=True)
    if gap > tol:
        raise NotConverged(f"cauchy gap {gap:.3e} exceeds tol {tol:.1e}")
    return WeakIndicatrix(
        curve=curves[1],
        total_length=seq.final.tat,
        cauchy_gap=gap,
        level_lengths=tuple(lv.tat for lv in seq.levels),
    )


def _tantrix_with_policy(P, return_dir):
    """Tangent indicatrix that inserts a chosen half-great-circle at each
    point of return: the geodesic runs through the normalized component of
    return_dir orthogonal to the incoming tangent."""
    if not P.return_points:
        return tantrix(P)
    verts = P.vertices
    segs = P.segment_vectors()
    t = segs / np.linalg.norm(segs, axis=1)[:, None]
    pts = [t[0]]
    cum = [0.0]
    u = unit(np.asarray(return_dir, dtype=float))
    return_verts = set(P.return_points)
    for i in range(t.shape[0] - 1):
        # junction between segments i and i+1 sits at vertex i+1
        if (i + 1) in return_verts:
            w = u - np.dot(u, t[i]) * t[i]
            if np.linalg.norm(w) < 1e-9:
                raise AmbiguousReturnPoint(
                    "return direction is parallel to the tangent at a return point"
                )
            w = unit(w)
            pts.extend([w, t[i + 1]])
            cum.extend([cum[-1] + np.pi / 2, cum[-1] + np.pi])
        else:
            pts.append(t[i + 1])
            cum.append(cum[-1] + float(sphere_distance(t[i], t[i + 1])))
    return GeodesicPolyline(np.array(pts), "sphere", np.array(cum))


def weak_tantrix(seq, tol=DEFAULT_TOL, return_dir=None):
    """Weak tantrix: constant-speed limit of the tangent indicatrices.

    Inputs with points of return need an explicit geodesic-choice direction
    (Remark: the limit is unique only up to that choice).
    """
    curves = []
    for lv in seq.levels[-2:]:
        if lv.polygonal.return_points:
            if return_dir is None:
                raise AmbiguousReturnPoint(
                    "points of return present; pass return_dir to fix the geodesic"
                )
            curves.append(_tantrix_with_policy(lv.polygonal, return_dir))
        else:
            curves.append(tantrix(lv.polygonal))
    if curves[-1].total_length < 1e-12:
        raise DegeneratePolygonal("final level has zero total curvature")
    gap = _cauchy_gap(curves[0], curves[1], projective=False)
    if gap > tol:
        raise NotConverged(f"cauchy gap {gap:.3e} exceeds tol {tol:.1e}")
    return WeakIndicatrix(
        curve=curves[1],
        total_length=curves[1].total_length,
        cauchy_gap=gap,
        level_lengths=tuple(
            lv.tc if np.isfinite(lv.tc) else np.nan for lv in seq.levels
        ),
    )


def weak_normal(seq, tol=DEFAULT_TOL):
    """Weak normal: constant-speed limit of the normal indicatrices.

    Emits (with a warning recorded on the result) even when the complete
    torsion keeps growing across levels; a finite complete torsion is what
    guarantees a well-behaved limit, so the result is then unreliable.
    """
    curves = [normal_indicatrix(lv.polygonal) for lv in seq.levels[-2:]]
    if curves[-1].total_length <= 0:
        raise DegeneratePolygonal("TC + TAT vanishes at the final level")
    gap = _cauchy_gap(curves[0], curves[1], projective=True)
    if gap > tol:
        raise NotConverged(f"cauchy gap {gap:.3e} exceeds tol {tol:.1e}")
    warning = ""
    cts = [lv.ct for lv in seq.levels if np.isfinite(lv.ct)]
    if len(cts) >= 3:
        gaps = np.abs(np.diff(cts))
        if gaps[-1] > 1e-9 and gaps[-1] >= gaps[-2] >= 1e-9:
            warning = "complete torsion not settling; weak normal unreliable"
            warnings.warn(warning, UnboundedVariationWarning)
    return WeakIndicatrix(
        curve=curves[1],
        total_length=curves[1].total_length,
        cauchy_gap=gap,
        level_lengths=tuple(
            lv.tc + lv.tat if np.isfinite(lv.tc) else np.nan for lv in seq.levels
        ),
        warning=warning,
    )


# ---------------------------------------------------------------------------
# reparameterization identities for curves with an analytic frame
# ---------------------------------------------------------------------------


def cumulative_frame_integrals(curve, s_values):
    """(K(s), T(s)) with K = int k, T = int |tau| from the domain start,
    by adaptive quadrature of the analytic frame."""
    a, _ = curve.domain

    def kfun(x):
        return float(curve.frame(np.asarray(x))[3])

    def taufun(x):
        return float(np.abs(curve.frame(np.asarray(x))[4]))

    ks, ts = [], []
    prev_s, acc_k, acc_t = a, 0.0, 0.0
    for s in s_values:
        acc_k += quad(kfun, prev_s, s, limit=200)[0]
        acc_t += quad(taufun, prev_s, s, limit=200)[0]
        prev_s = s
        ks.append(acc_k)
        ts.append(acc_t)
    return np.array(ks), np.array(ts)


@dataclass(frozen=True)
class IdentityReport:
    """Max deviations of the three reparameterization identities on a grid."""

    binormal_dev: float
    tantrix_dev: float
    normal_dev: float
    tol: float

    @property
    def passed(self):
        devs = [self.binormal_dev, self.tantrix_dev, self.normal_dev]
        return all(np.isnan(d) or d < self.tol for d in devs)

    def as_dict(self):
        def _clean(x):
            return None if np.isnan(x) else float(x)

        return {
            "binormal_dev": _clean(self.binormal_dev),
            "tantrix_dev": _clean(self.tantrix_dev),
            "normal_dev": _clean(self.normal_dev),
            "tol": self.tol,
            "passed": bool(self.passed),
        }


def verify_reparam_identities(curve, seq, n_grid=64, tol=1e-2, return_dir=None):
    """Check b_c(t(s)) = [b(s)], t_c(k(s)) = t(s), n_c(rho(s)) = [n(s)] on an
    interior s-grid, with t, k, rho the cumulative |tau|, k, k + |tau|."""
    if not curve.has_frame:
        raise ValueError("identities need an analytic frame")
    a, b = curve.domain
    pad = (b - a) * 1e-3
    s_grid = np.linspace(a + pad, b - pad, n_grid)
    K, T = cumulative_frame_integrals(curve, s_grid)
    # constant-speed matching needs the whole-domain totals, not the values
    # at the padded grid end
    K_total, T_total = (
        float(x[-1]) for x in cumulative_frame_integrals(curve, [b])
    )
    t_ana, n_ana, b_ana, _, tau_ana = curve.frame(s_grid)

    tantrix_dev = binormal_dev = normal_dev = float("nan")

    t_c = weak_tantrix(seq, tol=np.inf, return_dir=return_dir)
    pts = t_c.eval_scaled(K, max(K_total, 1e-300))
    tantrix_dev = float(np.max(sphere_distance(pts, t_ana)))

    if np.max(np.abs(tau_ana)) > 1e-12:
        try:
            b_c = weak_binormal(seq, tol=np.inf)
            pts = b_c.eval_scaled(T, max(T_total, 1e-300))
            binormal_dev = float(np.max(proj_distance(pts, b_ana)))
        except ZeroTorsion:
            pass

    n_c = weak_normal(seq, tol=np.inf)
    pts = n_c.eval_scaled(K + T, max(K_total + T_total, 1e-300))
    normal_dev = float(np.max(proj_distance(pts, n_ana)))

    return IdentityReport(
        binormal_dev=binormal_dev,
        tantrix_dev=tantrix_dev,
        normal_dev=normal_dev,
        tol=tol,
    )
