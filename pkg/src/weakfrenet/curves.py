"""Parametric curve sources with analytic Frenet data.

The two reference models are the helicoidal curve (constant curvature and
torsion) and a unit-speed curve with a genuine inflection point, where the
frame is produced by the first non-vanishing higher derivative.  Curves can
also be generated by integrating curvature/torsion profiles through the
Frenet-Serret system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BlowUp,
    DegeneratePolygonal,
    EvalOutOfDomain,
    FrameUndefined,
    UnknownModel,
)
from .polygonal import Polygonal3
from .sphere import unit

EPS_INFLECTION = 1e-8
MAX_DERIV_ORDER = 5


@dataclass
class ParamCurve:
    """Curve s -> R^3 on a closed interval, assumed unit-speed.

    position and the optional derivative/frame callables are vectorized over
    the last axis being the 3-vector.  frame(s) returns (t, n, b, k, tau).
    """

    name: str
    domain: tuple
    position: callable
    d1: callable = None
    d2: callable = None
    d3: callable = None
    frame: callable = None
    arclength: bool = True
    closed: bool = False  # geometrically closed loop (endpoints identified)
    cum_curvature: callable = None  # analytic cumulative integral of k, if known
    cum_abs_torsion: callable = None

    def eval(self, s):
        s = np.asarray(s, dtype=float)
        a, b = self.domain
        slack = 1e-9 * max(abs(a), abs(b), 1.0)
        if np.any(s < a - slack) or np.any(s > b + slack):
            raise EvalOutOfDomain(f"parameter outside [{a}, {b}]")
        return self.position(np.clip(s, a, b))

    @property
    def has_frame(self):
        return self.frame is not None


@dataclass(frozen=True)
class FrenetFrame:
    """Pointwise frame; inflection_order > 2 marks a generalized frame built
    from the first non-vanishing higher derivative."""

    t: np.ndarray
    n: np.ndarray
    b: np.ndarray
    k: float
    tau: float
    inflection_order: int = 2


def helix(R=1.0, K=2 * np.pi):
    """Helicoidal curve of radius R whose pitch over one turn is K, in
    arc-length parameterization on [-L/2, L/2] with L = 2*pi*v.

    Curvature and torsion are the constants R/v^2 and (K/2pi)/v^2, with
    v = sqrt(R^2 + (K/2pi)^2); their integrals are 2*pi*R/v and K/v.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    w = K / (2 * np.pi)
    v = float(np.hypot(R, w))
    L = 2 * np.pi * v

    def position(s):
        u = np.asarray(s, dtype=float) / v
        return np.stack([R * np.cos(u), R * np.sin(u), w * u], axis=-1)

    def d1(s):
        u = np.asarray(s, dtype=float) / v
        return np.stack(
            [-R / v * np.sin(u), R / v * np.cos(u), np.full_like(u, w / v)], axis=-1
        )

    def d2(s):
        u = np.asarray(s, dtype=float) / v
        z = np.zeros_like(u)
        return np.stack([-R / v**2 * np.cos(u), -R / v**2 * np.sin(u), z], axis=-1)

    def d3(s):
        u = np.asarray(s, dtype=float) / v
        z = np.zeros_like(u)
        return np.stack([R / v**3 * np.sin(u), -R / v**3 * np.cos(u), z], axis=-1)

    def frame(s):
        u = np.asarray(s, dtype=float) / v
        z = np.zeros_like(u)
        t = np.stack([-R / v * np.sin(u), R / v * np.cos(u), np.full_like(u, w / v)], axis=-1)
        n = np.stack([-np.cos(u), -np.sin(u), z], axis=-1)
        b = np.stack([w / v * np.sin(u), -w / v * np.cos(u), np.full_like(u, R / v)], axis=-1)
        k = np.full_like(u, R / v**2)
        tau = np.full_like(u, w / v**2)
        return t, n, b, k, tau

    kconst = R / v**2
    tauconst = abs(w) / v**2
    return ParamCurve(
        name="helix",
        domain=(-L / 2, L / 2),
        position=position,
        d1=d1,
        d2=d2,
        d3=d3,
        frame=frame,
        closed=(K == 0.0),
        cum_curvature=lambda s: kconst * (np.asarray(s, dtype=float) + L / 2),
        cum_abs_torsion=lambda s: tauconst * (np.asarray(s, dtype=float) + L / 2),
    )


def _quartic_arc_spline():
    """Spline of F(w) = int_{-pi/2}^{w} cos^2 sqrt(1+sin^2); then
    int_{-1}^{s} sqrt(1-l^4) dl = F(arcsin s).  The substituted integrand is
    analytic, so per-cell Gauss-Legendre plus a cubic spline is accurate to
    ~1e-13 and cheap to evaluate in bulk."""
    from scipy.interpolate import CubicSpline

    grid = np.linspace(-np.pi / 2, np.pi / 2, 4097)
    nodes, weights = np.polynomial.legendre.leggauss(12)
    mid = 0.5 * (grid[:-1] + grid[1:])
    half = 0.5 * (grid[1] - grid[0])
    w = mid[:, None] + half * nodes
    f = np.cos(w) ** 2 * np.sqrt(1.0 + np.sin(w) ** 2)
    cells = np.sum(f * weights, axis=1) * half
    vals = np.concatenate([[0.0], np.cumsum(cells)])
    return CubicSpline(grid, vals)


_QUARTIC_ARC = _quartic_arc_spline()


def inflection_curve():
    """Unit-speed curve on [-1, 1] with an order-3 inflection at s = 0.

    The derivative is (1, s^2, sqrt(1 - s^4))/sqrt(2); the position is its
    integral from s = -1.  Curvature sqrt(2)|s|/sqrt(1-s^4) and torsion
    -sqrt(2) s/sqrt(1-s^4) are integrable with TC = TAT = pi/sqrt(2).
    """
    r2 = np.sqrt(2.0)

    def zpart(s):
        s = np.asarray(s, dtype=float)
        return _QUARTIC_ARC(np.arcsin(np.clip(s, -1.0, 1.0)))

    def position(s):
        s = np.asarray(s, dtype=float)
        x = (s + 1.0) / r2
        y = (s**3 + 1.0) / (3.0 * r2)
        z = zpart(s) / r2
        return np.stack([x, y, z], axis=-1)

    def d1(s):
        s = np.asarray(s, dtype=float)
        root = np.sqrt(np.clip(1.0 - s**4, 0.0, None))
        return np.stack([np.ones_like(s), s**2, root], axis=-1) / r2

    def d2(s):
        s = np.asarray(s, dtype=float)
        root = np.sqrt(np.clip(1.0 - s**4, 1e-300, None))
        return np.stack([np.zeros_like(s), 2.0 * s, -2.0 * s**3 / root], axis=-1) / r2

    def d3(s):
        s = np.asarray(s, dtype=float)
        root = np.sqrt(np.clip(1.0 - s**4, 1e-300, None))
        return np.stack(
            [np.zeros_like(s), np.full_like(s, 2.0), -2.0 * s**2 * (3.0 - s**4) / root**3],
            axis=-1,
        ) / r2

    def frame(s):
        s = np.asarray(s, dtype=float)
        sg = np.where(s >= 0, 1.0, -1.0)
        quart = np.clip(1.0 - s**4, 0.0, None)
        root = np.sqrt(quart)
        t = np.stack([np.ones_like(s), s**2, root], axis=-1) / r2
        n = sg[..., None] * np.stack([np.zeros_like(s), root, -(s**2)], axis=-1)
        b = sg[..., None] * np.stack([-np.ones_like(s), s**2, root], axis=-1) / r2
        with np.errstate(divide="ignore"):
            k = np.where(root > 0, r2 * np.abs(s) / np.where(root > 0, root, 1.0), np.inf)
            tau = np.where(root > 0, -r2 * s / np.where(root > 0, root, 1.0), -sg * np.inf)
        return t, n, b, k, tau

    def cum_curvature(s):
        s = np.asarray(s, dtype=float)
        sg = np.where(s >= 0, 1.0, -1.0)
        return (np.pi / 2 + sg * np.arcsin(np.clip(s, -1, 1) ** 2)) / r2

    return ParamCurve(
        name="inflection",
        domain=(-1.0, 1.0),
        position=position,
        d1=d1,
        d2=d2,
        d3=d3,
        frame=frame,
        cum_curvature=cum_curvature,
        cum_abs_torsion=cum_curvature,  # |tau| = k for this curve
    )


def polyline_curve(P):
    """A polygonal as a unit-speed ParamCurve (fixed point of refinement)."""
    verts = P.vertices
    if P.closed:
        verts = np.vstack([verts, verts[:1]])
    lens = np.linalg.norm(np.diff(verts, axis=0), axis=1)
    if np.any(lens <= 0):
        raise DegeneratePolygonal("zero-length segment")
    knots = np.concatenate([[0.0], np.cumsum(lens)])

    def position(s):
        s = np.asarray(s, dtype=float)
        return np.stack([np.interp(s, knots, verts[:, k]) for k in range(3)], axis=-1)

    return ParamCurve(
        name="polyline",
        domain=(0.0, float(knots[-1])),
        position=position,
        closed=P.closed,
    )


# ---------------------------------------------------------------------------
# Frenet-Serret integration
# ---------------------------------------------------------------------------


def frenet_ode_curve(
    k_profile,
    tau_profile,
    domain,
    step=None,
    start=None,
    endpoint_tol=1e-8,
    max_halvings=10,
):
    """Generate a unit-speed curve by integrating dc = t together with the
    Frenet-Serret system for (t, n, b), classical RK4 with per-step
    Gram-Schmidt re-orthonormalization.

    With step=None the step is halved (from 256 steps) until the endpoint
    moves by less than endpoint_tol under one further halving.  Profiles must
    be finite on the closed domain; otherwise BlowUp is raised (truncate the
    domain below the singularity).
    """
    a, b = float(domain[0]), float(domain[1])
    if not (b > a):
        raise ValueError("empty domain")

    def finite_at(fn, x):
        try:
            return bool(np.isfinite(fn(x)))
        except (ZeroDivisionError, OverflowError):
            return False

    for sample in (a, b, 0.5 * (a + b)):
        if not (finite_at(k_profile, sample) and finite_at(tau_profile, sample)):
            raise BlowUp("profile is not finite on the domain; truncate it")

    if start is None:
        c0 = np.zeros(3)
        t0 = np.array([1.0, 0.0, 0.0])
        n0 = np.array([0.0, 1.0, 0.0])
        b0 = np.array([0.0, 0.0, 1.0])
    else:
        c0, t0, n0, b0 = (np.asarray(x, dtype=float) for x in start)

    if step is not None:
        return _integrate_frenet(k_profile, tau_profile, a, b, step, (c0, t0, n0, b0))

    n_steps = 256
    prev = _integrate_frenet(
        k_profile, tau_profile, a, b, (b - a) / n_steps, (c0, t0, n0, b0)
    )
    for _ in range(max_halvings):
        n_steps *= 2
        cur = _integrate_frenet(
            k_profile, tau_profile, a, b, (b - a) / n_steps, (c0, t0, n0, b0)
        )
        shift = float(np.linalg.norm(cur.position(b) - prev.position(b)))
        prev = cur
        if shift < endpoint_tol:
            return cur
    raise BlowUp("endpoint did not stabilize; profile may be too singular")


def _integrate_frenet(k_profile, tau_profile, a, b, step, start):
    n_steps = max(int(np.ceil((b - a) / step)), 1)
    h = (b - a) / n_steps
    c = list(map(float, start[0]))
    t = list(map(float, start[1]))
    n = list(map(float, start[2]))
    bb = list(map(float, start[3]))

    s_nodes = np.empty(n_steps + 1)
    c_nodes = np.empty((n_steps + 1, 3))
    t_nodes = np.empty((n_steps + 1, 3))
    n_nodes = np.empty((n_steps + 1, 3))
    b_nodes = np.empty((n_steps + 1, 3))
    s_nodes[0] = a
    c_nodes[0] = c
    t_nodes[0] = t
    n_nodes[0] = n
    b_nodes[0] = bb
    max_drift = 0.0

    def rhs(s, y):
        k = k_profile(s)
        tau = tau_profile(s)
        if not (np.isfinite(k) and np.isfinite(tau)):
            raise BlowUp(f"profile blew up at s = {s}")
        (cx, cy, cz, tx, ty, tz, nx, ny, nz, bx, by, bz) = y
        return (
            tx, ty, tz,
            k * nx, k * ny, k * nz,
            -k * tx + tau * bx, -k * ty + tau * by, -k * tz + tau * bz,
            -tau * nx, -tau * ny, -tau * nz,
        )

    y = (*c, *t, *n, *bb)
    s = a
    for i in range(1, n_steps + 1):
        k1 = rhs(s, y)
        y2 = tuple(y[j] + 0.5 * h * k1[j] for j in range(12))
        k2 = rhs(s + 0.5 * h, y2)
        y3 = tuple(y[j] + 0.5 * h * k2[j] for j in range(12))
        k3 = rhs(s + 0.5 * h, y3)
        y4 = tuple(y[j] + h * k3[j] for j in range(12))
        k4 = rhs(s + h, y4)
        y = tuple(
            y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            for j in range(12)
        )
        s = a + i * h

        # Gram-Schmidt: orthonormality of (t, n, b) is the structural
        # invariant of the system and must not drift
        tx, ty, tz = y[3], y[4], y[5]
        tn = (tx * tx + ty * ty + tz * tz) ** 0.5
        drift = abs(tn - 1.0)
        tx, ty, tz = tx / tn, ty / tn, tz / tn
        nx, ny, nz = y[6], y[7], y[8]
        dot_tn = tx * nx + ty * ny + tz * nz
        drift = max(drift, abs(dot_tn))
        nx, ny, nz = nx - dot_tn * tx, ny - dot_tn * ty, nz - dot_tn * tz
        nn = (nx * nx + ny * ny + nz * nz) ** 0.5
        nx, ny, nz = nx / nn, ny / nn, nz / nn
        bx = ty * nz - tz * ny
        by = tz * nx - tx * nz
        bz = tx * ny - ty * nx
        drift = max(
            drift,
            abs((y[9] - bx) * bx + (y[10] - by) * by + (y[11] - bz) * bz),
        )
        max_drift = max(max_drift, drift)
        y = (y[0], y[1], y[2], tx, ty, tz, nx, ny, nz, bx, by, bz)

        s_nodes[i] = s
        c_nodes[i] = y[0:3]
        t_nodes[i] = y[3:6]
        n_nodes[i] = y[6:9]
        b_nodes[i] = y[9:12]

    def position(s_query):
        s_query = np.asarray(s_query, dtype=float)
        sq = np.atleast_1d(np.clip(s_query, a, b))
        idx = np.clip(np.searchsorted(s_nodes, sq, side="right") - 1, 0, n_steps - 1)
        h_loc = s_nodes[idx + 1] - s_nodes[idx]
        u = (sq - s_nodes[idx]) / h_loc
        p0, p1 = c_nodes[idx], c_nodes[idx + 1]
        m0, m1 = t_nodes[idx] * h_loc[:, None], t_nodes[idx + 1] * h_loc[:, None]
        u = u[:, None]
        out = (
            (2 * u**3 - 3 * u**2 + 1) * p0
            + (u**3 - 2 * u**2 + u) * m0
            + (-2 * u**3 + 3 * u**2) * p1
            + (u**3 - u**2) * m1
        )
        return out[0] if s_query.ndim == 0 else out

    def frame(s_query):
        s_query = np.atleast_1d(np.asarray(s_query, dtype=float))
        sq = np.clip(s_query, a, b)
        t = _slerp_frame(s_nodes, t_nodes, sq)
        n = _slerp_frame(s_nodes, n_nodes, sq)
        n = unit(n - np.sum(n * t, axis=-1, keepdims=True) * t)
        bvec = np.cross(t, n)
        k = np.array([k_profile(x) for x in np.ravel(sq)]).reshape(sq.shape)
        tau = np.array([tau_profile(x) for x in np.ravel(sq)]).reshape(sq.shape)
        return t, n, bvec, k, tau

    curve = ParamCurve(
        name="frenet_ode", domain=(a, b), position=position, d1=None, frame=frame
    )
    curve.frame_drift = max_drift
    curve.nodes = s_nodes
    return curve


def _slerp_frame(s_nodes, vec_nodes, sq):
    idx = np.clip(np.searchsorted(s_nodes, sq, side="right") - 1, 0, len(s_nodes) - 2)
    u = ((sq - s_nodes[idx]) / (s_nodes[idx + 1] - s_nodes[idx]))[:, None]
    raw = (1.0 - u) * vec_nodes[idx] + u * vec_nodes[idx + 1]
    return unit(raw)


# ---------------------------------------------------------------------------
# pointwise frames, including generalized frames at inflection points
# ---------------------------------------------------------------------------


def _fd(fn, x, step):
    return (np.asarray(fn(x + step), float) - np.asarray(fn(x - step), float)) / (
        2.0 * step
    )


def frame_at(c, s, numeric=False, h=1e-5, eps_inflection=EPS_INFLECTION):
    """Frenet frame of c at s; at an inflection point the frame comes from
    the first non-vanishing derivative of order n <= 5 (binormal is the
    normalized cross product of the tangent with that derivative).

    Analytic derivative closures are used when present; orders beyond the
    highest closure fall back to central differences of that closure.  With
    numeric=True the whole chain may be built from the position alone.
    """
    s = float(s)
    closures = {1: c.d1, 2: c.d2, 3: c.d3}
    top = max((o for o in (3, 2, 1) if closures[o] is not None), default=0)
    if top == 0 and not numeric:
        raise FrameUndefined("no derivatives available; pass numeric=True")

    def deriv(order):
        if order <= top:
            return np.asarray(closures[order](s), dtype=float)
        need = order - top
        base = closures[top] if top else c.eval
        if top == 0:
            need = order
        if top < order and top > 0 and order <= 3 and not numeric:
            raise FrameUndefined(f"no derivative of order {order} available")
        fn = base
        for level in range(need):
            prev = fn
            step = h if level == 0 else 10.0 ** level * h  # widen repeated stencils
            fn = lambda x, p=prev, st=step: _fd(p, x, st)
        return np.asarray(fn(s), dtype=float)

    d1 = deriv(1)
    t = unit(d1)

    def perp(v):
        # arc-length derivatives of order >= 2 are orthogonal to the
        # tangent; the tangential residue is parameterization noise
        return v - np.dot(v, t) * t

    d2 = perp(deriv(2))
    if np.linalg.norm(d2) > eps_inflection:
        k = float(np.linalg.norm(d2))
        n = d2 / k
        bvec = np.cross(t, n)
        try:
            d3 = deriv(3)
            tau = float(np.dot(np.cross(d1, d2), d3) / k**2)
        except FrameUndefined:
            tau = float("nan")
        return FrenetFrame(
            t=t, n=unit(n), b=unit(bvec), k=k, tau=tau, inflection_order=2
        )

    for order in range(3, MAX_DERIV_ORDER + 1):
        dn = perp(deriv(order))
        norm = float(np.linalg.norm(dn))
        if norm > eps_inflection:
            return FrenetFrame(
                t=t,
                n=unit(dn / norm),
                b=unit(np.cross(d1, dn) / norm),
                k=0.0,
                tau=0.0,
                inflection_order=order,
            )
    raise FrameUndefined(f"derivatives up to order {MAX_DERIV_ORDER} all vanish")


# ---------------------------------------------------------------------------
# inscription
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Inscription:
    """Inscribed polygonal together with its mesh (longest chord) and its
    modulus (largest sub-arc diameter, estimated by dense sub-sampling)."""

    polygonal: Polygonal3
    mesh: float
    modulus: float


N_SUB_MODULUS = 64


def inscribe(c, params):
    params = np.asarray(params, dtype=float)
    if params.ndim != 1 or params.size < 2 or np.any(np.diff(params) <= 0):
        raise ValueError("params must be strictly increasing with >= 2 entries")
    verts = c.eval(params)
    chords = np.linalg.norm(np.diff(verts, axis=0), axis=1)
    mesh = float(np.max(chords))

    # arc diameters: Nsub samples per cell, max pairwise distance, computed
    # as a batched Gram matrix chunked over cells
    lam = np.linspace(0.0, 1.0, N_SUB_MODULUS)
    sub = params[:-1, None] + np.diff(params)[:, None] * lam[None, :]
    pts = c.eval(sub.reshape(-1)).reshape(len(params) - 1, N_SUB_MODULUS, 3)
    max_d2 = 0.0
    chunk = 4096
    for lo in range(0, pts.shape[0], chunk):
        p = pts[lo : lo + chunk]
        sq = np.sum(p * p, axis=2)
        gram = p @ p.transpose(0, 2, 1)
        d2 = sq[:, :, None] + sq[:, None, :] - 2.0 * gram
        max_d2 = max(max_d2, float(np.max(d2)))
    modulus = float(np.sqrt(max(max_d2, 0.0)))

    scale = max(float(np.max(np.abs(verts))), 1.0)
    closed = bool(
        c.closed and np.linalg.norm(verts[0] - verts[-1]) <= 1e-9 * scale
    )
    if closed:
        verts = verts[:-1]
    return Inscription(Polygonal3(verts, closed=closed), mesh, modulus)


# ---------------------------------------------------------------------------
# model registry (CLI surface)
# ---------------------------------------------------------------------------


def make_curve(model, **params):
    """Build a curve from a model name and a parameter map."""
    if model == "helix":
        return helix(R=params.get("R", 1.0), K=params.get("K", 2 * np.pi))
    if model == "circle":
        return helix(R=params.get("R", 1.0), K=0.0)
    if model == "inflection":
        return inflection_curve()
    if model == "blowup":
        delta = params.get("delta", 1e-2)
        if not (0.0 < delta < 1.0):
            raise ValueError("delta must be in (0, 1)")
        step = params.get("step", min(delta / 50.0, 1e-3))
        return frenet_ode_curve(
            lambda s: 1.0, lambda s: 1.0 / (1.0 - s), (0.0, 1.0 - delta), step=step
        )
    raise UnknownModel(f"unknown curve model {model!r}")
