"""Geometry kernel for the Gauss sphere and the projective plane.

Unit vectors are plain numpy arrays of shape (..., 3).  A point of RP^2 is
represented by a unit vector up to sign; `canon_rep` fixes the sign
deterministically and `ProjPoint` wraps one canonical representative.  All
angles are radians.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousLift, AntipodalPair, DegenerateArc

EPS_UNIT = 1e-12
EPS_CANON = 1e-9
EPS_ANTIPODAL = 1e-9

# projective polyline arcs are kept at most this long so that stored arc
# lengths agree with the quotient distance between their endpoints
MAX_PROJ_ARC = 0.5 * np.pi


def unit(v):
    """Normalize v (shape (..., 3)); raises on (near-)zero input."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n < EPS_UNIT):
        raise ValueError("cannot normalize a zero vector")
    return v / n


def sphere_distance(a, b):
    """Geodesic distance on S^2, in [0, pi].

    Uses atan2(|a x b|, a . b), which stays well-conditioned near 0 and pi
    where the clamped-arccos form loses half the digits.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cross = np.cross(a, b)
    return np.arctan2(np.linalg.norm(cross, axis=-1), np.sum(a * b, axis=-1))


def proj_distance(p, q):
    """Quotient distance on RP^2: min of the two sphere distances, in [0, pi/2]."""
    a = p.rep if isinstance(p, ProjPoint) else np.asarray(p, dtype=float)
    b = q.rep if isinstance(q, ProjPoint) else np.asarray(q, dtype=float)
    cross = np.cross(a, b)
    dot = np.sum(a * b, axis=-1)
    return np.arctan2(np.linalg.norm(cross, axis=-1), np.abs(dot))


def fold_angle(theta):
    """Fold an angle in [0, pi] into [0, pi/2] (unoriented-plane angle)."""
    theta = np.asarray(theta, dtype=float)
    return np.minimum(theta, np.pi - theta)


def canon_rep(v):
    """Canonical representative of [v]: the first component whose magnitude
    exceeds EPS_CANON is made positive.  canon(v) == canon(-v) exactly."""
    v = np.asarray(v, dtype=float)
    sign = np.zeros(v.shape[:-1])
    for k in range(3):
        comp = v[..., k]
        pick = (sign == 0) & (np.abs(comp) > EPS_CANON)
        sign = np.where(pick, np.sign(comp), sign)
    sign = np.where(sign == 0, 1.0, sign)
    return v * sign[..., None] + 0.0  # adding 0.0 maps -0.0 to +0.0


@dataclass(frozen=True, eq=False)
class ProjPoint:
    """Point of RP^2 stored through its canonical unit representative."""

    rep: np.ndarray

    def __init__(self, v):
        object.__setattr__(self, "rep", canon_rep(unit(v)))

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        return bool(np.all(self.rep == other.rep))

    def __hash__(self):
        return hash(self.rep.tobytes())


def slerp(a, b, lam):
    """Constant-speed point(s) on the minimal geodesic arc from a to b.

    lam may be a scalar or an array; the result has shape lam.shape + (3,).
    Raises AntipodalPair when the arc is not unique.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    theta = float(sphere_distance(a, b))
    if theta > np.pi - EPS_ANTIPODAL:
        raise AntipodalPair("slerp between (nearly) antipodal points")
    lam = np.asarray(lam, dtype=float)
    if theta < EPS_ANTIPODAL:
        return np.broadcast_to(a, lam.shape + (3,)).copy()
    out = (np.sin((1.0 - lam) * theta)[..., None] * a
           + np.sin(lam * theta)[..., None] * b) / np.sin(theta)
    return out


def arc_tangent(a, b, at_end=False):
    """Unit tangent, in the direction of travel, of the geodesic arc a -> b;
    evaluated at a by default, at b with at_end=True."""
    theta = float(sphere_distance(a, b))
    if theta < EPS_ANTIPODAL or theta > np.pi - EPS_ANTIPODAL:
        raise DegenerateArc("arc too short or antipodal to carry a direction")
    if at_end:
        return (np.cos(theta) * b - a) / np.sin(theta)
    return (b - np.cos(theta) * a) / np.sin(theta)


def arc_angle_at_junction(prev_start, mid, next_end):
    """Oriented turning angle at mid between the arcs prev_start -> mid and
    mid -> next_end, in [0, pi].  Callers fold into [0, pi/2] for torsion."""
    t_in = arc_tangent(prev_start, mid, at_end=True)
    t_out = arc_tangent(mid, next_end)
    return float(sphere_distance(t_in, t_out))


def veronese(v):
    """Quadratic embedding of S^2 into R^6; identifies antipodes and
    preserves path speed.  Every image point has norm sqrt(2)/2."""
    v = np.asarray(v, dtype=float)
    y1, y2, y3 = v[..., 0], v[..., 1], v[..., 2]
    h = np.sqrt(2.0) / 2.0
    return np.stack(
        [h * y1 * y1, h * y2 * y2, h * y3 * y3, y1 * y2, y2 * y3, y3 * y1],
        axis=-1,
    )


def _eval_piecewise(points, params, s):
    """Evaluate a piecewise-geodesic path with breakpoints `points` at
    parameters `params` (nondecreasing).  Intervals of zero point motion but
    positive parameter width are stalls (constant value)."""
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(np.clip(s, params[0], params[-1]))
    n_arcs = points.shape[0] - 1
    if n_arcs == 0:
        out = np.broadcast_to(points[0], s.shape + (3,)).copy()
        return out[0] if scalar else out
    idx = np.searchsorted(params, s, side="right") - 1
    idx = np.clip(idx, 0, n_arcs - 1)
    a = points[idx]
    b = points[idx + 1]
    width = params[idx + 1] - params[idx]
    lam = np.where(width > 0, (s - params[idx]) / np.where(width > 0, width, 1.0), 0.0)
    cross = np.cross(a, b)
    theta = np.arctan2(np.linalg.norm(cross, axis=-1), np.sum(a * b, axis=-1))
    sin_t = np.sin(theta)
    safe = np.where(sin_t > EPS_ANTIPODAL, sin_t, 1.0)
    out = (np.sin((1.0 - lam) * theta)[..., None] * a
           + np.sin(lam * theta)[..., None] * b) / safe[..., None]
    trivial = sin_t <= EPS_ANTIPODAL
    if np.any(trivial):
        out[trivial] = a[trivial]
    return out[0] if scalar else out


class GeodesicPolyline:
    """Piecewise-geodesic curve on S^2 or RP^2, arc-length parameterized.

    ``points`` are unit vectors; for the projective plane they form a
    continuous lift to S^2 and each stored arc is at most pi/2 long, so that
    cum_length increments equal the quotient distance between breakpoints.
    """

    def __init__(self, points, space, cum_length=None):
        self.space = space  # 'sphere' | 'projective'
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        if cum_length is None:
            d = sphere_distance(self.points[:-1], self.points[1:])
            cum_length = np.concatenate([[0.0], np.cumsum(d)])
        self.cum_length = np.asarray(cum_length, dtype=float)
        if self.cum_length.shape[0] != self.points.shape[0]:
            raise ValueError("cum_length must match breakpoints")

    @classmethod
    def from_projective_points(cls, reps, seed=None):
        """Build from projective representatives with a continuous lift (each
        successive sign is the one nearer the previous lifted point)."""
        return cls(lift_signs(reps, seed=seed), "projective")

    @property
    def total_length(self):
        return float(self.cum_length[-1])

    @property
    def n_arcs(self):
        return self.points.shape[0] - 1

    def eval(self, s):
        """Point(s) at arc length s, clipped to the domain.  Projective
        polylines return lifted representatives; `canon_rep` for display."""
        return _eval_piecewise(self.points, self.cum_length, s)

    def arc_lengths(self):
        return np.diff(self.cum_length)

    def junction_angles(self, min_arc=1e-9):
        """Turning angle at each interior breakpoint whose two immediately
        adjacent arcs are both longer than min_arc; nan elsewhere."""
        seg = self.arc_lengths()
        n = self.points.shape[0]
        angles = np.full(max(n - 2, 0), np.nan)
        for i in range(1, n - 1):
            if seg[i - 1] > min_arc and seg[i] > min_arc:
                angles[i - 1] = arc_angle_at_junction(
                    self.points[i - 1], self.points[i], self.points[i + 1]
                )
        return angles

    def turning_total(self, min_arc=1e-9):
        """Total turning: sum of angles between consecutive nontrivial arcs
        (stalls contribute a single turn).  This is the discrete total
        curvature of the polyline in its own space: on RP^2 the one-sided
        derivatives are compared as projective classes, so each turn is
        folded into [0, pi/2]."""
        seg = self.arc_lengths()
        live = [i for i in range(len(seg)) if seg[i] > min_arc]
        total = 0.0
        for prev, cur in zip(live[:-1], live[1:]):
            t_in = arc_tangent(self.points[prev], self.points[prev + 1], at_end=True)
            t_out = arc_tangent(self.points[cur], self.points[cur + 1])
            turn = float(sphere_distance(t_in, t_out))
            if self.space == "projective":
                turn = min(turn, np.pi - turn)
            total += turn
        return total


class ScheduledPath:
    """Piecewise-geodesic map with an explicit parameter table: constant on
    stall intervals, constant-speed on moving intervals.  Used for the
    interleaved tangent/binormal pair, which is not arc-length parameterized."""

    def __init__(self, points, params, space):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.params = np.asarray(params, dtype=float)
        self.space = space
        if self.params.shape[0] != self.points.shape[0]:
            raise ValueError("params must match breakpoints")

    @property
    def domain(self):
        return float(self.params[0]), float(self.params[-1])

    def eval(self, s):
        return _eval_piecewise(self.points, self.params, s)

    def path_length(self):
        return float(np.sum(sphere_distance(self.points[:-1], self.points[1:])))


def lift_signs(reps, seed=None, on_ambiguous="raise"):
    """Continuous lift of a sequence of projective representatives: each
    successive sign is the one nearer the previous lifted point.

    seed, when given, must be +-(first rep); it selects the branch.  When
    consecutive points are (numerically) at distance pi/2 both signs are
    equidistant: with on_ambiguous='raise' this raises AmbiguousLift, with
    'keep' the stored orientation continues the path (tie-break used by the
    polar constructions).
    """
    reps = np.atleast_2d(np.asarray(reps, dtype=float))
    first_sign = 1.0
    if seed is not None:
        seed = np.asarray(seed, dtype=float)
        d = float(np.dot(seed, reps[0]))
        if abs(abs(d) - 1.0) > 1e-6:
            raise ValueError("seed is not a representative of the first breakpoint")
        first_sign = np.sign(d)
    if reps.shape[0] == 1:
        return reps * first_sign
    dots = np.sum(reps[:-1] * reps[1:], axis=1)
    ambiguous = np.abs(dots) < EPS_CANON
    if np.any(ambiguous) and on_ambiguous == "raise":
        i = int(np.argmax(ambiguous)) + 1
        raise AmbiguousLift(f"both lifts of breakpoint {i} are equidistant")
    steps = np.where(ambiguous, 1.0, np.sign(dots))
    signs = first_sign * np.concatenate([[1.0], np.cumprod(steps)])
    return reps * signs[:, None]


def lift_projective_polyline(curve, seed):
    """Continuous lift of a projective polyline into S^2 from a chosen seed.

    Returns (sphere polyline, closure_sign).  closure_sign is +1/-1 when the
    input is projectively closed (last breakpoint equals the first); it
    records whether the lift returns to +seed or -seed.  None for open input.
    """
    if curve.space != "projective":
        raise ValueError("expected a projective polyline")
    lifted = lift_signs(curve.points, seed=seed)
    closure = None
    if float(proj_distance(curve.points[0], curve.points[-1])) < 1e-9:
        closure = int(np.sign(np.dot(lifted[0], lifted[-1])))
    return GeodesicPolyline(lifted, "sphere", curve.cum_length.copy()), closure


def split_long_arcs(points, max_len=MAX_PROJ_ARC):
    """Insert slerp midpoints so that no arc exceeds max_len.

    Required before projecting sphere polylines to RP^2: a projective arc
    longer than pi/2 is not the minimal geodesic between its endpoints.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = [points[0]]
    for a, b in zip(points[:-1], points[1:]):
        theta = float(sphere_distance(a, b))
        if theta > max_len:
            pieces = int(np.ceil(theta / max_len))
            lam = np.arange(1, pieces) / pieces
            out.extend(slerp(a, b, lam))
        out.append(b)
    return np.array(out)


def sup_distance(curve_a, curve_b, n_grid=1024):
    """Sup over a uniform grid of pointwise distance between two curves, each
    evaluated with constant speed over its own domain."""
    s = np.linspace(0.0, 1.0, n_grid)
    pa = curve_a.eval(s * curve_a.total_length)
    pb = curve_b.eval(s * curve_b.total_length)
    if curve_a.space == "projective" or curve_b.space == "projective":
        d = proj_distance(pa, pb)
    else:
        d = sphere_distance(pa, pb)
    return float(np.max(d))
