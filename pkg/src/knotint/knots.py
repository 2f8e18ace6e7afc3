"""Smooth closed curves, singular knots, and Gauss codes.

Curves are truncated trigonometric series on [0, 1) with period 1, so
evaluation and differentiation are exact term-by-term operations.
Singular knots carry designed double points; their resolutions push one
strand off with a compactly supported bump, leaving the curve untouched
outside the perturbation balls.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .diagrams import Diagram

IMMERSION_GRID = 4096
EMBEDDING_MIN_SEPARATION = 1.0 / 64.0

TWO_PI = 2.0 * math.pi


class CurveCheckError(ValueError):
    """A curve failed its immersion or embedding verification."""


def _wrap_half(x: np.ndarray | float):
    """Wrap to [-1/2, 1/2)."""
    return (np.asarray(x) + 0.5) % 1.0 - 0.5


class KnotCurve:
    """Closed curve given by truncated trigonometric series per coordinate.

    ``coeffs[c][h] = (a_cos, a_sin)`` contributes
    ``a_cos*cos(2*pi*h*t) + a_sin*sin(2*pi*h*t)`` to coordinate c.
    """

    def __init__(self, coeffs, check: bool = True, embedded: bool = True):
        self.coeffs = np.asarray(coeffs, dtype=float)
        if self.coeffs.ndim != 3 or self.coeffs.shape[2] != 2:
            raise ValueError("coeffs must have shape (dim, harmonics+1, 2)")
        self.dim = self.coeffs.shape[0]
        self.harmonics = self.coeffs.shape[1] - 1
        if check:
            self.verify(embedded=embedded)

    # -- evaluation ---------------------------------------------------------

    def _angles(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        h = np.arange(self.harmonics + 1)
        phase = TWO_PI * np.multiply.outer(np.asarray(t, dtype=float), h)
        return np.cos(phase), np.sin(phase)

    def evaluate(self, t) -> np.ndarray:
        """Points K(t); accepts scalars or arrays, t taken mod 1."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        c, s = self._angles(t_arr)
        out = np.einsum("nh,dh->nd", c, self.coeffs[:, :, 0])
        out += np.einsum("nh,dh->nd", s, self.coeffs[:, :, 1])
        return out[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else out

    def derivative(self, t) -> np.ndarray:
        """Exact term-by-term derivative K'(t)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        c, s = self._angles(t_arr)
        h = TWO_PI * np.arange(self.harmonics + 1)
        out = np.einsum("nh,dh->nd", -s * h, self.coeffs[:, :, 0])
        out += np.einsum("nh,dh->nd", c * h, self.coeffs[:, :, 1])
        return out[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else out

    # -- invariants ---------------------------------------------------------

    def verify(self, embedded: bool = True, grid: int = IMMERSION_GRID) -> None:
        ts = np.arange(grid) / grid
        speeds = np.linalg.norm(self.derivative(ts), axis=1)
        if not np.all(speeds > 0.0):
            raise CurveCheckError("immersion check failed: vanishing derivative")
        # "Positive" separation needs a float tolerance: an actual double
        # point lands at rounding scale, not exact zero.
        if embedded and self.min_separation(grid=grid) <= 1e-7 * self.diameter():
            raise CurveCheckError("embedding check failed: curve self-intersects")

    def min_separation(self, grid: int = IMMERSION_GRID,
                       exclude: Sequence[tuple[float, float, float]] = (),
                       min_gap: float = EMBEDDING_MIN_SEPARATION) -> float:
        """Min distance over grid pairs with parameter gap > ``min_gap``.

        ``exclude`` lists (t1, t2, radius) parameter disks to skip (used
        for the designed double points of singular knots).
        """
        ts = np.arange(grid) / grid
        pts = self.evaluate(ts)
        best = np.inf
        chunk = 256
        for start in range(0, grid, chunk):
            block = pts[start:start + chunk]
            tblock = ts[start:start + chunk]
            d2 = np.sum((block[:, None, :] - pts[None, :, :]) ** 2, axis=2)
            gap = np.abs(_wrap_half(tblock[:, None] - ts[None, :]))
            mask = gap > min_gap
            for (ta, tb, rad) in exclude:
                near_a = np.abs(_wrap_half(tblock[:, None] - ta)) < rad
                near_b = np.abs(_wrap_half(ts[None, :] - tb)) < rad
                mask &= ~(near_a & near_b)
                near_b2 = np.abs(_wrap_half(tblock[:, None] - tb)) < rad
                near_a2 = np.abs(_wrap_half(ts[None, :] - ta)) < rad
                mask &= ~(near_b2 & near_a2)
            if mask.any():
                best = min(best, math.sqrt(d2[mask].min()))
        return best

    def diameter(self) -> float:
        ts = np.arange(512) / 512
        pts = self.evaluate(ts)
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))

    # -- transforms ---------------------------------------------------------

    def shifted_origin(self, c: float) -> "KnotCurve":
        """Reparametrize t -> t + c (same geometric curve)."""
        h = np.arange(self.harmonics + 1)
        ch, sh = np.cos(TWO_PI * h * c), np.sin(TWO_PI * h * c)
        out = np.empty_like(self.coeffs)
        out[:, :, 0] = self.coeffs[:, :, 0] * ch + self.coeffs[:, :, 1] * sh
        out[:, :, 1] = -self.coeffs[:, :, 0] * sh + self.coeffs[:, :, 1] * ch
        return KnotCurve(out, check=False)

    def transformed(self, matrix, shift=(0.0, 0.0, 0.0)) -> "KnotCurve":
        """Apply an affine map x -> M x + b."""
        m = np.asarray(matrix, dtype=float)
        out = np.einsum("ij,jhp->ihp", m, self.coeffs)
        out[:, 0, 0] += np.asarray(shift, dtype=float)
        return KnotCurve(out, check=False)

    # -- serialization ------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "dim": self.dim,
            "harmonics": self.harmonics,
            "coeffs": self.coeffs.tolist(),
        }

    @staticmethod
    def from_json_obj(obj: dict, check: bool = True) -> "KnotCurve":
        if obj.get("dim", 3) != 3:
            raise ValueError("only 3-dimensional curves are supported")
        coeffs = np.asarray(obj["coeffs"], dtype=float)
        if coeffs.shape[1] != obj.get("harmonics", coeffs.shape[1] - 1) + 1:
            raise ValueError("harmonics field does not match coefficients")
        return KnotCurve(coeffs, check=check)

    @staticmethod
    def from_samples(points: np.ndarray, harmonics: int) -> "KnotCurve":
        """Band-limited fit through uniformly sampled points (FFT)."""
        pts = np.asarray(points, dtype=float)
        m = pts.shape[0]
        spec = np.fft.rfft(pts, axis=0) / m
        coeffs = np.zeros((pts.shape[1], harmonics + 1, 2))
        coeffs[:, 0, 0] = spec[0].real
        hmax = min(harmonics, spec.shape[0] - 1)
        coeffs[:, 1:hmax + 1, 0] = 2.0 * spec[1:hmax + 1].real.T
        coeffs[:, 1:hmax + 1, 1] = -2.0 * spec[1:hmax + 1].imag.T
        return KnotCurve(coeffs, check=False)


class BumpedCurve:
    """A base curve plus compactly supported smooth displacement bumps.

    Each bump is (center, halfwidth, amplitude vector); the displacement
    profile is exp(1 - 1/(1-x^2)) on |x| < 1 and exactly zero outside,
    so the curve agrees with the base outside the bump supports.
    """

    def __init__(self, base, bumps: Sequence[tuple[float, float, np.ndarray]]):
        self.base = base
        self.bumps = [(float(c), float(w), np.asarray(a, dtype=float))
                      for c, w, a in bumps]
        self.dim = base.dim

    @staticmethod
    def _profile(x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        inside = np.abs(x) < 1.0
        xi = x[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi * xi))
        return out

    @staticmethod
    def _profile_deriv(x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        inside = np.abs(x) < 1.0
        xi = x[inside]
        denom = (1.0 - xi * xi) ** 2
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi * xi)) * (-2.0 * xi / denom)
        return out

    def evaluate(self, t) -> np.ndarray:
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.atleast_2d(self.base.evaluate(t_arr))
        for center, width, amp in self.bumps:
            x = _wrap_half(t_arr - center) / width
            out = out + np.multiply.outer(self._profile(x), amp)
        return out[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else out

    def derivative(self, t) -> np.ndarray:
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.atleast_2d(self.base.derivative(t_arr))
        for center, width, amp in self.bumps:
            x = _wrap_half(t_arr - center) / width
            out = out + np.multiply.outer(self._profile_deriv(x) / width, amp)
        return out[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else out

    def diameter(self) -> float:
        ts = np.arange(512) / 512
        pts = self.evaluate(ts)
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))

    def min_separation(self, grid: int = IMMERSION_GRID) -> float:
        ts = np.arange(grid) / grid
        pts = self.evaluate(ts)
        best = np.inf
        chunk = 256
        for start in range(0, grid, chunk):
            block = pts[start:start + chunk]
            tblock = ts[start:start + chunk]
            d2 = np.sum((block[:, None, :] - pts[None, :, :]) ** 2, axis=2)
            gap = np.abs(_wrap_half(tblock[:, None] - ts[None, :]))
            mask = gap > EMBEDDING_MIN_SEPARATION
            if mask.any():
                best = min(best, math.sqrt(d2[mask].min()))
        return best

    def verify(self, grid: int = IMMERSION_GRID) -> None:
        ts = np.arange(grid) / grid
        speeds = np.linalg.norm(self.derivative(ts), axis=1)
        if not np.all(speeds > 0.0):
            raise CurveCheckError("immersion check failed: vanishing derivative")
        if self.min_separation(grid=grid) <= 1e-7 * self.diameter():
            raise CurveCheckError("embedding check failed: curve self-intersects")


# ---------------------------------------------------------------------------
# standard knots


def standard_knot(name: str) -> KnotCurve:
    """Built-in curves: unknot, trefoil, figure8, torus(p,q)."""
    name = name.strip().lower()
    if name == "unknot":
        coeffs = np.zeros((3, 2, 2))
        coeffs[0, 1, 0] = 1.0  # cos
        coeffs[1, 1, 1] = 1.0  # sin
        return KnotCurve(coeffs)
    if name == "trefoil":
        return standard_knot("torus(2,3)")
    if name == "figure8":
        ts = np.arange(64) / 64
        u = TWO_PI * ts
        pts = np.stack([
            (2.0 + np.cos(2 * u)) * np.cos(3 * u),
            (2.0 + np.cos(2 * u)) * np.sin(3 * u),
            np.sin(4 * u),
        ], axis=1)
        curve = KnotCurve.from_samples(pts, harmonics=5)
        curve.verify()
        return curve
    if name.startswith("torus(") and name.endswith(")"):
        inner = name[len("torus("):-1]
        try:
            p, q = (int(x) for x in inner.split(","))
        except Exception as exc:
            raise ValueError(f"cannot parse torus knot spec {name!r}") from exc
        if math.gcd(p, q) != 1:
            raise ValueError(f"torus({p},{q}) requires coprime p, q")
        ts = np.arange(4 * (abs(p) + abs(q) + 2)) / (4 * (abs(p) + abs(q) + 2))
        u = TWO_PI * ts
        pts = np.stack([
            (2.0 + np.cos(q * u)) * np.cos(p * u),
            (2.0 + np.cos(q * u)) * np.sin(p * u),
            np.sin(q * u),
        ], axis=1)
        curve = KnotCurve.from_samples(pts, harmonics=abs(p) + abs(q))
        curve.verify()
        return curve
    raise ValueError(f"unknown standard knot {name!r}")


def hopf_link() -> tuple[KnotCurve, KnotCurve]:
    """Two round circles with linking number +1."""
    a = standard_knot("unknot")
    coeffs = np.zeros((3, 2, 2))
    coeffs[0, 0, 0] = 1.0
    coeffs[0, 1, 0] = 1.0
    coeffs[2, 1, 1] = -1.0
    b = KnotCurve(coeffs)
    return a, b


def split_link() -> tuple[KnotCurve, KnotCurve]:
    """Two distant unlinked circles."""
    a = standard_knot("unknot")
    b = a.transformed(np.eye(3), shift=(5.0, 0.0, 0.0))
    return a, b


# ---------------------------------------------------------------------------
# singular knots and resolutions


@dataclass
class SingularKnot:
    """An immersed closed curve with marked transverse double points."""

    base: KnotCurve
    double_points: tuple[tuple[float, float], ...]
    rho: float

    def __post_init__(self):
        params = [t for pair in self.double_points for t in pair]
        if len(set(params)) != len(params):
            raise ValueError("double point parameters must be pairwise distinct")
        scale = self.base.diameter()
        for (a, b) in self.double_points:
            pa, pb = self.base.evaluate(a), self.base.evaluate(b)
            if np.linalg.norm(pa - pb) > 1e-8 * scale:
                raise ValueError("marked parameters are not a double point")
            ta, tb = self.base.derivative(a), self.base.derivative(b)
            cross = np.cross(ta, tb)
            if np.linalg.norm(cross) < 1e-6 * np.linalg.norm(ta) * np.linalg.norm(tb):
                raise ValueError("tangents at a double point are dependent")

    @property
    def n(self) -> int:
        return len(self.double_points)

    def crossing_normal(self, i: int) -> np.ndarray:
        """Unit normal at double point i; pushing the first strand along
        it produces the positive resolution of that crossing."""
        a, b = self.double_points[i]
        cross = np.cross(self.base.derivative(a), self.base.derivative(b))
        return cross / np.linalg.norm(cross)


def resolve(s: SingularKnot, subset: Iterable[int],
            amplitude: float | None = None,
            width: float | None = None) -> BumpedCurve:
    """Resolve every double point, positively for indices in ``subset``.

    The a-strand of double point i is pushed to the positive side
    (overstrand) when i is in ``subset``, otherwise to the negative
    side.  All resolutions agree outside balls of radius rho around the
    double points.
    """
    subset = set(subset)
    if not subset <= set(range(s.n)):
        raise ValueError("subset mentions unknown double point indices")
    params = sorted(t for pair in s.double_points for t in pair)
    speeds = np.linalg.norm(s.base.derivative(np.arange(1024) / 1024), axis=1)
    max_speed = float(speeds.max())
    if width is None:
        min_gap = min(
            (params[(i + 1) % len(params)] - params[i]) % 1.0
            for i in range(len(params))
        ) if params else 0.25
        width = min(0.25 * min_gap, 0.6 * s.rho / max_speed)
    if amplitude is None:
        amplitude = s.rho / 3.0
    # Everything the bump moves must stay inside the rho-ball.
    if max_speed * width + amplitude > s.rho:
        raise ValueError("perturbation balls overlap: width too large for rho")
    bumps = []
    for i, (a, _b) in enumerate(s.double_points):
        sign = 1.0 if i in subset else -1.0
        bumps.append((a, width, sign * amplitude * s.crossing_normal(i)))
    out = BumpedCurve(s.base, bumps)
    if s.n:
        out.verify()
    return out


def _damped_interpolation(t_nodes: np.ndarray, values: np.ndarray,
                          harmonics: int) -> np.ndarray:
    """Trigonometric interpolation minimizing a smoothness-weighted norm.

    Returns (harmonics+1, 2) cos/sin coefficients with high harmonics
    damped, so the interpolant stays slowly varying between nodes.
    """
    h = np.arange(harmonics + 1)
    basis = np.concatenate([
        np.cos(TWO_PI * np.multiply.outer(t_nodes, h)),
        np.sin(TWO_PI * np.multiply.outer(t_nodes, h[1:])),
    ], axis=1)
    damp = np.concatenate([1.0 + h.astype(float) ** 2,
                           1.0 + h[1:].astype(float) ** 2])
    sol = np.linalg.lstsq(basis / damp, values, rcond=None)[0] / damp
    coeffs = np.zeros((harmonics + 1, 2))
    coeffs[:, 0] = sol[: harmonics + 1]
    coeffs[1:, 1] = sol[harmonics + 1:]
    return coeffs


def singular_from_chord_diagram(
    d: Diagram, harmonics: int | None = None, seed: int = 3,
    max_attempts: int = 8,
) -> SingularKnot:
    """Realize a chord diagram as a singular knot.

    Interval positions j = 1..2n are visited at parameters (j-1)/2n; the
    two visits of each chord pass through a common station with
    transverse tangents.  The curve interpolates the stations (and
    round-circle waypoints between them, for bounded speed) by damped
    trigonometric least squares, with a vertical wiggle vanishing at the
    visit parameters so unintended planar crossings separate in space.
    """
    if not d.is_chord_diagram:
        raise ValueError("singular realization needs a chord diagram")
    n = d.degree
    k = 2 * n
    if harmonics is None:
        harmonics = 2 * k + 3
    last_error = None
    for attempt in range(max_attempts):
        rng = np.random.default_rng([seed, attempt])
        try:
            return _build_singular(d, n, k, harmonics, rng)
        except ValueError as exc:
            last_error = exc
    raise ValueError(f"singular construction failed: {last_error}")


def _hermite(p0, v0, p1, v1, tau):
    """Cubic Hermite arc from (p0, v0) to (p1, v1), tau in [0, 1]."""
    tau = tau[:, None]
    h00 = 2 * tau ** 3 - 3 * tau ** 2 + 1
    h10 = tau ** 3 - 2 * tau ** 2 + tau
    h01 = -2 * tau ** 3 + 3 * tau ** 2
    h11 = tau ** 3 - tau ** 2
    return h00 * p0 + h10 * v0 + h01 * p1 + h11 * v1


def _build_singular(d: Diagram, n: int, k: int, harmonics: int,
                    rng: np.random.Generator) -> SingularKnot:
    t_of_pos = {pos: (pos - 1) / k for pos in range(1, k + 1)}
    chord_of_pos = {}
    angles = {}
    radii = {}
    for idx, (p, q) in enumerate(d.chords()):
        chord_of_pos[p] = chord_of_pos[q] = (p, q)
        angles[(p, q)] = TWO_PI * idx / n + 0.4 + 0.15 * rng.standard_normal()
        radii[(p, q)] = 0.45 + 0.12 * rng.standard_normal()
    stations = {c: radii[c] * np.array([math.cos(a), math.sin(a)])
                for c, a in angles.items()}

    # Hermite route through the stations: each visit crosses the station
    # along the circle's running direction tilted by +-alpha, so the two
    # strands of a chord meet at angle 2*alpha.
    alpha = 0.55
    pos_xy = np.zeros((k, 2))
    vel_xy = np.zeros((k, 2))
    for pos in range(1, k + 1):
        c = chord_of_pos[pos]
        phi = angles[c]
        tangent = np.array([-math.sin(phi), math.cos(phi)])
        tilt = alpha if pos == c[0] else -alpha
        rot = np.array([[math.cos(tilt), -math.sin(tilt)],
                        [math.sin(tilt), math.cos(tilt)]])
        pos_xy[pos - 1] = stations[c]
        vel_xy[pos - 1] = rot @ tangent * (5.5 + 0.3 * rng.standard_normal())

    m = 24
    taus = np.arange(m) / m
    nodes_t = []
    nodes_xy = []
    for j in range(k):
        p0, v0 = pos_xy[j], vel_xy[j] / k
        p1, v1 = pos_xy[(j + 1) % k], vel_xy[(j + 1) % k] / k
        arc = _hermite(p0, v0, p1, v1, taus)
        nodes_t.append((j + taus) / k)
        nodes_xy.append(arc)
    nodes_t = np.concatenate(nodes_t)
    nodes_xy = np.concatenate(nodes_xy)

    coeffs = np.zeros((3, harmonics + 1, 2))
    coeffs[0] = _damped_interpolation(nodes_t, nodes_xy[:, 0], harmonics)
    coeffs[1] = _damped_interpolation(nodes_t, nodes_xy[:, 1], harmonics)
    # Vertical wiggle: zero at visits, alternating between them so that
    # accidental planar crossings of the route separate in space.
    t_visits = np.array([t_of_pos[p] for p in range(1, k + 1)])
    z_phase = rng.uniform(0.0, TWO_PI)
    z_freq = n + 0.5 + rng.integers(0, 2)
    z_vals = 0.3 * np.sin(TWO_PI * z_freq * nodes_t + z_phase)
    coeffs[2] = _damped_interpolation(nodes_t, z_vals, harmonics)

    # Exact double points: minimum-norm correction at the visit nodes.
    curve0 = KnotCurve(coeffs, check=False)
    targets = np.zeros((k, 3))
    for pos in range(1, k + 1):
        targets[pos - 1, :2] = stations[chord_of_pos[pos]]
    for axis in range(3):
        vals = curve0.evaluate(t_visits)[:, axis]
        coeffs[axis] += _damped_interpolation(
            t_visits, targets[:, axis] - vals, harmonics)

    base = KnotCurve(coeffs, check=False)
    base.verify(embedded=False)
    pairs = tuple((t_of_pos[p], t_of_pos[q]) for p, q in d.chords())

    # Nonlocal clearance away from the double points bounds the ball
    # radius (points close along the curve are not self-approaches).
    excl_rad = 0.04
    exclusions = [(a, b, excl_rad) for a, b in pairs]
    clearance = base.min_separation(exclude=exclusions, min_gap=0.05)
    if not clearance > 0.04:
        raise ValueError("singular construction produced a near-intersection")
    # rho: 1/20 of the minimal distance between the double points, capped
    # so the balls avoid the rest of the curve.
    pts = [base.evaluate(a) for a, _ in pairs]
    min_dist = min(
        (float(np.linalg.norm(pts[i] - pts[j]))
         for i in range(len(pts)) for j in range(i + 1, len(pts))),
        default=1.0,
    )
    rho = min(min_dist / 20.0, clearance / 2.5)
    return SingularKnot(base, pairs, rho=rho)


# ---------------------------------------------------------------------------
# Gauss codes


@dataclass(frozen=True)
class GaussCode:
    """Cyclic word of signed crossing visits: (label, is_over, sign)."""

    visits: tuple[tuple[int, bool, int], ...]

    def __post_init__(self):
        seen: dict[int, list[bool]] = {}
        for label, over, sign in self.visits:
            if sign not in (-1, 1):
                raise ValueError("crossing sign must be +-1")
            seen.setdefault(label, []).append(over)
        for label, overs in seen.items():
            if sorted(overs) != [False, True]:
                raise ValueError(f"crossing {label} must appear once over, once under")

    @property
    def crossing_count(self) -> int:
        return len(self.visits) // 2

    def rotated(self, offset: int) -> "GaussCode":
        v = self.visits
        return GaussCode(v[offset:] + v[:offset])

    def to_text(self) -> str:
        return " ".join(
            f"{'O' if over else 'U'}{label}{'+' if sign > 0 else '-'}"
            for label, over, sign in self.visits
        )

    @staticmethod
    def from_text(text: str) -> "GaussCode":
        visits = []
        for token in text.split():
            if len(token) < 3 or token[0] not in "OU" or token[-1] not in "+-":
                raise ValueError(f"bad Gauss code token {token!r}")
            visits.append((int(token[1:-1]), token[0] == "O",
                           1 if token[-1] == "+" else -1))
        return GaussCode(tuple(visits))

    def canonical_rotation(self) -> "GaussCode":
        if not self.visits:
            return self
        best = min(range(len(self.visits)),
                   key=lambda i: self.rotated(i).visits)
        return self.rotated(best)

    def _relabeled_by_first_visit(self) -> tuple:
        order: dict[int, int] = {}
        out = []
        for label, over, sign in self.visits:
            if label not in order:
                order[label] = len(order) + 1
            out.append((order[label], over, sign))
        return tuple(out)

    def canonical(self) -> "GaussCode":
        """Rotation- and labeling-independent normal form."""
        if not self.visits:
            return self
        candidates = [
            self.rotated(i)._relabeled_by_first_visit()
            for i in range(len(self.visits))
        ]
        return GaussCode(min(candidates))


class ProjectionError(RuntimeError):
    """No regular projection found after the retry budget."""


def _plane_basis(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    helper = np.eye(3)[int(np.argmin(np.abs(d)))]
    e1 = np.cross(helper, d)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return e1, e2, d


def _segment_crossing_candidates(px: np.ndarray, py: np.ndarray,
                                 qx=None, qy=None) -> list[tuple[int, int]]:
    """Index pairs of (cyclically non-adjacent) segments that intersect.

    With qx/qy given, intersections are between the p-polygon and the
    q-polygon segments instead (a two-curve projection).
    """
    same = qx is None
    if same:
        qx, qy = px, py
    m, mm = len(px), len(qx)
    ax, ay = px, py
    bx, by = np.roll(px, -1), np.roll(py, -1)
    cx, cy = qx, qy
    dx, dy = np.roll(qx, -1), np.roll(qy, -1)

    pairs = []
    # Bounding-box bucketing on a coarse grid.
    lo = min(px.min(), qx.min()), min(py.min(), qy.min())
    hi = max(px.max(), qx.max()), max(py.max(), qy.max())
    span = max(hi[0] - lo[0], hi[1] - lo[1]) or 1.0
    cells = 64
    inv = cells / span

    def bucket_ids(x0, y0, x1, y1):
        gx0 = np.clip(((np.minimum(x0, x1) - lo[0]) * inv).astype(int), 0, cells - 1)
        gx1 = np.clip(((np.maximum(x0, x1) - lo[0]) * inv).astype(int), 0, cells - 1)
        gy0 = np.clip(((np.minimum(y0, y1) - lo[1]) * inv).astype(int), 0, cells - 1)
        gy1 = np.clip(((np.maximum(y0, y1) - lo[1]) * inv).astype(int), 0, cells - 1)
        return gx0, gx1, gy0, gy1

    buckets: dict[tuple[int, int], list[int]] = {}
    gx0, gx1, gy0, gy1 = bucket_ids(cx, cy, dx, dy)
    for j in range(mm):
        for gx in range(gx0[j], gx1[j] + 1):
            for gy in range(gy0[j], gy1[j] + 1):
                buckets.setdefault((gx, gy), []).append(j)

    gx0, gx1, gy0, gy1 = bucket_ids(ax, ay, bx, by)
    seen = set()
    for i in range(m):
        cand: set[int] = set()
        for gx in range(gx0[i], gx1[i] + 1):
            for gy in range(gy0[i], gy1[i] + 1):
                cand.update(buckets.get((gx, gy), ()))
        for j in cand:
            if same:
                if j <= i or j == (i + 1) % m or i == (j + 1) % m:
                    continue
            if (i, j) in seen:
                continue
            seen.add((i, j))
            d1 = (bx[i] - ax[i]) * (cy[j] - ay[i]) - (by[i] - ay[i]) * (cx[j] - ax[i])
            d2 = (bx[i] - ax[i]) * (dy[j] - ay[i]) - (by[i] - ay[i]) * (dx[j] - ax[i])
            d3 = (dx[j] - cx[j]) * (ay[i] - cy[j]) - (dy[j] - cy[j]) * (ax[i] - cx[j])
            d4 = (dx[j] - cx[j]) * (by[i] - cy[j]) - (dy[j] - cy[j]) * (bx[i] - cx[j])
            if d1 * d2 < 0 and d3 * d4 < 0:
                pairs.append((i, j))
    return pairs


def _refine_crossing(curve_a, curve_b, e1, e2, s0: float, t0: float):
    """Newton-refine projected intersection parameters."""
    s, t = s0, t0
    for _ in range(60):
        pa = curve_a.evaluate(s)
        pb = curve_b.evaluate(t)
        f = np.array([(pa - pb) @ e1, (pa - pb) @ e2])
        if np.abs(f).max() < 1e-13:
            break
        da = curve_a.derivative(s)
        db = curve_b.derivative(t)
        jac = np.array([[da @ e1, -(db @ e1)], [da @ e2, -(db @ e2)]])
        det = np.linalg.det(jac)
        if abs(det) < 1e-14:
            return None
        step = np.linalg.solve(jac, -f)
        s = (s + step[0]) % 1.0
        t = (t + step[1]) % 1.0
    else:
        return None
    return s, t


def gauss_code(curve, direction=(0.015, -0.007, 1.0), grid: int = 2048,
               max_retries: int = 12) -> GaussCode:
    """Extract the Gauss code of a projection of the curve.

    Crossings are located on the projected polygon and Newton-refined;
    non-regular projections (tangencies, triple points) trigger a
    deterministic retry with a perturbed direction.
    """
    direction = np.asarray(direction, dtype=float)
    for attempt in range(max_retries):
        e1, e2, d = _plane_basis(direction)
        result = _try_gauss_code(curve, e1, e2, d, grid)
        if result is not None:
            return result
        angle = 0.13 * (attempt + 1)
        rot = np.array([
            [math.cos(angle), -math.sin(angle), 0.0],
            [math.sin(angle), math.cos(angle), 0.0],
            [0.0, 0.0, 1.0],
        ])
        tilt = np.array([
            [1.0, 0.0, 0.0],
            [0.0, math.cos(0.11), -math.sin(0.11)],
            [0.0, math.sin(0.11), math.cos(0.11)],
        ])
        direction = rot @ (tilt @ direction)
    raise ProjectionError("no regular projection found")


def _try_gauss_code(curve, e1, e2, d, grid) -> GaussCode | None:
    ts = np.arange(grid) / grid
    pts = np.atleast_2d(curve.evaluate(ts))
    px, py = pts @ e1, pts @ e2
    scale = max(px.max() - px.min(), py.max() - py.min())
    crossings = []
    for i, j in _segment_crossing_candidates(px, py):
        refined = _refine_crossing(curve, curve, e1, e2, ts[i] + 0.5 / grid,
                                   ts[j] + 0.5 / grid)
        if refined is None:
            return None
        s, t = refined
        if abs(_wrap_half(s - t)) < 2.0 / grid:
            return None  # tangency at the diagonal
        crossings.append((s, t) if s < t else (t, s))
    # Deduplicate refined crossings.
    unique: list[tuple[float, float]] = []
    for s, t in sorted(crossings):
        if any(abs(_wrap_half(s - us)) < 1e-7 and abs(_wrap_half(t - ut)) < 1e-7
               for us, ut in unique):
            continue
        unique.append((s, t))
    # Regularity: crossing parameters pairwise distinct.
    flat = sorted(x for pair in unique for x in pair)
    for a, b in zip(flat, flat[1:]):
        if abs(_wrap_half(a - b)) < 1e-7:
            return None
    visits = []
    for label, (s, t) in enumerate(sorted(unique), start=1):
        hs = float(curve.evaluate(s) @ d)
        ht = float(curve.evaluate(t) @ d)
        if abs(hs - ht) < 1e-9 * scale:
            return None
        over_s = hs > ht
        t_over = s if over_s else t
        t_under = t if over_s else s
        do = curve.derivative(t_over)
        du = curve.derivative(t_under)
        det = (do @ e1) * (du @ e2) - (do @ e2) * (du @ e1)
        if abs(det) < 1e-9 * np.linalg.norm(do) * np.linalg.norm(du):
            return None  # non-transverse crossing
        sign = 1 if det > 0 else -1
        visits.append((s, label, over_s, sign))
        visits.append((t, label, not over_s, sign))
    visits.sort()
    return GaussCode(tuple((lab, over, sign) for _, lab, over, sign in visits))


def linking_number_by_crossings(k1, k2, direction=(0.015, -0.007, 1.0),
                                grid: int = 1024, max_retries: int = 12) -> int:
    """Signed-crossing-count linking number of a two-component link."""
    direction = np.asarray(direction, dtype=float)
    for attempt in range(max_retries):
        e1, e2, d = _plane_basis(direction)
        total = _try_linking(k1, k2, e1, e2, d, grid)
        if total is not None:
            return total
        angle = 0.17 * (attempt + 1)
        rot = np.array([
            [1.0, 0.0, 0.0],
            [0.0, math.cos(angle), -math.sin(angle)],
            [0.0, math.sin(angle), math.cos(angle)],
        ])
        direction = rot @ direction
    raise ProjectionError("no regular projection found for the link")


def _try_linking(k1, k2, e1, e2, d, grid) -> int | None:
    ts = np.arange(grid) / grid
    p1 = np.atleast_2d(k1.evaluate(ts))
    p2 = np.atleast_2d(k2.evaluate(ts))
    signs = []
    for i, j in _segment_crossing_candidates(p1 @ e1, p1 @ e2, p2 @ e1, p2 @ e2):
        refined = _refine_crossing(k1, k2, e1, e2, ts[i] + 0.5 / grid,
                                   ts[j] + 0.5 / grid)
        if refined is None:
            return None
        s, t = refined
        hs = float(k1.evaluate(s) @ d)
        ht = float(k2.evaluate(t) @ d)
        over_first = hs > ht
        do = k1.derivative(s) if over_first else k2.derivative(t)
        du = k2.derivative(t) if over_first else k1.derivative(s)
        det = (do @ e1) * (du @ e2) - (do @ e2) * (du @ e1)
        if det == 0:
            return None
        signs.append(1 if det > 0 else -1)
    total = sum(signs)
    if total % 2:
        return None  # missed a crossing; inter-component count must be even
    return total // 2
