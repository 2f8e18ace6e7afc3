"""Monte Carlo evaluation of configuration-space integrals.

A degree-n diagram prescribes one sphere-valued direction map per chord
or edge; the integrand is the product of pulled-back unit volume forms,
evaluated as a (k+3s) x (k+3s) determinant of projected differentials
against the coordinate orientation (interval parameters in label order,
then one 3-block per free vertex).

Sampling: knot parameters are drawn uniformly on the cyclic sector
matching the diagram's interval order; free spatial points come from a
radial bijection of the open unit ball onto R^3 with its Jacobian folded
into the importance weight.  Estimates are deterministic per seed and
independent of the worker count: the budget is split into fixed chunks,
each chunk's generator is derived from (seed, chunk index), and partial
sums combine in a fixed pairwise order.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .diagrams import Diagram

FOUR_PI = 4.0 * math.pi
BALL_VOLUME = 4.0 * math.pi / 3.0
DEFAULT_CUTOFF = 1e-9
CHUNK_SIZE = 1 << 16


class DegenerateSampleError(ValueError):
    """Sample violates the configuration invariants beyond the cutoff."""


@dataclass(frozen=True)
class ConfigSample:
    """One configuration: k knot parameters, s free points, sampling weight."""

    knot_params: tuple[float, ...]
    free_points: tuple[tuple[float, float, float], ...]
    weight: float = 1.0

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError("sampling weight must be positive")
        ts = sorted(self.knot_params)
        if any(a == b for a, b in zip(ts, ts[1:])):
            raise ValueError("knot parameters must be pairwise distinct")


@dataclass(frozen=True)
class IntegralEstimate:
    """Monte Carlo estimate with its error, provenance, and seed."""

    value: float
    stderr: float
    samples: int
    seed: int
    diagram: str = ""
    knot: str = ""

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("standard error cannot be negative")

    def to_json_obj(self) -> dict:
        return {
            "diagram": self.diagram,
            "knot": self.knot,
            "value": self.value,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def edge_direction(p, q) -> np.ndarray:
    """Unit vector from p to q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    delta = q - p
    norm = np.linalg.norm(delta)
    if norm == 0.0:
        raise DegenerateSampleError("coincident points have no direction")
    return delta / norm


def _sphere_frames(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right-handed orthonormal tangent frames (f1, f2, with f1 x f2 = h).

    The helper axis is the smallest-magnitude component of h, making the
    frame deterministic and smooth away from a measure-zero set.
    """
    n = h.shape[0]
    axis = np.argmin(np.abs(h), axis=1)
    e = np.zeros_like(h)
    e[np.arange(n), axis] = 1.0
    f1 = np.cross(e, h)
    f1 /= np.linalg.norm(f1, axis=1, keepdims=True)
    f2 = np.cross(h, f1)
    return f1, f2


def _density_batch(
    d: Diagram,
    curve,
    ts: np.ndarray,
    ys: np.ndarray,
    cutoff: float,
) -> np.ndarray:
    """Pullback density for a batch of configurations.

    ts: (N, k) knot parameters; ys: (N, s, 3) free points.  Returns the
    (N,) values of the form against the coordinate volume; samples with
    a pairwise distance under ``cutoff`` yield 0 (rejected).
    """
    n_samples = ts.shape[0]
    k, s = d.k, d.s
    edges = d.edges
    dim = k + 3 * s
    if 2 * len(edges) != dim:
        raise ValueError("form degree does not match fiber dimension")
    if len(set(edges)) != len(edges):
        # A repeated edge wedges a 2-form with itself: identically zero.
        return np.zeros(n_samples)

    pts = np.empty((n_samples, k + s, 3))
    tans = np.empty((n_samples, k, 3))
    for i in range(k):
        pts[:, i] = curve.evaluate(ts[:, i])
        tans[:, i] = curve.derivative(ts[:, i])
    if s:
        pts[:, k:] = ys

    mat = np.zeros((n_samples, dim, dim))
    alive = np.ones(n_samples, dtype=bool)

    def col(v: int) -> slice | int:
        return v - 1 if v <= k else slice(k + 3 * (v - k - 1), k + 3 * (v - k))

    for e_idx, (a, b) in enumerate(edges):
        delta = pts[:, b - 1] - pts[:, a - 1]
        norm = np.linalg.norm(delta, axis=1)
        alive &= norm > cutoff
        safe = np.where(norm > cutoff, norm, 1.0)
        h = delta / safe[:, None]
        f1, f2 = _sphere_frames(h)
        r0, r1 = 2 * e_idx, 2 * e_idx + 1
        for v, orient in ((a, -1.0), (b, 1.0)):
            if v <= k:
                tv = tans[:, v - 1]
                mat[:, r0, v - 1] += orient * np.einsum("nd,nd->n", f1, tv) / safe
                mat[:, r1, v - 1] += orient * np.einsum("nd,nd->n", f2, tv) / safe
            else:
                c = col(v)
                mat[:, r0, c] += orient * f1 / safe[:, None]
                mat[:, r1, c] += orient * f2 / safe[:, None]

    dets = np.linalg.det(mat)
    dets[~alive] = 0.0
    # Fiber orientation: the label-block coordinate order carries the
    # opposite orientation to the one fixing the degree-2 normalization
    # (alternating resolution sum of the crossed-chord integral = +1),
    # hence the global flip.
    return -dets / FOUR_PI ** len(edges)


def pullback_density(d: Diagram, curve, sample: ConfigSample,
                     cutoff: float | None = None) -> float:
    """Density of the diagram's form at one configuration sample."""
    if cutoff is None:
        cutoff = DEFAULT_CUTOFF * curve.diameter()
    ts = np.asarray([sample.knot_params])
    ys = np.asarray([sample.free_points], dtype=float).reshape(1, d.s, 3)
    for y in np.asarray(sample.free_points, dtype=float).reshape(d.s, 3):
        for i in range(d.k):
            if np.linalg.norm(curve.evaluate(ts[0, i]) - y) == 0.0:
                raise DegenerateSampleError("free point on the knot")
    return float(_density_batch(d, curve, ts, ys, cutoff)[0])


# ---------------------------------------------------------------------------
# deterministic chunked estimation


def _chunk_seeds(seed: int, budget: int) -> list[tuple[int, int]]:
    """Fixed chunk layout: (chunk_index, chunk_size) pairs."""
    out = []
    idx = 0
    remaining = budget
    while remaining > 0:
        size = min(CHUNK_SIZE, remaining)
        out.append((idx, size))
        idx += 1
        remaining -= size
    return out


def _tree_sum(values: list):
    """Pairwise combination in a fixed order."""
    items = list(values)
    if not items:
        raise ValueError("nothing to combine")
    while len(items) > 1:
        nxt = []
        for i in range(0, len(items) - 1, 2):
            nxt.append(tuple(x + y for x, y in zip(items[i], items[i + 1])))
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def _run_chunks(
    fn: Callable[[np.random.Generator, int], np.ndarray],
    budget: int,
    seed: int,
    workers: int = 1,
) -> tuple[float, float, int]:
    """Estimate mean(fn) over the budget; returns (mean, stderr, n)."""
    if budget <= 0:
        raise ValueError("sample budget must be positive")
    chunks = _chunk_seeds(seed, budget)

    def one(chunk: tuple[int, int]):
        idx, size = chunk
        rng = np.random.default_rng([seed, idx])
        vals = fn(rng, size)
        return (float(np.sum(vals)), float(np.sum(vals * vals)), size)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(one, chunks))
    else:
        partials = [one(c) for c in chunks]
    total, total_sq, count = _tree_sum(partials)
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    stderr = math.sqrt(var / max(count - 1, 1))
    return mean, stderr, count


# ---------------------------------------------------------------------------
# configuration sampling


def _sample_cyclic_params(rng: np.random.Generator, n: int, k: int,
                          stratify: bool = True) -> np.ndarray:
    """Uniform samples on the cyclic-order sector, shape (n, k).

    Sorted uniforms are assigned to the diagram's interval positions
    with a rotation offset; offsets cycle deterministically over the
    chunk (stratified) so each rotation sector is hit equally.
    """
    u = np.sort(rng.uniform(0.0, 1.0, size=(n, k)), axis=1)
    if k == 1:
        return u
    if stratify:
        offsets = np.arange(n) % k
    else:
        offsets = rng.integers(0, k, size=n)
    cols = (np.arange(k)[None, :] + offsets[:, None]) % k
    return np.take_along_axis(u, cols, axis=1)


def _sample_free_points(rng: np.random.Generator, n: int, s: int,
                        antithetic: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Ball-to-space sampled free points and their importance weights.

    x uniform in the open unit ball maps to y = x / (1 - |x|); the
    density of y is (3/4pi) (1-r)^4, so each point contributes weight
    (4pi/3) / (1-r)^4.
    """
    if s == 0:
        return np.zeros((n, 0, 3)), np.ones(n)
    raw = rng.standard_normal((n, s, 3))
    raw /= np.linalg.norm(raw, axis=2, keepdims=True)
    radii = rng.uniform(0.0, 1.0, size=(n, s)) ** (1.0 / 3.0)
    radii = np.minimum(radii, 1.0 - 1e-12)
    x = raw * radii[:, :, None]
    if antithetic:
        flip = np.arange(n) % 2 == 1
        x[flip] = -x[flip]
    y = x / (1.0 - radii[:, :, None])
    weights = np.prod(BALL_VOLUME / (1.0 - radii) ** 4, axis=1)
    return y, weights


def _ball_density(y: np.ndarray) -> np.ndarray:
    """Density of the radial ball-to-space map at points y (..., 3)."""
    r = np.linalg.norm(y, axis=-1)
    return 3.0 / (FOUR_PI * (1.0 + r) ** 4)


def _sample_free_points_mixture(
    rng: np.random.Generator, n: int, s: int, anchors: np.ndarray,
    radius: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Free points from a ball-map / near-anchor mixture, with weights.

    Half the mass is the radial ball map; the other half splits over the
    anchor points (the sampled knot points), drawing y = anchor + r*u
    with r uniform on (0, radius) so the 1/r^2 density cancels the
    integrand's near-diagonal kernels.
    """
    if s == 0:
        return np.zeros((n, 0, 3)), np.ones(n)
    k = anchors.shape[1]
    comp = rng.integers(0, 2 * k, size=(n, s))
    u = rng.standard_normal((n, s, 3))
    u /= np.linalg.norm(u, axis=2, keepdims=True)
    ball_r = rng.uniform(0.0, 1.0, size=(n, s)) ** (1.0 / 3.0)
    ball_r = np.minimum(ball_r, 1.0 - 1e-12)
    near_r = radius * rng.uniform(1e-12, 1.0, size=(n, s))

    y = np.empty((n, s, 3))
    from_ball = comp < k
    yb = (u * ball_r[:, :, None]) / (1.0 - ball_r[:, :, None])
    anchor_idx = np.where(from_ball, 0, comp - k)
    ya = np.take_along_axis(anchors, anchor_idx.reshape(n, s, 1), axis=1)
    ya = ya + u * near_r[:, :, None]
    y = np.where(from_ball[:, :, None], yb, ya)

    # Mixture density: 1/2 ball + 1/(2k) sum over anchors.
    dens = 0.5 * _ball_density(y)
    for j in range(k):
        d = np.linalg.norm(y - anchors[:, None, j, :], axis=2)
        inside = (d < radius) & (d > 0)
        dens += np.where(
            inside, 0.5 / (k * FOUR_PI * radius * np.where(inside, d, 1.0) ** 2),
            0.0)
    weights = np.prod(1.0 / dens, axis=1)
    return y, weights


def _in_cyclic_sector(ts: np.ndarray) -> np.ndarray:
    """True where the columns of ts are in increasing cyclic order."""
    diffs = (np.roll(ts, -1, axis=1) - ts) % 1.0
    return np.abs(diffs.sum(axis=1) - 1.0) < 1e-9


def make_crossing_focused_sampler(
    k: int,
    chords: Sequence[tuple[int, int]],
    crossings: Sequence[tuple[float, float]],
    eps: float,
    rmax: float = 0.2,
    mix: float = 0.5,
):
    """Parameter proposal concentrating chord pairs at crossing parameters.

    Every assignment of the diagram's chords to the curve's crossing
    parameter pairs (in either strand order) whose center configuration
    lies in the cyclic sector defines a focus region; with probability
    ``mix`` a sample is drawn around a uniformly chosen region with a
    heavy-tailed radial law matching the near-crossing kernel shape.
    Returns a sampler (rng, size) -> (ts, inv_p), or None when no
    assignment is compatible (uniform sampling is adequate then).
    """
    if {p for pr in chords for p in pr} != set(range(1, k + 1)):
        raise ValueError("chords must partition the interval positions")
    if len(chords) != len(crossings):
        raise ValueError("need one crossing parameter pair per chord")
    n = len(chords)
    regions = []
    for assignment in itertools.permutations(range(n)):
        for flips in itertools.product((0, 1), repeat=n):
            center = np.zeros(k)
            for i, (p, q) in enumerate(chords):
                a, b = crossings[assignment[i]]
                if flips[i]:
                    a, b = b, a
                center[p - 1] = a
                center[q - 1] = b
            if _in_cyclic_sector(center[None, :])[0]:
                regions.append(center)
    if not regions:
        return None
    centers = np.stack(regions)  # (R, k)
    n_regions = len(regions)
    z_norm = 1.0 - eps / math.sqrt(rmax * rmax + eps * eps)
    sector_pdf = float(math.factorial(max(k - 1, 0)))

    def q2(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        r2 = u * u + v * v
        out = eps / (2.0 * math.pi * z_norm * (r2 + eps * eps) ** 1.5)
        return np.where(r2 <= rmax * rmax, out, 0.0)

    def sampler(rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
        focused = rng.uniform(0.0, 1.0, size) < mix
        region_idx = rng.integers(0, n_regions, size)
        ts = _sample_cyclic_params(rng, size, k)
        u_draw = rng.uniform(0.0, 1.0, (size, n))
        theta = rng.uniform(0.0, 2.0 * math.pi, (size, n))
        radii = eps * np.sqrt(1.0 / (1.0 - u_draw * z_norm) ** 2 - 1.0)
        mu = centers[region_idx]  # (size, k)
        for i, (p, q) in enumerate(chords):
            du = radii[:, i] * np.cos(theta[:, i])
            dv = radii[:, i] * np.sin(theta[:, i])
            ts[focused, p - 1] = (mu[focused, p - 1] + du[focused]) % 1.0
            ts[focused, q - 1] = (mu[focused, q - 1] + dv[focused]) % 1.0
        in_sector = _in_cyclic_sector(ts)
        p_focus = np.zeros(size)
        for center in centers:
            prod = np.ones(size)
            for p, q in chords:
                du = (ts[:, p - 1] - center[p - 1] + 0.5) % 1.0 - 0.5
                dv = (ts[:, q - 1] - center[q - 1] + 0.5) % 1.0 - 0.5
                prod *= q2(du, dv)
            p_focus += prod / n_regions
        p = (1.0 - mix) * sector_pdf * in_sector + mix * p_focus
        inv_p = np.where(in_sector & (p > 0.0), 1.0 / np.where(p > 0, p, 1.0), 0.0)
        return ts, inv_p

    return sampler


def ball_weight_check(rng: np.random.Generator, n: int,
                      box=((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0))) -> np.ndarray:
    """Indicator-of-box integrand for the change-of-variables test."""
    y, w = _sample_free_points(rng, n, 1)
    y = y[:, 0, :]
    inside = np.ones(n, dtype=bool)
    for axis, (lo, hi) in enumerate(box):
        inside &= (y[:, axis] >= lo) & (y[:, axis] <= hi)
    return inside * w


# ---------------------------------------------------------------------------
# the integrals


def integrate(
    d: Diagram,
    curve,
    budget: int,
    seed: int,
    workers: int = 1,
    cutoff: float = DEFAULT_CUTOFF,
    antithetic: bool = False,
    importance: bool = True,
    knot_id: str = "",
) -> IntegralEstimate:
    """Fiber integral of the diagram's form over the cyclic sector.

    The knot parameters run over configurations matching the diagram's
    interval order read cyclically (sector volume 1/(k-1)!).  With
    ``importance`` (default), free points are drawn from a mixture that
    concentrates near the sampled knot points, cancelling the integrand's
    near-diagonal kernels; ``antithetic`` switches to plain ball sampling
    with mirrored pairs.
    """
    est = integrate_combination(((1.0, d, curve),), budget, seed,
                                workers=workers, cutoff=cutoff,
                                antithetic=antithetic, importance=importance)
    return IntegralEstimate(est.value, est.stderr, est.samples, seed,
                            diagram=d.to_text(), knot=knot_id)


def integrate_combination(
    terms: Sequence[tuple[float, Diagram, object]],
    budget: int,
    seed: int,
    workers: int = 1,
    cutoff: float = DEFAULT_CUTOFF,
    antithetic: bool = False,
    importance: bool = True,
    param_sampler=None,
) -> IntegralEstimate:
    """Signed combination of same-shape diagram integrals on shared samples.

    All diagrams must share (k, s) and interval order semantics; the
    curves may differ (e.g. skein resolutions), in which case the common
    samples make locally agreeing curves cancel pointwise, which is what
    keeps alternating resolution sums estimable.
    """
    if budget <= 0:
        raise ValueError("sample budget must be positive")
    shapes = {(d.k, d.s) for _, d, _ in terms}
    if len(shapes) != 1:
        raise ValueError("combined diagrams must share (k, s)")
    (k, s), = shapes
    for _, d, _ in terms:
        if 2 * len(d.edges) != d.k + 3 * d.s:
            raise ValueError("form degree does not match fiber dimension")
    curves = [c for _, _, c in terms]
    diam = max(c.diameter() for c in curves)
    abs_cutoff = cutoff * diam
    sector = 1.0 / math.factorial(max(k - 1, 0))
    lead = curves[0]

    def fn(rng: np.random.Generator, size: int) -> np.ndarray:
        if param_sampler is not None:
            ts, inv_p = param_sampler(rng, size)
        else:
            ts = _sample_cyclic_params(rng, size, k)
            inv_p = sector
        if s and importance and not antithetic:
            anchors = np.stack([lead.evaluate(ts[:, i]) for i in range(k)],
                               axis=1)
            ys, w = _sample_free_points_mixture(rng, size, s, anchors, diam)
        else:
            ys, w = _sample_free_points(rng, size, s, antithetic=antithetic)
        out = np.zeros(size)
        for coef, d, curve in terms:
            out += coef * _density_batch(d, curve, ts, ys, abs_cutoff)
        return out * w * inv_p

    mean, stderr, count = _run_chunks(fn, budget, seed, workers)
    return IntegralEstimate(mean, stderr, count, seed,
                            diagram=";".join(d.to_text() for _, d, _ in terms),
                            knot="combination")


def linking_integral(
    k1, k2, budget: int, seed: int, workers: int = 1,
    cutoff: float = DEFAULT_CUTOFF,
) -> IntegralEstimate:
    """Degree of the normalized difference map of a two-component link."""
    scale = max(k1.diameter(), k2.diameter())
    ts_check = np.arange(512) / 512
    p1 = k1.evaluate(ts_check)
    p2 = k2.evaluate(ts_check)
    min_d = np.inf
    for start in range(0, 512, 64):
        block = p1[start:start + 64]
        min_d = min(min_d, float(np.linalg.norm(
            block[:, None, :] - p2[None, :, :], axis=2).min()))
    if min_d <= 1e-6 * scale:
        raise ValueError("link components intersect at grid resolution")
    abs_cutoff = cutoff * scale

    def fn(rng: np.random.Generator, size: int) -> np.ndarray:
        t1 = rng.uniform(0.0, 1.0, size)
        t2 = rng.uniform(0.0, 1.0, size)
        a = k1.evaluate(t1)
        b = k2.evaluate(t2)
        da = k1.derivative(t1)
        db = k2.derivative(t2)
        delta = b - a
        norm = np.linalg.norm(delta, axis=1)
        safe = np.where(norm > abs_cutoff, norm, 1.0)
        dens = -np.einsum("nd,nd->n", np.cross(da, db), delta)
        dens /= FOUR_PI * safe ** 3
        dens[norm <= abs_cutoff] = 0.0
        return dens

    mean, stderr, count = _run_chunks(fn, budget, seed, workers)
    return IntegralEstimate(mean, stderr, count, seed,
                            diagram="linking", knot="link")


ONE_CHORD = Diagram(2, 0, ((1, 2),))


def self_link_integral(
    curve, budget: int, seed: int, workers: int = 1,
    cutoff: float = DEFAULT_CUTOFF, knot_id: str = "",
) -> IntegralEstimate:
    """Gauss self-linking integral over the two-point configuration space."""
    est = integrate(ONE_CHORD, curve, budget, seed, workers=workers,
                    cutoff=cutoff, knot_id=knot_id)
    return IntegralEstimate(est.value, est.stderr, est.samples, seed,
                            diagram="self-linking", knot=knot_id)
