"""Euclidean kernel in R^K: sphere intersection, hyperplane reflection,
simplex volumes and orientation.

Everything is dimension generic for 1 <= K <= 16 and runs in double
precision on plain numpy arrays.  Points are length-K vectors; batched
inputs stack them along the leading axis.  All functions are pure, so they
are safe to call from any number of threads.

The intersection of K spheres with affinely independent centers is computed
by splitting R^K into the centers' hull directions plus the hull normal:
the K-1 difference-of-spheres equations fix the in-hull component through a
small Gram system, and the remaining quadratic along the normal yields a
discriminant that classifies the result as two points, one (tangent) point,
or none.  The normal is obtained as the generalized cross product of the
center differences, which also supplies the degeneracy measure and a
canonical orientation for free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_DIMENSION = 16


class GeometryError(ValueError):
    """Base class for geometric failures."""


class DegenerateCenters(GeometryError):
    """Sphere centers (or hull points) are affinely dependent within tolerance."""


class NegativeCayleyMenger(GeometryError):
    """The distance matrix is not realizable in the target dimension."""


@dataclass(frozen=True)
class ToleranceConfig:
    """Numeric tolerances shared across the package.

    geometry     residual allowed on exact geometric identities
    degeneracy   minimum simplex volume treated as nondegenerate
    disc         half-width of the tangency band for the discriminant
    prune_abs    absolute slack for pruning-distance checks
    prune_rel    relative slack, scaled by the edge distance
    cluster_rel  relative width used when clustering equal distances
    """

    geometry: float = 1e-8
    degeneracy: float = 1e-10
    disc: float = 1e-10
    prune_abs: float = 1e-6
    prune_rel: float = 1e-6
    cluster_rel: float = 1e-9

    def __post_init__(self):
        for name in ("geometry", "degeneracy", "disc", "prune_abs",
                     "prune_rel", "cluster_rel"):
            if getattr(self, name) < 0:
                raise ValueError(f"tolerance {name} must be >= 0")


DEFAULT_TOL = ToleranceConfig()


def _check_dimension(k: int) -> None:
    if not 1 <= k <= MAX_DIMENSION:
        raise GeometryError(f"dimension K={k} outside supported range "
                            f"1..{MAX_DIMENSION}")


@dataclass(frozen=True)
class SphereSystem:
    """K spheres in R^K given as a (K, K) center matrix and K radii.

    Radii must be strictly positive: zero-radius spheres only occur when
    checking a finished embedding, never while branching, and distance
    checks there are done directly on norms.
    """

    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        radii = np.asarray(self.radii, dtype=float)
        if centers.ndim != 2 or centers.shape[0] != centers.shape[1]:
            raise GeometryError("centers must be a square (K, K) matrix")
        _check_dimension(centers.shape[0])
        if radii.shape != (centers.shape[0],):
            raise GeometryError("need exactly one radius per center")
        if not np.all(np.isfinite(centers)) or not np.all(np.isfinite(radii)):
            raise GeometryError("centers and radii must be finite")
        if np.any(radii <= 0):
            raise GeometryError("sphere radii must be strictly positive")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    @property
    def dimension(self) -> int:
        return self.centers.shape[0]


@dataclass(frozen=True)
class AffineHull:
    """Hyperplane through K affinely independent points: {x : normal.x = offset}."""

    base: np.ndarray
    normal: np.ndarray
    offset: float


def _cofactor_normal(diffs: np.ndarray) -> np.ndarray:
    """Generalized cross product of the rows of each (K-1, K) block.

    Returns g with det(w_1, ..., w_{K-1}, x) = g . x for every x.  |g| is
    the (K-1)-parallelotope volume of the rows, so it doubles as the
    degeneracy measure, and appending g itself always yields a positively
    oriented frame.
    """
    m, km1, k = diffs.shape
    if k == 1:
        return np.ones((m, 1))
    if k == 2:
        w = diffs[:, 0, :]
        return np.stack([-w[:, 1], w[:, 0]], axis=1)
    if k == 3:
        return np.cross(diffs[:, 0, :], diffs[:, 1, :])
    cof = np.empty((m, k))
    cols = np.arange(k)
    for i in range(k):
        minor = diffs[:, :, cols != i]
        cof[:, i] = ((-1.0) ** (k + i + 1)) * np.linalg.det(minor)
    return cof


def _solve_in_hull(w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve the (K-1) x (K-1) Gram system G a = b and return a @ w.

    w has shape (m, K-1, K); closed forms for K <= 3 keep the hot path free
    of per-item LAPACK calls.
    """
    k = w.shape[2]
    if k == 1:
        return np.zeros((w.shape[0], 1))
    if k == 2:
        g11 = np.einsum("mk,mk->m", w[:, 0], w[:, 0])
        alpha = b[:, 0] / g11
        return alpha[:, None] * w[:, 0]
    if k == 3:
        w1, w2 = w[:, 0], w[:, 1]
        g11 = np.einsum("mk,mk->m", w1, w1)
        g12 = np.einsum("mk,mk->m", w1, w2)
        g22 = np.einsum("mk,mk->m", w2, w2)
        det = g11 * g22 - g12 * g12
        a1 = (b[:, 0] * g22 - b[:, 1] * g12) / det
        a2 = (b[:, 1] * g11 - b[:, 0] * g12) / det
        return a1[:, None] * w1 + a2[:, None] * w2
    gram = w @ np.swapaxes(w, 1, 2)
    alpha = np.linalg.solve(gram, b[..., None])[..., 0]
    return np.einsum("mi,mik->mk", alpha, w)


def intersect_batch(centers: np.ndarray, radii: np.ndarray,
                    tol: ToleranceConfig = DEFAULT_TOL):
    """Intersect many K-sphere systems at once.

    Parameters
    ----------
    centers : (m, K, K) array
        Row i of each block is the i-th sphere center.
    radii : (K,) or (m, K) array
        Sphere radii, shared across the batch or given per system.
    tol : ToleranceConfig

    Returns
    -------
    points : (m, 2, K) array
        points[:, 0] lies on the positive side of the centers' hull (the
        side where appending the point to the centers gives orientation +1),
        points[:, 1] on the negative side.  For tangent systems both rows
        coincide; rows for empty intersections are unspecified.
    kind : (m,) int array
        Number of intersection points: 2, 1 (tangent) or 0.

    Raises
    ------
    DegenerateCenters
        If any system's centers are affinely dependent within
        tol.degeneracy (measured as the (K-1)-simplex volume).
    """
    centers = np.asarray(centers, dtype=float)
    m, k, _ = centers.shape
    radii = np.broadcast_to(np.asarray(radii, dtype=float), (m, k))
    c0 = centers[:, 0, :]
    w = centers[:, 1:, :] - c0[:, None, :]
    cof = _cofactor_normal(w)
    area = np.linalg.norm(cof, axis=1)
    if np.any(area <= tol.degeneracy * math.factorial(k - 1)):
        raise DegenerateCenters(
            "sphere centers are affinely dependent within tolerance")
    normal = cof / area[:, None]
    b = 0.5 * (radii[:, :1] ** 2 - radii[:, 1:] ** 2
               + np.einsum("mik,mik->mi", w, w))
    in_hull = _solve_in_hull(w, b)
    disc = radii[:, 0] ** 2 - np.einsum("mk,mk->m", in_hull, in_hull)
    kind = np.where(disc > tol.disc, 2,
                    np.where(disc >= -tol.disc, 1, 0)).astype(np.int8)
    height = np.sqrt(np.maximum(disc, 0.0))
    height[kind == 1] = 0.0
    foot = c0 + in_hull
    offset = height[:, None] * normal
    points = np.stack([foot + offset, foot - offset], axis=1)
    return points, kind


def intersect_k_spheres(system: SphereSystem,
                        tol: ToleranceConfig = DEFAULT_TOL) -> tuple:
    """Intersect the K spheres of `system`.

    Returns a tuple of 0, 1 or 2 points; with two points the one on the
    positive side of the centers' hull comes first.  Each returned point p
    satisfies | ||p - c_i|| - r_i | <= tol.geometry.
    """
    points, kind = intersect_batch(system.centers[None], system.radii[None],
                                   tol)
    n = int(kind[0])
    if n == 0:
        return ()
    if n == 1:
        return (points[0, 0],)
    return (points[0, 0], points[0, 1])


def hull_of(points: np.ndarray,
            tol: ToleranceConfig = DEFAULT_TOL) -> AffineHull:
    """Hyperplane through K affinely independent points of R^K."""
    points = np.asarray(points, dtype=float)
    k = points.shape[1]
    _check_dimension(k)
    if points.shape != (k, k):
        raise GeometryError("a hull in R^K needs exactly K points")
    diffs = (points[1:] - points[0])[None]
    cof = _cofactor_normal(diffs)[0]
    area = np.linalg.norm(cof)
    if area <= tol.degeneracy * math.factorial(k - 1):
        raise DegenerateCenters("hull points are affinely dependent")
    normal = cof / area
    return AffineHull(base=points[0].copy(), normal=normal,
                      offset=float(normal @ points[0]))


def reflect_points(hull: AffineHull, targets: np.ndarray) -> np.ndarray:
    """Mirror one point or a stack of points through `hull`."""
    targets = np.asarray(targets, dtype=float)
    heights = (targets - hull.base) @ hull.normal
    return targets - 2.0 * np.multiply.outer(heights, hull.normal)


def reflect_through_hull(points: np.ndarray, target: np.ndarray,
                         tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Mirror `target` through the hyperplane spanned by K points.

    The reflection is an involution and preserves the distance from the
    target to every hull point.
    """
    return reflect_points(hull_of(points, tol), np.asarray(target, float))


def simplex_volume(points: np.ndarray) -> float:
    """(m-1)-dimensional volume of the simplex on m coordinate points.

    Positive iff the points are affinely independent; 2 <= m <= K + 1.
    """
    points = np.asarray(points, dtype=float)
    m, k = points.shape
    _check_dimension(k)
    if not 2 <= m <= k + 1:
        raise GeometryError(f"need 2..K+1 points, got {m} in R^{k}")
    w = points[1:] - points[0]
    gram = w @ w.T
    det = float(np.linalg.det(gram))
    return math.sqrt(max(det, 0.0)) / math.factorial(m - 1)


def cayley_menger_volume(distances: np.ndarray) -> float:
    """(m-1)-dimensional simplex volume from an m x m distance matrix.

    Raises NegativeCayleyMenger when the distances cannot be realized by m
    points in R^(m-1) (squared volume significantly below zero).
    """
    d = np.asarray(distances, dtype=float)
    m = d.shape[0]
    if d.shape != (m, m) or m < 2:
        raise GeometryError("distance matrix must be square, m >= 2")
    if np.any(np.abs(np.diagonal(d)) > 0) or not np.allclose(d, d.T):
        raise GeometryError("distance matrix must be symmetric with zero "
                            "diagonal")
    bordered = np.ones((m + 1, m + 1))
    bordered[0, 0] = 0.0
    bordered[1:, 1:] = d ** 2
    det = float(np.linalg.det(bordered))
    vol_sq = ((-1.0) ** m) * det / (2 ** (m - 1) * math.factorial(m - 1) ** 2)
    scale = max(1.0, float(np.max(d))) ** (2 * (m - 1))
    if vol_sq < -1e-9 * scale:
        raise NegativeCayleyMenger(
            f"distance matrix not realizable in R^{m - 1} "
            f"(squared volume {vol_sq:.3e})")
    return math.sqrt(max(vol_sq, 0.0))


def signed_simplex_orientation(points: np.ndarray,
                               tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Orientation of K+1 points in R^K: sign of det(p_i - p_0).

    Returns +1, -1, or 0 when |det| <= tol.degeneracy.
    """
    points = np.asarray(points, dtype=float)
    k = points.shape[1]
    _check_dimension(k)
    if points.shape != (k + 1, k):
        raise GeometryError("orientation needs exactly K+1 points in R^K")
    det = float(np.linalg.det(points[1:] - points[0]))
    if abs(det) <= tol.degeneracy:
        return 0
    return 1 if det > 0 else -1
