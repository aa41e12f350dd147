#!/usr/bin/env python3
"""
Half-plane Gaussian free field on a finite point cloud.

The field X takes values in the Cartan subalgebra; it is stored through its
root pairings <e_1, X>, <e_2, X> with covariance A_ij G(x, y), A the Cartan
matrix. Two independent scalar fields with covariance G are mixed by the
Cholesky factor of A.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import linalg

from ..config import settings
from ..symbolic.algebra import CARTAN
from ..utils.errors import ConfigError, NumericError
from ..utils.logging import get_logger

logger = get_logger(__name__)

CARTAN_FACTOR = np.linalg.cholesky(CARTAN)
INVERSE_CARTAN = np.linalg.inv(CARTAN)

RngLike = Union[None, int, np.random.Generator]


def plus_norm(x) -> np.ndarray:
    """|x|_+ = max(|x|, 1)."""
    return np.maximum(np.abs(x), 1.0)


def green(x: complex, y: complex) -> float:
    """G(x, y) = ln 1/(|x - y| |x - conj(y)|) + 2 ln|x|_+ + 2 ln|y|_+.

    Raises:
        NumericError: if the points coincide
    """
    x = complex(x)
    y = complex(y)
    if x == y:
        raise NumericError(f"green() needs distinct points, got {x} twice")
    return float(-np.log(abs(x - y)) - np.log(abs(x - y.conjugate()))
                 + 2 * np.log(plus_norm(x)) + 2 * np.log(plus_norm(y)))


def green_matrix(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Exact kernel between two disjoint point sets, shape (len(xs), len(ys))."""
    xs = np.asarray(xs, dtype=complex)[:, None]
    ys = np.asarray(ys, dtype=complex)[None, :]
    direct = np.abs(xs - ys)
    if np.any(direct == 0):
        raise NumericError("green_matrix() received coincident points")
    return (-np.log(direct) - np.log(np.abs(xs - np.conj(ys)))
            + 2 * np.log(plus_norm(xs)) + 2 * np.log(plus_norm(ys)))


def green_regularized(xs: np.ndarray, ys: np.ndarray, r: float) -> np.ndarray:
    """Kernel with both distances floored at r; finite on the diagonal."""
    if r <= 0:
        raise ConfigError(f"Regularization scale must be positive, got {r}")
    xs = np.asarray(xs, dtype=complex)[:, None]
    ys = np.asarray(ys, dtype=complex)[None, :]
    direct = np.maximum(np.abs(xs - ys), r)
    reflected = np.maximum(np.abs(xs - np.conj(ys)), r)
    return (-np.log(direct) - np.log(reflected)
            + 2 * np.log(plus_norm(xs)) + 2 * np.log(plus_norm(ys)))


def regularized_variance(xs: np.ndarray, r: float) -> np.ndarray:
    """Diagonal of ``green_regularized``."""
    xs = np.asarray(xs, dtype=complex)
    return (-np.log(r) - np.log(np.maximum(2 * np.abs(xs.imag), r))
            + 4 * np.log(plus_norm(xs)))


@dataclass(frozen=True)
class PointCloud:
    """Quadrature nodes of the truncated domains.

    Bulk nodes are cell centres of [-R, R] x [delta, R] away from the bulk
    insertions; boundary nodes are cell centres of [-R, R] away from the
    boundary insertions. ``extra`` holds points where the field is sampled
    without carrying chaos mass (derivative stencils).
    """

    bulk: np.ndarray
    bulk_weights: np.ndarray
    boundary: np.ndarray
    boundary_weights: np.ndarray
    boundary_arcs: np.ndarray
    extra: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    @classmethod
    def build(cls, bulk_points: Sequence[complex], boundary_points: Sequence[float],
              grid: Sequence[int] = settings.DEFAULT_BULK_GRID,
              n_boundary: int = settings.DEFAULT_BOUNDARY_POINTS,
              delta: float = settings.DEFAULT_DELTA,
              epsilon: float = settings.DEFAULT_EPSILON,
              radius: float = settings.DEFAULT_BOX_RADIUS) -> "PointCloud":
        """Lay out the midpoint grids and drop nodes inside the exclusion zones.

        Raises:
            NumericError: if no bulk node survives the exclusions
        """
        nx, ny = grid
        dx = 2 * radius / nx
        dy = (radius - delta) / ny
        xs = -radius + (np.arange(nx) + 0.5) * dx
        ys = delta + (np.arange(ny) + 0.5) * dy
        centres = (xs[None, :] + 1j * ys[:, None]).ravel()
        insertions = np.asarray(bulk_points, dtype=complex)
        keep = np.ones(centres.shape, dtype=bool)
        if insertions.size:
            keep = np.min(np.abs(centres[:, None] - insertions[None, :]), axis=1) >= epsilon
        bulk = centres[keep]
        if bulk.size == 0:
            raise NumericError("No bulk quadrature node survives the exclusions")

        db = 2 * radius / n_boundary
        line = -radius + (np.arange(n_boundary) + 0.5) * db
        marks = np.sort(np.asarray(boundary_points, dtype=float))
        keep_line = np.ones(line.shape, dtype=bool)
        if marks.size:
            keep_line = np.min(np.abs(line[:, None] - marks[None, :]), axis=1) >= epsilon
        line = line[keep_line]
        arcs = np.searchsorted(marks, line)
        if marks.size:
            arcs = np.where(arcs == marks.size, 0, arcs)
        logger.debug(f"Point cloud: {bulk.size} bulk nodes, {line.size} boundary nodes")
        return cls(
            bulk=bulk,
            bulk_weights=np.full(bulk.size, dx * dy),
            boundary=line,
            boundary_weights=np.full(line.size, db),
            boundary_arcs=arcs.astype(int),
        )

    @property
    def n_bulk(self) -> int:
        return int(self.bulk.size)

    @property
    def n_boundary(self) -> int:
        return int(self.boundary.size)

    @property
    def size(self) -> int:
        return self.n_bulk + self.n_boundary + int(self.extra.size)

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([self.bulk, self.boundary.astype(complex), self.extra.astype(complex)])

    def with_extra(self, points: Sequence[complex]) -> "PointCloud":
        return replace(self, extra=np.asarray(points, dtype=complex))

    def mapped(self, psi: Callable[[np.ndarray], np.ndarray],
               dpsi: Callable[[np.ndarray], np.ndarray]) -> "PointCloud":
        """Push the nodes through a real Moebius map, carrying cell sizes by |psi'|^2 and |psi'|.

        Raises:
            NumericError: if a node is sent to infinity
        """
        bulk = psi(self.bulk)
        line = psi(self.boundary.astype(complex))
        extra = psi(self.extra) if self.extra.size else self.extra
        if not (np.all(np.isfinite(bulk)) and np.all(np.isfinite(line)) and np.all(np.isfinite(extra))):
            raise NumericError("Moebius map sends a quadrature node to infinity")
        return PointCloud(
            bulk=bulk,
            bulk_weights=self.bulk_weights * np.abs(dpsi(self.bulk)) ** 2,
            boundary=line.real,
            boundary_weights=self.boundary_weights * np.abs(dpsi(self.boundary.astype(complex))),
            boundary_arcs=self.boundary_arcs,
            extra=extra,
        )


@dataclass(frozen=True)
class CovarianceOperator:
    """Regularized kernel on a cloud with a jittered Cholesky factor."""

    matrix: np.ndarray
    factor: np.ndarray
    jitter: float
    residual: float

    @classmethod
    def factorize(cls, matrix: np.ndarray, start: float = settings.JITTER_START,
                  growth: float = settings.JITTER_GROWTH, cap: float = settings.JITTER_CAP,
                  tolerance: float = settings.FACTORIZATION_TOLERANCE) -> "CovarianceOperator":
        """Cholesky of matrix + jitter*I with jitter escalating from start*max(diag).

        Raises:
            NumericError: if the jitter passes cap*max(diag) or the residual is too large
        """
        matrix = np.asarray(matrix, dtype=float)
        scale = float(np.max(np.abs(np.diag(matrix)))) or 1.0
        jitter = start * scale
        identity = np.eye(matrix.shape[0])
        while True:
            try:
                factor = linalg.cholesky(matrix + jitter * identity, lower=True)
                break
            except linalg.LinAlgError:
                jitter *= growth
                if jitter > cap * scale:
                    logger.error(f"Cholesky failed up to jitter {jitter / growth:.3e}")
                    raise NumericError(f"Covariance factorization needs jitter above the cap {cap * scale:.3e}")
        if jitter > start * scale:
            logger.warning(f"Covariance factorization escalated jitter to {jitter:.3e}")
        residual = float(np.max(np.abs(factor @ factor.T - (matrix + jitter * identity))))
        if residual > tolerance * scale:
            raise NumericError(f"Factorization residual {residual:.3e} above tolerance")
        return cls(matrix=matrix, factor=factor, jitter=jitter, residual=residual)

    @classmethod
    def from_points(cls, points: np.ndarray, regularization: float) -> "CovarianceOperator":
        points = np.asarray(points, dtype=complex)
        return cls.factorize(green_regularized(points, points, regularization))

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])

    def apply(self, normals: np.ndarray) -> np.ndarray:
        """Map standard normals of shape (draws, 2, n) to root pairings of shape (draws, n, 2)."""
        scalar_fields = normals @ self.factor.T
        return np.einsum("ij,djn->dni", CARTAN_FACTOR, scalar_fields)


def resolve_rng(seed: RngLike) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def standard_normals(rng: np.random.Generator, draws: int, size: int) -> np.ndarray:
    return rng.standard_normal((draws, 2, size))


def sample_field(cloud: PointCloud, cov: CovarianceOperator, seed: RngLike = None,
                 draws: Optional[int] = None) -> np.ndarray:
    """Draw root pairings <e_i, X(x)> on every cloud point.

    Args:
        cloud: Points the covariance was built on
        cov: Factorized covariance over ``cloud.points``
        seed: Integer seed or an existing Generator
        draws: Number of independent fields; a single (n, 2) array when omitted

    Returns:
        Array of shape (n, 2), or (draws, n, 2)
    """
    if cov.size != cloud.size:
        raise ConfigError(f"Covariance has {cov.size} points, cloud has {cloud.size}")
    rng = resolve_rng(seed)
    values = cov.apply(standard_normals(rng, draws or 1, cov.size))
    return values if draws is not None else values[0]


def root_pairings_to_coords(pairings: np.ndarray) -> np.ndarray:
    """Simple-root coordinates (<omega_1, X>, <omega_2, X>) from root pairings."""
    return pairings @ INVERSE_CARTAN
