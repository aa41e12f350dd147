#!/usr/bin/env python3
"""
Monte Carlo estimation of regularized boundary Toda correlators.

Correlators are computed in the Girsanov-shifted representation: the vertex
insertions become a deterministic prefactor and a shift H of the field, the
chaos measures become cell sums of exactly normalized exponentials on a point
cloud, and the zero mode factorizes over the two fundamental-weight
directions into one-dimensional integrals evaluated per sample.

Chains draw from generators spawned off one master seed and run on a thread
pool; results are merged in chain order so estimates are bit-reproducible.
"""

import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special, stats

from ..config import settings
from ..symbolic import algebra
from ..symbolic.algebra import CARTAN, Weight
from ..symbolic.descendants import DerivativeCovariance, stress_tensor, wick_expand
from ..symbolic.symrat import numeric_function, probe
from ..utils.errors import ConfigError, NeutralityError, NumericError, SeibergError
from ..utils.logging import get_logger
from ..utils.report_io import decode_rational
from ..verification.freefield import (
    BulkInsertion, InsertionConfig, config_from_weights, eval_ff, symbolic_context,
)
from .gaussian_field import (
    CovarianceOperator, PointCloud, green, green_matrix, plus_norm, regularized_variance,
    root_pairings_to_coords, standard_normals,
)

logger = get_logger(__name__)

# Stencils for the boundary derivative d = (1/2) d/dx on the points (t-h, t, t+h)
FIRST_STENCIL = np.array([-1.0, 0.0, 1.0])
SECOND_STENCIL = np.array([1.0, -2.0, 1.0])


@dataclass(frozen=True)
class McParams:
    """Regularization, quadrature and sampling parameters of the numeric engine."""

    samples: int = settings.DEFAULT_SAMPLES
    seed: int = settings.DEFAULT_SEED
    chains: int = settings.DEFAULT_CHAINS
    bulk_grid: Tuple[int, int] = settings.DEFAULT_BULK_GRID
    boundary_points: int = settings.DEFAULT_BOUNDARY_POINTS
    delta: float = settings.DEFAULT_DELTA
    epsilon: float = settings.DEFAULT_EPSILON
    regularization: float = settings.DEFAULT_REGULARIZATION
    box_radius: float = settings.DEFAULT_BOX_RADIUS
    zero_mode_points: int = settings.DEFAULT_ZERO_MODE_POINTS
    zero_mode_radius: float = settings.DEFAULT_ZERO_MODE_RADIUS
    tail_tolerance: float = settings.DEFAULT_TAIL_TOLERANCE
    batch_size: int = settings.DEFAULT_BATCH_SIZE

    def __post_init__(self):
        for name in ("samples", "chains", "boundary_points", "zero_mode_points", "batch_size"):
            if int(getattr(self, name)) <= 0:
                raise ConfigError(f"McParams.{name} must be positive, got {getattr(self, name)}")
        for name in ("delta", "epsilon", "regularization", "box_radius", "zero_mode_radius", "tail_tolerance"):
            if not float(getattr(self, name)) > 0:
                raise ConfigError(f"McParams.{name} must be positive, got {getattr(self, name)}")
        if len(self.bulk_grid) != 2 or min(self.bulk_grid) <= 0:
            raise ConfigError(f"McParams.bulk_grid must be two positive sizes, got {self.bulk_grid}")
        if self.samples < self.chains:
            raise ConfigError(f"Need at least one sample per chain ({self.samples} < {self.chains})")
        if self.seed < 0:
            raise ConfigError(f"Seed must be non-negative, got {self.seed}")
        if self.delta >= self.box_radius:
            raise ConfigError("delta must be smaller than the box radius")

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["bulk_grid"] = list(self.bulk_grid)
        return out

    @property
    def lattice_spacing(self) -> float:
        return 2 * self.box_radius / self.boundary_points


@dataclass
class Estimate:
    """Monte Carlo value with its standard error and per-chain breakdown.

    ``value`` and ``stderr`` are scalars, or arrays of two components for
    vector-valued estimators. ``terms`` holds the auxiliary estimator terms
    computed from the same samples.
    """

    value: Any
    stderr: Any
    ess: float
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    chain_means: np.ndarray = field(default_factory=lambda: np.zeros(0))
    chain_stderr: np.ndarray = field(default_factory=lambda: np.zeros(0))
    terms: Dict[str, "Estimate"] = field(default_factory=dict)

    @classmethod
    def from_chains(cls, chains: Sequence[np.ndarray], complex_valued: bool,
                    diagnostics: Optional[Dict[str, Any]] = None) -> "Estimate":
        counts = np.array([len(c) for c in chains], dtype=float)
        total = counts.sum()
        means = np.stack([np.mean(c, axis=0) for c in chains])
        value = np.tensordot(counts, means, axes=1) / total
        pooled = np.concatenate(chains)
        if total > 1:
            variance = np.var(pooled.real, axis=0, ddof=1) + np.var(pooled.imag, axis=0, ddof=1)
        else:
            variance = np.zeros(np.shape(value))
        stderr = np.sqrt(variance / total)
        chain_stderr = np.stack([np.sqrt(variance / n) for n in counts])
        if len(chains) > 1:
            spread = np.var(means.real, axis=0, ddof=1) + np.var(means.imag, axis=0, ddof=1)
            between = np.sqrt(spread / len(chains))
        else:
            between = stderr
        between_max = float(np.max(between))
        ess = float(total) if between_max == 0 else float(min(total, np.max(variance) / between_max ** 2))
        if not complex_valued:
            value = np.real(value)
            means = np.real(means)
        diagnostics = dict(diagnostics or {})
        diagnostics["samples"] = int(total)
        diagnostics["chains"] = len(chains)
        diagnostics["between_chain_stderr"] = _scalarize(between)
        return cls(_scalarize(value), _scalarize(stderr), ess, diagnostics, means, chain_stderr)

    @classmethod
    def exact_zero(cls, shape: Tuple[int, ...], chains: int, diagnostics: Optional[Dict[str, Any]] = None) -> "Estimate":
        zeros = np.zeros(shape)
        return cls(_scalarize(zeros), _scalarize(zeros), float("inf"), dict(diagnostics or {}),
                   np.zeros((chains,) + shape), np.zeros((chains,) + shape))

    def magnitude(self) -> np.ndarray:
        return np.abs(np.asarray(self.value))

    def compatible_with_zero(self, multiplier: float = settings.STDERR_MULTIPLIER,
                             atol: Any = 0.0) -> bool:
        """|value| <= max(multiplier * stderr, atol) in every component."""
        bound = np.maximum(multiplier * np.asarray(self.stderr), np.asarray(atol))
        return bool(np.all(self.magnitude() <= bound))

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "value": _plain(self.value),
            "stderr": _plain(self.stderr),
            "ess": self.ess if math.isfinite(self.ess) else None,
            "diagnostics": {k: _plain(v) for k, v in self.diagnostics.items()},
        }
        if self.terms:
            out["terms"] = {name: {"value": _plain(t.value), "stderr": _plain(t.stderr)}
                            for name, t in sorted(self.terms.items())}
        return out


def _scalarize(value: Any) -> Any:
    arr = np.asarray(value)
    if arr.ndim == 0:
        return complex(arr) if np.iscomplexobj(arr) else float(arr)
    return arr


def _plain(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def estimate_rows(name: str, estimate: Estimate) -> List[Dict[str, Any]]:
    """CSV rows (one per chain, term and component, plus the pooled value)."""
    rows = []
    for term, est in [(name, estimate)] + sorted(estimate.terms.items()):
        means = np.asarray(est.chain_means)
        errors = np.asarray(est.chain_stderr)
        vector = np.ndim(est.value) > 0
        components = range(np.shape(est.value)[0]) if vector else [None]
        for j in components:
            label = f"{term}[{j + 1}]" if j is not None else term
            for c in range(means.shape[0]):
                value = means[c][j] if j is not None else means[c]
                error = errors[c][j] if j is not None else errors[c]
                rows.append({"term": label, "chain": c, "value_re": float(np.real(value)),
                             "value_im": float(np.imag(value)), "stderr": float(error)})
            value = est.value[j] if j is not None else est.value
            error = est.stderr[j] if j is not None else est.stderr
            rows.append({"term": label, "chain": "all", "value_re": float(np.real(value)),
                         "value_im": float(np.imag(value)), "stderr": float(error)})
    return rows


# Chains

def chain_generators(seed: int, chains: int) -> List[np.random.Generator]:
    """Per-chain generators: ``SeedSequence(seed).spawn(chains)``, chain i gets child i."""
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(chains)]


def chain_counts(samples: int, chains: int) -> List[int]:
    base, extra = divmod(samples, chains)
    return [base + (1 if i < extra else 0) for i in range(chains)]


Kernel = Callable[[np.ndarray], Tuple[Dict[str, np.ndarray], float]]


def _run_chains(kernel: Kernel, size: int, params: McParams, label: str) -> Tuple[Dict[str, List[np.ndarray]], float]:
    """Feed blocks of standard normals of shape (batch, 2, size) to ``kernel`` on every chain.

    Returns:
        Per-term lists of per-chain sample arrays (chain order) and the worst tail bound
    """
    counts = chain_counts(params.samples, params.chains)
    generators = chain_generators(params.seed, params.chains)

    def run_chain(index: int) -> Tuple[Dict[str, np.ndarray], float]:
        rng = generators[index]
        remaining = counts[index]
        pieces: Dict[str, List[np.ndarray]] = {}
        worst = 0.0
        while remaining > 0:
            batch = min(params.batch_size, remaining)
            terms, bound = kernel(standard_normals(rng, batch, size))
            for name, values in terms.items():
                pieces.setdefault(name, []).append(values)
            worst = max(worst, bound)
            remaining -= batch
        logger.debug(f"{label}: chain {index} done ({counts[index]} samples)")
        return {name: np.concatenate(parts) for name, parts in pieces.items()}, worst

    results: Dict[int, Tuple[Dict[str, np.ndarray], float]] = {}
    with ThreadPoolExecutor(max_workers=max(1, min(settings.THREADS, params.chains))) as executor:
        futures = {executor.submit(run_chain, i): i for i in range(params.chains)}
        for future in as_completed(futures):
            index = futures[future]
            try:
                results[index] = future.result()
            except Exception as e:
                logger.error(f"{label}: chain {index} failed: {e}")
                raise
    per_term: Dict[str, List[np.ndarray]] = {}
    for i in range(params.chains):
        for name, values in results[i][0].items():
            per_term.setdefault(name, []).append(values)
    return per_term, max(r[1] for r in results.values())


def _assemble(per_term: Dict[str, List[np.ndarray]], primary: str, complex_valued: bool,
              diagnostics: Dict[str, Any]) -> Estimate:
    est = Estimate.from_chains(per_term[primary], complex_valued, diagnostics)
    for name, chains in per_term.items():
        if name != primary:
            est.terms[name] = Estimate.from_chains(chains, complex_valued)
    return est


# Geometry

@dataclass(frozen=True)
class Geometry:
    """Numeric insertion data: points (bulk first), weights alpha or beta, couplings."""

    points: np.ndarray
    weights: np.ndarray
    is_bulk: np.ndarray
    delimits: np.ndarray
    gamma: float
    mu_bulk: np.ndarray
    mu_boundary: np.ndarray

    @property
    def charges(self) -> np.ndarray:
        """alpha for bulk insertions, beta/2 for boundary ones."""
        return self.weights * np.where(self.is_bulk, 1.0, 0.5)[:, None]

    @property
    def q(self) -> float:
        return self.gamma + 2 / self.gamma

    @property
    def deficit(self) -> np.ndarray:
        """Simple-root coordinates of s, i.e. (<s, omega_1>, <s, omega_2>)."""
        return self.charges.sum(axis=0) - self.q

    @property
    def marks(self) -> np.ndarray:
        return np.sort(self.points[self.delimits].real)

    @property
    def complex_valued(self) -> bool:
        return bool(np.any(np.imag(self.mu_boundary) != 0))

    @property
    def is_free(self) -> bool:
        return not np.any(self.mu_bulk) and not np.any(self.mu_boundary)

    def moved(self, index: int, shift: complex) -> "Geometry":
        points = self.points.copy()
        points[index] = points[index] + shift
        return replace(self, points=points)

    def relocated(self, index: int, point: complex) -> "Geometry":
        points = self.points.copy()
        points[index] = point
        return replace(self, points=points)

    def with_mu_bulk(self, i: int, value: float) -> "Geometry":
        mu = self.mu_bulk.copy()
        mu[i] = value
        return replace(self, mu_bulk=mu)

    def mapped(self, psi: Callable[[np.ndarray], np.ndarray]) -> "Geometry":
        points = psi(self.points)
        points = np.where(self.is_bulk, points, points.real + 0j)
        return replace(self, points=points)

    def conformal_weights(self) -> np.ndarray:
        return np.array([float(algebra.delta_alpha(Weight(float(w[0]), float(w[1])), self.gamma))
                         for w in self.weights])


def geometry(cfg: InsertionConfig, extra: Sequence[Any] = ()) -> Geometry:
    """Numeric geometry of a configuration; ``extra`` insertions do not delimit boundary arcs.

    Raises:
        ConfigError: for symbolic configurations or bulk points off the upper half-plane
    """
    if cfg.is_symbolic or cfg.gamma is None:
        raise ConfigError("The numeric engine needs numeric points and a numeric gamma")
    points, weights, is_bulk, delimits = [], [], [], []
    for insertion, marks in [(b, False) for b in cfg.bulk] + [(b, True) for b in cfg.boundary] + \
            [(b, False) for b in extra]:
        if isinstance(insertion, BulkInsertion):
            z = complex(insertion.point)
            if z.imag <= 0:
                raise ConfigError(f"Bulk point {z} is not in the upper half-plane")
            points.append(z)
            weights.append(insertion.alpha.to_array())
            is_bulk.append(True)
            delimits.append(False)
        else:
            points.append(complex(float(insertion.point)))
            weights.append(insertion.beta.to_array())
            is_bulk.append(False)
            delimits.append(marks)
    return Geometry(
        points=np.array(points, dtype=complex),
        weights=np.array(weights, dtype=float).reshape(-1, 2),
        is_bulk=np.array(is_bulk, dtype=bool),
        delimits=np.array(delimits, dtype=bool),
        gamma=float(cfg.gamma),
        mu_bulk=np.array([float(m) for m in cfg.mu_bulk]),
        mu_boundary=np.array([[complex(m) for m in row] for row in cfg.mu_boundary]),
    )


def _seiberg_violations(geom: Geometry) -> List[str]:
    found = []
    for i in (0, 1):
        if not geom.deficit[i] > 0:
            found.append(f"⟨s,ω{i + 1}⟩ ≤ 0")
    shifted = (geom.weights - geom.q) @ CARTAN
    bulk_index = boundary_index = 0
    for k in range(len(geom.points)):
        if geom.is_bulk[k]:
            bulk_index += 1
            name = f"α{bulk_index}"
        else:
            boundary_index += 1
            name = f"β{boundary_index}"
        for i in (0, 1):
            if not shifted[k, i] < 0:
                found.append(f"⟨{name}−Q,e{i + 1}⟩ ≥ 0")
    for i in (0, 1):
        if not geom.mu_bulk[i] > 0:
            found.append(f"μB{i + 1} ≤ 0")
        for l, mu in enumerate(geom.mu_boundary[i]):
            if mu.real < 0:
                found.append(f"Re μ{i + 1},{l + 1} < 0")
    return found


def check_seiberg(target: Any) -> None:
    """Raise on the first violated Seiberg bound of a configuration or geometry.

    Raises:
        SeibergError: naming the violated inequality
    """
    geom = target if isinstance(target, Geometry) else geometry(target)
    found = _seiberg_violations(geom)
    if found:
        logger.error(f"Seiberg bounds violated: {', '.join(found)}")
        raise SeibergError(found[0])


def log_prefactor(geom: Geometry) -> float:
    """Logarithm of the Gaussian prefactor left by the vertex insertions after the shift."""
    a = geom.charges
    points = geom.points
    q = geom.q
    norms = np.log(plus_norm(points))
    heights = np.where(geom.is_bulk, 2 * points.imag, 1.0)
    self_green = np.where(geom.is_bulk, -np.log(heights), 0.0) + 4 * norms
    squares = np.einsum("ki,ij,kj->k", a, CARTAN, a)
    with_q = a @ CARTAN @ np.array([q, q])
    total = float(np.sum(0.5 * squares * self_green - 2 * with_q * norms))
    for k in range(len(points)):
        for l in range(k + 1, len(points)):
            total += float(a[k] @ CARTAN @ a[l]) * green(points[k], points[l])
    return total


# Chaos and zero mode

@dataclass(frozen=True)
class CellWeights:
    """Deterministic factors of the bulk and boundary chaos cells for one geometry."""

    bulk: np.ndarray
    boundary: np.ndarray
    log_prefactor: float


def cell_weights(geom: Geometry, cloud: PointCloud) -> CellWeights:
    g = geom.gamma
    pair = geom.charges @ CARTAN
    x = cloud.bulk
    shift = green_matrix(x, geom.points) @ pair if geom.points.size else np.zeros((x.size, 2))
    log_bulk = (np.log(cloud.bulk_weights) - g * g * np.log(2 * x.imag)
                + (2 * g * g - 4) * np.log(plus_norm(x)))
    bulk = np.exp(log_bulk[:, None] + g * shift)
    line = cloud.boundary.astype(complex)
    if line.size and geom.points.size:
        line_shift = green_matrix(line, geom.points) @ pair
    else:
        line_shift = np.zeros((line.size, 2))
    arcs = geom.mu_boundary[:, cloud.boundary_arcs].T
    boundary = (cloud.boundary_weights * plus_norm(line) ** -2.0)[:, None] * np.exp(0.5 * g * line_shift) * arcs
    return CellWeights(bulk, boundary, log_prefactor(geom))


class ChaosSampler:
    """Field on a cloud turned into exactly normalized chaos factors."""

    def __init__(self, cloud: PointCloud, params: McParams, gamma: float,
                 cov: Optional[CovarianceOperator] = None):
        self.cloud = cloud
        self.params = params
        self.gamma = gamma
        self.cov = cov or CovarianceOperator.from_points(cloud.points, params.regularization)
        self.variance = regularized_variance(cloud.points, params.regularization)

    def noise(self, normals: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(bulk factors, boundary factors, root pairings) for a block of draws."""
        g = self.gamma
        pairings = self.cov.apply(normals)
        nb, nl = self.cloud.n_bulk, self.cloud.n_boundary
        bulk = np.exp(g * pairings[:, :nb] - g * g * self.variance[None, :nb, None])
        line = np.exp(0.5 * g * pairings[:, nb:nb + nl] - 0.25 * g * g * self.variance[None, nb:nb + nl, None])
        return bulk, line, pairings


def chaos_integrals(bulk_noise: np.ndarray, line_noise: np.ndarray,
                    weights: CellWeights) -> Tuple[np.ndarray, np.ndarray]:
    """Bulk masses A (real) and boundary masses B (complex), each of shape (draws, 2)."""
    a = np.einsum("bni,ni->bi", bulk_noise, weights.bulk)
    b = np.einsum("bni,ni->bi", line_noise.astype(complex), weights.boundary)
    return a, b


def zero_mode_integral(a: np.ndarray, b: np.ndarray, s: float, gamma: float, mu: float,
                       points: int = settings.DEFAULT_ZERO_MODE_POINTS,
                       radius: float = settings.DEFAULT_ZERO_MODE_RADIUS,
                       tolerance: float = settings.DEFAULT_TAIL_TOLERANCE,
                       left_cut: float = settings.ZERO_MODE_LEFT_CUT,
                       order: int = settings.ZERO_MODE_SERIES_ORDER) -> Tuple[np.ndarray, float]:
    """I(a, b) = int exp(s u - mu a e^(gamma u) - b e^(gamma u / 2)) du for arrays a, b.

    Without boundary masses the closed form Gamma(s/gamma) (mu a)^(-s/gamma) / gamma
    is used. Otherwise the left tail (where the potential is below ``left_cut``)
    is integrated from a truncated series, the bulk of the mass by Simpson's rule,
    and the right tail is bounded by exp(s u_R - radius) / (gamma radius - s).

    Returns:
        The integrals and the largest relative tail bound

    Raises:
        NumericError: if s <= 0, a mass vanishes, or the tail bound exceeds ``tolerance``
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=complex)
    if s <= 0:
        raise NumericError(f"Zero-mode integral diverges for exponent {s}")
    ma = mu * a
    if np.any(ma <= 0):
        raise NumericError("Zero-mode integral needs a positive bulk potential")
    kappa = s / gamma
    if not np.any(b):
        return special.gamma(kappa) / gamma * ma ** (-kappa) + 0j, 0.0

    size = np.abs(b)
    y_left = 2 * left_cut / (size + np.sqrt(size * size + 4 * ma * left_cut))
    u_left = 2 * np.log(y_left) / gamma
    cut = radius + 2 * s / gamma
    u_right = np.log(cut / ma) / gamma

    nodes = np.linspace(0.0, 1.0, points)
    span = u_right - u_left
    u = u_left[:, None] + span[:, None] * nodes[None, :]
    integrand = np.exp(s * u - ma[:, None] * np.exp(gamma * u) - b[:, None] * np.exp(0.5 * gamma * u))
    middle = integrate.simpson(integrand, x=nodes, axis=-1) * span

    left = np.zeros(a.shape, dtype=complex)
    for k in range(order + 1):
        for j in range(k + 1):
            rate = s + gamma * j + 0.5 * gamma * (k - j)
            left += ((-1) ** k / math.factorial(k) * math.comb(k, j) * ma ** j * b ** (k - j)
                     * np.exp(rate * u_left) / rate)
    remainder = left_cut ** (order + 1) / math.factorial(order + 1) * np.exp(s * u_left) / (s + 0.5 * (order + 1) * gamma)
    right = np.exp(s * u_right - cut) / (gamma * cut - s)
    value = left + middle
    bound = float(np.max((remainder + right) / np.abs(value)))
    if bound > tolerance:
        logger.error(f"Zero-mode tail bound {bound:.3e} above tolerance {tolerance:.1e}")
        raise NumericError(f"Zero-mode tail bound {bound:.3e} exceeds {tolerance:.1e}")
    return value, bound


def _zero_mode(a: np.ndarray, b: np.ndarray, geom: Geometry, params: McParams,
               shift: Tuple[float, float] = (0.0, 0.0)) -> Tuple[np.ndarray, float]:
    """Both one-dimensional integrals, shape (draws, 2), with exponents s_i + shift_i."""
    values = []
    worst = 0.0
    for i in (0, 1):
        value, bound = zero_mode_integral(
            a[:, i], b[:, i], float(geom.deficit[i] + shift[i]), geom.gamma, float(geom.mu_bulk[i]),
            params.zero_mode_points, params.zero_mode_radius, params.tail_tolerance)
        values.append(value)
        worst = max(worst, bound)
    return np.stack(values, axis=1), worst


def _correlator_samples(geom: Geometry, weights: CellWeights, bulk_noise: np.ndarray,
                        line_noise: np.ndarray, params: McParams) -> Tuple[np.ndarray, float]:
    a, b = chaos_integrals(bulk_noise, line_noise, weights)
    zero_mode, bound = _zero_mode(a, b, geom, params)
    return math.exp(weights.log_prefactor) * zero_mode[:, 0] * zero_mode[:, 1], bound


def point_cloud(geom: Geometry, params: McParams) -> PointCloud:
    bulk = geom.points[geom.is_bulk]
    line = geom.points[~geom.is_bulk].real
    return PointCloud.build(bulk, line, params.bulk_grid, params.boundary_points,
                            params.delta, params.epsilon, params.box_radius)


def _base_diagnostics(sampler: ChaosSampler, tail: float) -> Dict[str, Any]:
    return {
        "jitter": sampler.cov.jitter,
        "factorization_residual": sampler.cov.residual,
        "tail_bound": tail,
        "bulk_nodes": sampler.cloud.n_bulk,
        "boundary_nodes": sampler.cloud.n_boundary,
    }


# Estimators

def estimate_correlator(cfg: InsertionConfig, params: Optional[McParams] = None,
                        probe_insertions: Sequence[Any] = ()) -> Estimate:
    """Regularized correlator of the configuration (plus optional extra insertions).

    Raises:
        SeibergError: if a Seiberg bound fails
        NumericError: if the zero-mode tail bound exceeds the tolerance
    """
    params = params or McParams()
    geom = geometry(cfg, probe_insertions)
    check_seiberg(geom)
    sampler = ChaosSampler(point_cloud(geom, params), params, geom.gamma)
    weights = cell_weights(geom, sampler.cloud)

    def kernel(normals: np.ndarray) -> Tuple[Dict[str, np.ndarray], float]:
        bulk, line, _ = sampler.noise(normals)
        values, bound = _correlator_samples(geom, weights, bulk, line, params)
        return {"correlator": values}, bound

    per_term, tail = _run_chains(kernel, sampler.cov.size, params, "correlator")
    est = _assemble(per_term, "correlator", geom.complex_valued, _base_diagnostics(sampler, tail))
    logger.info(f"Correlator estimate {est.value} ± {est.stderr}")
    return est


def kpz_residual(cfg: InsertionConfig, params: Optional[McParams] = None) -> Estimate:
    """Two-component KPZ residual, paired with omega_1 and omega_2.

    Component j: <s, omega_j> C - gamma mu_Bj int <V_{gamma e_j} ...> - (gamma/2) int <V_{gamma e_j} ...> mu_j,
    every term computed from the same draws.
    """
    params = params or McParams()
    geom = geometry(cfg)
    if geom.is_free and np.allclose(geom.deficit, 0.0):
        logger.info("KPZ residual: neutral configuration without potential, all terms vanish")
        return Estimate.exact_zero((2,), params.chains, {"degenerate": True})
    check_seiberg(geom)
    sampler = ChaosSampler(point_cloud(geom, params), params, geom.gamma)
    weights = cell_weights(geom, sampler.cloud)
    g = geom.gamma
    prefactor = math.exp(weights.log_prefactor)
    s = geom.deficit

    def kernel(normals: np.ndarray) -> Tuple[Dict[str, np.ndarray], float]:
        bulk, line, _ = sampler.noise(normals)
        a, b = chaos_integrals(bulk, line, weights)
        base, bound0 = _zero_mode(a, b, geom, params)
        up_bulk, bound1 = _zero_mode(a, b, geom, params, (g, g))
        up_line, bound2 = _zero_mode(a, b, geom, params, (g / 2, g / 2))
        other = base[:, ::-1]
        s_term = prefactor * s[None, :] * base * other
        bulk_term = prefactor * g * geom.mu_bulk[None, :] * a * up_bulk * other
        line_term = prefactor * (g / 2) * b * up_line * other
        terms = {
            "residual": s_term - bulk_term - line_term,
            "s_term": s_term,
            "bulk_term": bulk_term,
            "boundary_term": line_term,
            "correlator": prefactor * base[:, 0] * base[:, 1],
        }
        return terms, max(bound0, bound1, bound2)

    per_term, tail = _run_chains(kernel, sampler.cov.size, params, "kpz")
    est = _assemble(per_term, "residual", geom.complex_valued, _base_diagnostics(sampler, tail))
    logger.info(f"KPZ residual {est.value} ± {est.stderr}")
    return est


def kpz_passed(est: Estimate) -> bool:
    if est.diagnostics.get("degenerate"):
        return True
    scale = est.terms["s_term"].magnitude()
    return est.compatible_with_zero(atol=settings.QUADRATURE_TOLERANCE * scale)


def _mobius(mobius: Sequence[float]) -> Tuple[Callable, Callable]:
    a, b, c, d = (float(x) for x in mobius)
    if abs(a * d - b * c - 1) > 1e-9:
        raise ConfigError(f"Moebius coefficients must satisfy ad - bc = 1, got {a * d - b * c}")

    def psi(z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (a * z + b) / (c * z + d)

    def dpsi(z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1 / (c * z + d) ** 2

    return psi, dpsi


def covariance_residual(cfg: InsertionConfig, mobius: Sequence[float],
                        params: Optional[McParams] = None) -> Estimate:
    """<prod V(psi(x))> prod |psi'|^(weight) - <prod V(x)> with common random numbers.

    The mapped correlator is discretized on the image of the original cloud, so
    both terms approximate the same truncated integrals and the identity map
    gives an exact zero.

    Raises:
        ConfigError: if a mapped insertion leaves the finite plane or meets a quadrature node
    """
    params = params or McParams()
    psi, dpsi = _mobius(mobius)
    geom = geometry(cfg)
    check_seiberg(geom)
    mapped = geom.mapped(psi)
    if not np.all(np.isfinite(mapped.points)):
        raise ConfigError("Moebius map sends an insertion to infinity")
    check_seiberg(mapped)
    cloud = point_cloud(geom, params)
    mapped_cloud = cloud.mapped(psi, dpsi)
    nodes = mapped_cloud.points
    if mapped.points.size and np.min(np.abs(nodes[:, None] - mapped.points[None, :])) == 0:
        raise ConfigError("Mapped insertion collides with a quadrature node")

    original = ChaosSampler(cloud, params, geom.gamma)
    image = ChaosSampler(mapped_cloud, params, geom.gamma)
    weights = cell_weights(geom, cloud)
    mapped_weights = cell_weights(mapped, mapped_cloud)
    exponents = np.where(geom.is_bulk, 2.0, 1.0) * geom.conformal_weights()
    jacobian = float(np.prod(np.abs(dpsi(geom.points)) ** exponents))

    def kernel(normals: np.ndarray) -> Tuple[Dict[str, np.ndarray], float]:
        bulk, line, _ = original.noise(normals)
        before, bound0 = _correlator_samples(geom, weights, bulk, line, params)
        bulk, line, _ = image.noise(normals)
        after, bound1 = _correlator_samples(mapped, mapped_weights, bulk, line, params)
        after = after * jacobian
        return {"residual": after - before, "original": before, "mapped": after}, max(bound0, bound1)

    per_term, tail = _run_chains(kernel, original.cov.size, params, "covariance")
    diagnostics = _base_diagnostics(original, tail)
    diagnostics["jacobian"] = jacobian
    diagnostics["mapped_jitter"] = image.cov.jitter
    est = _assemble(per_term, "residual", geom.complex_valued, diagnostics)
    logger.info(f"Covariance residual {est.value} ± {est.stderr}")
    return est


def covariance_passed(est: Estimate) -> bool:
    scale = est.terms["original"].magnitude()
    return est.compatible_with_zero(atol=settings.QUADRATURE_TOLERANCE * scale)


@dataclass
class FusionFit:
    """Least-squares slope of log|correlator| against log separation."""

    pair: Tuple[int, int]
    slope: float
    intercept: float
    ci_low: float
    ci_high: float
    expected: float
    separations: List[float]
    estimates: List[Estimate]

    @property
    def passed(self) -> bool:
        scale = max(abs(self.expected), 1.0)
        return abs(self.slope - self.expected) <= settings.FUSION_TOLERANCE * scale

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pair": list(self.pair),
            "slope": self.slope,
            "intercept": self.intercept,
            "ci": [self.ci_low, self.ci_high],
            "expected": self.expected,
            "separations": self.separations,
            "passed": self.passed,
        }


def separation_ladder(dmin: float, dmax: float, steps: int) -> List[float]:
    if not 0 < dmin < dmax or steps < 3:
        raise ConfigError(f"Need 0 < dmin < dmax and at least 3 steps, got {dmin}, {dmax}, {steps}")
    return [float(d) for d in np.geomspace(dmin, dmax, steps)]


def fusion_exponent(cfg: InsertionConfig, pair: Sequence[int], separations: Sequence[float],
                    params: Optional[McParams] = None) -> FusionFit:
    """Fit the collision exponent of insertions ``pair`` (0-based, bulk first, then boundary).

    The second insertion is placed at the first one plus each separation along
    the real direction; every rung reuses the master seed.

    Raises:
        ConfigError: for mixed pairs or a rung that breaks the boundary order
        NumericError: if the 95% interval is wider than the configured cap
    """
    params = params or McParams()
    i, j = (int(p) for p in pair)
    geom = geometry(cfg)
    n = len(geom.points)
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise ConfigError(f"Invalid fusion pair {pair} for {n} insertions")
    if geom.is_bulk[i] != geom.is_bulk[j]:
        raise ConfigError("Fusion pairs must join two bulk or two boundary insertions")
    a = geom.charges
    expected = -float(a[i] @ CARTAN @ a[j]) * (1.0 if geom.is_bulk[i] else 2.0)

    estimates = []
    for d in separations:
        rung = geom.relocated(j, geom.points[i] + d)
        if not rung.is_bulk[j]:
            line = rung.points[rung.delimits].real
            if np.any(np.diff(line) <= 0):
                raise ConfigError(f"Separation {d} breaks the boundary order")
        check_seiberg(rung)
        sampler = ChaosSampler(point_cloud(rung, params), params, rung.gamma)
        weights = cell_weights(rung, sampler.cloud)

        def kernel(normals: np.ndarray, rung=rung, sampler=sampler, weights=weights):
            bulk, line_noise, _ = sampler.noise(normals)
            values, bound = _correlator_samples(rung, weights, bulk, line_noise, params)
            return {"correlator": values}, bound

        per_term, tail = _run_chains(kernel, sampler.cov.size, params, f"fusion d={d:.4g}")
        estimates.append(_assemble(per_term, "correlator", rung.complex_valued, _base_diagnostics(sampler, tail)))

    xs = np.log(np.asarray(separations, dtype=float))
    ys = np.log(np.array([abs(e.value) for e in estimates]))
    fit = stats.linregress(xs, ys)
    half = float(stats.t.ppf(0.975, len(xs) - 2) * fit.stderr)
    if 2 * half > settings.FUSION_CI_CAP:
        logger.error(f"Fusion fit too noisy: 95% interval width {2 * half:.3f}")
        raise NumericError(f"Fusion slope interval width {2 * half:.3f} exceeds {settings.FUSION_CI_CAP}")
    result = FusionFit((i, j), float(fit.slope), float(fit.intercept), float(fit.slope) - half,
                       float(fit.slope) + half, expected, [float(d) for d in separations], estimates)
    logger.info(f"Fusion slope {result.slope:.4f} (expected {expected:.4f})")
    return result


def mu_derivative_residual(cfg: InsertionConfig, params: Optional[McParams] = None,
                           step: Optional[float] = None) -> Estimate:
    """Central difference in mu_B1 minus the correlator with an integrated V_{gamma e_1}."""
    params = params or McParams()
    geom = geometry(cfg)
    check_seiberg(geom)
    mu = float(geom.mu_bulk[0])
    h = step if step is not None else settings.FINITE_DIFFERENCE_STEP * mu
    if not 0 < h < mu:
        raise ConfigError(f"Finite-difference step must lie in (0, mu_B1), got {h}")
    sampler = ChaosSampler(point_cloud(geom, params), params, geom.gamma)
    weights = cell_weights(geom, sampler.cloud)
    up, down = geom.with_mu_bulk(0, mu + h), geom.with_mu_bulk(0, mu - h)
    prefactor = math.exp(weights.log_prefactor)

    def kernel(normals: np.ndarray) -> Tuple[Dict[str, np.ndarray], float]:
        bulk, line, _ = sampler.noise(normals)
        a, b = chaos_integrals(bulk, line, weights)
        plus, bound0 = _zero_mode(a, b, up, params)
        minus, bound1 = _zero_mode(a, b, down, params)
        base, bound2 = _zero_mode(a, b, geom, params)
        shifted, bound3 = _zero_mode(a, b, geom, params, (geom.gamma, 0.0))
        difference = prefactor * (plus[:, 0] * plus[:, 1] - minus[:, 0] * minus[:, 1]) / (2 * h)
        inserted = -prefactor * a[:, 0] * shifted[:, 0] * base[:, 1]
        return ({"residual": difference - inserted, "finite_difference": difference, "inserted": inserted},
                max(bound0, bound1, bound2, bound3))

    per_term, tail = _run_chains(kernel, sampler.cov.size, params, "mu-derivative")
    diagnostics = _base_diagnostics(sampler, tail)
    diagnostics["step"] = h
    return _assemble(per_term, "residual", geom.complex_valued, diagnostics)


def mu_derivative_passed(est: Estimate) -> bool:
    scale = est.terms["inserted"].magnitude()
    return est.compatible_with_zero(atol=settings.FINITE_DIFFERENCE_STEP * scale)


def chaos_normalization(cfg: InsertionConfig, params: Optional[McParams] = None) -> Estimate:
    """Mean of the exactly normalized cell factors over all cells; equals one in expectation."""
    params = params or McParams()
    geom = geometry(cfg)
    sampler = ChaosSampler(point_cloud(geom, params), params, geom.gamma)

    def kernel(normals: np.ndarray) -> Tuple[Dict[str, np.ndarray], float]:
        bulk, line, _ = sampler.noise(normals)
        bulk_mean = bulk.mean(axis=(1, 2))
        terms = {"bulk": bulk_mean}
        if line.shape[1]:
            line_mean = line.mean(axis=(1, 2))
            terms["boundary"] = line_mean
            total = (bulk.sum(axis=(1, 2)) + line.sum(axis=(1, 2))) / (bulk[0].size + line[0].size)
        else:
            total = bulk_mean
        terms["normalization"] = total
        return terms, 0.0

    per_term, _ = _run_chains(kernel, sampler.cov.size, params, "chaos-normalization")
    return _assemble(per_term, "normalization", False, _base_diagnostics(sampler, 0.0))


# Stress tensor

def _mean_slots(geom: Geometry, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """Exact (1/2)d/dt and (1/2)d^2/dt^2 of the shift plus drift at a boundary point, in root coordinates."""
    v1 = np.zeros(2)
    v2 = np.zeros(2)
    for point, weight, is_bulk in zip(geom.points, geom.weights, geom.is_bulk):
        images = (point, np.conj(point)) if is_bulk else (point,)
        for x in images:
            v1 = v1 + np.real(weight / (2 * (x - t)))
            v2 = v2 + np.real(weight / (2 * (x - t) ** 2))
    if abs(t) > 1:
        excess = geom.charges.sum(axis=0) - geom.q
        v1 = v1 + excess / t
        v2 = v2 - excess / t ** 2
    return v1, v2


def _stress_polynomial(geom: Geometry, cov_block: np.ndarray, h: float):
    d1 = FIRST_STENCIL / (4 * h)
    d2 = SECOND_STENCIL / (2 * h * h)
    table = DerivativeCovariance({
        (1, 1): float(d1 @ cov_block @ d1),
        (1, 2): float(d1 @ cov_block @ d2),
        (2, 2): float(d2 @ cov_block @ d2),
    })
    return wick_expand(stress_tensor(geom.gamma), table), d1, d2


def _evaluate_stress(poly, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    slots = {1: Weight(v1[..., 0], v1[..., 1]), 2: Weight(v2[..., 0], v2[..., 1])}
    return np.asarray(poly.evaluate(lambda slot: slots[slot.order]), dtype=float)


def free_field_stress_oracle(cfg: InsertionConfig, t: float) -> float:
    """Exact free-field <T(t) prod V> / <prod V> from the symbolic engine, evaluated numerically.

    The last insertion is fixed by neutrality in the symbolic model, which
    reproduces the numeric configuration at its gamma.
    """
    n, m = cfg.n_bulk, cfg.n_boundary
    if n + m == 0:
        raise ConfigError("The free-field oracle needs at least one insertion")
    ctx = symbolic_context(n, m)
    gamma = ctx.gamma

    def exact(weight: Weight) -> Weight:
        return ctx.weight(_exact(weight.c1), _exact(weight.c2))

    alphas = [exact(b.alpha) for b in cfg.bulk]
    betas = [exact(b.beta) for b in cfg.boundary]
    Q = algebra.background_charge(gamma)
    if m:
        betas[-1] = (2 * (Q - algebra.sum_weights(alphas) - algebra.sum_weights(betas[:-1]) / 2)).convert(ctx.scalars)
    else:
        alphas[-1] = (Q - algebra.sum_weights(alphas[:-1])).convert(ctx.scalars)
    symbolic = config_from_weights(ctx, alphas, betas, probe_beta=ctx.weight(0, 0))
    value = eval_ff(stress_tensor(gamma), probe(), symbolic)
    names = ["t"] + [f"z{k}" for k in range(1, n + 1)] + [f"zbar{k}" for k in range(1, n + 1)] + \
        [f"s{l}" for l in range(1, m + 1)] + ["gamma"]
    fn = numeric_function(value, names)
    args = [t] + [complex(b.point) for b in cfg.bulk] + [complex(b.point).conjugate() for b in cfg.bulk] + \
        [float(b.point) for b in cfg.boundary] + [float(cfg.gamma)]
    return float(np.real(fn(*args)))


def _exact(value: Any) -> Fraction:
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    return decode_rational(float(value))


def _derivative_shifts(geom: Geometry) -> List[Tuple[int, complex]]:
    shifts = []
    for k in range(len(geom.points)):
        shifts.append((k, 1.0 + 0j))
        if geom.is_bulk[k]:
            shifts.append((k, 1j))
    return shifts


def _ward_rhs(geom: Geometry, t: float, value: np.ndarray, derivatives: Dict[Tuple[int, complex], np.ndarray]) -> np.ndarray:
    """sum_k [d_{x_k} F / (t - x_k) + Delta_k F / (t - x_k)^2] over the extended list."""
    deltas = geom.conformal_weights()
    total = np.zeros(np.shape(value), dtype=complex)
    for k, point in enumerate(geom.points):
        if geom.is_bulk[k]:
            dx = derivatives[(k, 1.0 + 0j)]
            dy = derivatives[(k, 1j)]
            for x, dz in ((point, 0.5 * (dx - 1j * dy)), (np.conj(point), 0.5 * (dx + 1j * dy))):
                total = total + dz / (t - x) + deltas[k] * value / (t - x) ** 2
        else:
            x = point.real
            total = total + derivatives[(k, 1.0 + 0j)] / (t - x) + deltas[k] * value / (t - x) ** 2
    return total


def ward_T_mc(cfg: InsertionConfig, t: float, params: Optional[McParams] = None) -> Estimate:
    """Regularized <:T(t): prod V> minus its local Ward right side.

    The field part of the current is differentiated on a boundary stencil of
    lattice spacing and Wick-ordered with the stencil covariances; the shift and
    drift are differentiated exactly. Insertion derivatives of the correlator
    are central differences under common random numbers, Richardson-combined
    with half spacing. With every cosmological constant zero the configuration
    must be neutral and the estimate is normalized by the correlator; the exact
    free-field value is then attached as an oracle.

    Raises:
        ConfigError: if t is closer than twice the regularization scale to an insertion
        NeutralityError: for a non-neutral configuration without potential
    """
    params = params or McParams()
    geom = geometry(cfg)
    r = params.regularization
    t = float(t)
    if geom.points.size and np.min(np.abs(geom.points - t)) < 2 * r:
        raise ConfigError(f"Probe {t} is closer than {2 * r} to an insertion")
    free = geom.is_free
    if free:
        if not np.allclose(geom.deficit, 0.0, atol=1e-9):
            raise NeutralityError(f"Without potential the configuration must be neutral; deficit {geom.deficit}")
    else:
        check_seiberg(geom)

    h = max(r, params.lattice_spacing)
    stencil = np.array([t - h, t, t + h], dtype=complex)
    if free:
        cloud = None
        cov = CovarianceOperator.from_points(stencil, r)
        size = cov.size
        sampler = None
    else:
        cloud = point_cloud(geom, params).with_extra(stencil)
        sampler = ChaosSampler(cloud, params, geom.gamma)
        cov = sampler.cov
        size = cov.size
    block = cov.matrix[-3:, -3:]
    poly, d1, d2 = _stress_polynomial(geom, block, h)
    mean1, mean2 = _mean_slots(geom, t)

    fd = settings.FINITE_DIFFERENCE_STEP
    shifts = _derivative_shifts(geom)
    moved: Dict[Tuple[int, complex, float], Geometry] = {}
    for k, direction in shifts:
        for step in (fd, -fd, fd / 2, -fd / 2):
            moved[(k, direction, step)] = geom.moved(k, direction * step)

    def stress_samples(pairings: np.ndarray) -> np.ndarray:
        coords = root_pairings_to_coords(pairings[:, -3:, :])
        v1 = np.einsum("p,bpi->bi", d1, coords) + mean1
        v2 = np.einsum("p,bpi->bi", d2, coords) + mean2
        return _evaluate_stress(poly, v1, v2)

    def richardson(values: Dict[float, Any]) -> Tuple[Any, Any]:
        coarse = (values[fd] - values[-fd]) / (2 * fd)
        fine = (values[fd / 2] - values[-fd / 2]) / fd
        return (4 * fine - coarse) / 3, coarse - fine

    if free:
        log_p = log_prefactor(geom)
        derivatives = {}
        gaps = []
        for k, direction in shifts:
            logs = {step: log_prefactor(moved[(k, direction, step)]) for step in (fd, -fd, fd / 2, -fd / 2)}
            derivatives[(k, direction)], gap = richardson(logs)
            gaps.append(abs(gap))
        rhs = complex(_ward_rhs(geom, t, np.array(1.0), {key: np.array(v) for key, v in derivatives.items()}))
        oracle = free_field_stress_oracle(cfg, t)

        def kernel(normals: np.ndarray) -> Tuple[Dict[str, np.ndarray], float]:
            pairings = cov.apply(normals)
            stress = stress_samples(pairings)
            return {"residual": stress - rhs.real, "lhs": stress, "oracle_gap": stress - oracle}, 0.0

        per_term, _ = _run_chains(kernel, size, params, "ward-T")
        diagnostics = {"mode": "free-field", "rhs": rhs.real, "oracle": oracle, "log_prefactor": log_p,
                       "stencil_spacing": h, "richardson_gap": float(max(gaps) if gaps else 0.0)}
        est = _assemble(per_term, "residual", False, diagnostics)
        logger.info(f"Free-field T residual {est.value} ± {est.stderr}, oracle gap {est.terms['oracle_gap'].value}")
        return est

    weights = cell_weights(geom, cloud)
    moved_weights = {key: cell_weights(g, cloud) for key, g in moved.items()}

    def kernel(normals: np.ndarray) -> Tuple[Dict[str, np.ndarray], float]:
        bulk, line, pairings = sampler.noise(normals)
        value, worst = _correlator_samples(geom, weights, bulk, line, params)
        derivatives = {}
        gap = 0.0
        for k, direction in shifts:
            values = {}
            for step in (fd, -fd, fd / 2, -fd / 2):
                key = (k, direction, step)
                values[step], bound = _correlator_samples(moved[key], moved_weights[key], bulk, line, params)
                worst = max(worst, bound)
            derivatives[(k, direction)], difference = richardson(values)
            gap = max(gap, float(np.max(np.abs(difference))))
        lhs = value * stress_samples(pairings)
        rhs = _ward_rhs(geom, t, value, derivatives)
        terms = {"residual": lhs - rhs, "lhs": lhs, "rhs": rhs, "correlator": value,
                 "richardson_gap": np.full(value.shape, gap)}
        return terms, worst

    per_term, tail = _run_chains(kernel, size, params, "ward-T")
    diagnostics = _base_diagnostics(sampler, tail)
    diagnostics.update({"mode": "interacting", "stencil_spacing": h})
    est = _assemble(per_term, "residual", geom.complex_valued, diagnostics)
    logger.info(f"T residual {est.value} ± {est.stderr}")
    return est


def ward_t_passed(est: Estimate) -> bool:
    """Residual within max(3 stderr, 5% of the current); the oracle gap, when present, within 3 stderr."""
    lhs = est.terms["lhs"].magnitude()
    ok = est.compatible_with_zero(atol=settings.RELATIVE_TOLERANCE * lhs)
    if "oracle_gap" in est.terms:
        ok = ok and est.terms["oracle_gap"].compatible_with_zero(atol=settings.QUADRATURE_TOLERANCE)
    return ok


def stress_decay_exponent(cfg: InsertionConfig, probes: Sequence[float] = (10.0, 20.0, 40.0)) -> float:
    """Slope of log|<T(t)>| against log t from the exact mean part, for a neutral configuration without potential.

    Raises:
        ConfigError: if the configuration carries a potential
    """
    geom = geometry(cfg)
    if not geom.is_free:
        raise ConfigError("The decay check runs on the free-field mode")
    if not np.allclose(geom.deficit, 0.0, atol=1e-9):
        raise NeutralityError(f"Decay check needs a neutral configuration; deficit {geom.deficit}")
    poly = stress_tensor(geom.gamma)
    values = []
    for t in probes:
        v1, v2 = _mean_slots(geom, float(t))
        values.append(abs(float(_evaluate_stress(poly, v1, v2))))
    fit = stats.linregress(np.log(np.asarray(probes, dtype=float)), np.log(values))
    return float(fit.slope)
