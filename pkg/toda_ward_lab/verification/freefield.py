#!/usr/bin/env python3
"""
Free-field evaluation of descendant insertions.

Under neutrality sum(alpha) + sum(beta)/2 = Q the Gaussian integration by
parts closes without potential terms, and every derivative slot V_p at a probe
is replaced by its charge vector

    V_p  ->  sum_k  w_k / (2 (x_k - probe)^p)

over the extended insertion list (z_1..z_N, zbar_1..zbar_N, s_1..s_M and the
probe insertion itself). All outputs are correlator-normalized ratios, so Ward
identities become identities between exact rational functions.
"""

import hashlib
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from ..symbolic import algebra
from ..symbolic.algebra import Weight
from ..symbolic.descendants import DescendantPolynomial, Slot, virasoro_poly, w_poly
from ..symbolic.symrat import (
    PointKind, PointVar, RationalSection, VariableContext, boundary, bulk, bulk_conjugate, probe,
    swap_conjugates,
)
from ..utils.errors import ConfigError, NeutralityError
from ..utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class BulkInsertion:
    point: Any  # PointVar (symbolic) or complex with positive imaginary part
    alpha: Weight


@dataclass(frozen=True)
class BoundaryInsertion:
    point: Any  # PointVar (symbolic) or real
    beta: Weight


@dataclass(frozen=True)
class ExtendedEntry:
    """One entry of the extended list with the weight entering charge vectors."""

    point: Any
    weight: Weight
    kind: PointKind
    source: int  # index into bulk or boundary list; -1 for the probe insertion


@dataclass(frozen=True)
class InsertionConfig:
    """Bulk and boundary insertions with cosmological constants and coupling.

    ``mu_boundary[i]`` holds the constants mu_{i,1}..mu_{i,M} of the arcs
    (-inf, s_1) u (s_M, inf), (s_1, s_2), ..., (s_{M-1}, s_M); at least one
    value per i even when there are no boundary insertions.
    """

    bulk: Tuple[BulkInsertion, ...] = ()
    boundary: Tuple[BoundaryInsertion, ...] = ()
    mu_bulk: Tuple[float, float] = (1.0, 1.0)
    mu_boundary: Tuple[Tuple[complex, ...], Tuple[complex, ...]] = ((0.0,), (0.0,))
    gamma: Any = None
    probe: Optional[BoundaryInsertion] = None
    context: Optional[VariableContext] = field(default=None, compare=False)

    def __post_init__(self):
        numeric_points = [b.point for b in self.boundary if not isinstance(b.point, PointVar)]
        if any(a >= b for a, b in zip(numeric_points, numeric_points[1:])):
            raise ConfigError("Boundary points must be strictly increasing")
        for i, values in enumerate(self.mu_boundary):
            if len(values) != max(1, len(self.boundary)):
                raise ConfigError(
                    f"mu_boundary[{i}] needs {max(1, len(self.boundary))} values, got {len(values)}")

    @property
    def n_bulk(self) -> int:
        return len(self.bulk)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary)

    @property
    def is_symbolic(self) -> bool:
        return self.context is not None

    def resolved_gamma(self) -> Any:
        if self.gamma is not None:
            return self.gamma
        if self.context is not None:
            return self.context.gamma
        return algebra.DEFAULT_FIELD.gamma

    def arc_constant(self, i: int, arc: int) -> complex:
        """mu_{i, arc+1} for arc 0..M, with arc M wrapping onto arc 0."""
        values = self.mu_boundary[i - 1]
        m = len(self.boundary)
        if m == 0:
            return values[0]
        return values[arc if arc < m else 0]

    def extended(self, include_probe: bool = True) -> List[ExtendedEntry]:
        """(z_1..z_N, zbar_1..zbar_N, s_1..s_M[, t]) with weights (alpha, alpha, beta[, beta_t])."""
        entries = []
        for k, b in enumerate(self.bulk):
            entries.append(ExtendedEntry(b.point, b.alpha, PointKind.BULK, k))
        for k, b in enumerate(self.bulk):
            conj = b.point.conjugate() if isinstance(b.point, PointVar) else complex(b.point).conjugate()
            entries.append(ExtendedEntry(conj, b.alpha, PointKind.BULK_CONJUGATE, k))
        for l, b in enumerate(self.boundary):
            entries.append(ExtendedEntry(b.point, b.beta, PointKind.BOUNDARY, l))
        if include_probe and self.probe is not None:
            entries.append(ExtendedEntry(self.probe.point, self.probe.beta, PointKind.PROBE, -1))
        return entries

    def total_charge(self) -> Weight:
        total = algebra.ZERO
        for b in self.bulk:
            total = total + b.alpha
        for b in self.boundary:
            total = total + b.beta / 2
        if self.probe is not None:
            total = total + self.probe.beta / 2
        return total

    def with_probe(self, point: PointVar, beta: Optional[Weight] = None) -> "InsertionConfig":
        """Attach a boundary probe; beta defaults to the value restoring neutrality."""
        base = replace(self, probe=None)
        if beta is None:
            Q = algebra.background_charge(self.resolved_gamma())
            beta = 2 * (Q - base.total_charge())
            if self.context is not None:
                beta = beta.convert(self.context.scalars)
        return replace(self, probe=BoundaryInsertion(point, beta))

    def digest(self) -> str:
        text = repr((
            [(str(b.point), str(b.alpha)) for b in self.bulk],
            [(str(b.point), str(b.beta)) for b in self.boundary],
            None if self.probe is None else (str(self.probe.point), str(self.probe.beta)),
            str(self.gamma), self.mu_bulk, self.mu_boundary,
        ))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class ChargeDeficit:
    """s = sum(alpha) + sum(beta)/2 - Q."""

    s: Weight

    def is_neutral(self) -> bool:
        return self.s.is_zero()

    def margin(self, i: int) -> Any:
        """<s, omega_i>."""
        return algebra.omega(i, self.s)


def charge_deficit(cfg: InsertionConfig) -> ChargeDeficit:
    return ChargeDeficit(cfg.total_charge() - algebra.background_charge(cfg.resolved_gamma()))


def _require_neutral(cfg: InsertionConfig) -> None:
    deficit = charge_deficit(cfg)
    if not deficit.is_neutral():
        raise NeutralityError(f"Free-field evaluation needs a neutral configuration; deficit s = {deficit.s}")


def probe_charge_vector(p: int, at: PointVar, entries: Sequence[ExtendedEntry],
                        ctx: VariableContext) -> Weight:
    """sum over entries (other than ``at``) of w / (2 (x - at)^p), with no neutrality check."""
    t = ctx.gen(at)
    c1 = ctx.field.zero
    c2 = ctx.field.zero
    for entry in entries:
        if entry.point == at:
            continue
        w = entry.weight.convert(ctx.scalars)
        kernel = 1 / (2 * (ctx.gen(entry.point) - t) ** p)
        c1 = c1 + w.c1 * kernel
        c2 = c2 + w.c2 * kernel
    return Weight(c1, c2)


def charge_vector(p: int, at: PointVar, cfg: InsertionConfig) -> Weight:
    """Charge vector of slot V_p at ``at``; components are elements of the config's field.

    Raises:
        NeutralityError: if the configuration is not neutral
    """
    _require_neutral(cfg)
    return probe_charge_vector(p, at, cfg.extended(), cfg.context)


def evaluate_with_entries(poly: DescendantPolynomial, at: PointVar, entries: Sequence[ExtendedEntry],
                   ctx: VariableContext) -> RationalSection:
    poly = poly.convert(ctx.scalars)
    cache: Dict[int, Weight] = {}

    def assign(slot: Slot) -> Weight:
        if slot.order not in cache:
            cache[slot.order] = probe_charge_vector(slot.order, at, entries, ctx)
        return cache[slot.order]

    value = poly.evaluate(assign)
    return ctx.section(value)


def eval_ff(poly: DescendantPolynomial, at: PointVar, cfg: InsertionConfig) -> RationalSection:
    """Correlator-normalized free-field value of the insertion ``poly`` at ``at``.

    Raises:
        NeutralityError: if the configuration is not neutral
    """
    _require_neutral(cfg)
    return evaluate_with_entries(poly, at, cfg.extended(), cfg.context)


def entry_weight_scalars(cfg: InsertionConfig, entry: ExtendedEntry,
                         fn: Callable[[Weight, Any], Any]) -> Any:
    return fn(entry.weight.convert(cfg.context.scalars), cfg.context.gamma)


def descendant_at_entry(cfg: InsertionConfig, entry: ExtendedEntry,
                        generator: Callable[[Weight, Any], DescendantPolynomial]) -> RationalSection:
    """Free-field value of a descendant of the entry's own vertex, evaluated at its point.

    Conjugate entries are obtained from their bulk partner by the z <-> zbar swap.
    """
    ctx = cfg.context
    weight = entry.weight.convert(ctx.scalars)
    poly = generator(weight, ctx.gamma)
    if entry.kind is PointKind.BULK_CONJUGATE:
        partner = entry.point.conjugate()
        return swap_conjugates(evaluate_with_entries(poly, partner, cfg.extended(), ctx))
    return evaluate_with_entries(poly, entry.point, cfg.extended(), ctx)


def _ward_entries(cfg: InsertionConfig) -> List[ExtendedEntry]:
    return [e for e in cfg.extended() if e.kind is not PointKind.PROBE]


def _level_check(n: int, minimum: int, name: str) -> None:
    if not isinstance(n, int) or n < minimum:
        raise ConfigError(f"{name} Ward identity needs n >= {minimum}, got {n}")


def ward_rhs_conformal(n: int, t: PointVar, cfg: InsertionConfig, include_weights: bool = True) -> RationalSection:
    """sum_k [ -L_{-1}^{(k)} / (x_k - t)^(n-1) + (n-1) Delta_k / (x_k - t)^n ]."""
    _level_check(n, 2, "Conformal")
    _require_neutral(cfg)
    ctx = cfg.context
    tv = ctx.var(t)
    total = ctx.section(0)
    for entry in _ward_entries(cfg):
        xk = ctx.var(entry.point)
        l1 = descendant_at_entry(cfg, entry, lambda w, g: virasoro_poly(1, w, g))
        total = total - l1 / (xk - tv) ** (n - 1)
        if include_weights:
            delta = entry_weight_scalars(cfg, entry, algebra.delta_alpha)
            total = total + (n - 1) * delta / (xk - tv) ** n
    return total


def ward_rhs_spin3(n: int, t: PointVar, cfg: InsertionConfig, include_weights: bool = True) -> RationalSection:
    """sum_k [ -W_{-2}^{(k)}/(x_k-t)^(n-2) + (n-2) W_{-1}^{(k)}/(x_k-t)^(n-1) - (n-1)(n-2) w_k / (2 (x_k-t)^n) ]."""
    _level_check(n, 3, "Spin-3")
    _require_neutral(cfg)
    ctx = cfg.context
    tv = ctx.var(t)
    total = ctx.section(0)
    for entry in _ward_entries(cfg):
        xk = ctx.var(entry.point)
        w2 = descendant_at_entry(cfg, entry, lambda w, g: w_poly(2, w, g))
        w1 = descendant_at_entry(cfg, entry, lambda w, g: w_poly(1, w, g))
        total = total - w2 / (xk - tv) ** (n - 2) + (n - 2) * w1 / (xk - tv) ** (n - 1)
        if include_weights:
            wk = entry_weight_scalars(cfg, entry, algebra.w_alpha)
            total = total - (n - 1) * (n - 2) * wk / (2 * (xk - tv) ** n)
    return total


def global_conformal_sum(n: int, cfg: InsertionConfig) -> RationalSection:
    """sum_k [ x_k^n L_{-1}^{(k)} + n x_k^(n-1) Delta_k ] over all extended entries."""
    _require_neutral(cfg)
    ctx = cfg.context
    total = ctx.section(0)
    for entry in cfg.extended():
        xk = ctx.var(entry.point)
        l1 = descendant_at_entry(cfg, entry, lambda w, g: virasoro_poly(1, w, g))
        total = total + xk ** n * l1
        if n:
            total = total + n * xk ** (n - 1) * entry_weight_scalars(cfg, entry, algebra.delta_alpha)
    return total


def global_spin3_sum(m: int, cfg: InsertionConfig) -> RationalSection:
    """sum_k [ x_k^m W_{-2}^{(k)} + m x_k^(m-1) W_{-1}^{(k)} + m(m-1)/2 x_k^(m-2) w_k ]."""
    _require_neutral(cfg)
    ctx = cfg.context
    total = ctx.section(0)
    for entry in cfg.extended():
        xk = ctx.var(entry.point)
        w2 = descendant_at_entry(cfg, entry, lambda w, g: w_poly(2, w, g))
        total = total + xk ** m * w2
        if m >= 1:
            w1 = descendant_at_entry(cfg, entry, lambda w, g: w_poly(1, w, g))
            total = total + m * xk ** (m - 1) * w1
        if m >= 2:
            wk = entry_weight_scalars(cfg, entry, algebra.w_alpha)
            total = total + m * (m - 1) * xk ** (m - 2) * wk / 2
    return total


def symbolic_context(n_bulk: int, n_boundary: int, params: Sequence[str] = (),
                     probe_label: Optional[str] = "t") -> VariableContext:
    points: List[PointVar] = []
    if probe_label is not None:
        points.append(probe(probe_label))
    points += [bulk(k) for k in range(1, n_bulk + 1)]
    points += [bulk_conjugate(k) for k in range(1, n_bulk + 1)]
    points += [boundary(l) for l in range(1, n_boundary + 1)]
    return VariableContext(points, params)


def neutral_symbolic_config(n_bulk: int, n_boundary: int, probe_weight: str = "auto") -> InsertionConfig:
    """Configuration with symbolic weights alpha{k}_{c}, beta{l}_{c} and formal points.

    probe_weight='auto' attaches a probe t whose weight restores neutrality;
    'zero' attaches a weightless probe and fixes the last insertion by neutrality;
    'none' omits the probe and fixes the last insertion by neutrality.

    Raises:
        ConfigError: if there is no insertion to absorb the charge
    """
    if probe_weight not in ("auto", "zero", "none"):
        raise ConfigError(f"probe_weight must be auto, zero or none, got {probe_weight!r}")
    free_bulk = n_bulk
    free_boundary = n_boundary
    if probe_weight != "auto":
        if n_boundary:
            free_boundary -= 1
        elif n_bulk:
            free_bulk -= 1
        else:
            raise ConfigError("A neutral configuration needs at least one insertion")
    params = [f"alpha{k}_{c}" for k in range(1, free_bulk + 1) for c in (1, 2)]
    params += [f"beta{l}_{c}" for l in range(1, free_boundary + 1) for c in (1, 2)]
    ctx = symbolic_context(n_bulk, n_boundary, params, probe_label=None if probe_weight == "none" else "t")
    gamma = ctx.gamma
    Q = algebra.background_charge(gamma)

    alphas = [ctx.weight(ctx.param(f"alpha{k}_1"), ctx.param(f"alpha{k}_2")) for k in range(1, free_bulk + 1)]
    betas = [ctx.weight(ctx.param(f"beta{l}_1"), ctx.param(f"beta{l}_2")) for l in range(1, free_boundary + 1)]
    if probe_weight != "auto":
        partial = algebra.sum_weights(alphas) + algebra.sum_weights(betas) / 2
        if n_boundary:
            betas.append((2 * (Q - partial)).convert(ctx.scalars))
        else:
            alphas.append((Q - partial).convert(ctx.scalars))
    cfg = InsertionConfig(
        bulk=tuple(BulkInsertion(bulk(k + 1), a) for k, a in enumerate(alphas)),
        boundary=tuple(BoundaryInsertion(boundary(l + 1), b) for l, b in enumerate(betas)),
        mu_bulk=(0.0, 0.0),
        mu_boundary=((0.0,) * max(1, n_boundary), (0.0,) * max(1, n_boundary)),
        gamma=gamma,
        context=ctx,
    )
    if probe_weight == "auto":
        cfg = cfg.with_probe(probe())
    elif probe_weight == "zero":
        cfg = cfg.with_probe(probe(), ctx.weight(0, 0))
    logger.debug(f"Built neutral symbolic config N={n_bulk} M={n_boundary} probe={probe_weight}")
    return cfg


def config_from_weights(ctx: VariableContext, alphas: Sequence[Weight], betas: Sequence[Weight],
                        probe_beta: Optional[Weight] = None) -> InsertionConfig:
    """Symbolic configuration with explicit weights on the context's points."""
    cfg = InsertionConfig(
        bulk=tuple(BulkInsertion(bulk(k + 1), a.convert(ctx.scalars)) for k, a in enumerate(alphas)),
        boundary=tuple(BoundaryInsertion(boundary(l + 1), b.convert(ctx.scalars)) for l, b in enumerate(betas)),
        mu_bulk=(0.0, 0.0),
        mu_boundary=((0.0,) * max(1, len(betas)), (0.0,) * max(1, len(betas))),
        gamma=ctx.gamma,
        context=ctx,
    )
    if ctx.has_point(probe()):
        cfg = cfg.with_probe(probe(), None if probe_beta is None else probe_beta.convert(ctx.scalars))
    return cfg
