#!/usr/bin/env python3
"""
Exact free-field verification of Ward identities.

Every check produces a ``WardReport`` whose residual is an exact rational
function; the verdict is ``zero`` exactly when the residual cancels. Conformal
weights and spin-3 quantum numbers can be re-derived from the top pole of the
identities and compared with the closed forms of the algebra module.

Independent reports are fanned out over a thread pool and merged back in name
order, so the output does not depend on scheduling.
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ..config import settings
from ..symbolic import algebra
from ..symbolic.algebra import E1, E2, Weight, bform, cform, csigma, h, hat, inner, omega
from ..symbolic.descendants import DescendantPolynomial, stress_tensor, spin3_current, virasoro_poly, w_poly
from ..symbolic.symrat import (
    PointKind, RationalSection, VariableContext, ZeroCheck, auxiliary, check_zero,
    laurent_coeff, laurent_coeff_at_infinity, probe, sym_id2_residual, sym_id3_residual,
    sym_id3_symmetry_residuals, sym_id_residual, valuation_at_infinity,
)
from ..utils.errors import NeutralityError, SymbolicError
from ..utils.logging import get_logger
from .freefield import (
    ExtendedEntry, InsertionConfig, eval_ff, evaluate_with_entries, global_conformal_sum, global_spin3_sum,
    neutral_symbolic_config, ward_rhs_conformal, ward_rhs_spin3,
)

logger = get_logger(__name__)

CLOSED_FORMS = "use-closed-forms"
SOLVE_WEIGHTS = "solve-weights"


@dataclass
class WardReport:
    """Outcome of one exact identity check."""

    name: str
    parameters: Dict[str, Any]
    residual: RationalSection
    check: ZeroCheck
    derived: Dict[str, str] = field(default_factory=dict)
    derived_match: bool = True
    informational: bool = False
    expect_zero: bool = True
    correction: Optional[str] = None

    @property
    def verdict(self) -> str:
        return self.check.verdict

    @property
    def passed(self) -> bool:
        """Informational entries never fail; others need the expected verdict and matching derived weights."""
        if self.informational:
            return True
        return self.check.is_zero == self.expect_zero and self.derived_match

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "name": self.name,
            "parameters": self.parameters,
            "verdict": self.verdict,
            "passed": self.passed,
            "informational": self.informational,
            "residual": str(self.residual),
        }
        if self.check.witness is not None:
            out["witness"] = self.check.witness
            out["value_at_witness"] = self.check.value_at_witness
        if self.derived:
            out["derived"] = self.derived
            out["derived_match"] = self.derived_match
        if self.correction is not None:
            out["correction"] = self.correction
        return out


def _report(name: str, residual: RationalSection, parameters: Optional[Dict[str, Any]] = None,
            **kwargs: Any) -> WardReport:
    check = check_zero(residual)
    if not check.is_zero:
        logger.debug(f"{name}: nonzero residual, witness {check.witness}")
    return WardReport(name, parameters or {}, residual, check, **kwargs)


def run_parallel(tasks: Dict[str, Callable[[], Any]], threads: Optional[int] = None) -> List[Any]:
    """Run independent tasks on a thread pool; results come back ordered by task name."""
    threads = threads or settings.THREADS
    results: Dict[str, Any] = {}
    with ThreadPoolExecutor(max_workers=max(1, min(threads, len(tasks) or 1))) as executor:
        futures = {executor.submit(fn): name for name, fn in tasks.items()}
        for future in as_completed(futures):
            name = futures[future]
            try:
                results[name] = future.result()
            except Exception as e:
                logger.error(f"Task {name} failed: {e}")
                raise
    return [results[name] for name in sorted(results)]


def _ensure_probe(cfg: InsertionConfig) -> InsertionConfig:
    if cfg.context is None:
        raise SymbolicError("Free-field verification needs a symbolic configuration")
    if cfg.probe is None:
        return cfg.with_probe(probe())
    return cfg


def _ward_entries(cfg: InsertionConfig) -> List[ExtendedEntry]:
    return [e for e in cfg.extended() if e.kind is not PointKind.PROBE]


def _solve_top_pole(difference: RationalSection, cfg: InsertionConfig, n: int, scale: Any,
                    closed_form: Callable[[Weight, Any], Any], label: str) -> Tuple[Dict[str, str], bool]:
    """Read one unknown per entry from the (x_k - t)^-n coefficient, divided by ``scale``.

    Raises:
        SymbolicError: if a solved value still depends on insertion points
    """
    ctx = cfg.context
    t = cfg.probe.point
    derived: Dict[str, str] = {}
    match = True
    for entry in _ward_entries(cfg):
        solved = laurent_coeff(difference, entry.point, t, -n) / scale
        if not solved.free_of_points():
            raise SymbolicError(f"Unsolvable pole system: {label} at {entry.point.name} depends on points")
        expected = ctx.section(closed_form(entry.weight.convert(ctx.scalars), ctx.gamma))
        derived[f"{label}[{entry.point.name}]"] = str(solved)
        if not check_zero(solved - expected).is_zero:
            logger.warning(f"Solved {label} at {entry.point.name} differs from the closed form")
            match = False
    return derived, match


def verify_conformal_ff(n: int, cfg: InsertionConfig, mode: str = CLOSED_FORMS,
                        lhs_poly: Optional[DescendantPolynomial] = None) -> WardReport:
    """L_{-n} insertion at the probe against the conformal Ward right side.

    Raises:
        NeutralityError: if the configuration is not neutral
    """
    cfg = _ensure_probe(cfg)
    ctx = cfg.context
    t = cfg.probe.point
    poly = lhs_poly if lhs_poly is not None else virasoro_poly(n, cfg.probe.beta, ctx.gamma)
    lhs = eval_ff(poly, t, cfg)
    derived: Dict[str, str] = {}
    match = True
    if mode == SOLVE_WEIGHTS:
        difference = lhs - ward_rhs_conformal(n, t, cfg, include_weights=False)
        derived, match = _solve_top_pole(difference, cfg, n, n - 1, algebra.delta_alpha, "Delta")
    residual = lhs - ward_rhs_conformal(n, t, cfg)
    logger.debug(f"conformal n={n} on {cfg.digest()} done")
    return _report(f"conformal-n{n}", residual, {"n": n, "mode": mode, "config": cfg.digest()},
                   derived=derived, derived_match=match)


def verify_spin3_ff(n: int, cfg: InsertionConfig, mode: str = SOLVE_WEIGHTS,
                    lhs_poly: Optional[DescendantPolynomial] = None) -> WardReport:
    """W_{-n} insertion at the probe against the spin-3 Ward right side.

    In solve mode the quantum numbers w_k are read from the top pole, and the
    conformal weights from the top pole of the level-n conformal identity.
    """
    cfg = _ensure_probe(cfg)
    ctx = cfg.context
    t = cfg.probe.point
    poly = lhs_poly if lhs_poly is not None else w_poly(n, cfg.probe.beta, ctx.gamma)
    lhs = eval_ff(poly, t, cfg)
    derived: Dict[str, str] = {}
    match = True
    if mode == SOLVE_WEIGHTS:
        difference = lhs - ward_rhs_spin3(n, t, cfg, include_weights=False)
        derived, match = _solve_top_pole(difference, cfg, n, -(n - 1) * (n - 2) * Fraction(1, 2),
                                         algebra.w_alpha, "w")
        conformal_lhs = eval_ff(virasoro_poly(n, cfg.probe.beta, ctx.gamma), t, cfg)
        conformal_diff = conformal_lhs - ward_rhs_conformal(n, t, cfg, include_weights=False)
        delta_derived, delta_match = _solve_top_pole(conformal_diff, cfg, n, n - 1, algebra.delta_alpha, "Delta")
        derived.update(delta_derived)
        match = match and delta_match
    residual = lhs - ward_rhs_spin3(n, t, cfg)
    return _report(f"spin3-n{n}", residual, {"n": n, "mode": mode, "config": cfg.digest()},
                   derived=derived, derived_match=match)


def verify_global_ff(cfg: InsertionConfig, threads: Optional[int] = None) -> List[WardReport]:
    """Global conformal (n = 0, 1, 2) and spin-3 (m = 0..4) identities."""
    if cfg.context is None:
        raise SymbolicError("Free-field verification needs a symbolic configuration")
    tasks: Dict[str, Callable[[], WardReport]] = {}
    for n in range(3):
        tasks[f"global-conformal-n{n}"] = (lambda n=n: _report(
            f"global-conformal-n{n}", global_conformal_sum(n, cfg), {"n": n, "config": cfg.digest()}))
    for m in range(5):
        tasks[f"global-spin3-m{m}"] = (lambda m=m: _report(
            f"global-spin3-m{m}", global_spin3_sum(m, cfg), {"m": m, "config": cfg.digest()}))
    reports = run_parallel(tasks, threads)
    logger.info(f"Global Ward identities: {sum(r.passed for r in reports)}/{len(reports)} vanish")
    return reports


def _zero_probe(cfg: InsertionConfig) -> InsertionConfig:
    """Weightless probe at t, its charge carried by the last insertion so neutrality is kept."""
    if cfg.context is None:
        raise SymbolicError("Free-field verification needs a symbolic configuration")
    ctx = cfg.context
    point = cfg.probe.point if cfg.probe is not None else probe()
    if cfg.probe is not None and not cfg.probe.beta.is_zero():
        moved = cfg.probe.beta
        if cfg.boundary:
            last = cfg.boundary[-1]
            shifted = replace(last, beta=(last.beta + moved).convert(ctx.scalars))
            cfg = replace(cfg, boundary=cfg.boundary[:-1] + (shifted,))
        elif cfg.bulk:
            last = cfg.bulk[-1]
            shifted = replace(last, alpha=(last.alpha + moved / 2).convert(ctx.scalars))
            cfg = replace(cfg, bulk=cfg.bulk[:-1] + (shifted,))
        else:
            raise NeutralityError("The probe charge needs an insertion to move onto")
    return cfg.with_probe(point, ctx.weight(0, 0))


def verify_local_currents_ff(cfg: InsertionConfig) -> List[WardReport]:
    """<T(t) prod V> and <W(t) prod V> against their pole expansions around the insertions."""
    cfg = _zero_probe(cfg)
    ctx = cfg.context
    t = cfg.probe.point
    t_value = eval_ff(stress_tensor(ctx.gamma), t, cfg)
    w_value = eval_ff(spin3_current(ctx.gamma), t, cfg)
    return [
        _report("local-T", t_value - ward_rhs_conformal(2, t, cfg), {"config": cfg.digest()}),
        _report("local-W", w_value - ward_rhs_spin3(3, t, cfg), {"config": cfg.digest()}),
    ]


def verify_current_covariance_ff(cfg: InsertionConfig) -> List[WardReport]:
    """T(t) decays like t^-4 and W(t) like t^-6 at infinity (covariance under z -> -1/z)."""
    cfg = _zero_probe(cfg)
    ctx = cfg.context
    t = cfg.probe.point
    reports = []
    for label, poly, spin in (("T", stress_tensor(ctx.gamma), 2), ("W", spin3_current(ctx.gamma), 3)):
        value = eval_ff(poly, t, cfg)
        decay = 2 * spin
        top = valuation_at_infinity(value, t)
        highest = 0 if top == float("inf") else max(0, int(-top))
        for order in range(-(decay - 1), highest + 1):
            coeff = laurent_coeff_at_infinity(value, t, order)
            reports.append(_report(f"decay-{label}-order{order}", coeff,
                                   {"current": label, "order": order, "config": cfg.digest()}))
    return reports


# Proof-identity catalog

_CATALOG_PARAMS = ("alpha_1", "alpha_2", "beta_1", "beta_2", "u_1", "u_2", "v_1", "v_2", "w_1", "w_2", "lam")


def _catalog_context() -> VariableContext:
    return VariableContext([auxiliary("x"), probe()], _CATALOG_PARAMS)


def _root(ctx: VariableContext, i: int) -> Weight:
    return (E1 if i == 1 else E2).convert(ctx.scalars)


def algebra_selftest() -> List[WardReport]:
    """Exact invariants of the weight-space layer on symbolic weights."""
    ctx = _catalog_context()
    sc = ctx.scalars
    g = ctx.gamma
    u = ctx.weight(ctx.param("u_1"), ctx.param("u_2"))
    v = ctx.weight(ctx.param("v_1"), ctx.param("v_2"))
    w = ctx.weight(ctx.param("w_1"), ctx.param("w_2"))
    lam = ctx.param("lam")
    sec = ctx.section
    reports = []
    for i in (1, 2):
        for j in (1, 2):
            value = inner(algebra.fundamental_weight(i, sc), _root(ctx, j))
            reports.append(_report(f"omega{i}-e{j}-duality", sec(value - (1 if i == j else 0))))
    reports.append(_report("h-sum", sec(h(1, u) + h(2, u) + h(3, u))))
    reports.append(_report("h1-is-omega1", sec(h(1, u) - inner(algebra.fundamental_weight(1, sc), u))))
    reports.append(_report("h3-is-minus-omega2", sec(h(3, u) + inner(algebra.fundamental_weight(2, sc), u))))
    for i in (1, 2):
        reports.append(_report(f"rho-e{i}", sec(inner(algebra.weyl_vector().convert(sc), _root(ctx, i)) - 1)))
    reports.append(_report("cartan-e1e2", sec(inner(_root(ctx, 1), _root(ctx, 2)) + 1)))
    reports.append(_report("inner-symmetric", sec(inner(u, v) - inner(v, u))))
    reports.append(_report("bform-linear", sec(bform(lam * u + v, w) - lam * bform(u, w) - bform(v, w))))
    reports.append(_report("bform-linear-right", sec(bform(w, lam * u + v) - lam * bform(w, u) - bform(w, v))))
    reports.append(_report("cform-linear", sec(cform(lam * u + v, w, u) - lam * cform(u, w, u) - cform(v, w, u))))
    reports.append(_report("cform-cyclic", sec(cform(u, v, w) - cform(v, w, u))))
    q = algebra.q_constant(g)
    Q = algebra.background_charge(g)
    reports.append(_report("background-charge", sec(inner(Q, _root(ctx, 1)) - (g + 2 / g))))
    reports.append(_report("delta-root", sec(algebra.delta_alpha(g * _root(ctx, 1), g) - 1)))
    reports.append(_report("w-root", sec(algebra.w_alpha(g * _root(ctx, 1), g) - 2 * q)))
    return reports


def symmetrization_suite(max_two_point: int = 12, max_three_point: int = 10,
                         threads: Optional[int] = None) -> List[WardReport]:
    """Exact pole-symmetrization identities behind the Ward proofs."""
    tasks: Dict[str, Callable[[], WardReport]] = {}
    for n in range(2, max_two_point + 1):
        tasks[f"sym-two-point-n{n:02d}"] = (lambda n=n: _report(
            f"sym-two-point-n{n:02d}", sym_id_residual(n), {"n": n}))
    for n in range(3, max_two_point + 1):
        tasks[f"sym-weighted-n{n:02d}"] = (lambda n=n: _report(
            f"sym-weighted-n{n:02d}", sym_id2_residual(n), {"n": n}))
    for n in range(3, max_three_point + 1):
        tasks[f"sym-three-point-n{n:02d}"] = (lambda n=n: _report(
            f"sym-three-point-n{n:02d}", sym_id3_residual(n), {"n": n}))
        for k, residual in enumerate(sym_id3_symmetry_residuals(n)):
            tasks[f"sym-three-point-n{n:02d}-perm{k}"] = (lambda n=n, k=k, residual=residual: _report(
                f"sym-three-point-n{n:02d}-perm{k}", residual, {"n": n, "permutation": k}))
    reports = run_parallel(tasks, threads)
    logger.info(f"Symmetrization identities: {sum(r.passed for r in reports)}/{len(reports)} vanish")
    return reports


def _single_charge_coefficient(ctx: VariableContext, poly: DescendantPolynomial, charge: Weight,
                               order: int) -> RationalSection:
    """(x - t)^order coefficient of ``poly`` at t when a single charge sits at x."""
    x = auxiliary("x")
    entries = [ExtendedEntry(x, charge, PointKind.AUXILIARY, 0)]
    value = evaluate_with_entries(poly, probe(), entries, ctx)
    return laurent_coeff(value, x, probe(), order)


def _catalog(ctx: VariableContext) -> List[Tuple[str, Callable[[], Any], bool]]:
    """(name, residual thunk, informational) for each identity used in the Ward proofs."""
    g = ctx.gamma
    q = algebra.q_constant(g)
    alpha = ctx.weight(ctx.param("alpha_1"), ctx.param("alpha_2"))
    beta = ctx.weight(ctx.param("beta_1"), ctx.param("beta_2"))
    sec = ctx.section
    entries: List[Tuple[str, Callable[[], Any], bool]] = []

    def ge(i: int) -> Weight:
        return g * _root(ctx, i)

    def delta(i: int, j: int) -> int:
        return 1 if i != j else 0

    for i in (1, 2):
        ih = hat(i)
        h2i = h(2, _root(ctx, i))
        # W_{-2}^beta on gamma e_i log|. - t|^-1
        entries.append((f"desc-w2-a[i={i}]", lambda i=i, ih=ih, h2i=h2i: _single_charge_coefficient(
            ctx, w_poly(2, beta, g), ge(i), -2) - sec(2 * h2i * omega(ih, beta) * (1 + inner(beta, ge(i)) / 2)), False))
        entries.append((f"desc-w2-b[i={i}]", lambda i=i, ih=ih, h2i=h2i: sec(
            csigma(beta, ge(i), alpha)
            + h2i * (omega(ih, alpha) * inner(beta, ge(i)) + omega(ih, beta) * inner(alpha, ge(i)))), False))
        for j in (1, 2):
            entries.append((f"desc-w2-c[i={i},j={j}]", lambda i=i, j=j, ih=ih, h2i=h2i: sec(
                csigma(beta, ge(i), ge(j))
                + g * h2i * inner(beta, ge(i)) * delta(i, j)
                + inner(ge(i), ge(j)) * h2i * omega(ih, beta)), False))
        j = ih
        entries.append((f"desc-w2-d[i={i},j={j}]", lambda i=i, j=j, h2i=h2i: sec(
            h2i * omega(j, beta) + 2 * h(2, beta) - h2i * inner(_root(ctx, i), beta)), False))
        # vertex-pair group
        entries.append((f"vertex-pair-a[i={i}]", lambda i=i, ih=ih, h2i=h2i: sec(
            q * bform(ge(i), alpha) + 2 * cform(ge(i), ge(i), alpha)
            - q * h2i * inner(ge(i), alpha) - 4 * h2i * omega(ih, alpha)), True))
        entries.append((f"vertex-pair-b[i={i}]", lambda i=i, ih=ih, h2i=h2i: sec(
            csigma(alpha, ge(i), beta)
            + h2i * (omega(ih, beta) * inner(ge(i), alpha) + omega(ih, alpha) * inner(ge(i), beta))), False))
        entries.append((f"vertex-pair-c[i={i}]", lambda i=i, ih=ih, h2i=h2i: sec(
            q * (bform(alpha, ge(i)) - bform(ge(i), alpha)) + 2 * cform(alpha - ge(i), alpha, ge(i))
            + 4 * h2i * omega(ih, alpha) * (1 + inner(ge(i), alpha) / 2)), False))
        for j in (1, 2):
            # two-fold integral identities
            for n in (3, 4, 5, 6):
                entries.append((f"twofold-1[i={i},j={j},n={n}]", lambda i=i, j=j, n=n, ih=ih, h2i=h2i: sec(
                    (n - 2) * (q / 2 * bform(ge(i), ge(j)) + cform(ge(i), ge(i), ge(j)))
                    - cform(ge(i), ge(j), beta) - cform(ge(j), ge(i), beta)
                    - 2 * g * h2i * delta(i, j) * ((n - 2) + inner(ge(i), beta) / 2)
                    - h2i * ((n - 2) * q + 2 * omega(ih, beta)) * inner(ge(i), ge(j)) / 2), False))
            entries.append((f"twofold-2[i={i},j={j}]", lambda i=i, j=j, h2i=h2i: sec(
                q / 2 * (bform(ge(i), ge(j)) - bform(ge(j), ge(i)))
                + cform(ge(i), ge(i), ge(j)) - cform(ge(j), ge(j), ge(i))
                - 2 * g * h2i * (1 + inner(ge(i), ge(j)) / 2) * delta(i, j)), False))
            entries.append((f"twofold-3[i={i},j={j}]", lambda i=i, j=j, ih=ih, h2i=h2i: sec(
                cform(alpha, ge(i), ge(j)) + cform(alpha, ge(j), ge(i))
                + g * h2i * inner(ge(i), alpha) * delta(i, j)
                + inner(ge(i), ge(j)) * h2i * omega(ih, alpha)), False))
        j = ih
        entries.append((f"C-root[i={i},j={j}]", lambda i=i, j=j, h2i=h2i: sec(
            cform(ge(i), ge(j), ge(j)) + g * h2i * inner(ge(i), ge(j))), False))
        # level-one descendants of a root vertex
        entries.append((f"L-1-root[i={i}]", lambda i=i: 2 * _single_charge_coefficient(
            ctx, virasoro_poly(1, beta, g), ge(i), -1) - sec(inner(beta, ge(i))), False))
        entries.append((f"W-1-root[i={i}]", lambda i=i, ih=ih, h2i=h2i: 2 * _single_charge_coefficient(
            ctx, w_poly(1, beta, g), ge(i), -1) - sec(-h2i * (q - 2 * omega(ih, beta)) * inner(beta, ge(i))), False))
        for n in (1, 2, 3, 4, 5):
            entries.append((f"J-closed-form[i={i},n={n}]", lambda i=i, n=n, ih=ih, h2i=h2i: _single_charge_coefficient(
                ctx, w_poly(n, beta, g), ge(i), -n)
                - sec(h2i * ((n - 2) * q + 2 * omega(ih, beta)) * (n - 1 + inner(beta, ge(i)) / 2)), False))
    entries.append(("C-root-value[1,2]", lambda: sec(cform(ge(1), ge(2), ge(2)) + g ** 3), False))
    return entries


def minimal_correction(residual: RationalSection) -> Optional[str]:
    """Lowest total-degree part of a nonzero residual, negated.

    Adding it to the stated right-hand side is the smallest monomial-level
    change that removes the leading discrepancy.
    """
    if residual.is_zero():
        return None
    numer = residual.numer
    terms = numer.terms()
    lowest = min(sum(monom) for monom, _ in terms)
    part = numer.ring({monom: coeff for monom, coeff in terms if sum(monom) == lowest})
    return str(-(part.as_expr() / residual.denom.as_expr()))


def identity_conformance(threads: Optional[int] = None) -> List[WardReport]:
    """Check every catalog identity and the weight-space invariants; entries that are
    suspect as stated are flagged informational and never fail."""
    ctx = _catalog_context()
    tasks: Dict[str, Callable[[], WardReport]] = {}
    for name, thunk, informational in _catalog(ctx):
        informational = informational or name.split("[")[0] in settings.INFORMATIONAL_IDENTITIES
        tasks[name] = (lambda name=name, thunk=thunk, informational=informational: _report(
            name, thunk(), informational=informational))
    reports = algebra_selftest() + run_parallel(tasks, threads)
    failed = [r.name for r in reports if not r.passed]
    for r in reports:
        if r.informational and not r.check.is_zero:
            r.correction = minimal_correction(r.residual)
            logger.warning(f"Informational identity {r.name} has residual {r.residual}, minimal correction {r.correction}")
    logger.info(f"Identity catalog: {len(reports) - len(failed)}/{len(reports)} pass")
    return reports


def mutation_sensitivity(count: int = 10, seed: int = 0, cfg: Optional[InsertionConfig] = None) -> List[WardReport]:
    """Perturb one coefficient of a generator by +1 and check the Ward residual turns nonzero.

    Each returned report is ``passed`` when the mutation was detected.
    """
    cfg = cfg or neutral_symbolic_config(0, 2)
    ctx = cfg.context
    beta = cfg.probe.beta
    rng = np.random.default_rng(seed)
    reports = []
    for k in range(count):
        if rng.integers(2) == 0:
            n = int(rng.integers(2, 5))
            base = virasoro_poly(n, beta, ctx.gamma)
            index = int(rng.integers(len(base)))
            report = verify_conformal_ff(n, cfg, CLOSED_FORMS, base.perturbed(index))
            kind = "virasoro"
        else:
            n = int(rng.integers(3, 5))
            base = w_poly(n, beta, ctx.gamma)
            index = int(rng.integers(len(base)))
            report = verify_spin3_ff(n, cfg, CLOSED_FORMS, base.perturbed(index))
            kind = "w"
        detected = not report.check.is_zero
        reports.append(WardReport(
            name=f"mutation-{k}", parameters={"generator": kind, "n": n, "term": index},
            residual=report.residual, check=report.check, expect_zero=False,
            derived={"detected": str(detected)},
        ))
        logger.debug(f"mutation {k}: {kind} n={n} term={index} detected={detected}")
    return reports


def mutation_detected(report: WardReport) -> bool:
    return not report.check.is_zero
