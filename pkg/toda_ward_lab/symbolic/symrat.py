#!/usr/bin/env python3
"""
Exact multivariate rational functions in insertion-point variables.

A ``VariableContext`` fixes the ordered list of formal point variables (probe
t, bulk z_k with independent partners zbar_k, boundary s_l, auxiliary x/y/z)
together with the scalar parameters, and owns a single sympy fraction field
over all of them. ``RationalSection`` wraps an element of that field.

Laurent coefficients are extracted by substituting v = center + eps with a
hidden generator eps, splitting numerator and denominator by eps-degree and
dividing the resulting power series.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from sympy.polys.fields import FracElement

from ..config import settings
from ..utils.errors import SymbolicError
from ..utils.logging import get_logger
from .algebra import ScalarField, Weight

logger = get_logger(__name__)

EPS = "eps"


class PointKind(Enum):
    PROBE = "probe"
    BULK = "bulk"
    BULK_CONJUGATE = "bulk-conjugate"
    BOUNDARY = "boundary"
    AUXILIARY = "auxiliary"


@dataclass(frozen=True)
class PointVar:
    """Formal insertion point. Auxiliary points carry a label instead of an index."""

    kind: PointKind
    index: int = 0
    label: str = ""

    @property
    def name(self) -> str:
        if self.kind is PointKind.PROBE:
            return self.label or "t"
        if self.kind is PointKind.BULK:
            return f"z{self.index}"
        if self.kind is PointKind.BULK_CONJUGATE:
            return f"zbar{self.index}"
        if self.kind is PointKind.BOUNDARY:
            return f"s{self.index}"
        return self.label

    def conjugate(self) -> "PointVar":
        if self.kind is PointKind.BULK:
            return PointVar(PointKind.BULK_CONJUGATE, self.index)
        if self.kind is PointKind.BULK_CONJUGATE:
            return PointVar(PointKind.BULK, self.index)
        return self

    def __hash__(self) -> int:
        return hash(self.name)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PointVar) and self.name == other.name

    def __repr__(self) -> str:
        return self.name


def probe(label: str = "t") -> PointVar:
    return PointVar(PointKind.PROBE, 0, label)


def bulk(k: int) -> PointVar:
    return PointVar(PointKind.BULK, k)


def bulk_conjugate(k: int) -> PointVar:
    return PointVar(PointKind.BULK_CONJUGATE, k)


def boundary(l: int) -> PointVar:
    return PointVar(PointKind.BOUNDARY, l)


def auxiliary(label: str) -> PointVar:
    return PointVar(PointKind.AUXILIARY, 0, label)


class VariableContext:
    """Frozen set of point variables and scalar parameters sharing one field.

    Args:
        points: Point variables, in the order used for the monomial ordering
        params: Extra scalar parameter names (symbolic weight coordinates)
    """

    __slots__ = ("points", "scalars", "field", "_by_name")

    def __init__(self, points: Sequence[PointVar], params: Sequence[str] = ()):
        names = [p.name for p in points]
        if len(set(names)) != len(names):
            raise SymbolicError(f"Point names must be unique, got {names}")
        if EPS in names or EPS in params:
            raise SymbolicError(f"'{EPS}' is reserved")
        object.__setattr__(self, "points", tuple(points))
        object.__setattr__(self, "scalars", ScalarField(params, extra=tuple(names) + (EPS,)))
        object.__setattr__(self, "field", self.scalars.field)
        object.__setattr__(self, "_by_name", {p.name: p for p in points})

    def __setattr__(self, key, value):
        raise AttributeError("VariableContext is immutable")

    def __repr__(self) -> str:
        return f"VariableContext(points={[p.name for p in self.points]}, params={list(self.scalars.params)})"

    @property
    def gamma(self) -> FracElement:
        return self.scalars.gamma

    def param(self, name: str) -> FracElement:
        return self.scalars.gen(name)

    def has_point(self, p: PointVar) -> bool:
        return p.name in self._by_name

    def point(self, name: str) -> PointVar:
        try:
            return self._by_name[name]
        except KeyError:
            raise SymbolicError(f"Unknown point '{name}' in {self!r}")

    def gen(self, p: PointVar) -> FracElement:
        if not self.has_point(p):
            raise SymbolicError(f"Point {p.name} is not in {self!r}")
        return self.scalars.gen(p.name)

    def var(self, p: PointVar) -> "RationalSection":
        return RationalSection(self, self.gen(p))

    def eps(self) -> FracElement:
        return self.scalars.gen(EPS)

    def convert(self, value: Any) -> FracElement:
        if isinstance(value, RationalSection):
            if value.context is not self and value.context.field != self.field:
                raise SymbolicError("RationalSection belongs to another context")
            return value.value
        return self.scalars.convert(value)

    def section(self, value: Any) -> "RationalSection":
        return RationalSection(self, self.convert(value))

    def weight(self, c1: Any, c2: Any) -> Weight:
        return Weight(self.convert(c1), self.convert(c2))


Operand = Union["RationalSection", int, Fraction, FracElement]


class RationalSection:
    """Exact rational function of the point variables of a context.

    Arithmetic with ints, Fractions and scalars of the same field is closed.
    The wrapped fraction is always cancelled with a sign-normalized
    denominator, so equality and zero tests are structural.
    """

    __slots__ = ("context", "value")

    def __init__(self, context: VariableContext, value: FracElement):
        self.context = context
        self.value = value

    def _coerce(self, other: Operand) -> FracElement:
        return self.context.convert(other)

    def __add__(self, other: Operand) -> "RationalSection":
        return RationalSection(self.context, self.value + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other: Operand) -> "RationalSection":
        return RationalSection(self.context, self.value - self._coerce(other))

    def __rsub__(self, other: Operand) -> "RationalSection":
        return RationalSection(self.context, self._coerce(other) - self.value)

    def __mul__(self, other: Operand) -> "RationalSection":
        return RationalSection(self.context, self.value * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Operand) -> "RationalSection":
        return RationalSection(self.context, self.value / self._coerce(other))

    def __rtruediv__(self, other: Operand) -> "RationalSection":
        return RationalSection(self.context, self._coerce(other) / self.value)

    def __pow__(self, n: int) -> "RationalSection":
        return RationalSection(self.context, self.value ** n)

    def __neg__(self) -> "RationalSection":
        return RationalSection(self.context, -self.value)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (RationalSection, int, Fraction, FracElement)):
            return self.value == self._coerce(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)

    def __bool__(self) -> bool:
        return bool(self.value)

    @property
    def numer(self):
        return self.value.numer

    @property
    def denom(self):
        return self.value.denom

    def is_zero(self) -> bool:
        return not self.value.numer

    def depends_on(self, p: PointVar) -> bool:
        idx = self.context.scalars.index(p.name)
        return any(m[idx] for m in self.value.numer.itermonoms()) or \
            any(m[idx] for m in self.value.denom.itermonoms())

    def free_of_points(self) -> bool:
        return not any(self.depends_on(p) for p in self.context.points)

    def as_expr(self) -> sympy.Expr:
        return self.value.as_expr()

    def __str__(self) -> str:
        return str(self.as_expr())

    def __repr__(self) -> str:
        return f"RationalSection({self})"


def derive(f: RationalSection, v: PointVar) -> RationalSection:
    """Exact partial derivative of ``f`` in the point variable ``v``."""
    return RationalSection(f.context, f.value.diff(f.context.gen(v)))


def _split_by_degree(poly, index: int) -> Dict[int, Any]:
    """Split a polynomial into {degree in generator ``index``: coefficient polynomial}."""
    ring = poly.ring
    parts: Dict[int, Dict[tuple, Any]] = {}
    for monom, coeff in poly.iterterms():
        d = monom[index]
        reduced = monom[:index] + (0,) + monom[index + 1:]
        parts.setdefault(d, {})[reduced] = coeff
    return {d: ring.from_dict(terms) for d, terms in parts.items()}


def _series_coefficient(context: VariableContext, numer, denom, target: int) -> FracElement:
    """Coefficient of eps^target in numer/denom, both polynomials in eps with denom(0) != 0."""
    K = context.field
    if target < 0:
        return K.zero
    e_idx = context.scalars.index(EPS)
    n_parts = _split_by_degree(numer, e_idx)
    d_parts = _split_by_degree(denom, e_idx)
    d0 = K.new(d_parts[0])
    coeffs: List[FracElement] = []
    for m in range(target + 1):
        acc = K.new(n_parts[m]) if m in n_parts else K.zero
        for j in range(1, m + 1):
            if j in d_parts:
                acc = acc - K.new(d_parts[j]) * coeffs[m - j]
        coeffs.append(acc / d0)
    return coeffs[target]


def _strip_eps_power(context: VariableContext, poly) -> Tuple[int, Any]:
    """Write poly = eps^k * rest with rest(eps=0) != 0."""
    e_idx = context.scalars.index(EPS)
    k = min(m[e_idx] for m in poly.itermonoms())
    if k == 0:
        return 0, poly
    ring = poly.ring
    shifted = {m[:e_idx] + (m[e_idx] - k,) + m[e_idx + 1:]: c for m, c in poly.iterterms()}
    return k, ring.from_dict(shifted)


def laurent_coeff(f: RationalSection, v: PointVar, center: PointVar, order: int) -> RationalSection:
    """Coefficient of (v - center)^order in the Laurent expansion of f in v around center.

    Raises:
        SymbolicError: if v and center are the same variable
    """
    ctx = f.context
    if v == center:
        raise SymbolicError(f"Cannot expand {v.name} around itself")
    if not f.value.numer:
        return ctx.section(0)
    ring = ctx.field.ring
    v_poly = ctx.gen(v).to_poly()
    shift = ctx.gen(center).to_poly() + ctx.eps().to_poly()
    numer = f.value.numer.compose(v_poly, shift)
    denom = f.value.denom.compose(v_poly, shift)
    kn, numer = _strip_eps_power(ctx, numer)
    kd, denom = _strip_eps_power(ctx, denom)
    # f = eps^(kn - kd) * numer/denom
    value = _series_coefficient(ctx, numer, denom, order - (kn - kd))
    return RationalSection(ctx, value)


def laurent_coeff_at_infinity(f: RationalSection, v: PointVar, order: int) -> RationalSection:
    """Coefficient of v^order in the expansion of f around v = infinity."""
    ctx = f.context
    if not f.value.numer:
        return ctx.section(0)
    v_gen = ctx.gen(v).to_poly()
    eps = ctx.eps().to_poly()

    def reverse(poly):
        deg = poly.degree(v_gen)
        out = poly.ring.zero
        for d, part in _split_by_degree(poly, ctx.scalars.index(v.name)).items():
            out += part * eps ** (deg - d)
        return deg, out

    dn, numer = reverse(f.value.numer)
    dd, denom = reverse(f.value.denom)
    # f(1/eps) = eps^(dd - dn) * numer/denom, and v^order = eps^(-order)
    kn, numer = _strip_eps_power(ctx, numer)
    kd, denom = _strip_eps_power(ctx, denom)
    value = _series_coefficient(ctx, numer, denom, -order - (dd - dn) - (kn - kd))
    return RationalSection(ctx, value)


def valuation_at_infinity(f: RationalSection, v: PointVar) -> float:
    """deg_v(denominator) - deg_v(numerator); +inf for the zero function."""
    if not f.value.numer:
        return float("inf")
    g = f.context.gen(v).to_poly()
    return f.value.denom.degree(g) - f.value.numer.degree(g)


@dataclass(frozen=True)
class ZeroCheck:
    """Outcome of ``check_zero``; ``witness`` maps symbol names to integers."""

    is_zero: bool
    witness: Optional[Dict[str, int]] = None
    value_at_witness: Optional[Fraction] = None

    @property
    def verdict(self) -> str:
        return "zero" if self.is_zero else "nonzero"


def _evaluate_poly(poly, values: Sequence[int]):
    return poly.evaluate(list(zip(poly.ring.gens, values)))


def check_zero(f: RationalSection, seed: int = settings.WITNESS_SEED) -> ZeroCheck:
    """Decide f == 0; on failure return an integer point where f is finite and nonzero."""
    if f.is_zero():
        return ZeroCheck(True)
    rng = np.random.default_rng(seed)
    ngens = f.context.field.ngens
    names = f.context.scalars.names
    e_idx = f.context.scalars.index(EPS)
    for _ in range(settings.WITNESS_ATTEMPTS):
        values = [int(v) for v in rng.integers(-settings.WITNESS_RANGE, settings.WITNESS_RANGE + 1, size=ngens)]
        values[e_idx] = 0
        den = _evaluate_poly(f.value.denom, values)
        if not den:
            continue
        num = _evaluate_poly(f.value.numer, values)
        if num:
            domain = f.context.field.domain
            ratio = sympy.Rational(domain.to_sympy(num)) / sympy.Rational(domain.to_sympy(den))
            witness = {name: value for name, value in zip(names, values) if name != EPS}
            return ZeroCheck(False, witness, Fraction(int(ratio.p), int(ratio.q)))
    logger.warning("No witness found for a nonzero rational function; reporting without one")
    return ZeroCheck(False)


def substitute(f: RationalSection, mapping: Dict[PointVar, PointVar]) -> RationalSection:
    """Simultaneous renaming of point variables."""
    ctx = f.context
    pairs = [(ctx.gen(a).to_poly(), ctx.gen(b).to_poly()) for a, b in mapping.items()]
    if not pairs:
        return f
    numer = f.value.numer.compose(list(pairs))
    denom = f.value.denom.compose(list(pairs))
    return RationalSection(ctx, ctx.field.new(numer, denom))


def swap_conjugates(f: RationalSection) -> RationalSection:
    """Exchange every z_k with its partner zbar_k."""
    mapping = {}
    for p in f.context.points:
        if p.kind in (PointKind.BULK, PointKind.BULK_CONJUGATE) and f.context.has_point(p.conjugate()):
            mapping[p] = p.conjugate()
    return substitute(f, mapping)


def numeric_function(f: RationalSection, arguments: Sequence[str]) -> Callable[..., Any]:
    """Lambdify ``f`` in the named symbols (points, gamma, parameters) with numpy."""
    lookup = dict(zip(f.context.scalars.names, f.context.scalars.symbols))
    try:
        symbols = [lookup[a] for a in arguments]
    except KeyError as exc:
        raise SymbolicError(f"Unknown symbol {exc.args[0]!r}")
    return sympy.lambdify(symbols, f.as_expr(), modules="numpy")


# Symmetrization identities used in the Ward proofs.

def _aux_context(labels: Iterable[str] = ("x", "y", "z", "t")) -> Tuple[VariableContext, Dict[str, RationalSection]]:
    pts = [probe() if l == "t" else auxiliary(l) for l in labels]
    ctx = VariableContext(pts)
    return ctx, {p.name: ctx.var(p) for p in pts}


def sym_id_residual(n: int) -> RationalSection:
    """sum_{p=1}^{n-1} 1/((x-t)^p (y-t)^(n-p)) - (1/(x-y))(1/(y-t)^(n-1) - 1/(x-t)^(n-1))."""
    if n < 2:
        raise SymbolicError(f"n must be >= 2, got {n}")
    ctx, v = _aux_context(("x", "y", "t"))
    x, y, t = v["x"], v["y"], v["t"]
    lhs = ctx.section(0)
    for p in range(1, n):
        lhs = lhs + 1 / ((x - t) ** p * (y - t) ** (n - p))
    rhs = (1 / (y - t) ** (n - 1) - 1 / (x - t) ** (n - 1)) / (x - y)
    return lhs - rhs


def sym_id2_residual(n: int) -> RationalSection:
    """Weighted two-point symmetrization with weights p - 1."""
    if n < 3:
        raise SymbolicError(f"n must be >= 3, got {n}")
    ctx, v = _aux_context(("x", "y", "t"))
    x, y, t = v["x"], v["y"], v["t"]
    lhs = ctx.section(0)
    for p in range(2, n):
        lhs = lhs + (p - 1) / ((t - x) ** p * (t - y) ** (n - p))
    rhs = (1 / (t - y) ** (n - 2) - 1 / (t - x) ** (n - 2)) / (y - x) ** 2 \
        - (n - 2) / ((y - x) * (t - x) ** (n - 1))
    return lhs - rhs


def _sym_id3_rhs(n: int, x: RationalSection, y: RationalSection, z: RationalSection,
                 t: RationalSection) -> RationalSection:
    return (1 / ((z - y) * (z - x) * (t - z) ** (n - 2))
            + 1 / ((y - x) * (y - z) * (t - y) ** (n - 2))
            + 1 / ((x - y) * (x - z) * (t - x) ** (n - 2)))


def sym_id3_residual(n: int) -> RationalSection:
    """Three-point nested symmetrization."""
    if n < 3:
        raise SymbolicError(f"n must be >= 3, got {n}")
    ctx, v = _aux_context(("x", "y", "z", "t"))
    x, y, z, t = v["x"], v["y"], v["z"], v["t"]
    lhs = ctx.section(0)
    for p1 in range(1, n - 1):
        for p2 in range(1, p1 + 1):
            lhs = lhs + 1 / ((t - x) ** p2 * (t - y) ** (p1 - p2 + 1) * (t - z) ** (n - p1 - 1))
    return lhs - _sym_id3_rhs(n, x, y, z, t)


def sym_id3_symmetry_residuals(n: int) -> List[RationalSection]:
    """Residuals of the three-point right side under each permutation of (x, y, z)."""
    from itertools import permutations

    ctx, v = _aux_context(("x", "y", "z", "t"))
    base = _sym_id3_rhs(n, v["x"], v["y"], v["z"], v["t"])
    out = []
    for perm in permutations(("x", "y", "z")):
        permuted = _sym_id3_rhs(n, v[perm[0]], v[perm[1]], v[perm[2]], v["t"])
        out.append(permuted - base)
    return out
