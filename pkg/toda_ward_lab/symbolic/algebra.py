#!/usr/bin/env python3
"""
Exact sl3 weight-space arithmetic.

Weights are stored in the simple-root basis (e1, e2) and paired through the
Cartan matrix. The module is generic in the coordinate type: coordinates may be
elements of a ``ScalarField`` (exact rational functions of gamma and user
parameters), ``fractions.Fraction`` values, floats, or numpy arrays. The forms
h_i, B and C reduce to integer combinations of the coordinates, so no
coordinate type is ever coerced into another.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence, Tuple

import numpy as np
import sympy
from sympy.polys.domains import QQ
from sympy.polys.fields import FracElement, FracField
from sympy.polys.orderings import grlex

from ..utils.errors import AlgebraError
from ..utils.logging import get_logger

logger = get_logger(__name__)

GAMMA = "gamma"

# Gram matrix of the simple roots (Cartan matrix); its inverse is INVERSE_CARTAN_X3 / 3
CARTAN = np.array([[2.0, -1.0], [-1.0, 2.0]])
INVERSE_CARTAN_X3 = ((2, 1), (1, 2))


class ScalarField:
    """Field of exact rational functions in gamma and extra formal symbols.

    The underlying object is a sympy ``FracField`` over QQ with graded
    lexicographic order, so elements are kept as cancelled fractions and
    equality is decidable.

    Args:
        params: Names of user parameters (symbolic weight coordinates, ...)
        extra: Further generator names appended after the parameters
    """

    def __init__(self, params: Sequence[str] = (), extra: Sequence[str] = ()):
        names = (GAMMA,) + tuple(params) + tuple(extra)
        if len(set(names)) != len(names):
            raise AlgebraError(f"Duplicate symbol names in {names}")
        self.names: Tuple[str, ...] = names
        self.params: Tuple[str, ...] = tuple(params)
        self.symbols = tuple(sympy.Symbol(n) for n in names)
        self.field = FracField(self.symbols, QQ, grlex)
        self._index = {n: i for i, n in enumerate(names)}

    def __repr__(self) -> str:
        return f"ScalarField({', '.join(self.names)})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ScalarField) and self.field == other.field

    def __hash__(self) -> int:
        return hash(self.field)

    @property
    def gamma(self) -> FracElement:
        return self.field.gens[0]

    def gen(self, name: str) -> FracElement:
        """Return the generator called ``name``."""
        try:
            return self.field.gens[self._index[name]]
        except KeyError:
            raise AlgebraError(f"Unknown symbol '{name}' in {self!r}")

    def has(self, name: str) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        return self._index[name]

    def convert(self, value: Any) -> FracElement:
        """Bring an int, Fraction, sympy number/expression or foreign field element into this field."""
        if isinstance(value, FracElement):
            if value.field == self.field:
                return value
            return self.field.from_expr(value.as_expr())
        if isinstance(value, bool):
            raise AlgebraError(f"Cannot convert {value!r} to a scalar")
        if isinstance(value, int):
            return self.field(value)
        if isinstance(value, Fraction):
            return self.field(sympy.Rational(value.numerator, value.denominator))
        if isinstance(value, sympy.Basic):
            return self.field.from_expr(value)
        if isinstance(value, str):
            return self.field.from_expr(sympy.sympify(value, locals={n: s for n, s in zip(self.names, self.symbols)}))
        raise AlgebraError(f"Cannot convert {type(value).__name__} to an exact scalar")

    def weight(self, c1: Any, c2: Any) -> "Weight":
        return Weight(self.convert(c1), self.convert(c2))


# Shared field with gamma only, used when no context is supplied
DEFAULT_FIELD = ScalarField()


def _div(x: Any, n: int) -> Any:
    """Exact division by an integer that keeps ints rational."""
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x, n)
    return x / n


@dataclass(frozen=True)
class Weight:
    """Element of the Cartan subalgebra dual, in simple-root coordinates."""

    c1: Any
    c2: Any

    @property
    def coords(self) -> Tuple[Any, Any]:
        return (self.c1, self.c2)

    def __add__(self, other: "Weight") -> "Weight":
        return Weight(self.c1 + other.c1, self.c2 + other.c2)

    def __sub__(self, other: "Weight") -> "Weight":
        return Weight(self.c1 - other.c1, self.c2 - other.c2)

    def __neg__(self) -> "Weight":
        return Weight(-self.c1, -self.c2)

    def __mul__(self, scalar: Any) -> "Weight":
        if isinstance(scalar, Weight):
            return NotImplemented
        return Weight(scalar * self.c1, scalar * self.c2)

    __rmul__ = __mul__

    def __truediv__(self, scalar: Any) -> "Weight":
        if isinstance(scalar, int):
            return Weight(_div(self.c1, scalar), _div(self.c2, scalar))
        return Weight(self.c1 / scalar, self.c2 / scalar)

    def is_zero(self) -> bool:
        return not self.c1 and not self.c2

    def convert(self, scalars: ScalarField) -> "Weight":
        return Weight(scalars.convert(self.c1), scalars.convert(self.c2))

    def to_array(self) -> np.ndarray:
        """Float coordinates, for the numeric engine."""
        return np.array([float(_to_float(self.c1)), float(_to_float(self.c2))])

    def __str__(self) -> str:
        return f"({self.c1})e1 + ({self.c2})e2"


def _to_float(value: Any) -> float:
    if isinstance(value, FracElement):
        expr = value.as_expr()
        if expr.free_symbols:
            raise AlgebraError(f"Scalar {expr} is not a number")
        return float(expr)
    return float(value)


E1 = Weight(1, 0)
E2 = Weight(0, 1)
ZERO = Weight(0, 0)


def simple_root(i: int) -> Weight:
    if i == 1:
        return E1
    if i == 2:
        return E2
    raise AlgebraError(f"Simple root index must be 1 or 2, got {i}")


def fundamental_weight(i: int, scalars: Optional[ScalarField] = None) -> Weight:
    """Return omega_i; exact Fractions unless a field is given."""
    if i == 1:
        w = Weight(Fraction(2, 3), Fraction(1, 3))
    elif i == 2:
        w = Weight(Fraction(1, 3), Fraction(2, 3))
    else:
        raise AlgebraError(f"Fundamental weight index must be 1 or 2, got {i}")
    return w.convert(scalars) if scalars is not None else w


def weyl_vector() -> Weight:
    return Weight(1, 1)


def hat(i: int) -> int:
    """Index swap 1 <-> 2."""
    if i not in (1, 2):
        raise AlgebraError(f"Index must be 1 or 2, got {i}")
    return 3 - i


def inner(u: Weight, v: Weight) -> Any:
    """Cartan pairing <u, v>."""
    return 2 * u.c1 * v.c1 - u.c1 * v.c2 - u.c2 * v.c1 + 2 * u.c2 * v.c2


def omega(i: int, u: Weight) -> Any:
    """<omega_i, u>, the i-th simple-root coordinate of u."""
    if i == 1:
        return u.c1
    if i == 2:
        return u.c2
    raise AlgebraError(f"Fundamental weight index must be 1 or 2, got {i}")


def h(i: int, u: Weight) -> Any:
    """<h_i, u> with h1 = (2e1+e2)/3, h2 = (-e1+e2)/3, h3 = -(e1+2e2)/3.

    Raises:
        AlgebraError: if i is not 1, 2 or 3
    """
    if i == 1:
        return u.c1
    if i == 2:
        return u.c2 - u.c1
    if i == 3:
        return -u.c2
    raise AlgebraError(f"h index must be in 1..3, got {i}")


def bform(u: Weight, v: Weight) -> Any:
    """B(u,v) = (h2-h1)(u) h1(v) + (h3-h2)(u) h3(v); not symmetric."""
    return (h(2, u) - h(1, u)) * h(1, v) + (h(3, u) - h(2, u)) * h(3, v)


def cform(u: Weight, v: Weight, w: Weight) -> Any:
    """C(u,v,w) = h1(u)h2(v)h3(w) + h1(v)h2(w)h3(u) + h1(w)h2(u)h3(v); cyclic."""
    return (h(1, u) * h(2, v) * h(3, w)
            + h(1, v) * h(2, w) * h(3, u)
            + h(1, w) * h(2, u) * h(3, v))


def csigma(u: Weight, v: Weight, w: Weight) -> Any:
    return cform(u, v, w) + cform(u, w, v)


def infer_gamma(*weights: Weight) -> Any:
    """Find gamma from the field of any exact coordinate.

    Raises:
        AlgebraError: if no coordinate carries a field
    """
    for wt in weights:
        for c in wt.coords:
            if isinstance(c, FracElement):
                return c.field.gens[0]
    raise AlgebraError("gamma cannot be inferred from these weights; pass it explicitly")


def _resolve_gamma(gamma: Any, *weights: Weight) -> Any:
    if gamma is not None:
        return gamma
    try:
        return infer_gamma(*weights)
    except AlgebraError:
        return DEFAULT_FIELD.gamma


def q_constant(gamma: Any = None) -> Any:
    """q = gamma + 2/gamma; formal gamma when none is given."""
    if gamma is None:
        gamma = DEFAULT_FIELD.gamma
    if isinstance(gamma, int):
        gamma = Fraction(gamma)
    return gamma + 2 / gamma


def background_charge(gamma: Any = None) -> Weight:
    """Q = q * rho."""
    q = q_constant(gamma)
    return Weight(q, q)


def delta_alpha(alpha: Weight, gamma: Any = None) -> Any:
    """Conformal weight <alpha/2, Q - alpha/2>."""
    gamma = _resolve_gamma(gamma, alpha)
    Q = background_charge(gamma)
    return inner(alpha, Q) / 2 - _div(inner(alpha, alpha), 4)


def w_alpha(alpha: Weight, gamma: Any = None) -> Any:
    """Spin-3 quantum number -q^2 h2(a) + (q/2) B(a,a) + C(a,a,a)/3."""
    gamma = _resolve_gamma(gamma, alpha)
    q = q_constant(gamma)
    return -q * q * h(2, alpha) + q * bform(alpha, alpha) / 2 + _div(cform(alpha, alpha, alpha), 3)


def contract(form, *fixed: Weight, positions: Tuple[int, int] = (0, 1)) -> Any:
    """Gaussian contraction sum_ij (A^-1)_ij F(..e_i..e_j..).

    ``form`` is a multilinear function; ``positions`` are the two argument
    slots that are contracted, the remaining slots take ``fixed`` in order.
    """
    arity = len(fixed) + 2
    total = 0
    for i, ei in enumerate((E1, E2)):
        for j, ej in enumerate((E1, E2)):
            args = list(fixed)
            slots = [None] * arity
            slots[positions[0]] = ei
            slots[positions[1]] = ej
            it = iter(args)
            full = [s if s is not None else next(it) for s in slots]
            value = form(*full)
            if value:
                total = total + INVERSE_CARTAN_X3[i][j] * value
    return _div(total, 3)


def weights_close(u: Weight, v: Weight, tol: float = 1e-12) -> bool:
    return bool(np.allclose(u.to_array(), v.to_array(), atol=tol))


def sum_weights(weights: Iterable[Weight]) -> Weight:
    total = ZERO
    for wt in weights:
        total = total + wt
    return total
