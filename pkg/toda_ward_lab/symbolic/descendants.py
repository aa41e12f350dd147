#!/usr/bin/env python3
"""
Descendant polynomials in field-derivative slots.

A slot V_p stands for the normalized derivative d^p Phi(t) / (p-1)!. A
``DescendantPolynomial`` is a sum of scalar multiples of atoms, each atom one
of the multilinear forms <.,.>, h2(.), B(.,.), C(.,.,.) with arguments drawn
from fixed weights and slots. Atoms stay unexpanded until evaluation.

Slot conventions used by the generators:
    d^{i+1} Phi / i!            = V_{i+1}
    d^{n-i-1} Phi / (n-2-i)!    = V_{n-1-i}
so the quadratic part of L_{-n} carries no extra integer prefactor, and the
unnormalized d^2 Phi equals 1! * V_2 = V_2.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Mapping, Tuple, Union

from ..utils.errors import AlgebraError, WickError
from ..utils.logging import get_logger
from . import algebra
from .algebra import ScalarField, Weight

logger = get_logger(__name__)


@dataclass(frozen=True)
class Slot:
    """V_p = d^p Phi(t) / (p-1)!."""

    order: int

    def __post_init__(self):
        if self.order < 1:
            raise AlgebraError(f"Slot order must be >= 1, got {self.order}")

    def __str__(self) -> str:
        return f"V{self.order}"


Argument = Union[Slot, Weight]


class AtomKind(Enum):
    UNIT = ("1", 0)
    INNER = ("inner", 2)
    H2 = ("h2", 1)
    BFORM = ("B", 2)
    CFORM = ("C", 3)

    @property
    def label(self) -> str:
        return self.value[0]

    @property
    def arity(self) -> int:
        return self.value[1]


_FORMS: Dict[AtomKind, Callable[..., Any]] = {
    AtomKind.UNIT: lambda: 1,
    AtomKind.INNER: algebra.inner,
    AtomKind.H2: lambda u: algebra.h(2, u),
    AtomKind.BFORM: algebra.bform,
    AtomKind.CFORM: algebra.cform,
}


def _arg_key(arg: Argument) -> Tuple:
    if isinstance(arg, Slot):
        return (0, arg.order, "")
    return (1, 0, str(arg))


@dataclass(frozen=True)
class Atom:
    kind: AtomKind
    args: Tuple[Argument, ...] = ()

    def __post_init__(self):
        if len(self.args) != self.kind.arity:
            raise AlgebraError(f"{self.kind.label} takes {self.kind.arity} arguments, got {len(self.args)}")

    @property
    def slot_degree(self) -> int:
        return sum(1 for a in self.args if isinstance(a, Slot))

    def canonical(self) -> "Atom":
        if self.kind is AtomKind.INNER:
            return Atom(self.kind, tuple(sorted(self.args, key=_arg_key)))
        if self.kind is AtomKind.CFORM:
            a = self.args
            rotations = [a, (a[1], a[2], a[0]), (a[2], a[0], a[1])]
            return Atom(self.kind, min(rotations, key=lambda r: tuple(_arg_key(x) for x in r)))
        return self

    def map_weights(self, fn: Callable[[Weight], Weight]) -> "Atom":
        return Atom(self.kind, tuple(fn(a) if isinstance(a, Weight) else a for a in self.args))

    def evaluate(self, assign: Callable[[Slot], Weight]) -> Any:
        args = [assign(a) if isinstance(a, Slot) else a for a in self.args]
        return _FORMS[self.kind](*args)

    def __str__(self) -> str:
        if self.kind is AtomKind.UNIT:
            return "1"
        return f"{self.kind.label}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Term:
    coeff: Any
    atom: Atom

    @property
    def slot_degree(self) -> int:
        return self.atom.slot_degree


def _is_zero_weight(w: Weight) -> bool:
    try:
        return not w.c1 and not w.c2
    except ValueError:
        return False


class DescendantPolynomial:
    """Formal sum of scalar-weighted atoms; terms with equal canonical atoms are merged."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Term] = ()):
        merged: Dict[Atom, Any] = {}
        order: List[Atom] = []
        for term in terms:
            if any(isinstance(a, Weight) and _is_zero_weight(a) for a in term.atom.args):
                continue
            atom = term.atom.canonical()
            if atom not in merged:
                merged[atom] = 0
                order.append(atom)
            merged[atom] = merged[atom] + term.coeff
        self.terms: Tuple[Term, ...] = tuple(Term(merged[a], a) for a in order if merged[a])

    @classmethod
    def single(cls, coeff: Any, kind: AtomKind, *args: Argument) -> "DescendantPolynomial":
        return cls([Term(coeff, Atom(kind, tuple(args)))])

    def __add__(self, other: "DescendantPolynomial") -> "DescendantPolynomial":
        return DescendantPolynomial(self.terms + other.terms)

    def __sub__(self, other: "DescendantPolynomial") -> "DescendantPolynomial":
        return self + other.scale(-1)

    def __neg__(self) -> "DescendantPolynomial":
        return self.scale(-1)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DescendantPolynomial):
            return NotImplemented
        return not (self - other).terms

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({t.coeff})*{t.atom}" for t in self.terms)

    def scale(self, factor: Any) -> "DescendantPolynomial":
        return DescendantPolynomial(Term(factor * t.coeff, t.atom) for t in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def max_slot_degree(self) -> int:
        return max((t.slot_degree for t in self.terms), default=0)

    def slots(self) -> Tuple[Slot, ...]:
        found = {a for t in self.terms for a in t.atom.args if isinstance(a, Slot)}
        return tuple(sorted(found, key=lambda s: s.order))

    def map_scalars(self, fn: Callable[[Any], Any]) -> "DescendantPolynomial":
        """Apply ``fn`` to every coefficient and every fixed-weight coordinate."""
        def wmap(w: Weight) -> Weight:
            return Weight(fn(w.c1), fn(w.c2))
        return DescendantPolynomial(Term(fn(t.coeff), t.atom.map_weights(wmap)) for t in self.terms)

    def convert(self, scalars: ScalarField) -> "DescendantPolynomial":
        return self.map_scalars(scalars.convert)

    def perturbed(self, index: int, delta: Any = 1) -> "DescendantPolynomial":
        """Copy with ``delta`` added to the coefficient of term ``index``."""
        terms = list(self.terms)
        terms[index] = Term(terms[index].coeff + delta, terms[index].atom)
        return DescendantPolynomial(terms)

    def evaluate(self, assign: Callable[[Slot], Weight]) -> Any:
        """Substitute weights for slots and evaluate all forms multilinearly."""
        total = 0
        for term in self.terms:
            value = term.atom.evaluate(assign)
            total = total + term.coeff * value
        return total


def _poly(*parts: Tuple[Any, AtomKind, Tuple[Argument, ...]]) -> DescendantPolynomial:
    return DescendantPolynomial(Term(c, Atom(k, args)) for c, k, args in parts)


def _check_level(n: int) -> None:
    if not isinstance(n, int) or n <= 0:
        raise AlgebraError(f"Descendant level must be a positive integer, got {n}")


def virasoro_poly(n: int, alpha: Weight, gamma: Any = None) -> DescendantPolynomial:
    """L_{-n} of V_alpha as a slot polynomial.

    n = 1: <alpha, V1>. n >= 2: <(n-1)Q + alpha, V_n> - sum_{i=0}^{n-2} <V_{i+1}, V_{n-1-i}>.
    """
    _check_level(n)
    if n == 1:
        return _poly((1, AtomKind.INNER, (alpha, Slot(1))))
    gamma = algebra._resolve_gamma(gamma, alpha)
    Q = algebra.background_charge(gamma)
    parts = [(1, AtomKind.INNER, ((n - 1) * Q + alpha, Slot(n)))]
    for i in range(n - 1):
        parts.append((-1, AtomKind.INNER, (Slot(i + 1), Slot(n - 1 - i))))
    return _poly(*parts)


def w_poly(n: int, alpha: Weight, gamma: Any = None) -> DescendantPolynomial:
    """W_{-n} of V_alpha as a slot polynomial, valid for every n >= 1.

    (n-1)(n-2) q^2 h2(V_n) + q[(n-1)B(V_n,a) - B(a,V_n)] - 2C(a,a,V_n)
    + sum_{i=0}^{n-2} [4C(V_{i+1},V_{n-1-i},a) - 2iq B(V_{i+1},V_{n-1-i})]
    - (8/3) sum_{i=0}^{n-3} sum_{j=0}^{i} C(V_{j+1},V_{i-j+1},V_{n-i-2})
    """
    _check_level(n)
    gamma = algebra._resolve_gamma(gamma, alpha)
    q = algebra.q_constant(gamma)
    Vn = Slot(n)
    parts = []
    if n >= 3:
        parts.append(((n - 1) * (n - 2) * q * q, AtomKind.H2, (Vn,)))
    parts.append(((n - 1) * q, AtomKind.BFORM, (Vn, alpha)))
    parts.append((-q, AtomKind.BFORM, (alpha, Vn)))
    parts.append((-2, AtomKind.CFORM, (alpha, alpha, Vn)))
    for i in range(n - 1):
        a, b = Slot(i + 1), Slot(n - 1 - i)
        parts.append((4, AtomKind.CFORM, (a, b, alpha)))
        if i:
            parts.append((-2 * i * q, AtomKind.BFORM, (a, b)))
    for i in range(n - 2):
        for j in range(i + 1):
            parts.append((Fraction(-8, 3), AtomKind.CFORM, (Slot(j + 1), Slot(i - j + 1), Slot(n - i - 2))))
    return _poly(*parts)


def explicit_w_minus_one(alpha: Weight, gamma: Any = None) -> DescendantPolynomial:
    """-q B(a, V1) - 2 C(a, a, V1)."""
    q = algebra.q_constant(algebra._resolve_gamma(gamma, alpha))
    return _poly((-q, AtomKind.BFORM, (alpha, Slot(1))), (-2, AtomKind.CFORM, (alpha, alpha, Slot(1))))


def explicit_w_minus_two(alpha: Weight, gamma: Any = None) -> DescendantPolynomial:
    """q(B(d2,a) - B(a,d2)) - 2C(a,a,d2) + 2 C_sigma(a, V1, V1), with d2 = 1! V2."""
    q = algebra.q_constant(algebra._resolve_gamma(gamma, alpha))
    V1, V2 = Slot(1), Slot(2)
    return _poly(
        (q, AtomKind.BFORM, (V2, alpha)),
        (-q, AtomKind.BFORM, (alpha, V2)),
        (-2, AtomKind.CFORM, (alpha, alpha, V2)),
        # C_sigma(a, V1, V1) = C(a, V1, V1) + C(a, V1, V1)
        (2, AtomKind.CFORM, (alpha, V1, V1)),
        (2, AtomKind.CFORM, (alpha, V1, V1)),
    )


def stress_tensor(gamma: Any = None) -> DescendantPolynomial:
    return virasoro_poly(2, algebra.ZERO, gamma)


def spin3_current(gamma: Any = None) -> DescendantPolynomial:
    return w_poly(3, algebra.ZERO, gamma)


def explicit_stress_tensor(gamma: Any = None) -> DescendantPolynomial:
    """<Q, d2 Phi> - <d Phi, d Phi>."""
    Q = algebra.background_charge(gamma)
    return _poly((1, AtomKind.INNER, (Q, Slot(2))), (-1, AtomKind.INNER, (Slot(1), Slot(1))))


def explicit_spin3_current(gamma: Any = None) -> DescendantPolynomial:
    """q^2 h2(d3 Phi) - 2q B(d2 Phi, d Phi) - 8 h1h2h3(d Phi).

    d3 Phi = 2 V3 and h1h2h3(u) = C(u,u,u)/3.
    """
    q = algebra.q_constant(gamma)
    return _poly(
        (2 * q * q, AtomKind.H2, (Slot(3),)),
        (-2 * q, AtomKind.BFORM, (Slot(2), Slot(1))),
        (Fraction(-8, 3), AtomKind.CFORM, (Slot(1), Slot(1), Slot(1))),
    )


class DerivativeCovariance:
    """Table c[a, b] with E[<u, X^(a)> <v, X^(b)>] = <u, v> c[a, b] for slot orders a, b.

    Args:
        entries: Mapping from (a, b) slot-order pairs to scalars; symmetric
            lookups fall back to (b, a)
    """

    def __init__(self, entries: Mapping[Tuple[int, int], Any]):
        self._entries = dict(entries)

    def __getitem__(self, key: Tuple[int, int]) -> Any:
        a, b = key
        if (a, b) in self._entries:
            return self._entries[(a, b)]
        if (b, a) in self._entries:
            return self._entries[(b, a)]
        raise WickError(f"Missing covariance entry E[V{a} V{b}]")

    def orders(self) -> Tuple[int, ...]:
        return tuple(sorted({o for k in self._entries for o in k}))


def _contracted_atom_terms(term: Term, i: int, j: int, cov: DerivativeCovariance) -> List[Term]:
    """Replace slots at positions i, j by the pair contraction; other args stay."""
    atom = term.atom
    a, b = atom.args[i], atom.args[j]
    c = cov[(a.order, b.order)]
    out = []
    for ei_idx, ei in enumerate((algebra.E1, algebra.E2)):
        for ej_idx, ej in enumerate((algebra.E1, algebra.E2)):
            weight = algebra.INVERSE_CARTAN_X3[ei_idx][ej_idx]
            args = list(atom.args)
            args[i], args[j] = ei, ej
            rest = [x for k, x in enumerate(args) if k not in (i, j)]
            if rest:
                out.append(Term(algebra._div(weight, 3) * c * term.coeff, Atom(atom.kind, tuple(args))))
            else:
                value = _FORMS[atom.kind](*args)
                out.append(Term(algebra._div(weight, 3) * c * term.coeff * value, Atom(AtomKind.UNIT)))
    return out


def wick_expand(poly: DescendantPolynomial, cov: DerivativeCovariance) -> DescendantPolynomial:
    """Express the Wick-ordered polynomial through raw monomials.

    :x1 x2: = x1 x2 - E[x1 x2];
    :x1 x2 x3: = x1 x2 x3 - x1 E[x2 x3] - x2 E[x3 x1] - x3 E[x1 x2].

    Raises:
        WickError: if a needed covariance entry is missing
    """
    out: List[Term] = []
    for term in poly.terms:
        out.append(term)
        positions = [k for k, a in enumerate(term.atom.args) if isinstance(a, Slot)]
        if len(positions) < 2:
            continue
        if len(positions) > 3:
            raise WickError("Wick ordering beyond total degree 3 is not supported")
        for i_pos in range(len(positions)):
            for j_pos in range(i_pos + 1, len(positions)):
                for t in _contracted_atom_terms(term, positions[i_pos], positions[j_pos], cov):
                    out.append(Term(-t.coeff, t.atom))
    return DescendantPolynomial(out)


def gaussian_expectation(poly: DescendantPolynomial, cov: DerivativeCovariance) -> Any:
    """E[poly] for centered Gaussian slots; odd degrees vanish."""
    total = 0
    for term in poly.terms:
        positions = [k for k, a in enumerate(term.atom.args) if isinstance(a, Slot)]
        if not positions:
            total = total + term.coeff * term.atom.evaluate(lambda s: algebra.ZERO)
        elif len(positions) == 2:
            for t in _contracted_atom_terms(term, positions[0], positions[1], cov):
                total = total + t.coeff * t.atom.evaluate(lambda s: algebra.ZERO)
        elif len(positions) > 3:
            raise WickError("Expectations beyond degree 3 are not supported")
    return total
