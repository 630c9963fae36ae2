"""Coefficient arithmetic: Gaussian rationals, hbar-Laurent scalars, normalization monomials.

Two coefficient backends coexist.  The rational backend uses :class:`QQi`
(complex numbers with Fraction real/imaginary parts), on which every identity
in the library is exact.  The float backend uses Python ``complex`` and is
reserved for quantities that are irrational by nature (holonomy matrices,
matrix functions of ad).  :class:`HbarScalar` is a finite Laurent polynomial
in the formal parameter hbar over either backend.

Fractional powers of 2*pi*hbar and of the quarter phase exp(-i*pi/2)*hbar
never enter the Laurent ring; they are tracked separately as exact exponent
pairs in :class:`NormFactor`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union


class TruncationOverflow(ArithmeticError):
    """An hbar power exceeded the configured truncation order."""


_MAX_HBAR_POWER: int | None = None


class hbar_truncation:
    """Context manager bounding hbar powers; exceeding the bound raises.

    Truncation is an error, never silent: series code that wants a cap must
    opt in, and a product escaping the cap is a bug in the caller's grading.
    """

    def __init__(self, max_power: int):
        self.max_power = max_power
        self._saved: int | None = None

    def __enter__(self):
        global _MAX_HBAR_POWER
        self._saved = _MAX_HBAR_POWER
        _MAX_HBAR_POWER = self.max_power
        return self

    def __exit__(self, *exc):
        global _MAX_HBAR_POWER
        _MAX_HBAR_POWER = self._saved
        return False


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


class QQi:
    """Gaussian rational a + b*i with exact Fraction components.

    Fourth roots of unity (the phases exp(-i*pi/2) etc. that appear in the
    normalization bookkeeping) are exactly representable.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, *a):
        raise AttributeError("QQi is immutable")

    # -- ring operations -------------------------------------------------
    def __add__(self, other):
        other = coerce_scalar(other)
        if isinstance(other, complex):
            return complex(self) + other
        return QQi(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-coerce_scalar(other))

    def __rsub__(self, other):
        return coerce_scalar(other) + (-self)

    def __mul__(self, other):
        other = coerce_scalar(other)
        if isinstance(other, complex):
            return complex(self) * other
        return QQi(self.re * other.re - self.im * other.im,
                   self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = coerce_scalar(other)
        if isinstance(other, complex):
            return complex(self) / other
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero QQi")
        return self * QQi(other.re / n, -other.im / n)

    def __rtruediv__(self, other):
        return coerce_scalar(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("QQi powers must be integers")
        if k < 0:
            return QQi(1) / self ** (-k)
        out = QQi(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- structure -------------------------------------------------------
    def conjugate(self) -> "QQi":
        return QQi(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            other = coerce_scalar(other)
        except TypeError:
            return NotImplemented
        if isinstance(other, complex):
            return complex(self) == other
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return abs(complex(self))

    def __repr__(self):
        if not self.im:
            return f"{self.re}"
        if not self.re:
            return f"{self.im}*i"
        return f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}*i)"


QQI_ZERO = QQi(0)
QQI_ONE = QQi(1)
QQI_I = QQi(0, 1)

Scalar = Union[QQi, complex]


def coerce_scalar(x) -> Scalar:
    """Normalize a raw coefficient to QQi (exact) or complex (float)."""
    if isinstance(x, QQi):
        return x
    if isinstance(x, (int, Fraction)):
        return QQi(x)
    if isinstance(x, complex):
        return x
    if isinstance(x, float):
        return complex(x)
    raise TypeError(f"cannot use {type(x).__name__} as a scalar coefficient")


def scalar_is_zero(x: Scalar) -> bool:
    if isinstance(x, QQi):
        return not bool(x)
    return x == 0


def _mix(a: Scalar, b: Scalar):
    """Bring (a, b) to a common backend: QQi stays exact unless mixed with complex."""
    if isinstance(a, QQi) and isinstance(b, QQi):
        return a, b
    ac = complex(a) if isinstance(a, QQi) else a
    bc = complex(b) if isinstance(b, QQi) else b
    return ac, bc


class HbarScalar:
    """Finite Laurent sum  sum_k c_k * hbar**k  with QQi or complex coefficients.

    Zero coefficients are never stored.  Instances are immutable; arithmetic
    returns fresh objects.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, Scalar] | None = None):
        clean: dict[int, Scalar] = {}
        if terms:
            for k, c in terms.items():
                c = coerce_scalar(c)
                if scalar_is_zero(c):
                    continue
                if not isinstance(k, int):
                    raise TypeError("hbar powers must be integers")
                if _MAX_HBAR_POWER is not None and k > _MAX_HBAR_POWER:
                    raise TruncationOverflow(
                        f"hbar^{k} exceeds truncation order {_MAX_HBAR_POWER}")
                if k in clean:
                    s = clean[k] + c
                    if scalar_is_zero(s):
                        del clean[k]
                    else:
                        clean[k] = s
                else:
                    clean[k] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("HbarScalar is immutable")

    # -- constructors ----------------------------------------------------
    @staticmethod
    def zero() -> "HbarScalar":
        return HbarScalar()

    @staticmethod
    def one() -> "HbarScalar":
        return HbarScalar({0: QQI_ONE})

    @staticmethod
    def of(c, power: int = 0) -> "HbarScalar":
        return HbarScalar({power: coerce_scalar(c)})

    @staticmethod
    def hbar(power: int = 1) -> "HbarScalar":
        return HbarScalar({power: QQI_ONE})

    @staticmethod
    def i_over_hbar() -> "HbarScalar":
        """The loop-counting prefactor i/hbar."""
        return HbarScalar({-1: QQI_I})

    @staticmethod
    def minus_i_hbar(power: int = 1) -> "HbarScalar":
        """(e^{-i pi/2} hbar)^power for integer power, as an exact scalar."""
        return HbarScalar({power: QQI_I ** (-power % 4)})

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        other = as_hbar(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            if k in out:
                a, b = _mix(out[k], c)
                s = a + b
                if scalar_is_zero(s):
                    del out[k]
                else:
                    out[k] = s
            else:
                out[k] = c
        return HbarScalar(out)

    __radd__ = __add__

    def __neg__(self):
        return HbarScalar({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-as_hbar(other))

    def __rsub__(self, other):
        return as_hbar(other) + (-self)

    def __mul__(self, other):
        other = as_hbar(other)
        out: dict[int, Scalar] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = k1 + k2
                if _MAX_HBAR_POWER is not None and k > _MAX_HBAR_POWER:
                    raise TruncationOverflow(
                        f"hbar^{k} exceeds truncation order {_MAX_HBAR_POWER}")
                a, b = _mix(c1, c2)
                p = a * b
                if k in out:
                    q, p2 = _mix(out[k], p)
                    s = q + p2
                    if scalar_is_zero(s):
                        del out[k]
                    else:
                        out[k] = s
                elif not scalar_is_zero(p):
                    out[k] = p
        return HbarScalar(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) == 1:
                ((k, c),) = self.terms.items()
                return HbarScalar({k * n: coerce_scalar(1) / c ** (-n)
                                   if isinstance(c, complex) else QQI_ONE / c ** (-n)})
            raise ValueError("negative powers only for monomials")
        out = HbarScalar.one()
        for _ in range(n):
            out = out * self
        return out

    def div_exact(self, other: "HbarScalar") -> "HbarScalar":
        """Exact division in the Laurent ring; raises if the quotient is not a Laurent polynomial."""
        other = as_hbar(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero HbarScalar")
        if len(other.terms) == 1:
            ((k, c),) = other.terms.items()
            inv = (1 / c) if isinstance(c, complex) else QQI_ONE / c
            return HbarScalar({kk - k: _mix(cc, inv)[0] * _mix(cc, inv)[1]
                               for kk, cc in self.terms.items()})
        # long division by the leading (highest-power) term
        rem = self
        quo = HbarScalar.zero()
        lead_k = max(other.terms)
        lead_c = other.terms[lead_k]
        guard = len(self.terms) * (len(other.terms) + 2) + 8
        while not rem.is_zero():
            guard -= 1
            if guard < 0:
                raise ArithmeticError("non-exact HbarScalar division")
            rk = max(rem.terms)
            rc = rem.terms[rk]
            a, b = _mix(rc, lead_c)
            piece = HbarScalar({rk - lead_k: a / b})
            quo = quo + piece
            rem = rem - piece * other
        return quo

    # -- queries -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, power: int) -> Scalar:
        return self.terms.get(power, QQI_ZERO)

    def powers(self):
        return sorted(self.terms)

    def __eq__(self, other):
        try:
            other = as_hbar(other)
        except TypeError:
            return NotImplemented
        if set(self.terms) != set(other.terms):
            return False
        for k in self.terms:
            a, b = _mix(self.terms[k], other.terms[k])
            if a != b:
                return False
        return True

    def __hash__(self):
        raise TypeError("HbarScalar is unhashable; compare with ==")

    def __bool__(self):
        return not self.is_zero()

    def to_complex_at(self, hbar_value: complex = 1.0) -> complex:
        return sum((complex(c) if isinstance(c, QQi) else c) * hbar_value ** k
                   for k, c in self.terms.items())

    def max_abs(self) -> float:
        """Largest coefficient magnitude over all hbar powers."""
        return max((abs(complex(c)) if isinstance(c, QQi) else abs(c)
                    for c in self.terms.values()), default=0.0)

    def chop(self, tol: float) -> "HbarScalar":
        """Drop float coefficients below tol; exact coefficients untouched."""
        return HbarScalar({k: c for k, c in self.terms.items()
                           if isinstance(c, QQi) or abs(c) > tol})

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for k in sorted(self.terms):
            c = self.terms[k]
            if k == 0:
                bits.append(f"{c!r}")
            else:
                bits.append(f"({c!r})*hbar^{k}" if k != 1 else f"({c!r})*hbar")
        return " + ".join(bits)


def as_hbar(x) -> HbarScalar:
    if isinstance(x, HbarScalar):
        return x
    return HbarScalar({0: coerce_scalar(x)})


HBAR_ZERO = HbarScalar.zero()
HBAR_ONE = HbarScalar.one()


@dataclass(frozen=True)
class NormFactor:
    """Formal monomial (2 pi hbar)^a * (e^{-i pi/2} hbar)^b with exact rational exponents.

    These are the only irrational/fractional-power objects in the
    normalization bookkeeping; they multiply by adding exponents, so identity
    checks between them are exact integer arithmetic.
    """

    two_pi_hbar: Fraction = Fraction(0)
    minus_i_hbar: Fraction = Fraction(0)

    def __mul__(self, other: "NormFactor") -> "NormFactor":
        return NormFactor(self.two_pi_hbar + other.two_pi_hbar,
                          self.minus_i_hbar + other.minus_i_hbar)

    def __truediv__(self, other: "NormFactor") -> "NormFactor":
        return NormFactor(self.two_pi_hbar - other.two_pi_hbar,
                          self.minus_i_hbar - other.minus_i_hbar)

    def is_one(self) -> bool:
        return self.two_pi_hbar == 0 and self.minus_i_hbar == 0

    def __repr__(self):
        return f"(2*pi*hbar)^({self.two_pi_hbar}) * (-i*hbar)^({self.minus_i_hbar})"


NORM_ONE = NormFactor()


def xi_exponents(betti_d1: Iterable[int], k: int = 1) -> NormFactor:
    """Normalization monomial xi from the Betti numbers of the Dirichlet-1 complex.

    betti_d1[j] = dim H^j relative to the boundary components carrying the
    A-polarization.  The degree shift k defaults to 1, the BF convention in
    which the gluing identity Xi = xi_M / (xi_M1 xi_M2) closes exactly.
    """
    sign = Fraction((-1) ** k, 4)
    a = Fraction(0)
    b = Fraction(0)
    for j, h in enumerate(betti_d1):
        w = Fraction(j if j % 2 else -j, 2)
        a += (sign + w) * h
        b += (-sign + w) * h
    return NormFactor(a, b)


def gluing_gaussian_factor(even_dim: int, odd_dim: int) -> NormFactor:
    """Xi = (2 pi i)^{even/2} (i/hbar)^{odd/2} from the redshirt Gaussian.

    2*pi*i = (2*pi*hbar) * (-i*hbar)^{-1} and i/hbar = (-i*hbar)^{-1}, so the
    factor is an exact NormFactor monomial.
    """
    e = Fraction(even_dim, 2)
    o = Fraction(odd_dim, 2)
    return NormFactor(e, -e - o)
