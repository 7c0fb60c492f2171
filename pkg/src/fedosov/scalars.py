"""Exact Gaussian-rational scalars.

Every coefficient in the engine is a complex number ``a + b*i`` with
rational ``a``, ``b`` held as :class:`fractions.Fraction`.  All arithmetic
is exact; nothing downstream of this module ever touches floating point.
Values are immutable; every operation returns a fresh ``Scalar``.
"""

from __future__ import annotations

from fractions import Fraction


_ZERO_FRACTION = Fraction(0)


class Scalar:
    """Gaussian rational ``re + im*i`` with exact field arithmetic."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if type(re) is not Fraction:
            re = Fraction(re)
        if type(im) is not Fraction:
            im = Fraction(im)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    @classmethod
    def _make(cls, re: Fraction, im: Fraction) -> "Scalar":
        value = object.__new__(cls)
        object.__setattr__(value, "re", re)
        object.__setattr__(value, "im", im)
        return value

    # -- coercion ----------------------------------------------------------

    @staticmethod
    def of(value) -> "Scalar":
        if isinstance(value, Scalar):
            return value
        if isinstance(value, (int, Fraction)):
            return Scalar(value)
        raise TypeError(f"cannot coerce {type(value).__name__} to Scalar")

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_real(self) -> bool:
        return not self.im

    def is_imaginary(self) -> bool:
        return not self.re and bool(self.im)

    def __bool__(self) -> bool:
        return not self.is_zero()

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "Scalar":
        if type(other) is not Scalar:
            other = Scalar.of(other)
        return Scalar._make(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar._make(-self.re, -self.im)

    def __sub__(self, other) -> "Scalar":
        if type(other) is not Scalar:
            other = Scalar.of(other)
        return Scalar._make(self.re - other.re, self.im - other.im)

    def __rsub__(self, other) -> "Scalar":
        return Scalar.of(other) - self

    def __mul__(self, other) -> "Scalar":
        if type(other) is not Scalar:
            other = Scalar.of(other)
        # pure-real and pure-imaginary inputs dominate; skip the dead products
        if not self.im:
            if not self.re:
                return self
            return Scalar._make(self.re * other.re, self.re * other.im)
        if not self.re:
            return Scalar._make(-(self.im * other.im), self.im * other.re)
        if not other.im:
            return Scalar._make(self.re * other.re, self.im * other.re)
        if not other.re:
            return Scalar._make(-(self.im * other.im), self.re * other.im)
        return Scalar._make(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Scalar":
        other = Scalar.of(other)
        norm = other.re * other.re + other.im * other.im
        if not norm:
            raise ZeroDivisionError("division by zero Scalar")
        return Scalar._make(
            (self.re * other.re + self.im * other.im) / norm,
            (self.im * other.re - self.re * other.im) / norm,
        )

    def __rtruediv__(self, other) -> "Scalar":
        return Scalar.of(other) / self

    def __pow__(self, exponent: int) -> "Scalar":
        if not isinstance(exponent, int):
            raise TypeError("Scalar exponent must be an int")
        if exponent < 0:
            return ONE / (self ** (-exponent))
        result = ONE
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def conjugate(self) -> "Scalar":
        return Scalar(self.re, -self.im)

    # -- comparison --------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Scalar(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    # -- printing ----------------------------------------------------------

    def __str__(self) -> str:
        return format_scalar(self)

    def __repr__(self) -> str:
        return f"Scalar({self.re!r}, {self.im!r})"


ZERO = Scalar(0)
ONE = Scalar(1)
MINUS_ONE = Scalar(-1)
I = Scalar(0, 1)
HALF = Scalar(Fraction(1, 2))


def _format_rational(q: Fraction) -> str:
    return str(q)


def _format_imaginary(q: Fraction) -> str:
    if q == 1:
        return "i"
    if q == -1:
        return "-i"
    return f"{_format_rational(q)}*i"


def format_scalar(s: Scalar) -> str:
    """Canonical text form: ``-1/2``, ``i``, ``-2/3*i``, ``(1/2 - 3*i)``."""
    if s.is_zero():
        return "0"
    if s.is_real():
        return _format_rational(s.re)
    if s.is_imaginary():
        return _format_imaginary(s.im)
    sign = "-" if s.im < 0 else "+"
    return f"({_format_rational(s.re)} {sign} {_format_imaginary(abs(s.im))[:]})"


def scalar_sign_magnitude(s: Scalar) -> tuple[bool, str]:
    """Split into (is_negative, magnitude_text) for joining sums.

    Mixed complex values count as positive and keep their parentheses.
    """
    if s.is_real():
        return s.re < 0, _format_rational(abs(s.re))
    if s.is_imaginary():
        return s.im < 0, _format_imaginary(abs(s.im))
    return False, format_scalar(s)
