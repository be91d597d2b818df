"""Coefficient backends.

Every algebraic identity in this package is checked in exact rational
arithmetic (``fractions.Fraction``); spectral and Gaussian numerics use
IEEE doubles.  The two backends are never mixed silently: binary
operations on algebra elements call :func:`join_backend` and raise
:class:`BackendMismatch` when one side is exact and the other floating.
"""

from __future__ import annotations

from fractions import Fraction

EXACT = "exact"
FLOAT = "float"

class BackendMismatch(TypeError):
    """Raised when exact and floating coefficients meet in one operation."""


def backend_of(values) -> str | None:
    """Backend of an iterable of coefficients.

    Plain ints are neutral (valid in either backend); returns None when
    nothing pins the backend down.
    """
    seen = None
    for v in values:
        if isinstance(v, bool) or type(v) is int:
            continue
        b = EXACT if isinstance(v, Fraction) else FLOAT
        if seen is None:
            seen = b
        elif seen != b:
            raise BackendMismatch("mixed exact and floating coefficients in one element")
    return seen


def join_backend(a: str | None, b: str | None) -> str | None:
    if a is None:
        return b
    if b is None:
        return a
    if a != b:
        raise BackendMismatch(f"cannot combine {a} and {b} backends")
    return a


class CFrac:
    """Gaussian rational a + b*i with Fraction parts.

    Used by the Volterra symbol calculus, where the D_x = -i d/dx
    convention puts factors of i into otherwise rational coefficients.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _coerce(other) -> "CFrac":
        if isinstance(other, CFrac):
            return other
        if isinstance(other, (int, Fraction)):
            return CFrac(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CFrac(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return CFrac(-self.re, -self.im)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CFrac(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CFrac(self.re * o.re - self.im * o.im,
                     self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __repr__(self):
        return f"CFrac({self.re!r}, {self.im!r})"

    def __complex__(self):
        return float(self.re) + 1j * float(self.im)


I = CFrac(0, 1)
