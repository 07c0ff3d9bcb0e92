"""Exact numbers of the form q0 + q_2 log 2 + q_3 log 3 + ... with rational q's.

Weights are measured in nats, and the interesting ones (log 2, log a_j for
rational a_j, twists by rational constants) all live in this Q-vector space.
Logarithms of distinct primes are Q-linearly independent of each other and of 1,
so a nonzero element is never an integer multiple of anything except in the
obvious pure case; this lets floors and signs be decided exactly by raising
the working precision until the answer is unambiguous.
"""

from __future__ import annotations

import math
import re
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Union

Rational = Union[int, Fraction]

_START_PREC = 60


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of a positive integer by trial division."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@lru_cache(maxsize=None)
def _dec_log(p: int, prec: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = prec
        return Decimal(p).ln()


class LogQ:
    """Immutable element q0 + sum_p q_p log p."""

    __slots__ = ("rat", "logs", "_hash")

    def __init__(self, rat: Rational = 0, logs: dict[int, Fraction] | tuple = ()):
        self.rat = Fraction(rat)
        items = logs.items() if isinstance(logs, dict) else logs
        self.logs = tuple(sorted((int(p), Fraction(c)) for p, c in items if c != 0))
        self._hash = None

    # construction
    @staticmethod
    def log(r: Rational) -> "LogQ":
        """Exact log of a positive rational."""
        r = Fraction(r)
        if r <= 0:
            raise ValueError("log of a non-positive rational")
        acc: dict[int, Fraction] = {}
        for p, e in factorize(r.numerator).items():
            acc[p] = acc.get(p, Fraction(0)) + e
        for p, e in factorize(r.denominator).items():
            acc[p] = acc.get(p, Fraction(0)) - e
        return LogQ(0, acc)

    @staticmethod
    def coerce(x) -> "LogQ":
        if isinstance(x, LogQ):
            return x
        if isinstance(x, (int, Fraction)):
            return LogQ(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to LogQ")

    # arithmetic
    def _combine(self, other: "LogQ", sign: int) -> "LogQ":
        acc = dict(self.logs)
        for p, c in other.logs:
            acc[p] = acc.get(p, Fraction(0)) + sign * c
        return LogQ(self.rat + sign * other.rat, acc)

    def __add__(self, other):
        try:
            return self._combine(LogQ.coerce(other), 1)
        except TypeError:
            return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        try:
            return self._combine(LogQ.coerce(other), -1)
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        return LogQ.coerce(other)._combine(self, -1)

    def __neg__(self):
        return LogQ(-self.rat, tuple((p, -c) for p, c in self.logs))

    def __mul__(self, k):
        if not isinstance(k, (int, Fraction)):
            return NotImplemented
        k = Fraction(k)
        return LogQ(self.rat * k, tuple((p, c * k) for p, c in self.logs))

    __rmul__ = __mul__

    def __truediv__(self, k):
        if not isinstance(k, (int, Fraction)):
            return NotImplemented
        return self * (1 / Fraction(k))

    # queries
    def is_rational(self) -> bool:
        return not self.logs

    def is_zero(self) -> bool:
        return self.rat == 0 and not self.logs

    def decimal(self, prec: int = _START_PREC) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = prec + 10
            v = Decimal(self.rat.numerator) / Decimal(self.rat.denominator)
            for p, c in self.logs:
                v += Decimal(c.numerator) / Decimal(c.denominator) * _dec_log(p, prec + 10)
            return v

    def __float__(self) -> float:
        if not self.logs:
            return float(self.rat)
        return float(self.decimal(30))

    def sign(self) -> int:
        if not self.logs:
            return (self.rat > 0) - (self.rat < 0)
        prec = _START_PREC
        while True:
            v = self.decimal(prec)
            if abs(v) > Decimal(10) ** (-(prec // 2)):
                return 1 if v > 0 else -1
            prec *= 2

    def floor_div_log(self, q: int) -> int:
        """Exact floor(self / log q) for a prime q."""
        if self.rat == 0 and len(self.logs) == 1 and self.logs[0][0] == q:
            return math.floor(self.logs[0][1])
        if self.is_zero():
            return 0
        prec = _START_PREC
        while True:
            with localcontext() as ctx:
                ctx.prec = prec + 10
                v = self.decimal(prec) / _dec_log(q, prec + 10)
                fl = int(v.to_integral_value(rounding="ROUND_FLOOR"))
                frac = v - fl
                eps = Decimal(10) ** (-(prec // 2))
                if eps < frac < 1 - eps:
                    return fl
            prec *= 2

    # comparisons
    def __eq__(self, other):
        try:
            o = LogQ.coerce(other)
        except TypeError:
            return NotImplemented
        return self.rat == o.rat and self.logs == o.logs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rat, self.logs))
        return self._hash

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    # text form
    def __str__(self) -> str:
        return format_logq(self)

    def __repr__(self) -> str:
        return f"LogQ({format_logq(self)!r})"


def _fmt_frac(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def format_logq(x: LogQ) -> str:
    """Canonical text: '1/2', 'log(2)', '1/10 + 3/2*log(3) - log(5)'."""
    parts: list[str] = []
    if x.rat != 0 or not x.logs:
        parts.append(_fmt_frac(x.rat))
    for p, c in x.logs:
        mag = abs(c)
        term = f"log({p})" if mag == 1 else f"{_fmt_frac(mag)}*log({p})"
        if not parts:
            parts.append(term if c > 0 else "-" + term)
        else:
            parts.append(("+ " if c > 0 else "- ") + term)
    return " ".join(parts)


_TERM = re.compile(r"^(?:(?P<coef>\d+(?:/\d+)?)\*)?log\((?P<arg>\d+(?:/\d+)?)\)$")
_RAT = re.compile(r"^\d+(?:/\d+)?$")


def parse_logq(text) -> LogQ:
    """Parse the canonical text form (ints are also accepted)."""
    if isinstance(text, bool):
        raise ValueError("booleans are not numbers here")
    if isinstance(text, int):
        return LogQ(text)
    if not isinstance(text, str):
        raise ValueError(f"expected a rational string like 'p/q', got {text!r}")
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty number")
    tokens = re.findall(r"[+-]?[^+-]+", s)
    if "".join(tokens) != s:
        raise ValueError(f"malformed number {text!r}")
    acc = LogQ(0)
    for tok in tokens:
        sign = -1 if tok.startswith("-") else 1
        body = tok.lstrip("+-")
        if _RAT.match(body):
            try:
                f = Fraction(body)
            except ZeroDivisionError:
                raise ValueError(f"zero denominator in {text!r}") from None
            acc = acc + sign * f
            continue
        m = _TERM.match(body)
        if not m:
            raise ValueError(f"malformed number {text!r}")
        try:
            coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
            arg = Fraction(m.group("arg"))
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in {text!r}") from None
        acc = acc + LogQ.log(arg) * (sign * coef)
    return acc
