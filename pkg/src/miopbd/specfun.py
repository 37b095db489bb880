r"""Shifted factorials and terminating (basic) hypergeometric sums.

All routines broadcast over numpy arrays in their continuous arguments.
Integer shift counts stay scalar so that finite products are exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy import special

from .errors import DivideByZero, NonTerminating, PoleError

try:
    import mpmath
except ImportError:  # pragma: no cover - refinement silently disabled
    mpmath = None

__all__ = [
    "QContext",
    "QPow",
    "SeriesSpec",
    "pochhammer",
    "pochhammer_real",
    "qpochhammer",
    "qpochhammer_inf",
    "qpochhammer_real",
    "hypergeometric_terminating",
    "hyp_pfq",
    "qhyp_rphis",
    "compensated_sum",
]

_INT_TOL = 1e-12

# Sums whose terms exceed the result by this factor are re-summed in
# extended precision; below it double precision keeps ~13 digits.
REFINE_RATIO = 1e3


def _out(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


@dataclass(frozen=True)
class QContext:
    """Base ``q`` plus the truncation policy for infinite products."""

    q: float
    cutoff: float = 1e-17
    max_terms: int = 10000

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise ValueError(f"q must lie in (0, 1), got {self.q}")


@dataclass(frozen=True, eq=False)
class QPow:
    """A basic-series parameter ``coef * q**exponent`` kept in exponent form.

    Keeping the exponent makes ``1 - q**(e + k)`` vanish exactly when
    ``e + k == 0``, which is what terminates sums at integer lattice points.
    """

    exponent: object
    coef: float = 1.0

    def value(self, q: float):
        return self.coef * np.power(q, self.exponent)


Param = Union[float, np.ndarray, QPow]


@dataclass(frozen=True, eq=False)
class SeriesSpec:
    """Upper/lower parameters and argument of a generalized hypergeometric sum."""

    upper: Sequence[Param]
    lower: Sequence[Param]
    argument: object
    basic: bool = False
    extra: dict = field(default_factory=dict)


def compensated_sum(terms):
    """Neumaier-compensated sum of a list of equally shaped arrays."""
    s = np.zeros_like(np.asarray(terms[0], dtype=float))
    c = np.zeros_like(s)
    for t in terms:
        t = np.asarray(t, dtype=float)
        tot = s + t
        big = np.abs(s) >= np.abs(t)
        c = c + np.where(big, (s - tot) + t, (t - tot) + s)
        s = tot
    return s + c


# ---------------------------------------------------------------- factorials

def pochhammer(a, n: int):
    """Rising factorial ``(a)_n`` for a non-negative integer ``n``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    a = np.asarray(a, dtype=float)
    out = np.ones_like(a)
    for k in range(int(n)):
        out = out * (a + k)
    return _out(out)


def _is_integral(x) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(np.abs(x - np.round(x)) < _INT_TOL))


def _is_nonpos_int(a):
    a = np.asarray(a, dtype=float)
    return (np.abs(a - np.round(a)) < _INT_TOL) & (np.round(a) <= 0)


def pochhammer_real(a, x):
    """``Gamma(a + x) / Gamma(a)`` for real ``x``.

    Integral ``x >= 0`` falls back to the finite product so that
    nonpositive-integer ``a`` is handled without touching a pole.
    """
    a, x = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    if _is_integral(x) and np.all(np.round(x) >= 0):
        xi = np.round(x).astype(int)
        out = np.ones(a.shape)
        for k in range(int(xi.max()) if xi.size else 0):
            out = np.where(k < xi, out * (a + k), out)
        return _out(out)
    if np.any(_is_nonpos_int(a)) or np.any(_is_nonpos_int(a + x)):
        raise PoleError(f"Gamma pole in ({a!r})_{x!r}")
    s = special.gammasgn(a + x) * special.gammasgn(a)
    return _out(s * np.exp(special.gammaln(a + x) - special.gammaln(a)))


def qpochhammer(a, q: float, n: int):
    """Finite q-shifted factorial ``(a; q)_n``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    a = np.asarray(a, dtype=float)
    out = np.ones_like(a)
    qk = 1.0
    for _ in range(int(n)):
        out = out * (1.0 - a * qk)
        qk *= q
    return _out(out)


def qpochhammer_inf(a, ctx: QContext):
    """``(a; q)_inf`` truncated once every factor is within the cutoff of 1."""
    a = np.asarray(a, dtype=float)
    out = np.ones_like(a)
    term = a.copy()
    for _ in range(ctx.max_terms):
        out = out * (1.0 - term)
        if np.all(np.abs(term) < ctx.cutoff):
            break
        term = term * ctx.q
    return _out(out)


def qpochhammer_real(a, ctx: QContext, x):
    """``(a; q)_x = (a; q)_inf / (a q^x; q)_inf`` for real ``x``."""
    a, x = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    if _is_integral(x) and np.all(np.round(x) >= 0):
        xi = np.round(x).astype(int)
        out = np.ones(a.shape)
        qk = 1.0
        for k in range(int(xi.max()) if xi.size else 0):
            out = np.where(k < xi, out * (1.0 - a * qk), out)
            qk *= ctx.q
        return _out(out)
    den = qpochhammer_inf(a * np.power(ctx.q, x), ctx)
    if np.any(np.asarray(den) == 0.0):
        raise DivideByZero(f"(a q^x; q)_inf vanishes for a={a!r}, x={x!r}")
    return _out(np.asarray(qpochhammer_inf(a, ctx)) / den)


# ---------------------------------------------------------------- series

def _termination_index(spec: SeriesSpec, q) -> int | None:
    ks = []
    for a in spec.upper:
        if spec.basic:
            if isinstance(a, QPow) and a.coef == 1.0 and np.ndim(a.exponent) == 0:
                e = float(a.exponent)
                if abs(e - round(e)) < _INT_TOL and round(e) <= 0:
                    ks.append(-int(round(e)))
            elif not isinstance(a, QPow) and np.ndim(a) == 0 and float(a) > 0:
                e = np.log(float(a)) / np.log(q)
                if abs(e - round(e)) < 1e-10 and round(e) <= 0:
                    ks.append(-int(round(e)))
        else:
            if np.ndim(a) == 0 and _is_nonpos_int(a):
                ks.append(-int(round(float(a))))
    return min(ks) if ks else None


def hypergeometric_terminating(spec: SeriesSpec, ctx: QContext | None = None,
                               terms: int | None = None):
    r"""Evaluate a terminating ${}_rF_s$ or ${}_r\phi_s$ by its term ratio.

    Termination comes from a scalar upper parameter ``-n`` (or ``q^{-n}``,
    preferably passed as ``QPow(-n)``).  Array parameters broadcast; an
    array entry that hits zero earlier simply zeroes the remaining terms.
    """
    if spec.basic and ctx is None:
        raise ValueError("basic series need a QContext")
    q = ctx.q if spec.basic else None
    K = _termination_index(spec, q)
    if terms is not None:
        K = terms if K is None else min(K, terms)
    if K is None:
        raise NonTerminating("no upper parameter terminates the series")

    z = np.asarray(spec.argument, dtype=float)
    shapes = [np.shape(z)]
    for a in list(spec.upper) + list(spec.lower):
        shapes.append(np.shape(a.exponent) if isinstance(a, QPow) else np.shape(a))
    shape = np.broadcast_shapes(*shapes)

    term = np.ones(shape)
    acc = [term]
    if spec.basic:
        r, s = len(spec.upper), len(spec.lower)
        expo = 1 + s - r
        up = [a if isinstance(a, QPow) else np.asarray(a, dtype=float) for a in spec.upper]
        lo = [b if isinstance(b, QPow) else np.asarray(b, dtype=float) for b in spec.lower]
        for k in range(K):
            qk = q ** k
            num = np.ones(shape)
            for a in up:
                f = 1.0 - a.coef * np.power(q, a.exponent + k) if isinstance(a, QPow) else 1.0 - a * qk
                num = num * f
            den = np.full(shape, 1.0 - q ** (k + 1))
            for b in lo:
                f = 1.0 - b.coef * np.power(q, b.exponent + k) if isinstance(b, QPow) else 1.0 - b * qk
                den = den * f
            extra = (-qk) ** expo if expo else 1.0
            term = _advance(term, num, den, z * extra)
            acc.append(term)
    else:
        up = [np.asarray(a, dtype=float) for a in spec.upper]
        lo = [np.asarray(b, dtype=float) for b in spec.lower]
        for k in range(K):
            num = np.ones(shape)
            for a in up:
                num = num * (a + k)
            den = np.full(shape, float(k + 1))
            for b in lo:
                den = den * (b + k)
            term = _advance(term, num, den, z)
            acc.append(term)
    total = compensated_sum(acc)
    if mpmath is not None and REFINE_RATIO:
        mag = compensated_sum([np.abs(t) for t in acc])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = mag / np.abs(total)
        flags = np.broadcast_to(ratio > REFINE_RATIO, shape)
        if np.any(flags):
            ratio = np.broadcast_to(ratio, shape)
            total = np.array(np.broadcast_to(total, shape), dtype=float)
            for idx in zip(*np.nonzero(np.atleast_1d(flags))) if shape else [()]:
                r = float(ratio[idx])
                digits = 20 + (int(np.log10(r)) if np.isfinite(r) else 20)
                total[idx] = _refine_point(spec, q, K, idx, shape, digits)
    return _out(total)


def _pick(a, idx, shape):
    return np.broadcast_to(np.asarray(a, dtype=float), shape)[idx]


def _refine_point(spec, q, K, idx, shape, digits):
    """One entry of the series re-summed with ``digits`` significant digits."""
    mp = mpmath.mp
    with mpmath.workdps(digits):
        z = mp.mpf(float(_pick(spec.argument, idx, shape)))
        term = mp.mpf(1)
        total = mp.mpf(1)
        if spec.basic:
            mq = mp.mpf(q)
            expo = 1 + len(spec.lower) - len(spec.upper)

            def fac(a, k):
                if isinstance(a, QPow):
                    e = float(_pick(a.exponent, idx, shape)) + k
                    return 1 - mp.mpf(a.coef) * mq ** mp.mpf(e)
                return 1 - mp.mpf(float(_pick(a, idx, shape))) * mq ** k

            for k in range(K):
                num = mp.mpf(1)
                for a in spec.upper:
                    num *= fac(a, k)
                if num == 0:
                    break
                den = 1 - mq ** (k + 1)
                for b in spec.lower:
                    den *= fac(b, k)
                term = term * num / den * z * ((-(mq ** k)) ** expo if expo else 1)
                total += term
        else:
            for k in range(K):
                num = mp.mpf(1)
                for a in spec.upper:
                    num *= mp.mpf(float(_pick(a, idx, shape))) + k
                if num == 0:
                    break
                den = mp.mpf(k + 1)
                for b in spec.lower:
                    den *= mp.mpf(float(_pick(b, idx, shape))) + k
                term = term * num / den * z
                total += term
        return float(total)


def _advance(term, num, den, z):
    live = (num != 0.0) & (term != 0.0)
    if np.any(live & (den == 0.0)):
        raise DivideByZero("lower parameter factor vanished before termination")
    with np.errstate(divide="ignore", invalid="ignore"):
        nxt = term * num / den * z
    return np.where(live, nxt, 0.0)


def hyp_pfq(upper, lower, z):
    r"""Terminating ${}_rF_s(\text{upper}; \text{lower}; z)$."""
    return hypergeometric_terminating(SeriesSpec(tuple(upper), tuple(lower), z, basic=False))


def qhyp_rphis(upper, lower, q: float, z, ctx: QContext | None = None):
    r"""Terminating ${}_r\phi_s(\text{upper}; \text{lower}; q, z)$."""
    ctx = ctx or QContext(q)
    return hypergeometric_terminating(SeriesSpec(tuple(upper), tuple(lower), z, basic=True), ctx)
