"""Ordinary (non-q) families: Hahn, Racah, dual Hahn and Meixner."""
from __future__ import annotations

import numpy as np

from ..specfun import pochhammer_real
from .base import Family, _int_if_close, register


def _x(x):
    return np.asarray(x, dtype=float)


@register
class Hahn(Family):
    id = "H"
    names = ("a", "b", "N")
    public = ("a", "b")
    mult = (False, False, False)
    delta = (1, 1, -1)
    delta_t = (1, -1, 0)

    def lattice_N(self, p):
        return _int_if_close(p.lam[2])

    def constraints(self, p, dmax):
        a, b, N = p.lam
        out = [(a > 0, "a>0"), (b > 0, "b>0")]
        if dmax is not None:
            out.append((b > 1 + dmax, f"b>1+d_M (d_M={dmax})"))
        return out

    def twist(self, p):
        a, b, N = p.lam
        return p.with_lam((a, 2 - b, N + b - 1))

    def B(self, p, x):
        a, b, N = p.lam
        x = _x(x)
        return (x + a) * (N - x)

    def D(self, p, x):
        a, b, N = p.lam
        x = _x(x)
        return x * (b + N - x)

    def energy(self, p, n):
        a, b, N = p.lam
        return n * (n + a + b - 1.0)

    def eta(self, p, x):
        return _x(x)

    def P(self, p, n, x):
        a, b, N = p.lam
        return self._F([-n, n + a + b - 1, -_x(x)], [a, -N], 1.0)

    def phi0_sq_closed(self, p, x):
        a, b, N = p.lam
        x = _x(x)
        return (pochhammer_real(N - x + 1, x) / pochhammer_real(1.0, x)
                * pochhammer_real(a, x) / pochhammer_real(b + N - x, x))

    def dn_sq(self, p, n):
        a, b, N = p.lam
        P = self._poch
        return float(P(n, N - n + 1) / P(n, 1.0) * P(n, a, a + b - 1) / P(n, b, a + b + N)
                     * (2 * n + a + b - 1) / (a + b - 1) * P(int(N), b) / P(int(N), a + b))

    def alpha(self, p):
        return 1.0

    def alpha_p(self, p):
        a, b, N = p.lam
        return -a * (b - 1)

    def xi(self, p, v, x):
        a, b, N = p.lam
        return self._F([-v, v + a - b + 1, -_x(x)], [a, 1 - N - b], 1.0)

    def Etilde(self, p, v):
        a, b, N = p.lam
        return -(a + v) * (b - 1 - v)

    def nu_closed(self, p, x):
        a, b, N = p.lam
        x = _x(x)
        return pochhammer_real(N - x + 1, x) / pochhammer_real(b + N - x, x)

    def r(self, p, j, x, M):
        a, b, N = p.lam
        x = _x(x)
        P = self._poch
        return P(j - 1, N - x - j + 2) * P(M + 1 - j, b + N - M - x) / P(M, b + N - M)

    def c_n(self, p, n):
        a, b, N = p.lam
        P = self._poch
        return float(P(n, a + b + n - 1) / P(n, a, -N))

    def ctilde(self, p, v):
        a, b, N = p.lam
        P = self._poch
        return float(P(v, a - b + v + 1) / P(v, a, 1 - b - N))

    def beta(self, p, n):
        a, b, N = p.lam
        return a - b + n + 1

    def beta_p(self, p, n):
        a, b, N = p.lam
        return a + n


@register
class Racah(Family):
    id = "R"
    names = ("a", "b", "c", "d")
    public = ("b", "c", "d")
    mult = (False,) * 4
    delta = (1, 1, 1, 1)
    delta_t = (0, 0, 1, 1)

    def _lam_from_public(self, vals, N):
        return [-N, vals["b"], vals["c"], vals["d"]]

    def lattice_N(self, p):
        return _int_if_close(-p.lam[0])

    @staticmethod
    def _dt(p):
        a, b, c, d = p.lam
        return a + b + c - d - 1

    def constraints(self, p, dmax):
        a, b, c, d = p.lam
        out = [(0 < d < a + b, "0<d<a+b"), (0 < c < 1 + d, "0<c<1+d")]
        if dmax is not None:
            out.append((a + b > d + 1 + dmax, f"a+b>d+1+d_M (d_M={dmax})"))
        return out

    def twist(self, p):
        a, b, c, d = p.lam
        return p.with_lam((d - a + 1, d - b + 1, c, d))

    def B(self, p, x):
        a, b, c, d = p.lam
        x = _x(x)
        return -(x + a) * (x + b) * (x + c) * (x + d) / ((2 * x + d) * (2 * x + 1 + d))

    def D(self, p, x):
        a, b, c, d = p.lam
        x = _x(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = -(x + d - a) * (x + d - b) * (x + d - c) * x / ((2 * x - 1 + d) * (2 * x + d))
        return np.where(x == 0, 0.0, val) if val.ndim else (0.0 if x == 0 else float(val))

    def energy(self, p, n):
        return n * (n + self._dt(p))

    def eta(self, p, x):
        d = p.lam[3]
        x = _x(x)
        return x * (x + d)

    def P(self, p, n, x):
        a, b, c, d = p.lam
        x = _x(x)
        return self._F([-n, n + self._dt(p), -x, x + d], [a, b, c], 1.0)

    def phi0_sq_closed(self, p, x):
        a, b, c, d = p.lam
        x = _x(x)
        num = pochhammer_real(a, x) * pochhammer_real(b, x) * pochhammer_real(c, x) * pochhammer_real(d, x)
        den = (pochhammer_real(1 + d - a, x) * pochhammer_real(1 + d - b, x)
               * pochhammer_real(1 + d - c, x) * pochhammer_real(1.0, x))
        return num / den * (2 * x + d) / d

    def dn_sq(self, p, n):
        a, b, c, d = p.lam
        dt = self._dt(p)
        N = self.lattice_N(p)
        P = self._poch
        head = P(n, a, b, c, dt) / P(n, 1 + dt - a, 1 + dt - b, 1 + dt - c, 1.0) * (2 * n + dt) / dt
        tail = (-1) ** N * P(N, 1 + d - a, 1 + d - b, 1 + d - c) / (P(N, dt + 1) * P(2 * N, d + 1))
        return float(head * tail)

    def alpha(self, p):
        return 1.0

    def alpha_p(self, p):
        a, b, c, d = p.lam
        return -c * (a + b - d - 1)

    def xi(self, p, v, x):
        a, b, c, d = p.lam
        x = _x(x)
        return self._F([-v, v - a - b + c + d + 1, -x, x + d], [d - a + 1, d - b + 1, c], 1.0)

    def Etilde(self, p, v):
        a, b, c, d = p.lam
        return -(c + v) * (a + b - d - 1 - v)

    def nu_closed(self, p, x):
        a, b, c, d = p.lam
        x = _x(x)
        return (pochhammer_real(a, x) * pochhammer_real(b, x)
                / (pochhammer_real(d - a + 1, x) * pochhammer_real(d - b + 1, x)))

    def r(self, p, j, x, M):
        a, b, c, d = p.lam
        x = _x(x)
        P = self._poch
        return (P(j - 1, x + a, x + b) * P(M + 1 - j, x + d - a + j, x + d - b + j)
                / P(M, d - a + 1, d - b + 1))

    def c_n(self, p, n):
        a, b, c, d = p.lam
        return float(self._poch(n, self._dt(p) + n) / self._poch(n, a, b, c))

    def ctilde(self, p, v):
        a, b, c, d = p.lam
        P = self._poch
        return float(P(v, c + d - a - b + v + 1) / P(v, d - a + 1, d - b + 1, c))

    def beta(self, p, n):
        a, b, c, d = p.lam
        return c + d - a - b + n + 1

    def beta_p(self, p, n):
        return p.lam[2] + n


@register
class DualHahn(Family):
    id = "dH"
    names = ("a", "b", "N")
    public = ("a", "b")
    mult = (False, False, False)
    delta = (1, 0, -1)
    delta_t = (0, 1, 0)
    virtual_above = True

    def lattice_N(self, p):
        return _int_if_close(p.lam[2])

    def constraints(self, p, dmax):
        a, b, N = p.lam
        return [(a > 0, "a>0"), (b > 0, "b>0")]

    def twist(self, p):
        a, b, N = p.lam
        return p.with_lam((b, a, -a - b - N))

    def B(self, p, x):
        a, b, N = p.lam
        x = _x(x)
        return (x + a) * (x + a + b - 1) * (N - x) / ((2 * x - 1 + a + b) * (2 * x + a + b))

    def D(self, p, x):
        a, b, N = p.lam
        x = _x(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = x * (x + b - 1) * (x + a + b + N - 1) / ((2 * x - 2 + a + b) * (2 * x - 1 + a + b))
        return np.where(x == 0, 0.0, val) if val.ndim else (0.0 if x == 0 else float(val))

    def energy(self, p, n):
        return float(n)

    def eta(self, p, x):
        a, b, N = p.lam
        x = _x(x)
        return x * (x + a + b - 1)

    def P(self, p, n, x):
        a, b, N = p.lam
        x = _x(x)
        return self._F([-n, x + a + b - 1, -x], [a, -N], 1.0)

    def phi0_sq_closed(self, p, x):
        a, b, N = p.lam
        x = _x(x)
        pr = pochhammer_real
        return (pr(N - x + 1, x) / pr(1.0, x) * pr(a, x) * pr(a + b - 1, x)
                / (pr(b, x) * pr(a + b + N, x)) * (2 * x + a + b - 1) / (a + b - 1))

    def dn_sq(self, p, n):
        a, b, N = p.lam
        P = self._poch
        return float(P(n, N - n + 1) / P(n, 1.0) * P(n, a) / P(n, b + N - n)
                     * P(int(N), b) / P(int(N), a + b))

    def alpha(self, p):
        return 1.0

    def alpha_p(self, p):
        a, b, N = p.lam
        return b + N

    def xi(self, p, v, x):
        a, b, N = p.lam
        x = _x(x)
        return self._F([-v, x + a + b - 1, -x], [b, a + b + N], 1.0)

    def Etilde(self, p, v):
        a, b, N = p.lam
        return b + N + v

    def nu_closed(self, p, x):
        a, b, N = p.lam
        x = _x(x)
        pr = pochhammer_real
        return pr(a, x) * pr(-N, x) / (pr(b, x) * pr(a + b + N, x))

    def r(self, p, j, x, M):
        a, b, N = p.lam
        x = _x(x)
        P = self._poch
        return (P(j - 1, x - N, x + a) * P(M + 1 - j, a + b + N + x + j - 1, b + x + j - 1)
                / P(M, a + b + N, b))

    def c_n(self, p, n):
        a, b, N = p.lam
        return float(1.0 / self._poch(n, a, -N))

    def ctilde(self, p, v):
        a, b, N = p.lam
        return float(1.0 / self._poch(v, b, a + b + N))

    def beta(self, p, n):
        return 1.0

    def beta_p(self, p, n):
        return 1.0


@register
class Meixner(Family):
    id = "M"
    finite = False
    names = ("beta", "c")
    public = ("beta", "c")
    mult = (False, False)
    delta = (1, 0)
    delta_t = (1, 0)

    def constraints(self, p, dmax):
        be, c = p.lam
        return [(be > 0, "beta>0"), (0 < c < 1, "0<c<1")]

    def twist(self, p):
        be, c = p.lam
        return p.with_lam((be, 1.0 / c))

    def B(self, p, x):
        be, c = p.lam
        return c * (_x(x) + be)

    def D(self, p, x):
        return _x(x) * 1.0

    def energy(self, p, n):
        be, c = p.lam
        return (1 - c) * n

    def eta(self, p, x):
        return _x(x)

    def P(self, p, n, x):
        be, c = p.lam
        return self._F([-n, -_x(x)], [be], 1 - 1 / c)

    def phi0_sq_closed(self, p, x):
        be, c = p.lam
        x = _x(x)
        return pochhammer_real(be, x) * c ** x / pochhammer_real(1.0, x)

    def dn_sq(self, p, n):
        be, c = p.lam
        return float(self._poch(n, be) * c ** n / self._poch(n, 1.0) * (1 - c) ** be)

    def alpha(self, p):
        return p.lam[1]

    def alpha_p(self, p):
        be, c = p.lam
        return -(1 - c) * be

    def xi(self, p, v, x):
        be, c = p.lam
        return self._F([-v, -_x(x)], [be], 1 - c)

    def Etilde(self, p, v):
        be, c = p.lam
        return -(1 - c) * (v + be)

    def nu_closed(self, p, x):
        return p.lam[1] ** _x(x)

    def r(self, p, j, x, M):
        return np.ones_like(_x(x)) * p.lam[1] ** (j - 1)

    def c_n(self, p, n):
        be, c = p.lam
        return float((1 - 1 / c) ** n / self._poch(n, be))

    def ctilde(self, p, v):
        be, c = p.lam
        return float((1 - c) ** v / self._poch(v, be))

    def beta(self, p, n):
        return 1.0

    def beta_p(self, p, n):
        return p.lam[0] + n
