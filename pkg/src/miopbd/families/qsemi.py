"""Semi-infinite q-families: little q-Jacobi, little q-Laguerre and q-Meixner."""
from __future__ import annotations

import numpy as np

from ..specfun import QPow, qpochhammer_inf, qpochhammer_real
from .base import Family, register


def _x(x):
    return np.asarray(x, dtype=float)


def _qpx(p, a, x):
    return qpochhammer_real(a, p.ctx, x)


@register
class LittleQJacobi(Family):
    id = "lqJ"
    basic = True
    finite = False
    names = ("a", "b")
    public = ("a", "b")
    mult = (True, True)
    delta = (1, 1)
    delta_t = (-1, 1)
    kappa_exp = -1

    def constraints(self, p, dmax):
        a, b = p.lam
        out = [(0 < a < 1, "0<a<1"), (b < 1, "b<1")]
        if dmax is not None:
            out.append((a < p.q ** (1 + dmax), f"a<q^(1+d_M) (d_M={dmax})"))
        return out

    def twist(self, p):
        a, b = p.lam
        return p.with_lam((p.q ** 2 / a, b))

    def B(self, p, x):
        a, b = p.lam
        q = p.q
        return a / q * (q ** -_x(x) - b)

    def D(self, p, x):
        return p.q ** -_x(x) - 1

    def energy(self, p, n):
        a, b = p.lam
        q = p.q
        return (q ** -n - 1) * (1 - a * b * q ** (n - 1))

    def eta(self, p, x):
        return 1 - p.q ** _x(x)

    def P(self, p, n, x):
        a, b = p.lam
        q = p.q
        x = _x(x)
        return self._phi(p, [QPow(-n), a * b * q ** (n - 1), self._qx(p, x)], [b], q ** (x + 1) / a)

    def c_prime(self, p, n):
        a, b = p.lam
        q = p.q
        return (-a) ** -n * q ** (-(n * (n - 1) // 2)) * self._qp(p, n, a) / self._qp(p, n, b)

    def P_alt(self, p, n, x):
        a, b = p.lam
        q = p.q
        x = _x(x)
        return self.c_prime(p, n) * self._phi(p, [QPow(-n), a * b * q ** (n - 1)], [a], q ** (x + 1))

    def phi0_sq_closed(self, p, x):
        a, b = p.lam
        x = _x(x)
        return _qpx(p, b, x) / _qpx(p, p.q, x) * a ** x

    def dn_sq(self, p, n):
        a, b = p.lam
        q = p.q
        Q = lambda k, *z: self._qp(p, k, *z)
        return float(Q(n, b, a * b) * a ** n * q ** (n * (n - 1)) / Q(n, a, q)
                     * (1 - a * b * q ** (2 * n - 1)) / (1 - a * b * q ** (n - 1))
                     * qpochhammer_inf(a, p.ctx) / qpochhammer_inf(a * b, p.ctx))

    def alpha(self, p):
        return p.lam[0] / p.q

    def alpha_p(self, p):
        a, b = p.lam
        return -(1 - a / p.q) * (1 - b)

    def xi(self, p, v, x):
        a, b = p.lam
        q = p.q
        x = _x(x)
        pre = self._qp(p, v, a * q ** (-v - 1)) / self._qp(p, v, b)
        return pre * self._phi(p, [QPow(-v), b / a * q ** (v + 1)], [q ** 2 / a], q ** (x + 1))

    def xi_alt(self, p, v, x):
        a, b = p.lam
        q = p.q
        x = _x(x)
        pre = self._qp(p, v, a * q ** (-v - 1)) / self._qp(p, v, b) * self._qp(p, v, b * q ** x)
        return pre * self._phi(p, [QPow(-v), q ** (1 - v) / b, 0.0], [q ** 2 / a, q ** (1 - v - x) / b], q)

    def Etilde(self, p, v):
        a, b = p.lam
        q = p.q
        return -(1 - a * q ** (-v - 1)) * (1 - b * q ** v)

    def nu_closed(self, p, x):
        return (p.lam[0] / p.q) ** _x(x)

    def r(self, p, j, x, M):
        a = p.lam[0]
        q = p.q
        return (a / q) ** (j - 1) * q ** (M * _x(x))

    def c_n(self, p, n):
        a, b = p.lam
        q = p.q
        return float((-a) ** -n * q ** (-n * (n - 1)) * self._qp(p, n, a * b * q ** (n - 1)) / self._qp(p, n, b))

    def ctilde(self, p, v):
        a, b = p.lam
        q = p.q
        return float((-a) ** v * q ** (-v * (v + 1)) * self._qp(p, v, b / a * q ** (v + 1)) / self._qp(p, v, b))

    def beta(self, p, n):
        a, b = p.lam
        return 1 - a / b * p.q ** (-n - 1)

    def beta_p(self, p, n):
        a, b = p.lam
        return 1 - p.q ** -n / b


@register
class LittleQLaguerre(Family):
    id = "lqL"
    basic = True
    finite = False
    names = ("a",)
    public = ("a",)
    mult = (True,)
    delta = (1,)
    delta_t = (-1,)
    kappa_exp = -1

    def constraints(self, p, dmax):
        (a,) = p.lam
        out = [(0 < a < 1, "0<a<1")]
        if dmax is not None:
            out.append((a < p.q ** (1 + dmax), f"a<q^(1+d_M) (d_M={dmax})"))
        return out

    def twist(self, p):
        return p.with_lam((p.q ** 2 / p.lam[0],))

    def B(self, p, x):
        return p.lam[0] * p.q ** (-_x(x) - 1)

    def D(self, p, x):
        return p.q ** -_x(x) - 1

    def energy(self, p, n):
        return p.q ** -n - 1.0

    def eta(self, p, x):
        return 1 - p.q ** _x(x)

    def P(self, p, n, x):
        (a,) = p.lam
        q = p.q
        x = _x(x)
        return self._phi(p, [QPow(-n), self._qx(p, x)], [], q ** (x + 1) / a)

    def c_prime(self, p, n):
        (a,) = p.lam
        return (-a) ** -n * p.q ** (-(n * (n - 1) // 2)) * self._qp(p, n, a)

    def P_alt(self, p, n, x):
        (a,) = p.lam
        q = p.q
        x = _x(x)
        return self.c_prime(p, n) * self._phi(p, [QPow(-n), 0.0], [a], q ** (x + 1))

    def phi0_sq_closed(self, p, x):
        (a,) = p.lam
        x = _x(x)
        return a ** x / _qpx(p, p.q, x)

    def dn_sq(self, p, n):
        (a,) = p.lam
        q = p.q
        return float(a ** n * q ** (n * (n - 1)) / self._qp(p, n, a, q) * qpochhammer_inf(a, p.ctx))

    def alpha(self, p):
        return p.lam[0] / p.q

    def alpha_p(self, p):
        return -(1 - p.lam[0] / p.q)

    def xi(self, p, v, x):
        (a,) = p.lam
        q = p.q
        x = _x(x)
        pre = self._qp(p, v, a * q ** (-v - 1))
        return pre * self._phi(p, [QPow(-v), 0.0], [q ** 2 / a], q ** (x + 1))

    def Etilde(self, p, v):
        return -(1 - p.lam[0] * p.q ** (-v - 1))

    def nu_closed(self, p, x):
        return (p.lam[0] / p.q) ** _x(x)

    def r(self, p, j, x, M):
        a = p.lam[0]
        q = p.q
        return (a / q) ** (j - 1) * q ** (M * _x(x))

    def c_n(self, p, n):
        (a,) = p.lam
        return float((-a) ** -n * p.q ** (-n * (n - 1)))

    def ctilde(self, p, v):
        (a,) = p.lam
        return float((-a) ** v * p.q ** (-v * (v + 1)))

    def beta(self, p, n):
        return p.q ** -n

    def beta_p(self, p, n):
        return p.q ** -n


@register
class QMeixner(Family):
    id = "qM"
    basic = True
    finite = False
    twist_defined = False
    names = ("b", "c")
    public = ("b", "c")
    mult = (True, True)
    delta = (1, -1)
    delta_t = (1, 0)
    kappa_exp = 1

    def constraints(self, p, dmax):
        b, c = p.lam
        return [(0 < b < 1 / p.q, "0<b<q^{-1}"), (c > 0, "c>0")]

    def twist(self, p):
        raise NotImplementedError("qM virtual data is defined without a twist")

    def B(self, p, x):
        b, c = p.lam
        q = p.q
        x = _x(x)
        return c * q ** x * (1 - b * q ** (x + 1))

    def D(self, p, x):
        b, c = p.lam
        q = p.q
        x = _x(x)
        return (1 - q ** x) * (1 + b * c * q ** x)

    def energy(self, p, n):
        return 1.0 - p.q ** n

    def eta(self, p, x):
        return p.q ** -_x(x) - 1

    def P(self, p, n, x):
        b, c = p.lam
        q = p.q
        return self._phi(p, [QPow(-n), self._qx(p, x)], [b * q], -q ** (n + 1) / c)

    def phi0_sq_closed(self, p, x):
        b, c = p.lam
        q = p.q
        x = _x(x)
        return _qpx(p, b * q, x) / (_qpx(p, q, x) * _qpx(p, -b * c * q, x)) * c ** x * q ** (x * (x - 1) / 2)

    def dn_sq(self, p, n):
        b, c = p.lam
        q = p.q
        Q = lambda k, *z: self._qp(p, k, *z)
        return float(q ** n * Q(n, b * q) / Q(n, q, -q / c)
                     * qpochhammer_inf(-b * c * q, p.ctx) / qpochhammer_inf(-c, p.ctx))

    def B_prime(self, p, x):
        b, c = p.lam
        q = p.q
        x = _x(x)
        return -(1 - b * q ** (x + 1)) * (1 + b * c * q ** (x + 1))

    def D_prime(self, p, x):
        b, c = p.lam
        q = p.q
        x = _x(x)
        return -b * b * c * q ** (x + 1) * (1 - q ** x)

    def phit0_sq_closed(self, p, x):
        b, c = p.lam
        q = p.q
        x = _x(x)
        return (_qpx(p, b * q, x) * _qpx(p, -b * c * q, x) / _qpx(p, q, x)
                * (b * b * c * q * q) ** -x * q ** (-x * (x - 1) / 2))

    def alpha(self, p):
        return -1.0 / (p.lam[0] * p.q)

    def alpha_p(self, p):
        return -(1.0 / (p.lam[0] * p.q) - 1)

    def E_prime(self, p, v):
        return p.q ** -v - 1.0

    def xi(self, p, v, x):
        b, c = p.lam
        q = p.q
        return self._phi(p, [QPow(-v), self._qx(p, x), 0.0], [b * q, -b * c * q], q)

    def xi_twist(self, p, v, x):
        return self.xi(p, v, x)

    def Etilde(self, p, v):
        return -(p.q ** (-v - 1) / p.lam[0] - 1)

    def nu_closed(self, p, x):
        b, c = p.lam
        q = p.q
        x = _x(x)
        return 1.0 / _qpx(p, -q ** -x / (b * c), x)

    def r(self, p, j, x, M):
        b, c = p.lam
        q = p.q
        x = _x(x)
        return (self._qp(p, M + 1 - j, -q ** (-x - M) / (b * c))
                / self._qp(p, M, -q ** -M / (b * c)))

    def c_n(self, p, n):
        b, c = p.lam
        q = p.q
        return float((-c) ** -n * q ** (n * n) / self._qp(p, n, b * q))

    def ctilde(self, p, v):
        b, c = p.lam
        q = p.q
        return float(1.0 / self._qp(p, v, b * q, -b * c * q))

    def beta(self, p, n):
        return 1.0

    def beta_p(self, p, n):
        return 1 - p.lam[0] * p.q ** (n + 1)
