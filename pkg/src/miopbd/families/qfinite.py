"""Finite q-families: dqqK, qH, qqK, aqK, qR and dqH."""
from __future__ import annotations

import numpy as np

from ..specfun import QPow, qpochhammer_real
from .base import Family, _int_if_close, register


def _x(x):
    return np.asarray(x, dtype=float)


def _qpx(p, a, x):
    """``(a; q)_x`` for a lattice-valued count ``x``."""
    return qpochhammer_real(a, p.ctx, x)


@register
class DualQuantumQKrawtchouk(Family):
    id = "dqqK"
    basic = True
    names = ("p", "N")
    public = ("p",)
    mult = (True, False)
    delta = (0, -1)
    delta_t = (1, 0)
    kappa_exp = -1

    def lattice_N(self, p):
        return _int_if_close(p.lam[1])

    def constraints(self, p, dmax):
        pp, N = p.lam
        q = p.q
        out = [(pp > q ** -N, "p>q^{-N}")]
        if dmax is not None:
            out.append((pp > q ** (-N - 1 - dmax), f"p>q^(-N-1-d_M) (d_M={dmax})"))
        return out

    def twist(self, p):
        pp, N = p.lam
        q = p.q
        return p.with_lam((q ** (-N - 1), self._log_q(p, 1.0 / (pp * q))))

    def B(self, p, x):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        return q ** (-x - N - 1) / pp * (1 - q ** (N - x))

    def D(self, p, x):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        return (q ** -x - 1) * (1 - q ** -x / pp)

    def energy(self, p, n):
        return p.q ** -n - 1.0

    def eta(self, p, x):
        return 1 - p.q ** _x(x)

    def P(self, p, n, x):
        pp, N = p.lam
        x = _x(x)
        return self._phi(p, [QPow(-n), self._qx(p, x)], [QPow(-N)], pp * p.q ** (x + 1))

    def phi0_sq_closed(self, p, x):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        return (_qpx(p, q ** (N - x + 1), x) / _qpx(p, q, x)
                * pp ** -x * q ** (-N * x) / _qpx(p, q ** -x / pp, x))

    def dn_sq(self, p, n):
        pp, N = p.lam
        q = p.q
        Q = lambda k, *a: self._qp(p, k, *a)
        return float(Q(n, q ** (N - n + 1)) / Q(n, q) * pp ** -n * q ** (n * (n - 1 - N))
                     / Q(n, q ** -N / pp) * Q(int(N), q ** -N / pp))

    def alpha(self, p):
        pp, N = p.lam
        return p.q ** (-N - 1) / pp

    def alpha_p(self, p):
        pp, N = p.lam
        return -(1 - p.q ** (-N - 1) / pp)

    def xi(self, p, v, x):
        pp, N = p.lam
        x = _x(x)
        return self._phi(p, [QPow(-v), self._qx(p, x)], [pp * p.q], p.q ** (x - N))

    def Etilde(self, p, v):
        pp, N = p.lam
        return -(1 - p.q ** (-N - 1 - v) / pp)

    def nu_closed(self, p, x):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        return _qpx(p, q ** -N, x) / _qpx(p, pp * q, x)

    def r(self, p, j, x, M):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        Q = lambda k, *a: self._qp(p, k, *a)
        return Q(j - 1, q ** (x - N)) * Q(M + 1 - j, pp * q ** (x + j)) / Q(M, pp * q)

    def c_n(self, p, n):
        pp, N = p.lam
        q = p.q
        return float(pp ** n * q ** (-(n * (n - 1) // 2)) / self._qp(p, n, q ** -N))

    def ctilde(self, p, v):
        pp, N = p.lam
        q = p.q
        return float(q ** (-N * v - v * (v + 1) / 2) / self._qp(p, v, pp * q))

    def beta(self, p, n):
        return p.q ** -n

    def beta_p(self, p, n):
        return p.q ** -n


@register
class QHahn(Family):
    id = "qH"
    basic = True
    names = ("a", "b", "N")
    public = ("a", "b")
    mult = (True, True, False)
    delta = (1, 1, -1)
    delta_t = (1, -1, 0)
    kappa_exp = -1

    def lattice_N(self, p):
        return _int_if_close(p.lam[2])

    def constraints(self, p, dmax):
        a, b, N = p.lam
        out = [(0 < a < 1, "0<a<1"), (0 < b < 1, "0<b<1")]
        if dmax is not None:
            out.append((b < p.q ** (1 + dmax), f"b<q^(1+d_M) (d_M={dmax})"))
        return out

    def twist(self, p):
        a, b, N = p.lam
        q = p.q
        return p.with_lam((a, q * q / b, N - 1 + self._log_q(p, b)))

    def B(self, p, x):
        a, b, N = p.lam
        q = p.q
        x = _x(x)
        return (1 - a * q ** x) * (q ** (x - N) - 1)

    def D(self, p, x):
        a, b, N = p.lam
        q = p.q
        x = _x(x)
        return a / q * (1 - q ** x) * (q ** (x - N) - b)

    def energy(self, p, n):
        a, b, N = p.lam
        q = p.q
        return (q ** -n - 1) * (1 - a * b * q ** (n - 1))

    def eta(self, p, x):
        return p.q ** -_x(x) - 1

    def P(self, p, n, x):
        a, b, N = p.lam
        q = p.q
        return self._phi(p, [QPow(-n), a * b * q ** (n - 1), self._qx(p, x)], [a, QPow(-N)], q)

    def phi0_sq_closed(self, p, x):
        a, b, N = p.lam
        q = p.q
        x = _x(x)
        return (_qpx(p, q ** (N - x + 1), x) / _qpx(p, q, x)
                * _qpx(p, a, x) / (_qpx(p, b * q ** (N - x), x) * a ** x))

    def dn_sq(self, p, n):
        a, b, N = p.lam
        q = p.q
        Q = lambda k, *z: self._qp(p, k, *z)
        Ni = int(N)
        return float(Q(n, q ** (N - n + 1)) / Q(n, q) * Q(n, a, a * b / q) / (Q(n, b, a * b * q ** N) * a ** n)
                     * (1 - a * b * q ** (2 * n - 1)) / (1 - a * b / q)
                     * Q(Ni, b) * a ** Ni / Q(Ni, a * b))

    def alpha(self, p):
        return p.lam[1] / p.q

    def alpha_p(self, p):
        a, b, N = p.lam
        return -(1 - a) * (1 - b / p.q)

    def xi(self, p, v, x):
        a, b, N = p.lam
        q = p.q
        return self._phi(p, [QPow(-v), a / b * q ** (v + 1), self._qx(p, x)], [a, q ** (1 - N) / b], q)

    def Etilde(self, p, v):
        a, b, N = p.lam
        q = p.q
        return -(1 - a * q ** v) * (1 - b * q ** (-v - 1))

    def nu_closed(self, p, x):
        a, b, N = p.lam
        q = p.q
        x = _x(x)
        return _qpx(p, q ** (N - x + 1), x) / _qpx(p, b * q ** (N - x), x)

    def r(self, p, j, x, M):
        a, b, N = p.lam
        q = p.q
        x = _x(x)
        Q = lambda k, *z: self._qp(p, k, *z)
        return Q(j - 1, q ** (N - x - j + 2)) * Q(M + 1 - j, b * q ** (N - M - x)) / Q(M, b * q ** (N - M))

    def c_n(self, p, n):
        a, b, N = p.lam
        q = p.q
        return float(self._qp(p, n, a * b * q ** (n - 1)) / self._qp(p, n, a, q ** -N))

    def ctilde(self, p, v):
        a, b, N = p.lam
        q = p.q
        return float(self._qp(p, v, a / b * q ** (v + 1)) / self._qp(p, v, a, q ** (1 - N) / b))

    def beta(self, p, n):
        a, b, N = p.lam
        return 1 - a / b * p.q ** (n + 1)

    def beta_p(self, p, n):
        return 1 - p.lam[0] * p.q ** n


@register
class QuantumQKrawtchouk(Family):
    id = "qqK"
    basic = True
    names = ("p", "N")
    public = ("p",)
    mult = (True, False)
    delta = (1, -1)
    delta_t = (-1, 0)
    kappa_exp = 1
    virtual_above = True

    def lattice_N(self, p):
        return _int_if_close(p.lam[1])

    def constraints(self, p, dmax):
        pp, N = p.lam
        return [(pp > p.q ** -N, "p>q^{-N}")]

    def twist(self, p):
        pp, N = p.lam
        return p.with_lam((1.0 / pp, N + self._log_q(p, pp)))

    def B(self, p, x):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        return q ** x / pp * (q ** (x - N) - 1)

    def D(self, p, x):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        return (1 - q ** x) * (1 - q ** (x - N - 1) / pp)

    def energy(self, p, n):
        return 1.0 - p.q ** n

    def eta(self, p, x):
        return p.q ** -_x(x) - 1

    def P(self, p, n, x):
        pp, N = p.lam
        q = p.q
        return self._phi(p, [QPow(-n), self._qx(p, x)], [QPow(-N)], pp * q ** (n + 1))

    def phi0_sq_closed(self, p, x):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        return (_qpx(p, q ** (N - x + 1), x) / _qpx(p, q, x)
                * pp ** -x * q ** (x * (x - 1 - N)) / _qpx(p, q ** -N / pp, x))

    def dn_sq(self, p, n):
        pp, N = p.lam
        q = p.q
        Q = lambda k, *z: self._qp(p, k, *z)
        return float(Q(n, q ** (N - n + 1)) / Q(n, q) * pp ** -n * q ** (-N * n)
                     / Q(n, q ** -n / pp) * Q(int(N), q ** -N / pp))

    def alpha(self, p):
        return 1.0 / p.lam[0]

    def alpha_p(self, p):
        return 1.0 - 1.0 / p.lam[0]

    def xi(self, p, v, x):
        pp, N = p.lam
        q = p.q
        return self._phi(p, [QPow(-v), self._qx(p, x)], [q ** -N / pp], q ** (v + 1) / pp)

    def Etilde(self, p, v):
        return 1.0 - p.q ** v / p.lam[0]

    def nu_closed(self, p, x):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        return _qpx(p, q ** (N + 1 - x), x) / _qpx(p, pp * q ** (N + 1 - x), x)

    def r(self, p, j, x, M):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        Q = lambda k, *z: self._qp(p, k, *z)
        return (Q(j - 1, q ** (N - x - j + 2)) * Q(M + 1 - j, pp * q ** (N - M - x + 1))
                / Q(M, pp * q ** (N - M + 1)))

    def c_n(self, p, n):
        pp, N = p.lam
        q = p.q
        return float(pp ** n * q ** (n * n) / self._qp(p, n, q ** -N))

    def ctilde(self, p, v):
        pp, N = p.lam
        q = p.q
        return float(pp ** -v * q ** (v * v) / self._qp(p, v, q ** -N / pp))

    def beta(self, p, n):
        return p.q ** n

    def beta_p(self, p, n):
        return p.q ** n


@register
class AffineQKrawtchouk(Family):
    id = "aqK"
    basic = True
    twist_defined = False
    names = ("p", "N")
    public = ("p",)
    mult = (True, False)
    delta = (1, -1)
    delta_t = (1, 0)
    kappa_exp = -1

    def lattice_N(self, p):
        return _int_if_close(p.lam[1])

    def constraints(self, p, dmax):
        pp, N = p.lam
        return [(0 < pp < 1 / p.q, "0<p<q^{-1}")]

    def twist(self, p):
        raise NotImplementedError("aqK virtual data is defined without a twist")

    def B(self, p, x):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        return (q ** (x - N) - 1) * (1 - pp * q ** (x + 1))

    def D(self, p, x):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        return pp * q ** (x - N) * (1 - q ** x)

    def energy(self, p, n):
        return p.q ** -n - 1.0

    def eta(self, p, x):
        return p.q ** -_x(x) - 1

    def P(self, p, n, x):
        pp, N = p.lam
        q = p.q
        return self._phi(p, [QPow(-n), self._qx(p, x), 0.0], [pp * q, QPow(-N)], q)

    def P_alt(self, p, n, x, form: int = 1):
        """The two alternative printed forms of the same polynomial."""
        pp, N = p.lam
        q = p.q
        x = _x(x)
        if form == 1:
            return (self._phi(p, [QPow(-n), QPow(x - N)], [QPow(-N)], q ** -x / pp)
                    / self._qp(p, n, q ** -n / pp))
        return (self._phi(p, [QPow(-n), pp * q ** (x + 1)], [pp * q], q ** (N + 1 - x))
                / self._qp(p, n, q ** (N + 1 - n)))

    def phi0_sq_closed(self, p, x):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        return _qpx(p, q ** (N - x + 1), x) / _qpx(p, q, x) * _qpx(p, pp * q, x) / (pp * q) ** x

    def dn_sq(self, p, n):
        pp, N = p.lam
        q = p.q
        Q = lambda k, *z: self._qp(p, k, *z)
        return float(Q(n, q ** (N - n + 1)) / Q(n, q) * Q(n, pp * q) / (pp * q) ** n * (pp * q) ** N)

    def B_prime(self, p, x):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        return q ** (x - N) * (1 - pp * q ** (x + 1))

    def D_prime(self, p, x):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        return pp * q * (q ** (x - N - 1) - 1) * (1 - q ** x)

    def phit0_sq_closed(self, p, x):
        pp, N = p.lam
        q = p.q
        x = _x(x)
        return _qpx(p, pp * q, x) / (_qpx(p, q ** (N - x + 1), x) * _qpx(p, q, x) * (pp * q) ** x)

    def alpha(self, p):
        return 1.0

    def alpha_p(self, p):
        return -(1 - p.lam[0] * p.q)

    def E_prime(self, p, v):
        return -p.lam[0] * p.q * (1 - p.q ** v)

    def xi(self, p, v, x):
        pp, N = p.lam
        q = p.q
        return self._phi(p, [QPow(-v), self._qx(p, x)], [pp * q], pp * q ** (N + v + 2))

    def xi_twist(self, p, v, x):
        return self.xi(p, v, x)

    def Etilde(self, p, v):
        return -(1 - p.lam[0] * p.q ** (v + 1))

    def nu_closed(self, p, x):
        pp, N = p.lam
        x = _x(x)
        return _qpx(p, p.q ** (N + 1 - x), x)

    def r(self, p, j, x, M):
        pp, N = p.lam
        x = _x(x)
        return self._qp(p, j - 1, p.q ** (N - x - j + 2)) * np.ones_like(x)

    def c_n(self, p, n):
        pp, N = p.lam
        q = p.q
        return float(1.0 / self._qp(p, n, pp * q, q ** -N))

    def ctilde(self, p, v):
        pp, N = p.lam
        q = p.q
        return float((pp * q ** (N + v + 1)) ** v / self._qp(p, v, pp * q))

    def beta(self, p, n):
        return p.q ** n

    def beta_p(self, p, n):
        return 1 - p.lam[0] * p.q ** (n + 1)


@register
class QRacah(Family):
    id = "qR"
    basic = True
    # a = q**la is stored through its exponent so that 1 - a q^x vanishes exactly
    names = ("la", "b", "c", "d")
    public = ("b", "c", "d")
    mult = (False, True, True, True)
    delta = (1, 1, 1, 1)
    delta_t = (0, 0, 1, 1)
    kappa_exp = -1

    def _lam_from_public(self, vals, N):
        return [-N, vals["b"], vals["c"], vals["d"]]

    def lattice_N(self, p):
        return _int_if_close(-p.lam[0])

    def public_params(self, p):
        return {"b": p.lam[1], "c": p.lam[2], "d": p.lam[3]}

    def _vals(self, p):
        la, b, c, d = p.lam
        return p.q ** la, b, c, d

    def _dt(self, p):
        a, b, c, d = self._vals(p)
        return a * b * c / (d * p.q)

    def constraints(self, p, dmax):
        a, b, c, d = self._vals(p)
        q = p.q
        out = [(0 < a * b < d < 1, "0<ab<d<1"), (q * d < c < 1, "qd<c<1")]
        if dmax is not None:
            out.append((a * b < d * q ** (1 + dmax), f"ab<dq^(1+d_M) (d_M={dmax})"))
        return out

    def twist(self, p):
        la, b, c, d = p.lam
        return p.with_lam((-la + self._log_q(p, d) + 1, d * p.q / b, c, d))

    def B(self, p, x):
        la, b, c, d = p.lam
        q = p.q
        x = _x(x)
        return -((1 - q ** (la + x)) * (1 - b * q ** x) * (1 - c * q ** x) * (1 - d * q ** x)
                 / ((1 - d * q ** (2 * x)) * (1 - d * q ** (2 * x + 1))))

    def D(self, p, x):
        a, b, c, d = self._vals(p)
        q = p.q
        x = _x(x)
        return -self._dt(p) * ((1 - d / a * q ** x) * (1 - d / b * q ** x) * (1 - d / c * q ** x) * (1 - q ** x)
                               / ((1 - d * q ** (2 * x - 1)) * (1 - d * q ** (2 * x))))

    def energy(self, p, n):
        q = p.q
        return (q ** -n - 1) * (1 - self._dt(p) * q ** n)

    def eta(self, p, x):
        d = p.lam[3]
        q = p.q
        x = _x(x)
        return (q ** -x - 1) * (1 - d * q ** x)

    def P(self, p, n, x):
        la, b, c, d = p.lam
        q = p.q
        x = _x(x)
        return self._phi(p, [QPow(-n), self._dt(p) * q ** n, self._qx(p, x), d * q ** x],
                         [QPow(la), b, c], q)

    def phi0_sq_closed(self, p, x):
        a, b, c, d = self._vals(p)
        q = p.q
        x = _x(x)
        num = _qpx(p, a, x) * _qpx(p, b, x) * _qpx(p, c, x) * _qpx(p, d, x)
        den = (_qpx(p, d * q / a, x) * _qpx(p, d * q / b, x) * _qpx(p, d * q / c, x)
               * _qpx(p, q, x) * self._dt(p) ** x)
        return num / den * (1 - d * q ** (2 * x)) / (1 - d)

    def dn_sq(self, p, n):
        a, b, c, d = self._vals(p)
        q = p.q
        dt = self._dt(p)
        N = self.lattice_N(p)
        Q = lambda k, *z: self._qp(p, k, *z)
        head = (Q(n, a, b, c, dt) / (Q(n, dt * q / a, dt * q / b, dt * q / c, q) * d ** n)
                * (1 - dt * q ** (2 * n)) / (1 - dt))
        tail = ((-1) ** N * Q(N, d * q / a, d * q / b, d * q / c) * dt ** N * q ** (N * (N + 1) / 2)
                / (Q(N, dt * q) * Q(2 * N, d * q)))
        return float(head * tail)

    def alpha(self, p):
        a, b, c, d = self._vals(p)
        return a * b / (d * p.q)

    def alpha_p(self, p):
        a, b, c, d = self._vals(p)
        return -(1 - c) * (1 - a * b / (d * p.q))

    def xi(self, p, v, x):
        a, b, c, d = self._vals(p)
        q = p.q
        x = _x(x)
        return self._phi(p, [QPow(-v), c * d / (a * b) * q ** (v + 1), self._qx(p, x), d * q ** x],
                         [d * q / a, d * q / b, c], q)

    def Etilde(self, p, v):
        a, b, c, d = self._vals(p)
        q = p.q
        return -(1 - c * q ** v) * (1 - a * b / d * q ** (-1 - v))

    def nu_closed(self, p, x):
        a, b, c, d = self._vals(p)
        q = p.q
        x = _x(x)
        return ((d * q / (a * b)) ** x * _qpx(p, a, x) * _qpx(p, b, x)
                / (_qpx(p, d * q / a, x) * _qpx(p, d * q / b, x)))

    def r(self, p, j, x, M):
        la, b, c, d = p.lam
        a = p.q ** la
        q = p.q
        x = _x(x)
        Q = lambda k, *z: self._qp(p, k, *z)
        num = Q(j - 1, q ** (la + x), b * q ** x) * Q(M + 1 - j, d / a * q ** (x + j), d / b * q ** (x + j))
        den = (a * b / (d * q)) ** (j - 1) * q ** (M * x) * Q(M, d * q / a, d * q / b)
        return num / den

    def c_n(self, p, n):
        a, b, c, d = self._vals(p)
        q = p.q
        return float(self._qp(p, n, self._dt(p) * q ** n) / self._qp(p, n, a, b, c))

    def ctilde(self, p, v):
        a, b, c, d = self._vals(p)
        q = p.q
        return float(self._qp(p, v, c * d / (a * b) * q ** (v + 1)) / self._qp(p, v, d * q / a, d * q / b, c))

    def beta(self, p, n):
        a, b, c, d = self._vals(p)
        return 1 - c * d / (a * b) * p.q ** (n + 1)

    def beta_p(self, p, n):
        return 1 - p.lam[2] * p.q ** n


@register
class DualQHahn(Family):
    id = "dqH"
    basic = True
    names = ("a", "b", "N")
    public = ("a", "b")
    mult = (True, True, False)
    delta = (1, 0, -1)
    delta_t = (0, 1, 0)
    kappa_exp = -1
    virtual_above = True

    def lattice_N(self, p):
        return _int_if_close(p.lam[2])

    def constraints(self, p, dmax):
        a, b, N = p.lam
        return [(0 < a < 1, "0<a<1"), (0 < b < 1, "0<b<1")]

    def twist(self, p):
        a, b, N = p.lam
        return p.with_lam((b, a, -N - self._log_q(p, a * b)))

    def B(self, p, x):
        a, b, N = p.lam
        q = p.q
        x = _x(x)
        return ((q ** (x - N) - 1) * (1 - a * q ** x) * (1 - a * b * q ** (x - 1))
                / ((1 - a * b * q ** (2 * x - 1)) * (1 - a * b * q ** (2 * x))))

    def D(self, p, x):
        a, b, N = p.lam
        q = p.q
        x = _x(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (a * q ** (x - N - 1) * (1 - q ** x) * (1 - a * b * q ** (x + N - 1)) * (1 - b * q ** (x - 1))
                   / ((1 - a * b * q ** (2 * x - 2)) * (1 - a * b * q ** (2 * x - 1))))
        return np.where(x == 0, 0.0, val) if val.ndim else (0.0 if x == 0 else float(val))

    def energy(self, p, n):
        return p.q ** -n - 1.0

    def eta(self, p, x):
        a, b, N = p.lam
        q = p.q
        x = _x(x)
        return (q ** -x - 1) * (1 - a * b * q ** (x - 1))

    def P(self, p, n, x):
        a, b, N = p.lam
        q = p.q
        x = _x(x)
        return self._phi(p, [QPow(-n), a * b * q ** (x - 1), self._qx(p, x)], [a, QPow(-N)], q)

    def phi0_sq_closed(self, p, x):
        a, b, N = p.lam
        q = p.q
        x = _x(x)
        return (_qpx(p, q ** (N - x + 1), x) / _qpx(p, q, x)
                * _qpx(p, a, x) * _qpx(p, a * b / q, x) / (_qpx(p, b, x) * _qpx(p, a * b * q ** N, x) * a ** x)
                * (1 - a * b * q ** (2 * x - 1)) / (1 - a * b / q))

    def dn_sq(self, p, n):
        a, b, N = p.lam
        q = p.q
        Q = lambda k, *z: self._qp(p, k, *z)
        Ni = int(N)
        return float(Q(n, q ** (N - n + 1)) / Q(n, q) * Q(n, a) / (Q(n, b * q ** (N - n)) * a ** n)
                     * Q(Ni, b) * a ** Ni / Q(Ni, a * b))

    def alpha(self, p):
        a, b, N = p.lam
        return p.q ** -N / b

    def alpha_p(self, p):
        a, b, N = p.lam
        return p.q ** -N / b - 1

    def xi(self, p, v, x):
        a, b, N = p.lam
        q = p.q
        x = _x(x)
        return self._phi(p, [QPow(-v), a * b * q ** (x - 1), self._qx(p, x)], [b, a * b * q ** N], q)

    def Etilde(self, p, v):
        a, b, N = p.lam
        return p.q ** (-N - v) / b - 1

    def nu_closed(self, p, x):
        a, b, N = p.lam
        q = p.q
        x = _x(x)
        return (_qpx(p, q ** (N + 1 - x), x) * _qpx(p, a, x)
                / (_qpx(p, a * b * q ** N, x) * _qpx(p, q ** (1 - x) / b, x)))

    def r(self, p, j, x, M):
        a, b, N = p.lam
        q = p.q
        x = _x(x)
        Q = lambda k, *z: self._qp(p, k, *z)
        num = Q(j - 1, q ** (x - N), a * q ** x) * Q(M + 1 - j, a * b * q ** (N + x + j - 1), b * q ** (x + j - 1))
        den = (b * q ** N) ** (1 - j) * q ** (M * x) * Q(M, a * b * q ** N, b)
        return num / den

    def c_n(self, p, n):
        a, b, N = p.lam
        return float(1.0 / self._qp(p, n, a, p.q ** -N))

    def ctilde(self, p, v):
        a, b, N = p.lam
        return float(1.0 / self._qp(p, v, b, a * b * p.q ** N))

    def beta(self, p, n):
        return 1.0

    def beta_p(self, p, n):
        return 1.0
