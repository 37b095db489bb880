"""Shared machinery for the thirteen discrete orthogonal polynomial families.

Every family is a stateless object whose methods take a :class:`FamilyParams`
and return closed-form quantities.  Quantities that the general theory derives
from others (twisted potentials, the running-product ground state, the
universal leading coefficient, ...) live here; the subclasses only encode
their printed tables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from ..errors import RangeError
from ..specfun import (
    QContext,
    QPow,
    SeriesSpec,
    hypergeometric_terminating,
    pochhammer,
    qpochhammer,
)

__all__ = ["FamilyParams", "Family", "REGISTRY", "get_family", "register"]

REGISTRY: dict[str, "Family"] = {}


def register(cls):
    REGISTRY[cls.id] = cls()
    return cls


def get_family(fid: str) -> "Family":
    try:
        return REGISTRY[fid]
    except KeyError:
        raise RangeError(f"unknown family {fid!r}; expected one of {sorted(REGISTRY)}") from None


@dataclass(frozen=True)
class FamilyParams:
    """A family identifier plus its parameter vector in storage form.

    Ordinary families store ``lambda`` as printed.  For q-families, components
    that are printed as ``q**lambda_i`` are stored by value, except lattice
    sizes (and the q-Racah ``a = q**-N``), which are stored as exponents so
    that lattice boundaries produce exact zeros.
    """

    family: str
    lam: tuple
    q: float | None = None
    dmax_hint: int | None = None

    @property
    def impl(self) -> "Family":
        return get_family(self.family)

    @cached_property
    def ctx(self) -> QContext:
        if self.q is None:
            raise RangeError(f"family {self.family} needs no q")
        return QContext(self.q)

    @property
    def N(self):
        """Lattice size for finite families, ``None`` otherwise."""
        return self.impl.lattice_N(self)

    @property
    def finite(self) -> bool:
        return self.impl.finite

    def __getitem__(self, name):
        return self.lam[self.impl.names.index(name)]

    def with_lam(self, lam) -> "FamilyParams":
        return replace(self, lam=tuple(float(v) for v in lam))

    def describe(self) -> dict:
        out = {"family": self.family, "params": self.impl.public_params(self)}
        if self.q is not None:
            out["q"] = self.q
        if self.impl.finite:
            out["N"] = self.N
        return out


def _int_if_close(v):
    r = round(v)
    return int(r) if abs(v - r) < 1e-9 else v


class Family:
    """Base class; subclasses set the class attributes and printed formulas."""

    id: str = ""
    finite: bool = True
    basic: bool = False
    twist_defined: bool = True
    names: tuple = ()
    public: tuple = ()
    mult: tuple = ()
    delta: tuple = ()
    delta_t: tuple = ()
    kappa_exp: int = 0
    # virtual energies lie above the whole spectrum instead of below zero
    virtual_above: bool = False

    # ------------------------------------------------------------ parameters

    def lattice_N(self, p: FamilyParams):
        return None

    def make(self, params: dict, q=None, N=None, dmax_hint=None) -> FamilyParams:
        """Build storage-form parameters from the printed names in ``public``."""
        missing = [k for k in self.public if k not in params]
        if missing:
            raise RangeError(f"{self.id}: missing parameters {missing}")
        extra = set(params) - set(self.public)
        if extra:
            raise RangeError(f"{self.id}: unknown parameters {sorted(extra)}")
        if self.basic:
            if q is None:
                raise RangeError(f"{self.id}: q is required")
            if not (0.0 < float(q) < 1.0):
                raise RangeError(f"{self.id}: 0<q<1 violated (q={q})")
        elif q is not None:
            raise RangeError(f"{self.id}: q is not a parameter of this family")
        if self.finite:
            if N is None:
                raise RangeError(f"{self.id}: N is required")
            if float(N) != int(N) or int(N) < 0:
                raise RangeError(f"{self.id}: N must be a nonnegative integer (N={N})")
            N = int(N)
        elif N is not None:
            raise RangeError(f"{self.id}: semi-infinite family takes no N")
        lam = self._lam_from_public({k: float(v) for k, v in params.items()}, N)
        return FamilyParams(self.id, tuple(float(v) for v in lam),
                            None if q is None else float(q), dmax_hint)

    def _lam_from_public(self, vals: dict, N):
        return [vals[k] for k in self.public] + ([N] if self.finite else [])

    def public_params(self, p: FamilyParams) -> dict:
        return {k: p[k] for k in self.public}

    def constraints(self, p: FamilyParams, dmax) -> list:
        """List of ``(holds, text)`` pairs, one per printed inequality."""
        raise NotImplementedError

    def validate(self, p: FamilyParams) -> FamilyParams:
        if p.family != self.id:
            raise RangeError(f"parameters belong to {p.family}, not {self.id}")
        if len(p.lam) != len(self.names):
            raise RangeError(f"{self.id}: expected {len(self.names)} parameters")
        if self.basic and (p.q is None or not (0.0 < p.q < 1.0)):
            raise RangeError(f"{self.id}: 0<q<1 violated (q={p.q})")
        if self.finite:
            N = self.lattice_N(p)
            if not isinstance(N, int) or N < 0:
                raise RangeError(f"{self.id}: N must be a nonnegative integer (N={N})")
        for ok, text in self.constraints(p, p.dmax_hint):
            if not ok:
                raise RangeError(f"{self.id}: range condition {text} violated")
        return p

    def shift(self, p: FamilyParams, u: float, direction: str = "delta") -> FamilyParams:
        """``lambda + u*delta`` (or ``delta_t``), multiplicative on stored q-powers."""
        vec = {"delta": self.delta, "delta_tilde": self.delta_t}[direction]
        if u == 0:
            return p
        lam = []
        for v, m, d in zip(p.lam, self.mult, vec):
            lam.append(v * p.q ** (u * d) if m else v + u * d)
        return p.with_lam(lam)

    def twist(self, p: FamilyParams) -> FamilyParams:
        raise NotImplementedError

    def _log_q(self, p, v):
        return math.log(v) / math.log(p.q)

    def kappa(self, p: FamilyParams) -> float:
        return 1.0 if self.kappa_exp == 0 else p.q ** self.kappa_exp

    # ------------------------------------------------------------ helpers

    @staticmethod
    def _F(upper, lower, z):
        return hypergeometric_terminating(SeriesSpec(tuple(upper), tuple(lower), z))

    @staticmethod
    def _phi(p, upper, lower, z):
        return hypergeometric_terminating(SeriesSpec(tuple(upper), tuple(lower), z, basic=True), p.ctx)

    @staticmethod
    def _poch(n, *bases):
        out = 1.0
        for a in bases:
            out = out * np.asarray(pochhammer(a, n))
        return out

    @staticmethod
    def _qp(p, n, *bases):
        out = 1.0
        for a in bases:
            out = out * np.asarray(qpochhammer(a, p.q, n))
        return out

    @staticmethod
    def _qx(p, x):
        """``q**-x`` as an exact-zero-capable series parameter."""
        return QPow(-np.asarray(x, dtype=float))

    # ------------------------------------------------------------ printed data

    def B(self, p, x):
        raise NotImplementedError

    def D(self, p, x):
        raise NotImplementedError

    def energy(self, p, n):
        raise NotImplementedError

    def eta(self, p, x):
        raise NotImplementedError

    def P(self, p, n, x):
        raise NotImplementedError

    def phi0_sq_closed(self, p, x):
        raise NotImplementedError

    def dn_sq(self, p, n):
        raise NotImplementedError

    def alpha(self, p):
        raise NotImplementedError

    def alpha_p(self, p):
        raise NotImplementedError

    def xi(self, p, v, x):
        raise NotImplementedError

    def Etilde(self, p, v):
        raise NotImplementedError

    def nu_closed(self, p, x):
        raise NotImplementedError

    def r(self, p, j, x, M):
        raise NotImplementedError

    def c_n(self, p, n):
        raise NotImplementedError

    def ctilde(self, p, v):
        raise NotImplementedError

    def beta(self, p, n):
        raise NotImplementedError

    def beta_p(self, p, n):
        raise NotImplementedError

    # ------------------------------------------------------------ derived data

    def varphi(self, p, x):
        x = np.asarray(x, dtype=float)
        return (self.eta(p, x + 1) - self.eta(p, x)) / self.eta(p, 1.0)

    def varphi_M(self, p, x, M: int):
        """Product of normalized eta differences over ``1 <= j < k <= M``."""
        x = np.asarray(x, dtype=float)
        out = np.ones_like(x)
        for j in range(1, M + 1):
            for k in range(j + 1, M + 1):
                out = out * (self.eta(p, x + k - 1) - self.eta(p, x + j - 1)) / self.eta(p, float(k - j))
        return out

    def B_prime(self, p, x):
        return self.B(self.twist(p), x)

    def D_prime(self, p, x):
        return self.D(self.twist(p), x)

    def E_prime(self, p, v):
        return self.energy(self.twist(p), v)

    def xi_twist(self, p, v, x):
        """``P_v(x; t(lambda))``, the twist-based definition of the virtual polynomial."""
        return self.P(self.twist(p), v, x)

    def phit0_sq_closed(self, p, x):
        return self.phi0_sq_closed(self.twist(p), x)

    def phi0_sq(self, p, x):
        """Running product of ``B(y)/D(y+1)``."""
        return _running(self.B, self.D, p, x)

    def phit0_sq(self, p, x):
        return _running(self.B_prime, self.D_prime, p, x)

    def nu(self, p, x):
        return np.sqrt(self.phi0_sq(p, x) / self.phit0_sq(p, x))

    def c_n_universal(self, p, n: int):
        """Leading coefficient from energies, eta and B(0) alone."""
        kap = self.kappa(p)
        En = self.energy(p, n)
        out = (-1.0) ** n * kap ** (-(n * (n - 1) // 2))
        for j in range(1, n + 1):
            out *= (En - self.energy(p, j - 1)) / (
                self.eta(p, float(j)) * self.B(self.shift(p, j - 1), 0.0))
        return float(out)


def _running(Bf, Df, p, x):
    x = np.asarray(x)
    xi = np.round(x).astype(int)
    X = int(xi.max()) if xi.size else 0
    ys = np.arange(X, dtype=float)
    ratios = np.asarray(Bf(p, ys), dtype=float) / np.asarray(Df(p, ys + 1), dtype=float)
    cum = np.concatenate([[1.0], np.cumprod(ratios)])
    out = cum[xi]
    return float(out) if out.ndim == 0 else out

