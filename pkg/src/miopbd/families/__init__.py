"""Uniform functional interface over the thirteen families.

Parameters are built with :func:`make_params` from the printed parameter
names and validated with :func:`validate_params`.  Every accessor below is a
pure function of a :class:`FamilyParams` and its numeric arguments.
"""
from __future__ import annotations

import numpy as np

from . import classical, qfinite, qsemi  # noqa: F401  (registration)
from .base import REGISTRY, Family, FamilyParams, get_family

FINITE = ("H", "R", "dH", "dqqK", "qH", "qqK", "aqK", "qR", "dqH")
SEMI_INFINITE = ("M", "lqJ", "lqL", "qM")
FAMILY_IDS = FINITE + SEMI_INFINITE

# Reference parameter sets; each admits every index set with d_M <= 3.
PRESETS = {
    "H": dict(params={"a": 1.2, "b": 4.5}, N=10),
    "R": dict(params={"b": 16.0, "c": 0.7, "d": 0.5}, N=10),
    "dH": dict(params={"a": 1.2, "b": 0.5}, N=10),
    "dqqK": dict(params={"p": 200.0}, q=0.7, N=10),
    "qH": dict(params={"a": 0.4, "b": 0.2}, q=0.7, N=10),
    "qqK": dict(params={"p": 50.0}, q=0.7, N=10),
    "aqK": dict(params={"p": 0.5}, q=0.7, N=10),
    "qR": dict(params={"b": 0.003, "c": 0.6, "d": 0.5}, q=0.7, N=10),
    "dqH": dict(params={"a": 0.4, "b": 0.3}, q=0.7, N=10),
    "M": dict(params={"beta": 2.5, "c": 0.4}),
    "lqJ": dict(params={"a": 0.2, "b": 0.3}, q=0.7),
    "lqL": dict(params={"a": 0.2}, q=0.7),
    "qM": dict(params={"b": 0.5, "c": 1.0}, q=0.7),
}

__all__ = [
    "FamilyParams", "Family", "REGISTRY", "FINITE", "SEMI_INFINITE", "FAMILY_IDS", "PRESETS",
    "get_family", "make_params", "preset", "validate_params",
    "potential_B", "potential_D", "energy", "virtual_energy", "eta", "varphi", "varphi_M",
    "poly_eval", "ground_state_sq", "ground_state_twisted_sq", "norm_const_sq",
    "virtual_poly_eval", "nu", "r_factor", "leading_coeffs", "shift_params", "twist_params",
    "alpha", "alpha_prime", "potential_B_prime", "potential_D_prime", "energy_prime", "kappa",
]


def make_params(family: str, params: dict, q=None, N=None, dmax_hint=None) -> FamilyParams:
    """Parameters from printed names, e.g. ``make_params("H", {"a": 1.2, "b": 4.5}, N=10)``."""
    return get_family(family).make(params, q=q, N=N, dmax_hint=dmax_hint)


def preset(family: str, dmax_hint=None) -> FamilyParams:
    spec = PRESETS[family]
    return make_params(family, spec["params"], q=spec.get("q"), N=spec.get("N"), dmax_hint=dmax_hint)


def validate_params(p: FamilyParams) -> FamilyParams:
    """Return ``p`` if every printed range inequality holds, else raise RangeError."""
    return p.impl.validate(p)


def potential_B(p, x):
    return p.impl.B(p, x)


def potential_D(p, x):
    return p.impl.D(p, x)


def potential_B_prime(p, x):
    return p.impl.B_prime(p, x)


def potential_D_prime(p, x):
    return p.impl.D_prime(p, x)


def energy(p, n):
    return float(p.impl.energy(p, n))


def virtual_energy(p, v):
    return float(p.impl.Etilde(p, v))


def energy_prime(p, v):
    return float(p.impl.E_prime(p, v))


def alpha(p):
    return float(p.impl.alpha(p))


def alpha_prime(p):
    return float(p.impl.alpha_p(p))


def kappa(p):
    return p.impl.kappa(p)


def eta(p, x):
    return p.impl.eta(p, x)


def varphi(p, x):
    return p.impl.varphi(p, x)


def varphi_M(p, x, M):
    return p.impl.varphi_M(p, x, M)


def poly_eval(p, n, x):
    return p.impl.P(p, n, x)


def ground_state_sq(p, x, closed=False):
    """``phi_0(x)**2`` as a running product, or from the closed form."""
    f = p.impl
    return f.phi0_sq_closed(p, x) if closed else f.phi0_sq(p, x)


def ground_state_twisted_sq(p, x, closed=False):
    f = p.impl
    return f.phit0_sq_closed(p, x) if closed else f.phit0_sq(p, x)


def norm_const_sq(p, n):
    return float(p.impl.dn_sq(p, n))


def virtual_poly_eval(p, v, x):
    return p.impl.xi(p, v, x)


def nu(p, x, closed=False):
    f = p.impl
    return f.nu_closed(p, x) if closed else f.nu(p, x)


def r_factor(p, j, x, M):
    if not 1 <= j <= M + 1:
        raise ValueError(f"r_j needs 1 <= j <= M+1, got j={j}, M={M}")
    return p.impl.r(p, j, x, M)


def leading_coeffs(p, n):
    """``(c_n, ctilde_n, beta_n, beta'_n)`` from the family table."""
    f = p.impl
    return (float(f.c_n(p, n)), float(f.ctilde(p, n)), float(f.beta(p, n)), float(f.beta_p(p, n)))


def shift_params(p, u, direction="delta"):
    return p.impl.shift(p, u, direction)


def twist_params(p):
    return p.impl.twist(p)
