"""Case-(1) multi-indexed polynomials built from virtual state polynomials.

The core evaluators (:func:`xi_D_at`, :func:`poly_multi_at`, ...) are pure
functions of ``(FamilyParams, IndexSet, x)`` so that shifted parameters
``lambda + delta`` can be used freely by the shift relations.  A
:class:`MultiIndexedSystem` binds one parameter point to an index set,
fixes the working lattice and caches the denominator polynomial there.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import brentq

from . import families as fam
from .errors import DegreeMismatch, PositivityViolation, RangeError, ZeroCountMismatch
from .families import FamilyParams

__all__ = [
    "IndexSet", "MultiIndexedSystem", "casoratian", "C_D", "C_Dn", "dtilde_sq",
    "xi_D_at", "poly_multi_at", "poly_multi_nu_form", "xi_D", "poly_multi_eval",
    "deformed_potentials", "eigenvector", "eigenvector_normalized",
    "leading_coeff_xi", "leading_coeff_P", "degree_check", "forward_shift",
    "backward_shift", "shift_residuals", "zero_structure", "choose_truncation",
    "degree_check_xi", "norm_factor",
]


@dataclass(frozen=True)
class IndexSet:
    """Distinct positive virtual-state degrees in increasing order."""

    d: tuple = ()

    def __post_init__(self):
        d = tuple(int(v) for v in self.d)
        if any(float(a) != float(b) for a, b in zip(d, self.d)):
            raise RangeError(f"index set must contain integers, got {self.d}")
        if any(v < 1 for v in d):
            raise RangeError(f"index set entries must be >= 1, got {d}")
        if any(a >= b for a, b in zip(d, d[1:])):
            raise RangeError(f"index set must be strictly increasing, got {d}")
        object.__setattr__(self, "d", d)

    @classmethod
    def parse(cls, text: str | None) -> "IndexSet":
        """``"1,3"`` or ``"{1,3}"``; an empty string gives the empty set."""
        text = (text or "").strip().strip("{}[]() ")
        if not text:
            return cls(())
        try:
            vals = [int(t) for t in text.replace(" ", "").split(",") if t]
        except ValueError:
            raise RangeError(f"cannot parse index set {text!r}") from None
        return cls(tuple(vals))

    @property
    def M(self) -> int:
        return len(self.d)

    @property
    def ell(self) -> int:
        M = self.M
        return sum(self.d) - M * (M - 1) // 2

    @property
    def dmax(self) -> int | None:
        return self.d[-1] if self.d else None

    def __iter__(self):
        return iter(self.d)

    def __len__(self):
        return self.M

    def __str__(self):
        return "{" + ",".join(map(str, self.d)) + "}"


def _as_index_set(D) -> IndexSet:
    return D if isinstance(D, IndexSet) else IndexSet(tuple(D))


# ---------------------------------------------------------------- Casoratian

def casoratian(functions, x):
    """``det(f_k(x+j-1))`` for ``j, k = 1..n``; broadcasts over array ``x``.

    Each evaluator must accept an array of abscissae.
    """
    if not functions:
        raise ValueError("casoratian needs at least one function")
    x = np.asarray(x, dtype=float)
    n = len(functions)
    mat = np.empty(x.shape + (n, n))
    for j in range(n):
        for k, f in enumerate(functions):
            mat[..., j, k] = f(x + j)
    return np.linalg.det(mat)


def _pair_prod(p, D: IndexSet, fn):
    out = 1.0
    for j in range(D.M):
        for k in range(j + 1, D.M):
            out *= fn(j, k)
    return out


def C_D(p: FamilyParams, D) -> float:
    D = _as_index_set(D)
    f = p.impl
    a = f.alpha(p)
    Et = [f.Etilde(p, v) for v in D]
    prod = _pair_prod(p, D, lambda j, k: (Et[j] - Et[k]) / (a * f.B_prime(p, float(j))))
    return float(prod / f.varphi_M(p, 0.0, D.M))


def dtilde_sq(p: FamilyParams, D, n: int) -> float:
    D = _as_index_set(D)
    f = p.impl
    a = f.alpha(p)
    En = f.energy(p, n)
    out = float(f.varphi_M(p, 0.0, D.M) / f.varphi_M(p, 0.0, D.M + 1))
    for j, v in enumerate(D):
        out *= (En - f.Etilde(p, v)) / (a * f.B_prime(p, float(j)))
    return float(out)


def C_Dn(p: FamilyParams, D, n: int) -> float:
    D = _as_index_set(D)
    return (-1.0) ** D.M * C_D(p, D) * dtilde_sq(p, D, n)


# Families whose sinusoidal coordinate 1 - q**x saturates: deep in the lattice
# the Casoratian columns coincide to O(q**x) and the determinant cancels.
_SATURATING = ("lqJ", "lqL")
_TAIL_QX = 1e-2


def _tail_mask(p: FamilyParams, x):
    if p.family not in _SATURATING:
        return np.zeros(x.shape, dtype=bool)
    return p.q ** x < _TAIL_QX


@lru_cache(maxsize=512)
def _tail_fit(p: FamilyParams, D, n):
    """Chebyshev coefficients in ``eta`` on ``[0, 1]`` of ``Xi_D`` (``n is None``) or ``P_{D,n}``."""
    deg = D.ell + (0 if n is None else n)
    K = deg + 1
    eta = 0.5 + 0.5 * np.cos(np.pi * (np.arange(K) + 0.5) / K)
    xs = np.log1p(-eta) / np.log(p.q)
    vals = _xi_direct(p, D, xs) if n is None else _poly_direct(p, D, n, xs)
    return C.chebfit(2 * eta - 1, vals, deg)


def _split_eval(p, D, n, x, direct):
    x = np.asarray(x, dtype=float)
    tail = _tail_mask(p, x)
    if not tail.any():
        out = direct(x)
    else:
        out = np.empty(x.shape)
        if (~tail).any():
            out[~tail] = direct(x[~tail])
        eta = 1.0 - p.q ** x[tail]
        out[tail] = C.chebval(2 * eta - 1, _tail_fit(p, D, n))
    return out if x.ndim else float(out)


def _xi_direct(p, D, x):
    f = p.impl
    fns = [(lambda y, v=v: f.xi(p, v, y)) for v in D]
    return casoratian(fns, x) / (C_D(p, D) * f.varphi_M(p, x, D.M))


def _poly_direct(p, D, n, x):
    f = p.impl
    M = D.M
    size = M + 1
    mat = np.empty(x.shape + (size, size))
    for j in range(size):
        xj = x + j
        for k, v in enumerate(D):
            mat[..., j, k] = f.xi(p, v, xj)
        mat[..., j, M] = f.r(p, j + 1, x, M) * f.P(p, n, xj)
    det = mat[..., 0, 0] if size == 1 else np.linalg.det(mat)
    return det / (C_Dn(p, D, n) * f.varphi_M(p, x, size))


def xi_D_at(p: FamilyParams, D, x):
    """Denominator polynomial at real ``x`` (scalar or array).

    For lqJ and lqL, points with ``q**x < 1e-2`` are read off an exact-degree
    Chebyshev interpolant in ``eta`` whose nodes lie where the Casoratian is
    well conditioned.
    """
    D = _as_index_set(D)
    x = np.asarray(x, dtype=float)
    if D.M == 0:
        return np.ones_like(x) if x.ndim else 1.0
    return _split_eval(p, D, None, x, lambda y: _xi_direct(p, D, y))


def poly_multi_at(p: FamilyParams, D, n: int, x):
    """Multi-indexed polynomial at real ``x`` via the ``r_j``-scaled determinant."""
    D = _as_index_set(D)
    if D.M == 0:
        x = np.asarray(x, dtype=float)
        out = _poly_direct(p, D, n, x)
        return out if x.ndim else float(out)
    return _split_eval(p, D, n, x, lambda y: _poly_direct(p, D, n, y))


def poly_multi_nu_form(p: FamilyParams, D, n: int, x):
    """Same polynomial through explicit ``nu`` factors; an independent route for checks."""
    D = _as_index_set(D)
    x = np.asarray(x, dtype=float)
    f = p.impl
    fns = [(lambda y, v=v: f.xi(p, v, y)) for v in D]
    fns.append(lambda y: f.nu_closed(p, y) * f.P(p, n, y))
    Mt = f.shift(p, D.M, "delta_tilde")
    out = casoratian(fns, x) / (C_Dn(p, D, n) * f.varphi_M(p, x, D.M + 1) * f.nu_closed(Mt, x))
    return out if x.ndim else float(out)


# ---------------------------------------------------------------- truncation

def _weight(p, D, xs):
    """Unnormalized stationary weight ``phi0(x; lam+M dt)**2 / (Xi(x) Xi(x+1))``."""
    Mt = p.impl.shift(p, D.M, "delta_tilde")
    xi = xi_D_at(p, D, np.arange(len(xs) + 1, dtype=float))
    return np.asarray(p.impl.phi0_sq(Mt, xs), dtype=float) / (xi[:-1] * xi[1:])


def choose_truncation(p: FamilyParams, D, tail=1e-12, n_margin=6, start=24, cap=4096) -> int:
    """Smallest window ``0..X`` whose neglected weighted tail is below ``tail``.

    The tail weight includes ``(1+|eta|)**(2*(ell_D+n_margin))`` so that
    eigenvectors up to ``n = n_margin`` are resolved, not only the ground state.
    """
    D = _as_index_set(D)
    Mt = p.impl.shift(p, D.M, "delta_tilde")
    X = start
    while X <= cap:
        xs = np.arange(X + 1, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            w = _weight(p, D, xs) * (1 + np.abs(p.impl.eta(Mt, xs))) ** (2 * (D.ell + n_margin))
        if np.all(np.isfinite(w)) and w.sum() > 0:
            rel = w / w.sum()
            # suffix mass beyond each x; keep at least one point past the peak
            suffix = np.cumsum(rel[::-1])[::-1]
            peak = int(np.argmax(rel))
            ok = np.nonzero((suffix < tail) & (np.arange(X + 1) > peak))[0]
            if ok.size and ok[0] < X - 2:
                return int(ok[0])
        X *= 2
    raise RangeError(f"{p.family}: weight tail does not fall below {tail} within x <= {cap}")


# ---------------------------------------------------------------- the system

@dataclass(frozen=True)
class MultiIndexedSystem:
    """A validated parameter point, an index set and a working lattice ``0..L``.

    For finite families ``L = N``.  Semi-infinite families are truncated at
    ``L = N_trunc`` (see :func:`choose_truncation`) unless ``truncation`` is
    given.  Construction checks positivity of the denominator polynomial at
    ``lam`` (on ``0..L+1``) and at ``lam + delta`` (on ``0..L``).
    """

    params: FamilyParams
    D: IndexSet = field(default_factory=IndexSet)
    truncation: int | None = None
    tail: float = 1e-12

    def __post_init__(self):
        D = _as_index_set(self.D)
        object.__setattr__(self, "D", D)
        p = self.params
        if p.dmax_hint != D.dmax:
            p = FamilyParams(p.family, p.lam, p.q, D.dmax)
        fam.validate_params(p)
        object.__setattr__(self, "params", p)
        if p.finite:
            if self.truncation is not None and self.truncation != p.N:
                raise RangeError(f"{p.family} is finite; truncation must be omitted or equal N")
            L = p.N
        else:
            L = self.truncation if self.truncation is not None else choose_truncation(p, D, self.tail)
            if L < 1:
                raise RangeError("truncation must be >= 1")
        object.__setattr__(self, "L", int(L))
        xs = np.arange(L + 3, dtype=float) - 1.0  # -1 .. L+1
        xi = xi_D_at(p, D, xs)
        xid = xi_D_at(self.params_delta, D, xs)
        bad = np.nonzero(xi[1:] <= 0)[0]
        if bad.size:
            raise PositivityViolation(
                f"{p.family} D={D}: denominator polynomial <= 0 at x={int(bad[0])}"
                f" (value {xi[1 + bad[0]]:.6g})")
        bad = np.nonzero(xid[1:-1] <= 0)[0]
        if bad.size:
            raise PositivityViolation(
                f"{p.family} D={D}: shifted denominator polynomial <= 0 at x={int(bad[0])}"
                f" (value {xid[1 + bad[0]]:.6g})")
        object.__setattr__(self, "_xi", xi)
        object.__setattr__(self, "_xid", xid)

    # storage: _xi[k] holds x = k - 1

    @property
    def family(self) -> str:
        return self.params.family

    @property
    def finite(self) -> bool:
        return self.params.finite

    @property
    def size(self) -> int:
        return self.L + 1

    @property
    def lattice(self) -> np.ndarray:
        return np.arange(self.size, dtype=float)

    @cached_property
    def params_delta(self) -> FamilyParams:
        return self.params.impl.shift(self.params, 1, "delta")

    @cached_property
    def params_Mt(self) -> FamilyParams:
        return self.params.impl.shift(self.params, self.D.M, "delta_tilde")

    def xi_cached(self, x, shifted=False):
        """Cached values on ``-1..L+1`` for integer ``x``."""
        arr = self._xid if shifted else self._xi
        return arr[np.asarray(x, dtype=int) + 1]

    def energies(self, n_max=None) -> np.ndarray:
        n_max = self.L if n_max is None else n_max
        f = self.params.impl
        return np.array([f.energy(self.params, n) for n in range(n_max + 1)], dtype=float)

    @cached_property
    def potentials(self):
        return _potentials(self, self.lattice)

    @cached_property
    def psi(self) -> np.ndarray:
        return _psi(self, self.lattice)

    @cached_property
    def stationary(self) -> np.ndarray:
        """``phi_hat_{D,0}**2`` on the working lattice."""
        return eigenvector_normalized(self, 0) ** 2

    def poly(self, n: int, x=None) -> np.ndarray:
        x = self.lattice if x is None else x
        return poly_multi_at(self.params, self.D, n, x)

    def describe(self) -> dict:
        out = self.params.describe()
        out["D"] = list(self.D.d)
        if not self.finite:
            out["truncation"] = self.L
        return out


def _check_n(sys: MultiIndexedSystem, n: int):
    if int(n) != n or n < 0:
        raise RangeError(f"n must be a nonnegative integer, got {n}")
    if sys.finite and n > sys.L:
        raise RangeError(f"n={n} outside the lattice 0..{sys.L}")


def xi_D(sys: MultiIndexedSystem, x):
    """Denominator polynomial of ``sys`` at real ``x``."""
    return xi_D_at(sys.params, sys.D, x)


def poly_multi_eval(sys: MultiIndexedSystem, n: int, x):
    _check_n(sys, n)
    return poly_multi_at(sys.params, sys.D, n, x)


def _potentials(sys, x):
    x = np.asarray(x, dtype=int)
    f = sys.params.impl
    pm = sys.params_Mt
    xi0, xi1 = sys.xi_cached(x), sys.xi_cached(x + 1)
    xd0, xd1 = sys.xi_cached(x, True), sys.xi_cached(x + 1, True)
    B = np.asarray(f.B(pm, x.astype(float)), dtype=float) * xi0 / xi1 * xd1 / xd0
    with np.errstate(invalid="ignore", divide="ignore"):
        xdm = sys.xi_cached(np.maximum(x - 1, 0), True)
        D = np.asarray(f.D(pm, x.astype(float)), dtype=float) * xi1 / xi0 * xdm / xd0
    D = np.where(x == 0, 0.0, D)
    if sys.finite:
        B = np.where(x == sys.L, 0.0, B)
    return B, D


def deformed_potentials(sys: MultiIndexedSystem, x=None):
    """``(B_D, D_D)`` on lattice points ``x`` (default: whole working lattice)."""
    if x is None:
        B, D = sys.potentials
    else:
        x = np.asarray(x)
        if np.any(x < 0) or np.any(x > sys.L + 1) or np.any(x != np.round(x)):
            raise RangeError("potentials are tabulated on integer points 0..L+1")
        B, D = _potentials(sys, x)
    interior_B = np.arange(len(np.atleast_1d(B))) if x is None else np.atleast_1d(x)
    Bv, Dv = np.atleast_1d(B), np.atleast_1d(D)
    badB = (Bv <= 0) & ~((interior_B == sys.L) & sys.finite)
    badD = (Dv <= 0) & (interior_B > 0)
    if badB.any() or badD.any():
        where = int(interior_B[np.argmax(badB | badD)])
        raise PositivityViolation(f"{sys.family} D={sys.D}: deformed potential <= 0 at x={where}")
    return B, D


def _psi(sys, x):
    x = np.asarray(x, dtype=int)
    phi0 = np.sqrt(np.asarray(sys.params.impl.phi0_sq(sys.params_Mt, x.astype(float)), dtype=float))
    return np.sqrt(sys.xi_cached(1)) * phi0 / np.sqrt(sys.xi_cached(x) * sys.xi_cached(x + 1))


def eigenvector(sys: MultiIndexedSystem, n: int, x=None) -> np.ndarray:
    """``phi_{D,n} = psi_D * Pcheck_{D,n}`` on the lattice (``x`` integer points)."""
    _check_n(sys, n)
    if x is None:
        return sys.psi * sys.poly(n)
    x = np.asarray(x)
    return _psi(sys, x) * sys.poly(n, x.astype(float))


def norm_factor(sys: MultiIndexedSystem, n: int) -> float:
    """``d_n * dtilde_{D,n} / sqrt(Xi_D(1))``."""
    p = sys.params
    dn2 = p.impl.dn_sq(p, n)
    dt2 = dtilde_sq(p, sys.D, n)
    if dt2 <= 0:
        raise PositivityViolation(f"dtilde^2 <= 0 for n={n}")
    return float(np.sqrt(dn2 * dt2 / sys.xi_cached(1)))


def eigenvector_normalized(sys: MultiIndexedSystem, n: int, x=None) -> np.ndarray:
    return norm_factor(sys, n) * eigenvector(sys, n, x)


# ---------------------------------------------------------------- degrees

def leading_coeff_xi(sys: MultiIndexedSystem) -> float:
    p, D = sys.params, sys.D
    f = p.impl
    out = 1.0
    for j, v in enumerate(D):
        out *= f.ctilde(p, v) / f.ctilde(p, j)
    for j in range(D.M):
        for k in range(j + 1, D.M):
            out *= f.beta(p, j + k) / f.beta(p, D.d[j] + D.d[k])
    return float(out)


def leading_coeff_P(sys: MultiIndexedSystem, n: int) -> float:
    p, D = sys.params, sys.D
    f = p.impl
    out = leading_coeff_xi(sys) * f.c_n(p, n)
    for j, v in enumerate(D):
        out *= f.beta_p(p, j) / f.beta_p(p, v + n)
    return float(out)


def _eta_nodes(p_eta, x_hi, K):
    """Real abscissae whose eta values are Chebyshev points on ``[eta(0), eta(x_hi)]``."""
    f = p_eta.impl
    e0, e1 = float(f.eta(p_eta, 0.0)), float(f.eta(p_eta, float(x_hi)))
    t = np.cos(np.pi * (np.arange(K) + 0.5) / K)
    targets = 0.5 * (e0 + e1) + 0.5 * (e1 - e0) * t
    xs = np.array([brentq(lambda y, e=e: float(f.eta(p_eta, y)) - e, 0.0, float(x_hi),
                          xtol=1e-15, rtol=4 * np.finfo(float).eps) for e in targets])
    return xs, targets, e0, e1


def _interp_degree(values, targets, e0, e1, deg_expected, rtol):
    K = len(targets)
    tt = (2 * targets - (e0 + e1)) / (e1 - e0)
    coef = C.chebfit(tt, values, K - 1)
    scale = np.max(np.abs(coef))
    nz = np.nonzero(np.abs(coef) > rtol * scale)[0]
    degree = int(nz[-1]) if nz.size else 0
    # power-basis leading coefficient in eta for the expected degree
    half = 0.5 * (e1 - e0)
    k = deg_expected
    lead = coef[k] * (2.0 ** (k - 1) if k >= 1 else 1.0) / half ** k
    return degree, lead


def _default_span(sys, deg):
    if sys.finite:
        return float(sys.L)
    return float(min(sys.L, deg + 4))


def degree_check(sys: MultiIndexedSystem, n: int, rtol=1e-7, coef_tol=1e-9):
    """Interpolate ``P_{D,n}`` in ``eta(x; lam + M dt)`` on ``ell+n+2`` Chebyshev nodes.

    Returns ``(degree, missing_degrees)`` after confirming the degree equals
    ``ell_D + n`` and the leading coefficient matches the closed form.
    """
    _check_n(sys, n)
    deg = sys.D.ell + n
    K = deg + 2
    xs, targets, e0, e1 = _eta_nodes(sys.params_Mt, _default_span(sys, deg), K)
    vals = poly_multi_at(sys.params, sys.D, n, xs)
    degree, lead = _interp_degree(vals, targets, e0, e1, deg, coef_tol)
    expected = leading_coeff_P(sys, n)
    if degree != deg:
        raise DegreeMismatch(f"P_D,{n}: interpolated degree {degree}, expected {deg}")
    if abs(lead - expected) > rtol * abs(expected):
        raise DegreeMismatch(f"P_D,{n}: leading coefficient {lead:.12g} vs closed form {expected:.12g}")
    return degree, list(range(sys.D.ell))


def degree_check_xi(sys: MultiIndexedSystem, rtol=1e-7, coef_tol=1e-9):
    """Same check for the denominator polynomial in ``eta(x; lam + (M-1) dt)``."""
    deg = sys.D.ell
    if sys.D.M == 0:
        return 0
    K = deg + 2
    pe = sys.params.impl.shift(sys.params, sys.D.M - 1, "delta_tilde")
    xs, targets, e0, e1 = _eta_nodes(pe, _default_span(sys, deg), K)
    vals = xi_D_at(sys.params, sys.D, xs)
    degree, lead = _interp_degree(vals, targets, e0, e1, deg, coef_tol)
    expected = leading_coeff_xi(sys)
    if degree != deg:
        raise DegreeMismatch(f"Xi_D: interpolated degree {degree}, expected {deg}")
    if abs(lead - expected) > rtol * abs(expected):
        raise DegreeMismatch(f"Xi_D: leading coefficient {lead:.12g} vs closed form {expected:.12g}")
    return degree


# ---------------------------------------------------------------- shifts

def _forward_terms(sys, n, x):
    p, D = sys.params, sys.D
    f = p.impl
    pd, pm = sys.params_delta, sys.params_Mt
    pre = f.B(pm, 0.0) / (f.varphi(pm, x) * xi_D_at(p, D, x + 1))
    return (pre, xi_D_at(pd, D, x + 1) * poly_multi_at(p, D, n, x),
            xi_D_at(pd, D, x) * poly_multi_at(p, D, n, x + 1))


def _backward_terms(sys, n, x):
    p, D = sys.params, sys.D
    f = p.impl
    pd, pm = sys.params_delta, sys.params_Mt
    up = f.B(pm, x) * xi_D_at(p, D, x) * f.varphi(pm, x) * poly_multi_at(pd, D, n - 1, x)
    Dx = np.asarray(f.D(pm, x), dtype=float)
    # D vanishes at the left boundary; skip the out-of-lattice evaluation there
    safe = np.where(Dx == 0, x + 1, x)
    down = np.where(Dx == 0, 0.0,
                    Dx * xi_D_at(p, D, x + 1) * f.varphi(pm, safe - 1) * poly_multi_at(pd, D, n - 1, safe - 1))
    return up, down, f.B(pm, 0.0) * xi_D_at(pd, D, x)


def forward_shift(sys: MultiIndexedSystem, n: int, x):
    """Forward shift operator applied to ``P_{D,n}(.; lam)`` at real ``x``."""
    pre, t1, t2 = _forward_terms(sys, n, np.asarray(x, dtype=float))
    return pre * (t1 - t2)


def backward_shift(sys: MultiIndexedSystem, n: int, x):
    """Backward shift operator applied to ``P_{D,n-1}(.; lam + delta)`` at real ``x``."""
    if n < 1:
        raise RangeError("backward shift needs n >= 1")
    up, down, den = _backward_terms(sys, n, np.asarray(x, dtype=float))
    return (up - down) / den


def shift_residuals(sys: MultiIndexedSystem, n: int, x):
    """Componentwise residuals ``(forward, backward)`` of both shift relations at ``x``.

    Each point is scaled by the magnitudes of the terms that cancel in the
    difference operator, so the measure reflects rounding rather than the
    decay of the polynomials along the lattice.
    """
    p, D = sys.params, sys.D
    x = np.asarray(x, dtype=float)
    En = p.impl.energy(p, n)
    pre, t1, t2 = _forward_terms(sys, n, x)
    lhs_f = pre * (t1 - t2)
    rhs_f = En * poly_multi_at(sys.params_delta, D, n - 1, x) if n >= 1 else np.zeros_like(x)
    scale_f = np.abs(pre) * (np.abs(t1) + np.abs(t2)) + np.abs(rhs_f)
    res_f = float(np.max(np.abs(lhs_f - rhs_f) / np.maximum(scale_f, 1e-300)))
    if n < 1:
        return res_f, 0.0
    up, down, den = _backward_terms(sys, n, x)
    lhs_b = (up - down) / den
    rhs_b = poly_multi_at(p, D, n, x)
    scale_b = (np.abs(up) + np.abs(down)) / np.abs(den) + np.abs(rhs_b)
    return res_f, float(np.max(np.abs(lhs_b - rhs_b) / np.maximum(scale_b, 1e-300)))


# ---------------------------------------------------------------- zeros

def _bars(vals, rel=1e-12):
    """Integer brackets ``[x_j]`` of the sign changes in ``vals``.

    A value is treated as an exact lattice zero when it is below ``rel``
    times its neighbours (polynomials in eta can grow geometrically, so a
    global threshold would swallow genuine small values).
    """
    vals = np.asarray(vals, dtype=float)
    nb = np.maximum(np.abs(np.roll(vals, 1)), np.abs(np.roll(vals, -1)))
    nb[0], nb[-1] = abs(vals[1]) if len(vals) > 1 else 0.0, abs(vals[-2]) if len(vals) > 1 else 0.0
    s = np.sign(np.where(np.abs(vals) <= rel * nb, 0.0, vals))
    bars = []
    last = 0.0
    for x, v in enumerate(s):
        if v == 0:
            continue
        if last != 0 and v != last:
            # a zero sitting exactly on x-1 is bracketed by x-1 itself
            bars.append(x - 1)
        last = v
    return bars


def zero_structure(sys: MultiIndexedSystem, n: int, window=None, check_interlacing=True):
    """Sign changes of ``P_{D,n}`` along the lattice and the integer zero brackets.

    ``window`` limits the scan to ``0..window`` (used for truncated
    semi-infinite lattices).  Raises ZeroCountMismatch if the count differs
    from ``n`` or the bracket interlacing with ``n+1`` fails.
    """
    _check_n(sys, n)
    X = sys.L if window is None else min(window, sys.L)
    xs = np.arange(X + 1, dtype=float)
    vals = sys.poly(n, xs)
    bars = _bars(vals)
    if len(bars) != n:
        raise ZeroCountMismatch(f"P_D,{n}: {len(bars)} sign changes on 0..{X}, expected {n}")
    if check_interlacing and n >= 1 and (not sys.finite or n + 1 <= sys.L):
        nxt = _bars(sys.poly(n + 1, xs))
        if len(nxt) == n + 1:
            for j in range(n):
                if not (nxt[j] <= bars[j] <= nxt[j + 1]):
                    raise ZeroCountMismatch(
                        f"interlacing fails between n={n} and n={n + 1} at j={j + 1}: "
                        f"{nxt[j]} <= {bars[j]} <= {nxt[j + 1]}")
    return len(bars), bars
