"""The four tridiagonal matrices of a deformed system and their verification.

``H`` is the symmetric Hamiltonian, ``Htilde`` its similarity transform by
``psi_D``, ``HtildePrime`` a further transform by ``Xi_D(x; lam+delta)`` (zero
row sums) and ``G`` its transpose.  All entries come straight from the
cached potentials and denominator values; no matrix is produced by
multiplying another one with diagonal matrices.

Truncated semi-infinite lattices use a reflecting boundary: the birth rate
at the last site is dropped so that row sums of ``HtildePrime`` still vanish.
Eigen-equation residuals are instead evaluated on a one-site larger lattice
so that every checked row carries its full stencil.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, NotApplicable
from .miop import (
    MultiIndexedSystem,
    deformed_potentials,
    eigenvector,
    eigenvector_normalized,
)

__all__ = [
    "ROLES", "GeneratorMatrix", "SpectrumReport", "build_H", "build_Htilde",
    "build_HtildePrime", "build_G", "jacobi_eigh", "oracle_eigendecompose",
    "eigen_residuals", "spectrum_report", "spectral_representation_check",
    "generalized_bd_transform", "componentwise_residual",
]

ROLES = ("Hsym", "Htilde", "HtildePrime", "Gmat", "LBD", "LdBD", "XD", "LBDm", "LdBDm")


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """A dense square matrix over the working lattice, tagged with its role."""

    role: str
    storage: np.ndarray

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        a = np.asarray(self.storage, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "storage", a)

    @property
    def lattice_size(self) -> int:
        return self.storage.shape[0]

    @property
    def T(self) -> np.ndarray:
        return self.storage.T

    def __array__(self, dtype=None, copy=None):
        return self.storage if dtype is None else self.storage.astype(dtype)

    def __matmul__(self, other):
        return self.storage @ np.asarray(other)

    def bandwidth(self, tol=0.0) -> int:
        i, j = np.nonzero(np.abs(self.storage) > tol)
        return int(np.max(np.abs(i - j))) if i.size else 0

    def is_symmetric(self, tol=1e-13) -> bool:
        a = self.storage
        return bool(np.max(np.abs(a - a.T), initial=0.0) <= tol * max(1.0, np.max(np.abs(a))))


def _rates(sys: MultiIndexedSystem, reflecting: bool):
    B, D = deformed_potentials(sys)
    B = np.array(B, dtype=float)
    if not sys.finite and reflecting:
        B[-1] = 0.0
    return B, np.asarray(D, dtype=float)


def _tridiag(diag, upper, lower):
    n = len(diag)
    m = np.diag(diag)
    idx = np.arange(n - 1)
    m[idx, idx + 1] = upper[:-1]
    m[idx + 1, idx] = lower[1:]
    return m


def build_H(sys: MultiIndexedSystem, reflecting: bool = True) -> GeneratorMatrix:
    B, D = _rates(sys, reflecting)
    off = -np.sqrt(B[:-1] * D[1:])
    m = np.diag(B + D)
    idx = np.arange(sys.size - 1)
    m[idx, idx + 1] = off
    m[idx + 1, idx] = off
    return GeneratorMatrix("Hsym", m)


def build_Htilde(sys: MultiIndexedSystem, reflecting: bool = True) -> GeneratorMatrix:
    B, D = _rates(sys, reflecting)
    x = np.arange(sys.size)
    f = sys.params.impl
    pm = sys.params_Mt
    xi0, xi1 = sys.xi_cached(x), sys.xi_cached(x + 1)
    up = -np.asarray(f.B(pm, x.astype(float)), dtype=float) * xi0 / xi1
    lo = -np.asarray(f.D(pm, x.astype(float)), dtype=float) * xi1 / xi0
    return GeneratorMatrix("Htilde", _tridiag(B + D, up, lo))


def build_HtildePrime(sys: MultiIndexedSystem, reflecting: bool = True) -> GeneratorMatrix:
    B, D = _rates(sys, reflecting)
    return GeneratorMatrix("HtildePrime", _tridiag(B + D, -B, -D))


def build_G(sys: MultiIndexedSystem, reflecting: bool = True) -> GeneratorMatrix:
    return GeneratorMatrix("Gmat", build_HtildePrime(sys, reflecting).storage.T.copy())


# ---------------------------------------------------------------- oracle

def jacobi_eigh(a, tol=1e-15, max_sweeps=100):
    """Cyclic Jacobi eigensolver for a real symmetric matrix.

    Returns ascending eigenvalues and the matching orthonormal eigenvectors
    (columns).  Raises ConvergenceFailure after ``max_sweeps`` sweeps.
    """
    A = np.array(a, dtype=float, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return A.diagonal().copy(), V
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n), V
    for _ in range(max_sweeps):
        off = _offnorm(A)
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300 or abs(apq) < 1e-18 * scale:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                colp, colq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp, rowq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        off = _offnorm(A)
        if off > tol * scale:
            raise ConvergenceFailure(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.3g})")
    w = A.diagonal().copy()
    order = np.argsort(w)
    return w[order], V[:, order]


def _offnorm(A):
    return float(np.linalg.norm(A - np.diag(A.diagonal())))


def _symmetrizer(a):
    """Diagonal ``s`` with ``diag(s)^-1 a diag(s)`` symmetric, for sign-symmetric tridiagonals."""
    n = a.shape[0]
    up, lo = np.diag(a, 1), np.diag(a, -1)
    if np.any(np.abs(np.triu(a, 2)) > 0) or np.any(np.abs(np.tril(a, -2)) > 0):
        raise NotApplicable("oracle needs a symmetric or tridiagonal matrix")
    if np.any(up * lo < 0) or np.any((up == 0) != (lo == 0)):
        raise NotApplicable("tridiagonal matrix is not similar to a symmetric one")
    s = np.ones(n)
    for x in range(n - 1):
        s[x + 1] = s[x] * (np.sqrt(lo[x] / up[x]) if up[x] != 0 else 1.0)
    return s


def oracle_eigendecompose(m, tol=1e-15):
    """Full spectrum of a symmetric matrix, or of a tridiagonal similar to one.

    For non-symmetric input the eigenvectors are those of ``m`` itself
    (columns, unit 2-norm), obtained by undoing the diagonal similarity.
    """
    a = np.asarray(m, dtype=float)
    if np.allclose(a, a.T, rtol=0, atol=1e-13 * max(1.0, np.max(np.abs(a)))):
        return jacobi_eigh(0.5 * (a + a.T), tol)
    s = _symmetrizer(a)
    sym = a * s[None, :] / s[:, None]
    w, V = jacobi_eigh(0.5 * (sym + sym.T), tol)
    V = V * s[:, None]
    return w, V / np.linalg.norm(V, axis=0)


# ---------------------------------------------------------------- checks

def componentwise_residual(a, v, E, rows=None) -> float:
    """``max_x |(a v - E v)_x| / (sum_y |a_xy v_y| + |E v_x|)`` over ``rows``."""
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float)
    r = a @ v - E * v
    scale = np.abs(a) @ np.abs(v) + abs(E) * np.abs(v)
    if rows is not None:
        r, scale = r[rows], scale[rows]
    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.where(scale > 0, np.abs(r) / scale, np.abs(r))
    return float(np.max(q)) if q.size else 0.0


def _n_range(sys, n_max):
    if n_max is None:
        n_max = sys.L if sys.finite else 6
    if sys.finite:
        n_max = min(n_max, sys.L)
    return range(n_max + 1)


def eigen_residuals(sys: MultiIndexedSystem, n_max=None) -> dict:
    """Componentwise residuals of the four eigen-equations for ``n <= n_max``.

    Truncated systems are checked on rows ``0..L`` of the one-site larger
    lattice, so no row is affected by the reflecting boundary.
    """
    ext = sys if sys.finite else MultiIndexedSystem(sys.params, sys.D, truncation=sys.L + 1)
    rows = None if sys.finite else np.arange(sys.size)
    mats = {
        "H": build_H(ext, reflecting=False).storage,
        "Htilde": build_Htilde(ext, reflecting=False).storage,
        "HtildePrime": build_HtildePrime(ext, reflecting=False).storage,
        "G": build_G(ext, reflecting=False).storage,
    }
    f = sys.params.impl
    out = {k: [] for k in mats}
    phi0 = eigenvector(ext, 0)
    P0 = ext.poly(0)
    for n in _n_range(sys, n_max):
        En = f.energy(sys.params, n)
        Pn = ext.poly(n)
        phin = ext.psi * Pn
        out["H"].append(componentwise_residual(mats["H"], phin, En, rows))
        out["Htilde"].append(componentwise_residual(mats["Htilde"], Pn, En, rows))
        out["HtildePrime"].append(componentwise_residual(mats["HtildePrime"], Pn / P0, En, rows))
        out["G"].append(componentwise_residual(mats["G"], phi0 * phin, En, rows))
    return {k: np.array(v) for k, v in out.items()}


@dataclass
class SpectrumReport:
    """Residuals collected by :func:`spectrum_report`; every field is nonnegative."""

    family: str
    D: tuple
    n_checked: int
    eigen_residuals: dict = field(default_factory=dict)
    orthogonality_defect: float = 0.0
    oracle_deltas: np.ndarray = field(default_factory=lambda: np.zeros(0))
    oracle_scale: float = 1.0
    reconstruction_error: float | None = None
    completeness_error: float | None = None
    spectrum_increasing: bool = True

    def max_eigen_residual(self) -> float:
        return float(max((np.max(v) for v in self.eigen_residuals.values() if len(v)), default=0.0))

    def max_oracle_delta(self) -> float:
        return float(np.max(self.oracle_deltas)) if len(self.oracle_deltas) else 0.0

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "D": list(self.D),
            "n_checked": self.n_checked,
            "eigen_residuals": {k: float(np.max(v)) for k, v in self.eigen_residuals.items()},
            "orthogonality_defect": self.orthogonality_defect,
            "oracle_max_delta": self.max_oracle_delta(),
            "oracle_scale": self.oracle_scale,
            "reconstruction_error": self.reconstruction_error,
            "completeness_error": self.completeness_error,
            "spectrum_increasing": self.spectrum_increasing,
        }


def _normalized_stack(sys, ns):
    return np.array([eigenvector_normalized(sys, n) for n in ns])


def spectrum_report(sys: MultiIndexedSystem, n_max=None) -> SpectrumReport:
    """Eigen-equation residuals, orthonormality defect and oracle eigenvalue deltas."""
    ns = list(_n_range(sys, n_max))
    res = eigen_residuals(sys, ns[-1])
    Phi = _normalized_stack(sys, ns)
    gram = Phi @ Phi.T
    defect = float(np.max(np.abs(gram - np.eye(len(ns)))))
    H = build_H(sys).storage
    w, _ = oracle_eigendecompose(H)
    En = sys.energies(ns[-1])
    scale = max(1.0, float(np.max(np.abs(H))))
    deltas = np.abs(w[: len(ns)] - En)
    return SpectrumReport(
        family=sys.family, D=sys.D.d, n_checked=len(ns), eigen_residuals=res,
        orthogonality_defect=defect, oracle_deltas=deltas, oracle_scale=scale,
        spectrum_increasing=bool(En[0] == 0.0 and np.all(np.diff(En) > 0)),
    )


def spectral_representation_check(sys: MultiIndexedSystem) -> SpectrumReport:
    """Rebuild ``H_D`` from ``sum_n E_n phihat_n phihat_n^T`` and test completeness."""
    if sys.family == "qM":
        raise NotApplicable("completeness of the eigenvectors fails for qM")
    if not sys.finite:
        raise NotApplicable(f"{sys.family}: spectral reconstruction needs a finite lattice")
    rep = spectrum_report(sys)
    ns = range(sys.size)
    Phi = _normalized_stack(sys, ns)
    En = sys.energies()
    H = build_H(sys).storage
    rec = (Phi.T * En) @ Phi
    rep.reconstruction_error = float(np.max(np.abs(rec - H)) / max(1.0, np.max(np.abs(H))))
    rep.completeness_error = float(np.max(np.abs(Phi.T @ Phi - np.eye(sys.size))))
    return rep


def generalized_bd_transform(H, psi, p0, tol=1e-10):
    """``H' = psi0^-1 H psi0`` with ``psi0 = psi * p0``, plus the off-diagonal sign test.

    ``H`` must be symmetric with ground eigenvalue shifted to zero, ``psi``
    positive and ``p0`` nowhere zero.  Returns ``(Hprime, offdiag_nonpositive)``.
    """
    H = np.asarray(H, dtype=float)
    psi = np.asarray(psi, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    n = H.shape[0]
    if H.shape != (n, n) or psi.shape != (n,) or p0.shape != (n,):
        raise DimensionMismatch(f"shapes {H.shape}, {psi.shape}, {p0.shape} do not match")
    if np.any(psi <= 0):
        raise ValueError("psi must be positive")
    if np.any(p0 == 0):
        raise ValueError("p0 must be nowhere zero")
    g = psi * p0
    Hp = H * g[None, :] / g[:, None]
    off = Hp[~np.eye(n, dtype=bool)]
    return Hp, bool(np.all(off <= tol * max(1.0, np.max(np.abs(Hp)))))
