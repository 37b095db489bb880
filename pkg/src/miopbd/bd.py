"""Birth and death processes generated by the deformed systems.

The continuous generator is ``L = -transpose(HtildePrime)``; the discrete
chain is ``I + t_S L``.  Both share the eigenvectors ``phi_{D,0} phi_{D,n}``,
so evolution is done spectrally on finite lattices with the closed-form
orthonormal eigenvectors.  Truncated semi-infinite lattices, and finite ones
whose ground state spans more than ``SPECTRAL_SPREAD_MAX``, evolve through
the matrix exponential or matrix power of the generator directly; the
stationary state of a truncation is the renormalized ``phihat_{D,0}**2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from .errors import RangeError, TimeScaleTooLarge, TuningInfeasible, UnsupportedFamily
from .miop import MultiIndexedSystem, deformed_potentials, eigenvector_normalized
from .operators import GeneratorMatrix, build_G, build_H

__all__ = [
    "ProbabilityVector", "ContinuousBD", "DiscreteBD", "RepeatedBD",
    "build_continuous", "build_discrete", "expand_initial", "evolve_ct", "transition_ct",
    "evolve_dt", "transition_dt", "tune_repeated_weights", "build_repeated",
    "evolve_repeated", "simulate_ct", "simulate_dt", "empirical_ct", "empirical_dt",
    "total_variation", "initial_distribution", "stochastic_expm", "stochastic_power",
]

NEG_CLIP = 1e-10
# Spectral kernels divide by the ground state; beyond this spread of
# phihat_0 values rounding is amplified past 1e-10 and the direct
# matrix exponential / power is used instead.
SPECTRAL_SPREAD_MAX = 1e6


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """Nonnegative weights summing to one over the working lattice.

    Rounding dust down to ``-NEG_CLIP`` is clipped and the vector
    renormalized; anything more negative is rejected.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim != 1 or v.size == 0:
            raise RangeError("probability vector must be a nonempty 1-d array")
        if not np.all(np.isfinite(v)):
            raise RangeError("probability vector has non-finite entries")
        if np.min(v) < -NEG_CLIP:
            raise RangeError(f"probability vector has negative entry {np.min(v):.3g}")
        v = np.clip(v, 0.0, None)
        s = v.sum()
        if abs(s - 1.0) > 1e-9:
            raise RangeError(f"probability vector sums to {s!r}, not 1")
        v = v / s
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_raw(cls, v):
        """Wrap a computed distribution, clipping dust without renormalization checks."""
        v = np.asarray(v, dtype=float)
        if np.min(v) < -NEG_CLIP:
            raise RangeError(f"evolved distribution has negative entry {np.min(v):.3g}")
        v = np.clip(v, 0.0, None)
        return cls(v / v.sum()) if abs(v.sum() - 1.0) <= 1e-9 else cls(v)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return len(self.values)

    @property
    def total(self) -> float:
        return float(self.values.sum())


def _as_prob(P0, size):
    v = P0.values if isinstance(P0, ProbabilityVector) else np.asarray(P0, dtype=float)
    if len(v) != size:
        raise RangeError(f"initial distribution has length {len(v)}, lattice has {size}")
    return v if isinstance(P0, ProbabilityVector) else ProbabilityVector(v).values


def _echo(P0, size) -> ProbabilityVector:
    """Zero-time result: the input distribution itself, bit for bit."""
    v = _as_prob(P0, size)
    return P0 if isinstance(P0, ProbabilityVector) else ProbabilityVector(v)


def total_variation(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))))


# ---------------------------------------------------------------- spectral data

@dataclass(frozen=True, eq=False)
class _Spectrum:
    """``E`` ascending, ``Phi[n]`` orthonormal eigenvectors of H, ``g = Phi[0] > 0``."""

    E: np.ndarray
    Phi: np.ndarray

    @property
    def g(self):
        return self.Phi[0]


def _spectrum(sys: MultiIndexedSystem) -> _Spectrum:
    if sys.finite:
        Phi = np.array([eigenvector_normalized(sys, n) for n in range(sys.size)])
        return _Spectrum(sys.energies(), Phi)
    # truncated lattice: numerical eigenpairs of the reflecting Hamiltonian
    H = build_H(sys).storage
    w, V = np.linalg.eigh(H)
    V = V.T * np.sign(V.T[:, :1] + (V.T[:, :1] == 0))
    w = w - w[0]
    g = np.sqrt(sys.stationary / sys.stationary.sum())
    V[0] = g
    return _Spectrum(w, V)


# ---------------------------------------------------------------- continuous

@dataclass(frozen=True, eq=False)
class ContinuousBD:
    system: MultiIndexedSystem
    L: GeneratorMatrix
    stationary: ProbabilityVector
    truncation_mass: float = 0.0

    @cached_property
    def spectrum(self) -> _Spectrum:
        return _spectrum(self.system)

    @property
    def rates(self):
        """Birth and death rates as used in ``L`` (reflecting at a truncation)."""
        L = self.L.storage
        n = L.shape[0]
        B = np.zeros(n)
        D = np.zeros(n)
        B[:-1] = np.diag(L, -1)
        D[1:] = np.diag(L, 1)
        return B, D


def _check_bd_family(sys):
    if sys.family == "qM":
        raise UnsupportedFamily("birth and death processes are not defined for qM")


def build_continuous(sys: MultiIndexedSystem) -> ContinuousBD:
    """Continuous-time generator with rates ``B_D`` (birth) and ``D_D`` (death)."""
    _check_bd_family(sys)
    deformed_potentials(sys)
    L = GeneratorMatrix("LBD", -build_G(sys).storage)
    st = sys.stationary
    mass = float(st.sum())
    return ContinuousBD(sys, L, ProbabilityVector(st / mass), 0.0 if sys.finite else max(0.0, 1.0 - mass))


def expand_initial(bd, P0) -> np.ndarray:
    """Coefficients ``c_n = (phihat_n, P0 / phihat_0)``; ``c_0 = 1``."""
    sp = bd.spectrum
    p = _as_prob(P0, len(sp.g))
    return sp.Phi @ (p / sp.g)


def _direct(bd) -> bool:
    """Whether evolution should bypass the spectral formula."""
    if not bd.system.finite:
        return True
    g = bd.spectrum.g
    return bool(g.max() / g.min() > SPECTRAL_SPREAD_MAX)


def _renorm(A):
    # exact propagators are column stochastic; clip rounding dust, restore unit columns
    A = np.clip(A, 0.0, None)
    return A / A.sum(axis=0)


def stochastic_expm(L, t: float) -> np.ndarray:
    """``exp(t L)`` for a generator ``L`` by scaling and squaring with column renormalization.

    Plain scaling and squaring multiplies the Pade mass defect by ``2**s``;
    renormalizing after each squaring keeps it at ``O(s eps)``.
    """
    L = np.asarray(L, dtype=float)
    norm = t * float(np.max(np.sum(np.abs(L), axis=0)))
    s = max(0, int(np.ceil(np.log2(norm)))) if norm > 1 else 0
    A = _renorm(expm((t / 2.0 ** s) * L))
    for _ in range(s):
        A = _renorm(A @ A)
    return A


def stochastic_power(A, k: int) -> np.ndarray:
    """``A**k`` for a column stochastic ``A`` by binary powering with renormalization."""
    A = np.asarray(A, dtype=float)
    out = np.eye(A.shape[0])
    base = A
    while k:
        if k & 1:
            out = _renorm(base @ out)
        k >>= 1
        if k:
            base = _renorm(base @ base)
    return out


def _use_direct(bd, method):
    if method not in ("auto", "spectral", "direct"):
        raise RangeError(f"unknown evolution method {method!r}")
    if method == "spectral" and not bd.system.finite:
        raise RangeError("spectral evolution needs a finite lattice")
    return method == "direct" or (method == "auto" and _direct(bd))


def _propagate(sp: _Spectrum, c, factors):
    return sp.g * (sp.Phi.T @ (c * factors))


def evolve_ct(bd: ContinuousBD, P0, t: float, method: str = "auto") -> ProbabilityVector:
    """Law at time ``t``; ``method`` is ``spectral``, ``direct`` or ``auto``."""
    if t < 0:
        raise RangeError("t must be nonnegative")
    if t == 0:
        return _echo(P0, bd.L.lattice_size)
    if _use_direct(bd, method):
        p = _as_prob(P0, bd.L.lattice_size)
        return ProbabilityVector.from_raw(stochastic_expm(bd.L.storage, t) @ p)
    sp = bd.spectrum
    c = expand_initial(bd, P0)
    return ProbabilityVector.from_raw(_propagate(sp, c, np.exp(-sp.E * t)))


def _kernel(sp: _Spectrum, factors):
    return (sp.g[:, None] * (sp.Phi.T * factors) @ sp.Phi) / sp.g[None, :]


def transition_ct(bd: ContinuousBD, t: float, method: str = "auto") -> np.ndarray:
    """``P(x, y; t)``: column ``y`` is the law at time ``t`` started from ``y``."""
    if t < 0:
        raise RangeError("t must be nonnegative")
    if _use_direct(bd, method):
        return stochastic_expm(bd.L.storage, t)
    sp = bd.spectrum
    return _kernel(sp, np.exp(-sp.E * t))


# ---------------------------------------------------------------- discrete

@dataclass(frozen=True, eq=False)
class DiscreteBD:
    system: MultiIndexedSystem
    t_S: float
    L: GeneratorMatrix
    kappa: np.ndarray
    stationary: ProbabilityVector

    @cached_property
    def spectrum(self) -> _Spectrum:
        return _spectrum(self.system)


def _kappa_ok(kappa):
    return bool(kappa[0] == 1.0 and np.all(np.diff(kappa) < 0) and np.all(kappa > -1))


def build_discrete(sys: MultiIndexedSystem, t_S: float | None = None, halvings: int = 10) -> DiscreteBD:
    """Markov chain ``I + t_S L``; ``t_S`` defaults to ``0.5 / max(B_D + D_D)``."""
    _check_bd_family(sys)
    if not sys.finite:
        raise UnsupportedFamily(f"{sys.family}: the discrete chain needs a finite lattice")
    B, D = deformed_potentials(sys)
    peak = float(np.max(B + D))
    E = sys.energies()
    if t_S is None:
        t_S = 0.5 / peak
        for _ in range(halvings):
            if _kappa_ok(1.0 - t_S * E):
                break
            t_S *= 0.5
    t_S = float(t_S)
    if not t_S > 0:
        raise RangeError("t_S must be positive")
    if t_S * peak >= 1.0:
        raise TimeScaleTooLarge(f"t_S*max(B_D+D_D) = {t_S * peak:.6g} >= 1")
    kappa = 1.0 - t_S * E
    if not _kappa_ok(kappa):
        raise TimeScaleTooLarge(f"eigenvalues 1-t_S*E_n leave (-1, 1] for t_S={t_S:.6g}")
    L = np.eye(sys.size) - t_S * build_G(sys).storage
    return DiscreteBD(sys, t_S, GeneratorMatrix("LdBD", L), kappa, ProbabilityVector(sys.stationary))


def _check_steps(steps):
    if int(steps) != steps or steps < 0:
        raise RangeError(f"steps must be a nonnegative integer, got {steps}")
    return int(steps)


def evolve_dt(bd: DiscreteBD, P0, steps: int, method: str = "auto") -> ProbabilityVector:
    steps = _check_steps(steps)
    if steps == 0:
        return _echo(P0, bd.L.lattice_size)
    if _use_direct(bd, method):
        p = _as_prob(P0, bd.L.lattice_size)
        return ProbabilityVector.from_raw(stochastic_power(bd.L.storage, steps) @ p)
    sp = bd.spectrum
    c = expand_initial(bd, P0)
    return ProbabilityVector.from_raw(_propagate(sp, c, bd.kappa ** steps))


def transition_dt(bd: DiscreteBD, steps: int, method: str = "auto") -> np.ndarray:
    steps = _check_steps(steps)
    if _use_direct(bd, method):
        return stochastic_power(bd.L.storage, steps)
    return _kernel(bd.spectrum, bd.kappa ** steps)


# ---------------------------------------------------------------- repeated

def _band(A, k):
    """Entries ``A[x+k, x]`` over valid ``x``."""
    return np.diagonal(A, -k)


def tune_repeated_weights(bd: ContinuousBD, m: int, margin: float = 0.1) -> np.ndarray:
    """Weights ``c_0 = 1, c_1..c_{m-1}`` making ``sum_j c_j L^(m-j)`` a generator.

    ``c_k`` is fixed in turn from the explicit lower bound that makes band
    ``m-k`` positive (and, for ``k = m-1``, the diagonal negative), enlarged
    by ``margin`` times its magnitude.
    """
    if int(m) != m or m < 1:
        raise RangeError(f"order m must be a positive integer, got {m}")
    m = int(m)
    L = bd.L.storage
    n = L.shape[0]
    if m > 1 and n <= m:
        raise TuningInfeasible(f"lattice of size {n} is too small for bandwidth {m}")
    powers = {0: np.eye(n)}
    for p in range(1, m + 1):
        powers[p] = powers[p - 1] @ L
    # alternating sign structure of every band of L^p
    for p in range(1, m + 1):
        for k in range(-p, p + 1):
            vals = _band(powers[p], k) * (-1.0) ** (p - abs(k))
            if vals.size and np.any(vals <= 0):
                x = int(np.argmax(vals <= 0))
                raise TuningInfeasible(f"L^{p} band {k} has the wrong sign at column {x}")
    c = [1.0]
    for k in range(1, m):
        b = m - k
        bound = -np.inf
        for s in (b, -b):
            acc = sum(c[j] * _band(powers[m - j], s) for j in range(k))
            lead = _band(powers[m - k], s)
            bound = max(bound, float(np.max(-acc / lead)))
        if k == m - 1:
            acc = sum(c[j] * np.diag(powers[m - j]) for j in range(k))
            lead = np.diag(L)
            if np.any(lead >= 0):
                raise TuningInfeasible("generator diagonal is not strictly negative")
            bound = max(bound, float(np.max(-acc / lead)))
        if not np.isfinite(bound):
            raise TuningInfeasible(f"no finite bound for c_{k}")
        c.append(bound + margin * max(abs(bound), 1e-12))
    return np.array(c)


@dataclass(frozen=True, eq=False)
class RepeatedBD:
    base: ContinuousBD
    m: int
    weights: np.ndarray
    X: GeneratorMatrix
    mode: str
    t_S: float | None
    eigenvalues: np.ndarray
    L: GeneratorMatrix

    @property
    def spectrum(self) -> _Spectrum:
        return self.base.spectrum

    @property
    def system(self):
        return self.base.system


def _poly_eigs(c, E):
    m = len(c)
    return sum(c[j] * (-1.0) ** (m - j) * E ** (m - j) for j in range(m))


def build_repeated(bd: ContinuousBD, m: int, mode: str = "continuous", t_S: float | None = None,
                   weights=None, halvings: int = 10) -> RepeatedBD:
    """``X = sum_j c_j L^(m-j)`` as a generator (``continuous``) or ``I + t_S X`` (``discrete``)."""
    if mode not in ("continuous", "discrete"):
        raise RangeError(f"mode must be 'continuous' or 'discrete', got {mode!r}")
    c = tune_repeated_weights(bd, m) if weights is None else np.asarray(weights, dtype=float)
    if c[0] != 1.0 or len(c) != m:
        raise RangeError("weights must have length m and c_0 = 1")
    L = bd.L.storage
    X = np.zeros_like(L)
    P = np.eye(L.shape[0])
    for j in range(m - 1, -1, -1):
        P = P @ L
        X = X + c[j] * P
    Em = _poly_eigs(c, bd.spectrum.E)
    Xg = GeneratorMatrix("XD", X)
    if mode == "continuous":
        return RepeatedBD(bd, m, c, Xg, mode, None, Em, GeneratorMatrix("LBDm", X))
    if not bd.system.finite:
        raise UnsupportedFamily("the discrete repeated chain needs a finite lattice")
    peak = float(np.max(-np.diag(X)))
    if t_S is None:
        t_S = 0.5 / peak
        for _ in range(halvings):
            if np.all(1.0 + t_S * Em[1:] > -1):
                break
            t_S *= 0.5
    if t_S * peak >= 1.0:
        raise TimeScaleTooLarge(f"t_S*max(-X_xx) = {t_S * peak:.6g} >= 1")
    kappa = 1.0 + t_S * Em
    Ld = np.eye(L.shape[0]) + t_S * X
    return RepeatedBD(bd, m, c, Xg, mode, float(t_S), kappa, GeneratorMatrix("LdBDm", Ld))


def evolve_repeated(rb: RepeatedBD, P0, t_or_steps, method: str = "auto") -> ProbabilityVector:
    if t_or_steps == 0:
        return _echo(P0, rb.L.lattice_size)
    if _use_direct(rb.base, method):
        p = _as_prob(P0, rb.L.lattice_size)
        if rb.mode == "continuous":
            if t_or_steps < 0:
                raise RangeError("t must be nonnegative")
            return ProbabilityVector.from_raw(stochastic_expm(rb.L.storage, t_or_steps) @ p)
        k = _check_steps(t_or_steps)
        return ProbabilityVector.from_raw(stochastic_power(rb.L.storage, k) @ p)
    sp = rb.spectrum
    c = expand_initial(rb.base, P0)
    if rb.mode == "continuous":
        if t_or_steps < 0:
            raise RangeError("t must be nonnegative")
        fac = np.exp(rb.eigenvalues * t_or_steps)
    else:
        fac = rb.eigenvalues ** _check_steps(t_or_steps)
    return ProbabilityVector.from_raw(_propagate(sp, c, fac))


# ---------------------------------------------------------------- Monte Carlo

def _rng(seed, chunk=None):
    ss = np.random.SeedSequence(seed) if chunk is None else np.random.SeedSequence(seed, spawn_key=(chunk,))
    return np.random.Generator(np.random.PCG64(ss))


def _start(bd, x0):
    n = bd.L.lattice_size
    if int(x0) != x0 or not 0 <= x0 < n:
        raise RangeError(f"start state {x0} outside the lattice 0..{n - 1}")
    return int(x0)


def _ct_rates(bd):
    if isinstance(bd, ContinuousBD):
        return bd.rates
    raise TypeError("continuous simulation needs a ContinuousBD")


def simulate_ct(bd: ContinuousBD, x0: int, t_end: float, seed: int):
    """One jump-chain trajectory; returns ``(times, states)`` with ``times[0] = 0``."""
    x = _start(bd, x0)
    B, D = _ct_rates(bd)
    rng = _rng(seed)
    t = 0.0
    times, states = [0.0], [x]
    while True:
        r = B[x] + D[x]
        if r <= 0:
            break
        t += rng.exponential(1.0 / r)
        if t > t_end:
            break
        x = x + 1 if rng.random() * r < B[x] else x - 1
        times.append(t)
        states.append(x)
    return np.array(times), np.array(states, dtype=int)


def simulate_dt(bd: DiscreteBD, x0: int, steps: int, seed: int) -> np.ndarray:
    """One chain path of ``steps`` transitions; returns the visited states."""
    x = _start(bd, x0)
    steps = _check_steps(steps)
    Lm = bd.L.storage
    rng = _rng(seed)
    out = np.empty(steps + 1, dtype=int)
    out[0] = x
    u = rng.random(steps)
    for k in range(steps):
        up = Lm[x + 1, x] if x + 1 < Lm.shape[0] else 0.0
        down = Lm[x - 1, x] if x > 0 else 0.0
        x = x + 1 if u[k] < up else (x - 1 if u[k] < up + down else x)
        out[k + 1] = x
    return out


def empirical_ct(bd: ContinuousBD, x0: int, t_end: float, trajectories: int, seed: int,
                 chunk: int = 20000) -> np.ndarray:
    """Histogram of ``X(t_end)`` over many trajectories, vectorized per chunk.

    Chunk ``k`` draws from ``SeedSequence(seed, spawn_key=(k,))`` so the result
    does not depend on how chunks are scheduled.
    """
    x0 = _start(bd, x0)
    B, D = _ct_rates(bd)
    R = B + D
    counts = np.zeros(len(B), dtype=np.int64)
    for k, lo in enumerate(range(0, trajectories, chunk)):
        size = min(chunk, trajectories - lo)
        rng = _rng(seed, k)
        x = np.full(size, x0)
        t = np.zeros(size)
        live = np.ones(size, dtype=bool)
        while live.any():
            idx = np.nonzero(live)[0]
            r = R[x[idx]]
            t[idx] += rng.exponential(1.0, idx.size) / r
            done = t[idx] > t_end
            live[idx[done]] = False
            mv = idx[~done]
            up = rng.random(mv.size) * R[x[mv]] < B[x[mv]]
            x[mv] += np.where(up, 1, -1)
        counts += np.bincount(x, minlength=len(B))
    return counts / trajectories


def empirical_dt(bd: DiscreteBD, x0: int, steps: int, trajectories: int, seed: int,
                 chunk: int = 20000) -> np.ndarray:
    x0 = _start(bd, x0)
    steps = _check_steps(steps)
    Lm = bd.L.storage
    n = Lm.shape[0]
    up = np.append(np.diagonal(Lm, -1), 0.0)
    down = np.insert(np.diagonal(Lm, 1), 0, 0.0)
    counts = np.zeros(n, dtype=np.int64)
    for k, lo in enumerate(range(0, trajectories, chunk)):
        size = min(chunk, trajectories - lo)
        rng = _rng(seed, k)
        x = np.full(size, x0)
        for _ in range(steps):
            u = rng.random(size)
            pu, pd = up[x], down[x]
            x = x + (u < pu) - ((u >= pu) & (u < pu + pd))
        counts += np.bincount(x, minlength=n)
    return counts / trajectories


def initial_distribution(spec: str, bd) -> ProbabilityVector:
    """``delta:x0``, ``uniform`` or ``stationary`` over the lattice of ``bd``."""
    n = bd.L.lattice_size
    if spec == "uniform":
        return ProbabilityVector(np.full(n, 1.0 / n))
    if spec == "stationary":
        return bd.stationary if hasattr(bd, "stationary") else bd.base.stationary
    if spec.startswith("delta:"):
        try:
            x0 = int(spec.split(":", 1)[1])
        except ValueError:
            raise RangeError(f"bad delta spec {spec!r}") from None
        if not 0 <= x0 < n:
            raise RangeError(f"delta start {x0} outside the lattice 0..{n - 1}")
        v = np.zeros(n)
        v[x0] = 1.0
        return ProbabilityVector(v)
    raise RangeError(f"unknown initial distribution {spec!r}")
