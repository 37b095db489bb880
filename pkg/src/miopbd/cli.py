"""Command-line front end: ``miopbd {eval,verify,evolve,simulate}``.

A run is described by a JSON document such as::

    {"family": "qR", "q": 0.7, "N": 8, "params": {"b": 0.003, "c": 0.6, "d": 0.5},
     "D": [1, 3], "truncation": null, "tol": {"eigen": 1e-8}, "seed": 1}

Flags override file values.  Omitted family parameters fall back to the
built-in presets.  Exit codes: 0 success, 1 verification failure,
2 configuration error, 3 domain error.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import bd as bdm
from .errors import (
    ConvergenceFailure, DegreeMismatch, MiopError, NotApplicable, RangeError, TuningInfeasible,
    UnsupportedFamily, ZeroCountMismatch,
)
from .families import FAMILY_IDS, PRESETS, make_params, potential_B, potential_D
from .miop import (
    IndexSet, MultiIndexedSystem, degree_check, degree_check_xi, deformed_potentials,
    eigenvector_normalized, poly_multi_at, shift_residuals, xi_D_at, zero_structure,
)
from .operators import oracle_eigendecompose, spectral_representation_check, spectrum_report

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3
SUITES = ("spectral", "orthogonality", "conservation", "shifts", "zeros", "repeated")
EVOLVE_MODES = ("ct", "dt", "repeated-ct", "repeated-dt")

DEFAULT_TOL = {
    "eigen": 1e-8,
    "oracle": 1e-8,
    "orthogonality": 1e-8,
    "reconstruction": 1e-10,
    "three_term": 1e-9,
    "normalization": 1e-10,
    "column_sum": 1e-10,
    "discrete_column_sum": 1e-12,
    "probability_sum": 1e-9,
    "chapman_kolmogorov": 1e-8,
    "stationary_limit": 1e-7,
    "shift": 1e-8,
    "repeated_column_sum": 1e-10,
    "repeated_eigen": 1e-8,
    "degree": 1e-7,
}


class ConfigError(Exception):
    """Malformed or inconsistent run configuration."""


class DomainError(Exception):
    """A request outside the lattice or the scope of a command."""


# ---------------------------------------------------------------- configuration

@dataclass
class RunConfig:
    family: str
    params: dict
    D: tuple = ()
    q: float | None = None
    N: int | None = None
    truncation: int | None = None
    tol: dict = field(default_factory=dict)
    fmt: str = "json"
    seed: int = 0

    def system(self) -> MultiIndexedSystem:
        Dset = IndexSet(self.D)
        p = make_params(self.family, self.params, q=self.q, N=self.N, dmax_hint=Dset.dmax)
        return MultiIndexedSystem(p, Dset, truncation=self.truncation)

    def tolerances(self) -> dict:
        t = dict(DEFAULT_TOL)
        t.update(self.tol)
        scale = _tol_scale()
        return {k: v * scale for k, v in t.items()}

    def echo(self) -> dict:
        return {"family": self.family, "q": self.q, "N": self.N, "params": dict(self.params),
                "D": list(self.D), "truncation": self.truncation, "seed": self.seed,
                "tol": dict(self.tol)}


def _tol_scale() -> float:
    raw = os.environ.get("MIOPBD_TOL_SCALE", "1")
    try:
        s = float(raw)
    except ValueError:
        raise ConfigError(f"MIOPBD_TOL_SCALE must be a number, got {raw!r}") from None
    if not s > 0:
        raise ConfigError("MIOPBD_TOL_SCALE must be positive")
    return s


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _number(text, what):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{what}: expected a number, got {text!r}") from None
    return int(v) if what == "N" and v == int(v) else v


def _kv_pairs(items, what):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"{what}: expected NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _number(v.strip(), k.strip())
    return out


def _parse_D(value):
    if value is None:
        return ()
    if isinstance(value, str):
        try:
            return IndexSet.parse(value).d
        except RangeError as exc:
            raise ConfigError(str(exc)) from None
    if isinstance(value, (list, tuple)) and all(isinstance(v, int) for v in value):
        return tuple(value)
    raise ConfigError(f"D must be a list of integers, got {value!r}")


def _one_config(doc: dict, args) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object (or a list of objects)")
    known = {"family", "params", "D", "q", "N", "truncation", "tol", "format", "seed"}
    extra = set(doc) - known
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}")
    family = args.family or doc.get("family")
    if family is None:
        raise ConfigError("no family given (use --family or a config file)")
    if family not in FAMILY_IDS:
        raise ConfigError(f"unknown family {family!r}; expected one of {list(FAMILY_IDS)}")
    preset = PRESETS[family]
    params = dict(preset["params"])
    q, N = preset.get("q"), preset.get("N")
    file_params = doc.get("params", {})
    if not isinstance(file_params, dict):
        raise ConfigError("params must be an object")
    params.update(file_params)
    q = doc.get("q", q)
    N = doc.get("N", N)
    flag = _kv_pairs(args.params, "--params")
    q = flag.pop("q", q)
    N = flag.pop("N", N)
    params.update(flag)
    D = _parse_D(args.D if args.D is not None else doc.get("D"))
    tol = dict(doc.get("tol", {}))
    tol.update(_kv_pairs(args.tol, "--tol"))
    unknown = set(tol) - set(DEFAULT_TOL)
    if unknown:
        raise ConfigError(f"unknown tolerance names {sorted(unknown)}; known: {sorted(DEFAULT_TOL)}")
    seed = args.seed if args.seed is not None else doc.get("seed", 0)
    fmt = args.format or doc.get("format", "json")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    trunc = args.truncation if args.truncation is not None else doc.get("truncation")
    return RunConfig(family, params, D, q, N, trunc, tol, fmt, int(seed))


def load_configs(args) -> list[RunConfig]:
    doc = _load_json(args.config) if args.config else {}
    docs = doc if isinstance(doc, list) else [doc]
    if not docs:
        raise ConfigError("config list is empty")
    return [_one_config(d, args) for d in docs]


# ---------------------------------------------------------------- output

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(columns, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    return buf.getvalue()


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return [_jsonable(v) for v in o.tolist()]
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, (float, np.floating)):
        f = float(o)
        return f if np.isfinite(f) else repr(f)
    return o


def emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table_output(cfg, columns, rows, meta, out):
    if cfg.fmt == "csv":
        emit(write_csv(columns, rows), out)
    else:
        doc = {"config": cfg.echo(), "version": __version__, **meta, "columns": list(columns),
               "rows": [list(r) for r in rows]}
        emit(json.dumps(_jsonable(doc), indent=1) + "\n", out)


# ---------------------------------------------------------------- eval

def _int_range(text, name, default):
    if text is None:
        return default
    try:
        if ":" in text:
            a, b = text.split(":", 1)
            return list(range(int(a), int(b) + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"{name}: expected 'a:b' or a comma list of integers, got {text!r}") from None


def _float_list(text, name):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"{name}: expected a comma list of numbers, got {text!r}") from None


def cmd_eval(cfg: RunConfig, what: str, n_spec=None, x_spec=None):
    """Tabulate ``poly``, ``xi``, ``potentials`` or ``energy``; returns ``(columns, rows)``."""
    s = cfg.system()
    L = s.L
    if x_spec is not None and any(ch in x_spec for ch in ".eE"):
        xs = _float_list(x_spec, "--x")
    else:
        xs = [float(v) for v in _int_range(x_spec, "--x", list(range(L + 1)))]
    ns = _int_range(n_spec, "--n", [0])
    for n in ns:
        if n < 0 or (s.finite and n > L):
            raise DomainError(f"n={n} outside 0..{L}")
    for x in xs:
        if x < 0 or x > L + (0 if what == "potentials" else 1):
            raise DomainError(f"x={x:g} outside the working lattice 0..{L}")
    if what == "poly":
        rows = [(n, x, float(poly_multi_at(s.params, s.D, n, x))) for n in ns for x in xs]
        return ["n", "x", "P"], rows
    if what == "xi":
        vals = np.atleast_1d(xi_D_at(s.params, s.D, np.array(xs)))
        shifted = np.atleast_1d(xi_D_at(s.params_delta, s.D, np.array(xs)))
        return ["x", "Xi", "Xi_shifted"], list(zip(xs, vals, shifted))
    if what == "potentials":
        if any(x != int(x) for x in xs):
            raise DomainError("potentials are tabulated on integer lattice points")
        x = np.array(xs, dtype=int)
        B, D = deformed_potentials(s, x)
        return ["x", "B_D", "D_D"], list(zip(x, np.atleast_1d(B), np.atleast_1d(D)))
    if what == "energy":
        E = s.energies(max(ns))
        return ["n", "E"], [(n, E[n]) for n in ns]
    raise ConfigError(f"unknown eval target {what!r}")


# ---------------------------------------------------------------- verify

def _check(name, residual, tol, ok=None):
    residual = float(residual)
    passed = bool(residual < tol) if ok is None else bool(ok)
    return {"name": name, "residual": residual, "tolerance": float(tol), "pass": passed}


def _suite_spectral(s, tol, notes):
    out = []
    rep = spectrum_report(s)
    for k, v in rep.eigen_residuals.items():
        out.append(_check(f"eigen_{k}", np.max(v), tol["eigen"]))
    out.append(_check("oracle_spectrum", rep.max_oracle_delta() / rep.oracle_scale, tol["oracle"]))
    out.append(_check("orthonormality", rep.orthogonality_defect, tol["orthogonality"]))
    out.append(_check("spectrum_increasing", 0.0, 1.0, rep.spectrum_increasing))
    try:
        full = spectral_representation_check(s)
        out.append(_check("reconstruction", full.reconstruction_error, tol["reconstruction"]))
        out.append(_check("completeness", full.completeness_error, tol["reconstruction"]))
    except NotApplicable as exc:
        notes.append(f"reconstruction skipped: {exc}")
    return out


def _suite_orthogonality(s, tol, notes):
    out = []
    ns = range(s.size) if s.finite else range(min(7, s.size))
    Phi = np.array([eigenvector_normalized(s, n) for n in ns])
    out.append(_check("gram_defect", np.max(np.abs(Phi @ Phi.T - np.eye(len(ns)))), tol["orthogonality"]))
    x = s.lattice.astype(float)
    out.append(_check("P_n(0)=1", max(abs(float(s.poly(n, 0.0)) - 1) for n in ns), tol["normalization"]))
    P0 = s.poly(0, x)
    Xd = xi_D_at(s.params_delta, s.D, x)
    out.append(_check("P_0=Xi_shifted", np.max(np.abs(P0 - Xd) / np.maximum(1, np.abs(Xd))),
                      tol["normalization"]))
    out.append(_check("Xi(0)=1", abs(float(s.xi_cached(0)) - 1), tol["normalization"]))
    if s.D.M == 0:
        p = s.params
        worst = 0.0
        xs = x[:-1] if s.finite else x[: min(len(x) - 1, 40)]
        for n in list(ns)[:7]:
            P = lambda z: np.asarray(poly_multi_at(p, s.D, n, z), dtype=float)
            B, D = potential_B(p, xs), potential_D(p, xs)
            Pm = np.where(xs > 0, P(np.maximum(xs - 1, 0)), 0.0)
            terms = [(B + D) * P(xs), B * P(xs + 1), D * Pm, s.energies(n)[n] * P(xs)]
            r = terms[0] - terms[1] - terms[2] - terms[3]
            worst = max(worst, float(np.max(np.abs(r) / np.maximum(1e-300, np.max(np.abs(terms), axis=0)))))
        out.append(_check("three_term_recurrence", worst, tol["three_term"]))
    return out


def _suite_conservation(s, tol, notes):
    out = []
    bd = bdm.build_continuous(s)
    L = bd.L.storage
    out.append(_check("LBD_column_sums", np.max(np.abs(L.sum(axis=0))) / np.max(np.abs(L)), tol["column_sum"]))
    if bd.truncation_mass:
        notes.append(f"reflecting truncation at L={s.L}, discarded stationary mass {bd.truncation_mass:.3g}")
    p0s = ["stationary", "delta:0", f"delta:{s.L}", "uniform"]
    worst = 0.0
    neg = 0.0
    for spec in p0s:
        P0 = bdm.initial_distribution(spec, bd)
        for t in (0.01, 0.1, 1.0, 10.0):
            v = bdm.evolve_ct(bd, P0, t)
            worst = max(worst, abs(v.total - 1))
            neg = min(neg, float(np.min(v.values)))
    out.append(_check("evolved_sums", worst, tol["probability_sum"]))
    st = bd.stationary
    drift = max(bdm.total_variation(bdm.evolve_ct(bd, st, t).values, st.values) for t in (0.1, 1.0, 10.0))
    out.append(_check("stationary_invariant", drift, tol["stationary_limit"]))
    E1 = s.energies(1)[1]
    lim = bdm.evolve_ct(bd, bdm.initial_distribution("delta:0", bd), 200.0 / E1)
    out.append(_check("ct_limit", bdm.total_variation(lim.values, st.values), tol["stationary_limit"]))
    P = lambda t: bdm.transition_ct(bd, t)
    out.append(_check("chapman_kolmogorov_ct", np.max(np.abs(P(0.3) - P(0.2) @ P(0.1))), tol["chapman_kolmogorov"]))
    if s.finite:
        dbd = bdm.build_discrete(s)
        Ld = dbd.L.storage
        out.append(_check("LdBD_column_sums", np.max(np.abs(Ld.sum(axis=0) - 1)), tol["discrete_column_sum"]))
        out.append(_check("LdBD_nonnegative", max(0.0, -float(np.min(Ld))), 0.0, bool(np.min(Ld) >= 0)))
        k = dbd.kappa
        ok = bool(k[0] == 1.0 and np.all(np.diff(k) < 0) and np.all(k > -1))
        out.append(_check("kappa_ordering", 0.0, 1.0, ok))
        Q = lambda n: bdm.transition_dt(dbd, n)
        out.append(_check("chapman_kolmogorov_dt", np.max(np.abs(Q(10) - Q(7) @ Q(3))), tol["chapman_kolmogorov"]))
        dl = bdm.evolve_dt(dbd, bdm.initial_distribution("delta:0", dbd), 10_000)
        out.append(_check("dt_limit", bdm.total_variation(dl.values, dbd.stationary.values), tol["stationary_limit"]))
    else:
        notes.append("discrete chain skipped: semi-infinite lattice")
    return out


def _suite_shifts(s, tol, notes):
    out = []
    n_top = min(s.size - 1, 6)
    xs = np.concatenate([s.lattice[: min(s.size, 40)].astype(float), [0.5, 1.5]])
    for n in range(1, n_top + 1):
        rf, rb = shift_residuals(s, n, xs)
        out.append(_check(f"forward_shift_n{n}", rf, tol["shift"]))
        out.append(_check(f"backward_shift_n{n}", rb, tol["shift"]))
    return out


def _suite_zeros(s, tol, notes):
    out = []
    try:
        degree_check_xi(s)
        out.append(_check("degree_Xi", 0.0, tol["degree"]))
    except DegreeMismatch as exc:
        out.append(_check("degree_Xi", 1.0, tol["degree"]))
        notes.append(str(exc))
    n_top = min(s.size - 1, 6)
    for n in range(n_top + 1):
        try:
            degree_check(s, n, rtol=tol["degree"])
            out.append(_check(f"degree_P{n}", 0.0, tol["degree"]))
        except DegreeMismatch as exc:
            out.append(_check(f"degree_P{n}", 1.0, tol["degree"]))
            notes.append(str(exc))
        try:
            cnt, _ = zero_structure(s, n, check_interlacing=n < n_top)
            out.append(_check(f"sign_changes_P{n}", abs(cnt - n), 0.5))
        except ZeroCountMismatch as exc:
            out.append(_check(f"sign_changes_P{n}", 1.0, 0.5))
            notes.append(str(exc))
    return out


def _suite_repeated(s, tol, notes, ms=(2, 3)):
    out = []
    bd = bdm.build_continuous(s)
    for m in ms:
        rb = bdm.build_repeated(bd, m)
        X = rb.X.storage
        scale = float(np.max(np.abs(X)))
        bands = [np.diagonal(X, k) for k in range(-m, m + 1) if k != 0]
        out.append(_check(f"m{m}_bands_positive", 0.0, 1.0, all(np.all(b > 0) for b in bands)))
        out.append(_check(f"m{m}_diagonal_negative", 0.0, 1.0, bool(np.all(np.diag(X) < 0))))
        out.append(_check(f"m{m}_column_sums", np.max(np.abs(X.sum(axis=0))) / scale, tol["repeated_column_sum"]))
        out.append(_check(f"m{m}_bandwidth", abs(rb.X.bandwidth(tol=1e-14 * scale) - m), 0.5))
        # X is similar to a symmetric matrix through the stationary weights
        g = np.sqrt(bd.stationary.values)
        Xs = (X * g[None, :]) / g[:, None]
        w, _ = oracle_eigendecompose(0.5 * (Xs + Xs.T))
        w = np.sort(-w)
        k = len(w) if s.finite else min(7, len(w))
        Em = np.sort(-rb.eigenvalues)[:k]
        out.append(_check(f"m{m}_eigenvalues", np.max(np.abs(w[:k] - Em)) / max(1.0, scale),
                          tol["repeated_eigen"]))
        if s.finite:
            rd = bdm.build_repeated(bd, m, mode="discrete")
            Ld = rd.L.storage
            out.append(_check(f"m{m}_discrete_nonnegative", max(0.0, -float(np.min(Ld))), 0.0,
                              bool(np.min(Ld) >= 0)))
            out.append(_check(f"m{m}_discrete_column_sums", np.max(np.abs(Ld.sum(axis=0) - 1)),
                              tol["repeated_column_sum"]))
    return out


SUITE_FUNCS = {
    "spectral": _suite_spectral,
    "orthogonality": _suite_orthogonality,
    "conservation": _suite_conservation,
    "shifts": _suite_shifts,
    "zeros": _suite_zeros,
    "repeated": _suite_repeated,
}


def cmd_verify(cfg: RunConfig, suite: str, m=None) -> tuple[dict, int]:
    """Run one suite (or ``all``); returns the JSON report and the exit code."""
    names = list(SUITES) if suite == "all" else [suite]
    for n in names:
        if n not in SUITE_FUNCS:
            raise ConfigError(f"unknown suite {n!r}; expected one of {list(SUITES)} or 'all'")
    report = {"suite": suite, "checks": [], "config": cfg.echo(), "version": __version__, "notes": []}
    code = EXIT_OK
    try:
        s = cfg.system()
    except RangeError as exc:
        report["error"] = f"RangeError: {exc}"
        return report, EXIT_CONFIG
    except MiopError as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        return report, EXIT_DOMAIN
    tol = cfg.tolerances()
    for n in names:
        try:
            if n == "repeated" and m is not None:
                checks = _suite_repeated(s, tol, report["notes"], ms=(m,))
            else:
                checks = SUITE_FUNCS[n](s, tol, report["notes"])
        except (UnsupportedFamily, TuningInfeasible, NotApplicable) as exc:
            report["notes"].append(f"{n}: {type(exc).__name__}: {exc}")
            report.setdefault("error", f"{type(exc).__name__}: {exc}")
            code = max(code, EXIT_DOMAIN)
            continue
        except ConvergenceFailure as exc:
            checks = [_check(f"{n}_converged", 1.0, 0.5)]
            report["notes"].append(str(exc))
        for c in checks:
            c["name"] = f"{n}.{c['name']}" if suite == "all" else c["name"]
        report["checks"].extend(checks)
    if code == EXIT_OK and not all(c["pass"] for c in report["checks"]):
        code = EXIT_FAIL
    return report, code


def _verify_job(job):
    cfg, suite, m = job
    try:
        return cmd_verify(cfg, suite, m)
    except ConfigError as exc:
        return {"suite": suite, "checks": [], "config": cfg.echo(), "version": __version__,
                "error": f"ConfigError: {exc}"}, EXIT_CONFIG


# ---------------------------------------------------------------- evolve

def _initial(spec, target):
    if spec.startswith("file:"):
        path = spec[5:]
        try:
            with open(path, encoding="utf-8") as fh:
                v = np.array(fh.read().replace(",", " ").split(), dtype=float)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read initial distribution {path}: {exc}") from None
        return bdm.ProbabilityVector(v)
    return bdm.initial_distribution(spec, target)


def _snapshots(args, discrete):
    if discrete:
        steps = 0 if args.steps is None else args.steps
        if steps < 0:
            raise ConfigError("--steps must be nonnegative")
        k = min(args.snapshots, steps) if steps else 0
        return sorted(set(np.linspace(0, steps, k + 1).round().astype(int).tolist()))
    t_end = 1.0 if args.t_end is None else args.t_end
    if t_end < 0:
        raise ConfigError("--t-end must be nonnegative")
    return np.linspace(0.0, t_end, args.snapshots + 1).tolist() if t_end else [0.0]


def cmd_evolve(cfg: RunConfig, mode: str, P0: str, args):
    """Distribution snapshots; returns ``(columns, rows, meta)``."""
    if mode not in EVOLVE_MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {list(EVOLVE_MODES)}")
    s = cfg.system()
    bd = bdm.build_continuous(s)
    meta = {"mode": mode}
    if not s.finite:
        meta["truncation"] = {"L": s.L, "boundary": "reflecting", "discarded_mass": bd.truncation_mass}
    if mode == "ct":
        target, step = bd, lambda p, t: bdm.evolve_ct(bd, p, t)
    elif mode == "dt":
        target = bdm.build_discrete(s, t_S=args.tS)
        meta.update(t_S=target.t_S, kappa=target.kappa)
        step = lambda p, k: bdm.evolve_dt(target, p, k)
    else:
        m = 2 if args.m is None else args.m
        discrete = mode == "repeated-dt"
        target = bdm.build_repeated(bd, m, mode="discrete" if discrete else "continuous", t_S=args.tS)
        meta.update(m=m, weights=target.weights)
        if discrete:
            meta.update(t_S=target.t_S, kappa=target.eigenvalues)
        else:
            meta.update(eigenvalues=target.eigenvalues)
        step = lambda p, k: bdm.evolve_repeated(target, p, k)
    p0 = _initial(P0, target)
    if len(p0) != s.size:
        raise DomainError(f"initial distribution has length {len(p0)}, lattice has {s.size}")
    discrete = mode.endswith("dt")
    cols = ["step" if discrete else "t", "total", "truncation_error"] + [f"P{x}" for x in range(s.size)]
    rows = []
    for t in _snapshots(args, discrete):
        v = step(p0, t).values
        rows.append([t, float(v.sum()), bd.truncation_mass, *v])
    return cols, rows, meta


# ---------------------------------------------------------------- simulate

def cmd_simulate(cfg: RunConfig, mode: str, x0: int, args):
    """Empirical histogram against the exact law; returns ``(columns, rows, meta, paths)``."""
    if mode not in ("ct", "dt"):
        raise ConfigError("simulate supports modes ct and dt")
    if args.trajectories < 1:
        raise ConfigError("--trajectories must be positive")
    s = cfg.system()
    bd = bdm.build_continuous(s)
    if not 0 <= x0 < s.size:
        raise DomainError(f"x0={x0} outside the lattice 0..{s.size - 1}")
    seed = cfg.seed
    delta = bdm.initial_distribution(f"delta:{x0}", bd)
    paths = []
    if mode == "ct":
        t_end = 1.0 if args.t_end is None else args.t_end
        hist = bdm.empirical_ct(bd, x0, t_end, args.trajectories, seed)
        exact = bdm.evolve_ct(bd, delta, t_end).values
        meta = {"t_end": t_end}
        for i in range(min(args.trajectories, args.paths_count)):
            ts, xs = bdm.simulate_ct(bd, x0, t_end, [seed, i])
            paths.extend((i, t, x) for t, x in zip(ts, xs))
        path_cols = ["trajectory", "t", "x"]
    else:
        dbd = bdm.build_discrete(s, t_S=args.tS)
        steps = 50 if args.steps is None else args.steps
        hist = bdm.empirical_dt(dbd, x0, steps, args.trajectories, seed)
        exact = bdm.evolve_dt(dbd, delta, steps).values
        meta = {"steps": steps, "t_S": dbd.t_S}
        for i in range(min(args.trajectories, args.paths_count)):
            xs = bdm.simulate_dt(dbd, x0, steps, [seed, i])
            paths.extend((i, k, x) for k, x in enumerate(xs))
        path_cols = ["trajectory", "step", "x"]
    meta.update(mode=mode, x0=x0, trajectories=args.trajectories, seed=seed,
                total_variation=bdm.total_variation(hist, exact))
    rows = [(x, hist[x], exact[x]) for x in range(s.size)]
    return ["x", "empirical", "exact"], rows, meta, (path_cols, paths)


# ---------------------------------------------------------------- argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration (object or list)")
    common.add_argument("--family", choices=FAMILY_IDS)
    common.add_argument("--params", nargs="+", metavar="k=v", help="parameter overrides, also q=.. and N=..")
    common.add_argument("--D", metavar="1,3", help="index set")
    common.add_argument("--truncation", type=int, help="cutoff for semi-infinite lattices")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--tol", nargs="+", metavar="NAME=VALUE", help="tolerance overrides")

    ap = argparse.ArgumentParser(prog="miopbd", description="Multi-indexed polynomials and birth and death processes")
    ap.add_argument("--version", action="version", version=f"miopbd {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="tabulate polynomials, potentials or energies")
    e.add_argument("what", choices=("poly", "xi", "potentials", "energy"))
    e.add_argument("--n", help="degree(s): 'a:b' or comma list")
    e.add_argument("--x", help="points: 'a:b' or comma list (default: whole lattice)")

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("--suite", default="all", help=f"one of {', '.join(SUITES)} or all")
    v.add_argument("--m", type=int, help="order for the repeated suite (default: 2 and 3)")
    v.add_argument("--jobs", type=int, default=1, help="parallel workers for config lists")

    ev = sub.add_parser("evolve", parents=[common], help="evolve a distribution")
    ev.add_argument("--mode", choices=EVOLVE_MODES, default="ct")
    ev.add_argument("--P0", default="delta:0", help="delta:x0, uniform, stationary or file:PATH")
    ev.add_argument("--t-end", type=float)
    ev.add_argument("--steps", type=int)
    ev.add_argument("--snapshots", type=int, default=10)
    ev.add_argument("--tS", type=float)
    ev.add_argument("--m", type=int)

    sm = sub.add_parser("simulate", parents=[common], help="Monte Carlo against the exact law")
    sm.add_argument("--mode", choices=("ct", "dt"), default="ct")
    sm.add_argument("--x0", type=int, default=0)
    sm.add_argument("--t-end", type=float)
    sm.add_argument("--steps", type=int)
    sm.add_argument("--tS", type=float)
    sm.add_argument("--trajectories", type=int, default=10_000)
    sm.add_argument("--paths", metavar="PATH", help="write individual trajectories to this CSV")
    sm.add_argument("--paths-count", type=int, default=10)
    return ap


def _run(args) -> int:
    cfgs = load_configs(args)
    if args.command == "verify":
        jobs = [(c, args.suite, args.m) for c in cfgs]
        if args.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as ex:
                results = list(ex.map(_verify_job, jobs))
        else:
            results = [_verify_job(j) for j in jobs]
        reports = [r for r, _ in results]
        code = max(c for _, c in results)
        for r in reports:
            if "error" in r:
                print(f"miopbd: {r['config'].get('family')}: {r['error']}", file=sys.stderr)
        fmt = cfgs[0].fmt
        if fmt == "csv":
            rows = [(r["config"]["family"], " ".join(map(str, r["config"]["D"])), c["name"], c["residual"],
                     c["tolerance"], c["pass"]) for r in reports for c in r["checks"]]
            emit(write_csv(["family", "D", "name", "residual", "tolerance", "pass"], rows), args.out)
        else:
            doc = reports[0] if len(reports) == 1 else reports
            emit(json.dumps(_jsonable(doc), indent=1) + "\n", args.out)
        return code
    if len(cfgs) != 1:
        raise ConfigError(f"{args.command} takes a single configuration")
    cfg = cfgs[0]
    if args.command == "eval":
        cols, rows = cmd_eval(cfg, args.what, args.n, args.x)
        _table_output(cfg, cols, rows, {"what": args.what}, args.out)
    elif args.command == "evolve":
        cols, rows, meta = cmd_evolve(cfg, args.mode, args.P0, args)
        _table_output(cfg, cols, rows, {"meta": meta}, args.out)
    else:
        cols, rows, meta, (pcols, paths) = cmd_simulate(cfg, args.mode, args.x0, args)
        _table_output(cfg, cols, rows, {"meta": meta}, args.out)
        if args.paths:
            with open(args.paths, "w", encoding="utf-8") as fh:
                fh.write(write_csv(pcols, paths))
        print(f"total_variation {meta['total_variation']:.6g}", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (ConfigError, RangeError) as exc:
        print(f"miopbd: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, MiopError) as exc:
        print(f"miopbd: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
