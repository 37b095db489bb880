"""Acceptance criteria AC1 to AC10.

Each test measures its worst residual over the whole matrix of systems,
prints one PASS/FAIL line and then asserts.  The lines are repeated in the
terminal summary under "acceptance criteria".
"""
import numpy as np
import pytest

from conftest import BD_FAMILIES, FAMILY_IDS, FINITE, report_criterion, system
from miopbd import bd as bdm
from miopbd import families as F
from miopbd.errors import NotApplicable, UnsupportedFamily
from miopbd.miop import degree_check, shift_residuals, xi_D_at, zero_structure
from miopbd.operators import oracle_eigendecompose, spectral_representation_check, spectrum_report

AC_INDEX_SETS = ["1", "2", "1,2", "1,3"]
P0_SPECS = ("stationary", "delta:0", "delta:last", "uniform")


def _verdict(tag, measured: dict, tol: dict, extra: str = ""):
    """``measured`` and ``tol`` share keys; PASS iff every measured value is below its bound."""
    bad = [k for k in measured if not measured[k] < tol[k]]
    detail = "  ".join(f"{k}={measured[k]:.3g}<{tol[k]:.0e}" for k in measured)
    ok = not bad
    report_criterion(tag, ok, detail + (f"  {extra}" if extra else ""))
    assert ok, f"{tag}: {bad} over tolerance"


def _flag(tag, ok: bool, detail: str):
    report_criterion(tag, ok, detail)
    assert ok, f"{tag}: {detail}"


def _p0(spec, bd):
    if spec == "delta:last":
        spec = f"delta:{bd.system.size - 1}"
    return bdm.initial_distribution(spec, bd)


def test_ac1_classical_reduction():
    three = orth = 0.0
    for fid in FAMILY_IDS:
        s = system(fid, "")
        p = s.params
        x = s.lattice.astype(float)
        ns = list(range(s.size)) if s.finite else list(range(7))
        P = lambda n, z: np.asarray(s.poly(n, z), dtype=float)
        # three-term difference equation, relative to the largest term
        xs = x[:-1] if s.finite else x[: min(len(x) - 1, 40)]
        B, D = F.potential_B(p, xs), F.potential_D(p, xs)
        E = s.energies(max(ns))
        for n in ns:
            Pm = np.where(xs > 0, P(n, np.maximum(xs - 1, 0)), 0.0)
            terms = np.array([B * (P(n, xs) - P(n, xs + 1)), D * (P(n, xs) - Pm), E[n] * P(n, xs)])
            r = terms[0] + terms[1] - terms[2]
            den = np.maximum(np.max(np.abs(terms), axis=0), np.finfo(float).tiny)
            three = max(three, float(np.max(np.abs(r) / den)))
        # orthogonality against phi_0^2
        g = F.ground_state_sq(p, x)
        V = np.array([P(n, x) for n in ns])
        G = (V * g) @ V.T
        dg = np.sqrt(np.diag(G))
        off = np.abs(G) / np.outer(dg, dg) - np.eye(len(ns))
        orth = max(orth, float(np.max(np.abs(off))))
    _verdict("AC1", {"three_term": three, "orth_offdiag": orth},
             {"three_term": 1e-9, "orth_offdiag": 1e-8}, f"families={len(FAMILY_IDS)}")


def test_ac2_eigen_structure():
    eig = orc = 0.0
    names = set()
    for fid in FAMILY_IDS:
        for D in AC_INDEX_SETS:
            rep = spectrum_report(system(fid, D))
            names |= set(rep.eigen_residuals)
            eig = max(eig, rep.max_eigen_residual())
            orc = max(orc, rep.max_oracle_delta() / rep.oracle_scale)
    assert len(names) == 4, names
    _verdict("AC2", {"eigen": eig, "oracle/max(1,|H|)": orc},
             {"eigen": 1e-8, "oracle/max(1,|H|)": 1e-8},
             f"systems={len(FAMILY_IDS) * len(AC_INDEX_SETS)} equations={len(names)}")


def test_ac3_case1_structure():
    at0 = p0xi = 0.0
    bad_degree, bad_zeros = [], []
    for fid in FAMILY_IDS:
        for D in AC_INDEX_SETS:
            s = system(fid, D)
            x = s.lattice.astype(float)
            n_top = min(s.size - 1, 6)
            for n in range(n_top + 1):
                try:
                    deg, _ = degree_check(s, n, rtol=1e-7)
                    if deg != s.D.ell + n:
                        bad_degree.append((fid, D, n))
                except Exception as exc:  # noqa: BLE001  recorded, reported below
                    bad_degree.append((fid, D, n, str(exc)))
                at0 = max(at0, abs(float(s.poly(n, 0.0)) - 1.0))
                cnt, _ = zero_structure(s, n)
                if cnt != n:
                    bad_zeros.append((fid, D, n, cnt))
            Xd = xi_D_at(s.params_delta, s.D, x)
            p0xi = max(p0xi, float(np.max(np.abs(s.poly(0, x) - Xd) / np.maximum(1.0, np.abs(Xd)))))
    ok = not bad_degree and not bad_zeros and at0 < 1e-10 and p0xi < 1e-10
    _flag("AC3", ok, f"degree_mismatches={len(bad_degree)} sign_change_mismatches={len(bad_zeros)} "
                     f"|P(0)-1|={at0:.3g} P0-Xi_shifted={p0xi:.3g}<1e-10")


def test_ac4_conservation():
    col = tot = dcol = 0.0
    for fid in BD_FAMILIES:
        for D in AC_INDEX_SETS:
            s = system(fid, D)
            b = bdm.build_continuous(s)
            L = b.L.storage
            col = max(col, float(np.max(np.abs(L.sum(axis=0))) / np.max(np.abs(L))))
            for spec in P0_SPECS:
                P0 = _p0(spec, b)
                for t in (0.01, 0.1, 1.0, 10.0):
                    tot = max(tot, abs(float(bdm.evolve_ct(b, P0, t).values.sum()) - 1.0))
            if s.finite:
                d = bdm.build_discrete(s)
                dcol = max(dcol, float(np.max(np.abs(d.L.storage.sum(axis=0) - 1.0))))
    _verdict("AC4", {"LBD_colsum/max": col, "evolved_sum": tot, "LdBD_colsum": dcol},
             {"LBD_colsum/max": 1e-10, "evolved_sum": 1e-9, "LdBD_colsum": 1e-12})


def test_ac5_chapman_kolmogorov():
    ct = dt = 0.0
    for fid, D in (("H", "2"), ("qR", "1,3")):
        s = system(fid, D)
        b = bdm.build_continuous(s)
        P = lambda t: bdm.transition_ct(b, t)
        ct = max(ct, float(np.max(np.abs(P(0.3 + 0.1) - P(0.3) @ P(0.1)))))
        d = bdm.build_discrete(s)
        Q = lambda k: bdm.transition_dt(d, k)
        dt = max(dt, float(np.max(np.abs(Q(7 + 3) - Q(7) @ Q(3)))))
    _verdict("AC5", {"ct": ct, "dt": dt}, {"ct": 1e-8, "dt": 1e-8})


def test_ac6_spectral_limits():
    ct = dt = 0.0
    kappa_bad = []
    for fid in BD_FAMILIES:
        for D in AC_INDEX_SETS:
            s = system(fid, D)
            b = bdm.build_continuous(s)
            E1 = s.energies(1)[1]
            st = b.stationary.values
            for spec in ("delta:0", "delta:last"):
                v = bdm.evolve_ct(b, _p0(spec, b), 200.0 / E1).values
                ct = max(ct, bdm.total_variation(v, st))
            if s.finite:
                d = bdm.build_discrete(s)
                for spec in ("delta:0", "delta:last"):
                    v = bdm.evolve_dt(d, _p0(spec, d), 10_000).values
                    dt = max(dt, bdm.total_variation(v, st))
                k = d.kappa
                if not (k[0] == 1.0 and np.all(np.diff(k) < 0) and np.all(k > -1)):
                    kappa_bad.append((fid, D))
    ok = ct < 1e-7 and dt < 1e-7 and not kappa_bad
    _flag("AC6", ok, f"TV_ct={ct:.3g}<1e-7 TV_dt={dt:.3g}<1e-7 kappa_violations={len(kappa_bad)}")


def test_ac7_repeated():
    s = system("H", "2")
    b = bdm.build_continuous(s)
    g = np.sqrt(b.stationary.values)
    problems = []
    colsum = eig = 0.0
    for m in (2, 3):
        rb = bdm.build_repeated(b, m)
        X = rb.X.storage
        scale = float(np.max(np.abs(X)))
        if not all(np.all(np.diagonal(X, k) > 0) for k in range(-m, m + 1) if k != 0):
            problems.append(f"m={m} bands")
        if not np.all(np.diag(X) < 0):
            problems.append(f"m={m} diagonal")
        if np.any(np.abs(np.triu(X, m + 1)) + np.abs(np.tril(X, -m - 1)) != 0):
            problems.append(f"m={m} bandwidth")
        colsum = max(colsum, float(np.max(np.abs(X.sum(axis=0))) / scale))
        Xs = (X * g[None, :]) / g[:, None]
        w, _ = oracle_eigendecompose(0.5 * (Xs + Xs.T))
        eig = max(eig, float(np.max(np.abs(np.sort(w) - np.sort(rb.eigenvalues)))) / max(1.0, scale))
        Ld = bdm.build_repeated(b, m, mode="discrete").L.storage
        if np.min(Ld) < 0 or np.max(np.abs(Ld.sum(axis=0) - 1)) > 1e-12:
            problems.append(f"m={m} discrete")
    ok = not problems and colsum < 1e-10 and eig < 1e-8
    _flag("AC7", ok, f"colsum={colsum:.3g}<1e-10 eigen={eig:.3g}<1e-8 structural={problems or 'ok'}")


def test_ac8_shift_relations():
    worst = {}
    for fid in ("H", "M"):
        s = system(fid, "1,2")
        xs = np.concatenate([s.lattice.astype(float), [0.5, 1.5]])
        if not s.finite:
            xs = xs[np.concatenate([s.lattice < s.size - 1, [True, True]])]
        r = 0.0
        for n in range(1, min(s.size - 1, 6) + 1):
            r = max(r, *shift_residuals(s, n, xs))
        worst[fid] = r
    _verdict("AC8", {f"shift_{k}": v for k, v in worst.items()}, {f"shift_{k}": 1e-8 for k in worst})


@pytest.mark.slow
def test_ac9_monte_carlo():
    s = system("H", "2")
    b = bdm.build_continuous(s)
    exact = bdm.evolve_ct(b, bdm.initial_distribution("delta:0", b), 1.0).values
    emp = bdm.empirical_ct(b, 0, 1.0, 100_000, seed=20261015)
    tv_ct = bdm.total_variation(emp / emp.sum(), exact)
    d = bdm.build_discrete(s)
    exact_d = bdm.evolve_dt(d, bdm.initial_distribution("delta:0", d), 50).values
    emp_d = bdm.empirical_dt(d, 0, 50, 100_000, seed=20261015)
    tv_dt = bdm.total_variation(emp_d / emp_d.sum(), exact_d)
    _verdict("AC9", {"TV_ct": tv_ct, "TV_dt": tv_dt}, {"TV_ct": 0.01, "TV_dt": 0.01})


def test_ac10_exclusions():
    s = system("qM", "")
    outcome = {}
    for name, fn in (("continuous", bdm.build_continuous), ("discrete", bdm.build_discrete)):
        try:
            fn(s)
            outcome[name] = "built"
        except UnsupportedFamily:
            outcome[name] = "UnsupportedFamily"
    try:
        spectral_representation_check(s)
        outcome["completeness"] = "ran"
    except NotApplicable:
        outcome["completeness"] = "NotApplicable"
    ok = outcome == {"continuous": "UnsupportedFamily", "discrete": "UnsupportedFamily",
                     "completeness": "NotApplicable"}
    _flag("AC10", ok, " ".join(f"{k}={v}" for k, v in outcome.items()))


def test_acceptance_classical_family_count():
    assert len(FAMILY_IDS) == 13 and len(FINITE) == 9
