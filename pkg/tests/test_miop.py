import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import DEFORMED, FAMILY_IDS, INDEX_SETS, system
from miopbd import families as fam
from miopbd.errors import RangeError, ZeroCountMismatch
from miopbd.miop import (
    IndexSet, casoratian, choose_truncation, degree_check, degree_check_xi, deformed_potentials,
    dtilde_sq, eigenvector, eigenvector_normalized, leading_coeff_P, poly_multi_at, poly_multi_eval,
    poly_multi_nu_form, shift_residuals, xi_D, xi_D_at, zero_structure,
)

CASES = [(f, d) for f in FAMILY_IDS for d in INDEX_SETS]
DEF_CASES = [(f, d) for f in FAMILY_IDS for d in DEFORMED]


def n_top(s):
    return s.L if s.finite else 6


# ---------------------------------------------------------------- index sets

def test_index_set_parse_and_ell():
    D = IndexSet.parse("{1,3}")
    assert D.d == (1, 3) and D.M == 2 and D.ell == 3 and str(D) == "{1,3}"
    assert IndexSet.parse("").M == 0
    assert IndexSet.parse("2").ell == 2


@pytest.mark.parametrize("bad", [(3, 1), (0, 2), (1, 1), (-1,)])
def test_index_set_rejects(bad):
    with pytest.raises(RangeError):
        IndexSet(bad)


# ---------------------------------------------------------------- Casoratians

def test_casoratian_examples():
    f = lambda y: 2.0 * y + 1.0
    assert casoratian([f], 3.0) == pytest.approx(7.0)
    assert casoratian([f, f], np.arange(4.0)) == pytest.approx(np.zeros(4), abs=1e-14)
    h = fam.preset("H", 2)
    xi1 = lambda y: fam.virtual_poly_eval(h, 1, y)
    xi2 = lambda y: fam.virtual_poly_eval(h, 2, y)
    # 2x2 determinant frozen from a 40-digit evaluation
    assert casoratian([xi1, xi2], 0.0) == pytest.approx(-0.04320987654320988, rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(c=st.lists(st.floats(-3, 3), min_size=3, max_size=3), x=st.floats(0, 5))
def test_casoratian_swap_is_antisymmetric(c, x):
    fs = [lambda y, k=k: (y + 1.0) ** k * (1 + c[k] * y) for k in range(3)]
    a = casoratian(fs, x)
    b = casoratian([fs[1], fs[0], fs[2]], x)
    assert b == pytest.approx(-a, rel=1e-9, abs=1e-9)


# ---------------------------------------------------------------- denominator and polynomials

@pytest.mark.parametrize("fid,D", CASES)
def test_normalizations(fid, D):
    s = system(fid, D)
    assert xi_D(s, 0.0) == pytest.approx(1.0, abs=1e-12)
    for n in range(min(n_top(s), 6) + 1):
        assert poly_multi_eval(s, n, 0.0) == pytest.approx(1.0, abs=1e-10)
    x = s.lattice.astype(float)
    P0 = s.poly(0, x)
    Xd = xi_D_at(s.params_delta, s.D, x)
    assert np.max(np.abs(P0 - Xd) / np.maximum(1, np.abs(Xd))) < 1e-10


def test_hahn_denominator_value():
    s = system("H", "2")
    # M=1: Xi_D is the twisted Hahn polynomial of degree 2 (40-digit oracle)
    assert xi_D(s, 1.0) == pytest.approx(1.0370370370370370, rel=1e-13)


@pytest.mark.parametrize("fid", FAMILY_IDS)
def test_empty_index_set_reduces(fid):
    s = system(fid, "")
    x = s.lattice[:20].astype(float)
    assert np.all(xi_D(s, x) == 1.0)
    for n in range(4):
        assert np.allclose(s.poly(n, x), fam.poly_eval(s.params, n, x), rtol=1e-13, atol=1e-13)
    B, D = deformed_potentials(s)
    assert np.allclose(B[:20], fam.potential_B(s.params, x), rtol=1e-13)
    assert np.allclose(D[:20], fam.potential_D(s.params, x), rtol=1e-13)


@pytest.mark.parametrize("fid,D", DEF_CASES)
def test_determinant_routes_agree(fid, D):
    s = system(fid, D)
    p = s.params
    x = np.arange(min(s.L, 12) + 1, dtype=float)
    for n in range(min(n_top(s), 5) + 1):
        a = poly_multi_at(p, s.D, n, x)
        b = poly_multi_nu_form(p, s.D, n, x)
        assert np.max(np.abs(a - b) / np.maximum(1, np.abs(a))) < 1e-8


@pytest.mark.parametrize("fid,D", [("H", "1,2"), ("qR", "1,3"), ("M", "1,2"), ("lqJ", "1,3")])
def test_virtual_order_sign(fid, D):
    s = system(fid, D)
    f = s.params.impl
    fs = [lambda y, v=v: f.xi(s.params, v, y) for v in s.D]
    x = np.arange(6.0)
    assert np.allclose(casoratian(fs[::-1], x), -casoratian(fs, x), rtol=1e-12)


@pytest.mark.parametrize("fid,D", CASES)
def test_orthogonality(fid, D):
    s = system(fid, D)
    x = s.lattice.astype(float)
    top = n_top(s)
    w = fam.ground_state_sq(s.params_Mt, x) / (s.xi_cached(s.lattice) * s.xi_cached(s.lattice + 1))
    P = np.array([s.poly(n, x) for n in range(top + 1)])
    d2 = np.array([fam.norm_const_sq(s.params, n) * dtilde_sq(s.params, s.D, n) for n in range(top + 1)])
    assert np.all(d2 > 0)
    G = (P * w) @ P.T
    diag = np.diag(G)
    assert np.max(np.abs(diag * d2 - 1)) < 1e-7
    off = G - np.diag(diag)
    assert np.max(np.abs(off) / np.sqrt(np.outer(diag, diag))) < 1e-8


@pytest.mark.parametrize("fid,D", [("H", "2"), ("qR", "1,3"), ("M", "1,2"), ("dqqK", "1")])
def test_R_orthogonality(fid, D):
    s = system(fid, D)
    x = s.lattice.astype(float)
    top = n_top(s)
    g2 = s.stationary
    R = np.array([s.poly(n, x) / s.poly(0, x) for n in range(top + 1)])
    G = (R * g2) @ R.T
    diag = np.diag(G)
    off = G - np.diag(diag)
    assert np.max(np.abs(off) / np.sqrt(np.outer(diag, diag))) < 1e-8


# ---------------------------------------------------------------- potentials and eigenvectors

@pytest.mark.parametrize("fid,D", CASES)
def test_potentials_boundaries(fid, D):
    s = system(fid, D)
    B, Dd = deformed_potentials(s)
    assert Dd[0] == 0.0
    assert np.all(Dd[1:] > 0)
    if s.finite:
        assert B[-1] == 0.0
        assert np.all(B[:-1] > 0)
    else:
        assert np.all(B > 0)


@pytest.mark.parametrize("fid,D", CASES)
def test_eigenvectors(fid, D):
    s = system(fid, D)
    top = n_top(s)
    for n in range(top + 1):
        assert eigenvector(s, n, 0) == pytest.approx(1.0, abs=1e-10)
    Phi = np.array([eigenvector_normalized(s, n) for n in range(top + 1)])
    assert np.max(np.abs(Phi @ Phi.T - np.eye(top + 1))) < 1e-8
    assert abs(s.stationary.sum() - 1) < 1e-10


def test_out_of_lattice_degree():
    with pytest.raises(RangeError):
        poly_multi_eval(system("H", "2"), 11, 0.0)


# ---------------------------------------------------------------- degree structure

@pytest.mark.parametrize("fid,D", CASES)
def test_degrees(fid, D):
    s = system(fid, D)
    assert degree_check_xi(s) == s.D.ell
    for n in range(min(n_top(s), 4) + 1):
        deg, missing = degree_check(s, n)
        assert deg == s.D.ell + n
        assert missing == list(range(s.D.ell))


def test_hahn_degree_example():
    s = system("H", "2")
    deg, _ = degree_check(s, 1)
    assert deg == 3
    assert np.isfinite(leading_coeff_P(s, 1)) and leading_coeff_P(s, 1) != 0


# ---------------------------------------------------------------- shifts

def test_shift_examples():
    s = system("H", "2")
    assert shift_residuals(s, 0, np.arange(6.0))[0] < 1e-12
    for n in range(1, 6):
        assert max(shift_residuals(s, n, np.arange(6.0))) < 1e-8
    m = system("M", "1")
    for n in range(1, 4):
        assert max(shift_residuals(m, n, np.array([0.5]))) < 1e-8


@pytest.mark.parametrize("fid,D", DEF_CASES)
def test_shift_relations(fid, D):
    s = system(fid, D)
    xs = np.concatenate([s.lattice[: min(s.size, 40)].astype(float), [0.5, 1.5]])
    for n in range(1, min(s.size - 1, 6) + 1):
        assert max(shift_residuals(s, n, xs)) < 1e-8


# ---------------------------------------------------------------- zeros

@pytest.mark.parametrize("fid,D", CASES)
def test_zero_counts(fid, D):
    s = system(fid, D)
    for n in range(min(n_top(s), 6) + 1):
        cnt, bars = zero_structure(s, n, check_interlacing=n < 6)
        assert cnt == n and len(bars) == n


def test_zero_count_mismatch_detected():
    s = system("H", "2")

    class Fake:
        finite, L = True, s.L

        def poly(self, n, x):
            return np.ones_like(x)

    with pytest.raises(ZeroCountMismatch):
        zero_structure(Fake(), 1)


# ---------------------------------------------------------------- truncation

@pytest.mark.parametrize("fid", ["M", "lqJ", "lqL", "qM"])
def test_truncation_tail(fid):
    s = system(fid, "1,2")
    assert s.L == choose_truncation(s.params, s.D)
    # closed-form normalization: the retained mass misses only the tail
    assert 1 - s.stationary.sum() < 1e-10
