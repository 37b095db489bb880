import numpy as np
import pytest

from miopbd import families as fam
from miopbd.errors import RangeError
from miopbd.families import FAMILY_IDS, FINITE, make_params, preset

TWIST = [f for f in FAMILY_IDS if fam.get_family(f).twist_defined]
# families whose virtual energies sit above the spectrum instead of below zero
ABOVE = ("dH", "qqK", "dqH")


def lattice(p, top=25):
    return np.arange((p.N if p.finite else top) + 1, dtype=float)


def test_hahn_range():
    fam.validate_params(make_params("H", {"a": 1.2, "b": 4.5}, N=10, dmax_hint=2))
    with pytest.raises(RangeError, match="b>1"):
        fam.validate_params(make_params("H", {"a": 1.2, "b": 2.0}, N=10, dmax_hint=2))


def test_qracah_spec_example_valid():
    p = make_params("qR", {"b": 0.008, "c": 0.6, "d": 0.5}, q=0.7, N=8, dmax_hint=2)
    assert fam.validate_params(p) is p


@pytest.mark.parametrize("bad", [
    dict(family="H", params={"a": 1.2}, N=10),
    dict(family="H", params={"a": 1.2, "b": 4.5, "z": 1}, N=10),
    dict(family="qH", params={"a": 0.4, "b": 0.2}, q=1.3, N=10),
    dict(family="M", params={"beta": 2.5, "c": 0.4}, N=10),
    dict(family="XX", params={}),
])
def test_bad_parameters(bad):
    with pytest.raises(RangeError):
        make_params(bad["family"], bad["params"], q=bad.get("q"), N=bad.get("N"))


def test_potential_examples():
    h = preset("H")
    assert fam.potential_B(h, 10.0) == 0.0
    m = preset("M")
    assert fam.potential_B(m, 3.0) == pytest.approx(2.2, rel=1e-15)
    for f in FAMILY_IDS:
        assert fam.potential_D(preset(f), 0.0) == 0.0


def test_energy_examples():
    assert fam.energy(preset("H"), 1) == pytest.approx(5.7, rel=1e-15)
    assert fam.virtual_energy(preset("dH"), 1) == pytest.approx(11.5, rel=1e-15)
    for f in FAMILY_IDS:
        assert fam.energy(preset(f), 0) == 0.0
        assert fam.eta(preset(f), 0.0) == 0.0


def test_eta_and_varphi_forms():
    p = preset("qR")
    q, d = p.q, 0.5
    x = np.arange(6.0)
    assert np.allclose(fam.eta(p, x), (q ** -x - 1) * (1 - d * q ** x), rtol=1e-14)
    r = preset("R")
    b, c, dd = 16.0, 0.7, 0.5
    assert np.allclose(fam.varphi(r, x) * (dd + 1), 2 * x + dd + 1, rtol=1e-14)


def test_poly_examples():
    h = preset("H")
    assert fam.poly_eval(h, 1, 2.0) == pytest.approx(1 - 5.7 * 2 / 12, rel=1e-13)
    for f in FAMILY_IDS:
        p = preset(f)
        assert fam.poly_eval(p, 3, 0.0) == pytest.approx(1.0, abs=1e-14)
        assert np.all(fam.poly_eval(p, 0, lattice(p)) == 1.0)


def test_ground_state_examples():
    m = preset("M")
    assert fam.ground_state_sq(m, 2.0) == pytest.approx(0.7, rel=1e-14)
    h = preset("H")
    x = lattice(h)
    assert np.allclose(fam.ground_state_sq(h, x), fam.ground_state_sq(h, x, closed=True), rtol=1e-12)


@pytest.mark.parametrize("fid", FAMILY_IDS)
def test_ground_state_closed_form(fid):
    p = preset(fid)
    x = lattice(p)
    run, closed = fam.ground_state_sq(p, x), fam.ground_state_sq(p, x, closed=True)
    assert np.allclose(run, closed, rtol=1e-10)
    assert run[0] == 1.0


@pytest.mark.parametrize("fid", FAMILY_IDS)
def test_detailed_balance(fid):
    p = preset(fid)
    x = lattice(p)[:-1]
    phi2 = fam.ground_state_sq(p, np.append(x, x[-1] + 1))
    lhs = fam.potential_B(p, x) * phi2[:-1]
    rhs = fam.potential_D(p, x + 1) * phi2[1:]
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=0)


@pytest.mark.parametrize("fid", FAMILY_IDS)
def test_norm_constants_positive(fid):
    p = preset(fid)
    top = p.N if p.finite else 8
    assert all(fam.norm_const_sq(p, n) > 0 for n in range(top + 1))


@pytest.mark.parametrize("fid", FAMILY_IDS)
def test_classical_orthogonality(fid):
    p = preset(fid)
    top = p.N if p.finite else 6
    x = lattice(p, 120)
    w = fam.ground_state_sq(p, x)
    P = np.array([fam.poly_eval(p, n, x) for n in range(top + 1)])
    d = np.sqrt([fam.norm_const_sq(p, n) for n in range(top + 1)])
    G = (P * w) @ P.T * np.outer(d, d)
    assert np.max(np.abs(G - np.eye(top + 1))) < 1e-8


@pytest.mark.parametrize("fid", FAMILY_IDS)
def test_three_term_equation(fid):
    p = preset(fid)
    x = lattice(p)[:-1] if p.finite else lattice(p, 30)
    for n in range(min(6, len(x))):
        P = lambda z: np.asarray(fam.poly_eval(p, n, z), dtype=float)
        B, D = fam.potential_B(p, x), fam.potential_D(p, x)
        Pm = np.where(x > 0, P(np.maximum(x - 1, 0)), 0.0)
        terms = np.array([(B + D) * P(x), B * P(x + 1), D * Pm, fam.energy(p, n) * P(x)])
        r = terms[0] - terms[1] - terms[2] - terms[3]
        assert np.max(np.abs(r) / np.max(np.abs(terms), axis=0)) < 1e-9


@pytest.mark.parametrize("fid", FAMILY_IDS)
def test_virtual_energy_identity_and_sign(fid):
    p = preset(fid)
    top = p.N if p.finite else 10
    E = np.array([fam.energy(p, n) for n in range(top + 1)])
    for v in range(1, 4):
        Et = fam.virtual_energy(p, v)
        assert Et == pytest.approx(fam.alpha(p) * fam.energy_prime(p, v) + fam.alpha_prime(p), rel=1e-12, abs=1e-12)
        if fid in ABOVE:
            assert np.all(Et > E)
        else:
            assert Et < 0


@pytest.mark.parametrize("fid", TWIST)
def test_twist_involution_and_consistency(fid):
    p = preset(fid)
    tt = fam.twist_params(fam.twist_params(p))
    assert np.allclose(tt.lam, p.lam, rtol=1e-13, atol=1e-15)
    t = fam.twist_params(p)
    x = lattice(p)
    assert np.allclose(fam.potential_B_prime(p, x), fam.potential_B(t, x), rtol=1e-10)
    assert np.allclose(fam.potential_D_prime(p, x), fam.potential_D(t, x), rtol=1e-10)
    # the closed forms of dH, qqK, dqH carry a (-1)**x; the running ratio is its modulus
    assert np.allclose(fam.nu(p, x), np.abs(fam.nu(p, x, closed=True)), rtol=1e-10)
    for u in (1, 2, 3):
        lhs = fam.shift_params(t, u, "delta")
        rhs = fam.twist_params(fam.shift_params(p, u, "delta_tilde"))
        assert np.allclose(lhs.lam, rhs.lam, rtol=1e-12, atol=1e-15)


def test_shift_examples():
    h = preset("H")
    assert fam.shift_params(h, 0) is h
    hd = fam.shift_params(h, 1)
    assert hd.describe()["params"] == pytest.approx({"a": 2.2, "b": 5.5})
    assert hd.N == 9
    assert fam.nu(h, 0.0) == 1.0


def test_hahn_virtual_is_twisted_poly():
    h = preset("H")
    t = fam.twist_params(h)
    assert t.describe()["params"] == pytest.approx({"a": 1.2, "b": 2 - 4.5})
    x = lattice(h)
    for v in (1, 2, 3):
        assert np.allclose(fam.virtual_poly_eval(h, v, x), fam.poly_eval(t, v, x), rtol=1e-13)
        assert fam.virtual_poly_eval(h, v, 0.0) == pytest.approx(1.0, abs=1e-14)


def test_qmeixner_virtual_value():
    # hand expansion of the two-term 3phi2 at v=1, x=1
    assert fam.virtual_poly_eval(preset("qM"), 1, 1.0) == pytest.approx(1.4884004884004884, rel=1e-13)


def test_meixner_r_factor():
    m = preset("M")
    for j in range(1, 4):
        assert fam.r_factor(m, j, 2.0, 2) == pytest.approx(0.4 ** (j - 1), rel=1e-14)
    with pytest.raises(ValueError):
        fam.r_factor(m, 4, 0.0, 2)


@pytest.mark.parametrize("fid", FAMILY_IDS)
def test_leading_coefficients(fid):
    p = preset(fid)
    c0, ct0, _, _ = fam.leading_coeffs(p, 0)
    assert c0 == 1.0
    for n in range(1, 5):
        cn = fam.leading_coeffs(p, n)[0]
        assert cn == pytest.approx(p.impl.c_n_universal(p, n), rel=1e-10)
    if fam.get_family(fid).twist_defined:
        t = fam.twist_params(p)
        for v in range(1, 4):
            assert fam.leading_coeffs(p, v)[1] == pytest.approx(fam.leading_coeffs(t, v)[0], rel=1e-10)


def test_hahn_leading_coeff_value():
    assert fam.leading_coeffs(preset("H"), 2)[0] == pytest.approx(0.21712962962962963, rel=1e-14)


def test_dual_hahn_betas():
    p = preset("dH")
    for n in range(4):
        _, _, b, bp = fam.leading_coeffs(p, n)
        assert b == 1.0 and bp == 1.0


@pytest.mark.parametrize("fid", [f for f in FINITE])
def test_boundary_zero(fid):
    p = preset(fid)
    assert fam.potential_B(p, float(p.N)) == pytest.approx(0.0, abs=1e-13)
