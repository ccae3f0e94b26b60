import numpy as np
import pytest

from qkzhyper import combin, integrate as ig, weightfn as wf
from qkzhyper.cli_params import sample_params
from qkzhyper.errors import ConvergenceError
from qkzhyper.numkernel import qpoch, theta

RNG = np.random.default_rng(12)


def draw(mod, rng=RNG):
    return mod * np.exp(1j * rng.uniform(0, 2 * np.pi))


def test_torus_basics():
    one = lambda t: np.ones(t.shape[:-1], dtype=complex)
    assert abs(ig.torus_integral(one, 2) - (2j * np.pi) ** 2) < 1e-12
    f = lambda t: t[..., 0]
    assert abs(ig.torus_integral(f, 1)) < 1e-13
    g = lambda t: 1.0 / (1 - 0.5 * t[..., 0])
    assert abs(ig.torus_integral(g, 1) - 2j * np.pi) < 1e-12 * 2 * np.pi


def test_torus_geometric_convergence():
    # doubling the grid reduces the self-difference by far more than 10x
    a, b, c, p = 0.35 + 0.1j, 0.42 - 0.06j, 1.3 + 0.5j, 0.18 + 0.04j
    f = lambda t: theta(c * t[..., 0], p) / (qpoch(a * t[..., 0], p) * qpoch(b / t[..., 0], p))
    v16 = ig.torus_integral(f, 1, ig.QuadratureSpec(16))
    v32 = ig.torus_integral(f, 1, ig.QuadratureSpec(32))
    v64 = ig.torus_integral(f, 1, ig.QuadratureSpec(64))
    assert abs(v64 - v32) < abs(v32 - v16) / 10


def test_n1l1_closed_form():
    a, b, c, p = 0.35 + 0.1j, 0.42 - 0.06j, 1.3 + 0.5j, 0.18 + 0.04j
    f = lambda t: theta(c * t[..., 0], p) / (qpoch(a * t[..., 0], p) * qpoch(b / t[..., 0], p))
    lhs = ig.torus_integral(f, 1, ig.QuadratureSpec(256))
    rhs = 2j * np.pi * qpoch(p * a / c, p) * qpoch(b * c, p) / qpoch(a * b, p)
    assert abs(lhs - rhs) / abs(rhs) < 1e-10


def test_qbeta_l1_collapse():
    # the s-product collapses at ell = 1
    a, b, c, p = draw(0.3), draw(0.35), draw(1.1), 0.2
    x = draw(0.4)
    rhs = ig.qbeta_rhs(a, b, c, x, p, 1)
    direct = 2j * np.pi * qpoch(b * c, p) * qpoch(p * a / c, p) / qpoch(a * b, p)
    assert abs(rhs - direct) / abs(direct) < 1e-13


@pytest.mark.parametrize("ell,M", [(1, 256), (2, 128)])
def test_qbeta_integral(ell, M):
    a, b, c, x, p = draw(0.35), draw(0.4), draw(1.2), draw(0.42), draw(0.2)
    lhs = ig.torus_integral(
        ig.qbeta_integrand(a, b, c, x, p, ell), ell, ig.QuadratureSpec(M), measure="dt"
    )
    assert abs(lhs - ig.qbeta_rhs(a, b, c, x, p, ell)) / abs(lhs) < 1e-10


def test_askey_roy_and_arl():
    a, b, c, al, be, p = draw(0.35), draw(0.4), draw(1.2), draw(0.3), draw(0.28), draw(0.2)
    lhs = ig.torus_integral(ig.askey_roy_integrand(a, b, c, al, be, p), 1, ig.QuadratureSpec(256))
    assert abs(lhs - ig.askey_roy_rhs(a, b, c, al, be, p)) / abs(lhs) < 1e-10
    x = draw(0.42)
    lhs = ig.torus_integral(
        ig.arl_integrand(a, b, c, al, be, x, p, 2), 2, ig.QuadratureSpec(128), measure="dt"
    )
    assert abs(lhs - ig.arl_rhs(a, b, c, al, be, x, p, 2)) / abs(lhs) < 1e-8


def test_multi_residue_basics():
    f = lambda t: 1.0 / ((t[..., 0] - 1.0) * (t[..., 1] - 2.0))
    plan = ig.ResiduePlan((1.0, 2.0), (0.1, 0.1))
    assert abs(ig.multi_residue(f, (1.0, 2.0), plan=plan) - 1.0) < 1e-12
    g = lambda t: np.exp(t[..., 0])
    assert abs(ig.multi_residue(g, (1.0,), plan=ig.ResiduePlan((1.0,), (0.1,)))) < 1e-12


def test_multi_residue_vs_geometric_series():
    # residue of 1/(1 - 0.5 t) / t at t = 2 equals -1 (geometric-series pole)
    f = lambda t: 1.0 / ((1 - 0.5 * t[..., 0]) * t[..., 0])
    r = ig.multi_residue(f, (2.0,), plan=ig.ResiduePlan((2.0,), (0.05,)))
    assert abs(r - (-1.0)) < 1e-12


def test_jackson_vs_torus():
    for n, ell in ((2, 1), (2, 2)):
        P = sample_params(5 * n + ell, n, ell, regime="jackson_overlap")
        IV = combin.index_vectors(n, ell)
        Wf = lambda t: wf.W_ell(IV[0], t, P, "subset")
        wfn = lambda t: wf.w_trig(IV[-1], t, P, "subset")
        I0 = ig.hyper_I(Wf, wfn, P, ig.QuadratureSpec(128))
        Ix, repx = ig.jackson_sum(Wf, wfn, P, side="x")
        Iy, repy = ig.jackson_sum(Wf, wfn, P, side="y")
        assert abs(Ix - I0) / abs(I0) < 1e-7
        assert abs(Iy - I0) / abs(I0) < 1e-7
        assert repx["tail_estimate"] < 1e-9 * abs(I0)


def test_jackson_regime_guard():
    P = sample_params(3, 2, 1)  # generic kappa: y-side condition fails
    Wf = lambda t: wf.W_ell((1, 0), t, P, "subset")
    wfn = lambda t: wf.w_trig((1, 0), t, P, "subset")
    with pytest.raises(ConvergenceError):
        ig.jackson_sum(Wf, wfn, P, side="y")


def test_jackson_l1_leading_residue():
    # cutoff 0 for (n, ell) = (1, 1): single residue at xi z reproduces the
    # leading term of the closed-form series
    P = sample_params(9, 1, 1, regime="jackson_overlap")
    Wf = lambda t: wf.W_ell((1,), t, P, "subset")
    wfn = lambda t: wf.w_trig((1,), t, P, "subset")
    I0 = ig.hyper_I(Wf, wfn, P, ig.QuadratureSpec(192))
    val, rep = ig.jackson_sum(Wf, wfn, P, side="x", cutoff=0)
    # the shell-0 term dominates with the overlap decay rate
    assert abs(val - I0) / abs(I0) < abs(P.p * P.kappa / P.xi_prod) * 1.5


def test_pairing_matrix_and_determinants():
    for n, ell, M in ((1, 1, 256), (2, 1, 192), (2, 2, 128)):
        P = sample_params(10 * n + ell, n, ell)
        idx, G = ig.pairing_matrix(P, spec=ig.QuadratureSpec(M))
        assert len(idx) == G.shape[0]
        det = np.linalg.det(G)
        rhs = ig.det_rhs(P, "mu_gen")
        assert abs(det - rhs) / abs(rhs) < 1e-8
    P0 = sample_params(77, 2, 1)
    Pp = P0.with_kappa(P0.kappa_special(+1))
    _, G = ig.pairing_matrix(Pp, restrict="first_zero", spec=ig.QuadratureSpec(192))
    assert abs(np.linalg.det(G) - ig.det_rhs(Pp, "mu_plus")) / abs(ig.det_rhs(Pp, "mu_plus")) < 1e-8


def test_ascj_sums():
    a, b, al, be = draw(0.3), draw(0.35), draw(0.28), draw(0.31)
    s, r, rep = ig.ascj_sum(a, b, al, be, 0.25, 1, 1)
    assert abs(s - r) / abs(r) < 1e-10
    s, r, rep = ig.ascj_sum(a, b, al, be, 0.25, 1, 2)
    assert abs(s - r) / abs(r) < 1e-8
    s, r, rep = ig.ascj_general_sum(a, b, al, be, draw(0.45), 0.25, 2)
    assert abs(s - r) / abs(r) < 1e-8
    with pytest.raises(ValueError):
        ig.ascj_sum(a, b, al, be, 0.25, 0, 1)


def test_qselberg_jackson():
    s, r, rep = ig.qselberg_jackson(draw(0.4), draw(0.2), 0.55, 0.3, 1)
    assert abs(s - r) / abs(r) < 1e-10
    s, r, rep = ig.qselberg_jackson(draw(0.4), draw(0.2), 0.55, 0.3, 2)
    assert abs(s - r) / abs(r) < 1e-8
    with pytest.raises(ConvergenceError):
        ig.qselberg_jackson(0.4, 0.9, 0.55, 0.3, 2)


def test_qselberg_X_recurrence():
    a, b, c, x, p = draw(0.35), draw(0.4), draw(1.2), draw(0.42), draw(0.2)
    for k in (1, 2):
        rat, closed = ig.qselberg_X_ratio(k, a, b, c, x, p, 2, ig.QuadratureSpec(128))
        assert abs(rat - closed) / abs(closed) < 1e-9


def test_shapovalov_diagonality():
    P = sample_params(123, 2, 1)
    Pinv = P.with_kappa(1 / P.kappa)
    IV = combin.index_vectors(2, 1)
    om = combin.perm_reversal(2)
    tau = (0, 1)
    S = np.zeros((2, 2), dtype=complex)
    for i, l in enumerate(IV):
        for j, mv in enumerate(IV):
            f1 = lambda t: wf.W_tau(l, t, P, tau, "subset")
            f2 = lambda t: wf.W_tau(mv, t, Pinv, om, "subset")
            S[i, j] = ig.shapovalov("elliptic", f1, f2, P)
    Ns = [wf.norm_constants(l, P, tau).N_l for l in IV]
    for i in range(2):
        assert abs(S[i, i] - Ns[i]) / abs(Ns[i]) < 1e-9
    assert max(abs(S[0, 1]), abs(S[1, 0])) < 1e-9 * min(abs(v) for v in Ns)


def test_residue_balance_rational():
    # ell = 1 residue theorem: for a function with one x-type and one y-type
    # pole, regular at 0 and O(t^-2) at infinity, the residues cancel
    P = sample_params(31, 1, 1)
    x0 = wf.special_point((1,), P, "x")[0]
    y0 = wf.special_point((1,), P, "y")[0]

    def f(t):
        tt = t[..., 0]
        return 1.0 / ((tt - x0) * (tt - y0))

    rep = ig.residue_balance_check(f, P)
    assert abs(rep["difference"]) < 1e-11 * abs(rep["x_sum"])


def test_residue_balance_omega():
    P = sample_params(98, 2, 2)
    om_f = ig.omega_elliptic(P)
    f1 = lambda t: wf.W_ell((1, 1), t, P, "subset")
    f2 = lambda t: wf.W_ell((2, 0), t, P.with_kappa(1 / P.kappa), "subset")
    g = lambda t: om_f(t) * f1(t) * f2(t)
    rep = ig.residue_balance_check(g, P)
    assert abs(rep["difference"]) / abs(rep["x_sum"]) < 1e-8


def test_residue_vs_annulus_quadrature():
    # independent oracle for the nested residue: for ell = 1 the residue at
    # x<l is the contour difference across the annulus containing only it
    P = sample_params(61, 2, 1)
    from qkzhyper.numkernel import DEFAULT_POLICY

    l = (1, 0)
    x0 = wf.special_point(l, P, "x")[0]
    Wf = lambda t: wf.W_ell(l, t, P, "subset")
    wfn = lambda t: wf.w_trig(l, t, P, "subset")
    phit = ig._phase_tilde(P, DEFAULT_POLICY)
    f = lambda t: phit(t) * wfn(t) * Wf(t)
    x1 = wf.special_point((0, 1), P, "x")[0]
    got = ig.multi_residue(f, np.array([x0]), params=P) + ig.multi_residue(
        f, np.array([x1]), params=P
    )
    r_out, r_in = abs(x0) * 1.12, abs(x0) * 0.9
    # the annulus contains exactly the two base x-points of this draw
    Iout = ig.torus_integral(f, 1, ig.QuadratureSpec(384, (r_out,)), measure="dt")
    Iin = ig.torus_integral(f, 1, ig.QuadratureSpec(384, (r_in,)), measure="dt")
    want = (Iout - Iin) / (2j * np.pi)
    assert abs(got - want) / abs(want) < 1e-9


def test_closed_rhs_dispatcher():
    P = sample_params(71, 2, 1)
    assert ig.closed_rhs("mu_gen", P) == ig.det_rhs(P, "mu_gen")
    assert ig.closed_rhs("detM", P) == ig.detM_rhs(P)
    assert ig.closed_rhs("detMq", P) == ig.detMq_rhs(P)
    v = ig.closed_rhs("qbeta", a=0.3, b=0.35, c=1.1, x=0.4, p=0.2, ell=2)
    assert v == ig.qbeta_rhs(0.3, 0.35, 1.1, 0.4, 0.2, 2)
    v = ig.closed_rhs("askey_roy", a=0.3, b=0.35, c=1.1, alpha=0.3, beta=0.28, p=0.2)
    assert v == ig.askey_roy_rhs(0.3, 0.35, 1.1, 0.3, 0.28, 0.2)
    with pytest.raises(ValueError):
        ig.closed_rhs("nonsense")
