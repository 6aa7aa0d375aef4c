import numpy as np
import pytest

from diracbc.clifford import build_rep, chiral_projectors
from diracbc.geometry import (BoundaryJet, extrinsic_data, flat_jet,
                              frame_jets, random_jet)
from diracbc.jets import Jet
from diracbc.symbols import (HomogeneousComponent, SymbolContext, SymbolSeries,
                             b_series, lambda_theta_residual, sample_rays,
                             series_for_jet, sharp_compose, theta_series)


def flat_ctx(n=3, e_rank=1, order=4, m=1.0):
    jet = flat_jet(n, e_rank, order, m)
    rep = build_rep(n, e_rank)
    frame = frame_jets(jet, rep)
    return SymbolContext(jet=jet, rep=rep, frame=frame)


# ---------------------------------------------------------------------------
# operator-composition oracle: differential symbols applied to poly * e^{iwx}


class PolyExp:
    """Vector-valued function sum_beta c_beta x^beta * exp(i w . x')."""

    def __init__(self, omega, coeffs):
        self.omega = np.asarray(omega, dtype=float)
        self.coeffs = dict(coeffs)

    def deriv(self, mu):
        out = {}
        for b, v in self.coeffs.items():
            if b[mu] > 0:
                nb = list(b)
                nb[mu] -= 1
                nb = tuple(nb)
                out[nb] = out.get(nb, 0) + b[mu] * v
            out[b] = out.get(b, 0) + 1j * self.omega[mu] * v
        return PolyExp(self.omega, out)

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        acc = 0
        for b, v in self.coeffs.items():
            mono = np.prod([xx ** e for xx, e in zip(x, b)])
            acc = acc + mono * v
        return acc * np.exp(1j * self.omega @ x)


def apply_component(comp, u: PolyExp, nt):
    """Apply op(C_r(x) xi^r) = C_r(x) (-i d)^r to u; requires flat metric and
    polynomial symbols (degree == |r| for every term)."""
    acc = {}
    for r, cjet in comp.terms.items():
        assert comp.degree - sum(r) == 0, "oracle needs polynomial symbols"
        du = u
        for mu in range(nt):
            for _ in range(r[mu]):
                du = du.deriv(mu)
        du = PolyExp(du.omega, {b: (-1j) ** sum(r) * v for b, v in du.coeffs.items()})
        for bc, cv in cjet.coeffs.items():
            assert all(b == 0 for b in bc[nt:]), "x^n dependence not supported"
            for bu, vu in du.coeffs.items():
                key = tuple(a + b for a, b in zip(bc[: nt], bu))
                acc[key] = acc.get(key, 0) + cv @ vu if key in acc else cv @ vu
    return PolyExp(u.omega, acc)


def poly_symbol(ctx, entries):
    """Build a polynomial symbol component dict {degree: component} from
    entries [(r, x_beta, matrix)], one homogeneous component per |r|."""
    comps = {}
    for r, beta, mat in entries:
        d = sum(r)
        comp = comps.setdefault(d, HomogeneousComponent(ctx, d))
        j = comp.terms.get(r)
        if j is None:
            j = Jet(ctx.n, ctx.jet.order, (ctx.nmat, ctx.nmat))
            comp.terms[r] = j
        full_beta = beta + (0,)
        j.coeffs[full_beta] = j.coeffs.get(full_beta, 0) + np.asarray(mat, dtype=complex)
    return SymbolSeries(ctx, comps)


def test_sharp_composition_against_operator_algebra():
    rng = np.random.default_rng(3)
    ctx = flat_ctx(n=3, order=6)
    nm = ctx.nmat

    def rand():
        return rng.standard_normal((nm, nm)) + 1j * rng.standard_normal((nm, nm))

    p = poly_symbol(ctx, [((2, 0), (0, 0), rand()), ((1, 1), (1, 0), rand()),
                          ((0, 1), (0, 2), rand()), ((0, 0), (1, 1), rand())])
    q = poly_symbol(ctx, [((1, 0), (0, 1), rand()), ((0, 0), (2, 0), rand()),
                          ((0, 2), (0, 0), rand())])
    comp = sharp_compose(p, q, depth=10)

    u = PolyExp([0.7, -1.3], {(0, 0): rng.standard_normal(nm) + 0j,
                              (1, 0): rng.standard_normal(nm) + 0j,
                              (0, 2): rng.standard_normal(nm) + 0j})
    # op(p)(op(q) u) vs op(p # q) u at sample points
    qu = PolyExp(u.omega, {})
    for d, c in q.components.items():
        part = apply_component(c, u, 2)
        for b, v in part.coeffs.items():
            qu.coeffs[b] = qu.coeffs.get(b, 0) + v
    pqu = PolyExp(u.omega, {})
    for d, c in p.components.items():
        part = apply_component(c, qu, 2)
        for b, v in part.coeffs.items():
            pqu.coeffs[b] = pqu.coeffs.get(b, 0) + v
    comp_u = PolyExp(u.omega, {})
    for d, c in comp.components.items():
        part = apply_component(c, u, 2)
        for b, v in part.coeffs.items():
            comp_u.coeffs[b] = comp_u.coeffs.get(b, 0) + v
    for x in ([0.1, -0.2], [0.0, 0.0], [0.3, 0.05]):
        a = pqu.eval(x)
        bvec = comp_u.eval(x)
        assert np.max(np.abs(a - bvec)) < 1e-10 * max(1.0, np.max(np.abs(a)))


def test_composition_with_identity_and_xindependent():
    ctx = flat_ctx(n=3, order=4)
    ident = HomogeneousComponent(ctx, 0)
    ident.terms[(0, 0)] = Jet.constant(np.eye(ctx.nmat), ctx.n, ctx.jet.order)
    iser = SymbolSeries(ctx, {0: ident})

    norm = HomogeneousComponent(ctx, 1)
    norm.terms[(0, 0)] = Jet.constant(np.eye(ctx.nmat), ctx.n, ctx.jet.order)
    nser = SymbolSeries(ctx, {1: norm})

    # |xi| # |xi| = |xi|^2 exactly, x-independent
    sq = sharp_compose(nser, nser, depth=4)
    assert sq.component(2).terms[(0, 0)].coefficient((0, 0, 0))[0, 0] == 1.0
    for d in (1, 0, -1):
        assert sq.component(d).max_norm() < 1e-14
    # identity composes trivially both ways
    for left, right in ((iser, nser), (nser, iser)):
        c = sharp_compose(left, right, depth=4)
        assert (c.component(1) - norm).max_norm() < 1e-14


def test_homogeneity_by_scaling():
    jet = random_jet(3, 1, 4, 1.0, seed=2)
    rep = build_rep(3)
    _, th = series_for_jet(jet, rep, K=2)
    ray = np.array([0.3, -0.8])
    for lam in (0.5, 2.0, 7.0):
        for d, comp in th.components.items():
            a = comp.eval(ray * lam)
            b = comp.eval(ray) * lam ** d
            assert np.max(np.abs(a - b)) < 1e-11 * max(1, np.max(np.abs(b)))


# ---------------------------------------------------------------------------
# flat closed forms


def test_flat_b_series_matches_sqrt_expansion():
    m = 1.3
    jet = flat_jet(3, 1, 5, m)
    rep = build_rep(3)
    frame = frame_jets(jet, rep)
    b = b_series(jet, frame, rep, K=4)
    ray = np.array([0.6, 0.8]) / np.hypot(0.6, 0.8)
    ident = np.eye(rep.twisted_rank)
    # b = -sqrt(|xi|^2 - m^2) = -|xi| (1 - t/2 - t^2/8 - t^3/16 - ...) with t = m^2/|xi|^2
    expect = {1: -1.0, 0: 0.0, -1: m ** 2 / 2, -2: 0.0, -3: m ** 4 / 8}
    for d, c in expect.items():
        got = b.component(d).eval(ray)
        assert np.max(np.abs(got - c * ident)) < 1e-12, d


def test_flat_theta_series():
    m = 0.7
    jet = flat_jet(3, 1, 5, m)
    rep = build_rep(3)
    b, th = series_for_jet(jet, rep, K=3)
    proj = chiral_projectors(rep)
    ray = np.array([1.0, 0.0])
    gn = rep.gamma_t(3)
    theta0 = -1j * gn @ rep.gamma_t(1) @ proj.b_plus_t()
    assert np.max(np.abs(th.component(0).eval(ray) - theta0)) < 1e-12
    theta1 = m * gn @ proj.b_plus_t()
    assert np.max(np.abs(th.component(-1).eval(ray) - theta1)) < 1e-12
    theta2 = m ** 2 / 2 * theta0
    assert np.max(np.abs(th.component(-2).eval(ray) - theta2)) < 1e-12


# ---------------------------------------------------------------------------
# paper structure of b_0 and the higher components


def test_b0_constant_connection_flat_metric():
    # b_0^{--} = i g^{ab} A_a xihat_b on the minus block when g flat, A constant
    n, e_rank = 3, 2
    jet = flat_jet(n, e_rank, 4, 1.0)
    rng = np.random.default_rng(8)
    for mu in range(n - 1):
        v = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        jet.A[mu].coeffs[(0, 0, 0)] = (v - v.conj().T) / 2
    rep = build_rep(n, e_rank)
    frame = frame_jets(jet, rep)
    b = b_series(jet, frame, rep, K=1)
    proj = chiral_projectors(rep)
    bm = proj.b_minus_t()
    for ray in sample_rays(2, 4, seed=1):
        got = b.component(0).block("-", "-").eval(ray)
        acc = np.zeros_like(got)
        for mu in range(2):
            acc += 1j * ray[mu] / np.linalg.norm(ray) * np.kron(
                np.eye(rep.rank), jet.A[mu].coefficient((0, 0, 0)))
        expected = bm @ acc @ bm
        assert np.max(np.abs(got - expected)) < 1e-12


def test_b0_even_part_is_scalar_and_matches_formula():
    # (b_0^{--})^even = (n-1)/2 H - 1/4 d_n g^{ab} xihat_a xihat_b
    jet = random_jet(3, 1, 3, 1.0, seed=17)
    rep = build_rep(3)
    frame = frame_jets(jet, rep)
    b = b_series(jet, frame, rep, K=1)
    ext = extrinsic_data(jet)
    n = jet.n
    H0 = float(np.real(ext.H.coefficient((0,) * n)))
    ginv = jet.g.inv()
    dng_inv = ginv.deriv(n - 1).coefficient((0,) * n)
    g0inv = ginv.coefficient((0,) * n)
    for ray in sample_rays(2, 4, seed=2):
        xihat = ray / np.sqrt(ray @ g0inv @ ray)
        scalar = (n - 1) / 2 * H0 - 0.25 * xihat @ dng_inv @ xihat
        got = b.component(0).block("-", "-").even().eval(ray)
        bm = chiral_projectors(rep).b_minus_t()
        assert np.max(np.abs(got - scalar * bm)) < 1e-11


@pytest.mark.parametrize("k", [0, 1, 2])
def test_b_even_highest_term(k):
    # zero all data except the (k+2)-nd normal derivative of g, m=0:
    # (b^{--}_{-(k+1)})^even == -(1/2^{k+3}) d_n^{k+2} g^{ab} xihat_ab / |xi|^{k+1}
    n = 3
    order = k + 3
    g = Jet(n, order, (2, 2))
    g.coeffs[(0,) * n] = np.eye(2)
    M = np.array([[0.31, 0.12], [0.12, -0.22]])
    beta = [0] * n
    beta[n - 1] = k + 2
    g.coeffs[tuple(beta)] = M  # monomial coefficient: d_n^{k+2} g = (k+2)! M
    jet = BoundaryJet(n, 1, order, 0.0, g, [Jet(n, order, (1, 1)) for _ in range(2)])
    rep = build_rep(n)
    frame = frame_jets(jet, rep)
    b = b_series(jet, frame, rep, K=k + 2)
    import math
    dgk2 = math.factorial(k + 2) * M        # d_n^{k+2} g at x0
    dgk2_inv = -dgk2                         # d_n^{k+2} g^{ab} at x0 (g = I here)
    proj = chiral_projectors(rep)
    bm = proj.b_minus_t()
    for ray in sample_rays(2, 3, seed=3):
        xihat = ray / np.linalg.norm(ray)
        scalar = -(1.0 / 2 ** (k + 3)) * xihat @ dgk2_inv @ xihat
        got = b.component(-(k + 1)).block("-", "-").even().eval(xihat)
        assert np.max(np.abs(got - scalar * bm)) < 1e-11, k


@pytest.mark.parametrize("k", [0, 1, 2])
def test_b_cross_block_even_is_gamma_n_tangential(k):
    # at x0 in the parallel frame with A(x0)=0, (b^{-+}_{-(k+1)})^even lies in
    # gamma^n . span{gamma^a (x) End(E)}
    n, e_rank = 3, 1
    jet = random_jet(n, e_rank, k + 3, 1.0, seed=40 + k)
    rep = build_rep(n, e_rank)
    frame = frame_jets(jet, rep, parallel_at_x0=True, gauge_null_at_x0=True)
    b = b_series(jet, frame, rep, K=k + 1)
    gn = rep.gamma_t(n)
    basis = []
    for a in range(1, n):
        for p in range(e_rank):
            for q in range(e_rank):
                e = np.zeros((e_rank, e_rank))
                e[p, q] = 1
                basis.append(np.kron(rep.gammas[a - 1], e))
    basis = np.stack(basis).reshape(len(basis), -1).T
    for ray in sample_rays(n - 1, 4, seed=4):
        got = b.component(-(k + 1)).block("-", "+").even().eval(ray)
        target = (-gn @ got).reshape(-1)  # gamma^n inverse = -gamma^n
        coef, res, *_ = np.linalg.lstsq(basis, target, rcond=None)
        resid = np.linalg.norm(basis @ coef - target)
        assert resid < 1e-10 * max(1.0, np.linalg.norm(target)), k


def test_theta_minus1_odd_warped_formula():
    # theta_-1 odd = i/(4|xi|) gamma^n (g^{al} g^{db} h^m_b d_n g_{md}
    #                                   + d_n g^{ab} h^l_b) gamma^b xihat_{abl}
    jet = random_jet(3, 1, 3, 1.0, seed=21)
    rep = build_rep(3)
    frame = frame_jets(jet, rep)
    b = b_series(jet, frame, rep, K=2)
    th = theta_series(b, jet, frame, rep, K=2)
    n = jet.n
    z = (0,) * n
    g0 = jet.g.coefficient(z)
    ginv0 = jet.g.inv().coefficient(z)
    dng = jet.g.deriv(n - 1).coefficient(z)
    dnginv = jet.g.inv().deriv(n - 1).coefficient(z)
    h0 = frame.h.coefficient(z)
    gn = rep.gamma_t(n)
    proj = chiral_projectors(rep)
    for ray in sample_rays(2, 5, seed=5):
        xihat = ray / np.sqrt(ray @ ginv0 @ ray)
        acc = np.zeros((rep.twisted_rank, rep.twisted_rank), dtype=complex)
        for bfr in range(2):
            t1 = np.einsum("al,db,m->albdm", ginv0, ginv0, h0[:, bfr])
            tens = np.einsum("albdm,md->abl", t1, dng)
            tens = tens + np.einsum("ab,l->abl", dnginv, h0[:, bfr])
            scal = np.einsum("abl,a,b,l->", tens, xihat, xihat, xihat)
            acc += 0.25j * scal * gn @ rep.gamma_t(bfr + 1)
        expected = acc @ proj.b_plus_t()
        got = th.component(-1).odd().eval(xihat)
        assert np.max(np.abs(got - expected)) < 1e-11


# ---------------------------------------------------------------------------
# relation residual, gauge equivariance, conformal check


@pytest.mark.parametrize("n,e_rank", [(2, 1), (3, 1), (3, 2), (4, 1)])
def test_lambda_theta_residual_random(n, e_rank):
    jet = random_jet(n, e_rank, 4, 1.0, seed=50 + n + e_rank)
    rep = build_rep(n, e_rank)
    frame = frame_jets(jet, rep)
    b = b_series(jet, frame, rep, K=3)
    th = theta_series(b, jet, frame, rep, K=3)
    res = lambda_theta_residual(b, th, jet, frame, rep, K=3)
    for d, v in res.items():
        assert v < 1e-10, (d, v)


def test_residual_detects_perturbation():
    jet = random_jet(3, 1, 4, 1.0, seed=60)
    rep = build_rep(3)
    frame = frame_jets(jet, rep)
    b = b_series(jet, frame, rep, K=2)
    th = theta_series(b, jet, frame, rep, K=2)
    pert = th.component(-1).copy()
    pert.terms[(0, 0)] = (pert.terms.get((0, 0)) or
                          Jet(jet.n, jet.order, (rep.twisted_rank,) * 2))
    bump = Jet.constant(1e-3 * np.eye(rep.twisted_rank), jet.n, jet.order)
    th.components[-1] = pert + HomogeneousComponent(
        b.ctx, -1, {(0, 0): bump})
    res = lambda_theta_residual(b, th, jet, frame, rep, K=1)
    assert res[0] > 1e-4


def test_theta_gauge_equivariance_symbolic():
    jet = random_jet(3, 2, 3, 1.0, seed=71)
    rep = build_rep(3, 2)
    rng = np.random.default_rng(1)
    x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    u, _ = np.linalg.qr(x)
    jconj = jet.gauge_conjugated(u)
    _, th1 = series_for_jet(jet, rep, K=2)
    _, th2 = series_for_jet(jconj, rep, K=2)
    ulift = np.kron(np.eye(rep.rank), u)
    for d in (0, -1, -2):
        for ray in sample_rays(2, 3, seed=6):
            a = ulift.conj().T @ th1.component(d).eval(ray) @ ulift
            bmat = th2.component(d).eval(ray)
            assert np.max(np.abs(a - bmat)) < 1e-10, d


def test_conformal_invariance_of_low_degrees_massless():
    # g = e^{2u} gbar with u(x0)=0 and du(x0)=0: theta degrees 0, -1 agree at x0
    n = 3
    base = random_jet(n, 1, 3, 0.0, seed=81)
    u = Jet(n, 3, ())
    u.coeffs[(2, 0, 0)] = np.asarray(0.4)
    u.coeffs[(0, 1, 1)] = np.asarray(-0.3)
    u.coeffs[(0, 0, 2)] = np.asarray(0.25)
    factor = u.scale(2.0).expm()
    g_scaled = factor * base.g
    scaled = BoundaryJet(n, 1, 3, 0.0, g_scaled, [a.copy() for a in base.A])
    rep = build_rep(n)
    _, th1 = series_for_jet(base, rep, K=1, parallel_at_x0=False)
    _, th2 = series_for_jet(scaled, rep, K=1, parallel_at_x0=False)
    for d in (0, -1):
        for ray in sample_rays(2, 4, seed=7):
            a = th1.component(d).eval(ray)
            bmat = th2.component(d).eval(ray)
            assert np.max(np.abs(a - bmat)) < 1e-11, d
