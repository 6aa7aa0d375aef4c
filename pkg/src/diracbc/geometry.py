"""Metric/connection jets at a boundary point in boundary normal coordinates.

Jets are based at x0 = 0 with variables (x^1 .. x^{n-1}, x^n): tangential
coordinates first, the normal coordinate last.  The metric has the boundary
normal form g_nn = 1, g_{alpha n} = 0, g_{alpha beta}(x', x^n), and the
connection is in a gauge with A_n = 0.  The inward unit normal is e_n = d_n;
with that convention the second fundamental form is II = -1/2 d_n g.

The derived quantities feed the symbol recursions: an orthonormal frame that
is parallel along d_n (so the twisted connection annihilates the normal
direction), Levi-Civita coefficients, the twisted spin connection, extrinsic
curvature, and the Weitzenboeck curvature endomorphism.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .clifford import GammaRep, spin_generator
from .jets import InsufficientOrder, Jet, multi_indices

__all__ = ["BoundaryJet", "FrameJet", "ExtrinsicData", "frame_jets",
           "extrinsic_data", "weitzenbock", "weitzenbock_jet",
           "scalar_curvature_boundary", "random_jet", "jet_to_json",
           "jet_from_json", "INWARD_NORMAL_SIGN", "SFF_FROM_NORMAL_METRIC_DERIV"]

# Sign conventions shared with `recovery` so the round trip is self-consistent:
# inward-pointing unit normal, and II = SFF_FROM_NORMAL_METRIC_DERIV * d_n g.
INWARD_NORMAL_SIGN = +1
SFF_FROM_NORMAL_METRIC_DERIV = -0.5


@dataclass
class BoundaryJet:
    """All metric/connection derivative data at a boundary point.

    g: Jet over n variables with (n-1, n-1) symmetric values.
    A: list of n-1 Jets with (e_rank, e_rank) anti-Hermitian values (A_n = 0
       implicit and not stored).
    """

    n: int
    e_rank: int
    order: int
    m: float
    g: Jet
    A: list[Jet]

    def __post_init__(self):
        self.validate()

    def validate(self, tol: float = 1e-10):
        if self.n < 2:
            raise ValueError("dimension must be >= 2")
        g0 = self.g.coefficient((0,) * self.n)
        if np.max(np.abs(g0 - g0.T)) > tol:
            raise ValueError("g is not symmetric at the base point")
        w = np.linalg.eigvalsh((g0 + g0.T) / 2)
        if np.min(w) <= 0:
            raise ValueError("g is not positive definite at the base point")
        for b, v in self.g.coeffs.items():
            if np.max(np.abs(v - np.swapaxes(v, -1, -2))) > tol:
                raise ValueError(f"g coefficient {b} is not symmetric")
        if len(self.A) != self.n - 1:
            raise ValueError("expected one A component per tangential direction")
        for a in self.A:
            for b, v in a.coeffs.items():
                if np.max(np.abs(v + v.conj().T)) > tol:
                    raise ValueError(f"A coefficient {b} is not anti-Hermitian")

    @property
    def nt(self) -> int:
        """Number of tangential directions."""
        return self.n - 1

    def g_inv(self) -> Jet:
        return self.g.inv()

    def scaled_metric(self, factor: float) -> "BoundaryJet":
        return BoundaryJet(self.n, self.e_rank, self.order, self.m,
                           self.g.scale(factor), [a.copy() for a in self.A])

    def gauge_conjugated(self, u: np.ndarray) -> "BoundaryJet":
        """Conjugate the connection by a constant unitary u on the auxiliary bundle."""
        uh = u.conj().T
        conj = [a.map_values(lambda v: uh @ v @ u) for a in self.A]
        return BoundaryJet(self.n, self.e_rank, self.order, self.m,
                           self.g.copy(), conj)


@dataclass
class FrameJet:
    """Orthonormal frame data derived from a BoundaryJet.

    h: Jet (n-1, n-1): e_a = h^alpha_a d_alpha (columns index frame vectors);
       the frame satisfies nabla_{d_n} e_a = 0 (parallel along the normal).
    omega: Jet (n, n, n): omega[mu, i, j] = g(e_i, nabla_{d_mu} e_j) in the
       *full* frame (e_a, e_n), coordinate differentiation direction mu.
    kappa: per tangential mu, twisted spin connection kappa_A(d_mu) as an
       (N_S * N_E)-square Jet; kappa_A(d_n) = 0 by construction.
    christoffel: Jet (n, n, n): Gamma^i_{j k}.
    """

    jet: BoundaryJet
    rep: GammaRep
    h: Jet
    h_inv: Jet
    omega: Jet
    kappa: list[Jet]
    christoffel: Jet
    g_inv: Jet
    A_eff: list[Jet]
    mean_curvature: Jet
    parallel_at_x0: bool = False
    gauge_null_at_x0: bool = False
    frame_rotation: Jet | None = field(default=None, repr=False)
    gauge_rotation: Jet | None = field(default=None, repr=False)

    def h_full(self) -> Jet:
        """Full (n, n) frame matrix with the normal column appended."""
        n = self.jet.n
        out = Jet(self.jet.n, self.h.order, (n, n))
        for b, v in self.h.coeffs.items():
            m = np.zeros((n, n), dtype=v.dtype)
            m[: n - 1, : n - 1] = v
            out.coeffs[b] = m
        base = out.coeffs.setdefault((0,) * n, np.zeros((n, n)))
        base[n - 1, n - 1] += 1.0
        return out


def _full_metric(jet: BoundaryJet) -> Jet:
    n = jet.n
    out = Jet(n, jet.g.order, (n, n))
    for b, v in jet.g.coeffs.items():
        m = np.zeros((n, n), dtype=v.dtype)
        m[: n - 1, : n - 1] = v
        out.coeffs[b] = m
    base = out.coeffs.setdefault((0,) * n, np.zeros((n, n)))
    base[n - 1, n - 1] += 1.0
    return out


def christoffel_jet(jet: BoundaryJet) -> Jet:
    """Gamma^i_{jk} as an (n, n, n) jet of order K-1."""
    n = jet.n
    gfull = _full_metric(jet)
    ginv = gfull.inv()
    if jet.order < 1:
        raise InsufficientOrder("Christoffel symbols need at least one jet order")
    dg = [gfull.deriv(mu) for mu in range(n)]
    order = jet.order - 1
    ginv_t = ginv.truncated(order)
    # sym[l, j, k] = 1/2 (d_j g_{lk} + d_k g_{jl} - d_l g_{jk})
    sym = Jet(n, order, (n, n, n))
    for j in range(n):
        for b, v in dg[j].coeffs.items():
            arr = sym.coeffs.setdefault(b, np.zeros((n, n, n)))
            arr[:, j, :] += 0.5 * v          # d_j g_{lk}
            arr[:, :, j] += 0.5 * v.T        # d_k g_{jl} at k = j slot
            arr[j, :, :] -= 0.5 * v          # -d_l g_{jk} at l = j slot
    out = Jet(n, order, (n, n, n))
    for b1, v1 in ginv_t.coeffs.items():
        for b2, v2 in sym.coeffs.items():
            tot = tuple(a + b for a, b in zip(b1, b2))
            if sum(tot) > order:
                continue
            term = np.einsum("il,ljk->ijk", v1, v2)
            arr = out.coeffs.setdefault(tot, np.zeros((n, n, n)))
            arr += term.real if not np.iscomplexobj(arr) else term
    out.coeffs = {b: v for b, v in out.coeffs.items() if np.any(v != 0)}
    return out


def _normal_parallel_frame(jet: BoundaryJet) -> Jet:
    """Frame h with h(x',0) the inverse symmetric root of g|_{boundary} and
    d_n h = -1/2 g^{-1} (d_n g) h (parallel transport along the normal)."""
    n = jet.n
    K = jet.order
    g_bdry = jet.g.restrict(n - 1)
    h = g_bdry.sqrt_spd().inv()  # order K, no normal dependence yet
    ginv = jet.g.inv()
    dng = jet.g.deriv(n - 1)
    rhs_factor = (ginv.truncated(K - 1) * dng).scale(-0.5)  # order K-1
    # build normal Taylor slices iteratively: (j+1) h_{j+1} = [rhs_factor * h]_j
    for jord in range(0, K):
        prod = rhs_factor * h
        for b, v in prod.coeffs.items():
            if b[n - 1] == jord and sum(b) + 1 <= K:
                nb = list(b)
                nb[n - 1] += 1
                nb = tuple(nb)
                inc = v / (jord + 1)
                if nb in h.coeffs:
                    h.coeffs[nb] = h.coeffs[nb] + inc
                else:
                    h.coeffs[nb] = inc
    return h


def _omega_jet(jet: BoundaryJet, h: Jet, christ: Jet) -> tuple[Jet, Jet]:
    """omega[mu, i, j] = g(e_i, nabla_{d_mu} e_j) for the full frame, plus h^-1."""
    n = jet.n
    order = min(h.order - 1, christ.order)
    gfull = _full_metric(jet).truncated(order)
    # full frame matrix jet
    hf = Jet(n, h.order, (n, n))
    for b, v in h.coeffs.items():
        m = np.zeros((n, n), dtype=v.dtype)
        m[: n - 1, : n - 1] = v
        hf.coeffs[b] = m
    base = hf.coeffs.setdefault((0,) * n, np.zeros((n, n)))
    base[n - 1, n - 1] += 1.0

    dh = [hf.deriv(mu).truncated(order) for mu in range(n)]
    hf_t = hf.truncated(order)
    out = Jet(n, order, (n, n, n))
    # nabla_{d_mu} e_j = (d_mu h^nu_j + h^lam_j Gamma^nu_{mu lam}) d_nu
    # omega[mu, i, j] = h^sig_i g_{sig nu} (...)^nu_j
    comps: dict[tuple[int, int, int], Jet] = {}
    christ_t = christ.truncated(order)
    for mu in range(n):
        # cov[nu, j] jet
        cov = dh[mu]
        gam = Jet(n, order, (n, n))
        for b, v in christ_t.coeffs.items():
            gam.coeffs[b] = v[:, mu, :]
        cov = cov + gam * hf_t
        m1 = gfull * cov            # (n, n): g_{sig nu} cov^nu_j
        mfin = hf_t.transpose() * m1  # (n, n): h^sig_i g cov, via h^T
        for b, v in mfin.coeffs.items():
            out.coeffs.setdefault(b, np.zeros((n, n, n), dtype=complex))
            out.coeffs[b][mu, :, :] = out.coeffs[b][mu, :, :] + v
    out.coeffs = {b: v for b, v in out.coeffs.items() if np.any(v != 0)}
    return out, hf


def _kappa_jets(jet: BoundaryJet, rep: GammaRep, omega: Jet,
                A_eff: list[Jet]) -> list[Jet]:
    """Twisted spin connection kappa_A(d_mu) for tangential mu (and check n)."""
    n = jet.n
    order = omega.order
    nt = rep.twisted_rank
    kappas = []
    ide = np.eye(jet.e_rank)
    for mu in range(n):
        kj = Jet(n, order, (nt, nt))
        for b, v in omega.coeffs.items():
            acc = np.zeros((nt, nt), dtype=complex)
            for i in range(n):
                for j in range(i + 1, n):
                    if v[mu, i, j] != 0:
                        acc -= 0.5 * v[mu, i, j] * np.kron(
                            rep.gammas[i] @ rep.gammas[j], ide)
            if np.any(acc != 0):
                kj.coeffs[b] = acc
        if mu < n - 1:
            amu = A_eff[mu].truncated(order)
            for b, v in amu.coeffs.items():
                lifted = np.kron(np.eye(rep.rank), v)
                if b in kj.coeffs:
                    kj.coeffs[b] = kj.coeffs[b] + lifted
                else:
                    kj.coeffs[b] = lifted
        kappas.append(kj)
    return kappas


def frame_jets(jet: BoundaryJet, rep: GammaRep, parallel_at_x0: bool = False,
               gauge_null_at_x0: bool = False) -> FrameJet:
    """Construct the orthonormal frame jets and the twisted spin connection.

    With parallel_at_x0, the boundary frame is rotated so the intrinsic
    connection coefficients omega^a_{bc} vanish at the base point; with
    gauge_null_at_x0 the auxiliary frame is additionally rotated so A(x0) = 0,
    making kappa_A^{++}, kappa_A^{--} vanish at x0.
    """
    n = jet.n
    if jet.order < 1:
        raise InsufficientOrder("frame jets need at least one metric order")
    if rep.n != jet.n or rep.e_rank != jet.e_rank:
        raise ValueError("rep dimensions do not match the jet")
    christ = christoffel_jet(jet)
    h = _normal_parallel_frame(jet)
    rotation = None
    gauge_rot = None
    A_eff = [a.copy() for a in jet.A]

    if parallel_at_x0:
        omega0, _ = _omega_jet(jet, h, christ)
        w0 = omega0.coefficient((0,) * n)
        h0 = h.coefficient((0,) * n)
        hinv0 = np.linalg.inv(h0)
        # For the rotated frame e~_c = R^b_c e_b with R(x0) = I, the intrinsic
        # coefficients shift by e_b(R^a_c); choose d_mu R(x0) so that
        # e_b(R^a_c)(x0) = -omega^a_{bc}(x0) over tangential indices.
        gen = Jet(n, jet.order, (n - 1, n - 1))
        for mu in range(n - 1):
            m = np.zeros((n - 1, n - 1))
            for bidx in range(n - 1):
                # omega^a_c(e_b) = h^nu_b omega[nu, a, c]
                wb = np.zeros((n - 1, n - 1))
                for nu in range(n - 1):
                    wb += h0[nu, bidx] * w0[nu, : n - 1, : n - 1].real
                m += -hinv0[bidx, mu] * wb
            beta = [0] * n
            beta[mu] = 1
            if np.any(m != 0):
                gen.coeffs[tuple(beta)] = m
        rotation = gen.expm()
        h = h * rotation.truncated(h.order)

    omega, hf = _omega_jet(jet, h, christ)

    if gauge_null_at_x0:
        a0 = [a.coefficient((0,) * n) for a in jet.A]
        gen = Jet(n, jet.order, (jet.e_rank, jet.e_rank))
        for mu in range(n - 1):
            beta = [0] * n
            beta[mu] = 1
            if np.any(a0[mu] != 0):
                gen.coeffs[tuple(beta)] = -a0[mu]
        gauge_rot = gen.expm()
        u = gauge_rot
        u_inv = u.adjoint()  # unitary jet: inverse = adjoint
        A_eff = []
        for mu in range(n - 1):
            du = u.deriv(mu)
            a_new = u_inv.truncated(du.order) * (jet.A[mu].truncated(du.order) *
                                                 u.truncated(du.order)) + \
                u_inv.truncated(du.order) * du
            A_eff.append(a_new)

    kappas = _kappa_jets(jet, rep, omega, A_eff)
    # kappa_A(d_n) must vanish: the frame is parallel along d_n and A_n = 0
    if not kappas[n - 1].cleaned(1e-10).is_zero:
        raise ValueError("normal spin connection failed to vanish; frame bug")

    ginv = jet.g.inv()
    ext = extrinsic_data(jet)
    return FrameJet(jet=jet, rep=rep, h=h, h_inv=h.inv(), omega=omega,
                    kappa=kappas, christoffel=christ, g_inv=ginv,
                    A_eff=A_eff, mean_curvature=ext.H,
                    parallel_at_x0=parallel_at_x0,
                    gauge_null_at_x0=gauge_null_at_x0,
                    frame_rotation=rotation, gauge_rotation=gauge_rot)


@dataclass
class ExtrinsicData:
    """Second fundamental form, mean curvature, and traceless part as jets."""

    II: Jet
    H: Jet
    Sigma: Jet


def extrinsic_data(jet: BoundaryJet) -> ExtrinsicData:
    """II = -1/2 d_n g (inward normal), H = trace_g II/(n-1), Sigma = II - H g."""
    if jet.order < 1:
        raise InsufficientOrder("extrinsic data needs one normal derivative")
    n = jet.n
    II = jet.g.deriv(n - 1).scale(SFF_FROM_NORMAL_METRIC_DERIV)
    ginv = jet.g.inv().truncated(II.order)
    trace = Jet(n, II.order, ())
    prod = ginv * II  # matrix product; trace of it is g^{ab} II_{ba}
    for b, v in prod.coeffs.items():
        t = np.trace(v)
        if t != 0:
            trace.coeffs[b] = np.asarray(t)
    H = trace.scale(1.0 / (n - 1))
    Sigma = II - H * jet.g.truncated(II.order)
    return ExtrinsicData(II=II, H=H, Sigma=Sigma)


def weitzenbock_jet(jet: BoundaryJet, rep: GammaRep, frame: FrameJet) -> Jet:
    """Weitzenboeck curvature endomorphism sum_{i<j} gamma_i gamma_j F_A(e_i, e_j)."""
    if jet.order < 1:
        raise InsufficientOrder("curvature needs one jet order")
    n = jet.n
    order = jet.order - 1
    nt = rep.twisted_rank
    A = [a.truncated(jet.order) for a in frame.A_eff]
    # F(d_mu, d_nu) with A_n = 0
    F: dict[tuple[int, int], Jet] = {}
    for mu in range(n):
        for nu in range(mu + 1, n):
            amu = A[mu] if mu < n - 1 else None
            anu = A[nu] if nu < n - 1 else None
            term = Jet(n, order, (jet.e_rank, jet.e_rank))
            if anu is not None:
                term = term + anu.deriv(mu)
            if amu is not None:
                term = term - amu.deriv(nu)
            if amu is not None and anu is not None:
                term = term + (amu.truncated(order) * anu.truncated(order)
                               - anu.truncated(order) * amu.truncated(order))
            F[(mu, nu)] = term
    hf = frame.h_full().truncated(order)
    out = Jet(n, order, (nt, nt))
    for i in range(n):
        for j in range(i + 1, n):
            gij = np.kron(rep.gammas[i] @ rep.gammas[j], np.eye(jet.e_rank))
            # F(e_i, e_j) = h^mu_i h^nu_j F_{mu nu}
            acc = Jet(n, order, (jet.e_rank, jet.e_rank))
            for (mu, nu), fj in F.items():
                coeff = hf.entry(mu, i) * hf.entry(nu, j) - hf.entry(nu, i) * hf.entry(mu, j)
                acc = acc + coeff * fj
            for b, v in acc.coeffs.items():
                lifted = gij @ np.kron(np.eye(rep.rank), v)
                if b in out.coeffs:
                    out.coeffs[b] = out.coeffs[b] + lifted
                else:
                    out.coeffs[b] = lifted
    return out


def weitzenbock(jet: BoundaryJet, rep: GammaRep) -> np.ndarray:
    """F_A curvature endomorphism evaluated at the base point."""
    frame = frame_jets(jet, rep)
    return weitzenbock_jet(jet, rep, frame).coefficient((0,) * jet.n)


def riemann_jet(jet: BoundaryJet) -> Jet:
    """R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj} + Gamma Gamma terms."""
    if jet.order < 2:
        raise InsufficientOrder("curvature tensor needs two jet orders")
    n = jet.n
    christ = christoffel_jet(jet)
    order = christ.order - 1
    dG = [christ.deriv(mu) for mu in range(n)]
    out = Jet(n, order, (n, n, n, n))
    christ_t = christ.truncated(order)
    # derivative terms
    for k in range(n):
        for b, v in dG[k].coeffs.items():
            out.coeffs.setdefault(b, np.zeros((n, n, n, n), dtype=complex))
            # + d_k Gamma^i_{l j} at slot [i, j, k, l], - d_l Gamma^i_{k j} at [i, j, l, k]
            out.coeffs[b][:, :, k, :] += np.transpose(v, (0, 2, 1))
            out.coeffs[b][:, :, :, k] -= np.transpose(v, (0, 2, 1))
    # quadratic terms Gamma^i_{k mu} Gamma^mu_{l j} - Gamma^i_{l mu} Gamma^mu_{k j}
    for b1, v1 in christ_t.coeffs.items():
        for b2, v2 in christ_t.coeffs.items():
            tot = tuple(a + b for a, b in zip(b1, b2))
            if sum(tot) > order:
                continue
            quad = np.einsum("ikm,mlj->ijkl", v1, v2)
            out.coeffs.setdefault(tot, np.zeros((n, n, n, n), dtype=complex))
            out.coeffs[tot] += quad - np.transpose(quad, (0, 1, 3, 2))
    out.coeffs = {b: v for b, v in out.coeffs.items() if np.any(v != 0)}
    return out


def scalar_curvature_jet(jet: BoundaryJet) -> Jet:
    """Scalar curvature R as a jet of order K-2."""
    n = jet.n
    riem = riemann_jet(jet)
    ginv = _full_metric(jet).inv().truncated(riem.order)
    out = Jet(n, riem.order, ())
    # R = g^{jl} R^k_{j k l}
    ric = riem.map_values(lambda v: np.einsum("kjkl->jl", v))
    prod = ginv * ric
    for b, v in prod.coeffs.items():
        t = np.trace(v)
        if t != 0:
            out.coeffs[b] = np.asarray(t)
    return out


def scalar_curvature_boundary(jet: BoundaryJet) -> dict:
    """R(x0), its normal jets, and the intrinsic remainder check value
    R/4 - (n-1)/2 d_n H at x0."""
    if jet.order < 2:
        raise InsufficientOrder("scalar curvature needs K >= 2")
    n = jet.n
    R = scalar_curvature_jet(jet)
    ext = extrinsic_data(jet)
    normal_jets = []
    for j in range(R.order + 1):
        beta = [0] * n
        beta[n - 1] = j
        normal_jets.append(complex(R.derivative_value(tuple(beta))).real)
    dnH = ext.H.deriv(n - 1).coefficient((0,) * n)
    check = normal_jets[0] / 4 - (n - 1) / 2 * float(np.real(dnH))
    return {"R0": normal_jets[0], "normal_jets": normal_jets,
            "quarter_R_minus_dnH_term": check}


# -- construction & serialization -------------------------------------------


def random_jet(n: int, e_rank: int, order: int, m: float, seed: int,
               scale: float = 0.15) -> BoundaryJet:
    """Seeded random boundary jet: SPD metric near the identity, anti-Hermitian A."""
    rng = np.random.default_rng(seed)
    nt = n - 1
    g = Jet(n, order, (nt, nt))
    g.coeffs[(0,) * n] = np.eye(nt)
    for beta in multi_indices(n, order):
        if sum(beta) == 0:
            continue
        v = rng.standard_normal((nt, nt)) * scale / (2.0 ** sum(beta))
        g.coeffs[beta] = g.coeffs.get(beta, 0) + (v + v.T) / 2
    A = []
    for _ in range(nt):
        aj = Jet(n, order, (e_rank, e_rank))
        for beta in multi_indices(n, order):
            v = (rng.standard_normal((e_rank, e_rank))
                 + 1j * rng.standard_normal((e_rank, e_rank))) * scale / (2.0 ** sum(beta))
            aj.coeffs[beta] = (v - v.conj().T) / 2
        A.append(aj)
    return BoundaryJet(n=n, e_rank=e_rank, order=order, m=m, g=g, A=A)


def flat_jet(n: int, e_rank: int, order: int, m: float) -> BoundaryJet:
    g = Jet(n, order, (n - 1, n - 1))
    g.coeffs[(0,) * n] = np.eye(n - 1)
    A = [Jet(n, order, (e_rank, e_rank)) for _ in range(n - 1)]
    return BoundaryJet(n=n, e_rank=e_rank, order=order, m=m, g=g, A=A)


def _key(beta: tuple[int, ...]) -> str:
    return "|".join(str(b) for b in beta)


def _unkey(key: str) -> tuple[int, ...]:
    return tuple(int(p) for p in key.split("|"))


def jet_to_json(jet: BoundaryJet) -> str:
    """Serialize with derivative-value semantics and pipe-separated multi-index
    keys "beta_1|...|beta_{n-1}|j" (tangential orders then normal order)."""
    gd = {}
    for beta in jet.g.coeffs:
        gd[_key(beta)] = np.real(jet.g.derivative_value(beta)).tolist()
    ad = {}
    for alpha, aj in enumerate(jet.A):
        for beta in aj.coeffs:
            v = aj.derivative_value(beta)
            ad.setdefault(str(alpha + 1), {})[_key(beta)] = [
                [[float(x.real), float(x.imag)] for x in row] for row in v]
    doc = {"schema_version": 1, "n": jet.n, "e_rank": jet.e_rank,
           "K": jet.order, "m": jet.m, "g": gd, "A": ad}
    return json.dumps(doc, indent=1, sort_keys=True)


def jet_from_json(text: str) -> BoundaryJet:
    doc = json.loads(text)
    n, e_rank, K, m = doc["n"], doc["e_rank"], doc["K"], doc["m"]
    g = Jet.from_derivatives(
        {_unkey(k): np.asarray(v, dtype=float) for k, v in doc["g"].items()}, n, K)
    A = []
    for alpha in range(1, n):
        derivs = {}
        for k, v in doc.get("A", {}).get(str(alpha), {}).items():
            arr = np.asarray(v, dtype=float)
            derivs[_unkey(k)] = arr[..., 0] + 1j * arr[..., 1]
        aj = (Jet.from_derivatives(derivs, n, K) if derivs
              else Jet(n, K, (e_rank, e_rank)))
        if aj.shape != (e_rank, e_rank):
            aj = Jet(n, K, (e_rank, e_rank), aj.coeffs)
        A.append(aj)
    return BoundaryJet(n=n, e_rank=e_rank, order=K, m=m, g=g, A=A)
