"""Polyhomogeneous matrix symbols and the two triangular boundary recursions.

A homogeneous component of degree d is stored as a monomial dictionary

    p(x, xi) = sum_r C_r(x) * xihat_r * |xi|_g^d,

where r runs over symmetric multi-indices in the tangential covector, xihat is
the g-unit covector, and each C_r is an x-jet (tangential variables plus the
normal, which enters as a parameter of the boundary symbol family).  This
class of functions is closed under products, xi-derivatives, x-derivatives,
and division by |xi|, which is exactly what the recursions need; homogeneity
is structural.

Composition uses the left quantization (coefficients to the left of the
Fourier factor), so op(p) op(q) has symbol

    (p # q)(x, xi) = sum_alpha (-i)^|alpha|/alpha! d_xi^alpha p . d_x^alpha q

with alpha over tangential directions.  The factorization recursion's
1/(i^nu nu!) weights are the same convention since 1/i = -i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clifford import GammaRep, chiral_projectors
from .geometry import (BoundaryJet, FrameJet, christoffel_jet, extrinsic_data,
                       frame_jets, scalar_curvature_jet, weitzenbock_jet)
from .jets import InsufficientOrder, Jet

__all__ = ["SymbolContext", "HomogeneousComponent", "SymbolSeries",
           "sharp_compose", "b_series", "theta_series",
           "lambda_theta_residual", "series_for_jet", "sample_rays"]


@dataclass
class SymbolContext:
    """Shared geometric data for symbol components over one boundary jet."""

    jet: BoundaryJet
    rep: GammaRep
    frame: FrameJet
    ginv: Jet = field(init=False)

    def __post_init__(self):
        self.ginv = self.jet.g.inv()
        proj = chiral_projectors(self.rep)
        self.b_plus = proj.b_plus_t()
        self.b_minus = proj.b_minus_t()
        self.proj = proj

    @property
    def n(self) -> int:
        return self.jet.n

    @property
    def nt(self) -> int:
        return self.jet.n - 1

    @property
    def nmat(self) -> int:
        return self.rep.twisted_rank

    def norm_sq_jet(self, xi: np.ndarray, order: int) -> Jet:
        """|xi|_g^2 as an x-jet for a fixed coordinate covector."""
        xi = np.asarray(xi, dtype=float)
        w = Jet(self.n, order, ())
        gi = self.ginv.truncated(order)
        for b, v in gi.coeffs.items():
            w.coeffs[b] = np.asarray(xi @ v @ xi)
        return w


def _zero_jet(ctx: SymbolContext, order: int) -> Jet:
    return Jet(ctx.n, order, (ctx.nmat, ctx.nmat))


class HomogeneousComponent:
    """One positive-homogeneous matrix symbol component."""

    __slots__ = ("ctx", "degree", "terms")

    def __init__(self, ctx: SymbolContext, degree: int,
                 terms: dict[tuple[int, ...], Jet] | None = None):
        self.ctx = ctx
        self.degree = degree
        self.terms = {} if terms is None else terms

    # -- bookkeeping --

    def copy(self) -> "HomogeneousComponent":
        return HomogeneousComponent(self.ctx, self.degree,
                                    {r: j.copy() for r, j in self.terms.items()})

    def x_order(self) -> int:
        """Minimal jet order carried by any nonzero term (component exactness)."""
        orders = [j.order for j in self.terms.values() if not j.is_zero]
        return min(orders) if orders else self.ctx.jet.order

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(j.max_norm() <= tol for j in self.terms.values())

    def max_norm(self) -> float:
        return max((j.max_norm() for j in self.terms.values()), default=0.0)

    def cleaned(self, tol: float = 1e-14) -> "HomogeneousComponent":
        out = {}
        for r, j in self.terms.items():
            jc = Jet(j.nvars, j.order, j.shape,
                     {b: v for b, v in j.coeffs.items()
                      if np.max(np.abs(v)) > tol})
            if jc.coeffs:
                out[r] = jc
        return HomogeneousComponent(self.ctx, self.degree, out)

    def _accum(self, r: tuple[int, ...], j: Jet):
        if r in self.terms:
            self.terms[r] = self.terms[r] + j
        else:
            self.terms[r] = j

    # -- linear structure --

    def __add__(self, other: "HomogeneousComponent") -> "HomogeneousComponent":
        if other.degree != self.degree:
            raise ValueError("cannot add components of different homogeneity")
        out = self.copy()
        for r, j in other.terms.items():
            out._accum(r, j)
        return out

    def __sub__(self, other: "HomogeneousComponent") -> "HomogeneousComponent":
        return self + other.scale(-1.0)

    def scale(self, c) -> "HomogeneousComponent":
        return HomogeneousComponent(self.ctx, self.degree,
                                    {r: j.scale(c) for r, j in self.terms.items()})

    def lmul_matrix(self, m: np.ndarray) -> "HomogeneousComponent":
        return HomogeneousComponent(self.ctx, self.degree,
                                    {r: j.map_values(lambda v: m @ v)
                                     for r, j in self.terms.items()})

    def rmul_matrix(self, m: np.ndarray) -> "HomogeneousComponent":
        return HomogeneousComponent(self.ctx, self.degree,
                                    {r: j.map_values(lambda v: v @ m)
                                     for r, j in self.terms.items()})

    def lmul_jet(self, j: Jet) -> "HomogeneousComponent":
        return HomogeneousComponent(self.ctx, self.degree,
                                    {r: j * t for r, t in self.terms.items()})

    def mul(self, other: "HomogeneousComponent") -> "HomogeneousComponent":
        out = HomogeneousComponent(self.ctx, self.degree + other.degree)
        flat1 = [(r, b, v) for r, j in self.terms.items() if not j.is_zero
                 for b, v in j.coeffs.items()]
        flat2 = [(r, b, v) for r, j in other.terms.items() if not j.is_zero
                 for b, v in j.coeffs.items()]
        if not flat1 or not flat2:
            return out
        if len(flat1) * len(flat2) < 256:
            for r1, j1 in self.terms.items():
                for r2, j2 in other.terms.items():
                    r = tuple(a + b for a, b in zip(r1, r2))
                    out._accum(r, j1 * j2)
            return out
        order = min(self.x_order(), other.x_order())
        nvars = self.ctx.n
        r1 = np.array([t[0] for t in flat1])
        b1 = np.array([t[1] for t in flat1])
        v1 = np.stack([t[2] for t in flat1]).astype(np.complex128)
        r2 = np.array([t[0] for t in flat2])
        b2 = np.array([t[1] for t in flat2])
        v2 = np.stack([t[2] for t in flat2]).astype(np.complex128)
        btot = b1[:, None, :] + b2[None, :, :]
        mask = btot.sum(axis=2) <= order
        i1, i2 = np.nonzero(mask)
        if len(i1) == 0:
            return out
        prods = np.matmul(v1[i1], v2[i2])
        keys = np.concatenate([r1[i1] + r2[i2], btot[i1, i2]], axis=1)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        buf = np.zeros((len(uniq),) + prods.shape[1:], dtype=np.complex128)
        np.add.at(buf, inverse, prods)
        nt = self.ctx.nt
        for row, val in zip(uniq, buf):
            r = tuple(int(x) for x in row[: nt])
            beta = tuple(int(x) for x in row[nt:])
            j = out.terms.get(r)
            if j is None:
                j = Jet(nvars, order, val.shape)
                out.terms[r] = j
            j.coeffs[beta] = val
        return out

    # -- calculus --

    def d_xi(self, mu: int) -> "HomogeneousComponent":
        """Derivative in xi_mu; stays in the monomial class at degree-1."""
        ctx = self.ctx
        out = HomogeneousComponent(ctx, self.degree - 1)
        for r, j in self.terms.items():
            if r[mu] > 0:
                rm = list(r)
                rm[mu] -= 1
                out._accum(tuple(rm), j.scale(float(r[mu])))
            c = self.degree - sum(r)
            if c != 0:
                gi = ctx.ginv.truncated(j.order)
                for nu in range(ctx.nt):
                    gj = gi.entry(mu, nu)
                    if gj.is_zero:
                        continue
                    rp = list(r)
                    rp[nu] += 1
                    out._accum(tuple(rp), (gj * j).scale(float(c)))
        return out

    def d_x(self, mu: int) -> "HomogeneousComponent":
        """Derivative in x^mu (tangential mu < n-1, or the normal mu = n-1)."""
        ctx = self.ctx
        out = HomogeneousComponent(ctx, self.degree)
        for r, j in self.terms.items():
            if j.is_zero:
                continue
            if j.order < 1:
                raise InsufficientOrder(
                    f"component of degree {self.degree} carries x-jets of order 0; "
                    f"an x-derivative in direction {mu} is unavailable")
            out._accum(r, j.deriv(mu))
            c = self.degree - sum(r)
            if c != 0:
                dgi = ctx.ginv.deriv(mu).truncated(j.order - 1)
                for al in range(ctx.nt):
                    for be in range(ctx.nt):
                        gj = dgi.entry(al, be)
                        if gj.is_zero:
                            continue
                        rp = list(r)
                        rp[al] += 1
                        rp[be] += 1
                        out._accum(tuple(rp), (gj * j.truncated(j.order - 1))
                                   .scale(0.5 * c))
        return out

    def div_norm(self, k: int = 1) -> "HomogeneousComponent":
        """Divide by |xi|^k."""
        return HomogeneousComponent(self.ctx, self.degree - k,
                                    {r: j.copy() for r, j in self.terms.items()})

    # -- structure --

    def parity_part(self, even: bool) -> "HomogeneousComponent":
        want = 0 if even else 1
        return HomogeneousComponent(self.ctx, self.degree,
                                    {r: j.copy() for r, j in self.terms.items()
                                     if sum(r) % 2 == want})

    def even(self) -> "HomogeneousComponent":
        return self.parity_part(True)

    def odd(self) -> "HomogeneousComponent":
        return self.parity_part(False)

    def block(self, left: str, right: str) -> "HomogeneousComponent":
        """Projector sandwich, e.g. block('-', '+') = B_minus p B_plus."""
        pl = self.ctx.b_plus if left == "+" else self.ctx.b_minus
        pr = self.ctx.b_plus if right == "+" else self.ctx.b_minus
        return self.lmul_matrix(pl).rmul_matrix(pr)

    def conjugated(self, u: np.ndarray) -> "HomogeneousComponent":
        uh = u.conj().T
        return HomogeneousComponent(self.ctx, self.degree,
                                    {r: j.map_values(lambda v: uh @ v @ u)
                                     for r, j in self.terms.items()})

    # -- evaluation --

    def eval_jet(self, xi, x_order: int | None = None) -> Jet:
        """Evaluate at a fixed coordinate covector; returns a matrix x-jet."""
        ctx = self.ctx
        xi = np.asarray(xi, dtype=float)
        order = self.x_order() if x_order is None else min(x_order, self.x_order())
        w = ctx.norm_sq_jet(xi, order)
        sq = w.sqrt_scalar()
        acc = _zero_jet(ctx, order)
        powers: dict[int, Jet] = {}
        for r, j in self.terms.items():
            p = self.degree - sum(r)
            if p not in powers:
                powers[p] = sq.int_power(p)
            mono = 1.0
            for x, e in zip(xi, r):
                if e:
                    mono *= x ** e
            if mono == 0.0:
                continue
            acc = acc + (powers[p] * j.truncated(order)).scale(mono)
        return acc

    def eval(self, xi) -> np.ndarray:
        return self.eval_jet(xi, x_order=0).coefficient((0,) * self.ctx.n)

    def __repr__(self) -> str:
        return (f"HomogeneousComponent(degree={self.degree}, "
                f"terms={len(self.terms)}, x_order={self.x_order()})")


@dataclass
class SymbolSeries:
    """Finite polyhomogeneous series: components at consecutive degrees."""

    ctx: SymbolContext
    components: dict[int, HomogeneousComponent]

    @property
    def top_degree(self) -> int:
        return max(self.components)

    @property
    def bottom_degree(self) -> int:
        return min(self.components)

    def component(self, degree: int) -> HomogeneousComponent:
        if degree in self.components:
            return self.components[degree]
        return HomogeneousComponent(self.ctx, degree)

    def blocks(self, left: str, right: str) -> "SymbolSeries":
        return SymbolSeries(self.ctx, {d: c.block(left, right)
                                       for d, c in self.components.items()})

    def conjugated(self, u: np.ndarray) -> "SymbolSeries":
        return SymbolSeries(self.ctx, {d: c.conjugated(u)
                                       for d, c in self.components.items()})

    def __sub__(self, other: "SymbolSeries") -> "SymbolSeries":
        degrees = set(self.components) | set(other.components)
        out = {}
        for d in degrees:
            out[d] = self.component(d) - other.component(d)
        return SymbolSeries(self.ctx, out)


def _alpha_indices(nt: int, total: int):
    if nt == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _alpha_indices(nt - 1, total - head):
            yield (head,) + tail


def _xi_derivatives(comp: HomogeneousComponent, max_order: int
                    ) -> dict[tuple[int, ...], HomogeneousComponent]:
    """All d_xi^alpha of a component with |alpha| <= max_order."""
    nt = comp.ctx.nt
    out = {(0,) * nt: comp}
    frontier = [(0,) * nt]
    for _ in range(max_order):
        new = []
        for a in frontier:
            for mu in range(nt):
                na = list(a)
                na[mu] += 1
                na = tuple(na)
                if na not in out:
                    out[na] = out[a].d_xi(mu)
                    new.append(na)
        frontier = new
    return out


def _x_derivatives(comp: HomogeneousComponent, max_order: int
                   ) -> dict[tuple[int, ...], HomogeneousComponent]:
    nt = comp.ctx.nt
    out = {(0,) * nt: comp}
    frontier = [(0,) * nt]
    for _ in range(max_order):
        new = []
        for a in frontier:
            for mu in range(nt):
                na = list(a)
                na[mu] += 1
                na = tuple(na)
                if na not in out:
                    src = out[a]
                    out[na] = (HomogeneousComponent(comp.ctx, src.degree)
                               if src.is_zero() else src.d_x(mu))
                    new.append(na)
        frontier = new
    return out


def sharp_compose(p: SymbolSeries, q: SymbolSeries, depth: int) -> SymbolSeries:
    """Asymptotic composition p # q truncated to the top `depth` degrees.

    Returns the symbol of op(p) . op(q); x-derivatives hit q, xi-derivatives
    hit p, tangential directions only.
    """
    ctx = p.ctx
    top = p.top_degree + q.top_degree
    bottom = top - depth + 1
    max_al = top - bottom
    p_derivs = {d: _xi_derivatives(c, min(max_al, d - (bottom - q.top_degree)))
                for d, c in p.components.items()}
    out: dict[int, HomogeneousComponent] = {
        d: HomogeneousComponent(ctx, d) for d in range(bottom, top + 1)}
    for dp, comp_p in p.components.items():
        for dq, comp_q in q.components.items():
            max_here = dp + dq - bottom
            if max_here < 0:
                continue
            xd = _x_derivatives(comp_q, min(max_here, max_al))
            for alpha, q_da in xd.items():
                k = sum(alpha)
                d_out = dp + dq - k
                if d_out < bottom or d_out > top:
                    continue
                p_da = p_derivs[dp].get(alpha)
                if p_da is None:
                    continue
                fact = 1.0
                for a in alpha:
                    fact *= math.factorial(a)
                coeff = (-1j) ** k / fact
                out[d_out] = out[d_out] + p_da.mul(q_da).scale(coeff)
    return SymbolSeries(ctx, out)


# -- the factorization recursion (symbol of the Dirichlet-to-Neumann family) --


def _q_symbols(ctx: SymbolContext) -> dict[int, HomogeneousComponent]:
    """Symbols of the tangential operators in the factorized Dirac Laplacian:
    q2 = |xi|^2, q1 = -2i g^{ab} kappa_a xi_b + i g^{ab} Gamma^c_{ab} xi_c,
    q0 = -g^{ab} d_a kappa_b - g^{ab} kappa_a kappa_b + g^{ab} Gamma^c_{ab} kappa_c
         + R/4 + Weitzenboeck - m^2.
    """
    jet, frame, rep = ctx.jet, ctx.frame, ctx.rep
    n, nt, nmat = ctx.n, ctx.nt, ctx.nmat
    K = jet.order
    ident = np.eye(nmat)

    q2 = HomogeneousComponent(ctx, 2)
    q2.terms[(0,) * nt] = Jet.constant(ident, n, K)

    christ = frame.christoffel
    gi = ctx.ginv
    # Gamma contracted: G^c = g^{ab} Gamma^c_{ab} (tangential indices)
    ord1 = christ.order
    gcon = Jet(n, ord1, (nt,))
    gi1 = gi.truncated(ord1)
    for b1, v1 in gi1.coeffs.items():
        for b2, v2 in christ.coeffs.items():
            tot = tuple(a + b for a, b in zip(b1, b2))
            if sum(tot) > ord1:
                continue
            term = np.einsum("ab,cab->c", v1, v2[: nt, : nt, : nt])
            arr = gcon.coeffs.setdefault(tot, np.zeros(nt, dtype=complex))
            arr += term
    q1 = HomogeneousComponent(ctx, 1)
    for beta in range(nt):
        acc = None
        for al in range(nt):
            t = (gi.entry(al, beta) * frame.kappa[al]).scale(-2j)
            acc = t if acc is None else acc + t
        gterm = gcon.entry(beta).map_values(lambda v: 1j * v * ident)
        acc = acc + gterm
        r = [0] * nt
        r[beta] = 1
        q1.terms[tuple(r)] = acc

    # q0 pieces
    R = scalar_curvature_jet(jet)
    ff = weitzenbock_jet(jet, rep, frame)
    ord0 = min(R.order, ff.order)
    acc = R.truncated(ord0).map_values(lambda v: (v / 4.0) * ident) + ff.truncated(ord0)
    acc = acc + Jet.constant(-jet.m ** 2 * ident, n, ord0)
    gi0 = gi.truncated(ord0)
    for al in range(nt):
        for be in range(nt):
            gj = gi0.entry(al, be)
            if gj.is_zero:
                continue
            acc = acc - gj * frame.kappa[be].deriv(al).truncated(ord0)
            acc = acc - gj * (frame.kappa[al].truncated(ord0)
                              * frame.kappa[be].truncated(ord0))
    for c in range(nt):
        gj = gcon.entry(c).truncated(ord0)
        if not gj.is_zero:
            acc = acc + gj * frame.kappa[c].truncated(ord0)
    q0 = HomogeneousComponent(ctx, 0)
    q0.terms[(0,) * nt] = acc
    return {2: q2, 1: q1, 0: q0}


def b_series(jet: BoundaryJet, frame: FrameJet, rep: GammaRep, K: int,
             ctx: SymbolContext | None = None) -> SymbolSeries:
    """Solve the factorization equation for the symbol b = b_1 + b_0 + ...

    The equation (with the frame parallel along the normal so kappa_A(d_n)=0):

        d_n b - (n-1) H b + (b # b) = q2 + q1 + q0.

    Equating homogeneous degrees gives b_1 = -|xi| and a triangular solve for
    every lower component; returns degrees 1 down to 1-K.
    """
    if jet.order < K + 1:
        raise InsufficientOrder(
            f"b-series to depth {K} needs jet order >= {K + 1}, have {jet.order}")
    if not frame.kappa[jet.n - 1].cleaned(1e-10).is_zero:
        raise ValueError("frame is not parallel along the normal")
    ctx = ctx or SymbolContext(jet=jet, rep=rep, frame=frame)
    n, nt, nmat = ctx.n, ctx.nt, ctx.nmat
    q = _q_symbols(ctx)
    H = frame.mean_curvature
    comps: dict[int, HomogeneousComponent] = {}
    b1 = HomogeneousComponent(ctx, 1)
    b1.terms[(0,) * nt] = Jet.constant(-np.eye(nmat), n, jet.order)
    comps[1] = b1

    for step in range(K):
        e = 1 - step  # equation degree producing the component of degree e-1
        partial = SymbolSeries(ctx, dict(comps))
        known = sharp_compose(partial, partial, depth=partial.top_degree * 2 - e + 1)
        acc = known.component(e).scale(-1.0)
        if e in q:
            acc = acc + q[e]
        b_e = comps.get(e)
        if b_e is not None:
            dn = b_e.d_x(n - 1)
            acc = acc - dn
            acc = acc + b_e.lmul_jet(H.truncated(b_e.x_order())).scale(n - 1)
        # acc = 2 b_1 b_{e-1} = -2 |xi| b_{e-1}
        comps[e - 1] = acc.div_norm(1).scale(-0.5).cleaned()
    return SymbolSeries(ctx, comps)


# -- the boundary conjugation recursion --


def _rhs_symbols(ctx: SymbolContext) -> dict[int, HomogeneousComponent]:
    """Symbol of gamma^n (gamma^a h^al_a d_al + Omega + gamma(A) - m), the
    zeroth/first order tangential operator on the right of the theta relation."""
    jet, frame, rep = ctx.jet, ctx.frame, ctx.rep
    n, nt, nmat = ctx.n, ctx.nt, ctx.nmat
    K = frame.h.order
    gn = np.kron(rep.gammas[n - 1], np.eye(jet.e_rank))
    gammas_t = [np.kron(g, np.eye(jet.e_rank)) for g in rep.gammas]

    r1 = HomogeneousComponent(ctx, 1)
    for al in range(nt):
        acc = None
        for a in range(nt):
            t = frame.h.entry(al, a).map_values(
                lambda v, _a=a: 1j * v * (gn @ gammas_t[_a]))
            acc = t if acc is None else acc + t
        r = [0] * nt
        r[al] = 1
        r1.terms[tuple(r)] = acc

    # Omega = -1/2 sum_a sum_{b<c} omega^b_c(e_a) gamma^a gamma^b gamma^c
    ord0 = frame.omega.order
    omega_frame = Jet(n, ord0, (nt, nt, nt))
    hf = frame.h.truncated(ord0)
    for b1, v1 in hf.coeffs.items():
        for b2, v2 in frame.omega.coeffs.items():
            tot = tuple(x + y for x, y in zip(b1, b2))
            if sum(tot) > ord0:
                continue
            term = np.einsum("ma,mbc->abc", v1, v2[: nt, : nt, : nt])
            arr = omega_frame.coeffs.setdefault(tot, np.zeros((nt, nt, nt),
                                                              dtype=complex))
            arr += term
    omega_mat = Jet(n, ord0, (nmat, nmat))
    for bb, v in omega_frame.coeffs.items():
        acc = np.zeros((nmat, nmat), dtype=complex)
        for a in range(nt):
            for b in range(nt):
                for c in range(b + 1, nt):
                    if v[a, b, c] != 0:
                        acc -= 0.5 * v[a, b, c] * (
                            gammas_t[a] @ gammas_t[b] @ gammas_t[c])
        if np.any(acc != 0):
            omega_mat.coeffs[bb] = acc
    # gamma(A) = sum_a gamma^a h^al_a A_al (acting on the auxiliary factor)
    gA = Jet(n, min(a.order for a in frame.A_eff), (nmat, nmat))
    for a in range(nt):
        for al in range(nt):
            ha = frame.h.entry(al, a).truncated(gA.order)
            if ha.is_zero:
                continue
            lifted = frame.A_eff[al].truncated(gA.order).map_values(
                lambda v: np.kron(np.eye(rep.rank), v))
            gA = gA + (ha * lifted).map_values(lambda v, _a=a: gammas_t[_a] @ v)
    zero_mat = omega_mat + gA.truncated(omega_mat.order) + Jet.constant(
        -jet.m * np.eye(nmat), n, omega_mat.order)
    r0 = HomogeneousComponent(ctx, 0)
    r0.terms[(0,) * nt] = zero_mat.map_values(lambda v: gn @ v)
    return {1: r1, 0: r0}


def theta_series(b: SymbolSeries, jet: BoundaryJet, frame: FrameJet,
                 rep: GammaRep, K: int) -> SymbolSeries:
    """Solve b^{-+} + b^{--} # theta = rhs + (n-1)/2 H theta for the symbol of
    the boundary conjugation map; returns theta_0 .. theta_{-K}."""
    ctx = b.ctx
    n, nt = ctx.n, ctx.nt
    if b.bottom_degree > 1 - K:
        raise InsufficientOrder(
            f"theta to depth {K} needs b down to degree {1 - K}")
    rhs = _rhs_symbols(ctx)
    b_mm = b.blocks("-", "-")
    b_mp = b.blocks("-", "+")
    H = frame.mean_curvature

    theta: dict[int, HomogeneousComponent] = {}
    # degree 0: -|xi| theta_0 = -(rhs_1) => theta_0 = -i gamma^n gamma(xihat)
    theta[0] = rhs[1].rmul_matrix(ctx.b_plus).div_norm(1).scale(-1.0).cleaned()

    for step in range(K):
        e = -step  # equation degree producing theta_{e-1}
        partial = SymbolSeries(ctx, dict(theta))
        comp = sharp_compose(b_mm, partial, depth=b_mm.top_degree
                             + partial.top_degree - e + 1)
        acc = comp.component(e).scale(-1.0)
        acc = acc - b_mp.component(e)
        if e in rhs:
            acc = acc + rhs[e].rmul_matrix(ctx.b_plus)
        th_e = theta.get(e)
        if th_e is not None:
            acc = acc + th_e.lmul_jet(H.truncated(th_e.x_order())).scale(
                (n - 1) / 2.0)
        # remaining unknown term: b_1 theta_{e-1} = -|xi| theta_{e-1}
        theta[e - 1] = acc.div_norm(1).scale(-1.0).cleaned()
    return SymbolSeries(ctx, theta)


def series_for_jet(jet: BoundaryJet, rep: GammaRep, K: int,
                   parallel_at_x0: bool = True,
                   gauge_null_at_x0: bool = False) -> tuple[SymbolSeries, SymbolSeries]:
    """Convenience forward pass: frame, b-series, theta-series for one jet."""
    frame = frame_jets(jet, rep, parallel_at_x0=parallel_at_x0,
                       gauge_null_at_x0=gauge_null_at_x0)
    b = b_series(jet, frame, rep, K)
    th = theta_series(b, jet, frame, rep, K)
    return b, th


def sample_rays(nt: int, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic well-spread sample of covector rays (not normalized)."""
    rng = np.random.default_rng(seed)
    if nt == 1:
        return np.array([[1.0], [-1.0]][: max(2, count) if count >= 2 else 2])
    rays = rng.standard_normal((count, nt))
    rays /= np.linalg.norm(rays, axis=1, keepdims=True)
    return rays


def lambda_theta_residual(b: SymbolSeries, theta: SymbolSeries,
                          jet: BoundaryJet, frame: FrameJet, rep: GammaRep,
                          K: int, rays: np.ndarray | None = None) -> dict[int, float]:
    """Residual of the 2x2 block relation between the DN symbol and theta.

    The minus row is enforced by the theta solve; the plus row

        b^{++} + b^{+-} # theta = [gamma^n(gamma^a nabla_a - m) - (n-1)/2 H] # theta
                                  + (n-1)/2 H . id_{V+}

    is an independent check of the factorization output.  Returns the max
    sampled-coefficient norm per degree for both rows combined.
    """
    ctx = b.ctx
    n, nt = ctx.n, ctx.nt
    rhs = _rhs_symbols(ctx)
    H = frame.mean_curvature
    bottom = -K + 1  # lowest reported degree

    b_mm, b_mp = b.blocks("-", "-"), b.blocks("-", "+")
    b_pp, b_pm = b.blocks("+", "+"), b.blocks("+", "-")

    def depth_for(series_top: int) -> int:
        return series_top - bottom + 1

    lhs_minus = sharp_compose(b_mm, theta, depth=depth_for(
        b_mm.top_degree + theta.top_degree))
    for d, c in b_mp.components.items():
        lhs_minus.components[d] = lhs_minus.component(d) + c

    rhs_minus = SymbolSeries(ctx, {d: c.rmul_matrix(ctx.b_plus)
                                   for d, c in rhs.items()})
    for d, c in theta.components.items():
        extra = c.lmul_jet(H.truncated(max(c.x_order(), 0))).scale((n - 1) / 2.0)
        rhs_minus.components[d] = rhs_minus.component(d) + extra

    # plus row: gamma^n(gamma^a nabla_a - m) Theta + (n-1)/2 H (1 - Theta); in
    # local-symbol form the H theta terms cancel and it reads
    # rhs # theta + (n-1)/2 H on the incoming V+.
    rhs_series = SymbolSeries(ctx, rhs)
    rhs_plus = sharp_compose(rhs_series, theta, depth=depth_for(
        rhs_series.top_degree + theta.top_degree))
    hcomp = HomogeneousComponent(ctx, 0)
    hcomp.terms[(0,) * nt] = H.map_values(
        lambda v: (n - 1) / 2.0 * v * ctx.b_plus)
    rhs_plus.components[0] = rhs_plus.component(0) + hcomp

    lhs_plus = sharp_compose(b_pm, theta, depth=depth_for(
        b_pm.top_degree + theta.top_degree))
    for d, c in b_pp.components.items():
        lhs_plus.components[d] = lhs_plus.component(d) + c.rmul_matrix(ctx.b_plus)

    if rays is None:
        rays = sample_rays(nt, 3 * nt + 4, seed=12)
    out = {}
    for d in range(1, bottom - 1, -1):
        diff_m = lhs_minus.component(d) - rhs_minus.component(d)
        diff_p = lhs_plus.component(d) - rhs_plus.component(d)
        worst = 0.0
        for ray in rays:
            worst = max(worst, np.max(np.abs(diff_m.eval(ray))),
                        np.max(np.abs(diff_p.eval(ray))))
        out[d] = worst
    return out


def _identity_component(ctx: SymbolContext) -> HomogeneousComponent:
    c = HomogeneousComponent(ctx, 0)
    c.terms[(0,) * ctx.nt] = Jet.constant(np.eye(ctx.nmat), ctx.n, ctx.jet.order)
    return c
