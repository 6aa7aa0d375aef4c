"""Complex Clifford modules: gamma matrices, chirality, and chiral projectors.

Conventions: gamma matrices are skew-adjoint unitaries with
gamma_i gamma_j + gamma_j gamma_i = -2 delta_ij.  The last gamma is Clifford
multiplication by the inward unit normal on the boundary.  For even n the
chirality operator is the normalized complex volume element; odd n uses the
irreducible Cl(n+1) module restricted to Cl(n) with the extra direction
supplying the chirality (the usual hypersurface trick), so the module rank
doubles relative to the irreducible odd module.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["GammaRep", "ChiralProjectors", "build_rep", "chiral_projectors",
           "chiral_trace", "spin_generator"]

_SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _hermitian_gammas(count: int) -> list[np.ndarray]:
    """count pairwise-anticommuting Hermitian involutions of rank 2^ceil(count/2)."""
    factors = (count + 1) // 2
    out = []
    for j in range(1, factors + 1):
        head = [_SIGMA3] * (j - 1)
        tail = [np.eye(2, dtype=complex)] * (factors - j)
        for mid in (_SIGMA1, _SIGMA2):
            mats = head + [mid] + tail
            g = mats[0]
            for m in mats[1:]:
                g = np.kron(g, m)
            out.append(g)
    return out[:count]


@dataclass(frozen=True)
class GammaRep:
    """A concrete unitary Clifford module with chirality operator."""

    n: int
    rank: int
    gammas: tuple[np.ndarray, ...]
    chirality: np.ndarray
    e_rank: int = 1

    @property
    def twisted_rank(self) -> int:
        return self.rank * self.e_rank

    def gamma(self, i: int) -> np.ndarray:
        """gamma^i for 1-based Euclidean frame index i (i = n is the normal)."""
        return self.gammas[i - 1]

    def gamma_t(self, i: int) -> np.ndarray:
        """Twisted gamma (tensored with the identity on the auxiliary factor)."""
        return np.kron(self.gammas[i - 1], np.eye(self.e_rank))

    def chirality_t(self) -> np.ndarray:
        return np.kron(self.chirality, np.eye(self.e_rank))

    def lift_spin(self, mat: np.ndarray) -> np.ndarray:
        return np.kron(mat, np.eye(self.e_rank))

    def lift_aux(self, mat: np.ndarray) -> np.ndarray:
        return np.kron(np.eye(self.rank), mat)

    def gamma_vector(self, v) -> np.ndarray:
        """Clifford multiplication by a frame vector with components v_1..v_n."""
        acc = np.zeros((self.rank, self.rank), dtype=complex)
        for i, c in enumerate(np.asarray(v)):
            acc = acc + c * self.gammas[i]
        return acc


@dataclass(frozen=True)
class ChiralProjectors:
    """Projectors onto the +/-1 eigenspaces V_pm of gamma^n Pi (untwisted)."""

    b_plus: np.ndarray
    b_minus: np.ndarray
    v_plus_basis: np.ndarray
    v_minus_basis: np.ndarray
    rep: GammaRep = field(repr=False)

    def b_plus_t(self) -> np.ndarray:
        return np.kron(self.b_plus, np.eye(self.rep.e_rank))

    def b_minus_t(self) -> np.ndarray:
        return np.kron(self.b_minus, np.eye(self.rep.e_rank))

    def v_plus_t(self) -> np.ndarray:
        return np.kron(self.v_plus_basis, np.eye(self.rep.e_rank))

    def v_minus_t(self) -> np.ndarray:
        return np.kron(self.v_minus_basis, np.eye(self.rep.e_rank))


def build_rep(n: int, e_rank: int = 1) -> GammaRep:
    """Construct a unitary Clifford module for dimension n with chirality.

    Even n: irreducible module of rank 2^(n/2), chirality i^(n/2) gamma_1..gamma_n.
    Odd n: irreducible Cl(n+1) module restricted to the first n directions,
    chirality i * gamma_(n+1); rank 2^((n+1)/2).
    """
    if n < 2:
        raise ValueError("need ambient dimension n >= 2")
    if e_rank < 1:
        raise ValueError("auxiliary rank must be >= 1")
    if n % 2 == 0:
        herm = _hermitian_gammas(n)
        gammas = [1j * g for g in herm]
        vol = np.eye(gammas[0].shape[0], dtype=complex)
        for g in gammas:
            vol = vol @ g
        chirality = (1j) ** (n // 2) * vol
    else:
        herm = _hermitian_gammas(n + 1)
        gammas = [1j * g for g in herm[:n]]
        chirality = 1j * (1j * herm[n])
    rank = gammas[0].shape[0]
    return GammaRep(n=n, rank=rank, gammas=tuple(gammas),
                    chirality=chirality, e_rank=e_rank)


def chiral_projectors(rep: GammaRep, tol: float = 1e-12) -> ChiralProjectors:
    """Chiral boundary projectors (1 +/- gamma^n Pi)/2 and eigenbases of V_pm."""
    gn = rep.gammas[rep.n - 1]
    j = gn @ rep.chirality
    if np.max(np.abs(j @ j - np.eye(rep.rank))) > tol or np.max(np.abs(j - j.conj().T)) > tol:
        raise ValueError("gamma^n Pi is not a self-adjoint involution; corrupted rep")
    ident = np.eye(rep.rank)
    b_plus = (ident + j) / 2
    b_minus = (ident - j) / 2
    w, v = np.linalg.eigh(j)
    v_minus = v[:, w < 0]
    v_plus = v[:, w > 0]
    if v_plus.shape[1] != rep.rank // 2 or v_minus.shape[1] != rep.rank // 2:
        raise ValueError("eigenspaces of gamma^n Pi are not half-rank")
    return ChiralProjectors(b_plus=b_plus, b_minus=b_minus,
                            v_plus_basis=v_plus, v_minus_basis=v_minus, rep=rep)


def chiral_trace(rep: GammaRep, indices: list[int]) -> complex:
    """Trace over V_plus of the ordered product gamma^{a_1} ... gamma^{a_k}.

    Indices are 1-based and must be distinct tangential directions (< n).
    Vanishes when k is even, or when k is odd with k < n-1.
    """
    if len(set(indices)) != len(indices):
        raise ValueError("repeated index: not a reduced gamma product")
    for a in indices:
        if not 1 <= a <= rep.n - 1:
            raise ValueError(f"index {a} is not tangential (1..{rep.n - 1})")
    proj = chiral_projectors(rep)
    prod = proj.b_plus.copy()
    for a in indices:
        prod = prod @ rep.gammas[a - 1]
    # b_plus commutes with tangential gammas, so this is the V_plus-restricted trace
    return complex(np.trace(prod @ proj.b_plus))


def spin_generator(rep: GammaRep, antisym: np.ndarray) -> np.ndarray:
    """Spin-algebra lift of an so(k) matrix acting on the first k frame vectors.

    Returns sigma = 1/4 sum_{ab} M_ba gamma^a gamma^b, which satisfies
    [sigma, gamma(v)] = gamma(M v).
    """
    k = antisym.shape[0]
    acc = np.zeros((rep.rank, rep.rank), dtype=complex)
    for a in range(k):
        for b in range(k):
            if antisym[b, a] != 0:
                acc = acc + 0.25 * antisym[b, a] * (rep.gammas[a] @ rep.gammas[b])
    return acc
