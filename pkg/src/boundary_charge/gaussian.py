"""Fermionic Gaussian states: evolution and charge/energy observables.

A Gaussian state of M modes is stored as the 2M x 2M correlation matrix
``Gamma[a, b] = <alpha_a alpha_b+>`` on the doubled mode basis
``alpha = (c_1..c_M, c_1+..c_M+)``.  The physical two-point functions are
the blocks ``G[i, j] = <c_i+ c_j> = Gamma[M+i, M+j]`` and
``F[i, j] = <c_i c_j> = Gamma[i, M+j]``.

Quadratic evolution conjugates Gamma with the single-particle propagator,
and every observable used here is a polynomial in G and F obtained by
Wick factorization; the particle-number variance is

    Var(N) = tr(G) - tr(G @ G) + sum_ij |F_ij|^2 .
"""

from __future__ import annotations

import numpy as np

from .models import NambuMatrix

__all__ = [
    "GaussianState",
    "product_state",
    "evolve",
    "floquet_step",
    "particle_number",
    "spin_z",
    "charge_variance",
    "subsystem_charge_variance",
    "energy",
]


class GaussianState:
    """Correlation matrix of a pure fermionic Gaussian state."""

    def __init__(self, gamma: np.ndarray, validate: bool = False):
        gamma = np.asarray(gamma, dtype=np.complex128)
        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1] or gamma.shape[0] % 2:
            raise ValueError("correlation matrix must be square with even dimension")
        self.gamma = gamma
        if validate:
            self.validate()

    @property
    def M(self) -> int:
        return self.gamma.shape[0] // 2

    @property
    def G(self) -> np.ndarray:
        """Number correlations <c_i+ c_j>."""
        M = self.M
        return self.gamma[M:, M:]

    @property
    def F(self) -> np.ndarray:
        """Anomalous correlations <c_i c_j>."""
        M = self.M
        return self.gamma[:M, M:]

    def copy(self) -> "GaussianState":
        return GaussianState(self.gamma.copy())

    def validate(self, atol: float = 1e-9):
        """Check Hermiticity, the particle-hole constraint, and purity."""
        g = self.gamma
        M = self.M
        if not np.allclose(g, g.conj().T, atol=atol):
            raise ValueError("correlation matrix is not Hermitian")
        swap = np.block(
            [[g[M:, M:].T, g[:M, M:].T], [g[M:, :M].T, g[:M, :M].T]]
        )
        if not np.allclose(g + swap, np.eye(2 * M), atol=atol):
            raise ValueError("correlation matrix violates the particle-hole constraint")
        if not np.allclose(g @ g, g, atol=atol):
            raise ValueError("correlation matrix is not a projector (state not pure)")
        if not np.allclose(self.F, -self.F.T, atol=atol):
            raise ValueError("anomalous block is not antisymmetric")
        return self


def product_state(occupations) -> GaussianState:
    """Gaussian state of a product of empty/occupied modes."""
    occ = np.asarray(occupations, dtype=np.float64).ravel()
    if occ.size == 0 or not np.all((occ == 0) | (occ == 1)):
        raise ValueError("occupations must be a nonempty 0/1 vector")
    gamma = np.diag(np.concatenate([1.0 - occ, occ])).astype(np.complex128)
    return GaussianState(gamma)


def evolve(state: GaussianState, h: NambuMatrix, t: float) -> GaussianState:
    """Evolve for time t under a quadratic Hamiltonian.

    Uses the exact unitary from the eigendecomposition of ``h`` (cached on
    the NambuMatrix), which keeps the state a projector even at long
    times.
    """
    if not isinstance(h, NambuMatrix):
        raise TypeError("h must be a NambuMatrix (Hermiticity is checked there)")
    if h.M != state.M:
        raise ValueError(f"mode count mismatch: state has {state.M}, h has {h.M}")
    U = h.propagator(t)
    return GaussianState(U @ state.gamma @ U.conj().T)


def floquet_step(state: GaussianState, uB: np.ndarray, u0: np.ndarray) -> GaussianState:
    """One driving period: conjugate Gamma by uB @ u0.

    ``uB`` and ``u0`` are precomputed 2M x 2M single-particle unitaries
    (e.g. ``NambuMatrix.propagator(1.0)``); one call advances one period.
    """
    n = 2 * state.M
    uB = np.asarray(uB)
    u0 = np.asarray(u0)
    if uB.shape != (n, n) or u0.shape != (n, n):
        raise ValueError(f"period unitaries must have shape {(n, n)}")
    U = uB @ u0
    return GaussianState(U @ state.gamma @ U.conj().T)


def particle_number(state: GaussianState) -> float:
    """Total particle number <N>."""
    return float(np.trace(state.G).real)


def spin_z(state: GaussianState) -> float:
    """Total z-magnetization of a spinful chain.

    Requires the interleaved (up, down, up, down, ...) mode layout of the
    spinful model, in particular an even mode count.
    """
    if state.M % 2:
        raise ValueError("spin_z needs the spinful mode layout (even mode count)")
    n = np.diag(state.G).real
    return float(0.5 * (np.sum(n[0::2]) - np.sum(n[1::2])))


def _wick_variance(G: np.ndarray, F: np.ndarray) -> float:
    var = np.trace(G).real - np.sum(np.abs(G) ** 2) + np.sum(np.abs(F) ** 2)
    return max(0.0, float(var))


def charge_variance(state: GaussianState) -> float:
    """Variance of the total particle number, via Wick factorization."""
    return _wick_variance(state.G, state.F)


def subsystem_charge_variance(state: GaussianState, sites) -> float:
    """Variance of the particle number on a subset of modes.

    ``sites`` holds 1-based mode indices (chain sites for the spinless
    models); duplicates are ignored.
    """
    M = state.M
    idx = sorted({int(s) for s in sites})
    if not idx:
        return 0.0
    if idx[0] < 1 or idx[-1] > M:
        raise ValueError(f"mode indices must lie in 1..{M}")
    sel = np.asarray(idx) - 1
    block = np.ix_(sel, sel)
    return _wick_variance(state.G[block], state.F[block])


def energy(state: GaussianState, h: NambuMatrix) -> float:
    """Energy expectation value of the quadratic Hamiltonian ``h``."""
    if h.M != state.M:
        raise ValueError(f"mode count mismatch: state has {state.M}, h has {h.M}")
    return float((h.const - 0.5 * np.einsum("ij,ji->", h.H, state.gamma)).real)


# -- fast paths shared with the experiment drivers -------------------------


def propagated_blocks(U: np.ndarray, occupations) -> tuple[np.ndarray, np.ndarray]:
    """(G, F) blocks of a product state conjugated by a precomputed unitary.

    Exploits that the initial Gamma is diagonal 0/1, so Gamma(t) = W W+
    with W the columns of U at the initially nonzero entries.  Equal to
    ``evolve(product_state(occ), ...)`` up to rounding.
    """
    occ = np.asarray(occupations, dtype=np.float64).ravel()
    M = occ.size
    cols = np.flatnonzero(np.concatenate([1.0 - occ, occ]))
    W = U[:, cols]
    Wc, Wd = W[:M], W[M:]
    G = Wd @ Wd.conj().T
    F = Wc @ Wd.conj().T
    return G, F
