"""Exact many-body simulation on occupation bit-string bases.

States are dense amplitude vectors on a :class:`SectorBasis`.  Because
every basis is diagonal in the occupations, charge observables reduce to
weighting |amplitude|^2 with per-state bit counts; time evolution uses a
single dense eigendecomposition of the Hamiltonian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import (
    DEFAULT_CAP,
    CapExceededError,
    SectorBasis,
    bits_from_occupations,
    enumerate_sector,
    sites_mask,
)

__all__ = [
    "DEFAULT_CAP",
    "CapExceededError",
    "SectorBasis",
    "enumerate_sector",
    "DenseState",
    "basis_vector",
    "evolve_exact",
    "charge_mean_mb",
    "charge_variance_mb",
    "subsystem_charge_mean_mb",
    "subsystem_charge_variance_mb",
    "spin_z_mb",
    "parity_mb",
    "sample_occupations",
    "random_sector_product_state",
    "floquet_unitary_mb",
]


@dataclass
class DenseState:
    """Normalized amplitude vector on a sector basis."""

    basis: SectorBasis
    vector: np.ndarray

    def __post_init__(self):
        self.vector = np.asarray(self.vector, dtype=np.complex128)
        if self.vector.shape != (self.basis.dim,):
            raise ValueError("amplitude vector does not match the basis dimension")
        if abs(np.linalg.norm(self.vector) - 1.0) > 1e-10:
            raise ValueError("state vector is not normalized")


def basis_vector(basis: SectorBasis, state: int) -> DenseState:
    """Computational basis vector for one occupation bit string."""
    vec = np.zeros(basis.dim, dtype=np.complex128)
    vec[basis.index_of(state)] = 1.0
    return DenseState(basis, vec)


def _check_hermitian(H: np.ndarray):
    scale = max(1.0, float(np.abs(H).max()))
    if not np.allclose(H, H.conj().T, atol=1e-10 * scale):
        raise ValueError("Hamiltonian matrix is not Hermitian")


def evolve_exact(H: np.ndarray, psi0: DenseState, times) -> list[DenseState]:
    """Evolve under exp(-i H t) for each requested time.

    The Hamiltonian is eigendecomposed once and reused for all times.
    """
    H = np.asarray(H)
    if H.shape != (psi0.basis.dim, psi0.basis.dim):
        raise ValueError("Hamiltonian does not match the state's basis")
    _check_hermitian(H)
    energies, vectors = np.linalg.eigh(H)
    coeff = vectors.conj().T @ psi0.vector
    out = []
    for t in np.atleast_1d(np.asarray(times, dtype=np.float64)):
        amp = vectors @ (np.exp(-1j * energies * t) * coeff)
        out.append(DenseState(psi0.basis, amp))
    return out


def _moments(psi: DenseState, values: np.ndarray) -> tuple[float, float]:
    weights = np.abs(psi.vector) ** 2
    mean = float(weights @ values)
    var = float(weights @ values**2) - mean**2
    return mean, max(0.0, var)


def charge_mean_mb(psi: DenseState) -> float:
    """<N> for fermion bases, <Sz> for spin bases."""
    return _moments(psi, psi.basis.charge_values())[0]


def charge_variance_mb(psi: DenseState) -> float:
    """Variance of the total charge (N, or Sz for spin bases)."""
    return _moments(psi, psi.basis.charge_values())[1]


def _subsystem_values(basis: SectorBasis, sites) -> np.ndarray:
    mask = sites_mask(sites, basis.n_modes)
    return np.bitwise_count(basis.states & np.int64(mask)).astype(np.float64)


def subsystem_charge_mean_mb(psi: DenseState, sites) -> float:
    return _moments(psi, _subsystem_values(psi.basis, sites))[0]


def subsystem_charge_variance_mb(psi: DenseState, sites) -> float:
    return _moments(psi, _subsystem_values(psi.basis, sites))[1]


def spin_z_mb(psi: DenseState) -> float:
    """<Sz> of a spinful-fermion state."""
    return _moments(psi, psi.basis.spin_z_values())[0]


def parity_mb(psi: DenseState) -> float:
    """Expectation value of the occupation parity (-1)^N."""
    pop = np.bitwise_count(psi.basis.states).astype(np.int64)
    return _moments(psi, np.where(pop % 2 == 0, 1.0, -1.0))[0]


def sample_occupations(rng: np.random.Generator, n_modes: int, n_filled: int) -> np.ndarray:
    """Uniformly random 0/1 vector with a fixed number of ones."""
    if not 0 <= n_filled <= n_modes:
        raise ValueError(f"cannot place {n_filled} particles on {n_modes} modes")
    occ = np.zeros(n_modes, dtype=np.int8)
    occ[rng.permutation(n_modes)[:n_filled]] = 1
    return occ


def random_sector_product_state(
    kind: str,
    L: int,
    charge,
    seed,
    basis: SectorBasis | None = None,
) -> DenseState:
    """Uniformly random occupation basis vector with a fixed charge.

    ``seed`` is an integer or a numpy Generator; a fixed integer seed
    reproduces the same state.  By default the state lives on the
    fixed-charge sector basis; pass ``basis`` to place it on a larger
    basis (e.g. a parity sector or the full space) instead.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if basis is None:
        basis = enumerate_sector(kind, L, charge=charge)
    n_modes = 2 * L if kind == "spinful" else L
    if kind == "spin":
        n_filled = int(round(charge + L / 2.0))
    else:
        n_filled = int(round(charge))
    occ = sample_occupations(rng, n_modes, n_filled)
    return basis_vector(basis, bits_from_occupations(occ))


def floquet_unitary_mb(hB: np.ndarray, h0: np.ndarray) -> np.ndarray:
    """Exact one-period operator exp(-i hB) @ exp(-i h0).

    Each exponential comes from its own eigendecomposition, so there is
    no splitting error; intended for cross-checking the single-particle
    Floquet evolution on small chains.
    """
    _check_hermitian(np.asarray(hB))
    _check_hermitian(np.asarray(h0))
    wB, vB = np.linalg.eigh(hB)
    w0, v0 = np.linalg.eigh(h0)
    uB = (vB * np.exp(-1j * wB)) @ vB.conj().T
    u0 = (v0 * np.exp(-1j * w0)) @ v0.conj().T
    return uB @ u0
