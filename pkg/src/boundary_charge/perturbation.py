"""Projected-subspace analysis of the boundary-coupling criterion.

Whether the boundary term can mix charge sectors without changing the
energy is decided by its matrix elements between near-degenerate
eigenstates of the bulk Hamiltonian carrying different charges.  This
module computes sector-resolved spectra, searches cross-charge
near-degenerate pairs, averages the boundary matrix element over them,
and builds the energy-dependent effective Hamiltonian

    H_eff(E) = P H P + P H Q (E - Q H Q)^{-1} Q H P

on an orthonormal column basis P of the retained subspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fock import DEFAULT_CAP, SectorBasis, enumerate_sector
from .models import ModelSpec, Variant, boundary_term_matrix, build_many_body

__all__ = [
    "SectorSpectrum",
    "DegeneratePair",
    "EffectiveHamiltonian",
    "ResolventSingularError",
    "sector_spectra",
    "find_pairs",
    "boundary_matrix_element",
    "effective_hamiltonian",
    "php_offdiag_scaling",
]


class ResolventSingularError(ValueError):
    """The evaluation energy is too close to the spectrum of Q H Q."""


@dataclass
class SectorSpectrum:
    """Full spectrum of the bulk Hamiltonian within one charge sector."""

    charge: float
    energies: np.ndarray
    vectors: np.ndarray
    basis: SectorBasis


@dataclass
class DegeneratePair:
    """Two eigenstates from different charge sectors with a small energy gap."""

    spectrum_a: SectorSpectrum
    index_a: int
    spectrum_b: SectorSpectrum
    index_b: int

    @property
    def charge_a(self) -> float:
        return self.spectrum_a.charge

    @property
    def charge_b(self) -> float:
        return self.spectrum_b.charge

    @property
    def energy_a(self) -> float:
        return float(self.spectrum_a.energies[self.index_a])

    @property
    def energy_b(self) -> float:
        return float(self.spectrum_b.energies[self.index_b])

    @property
    def gap(self) -> float:
        return abs(self.energy_a - self.energy_b)

    @property
    def vector_a(self) -> np.ndarray:
        return self.spectrum_a.vectors[:, self.index_a]

    @property
    def vector_b(self) -> np.ndarray:
        return self.spectrum_b.vectors[:, self.index_b]


@dataclass
class EffectiveHamiltonian:
    """First-order block and full energy-dependent effective Hamiltonian."""

    projector: np.ndarray  # orthonormal columns spanning the retained subspace
    energy: float
    php: np.ndarray  # P H P alone, on the column basis
    matrix: np.ndarray  # php plus the resolvent correction


def realizable_charges(spec: ModelSpec) -> list[float]:
    """All charge labels of the bulk symmetry sectors of a model."""
    if spec.variant is Variant.XXZ_SPIN:
        return [n - spec.L / 2.0 for n in range(spec.L + 1)]
    return [float(n) for n in range(spec.n_modes + 1)]


def sector_spectra(
    spec: ModelSpec, charges, cap: int = DEFAULT_CAP
) -> list[SectorSpectrum]:
    """Diagonalize the bulk Hamiltonian (boundary off) per charge sector."""
    out = []
    for charge in charges:
        basis = enumerate_sector(spec.kind, spec.L, charge=charge, cap=cap)
        H = build_many_body(spec, basis, include_boundary=False, cap=cap)
        energies, vectors = np.linalg.eigh(H)
        out.append(SectorSpectrum(float(charge), energies, vectors, basis))
    return out


def find_pairs(
    spectra,
    delta_charge,
    energy_tol: float,
    max_pairs: int | None = None,
    seed: int | None = None,
    charge_tol: float = 1e-9,
) -> list[DegeneratePair]:
    """Cross-sector eigenstate pairs with energy difference <= energy_tol.

    ``delta_charge`` is one value or a sequence; a pair (a, b) qualifies
    when ``charge_b - charge_a`` matches one of them within
    ``charge_tol``.  With ``max_pairs`` set, a uniform subset of that
    size is drawn with the given seed; enumeration order (and hence the
    sampled subset) is deterministic.
    """
    spectra = list(spectra)
    if len(spectra) < 2:
        raise ValueError("need at least two sector spectra to form pairs")
    deltas = np.atleast_1d(np.asarray(delta_charge, dtype=np.float64))
    pairs: list[DegeneratePair] = []
    for sa in spectra:
        for sb in spectra:
            if sa is sb:
                continue
            if not np.any(np.abs((sb.charge - sa.charge) - deltas) <= charge_tol):
                continue
            ea, eb = sa.energies, sb.energies
            lo = np.searchsorted(eb, ea - energy_tol, side="left")
            hi = np.searchsorted(eb, ea + energy_tol, side="right")
            for ia in range(len(ea)):
                for ib in range(lo[ia], hi[ia]):
                    pairs.append(DegeneratePair(sa, ia, sb, int(ib)))
    if max_pairs is not None and len(pairs) > max_pairs:
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(len(pairs), size=max_pairs, replace=False))
        pairs = [pairs[i] for i in keep]
    return pairs


def _embedding(sub: SectorBasis, full: SectorBasis) -> np.ndarray:
    pos = np.searchsorted(full.states, sub.states)
    if pos.max(initial=-1) >= full.dim or not np.array_equal(
        full.states[pos], sub.states
    ):
        raise ValueError("sector basis does not embed into the supplied basis")
    return pos


def boundary_matrix_element(pairs, hb, hb_basis: SectorBasis):
    """Mean |<b| boundary |a>| over pairs; also returns per-pair values.

    ``hb`` is the boundary term on a basis containing every pair's two
    sectors (e.g. the full space), as built by
    :func:`~boundary_charge.models.boundary_term_matrix`.
    """
    pairs = list(pairs)
    values = np.zeros(len(pairs))
    cache: dict[int, np.ndarray] = {}
    for n, pair in enumerate(pairs):
        emb = []
        for spectrum in (pair.spectrum_a, pair.spectrum_b):
            key = id(spectrum.basis)
            if key not in cache:
                cache[key] = _embedding(spectrum.basis, hb_basis)
            emb.append(cache[key])
        va = np.zeros(hb_basis.dim, dtype=np.complex128)
        va[emb[0]] = pair.vector_a
        vb = np.zeros(hb_basis.dim, dtype=np.complex128)
        vb[emb[1]] = pair.vector_b
        values[n] = abs(vb.conj() @ (hb @ va))
    mean = float(values.mean()) if len(values) else 0.0
    return mean, values


def effective_hamiltonian(
    H_full: np.ndarray,
    p_basis: np.ndarray,
    E: float,
    resolvent_guard: float = 1e-8,
) -> EffectiveHamiltonian:
    """Effective Hamiltonian on the subspace spanned by ``p_basis``.

    ``p_basis`` holds orthonormal columns.  The resolvent correction is
    evaluated through the eigendecomposition of the complementary block,
    never by forming an explicit inverse; if ``E`` lies within
    ``resolvent_guard`` of that block's spectrum a
    :class:`ResolventSingularError` is raised.

    For an exact eigenpair (E, psi) of ``H_full`` the projected vector
    satisfies ``matrix @ (P+ psi) = E (P+ psi)``.
    """
    H = np.asarray(H_full)
    P = np.asarray(p_basis, dtype=np.complex128)
    if P.ndim != 2 or P.shape[0] != H.shape[0]:
        raise ValueError("p_basis must be a (dim, k) column matrix on H's space")
    k = P.shape[1]
    if not np.allclose(P.conj().T @ P, np.eye(k), atol=1e-10):
        raise ValueError("p_basis columns are not orthonormal")
    php = P.conj().T @ H @ P
    if k == H.shape[0]:
        return EffectiveHamiltonian(P, float(E), php, php.copy())
    Qfull, _ = np.linalg.qr(P, mode="complete")
    Qc = Qfull[:, k:]  # orthonormal basis of the complement
    hq = Qc.conj().T @ (H @ Qc)
    eq, vq = np.linalg.eigh(hq)
    distance = np.min(np.abs(E - eq))
    if distance < resolvent_guard:
        raise ResolventSingularError(
            f"E={E} lies within {distance:.3e} of the complementary spectrum"
        )
    hpq = P.conj().T @ (H @ Qc)
    correction = (hpq @ (vq / (E - eq))) @ (vq.conj().T @ hpq.conj().T)
    return EffectiveHamiltonian(P, float(E), php, php + correction)


def php_offdiag_scaling(
    spec: ModelSpec,
    L_list,
    window: float,
    max_pairs: int | None = None,
    seed: int = 0,
) -> list[tuple[int, float, int]]:
    """Mean cross-charge first-order coupling versus chain length.

    For each L, diagonalizes every charge sector of the bulk model,
    collects cross-charge pairs within the energy window, and averages
    the boundary matrix element; rows are (L, mean element, pair count).
    Meant for the gapless regime, where the mean shrinks like 1/L.
    """
    rows = []
    for L in L_list:
        spec_L = spec.with_params(L=int(L))
        spectra = sector_spectra(spec_L, realizable_charges(spec_L))
        delta = (1.0, -1.0) if spec_L.variant is Variant.XXZ_SPIN else (2.0,)
        pairs = find_pairs(spectra, delta, window, max_pairs=max_pairs, seed=seed)
        full = enumerate_sector(spec_L.kind, spec_L.L)
        hb = boundary_term_matrix(spec_L, full)
        mean, _ = boundary_matrix_element(pairs, hb, full)
        rows.append((int(L), mean, len(pairs)))
    return rows
