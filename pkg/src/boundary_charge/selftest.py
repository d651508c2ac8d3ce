"""Cross-engine consistency checks runnable from the command line.

Each check pits one computational path against an independent one on a
chain small enough for brute force: the correlation-matrix engine against
dense many-body evolution, the Wick variance formula against direct
moments of the amplitude vector, and the projected effective Hamiltonian
against exact eigenpairs.
"""

from __future__ import annotations

import numpy as np

from . import ed, gaussian
from .fock import bits_from_occupations, enumerate_sector
from .models import ModelSpec, Variant, build_many_body, build_nambu
from .perturbation import ResolventSingularError, effective_hamiltonian


def _random_case(rng, spec, basis, h):
    occ = ed.sample_occupations(rng, spec.L, spec.L // 2)
    t = float(rng.uniform(0.0, 2.0 * spec.L))
    g_state = gaussian.evolve(gaussian.product_state(occ), h, t)
    H = build_many_body(spec, basis, include_boundary=True)
    psi0 = ed.basis_vector(basis, bits_from_occupations(occ))
    psi_t = ed.evolve_exact(H, psi0, [t])[0]
    return g_state, psi_t, H


def check_gaussian_vs_ed(n_cases: int = 10, tol: float = 1e-8):
    """Correlation-matrix observables against dense many-body evolution."""
    rng = np.random.default_rng(11)
    spec = ModelSpec(Variant.FREE_FERMION, L=6, t0=1.0, mu0=0.7, Delta=1.0)
    basis = enumerate_sector("fermion", spec.L)
    h = build_nambu(spec, include_boundary=True)
    worst = 0.0
    for _ in range(n_cases):
        g_state, psi_t, _ = _random_case(rng, spec, basis, h)
        worst = max(
            worst,
            abs(gaussian.particle_number(g_state) - ed.charge_mean_mb(psi_t)),
            abs(gaussian.charge_variance(g_state) - ed.charge_variance_mb(psi_t)),
            abs(
                gaussian.subsystem_charge_variance(g_state, range(1, 4))
                - ed.subsystem_charge_variance_mb(psi_t, range(1, 4))
            ),
        )
    return worst <= tol, f"max observable deviation {worst:.2e} (tol {tol:.0e})"


def check_wick_vs_brute_force(n_cases: int = 10, tol: float = 1e-8):
    """Wick-factorized charge variance against amplitude-vector moments."""
    rng = np.random.default_rng(23)
    spec = ModelSpec(Variant.FREE_FERMION, L=6, t0=1.0, mu0=0.3, Delta=0.8)
    basis = enumerate_sector("fermion", spec.L)
    h = build_nambu(spec, include_boundary=True)
    worst = 0.0
    for _ in range(n_cases):
        g_state, psi_t, _ = _random_case(rng, spec, basis, h)
        pop = np.bitwise_count(basis.states).astype(np.float64)
        weights = np.abs(psi_t.vector) ** 2
        brute = float(weights @ pop**2) - float(weights @ pop) ** 2
        worst = max(worst, abs(gaussian.charge_variance(g_state) - brute))
    return worst <= tol, f"max variance deviation {worst:.2e} (tol {tol:.0e})"


def check_effective_hamiltonian(n_pairs: int = 20, tol: float = 1e-8):
    """Exact eigenpairs reproduced by the projected effective Hamiltonian."""
    spec = ModelSpec(Variant.FREE_FERMION, L=8, t0=1.0, mu0=0.9, Delta=1.0)
    basis = enumerate_sector("fermion", spec.L)
    H = build_many_body(spec, basis, include_boundary=True)
    h0 = build_many_body(spec, basis, include_boundary=False)
    energies, vectors = np.linalg.eigh(H)
    _, vectors0 = np.linalg.eigh(h0)
    P = vectors0[:, :40]
    rng = np.random.default_rng(5)
    tested = 0
    worst = 0.0
    for idx in rng.permutation(len(energies)):
        try:
            eff = effective_hamiltonian(H, P, float(energies[idx]))
        except ResolventSingularError:
            continue
        proj = P.conj().T @ vectors[:, idx]
        norm = np.linalg.norm(proj)
        if norm < 1e-2:  # no meaningful support in the retained subspace
            continue
        residual = np.linalg.norm(eff.matrix @ proj - energies[idx] * proj) / norm
        worst = max(worst, residual)
        tested += 1
        if tested >= n_pairs:
            break
    ok = tested >= n_pairs and worst <= tol
    return ok, f"{tested} eigenpairs, max residual {worst:.2e} (tol {tol:.0e})"


def check_energy_conservation(tol: float = 1e-8):
    """Energy drift along trajectories of both engines."""
    spec = ModelSpec(Variant.FREE_FERMION, L=8, t0=1.0, mu0=0.4, Delta=1.0)
    h = build_nambu(spec, include_boundary=True)
    occ = ed.sample_occupations(np.random.default_rng(7), spec.L, 4)
    state0 = gaussian.product_state(occ)
    e0 = gaussian.energy(state0, h)
    drift = max(
        abs(gaussian.energy(gaussian.evolve(state0, h, t), h) - e0)
        for t in (0.5, spec.L, 2.0 * spec.L)
    )
    spec_i = ModelSpec(Variant.INTERACTING_FERMION, L=6, U=2.0, mu0=1.0, Delta=1.0)
    basis = enumerate_sector("fermion", spec_i.L, parity=0)
    H = build_many_body(spec_i, basis, include_boundary=True)
    psi0 = ed.random_sector_product_state("fermion", spec_i.L, 2, seed=3, basis=basis)
    for psi in ed.evolve_exact(H, psi0, [spec_i.L, 2.0 * spec_i.L]):
        e = float((psi.vector.conj() @ (H @ psi.vector)).real)
        e_ref = float((psi0.vector.conj() @ (H @ psi0.vector)).real)
        drift = max(drift, abs(e - e_ref))
    return drift <= tol, f"max energy drift {drift:.2e} (tol {tol:.0e})"


def check_conserving_limit(tol: float = 1e-12):
    """All variances vanish when the boundary term is absent."""
    worst = 0.0
    spec = ModelSpec(Variant.FREE_FERMION, L=8, mu0=0.5, Delta=0.0)
    h = build_nambu(spec, include_boundary=True)
    occ = ed.sample_occupations(np.random.default_rng(1), spec.L, 4)
    for t in (1.0, spec.L, 2.0 * spec.L):
        worst = max(worst, gaussian.charge_variance(gaussian.evolve(gaussian.product_state(occ), h, t)))
    spec_s = ModelSpec(Variant.XXZ_SPIN, L=6, Jz=1.0, h=0.3, Delta=0.0)
    basis = enumerate_sector("spin", spec_s.L)
    H = build_many_body(spec_s, basis, include_boundary=True)
    psi0 = ed.random_sector_product_state("spin", spec_s.L, 0.0, seed=2, basis=basis)
    for psi in ed.evolve_exact(H, psi0, [spec_s.L, 2.0 * spec_s.L]):
        worst = max(worst, ed.charge_variance_mb(psi))
    return worst <= tol, f"max residual variance {worst:.2e} (tol {tol:.0e})"


CHECKS = [
    ("gaussian vs exact diagonalization", check_gaussian_vs_ed),
    ("wick variance vs brute force", check_wick_vs_brute_force),
    ("effective-hamiltonian eigenpair residuals", check_effective_hamiltonian),
    ("energy conservation", check_energy_conservation),
    ("conserving limit has zero variance", check_conserving_limit),
]


def run_selftest(stream=None) -> bool:
    """Run every check, print one pass/fail line each, return overall result."""
    import sys

    stream = stream or sys.stdout
    all_ok = True
    for name, check in CHECKS:
        ok, detail = check()
        all_ok &= ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=stream)
    return all_ok
