import numpy as np
import pytest

from boundary_charge import (
    ModelSpec,
    NambuMatrix,
    basis_vector,
    build_many_body,
    build_nambu,
    boundary_nambu,
    charge_mean_mb,
    charge_variance,
    charge_variance_mb,
    energy,
    enumerate_sector,
    evolve,
    evolve_exact,
    floquet_step,
    floquet_unitary_mb,
    particle_number,
    product_state,
    sample_occupations,
    spin_z,
    subsystem_charge_variance,
    subsystem_charge_variance_mb,
)
from boundary_charge.fock import bits_from_occupations
from boundary_charge.gaussian import propagated_blocks

from _oracles import state_moments


def pairing_nambu(delta):
    B = np.array([[0.0, delta], [-delta, 0.0]])
    return NambuMatrix(np.block([[np.zeros((2, 2)), B], [-B, np.zeros((2, 2))]]))


def ed_pair(spec, occ, t):
    """(gaussian state, many-body state) evolved from the same product state."""
    h = build_nambu(spec, include_boundary=True)
    basis = enumerate_sector(spec.kind, spec.L)
    H = build_many_body(spec, basis, include_boundary=True)
    g = evolve(product_state(occ), h, t)
    psi = evolve_exact(H, basis_vector(basis, bits_from_occupations(occ)), [t])[0]
    return g, psi, h, H


def test_product_state_basics():
    state = product_state([1, 0, 1, 0])
    assert particle_number(state) == pytest.approx(2.0)
    assert charge_variance(state) == 0.0
    state.validate()
    occ = np.zeros(100)
    occ[::2] = 1
    assert particle_number(product_state(occ)) == pytest.approx(50.0, abs=1e-12)
    with pytest.raises(ValueError):
        product_state([0, 2])


def test_vacuum_energy_equals_recorded_constant():
    spec = ModelSpec("free", L=6, t0=1.0, mu0=1.3, Delta=0.0)
    h = build_nambu(spec, include_boundary=False)
    vac = product_state(np.zeros(6))
    assert energy(vac, h) == pytest.approx(0.0, abs=1e-12)  # no particles, no energy
    filled = product_state(np.ones(6))
    assert energy(filled, h) == pytest.approx(-1.3 * 6, abs=1e-12)  # hopping has no diagonal


def test_evolve_identity_and_composition():
    spec = ModelSpec("free", L=8, mu0=0.4, Delta=1.0)
    h = build_nambu(spec, include_boundary=True)
    occ = sample_occupations(np.random.default_rng(0), 8, 4)
    state = product_state(occ)
    assert np.allclose(evolve(state, h, 0.0).gamma, state.gamma, atol=1e-12)
    a = evolve(state, h, 5.0 + 11.0)
    b = evolve(evolve(state, h, 5.0), h, 11.0)
    assert np.allclose(a.gamma, b.gamma, atol=1e-9)


def test_evolve_preserves_invariants_at_long_times():
    spec = ModelSpec("free", L=10, mu0=0.7, Delta=1.0)
    h = build_nambu(spec, include_boundary=True)
    occ = sample_occupations(np.random.default_rng(3), 10, 5)
    evolve(product_state(occ), h, 4.0 * spec.L).validate(atol=1e-9)


def test_evolve_conserves_charge_without_boundary():
    spec = ModelSpec("free", L=10, mu0=0.7, Delta=0.0)
    h = build_nambu(spec, include_boundary=True)
    occ = sample_occupations(np.random.default_rng(1), 10, 5)
    for t in (1.0, 10.0, 20.0):
        state = evolve(product_state(occ), h, t)
        assert particle_number(state) == pytest.approx(5.0, abs=1e-10)
        assert charge_variance(state) <= 1e-12


def test_evolve_rejects_bad_input():
    spec = ModelSpec("free", L=6)
    h = build_nambu(spec)
    with pytest.raises(TypeError):
        evolve(product_state([1, 0, 1, 0, 1, 0]), np.eye(12), 1.0)
    with pytest.raises(ValueError):
        evolve(product_state([1, 0]), h, 1.0)


def test_gaussian_matches_ed_on_random_quench():
    spec = ModelSpec("free", L=8, t0=1.0, mu0=0.0, Delta=1.0)
    occ = sample_occupations(np.random.default_rng(42), 8, 4)
    g, psi, h, H = ed_pair(spec, occ, 16.0)
    assert charge_variance(g) == pytest.approx(charge_variance_mb(psi), abs=1e-8)
    assert particle_number(g) == pytest.approx(charge_mean_mb(psi), abs=1e-8)
    assert energy(g, h) == pytest.approx(
        float((psi.vector.conj() @ (H @ psi.vector)).real), abs=1e-8
    )


def test_charge_variance_bcs_pair():
    delta, t = 0.9, 0.3
    h = pairing_nambu(delta)
    state = evolve(product_state([0, 0]), h, t)
    p = np.sin(delta * t) ** 2  # pair-occupation probability
    assert charge_variance(state) == pytest.approx(4 * p * (1 - p), abs=1e-12)
    assert particle_number(state) == pytest.approx(2 * p, abs=1e-12)


def test_charge_variance_nonnegative_clamp():
    state = product_state([1, 0, 1])
    assert charge_variance(state) >= 0.0


def test_floquet_step_identity_and_ed_match():
    spec = ModelSpec("free", L=6, t0=1.0, mu0=0.8, Delta=1.0)
    M = spec.L
    occ = sample_occupations(np.random.default_rng(5), 6, 3)
    state = product_state(occ)
    same = floquet_step(state, np.eye(2 * M), np.eye(2 * M))
    assert np.allclose(same.gamma, state.gamma)
    with pytest.raises(ValueError):
        floquet_step(state, np.eye(4), np.eye(2 * M))

    u0 = build_nambu(spec, include_boundary=False).propagator(1.0)
    uB = boundary_nambu(spec).propagator(1.0)
    for _ in range(7):
        state = floquet_step(state, uB, u0)

    basis = enumerate_sector("fermion", 6)
    H0 = build_many_body(spec, basis, include_boundary=False)
    HB = build_many_body(spec, basis, include_boundary=True) - H0
    U = floquet_unitary_mb(HB, H0)
    vec = basis_vector(basis, bits_from_occupations(occ)).vector
    for _ in range(7):
        vec = U @ vec
    pop = np.bitwise_count(basis.states).astype(np.float64)
    mean, var = state_moments(vec, pop)
    assert charge_variance(state) == pytest.approx(var, abs=1e-8)
    assert particle_number(state) == pytest.approx(mean, abs=1e-8)


def test_floquet_spinful_conserves_spin_z():
    spec = ModelSpec("spinful", L=8, t0=1.0, mu0=3.0, Delta=1.0)
    u0 = build_nambu(spec, include_boundary=False).propagator(1.0)
    uB = boundary_nambu(spec).propagator(1.0)
    occ = np.zeros(16, dtype=int)
    occ[0::4] = 1  # two up, two down per quarter
    occ[3::4] = 1
    state = product_state(occ)
    sz0 = spin_z(state)
    for _ in range(12):
        state = floquet_step(state, uB, u0)
    assert spin_z(state) == pytest.approx(sz0, abs=1e-10)
    assert charge_variance(state) > 0.01  # charge itself is not conserved


def test_spin_z_requires_even_mode_count():
    with pytest.raises(ValueError):
        spin_z(product_state([1, 0, 1]))


def test_energy_invariant_under_own_evolution():
    spec = ModelSpec("free", L=8, mu0=0.6, Delta=1.0)
    h = build_nambu(spec, include_boundary=True)
    occ = sample_occupations(np.random.default_rng(9), 8, 4)
    state = product_state(occ)
    e0 = energy(state, h)
    assert energy(evolve(state, h, 2.0 * spec.L), h) == pytest.approx(e0, abs=1e-9)


def test_subsystem_charge_variance():
    spec = ModelSpec("free", L=8, mu0=0.2, Delta=1.0)
    h = build_nambu(spec, include_boundary=True)
    occ = sample_occupations(np.random.default_rng(11), 8, 4)
    state = evolve(product_state(occ), h, 9.0)
    assert subsystem_charge_variance(state, range(1, 9)) == pytest.approx(
        charge_variance(state), abs=1e-12
    )
    assert subsystem_charge_variance(state, []) == 0.0
    with pytest.raises(ValueError):
        subsystem_charge_variance(state, [0])
    with pytest.raises(ValueError):
        subsystem_charge_variance(state, [9])


def test_transport_right_half_variance_matches_ed():
    spec = ModelSpec("transport", L=8, tl=1.0, tr=1.0, mul=-2.0, mur=0.0, Delta=1.0)
    occ = np.array([1, 1, 0, 0, 0, 1, 0, 0])
    h = build_nambu(spec, include_boundary=True)
    g = evolve(product_state(occ), h, 16.0)
    basis = enumerate_sector("fermion", 8, charge=3)
    H = build_many_body(spec, basis, include_boundary=True)
    psi = evolve_exact(H, basis_vector(basis, bits_from_occupations(occ)), [16.0])[0]
    right = range(5, 9)
    assert subsystem_charge_variance(g, right) == pytest.approx(
        subsystem_charge_variance_mb(psi, right), abs=1e-8
    )


def test_propagated_blocks_equal_evolve():
    spec = ModelSpec("free", L=10, mu0=0.9, Delta=1.0)
    h = build_nambu(spec, include_boundary=True)
    occ = sample_occupations(np.random.default_rng(2), 10, 5)
    t = 13.7
    state = evolve(product_state(occ), h, t)
    G, F = propagated_blocks(h.propagator(t), occ)
    assert np.allclose(G, state.G, atol=1e-12)
    assert np.allclose(F, state.F, atol=1e-12)


def test_half_filling_particle_number_stays_near_half():
    spec = ModelSpec("free", L=60, t0=1.0, mu0=0.0, Delta=1.0)
    h = build_nambu(spec, include_boundary=True)
    occ = sample_occupations(np.random.default_rng(17), 60, 30)
    state = evolve(product_state(occ), h, 2.0 * spec.L)
    assert abs(particle_number(state) - 30.0) < 2.0  # O(1), not O(L)
