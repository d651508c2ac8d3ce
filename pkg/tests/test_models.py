import json
from itertools import combinations, product

import numpy as np
import pytest

from boundary_charge import (
    CapExceededError,
    ModelSpec,
    NambuMatrix,
    Variant,
    boundary_block,
    boundary_nambu,
    boundary_term_matrix,
    build_many_body,
    build_nambu,
    dispersion,
    enumerate_sector,
)
from boundary_charge.models import spin_chain_matrix

from _oracles import kron_fermion_hamiltonian, kron_spin_hamiltonian


def test_dispersion_values():
    assert dispersion(0.0, t0=1.0, mu0=0.0) == pytest.approx(2.0)
    assert dispersion(np.pi, t0=1.0, mu0=2.0) == pytest.approx(-4.0)


@pytest.mark.parametrize("mu0,closes", [(0.0, True), (1.5, True), (2.0, True), (2.5, False), (-3.0, False)])
def test_dispersion_gap_closing(mu0, closes):
    k = np.linspace(0, 2 * np.pi, 20001)
    gap = np.abs(dispersion(k, t0=1.0, mu0=mu0)).min()
    assert (gap < 1e-3) == closes


def test_free_nambu_hopping_block():
    spec = ModelSpec("free", L=4, t0=1.0, mu0=0.0, Delta=0.0)
    h = build_nambu(spec, include_boundary=False)
    assert np.allclose(np.linalg.eigvalsh(h.A), [-2.0, 0.0, 0.0, 2.0])
    assert np.all(h.B == 0)


def test_free_nambu_pairing_block():
    spec = ModelSpec("free", L=4, t0=1.0, mu0=0.0, Delta=1.0)
    h = build_nambu(spec, include_boundary=True)
    nonzero = np.argwhere(np.abs(h.B) > 0)
    assert sorted(map(tuple, nonzero)) == [(0, 1), (1, 0)]
    assert h.B[0, 1] == -h.B[1, 0]
    assert abs(h.B[0, 1]) == pytest.approx(1.0)


def test_transport_nambu_matches_scalar_assembly():
    spec = ModelSpec("transport", L=8, tl=1.0, tr=1.0, mul=-2.0, mur=0.0, Delta=1.0)
    h = build_nambu(spec, include_boundary=True)
    # independent element-by-element assembly of the two bridged half-chains
    A = np.zeros((8, 8))
    for i in range(8):
        A[i, i] = 2.0 if i < 4 else 0.0  # site energy -mu
    for i in range(3):
        A[i, i + 1] = A[i + 1, i] = 1.0
        A[i + 4, i + 5] = A[i + 5, i + 4] = 1.0
    A[3, 4] = A[4, 3] = 1.0  # the single bridge bond
    assert np.allclose(h.A, A, atol=1e-13)
    assert np.all(h.B == 0)


def test_build_nambu_rejects_interacting():
    with pytest.raises(ValueError):
        build_nambu(ModelSpec("xxz", L=6))
    with pytest.raises(ValueError):
        build_nambu(ModelSpec("interacting", L=6, U=2.0))
    # U = 0 collapses to the free chain
    h = build_nambu(ModelSpec("interacting", L=6, U=0.0, mu0=1.0), include_boundary=False)
    free = build_nambu(ModelSpec("free", L=6, mu0=1.0), include_boundary=False)
    assert np.allclose(h.H, free.H)


@pytest.mark.parametrize(
    "spec",
    [
        ModelSpec("free", L=6, t0=1.0, mu0=0.7, Delta=1.3),
        ModelSpec("spinful", L=4, t0=0.9, mu0=-0.4, Delta=0.8),
        ModelSpec("transport", L=8, tl=1.0, tr=0.5, mul=-2.0, mur=1.0, Delta=1.0),
    ],
)
def test_nambu_particle_hole_structure(spec):
    h = build_nambu(spec, include_boundary=True)
    H, M = h.H, h.M
    assert np.allclose(H, H.conj().T, atol=1e-14)
    X = np.block([[np.zeros((M, M)), np.eye(M)], [np.eye(M), np.zeros((M, M))]])
    assert np.allclose(X @ H.conj() @ X, -H, atol=1e-14)


@pytest.mark.parametrize(
    "spec",
    [
        ModelSpec("free", L=5, t0=1.0, mu0=0.7, Delta=0.9),
        ModelSpec("free", L=6, t0=1.0, mu0=-1.2, Delta=1.0),
        ModelSpec("spinful", L=4, t0=1.0, mu0=0.5, Delta=0.9),
    ],
)
def test_full_fock_spectrum_matches_quasiparticle_sums(spec):
    h = build_nambu(spec, include_boundary=True)
    basis = enumerate_sector(spec.kind, spec.L)
    H = build_many_body(spec, basis, include_boundary=True)
    eps, ground = h.quasiparticle_energies()
    sums = np.sort([ground + float(np.dot(occ, eps)) for occ in product([0, 1], repeat=h.M)])
    assert np.allclose(sums, np.linalg.eigvalsh(H), atol=1e-10)


def test_xxz_l2_doubled_bond():
    # the wrap bond coincides with the direct bond at L=2, doubling it
    basis = enumerate_sector("spin", 2)
    H = spin_chain_matrix(basis, Jperp=1.0, Jz=1.0, h=0.0, delta=0.0)
    expected = np.array(
        [
            [2.0, 0.0, 0.0, 0.0],
            [0.0, -2.0, 4.0, 0.0],
            [0.0, 4.0, -2.0, 0.0],
            [0.0, 0.0, 0.0, 2.0],
        ]
    )
    assert np.allclose(H, expected)
    assert np.allclose(np.linalg.eigvalsh(H), [-6.0, 2.0, 2.0, 2.0])


def test_xxz_matches_kron_oracle():
    spec = ModelSpec("xxz", L=4, Jperp=0.8, Jz=1.3, h=0.4, Delta=0.6)
    basis = enumerate_sector("spin", 4)
    H = build_many_body(spec, basis, include_boundary=True)
    assert np.allclose(H, kron_spin_hamiltonian(4, 0.8, 1.3, 0.4, delta=0.6), atol=1e-12)


def test_fermion_matches_kron_oracle():
    spec = ModelSpec("interacting", L=4, t0=1.0, mu0=0.6, U=1.7, Delta=0.9)
    basis = enumerate_sector("fermion", 4)
    H = build_many_body(spec, basis, include_boundary=True)
    oracle = kron_fermion_hamiltonian(4, 1.0, 0.6, U=1.7, delta=0.9)
    assert np.allclose(H, oracle, atol=1e-12)


def test_transport_matches_kron_oracle():
    spec = ModelSpec("transport", L=4, tl=0.8, tr=1.1, mul=-2.0, mur=0.5, Delta=0.7)
    basis = enumerate_sector("fermion", 4)
    H = build_many_body(spec, basis, include_boundary=True)
    oracle = kron_fermion_hamiltonian(
        4, 0.0, 0.0, bonds=[(1, 2), (3, 4)], site_mu=[-2.0, -2.0, 0.5, 0.5]
    )
    c = __import__("_oracles").fermion_ops(4)
    cd = [m.conj().T for m in c]
    oracle += 0.8 * (cd[0] @ c[1] + cd[1] @ c[0])
    oracle += 1.1 * (cd[2] @ c[3] + cd[3] @ c[2])
    oracle += 0.7 * (cd[1] @ c[2] + cd[2] @ c[1])
    assert np.allclose(H, oracle, atol=1e-12)


def test_interacting_u0_sector_spectra_are_free(free_l4_sectors=None):
    spec = ModelSpec("interacting", L=4, t0=1.0, mu0=0.8, U=0.0, Delta=0.0)
    single = np.linalg.eigvalsh(build_nambu(spec, include_boundary=False).A)
    for N in range(5):
        basis = enumerate_sector("fermion", 4, charge=N)
        H = build_many_body(spec, basis, include_boundary=False)
        expected = np.sort([sum(c) for c in combinations(single, N)]) if N else [0.0]
        assert np.allclose(np.linalg.eigvalsh(H), expected, atol=1e-10)


def test_many_body_hermitian_and_charge_commutation():
    cases = [
        ModelSpec("free", L=5, mu0=0.3, Delta=1.0),
        ModelSpec("interacting", L=5, U=2.0, mu0=1.0, Delta=1.0),
        ModelSpec("xxz", L=5, Jz=0.7, h=0.4, Delta=1.0),
        ModelSpec("spinful", L=4, mu0=0.2, Delta=1.0),
        ModelSpec("transport", L=6, mul=-1.0, mur=0.5, Delta=1.0),
    ]
    for spec in cases:
        basis = enumerate_sector(spec.kind, spec.L)
        H0 = build_many_body(spec, basis, include_boundary=False)
        H1 = build_many_body(spec, basis, include_boundary=True)
        assert np.array_equal(H0, H0.T)
        assert np.array_equal(H1, H1.T)
        charge = np.diag(basis.charge_values())
        assert np.array_equal(H0 @ charge, charge @ H0)  # bulk conserves the charge
        parity = np.diag(np.where(np.bitwise_count(basis.states) % 2 == 0, 1.0, -1.0))
        if spec.variant is Variant.XXZ_SPIN:
            assert np.abs(H1 @ charge - charge @ H1).max() > 0.1
        elif spec.variant is Variant.TRANSPORT:
            assert np.array_equal(H1 @ charge, charge @ H1)
        else:
            assert np.array_equal(H1 @ parity, parity @ H1)
            assert np.abs(H1 @ charge - charge @ H1).max() > 0.1


def test_sector_compatibility_errors():
    spec = ModelSpec("free", L=4, Delta=1.0)
    fixed_n = enumerate_sector("fermion", 4, charge=2)
    with pytest.raises(ValueError, match="parity"):
        build_many_body(spec, fixed_n, include_boundary=True)
    build_many_body(spec, fixed_n, include_boundary=False)  # bulk alone is fine
    spin_sector = enumerate_sector("spin", 4, charge=0.0)
    with pytest.raises(ValueError, match="unconstrained"):
        build_many_body(ModelSpec("xxz", L=4), spin_sector, include_boundary=True)
    with pytest.raises(ValueError, match="does not match"):
        build_many_body(spec, spin_sector, include_boundary=False)
    with pytest.raises(CapExceededError):
        build_many_body(spec, enumerate_sector("fermion", 4), cap=8)


def test_boundary_block_matches_full_matrix():
    spec = ModelSpec("interacting", L=6, U=2.0, Delta=0.9)
    full = enumerate_sector("fermion", 6)
    hb = boundary_term_matrix(spec, full).toarray()
    H1 = build_many_body(spec, full, include_boundary=True)
    H0 = build_many_body(spec, full, include_boundary=False)
    assert np.allclose(hb, H1 - H0, atol=1e-13)
    b2, b4 = enumerate_sector("fermion", 6, charge=2), enumerate_sector("fermion", 6, charge=4)
    block = boundary_block(spec, b2, b4).toarray()
    rows = [full.index_of(int(s)) for s in b4.states]
    cols = [full.index_of(int(s)) for s in b2.states]
    assert np.allclose(block, hb[np.ix_(rows, cols)], atol=1e-13)


def test_modelspec_validation():
    with pytest.raises(ValueError):
        ModelSpec("free", L=3)
    with pytest.raises(ValueError):
        ModelSpec("transport", L=7)
    with pytest.raises(ValueError):
        ModelSpec("free", L=6, t0=float("nan"))
    with pytest.raises(ValueError):
        ModelSpec("nosuch", L=6)


def test_modelspec_serialization_roundtrip():
    spec = ModelSpec("interacting", L=12, t0=1.0, mu0=2.0, Delta=1.0, U=2.0, boundary_on=True)
    assert ModelSpec.from_dict(spec.to_dict()) == spec
    assert ModelSpec.from_json(spec.to_json()) == spec
    assert ModelSpec.from_text(spec.to_text()) == spec
    text = "variant = xxz\nL = 8\nJz = 4.0  # comment\nh = 7\n"
    parsed = ModelSpec.from_text(text)
    assert parsed.variant is Variant.XXZ_SPIN and parsed.Jz == 4.0 and parsed.h == 7.0
    with pytest.raises(ValueError):
        ModelSpec.from_dict({"variant": "free", "L": 8, "bogus": 1})
    payload = json.loads(spec.to_json())
    assert set(payload) >= {"t0", "mu0", "Delta", "U", "Jperp", "Jz", "h", "tl", "tr", "mul", "mur", "L"}


def test_boundary_nambu_is_difference():
    spec = ModelSpec("free", L=6, mu0=0.5, Delta=1.2)
    hb = boundary_nambu(spec)
    assert np.allclose(
        hb.H, build_nambu(spec, True).H - build_nambu(spec, False).H, atol=1e-14
    )
    assert hb.const == 0.0


def test_nambu_matrix_rejects_bad_input():
    with pytest.raises(ValueError):
        NambuMatrix(np.ones((3, 3)))
    bad = np.eye(4)  # Hermitian but violates the particle-hole structure
    with pytest.raises(ValueError):
        NambuMatrix(bad)
    nonherm = np.zeros((4, 4))
    nonherm[0, 1] = 1.0
    with pytest.raises(ValueError):
        NambuMatrix(nonherm)
