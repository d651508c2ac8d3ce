"""Chain Hamiltonians in single-particle (Nambu) and many-body form.

Five chain families are supported, each made of a bulk part that conserves
a charge (total fermion number, or total z-magnetization) plus a boundary
term with O(1) support that breaks the conservation law:

* ``free``         - fermion ring with hopping t0 and chemical potential
                     mu0; boundary pair source Delta*(c1+ c2+ + c2 c1).
* ``interacting``  - the free ring plus nearest-neighbour density-density
                     coupling U; same boundary term.
* ``xxz``          - XXZ ring of Pauli spins in a longitudinal field h;
                     boundary term Delta * sigma_x on site 1.
* ``spinful``      - two decoupled fermion rings (spin up/down); boundary
                     pair source acting on (1,up) and (2,down), which
                     preserves total z-magnetization but not total charge.
* ``transport``    - two open half-chains with separate hoppings and
                     chemical potentials; the "boundary" term is the
                     hopping bridge between sites L/2 and L/2+1, which
                     preserves total charge but not the right-half charge.

Quadratic Hamiltonians are represented as :class:`NambuMatrix` on the
doubled mode basis ``(c_1..c_M, c_1+..c_M+)``; interacting ones as dense
matrices on a :class:`~boundary_charge.fock.SectorBasis`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from enum import Enum

import numpy as np
from scipy import sparse

from .fock import (
    DEFAULT_CAP,
    CapExceededError,
    SectorBasis,
    apply_annihilate,
    apply_create,
    apply_hop,
    jw_phase,
)

__all__ = [
    "Variant",
    "ModelSpec",
    "NambuMatrix",
    "dispersion",
    "build_nambu",
    "boundary_nambu",
    "build_many_body",
    "boundary_term_matrix",
    "boundary_block",
    "fermion_chain_matrix",
    "spin_chain_matrix",
    "spinful_chain_matrix",
    "transport_chain_matrix",
]


class Variant(str, Enum):
    """The five chain families."""

    FREE_FERMION = "free"
    INTERACTING_FERMION = "interacting"
    XXZ_SPIN = "xxz"
    SPINFUL_FERMION = "spinful"
    TRANSPORT = "transport"


_COUPLING_FIELDS = ("t0", "mu0", "Delta", "U", "Jperp", "Jz", "h", "tl", "tr", "mul", "mur")


@dataclass(frozen=True)
class ModelSpec:
    """Parameter set of one chain model plus its boundary term.

    Only the couplings relevant to ``variant`` are used by the builders;
    the rest are ignored.  ``boundary_on`` is the default for builders
    called without an explicit ``include_boundary`` flag.
    """

    variant: Variant
    L: int
    t0: float = 1.0
    mu0: float = 0.0
    Delta: float = 1.0
    U: float = 0.0
    Jperp: float = 1.0
    Jz: float = 1.0
    h: float = 0.0
    tl: float = 1.0
    tr: float = 1.0
    mul: float = 0.0
    mur: float = 0.0
    boundary_on: bool = True

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not isinstance(self.L, (int, np.integer)) or isinstance(self.L, bool):
            raise ValueError("L must be an integer")
        object.__setattr__(self, "L", int(self.L))
        if self.L < 4:
            raise ValueError("L must be at least 4")
        if self.variant is Variant.TRANSPORT and self.L % 2:
            raise ValueError("transport chains need an even L")
        for name in _COUPLING_FIELDS:
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"coupling {name} must be finite")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "boundary_on", bool(self.boundary_on))

    @property
    def kind(self) -> str:
        """Basis kind expected by the many-body builders."""
        if self.variant is Variant.XXZ_SPIN:
            return "spin"
        if self.variant is Variant.SPINFUL_FERMION:
            return "spinful"
        return "fermion"

    @property
    def n_modes(self) -> int:
        return 2 * self.L if self.variant is Variant.SPINFUL_FERMION else self.L

    @property
    def is_quadratic(self) -> bool:
        """True if the full Hamiltonian is quadratic in fermion operators."""
        if self.variant is Variant.XXZ_SPIN:
            return False
        if self.variant is Variant.INTERACTING_FERMION:
            return self.U == 0.0
        return True

    def with_params(self, **updates) -> "ModelSpec":
        return replace(self, **updates)

    # -- flat key/value serialization ------------------------------------

    def to_dict(self) -> dict:
        d = {"variant": self.variant.value, "L": self.L}
        for name in _COUPLING_FIELDS:
            d[name] = getattr(self, name)
        d["boundary_on"] = self.boundary_on
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown model keys: {sorted(unknown)}")
        if "variant" not in data or "L" not in data:
            raise ValueError("model config needs at least 'variant' and 'L'")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        lines = []
        for key, value in self.to_dict().items():
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ModelSpec":
        data: dict = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "variant":
                data[key] = value
            elif key == "L":
                data[key] = int(value)
            elif key == "boundary_on":
                data[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                data[key] = float(value)
        return cls.from_dict(data)


def dispersion(k, t0: float = 1.0, mu0: float = 0.0):
    """Single-particle energy 2*t0*cos(k) - mu0 of the fermion ring."""
    return 2.0 * t0 * np.cos(k) - mu0


class NambuMatrix:
    """Single-particle matrix of a quadratic fermion Hamiltonian.

    The matrix ``H`` acts on the doubled mode basis ``(c, c+)`` and has
    the block form ``[[A, B], [-conj(B), -conj(A)]]`` with A Hermitian
    (hopping/potential) and B antisymmetric (pairing).  Together with the
    recorded scalar ``const`` it reproduces the many-body operator:

        H_many_body = 0.5 * alpha+ H alpha + const,   alpha = (c, c+),

    where ``const = 0.5 * trace(A)`` absorbs the reordering of the
    ``c c+`` terms, so energies computed from either representation agree
    without an offset.
    """

    def __init__(self, matrix, const: float = 0.0, validate: bool = True):
        H = np.array(matrix, dtype=np.complex128)
        if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] % 2:
            raise ValueError("Nambu matrix must be square with even dimension")
        self.H = H
        self.const = float(const)
        self._eig = None
        if validate:
            self._validate()

    def _validate(self):
        H = self.H
        M = self.M
        scale = max(1.0, float(np.abs(H).max()))
        if not np.allclose(H, H.conj().T, atol=1e-12 * scale):
            raise ValueError("Nambu matrix must be Hermitian")
        swapped = np.block(
            [[H[M:, M:].conj(), H[M:, :M].conj()], [H[:M, M:].conj(), H[:M, :M].conj()]]
        )
        if not np.allclose(swapped, -H, atol=1e-12 * scale):
            raise ValueError("Nambu matrix violates the particle-hole block structure")

    @property
    def M(self) -> int:
        return self.H.shape[0] // 2

    @property
    def A(self) -> np.ndarray:
        return self.H[: self.M, : self.M]

    @property
    def B(self) -> np.ndarray:
        return self.H[: self.M, self.M :]

    def eig(self):
        """Cached eigendecomposition (energies ascending, unitary)."""
        if self._eig is None:
            self._eig = np.linalg.eigh(self.H)
        return self._eig

    def propagator(self, t: float) -> np.ndarray:
        """Unitary exp(-i H t) on the doubled mode space."""
        energies, vectors = self.eig()
        return (vectors * np.exp(-1j * energies * t)) @ vectors.conj().T

    def quasiparticle_energies(self):
        """Nonnegative mode energies and the ground-state energy.

        The many-body spectrum is ``ground + sum of any subset of eps``.
        """
        energies, _ = self.eig()
        eps = energies[self.M :]
        ground = self.const - 0.5 * float(np.sum(eps))
        return eps.copy(), ground


def _ring_bonds(L: int) -> list[tuple[int, int]]:
    # 0-based (j, j+1) pairs; the wrap bond duplicates an existing pair at L=2
    return [(j, (j + 1) % L) for j in range(L)]


def _open_bonds(start: int, stop: int) -> list[tuple[int, int]]:
    return [(j, j + 1) for j in range(start, stop)]


def _nambu_from_blocks(A: np.ndarray, B: np.ndarray) -> NambuMatrix:
    H = np.block([[A, B], [-B.conj(), -A.conj()]])
    return NambuMatrix(H, const=0.5 * float(np.trace(A).real))


def _free_blocks(L, t0, mu0, delta, include_boundary):
    A = np.zeros((L, L), dtype=np.complex128)
    for a, b in _ring_bonds(L):
        A[a, b] += t0
        A[b, a] += t0
    A -= mu0 * np.eye(L)
    B = np.zeros((L, L), dtype=np.complex128)
    if include_boundary:
        B[0, 1] = delta
        B[1, 0] = -delta
    return A, B


def _spinful_blocks(L, t0, mu0, delta, include_boundary):
    n = 2 * L
    A = np.zeros((n, n), dtype=np.complex128)
    for spin in (0, 1):
        for a, b in _ring_bonds(L):
            A[2 * a + spin, 2 * b + spin] += t0
            A[2 * b + spin, 2 * a + spin] += t0
    A -= mu0 * np.eye(n)
    B = np.zeros((n, n), dtype=np.complex128)
    if include_boundary:
        up1, down2 = 0, 3  # modes (site 1, up) and (site 2, down)
        B[up1, down2] = delta
        B[down2, up1] = -delta
    return A, B


def _transport_blocks(L, tl, tr, mul, mur, delta, include_boundary):
    half = L // 2
    A = np.zeros((L, L), dtype=np.complex128)
    for a, b in _open_bonds(0, half - 1):
        A[a, b] += tl
        A[b, a] += tl
    for a, b in _open_bonds(half, L - 1):
        A[a, b] += tr
        A[b, a] += tr
    A[:half, :half] -= mul * np.eye(half)
    A[half:, half:] -= mur * np.eye(half)
    if include_boundary:
        A[half - 1, half] += delta
        A[half, half - 1] += delta
    return A, np.zeros((L, L), dtype=np.complex128)


def build_nambu(spec: ModelSpec, include_boundary: bool | None = None) -> NambuMatrix:
    """Single-particle Nambu matrix of a quadratic model.

    Raises ValueError for interacting variants (``xxz``, or
    ``interacting`` with U != 0), which have no quadratic form.
    """
    if include_boundary is None:
        include_boundary = spec.boundary_on
    if not spec.is_quadratic:
        raise ValueError(f"variant {spec.variant.value!r} is not quadratic")
    if spec.variant in (Variant.FREE_FERMION, Variant.INTERACTING_FERMION):
        A, B = _free_blocks(spec.L, spec.t0, spec.mu0, spec.Delta, include_boundary)
    elif spec.variant is Variant.SPINFUL_FERMION:
        A, B = _spinful_blocks(spec.L, spec.t0, spec.mu0, spec.Delta, include_boundary)
    elif spec.variant is Variant.TRANSPORT:
        A, B = _transport_blocks(
            spec.L, spec.tl, spec.tr, spec.mul, spec.mur, spec.Delta, include_boundary
        )
    else:  # pragma: no cover
        raise ValueError(f"unsupported variant {spec.variant}")
    return _nambu_from_blocks(A, B)


def boundary_nambu(spec: ModelSpec) -> NambuMatrix:
    """Nambu matrix of the boundary term alone."""
    full = build_nambu(spec, include_boundary=True)
    bulk = build_nambu(spec, include_boundary=False)
    return NambuMatrix(full.H - bulk.H, const=full.const - bulk.const)


# -- many-body matrices ---------------------------------------------------


def _pair_actions(state: int, mode_a: int, mode_b: int, delta: float):
    """Matrix elements of delta*(c_a+ c_b+ + c_b c_a) out of one state."""
    out = []
    r = apply_create(state, mode_b)
    if r is not None:
        ph, s1 = r
        r2 = apply_create(s1, mode_a)
        if r2 is not None:
            ph2, s2 = r2
            out.append((s2, delta * ph * ph2))
    r = apply_annihilate(state, mode_a)
    if r is not None:
        ph, s1 = r
        r2 = apply_annihilate(s1, mode_b)
        if r2 is not None:
            ph2, s2 = r2
            out.append((s2, delta * ph * ph2))
    return out


def _boundary_actions(spec: ModelSpec, state: int):
    """(target state, amplitude) pairs of the boundary term on one state."""
    delta = spec.Delta
    if delta == 0.0:
        return []
    variant = spec.variant
    if variant in (Variant.FREE_FERMION, Variant.INTERACTING_FERMION):
        return _pair_actions(state, 0, 1, delta)
    if variant is Variant.SPINFUL_FERMION:
        return _pair_actions(state, 0, 3, delta)
    if variant is Variant.XXZ_SPIN:
        return [(state ^ 1, delta)]
    if variant is Variant.TRANSPORT:
        half = spec.L // 2
        out = []
        for i, j in ((half - 1, half), (half, half - 1)):
            r = apply_hop(state, i, j)
            if r is not None:
                ph, s2 = r
                out.append((s2, delta * ph))
        return out
    raise ValueError(f"unsupported variant {variant}")  # pragma: no cover


def fermion_chain_matrix(
    basis: SectorBasis, t0: float, mu0: float, U: float = 0.0, delta: float = 0.0
) -> np.ndarray:
    """Dense matrix of the (possibly interacting) fermion ring on a sector.

    ``delta`` adds the pair source on sites 1-2; with a nonzero delta the
    sector must be closed under changing the particle number by two.
    """
    L = basis.L
    bonds = _ring_bonds(L)
    n = basis.dim
    H = np.zeros((n, n))
    for ia in range(n):
        s = int(basis.states[ia])
        diag = -mu0 * s.bit_count()
        if U:
            for a, b in bonds:
                diag += U * ((s >> a) & 1) * ((s >> b) & 1)
        H[ia, ia] += diag
        for a, b in bonds:
            for i, j in ((a, b), (b, a)):
                r = apply_hop(s, i, j)
                if r is not None:
                    ph, s2 = r
                    H[basis.index_of(s2), ia] += t0 * ph
        for s2, val in _pair_actions(s, 0, 1, delta) if delta else ():
            H[basis.index_of(s2), ia] += val
    return H


def transport_chain_matrix(
    basis: SectorBasis, tl: float, tr: float, mul: float, mur: float, delta: float = 0.0
) -> np.ndarray:
    """Dense matrix of the two half-chains, optionally bridged at the middle."""
    L = basis.L
    half = L // 2
    bonds = _open_bonds(0, half - 1) + _open_bonds(half, L - 1)
    hop = [tl] * (half - 1) + [tr] * (half - 1)
    if delta:
        bonds.append((half - 1, half))
        hop.append(delta)
    left_mask = (1 << half) - 1
    n = basis.dim
    H = np.zeros((n, n))
    for ia in range(n):
        s = int(basis.states[ia])
        nl = (s & left_mask).bit_count()
        H[ia, ia] += -mul * nl - mur * (s.bit_count() - nl)
        for (a, b), t in zip(bonds, hop):
            for i, j in ((a, b), (b, a)):
                r = apply_hop(s, i, j)
                if r is not None:
                    ph, s2 = r
                    H[basis.index_of(s2), ia] += t * ph
    return H


def spinful_chain_matrix(
    basis: SectorBasis, t0: float, mu0: float, delta: float = 0.0
) -> np.ndarray:
    """Dense matrix of the two-species fermion ring on a sector."""
    L = basis.L
    n = basis.dim
    H = np.zeros((n, n))
    for ia in range(n):
        s = int(basis.states[ia])
        H[ia, ia] += -mu0 * s.bit_count()
        for spin in (0, 1):
            for a, b in _ring_bonds(L):
                ma, mb = 2 * a + spin, 2 * b + spin
                for i, j in ((ma, mb), (mb, ma)):
                    r = apply_hop(s, i, j)
                    if r is not None:
                        ph, s2 = r
                        H[basis.index_of(s2), ia] += t0 * ph
        for s2, val in _pair_actions(s, 0, 3, delta) if delta else ():
            H[basis.index_of(s2), ia] += val
    return H


def spin_chain_matrix(
    basis: SectorBasis, Jperp: float, Jz: float, h: float, delta: float = 0.0
) -> np.ndarray:
    """Dense matrix of the XXZ ring of Pauli spins in a longitudinal field.

    Bit value 1 is spin up.  The in-plane part flips antiparallel
    neighbours with amplitude 2*Jperp; the boundary term flips site 1.
    """
    L = basis.L
    bonds = _ring_bonds(L)
    n = basis.dim
    H = np.zeros((n, n))
    for ia in range(n):
        s = int(basis.states[ia])
        diag = h * (2 * s.bit_count() - L)
        for a, b in bonds:
            za = 2 * ((s >> a) & 1) - 1
            zb = 2 * ((s >> b) & 1) - 1
            diag += Jz * za * zb
        H[ia, ia] += diag
        for a, b in bonds:
            if ((s >> a) & 1) != ((s >> b) & 1):
                s2 = s ^ ((1 << a) | (1 << b))
                H[basis.index_of(s2), ia] += 2.0 * Jperp
        if delta:
            H[basis.index_of(s ^ 1), ia] += delta
    return H


def _check_sector(spec: ModelSpec, sector: SectorBasis, include_boundary: bool):
    if sector.kind != spec.kind or sector.L != spec.L:
        raise ValueError(
            f"sector ({sector.kind}, L={sector.L}) does not match the model "
            f"({spec.kind}, L={spec.L})"
        )
    if not include_boundary or spec.Delta == 0.0:
        return
    if spec.variant is Variant.TRANSPORT:
        return  # the bridge conserves total charge
    if spec.variant is Variant.XXZ_SPIN:
        if sector.charge is not None or sector.parity is not None:
            raise ValueError(
                "the site-1 spin flip conserves neither Sz nor parity; "
                "use an unconstrained basis"
            )
        return
    if sector.charge is not None:
        raise ValueError(
            "the boundary pair term changes the particle number by two; "
            "use a fixed-parity or unconstrained basis"
        )


def build_many_body(
    spec: ModelSpec,
    sector: SectorBasis,
    include_boundary: bool | None = None,
    cap: int = DEFAULT_CAP,
) -> np.ndarray:
    """Dense Hermitian matrix of the model on a symmetry-sector basis.

    Matrix elements follow the fermionic sign convention fixed by the
    left-to-right mode ordering of :mod:`boundary_charge.fock`.  Raises
    CapExceededError above ``cap`` and ValueError when the requested
    sector is not preserved by the included terms.
    """
    if include_boundary is None:
        include_boundary = spec.boundary_on
    if sector.dim > cap:
        raise CapExceededError(f"sector dimension {sector.dim} exceeds cap {cap}")
    _check_sector(spec, sector, include_boundary)
    delta = spec.Delta if include_boundary else 0.0
    variant = spec.variant
    if variant in (Variant.FREE_FERMION, Variant.INTERACTING_FERMION):
        U = spec.U if variant is Variant.INTERACTING_FERMION else 0.0
        return fermion_chain_matrix(sector, spec.t0, spec.mu0, U=U, delta=delta)
    if variant is Variant.XXZ_SPIN:
        return spin_chain_matrix(sector, spec.Jperp, spec.Jz, spec.h, delta=delta)
    if variant is Variant.SPINFUL_FERMION:
        return spinful_chain_matrix(sector, spec.t0, spec.mu0, delta=delta)
    if variant is Variant.TRANSPORT:
        return transport_chain_matrix(
            sector, spec.tl, spec.tr, spec.mul, spec.mur, delta=delta
        )
    raise ValueError(f"unsupported variant {variant}")  # pragma: no cover


def boundary_term_matrix(spec: ModelSpec, basis: SectorBasis) -> sparse.csr_matrix:
    """Sparse matrix of the boundary term projected onto one basis.

    Components that leave the basis are dropped, so on a fixed-charge
    basis the pair terms project to zero while on a parity or full basis
    the matrix is the complete boundary term.
    """
    if basis.kind != spec.kind or basis.L != spec.L:
        raise ValueError("basis does not match the model")
    rows, cols, vals = [], [], []
    for ia in range(basis.dim):
        s = int(basis.states[ia])
        for s2, val in _boundary_actions(spec, s):
            if basis.contains(s2):
                rows.append(basis.index_of(s2))
                cols.append(ia)
                vals.append(val)
    return sparse.csr_matrix(
        (vals, (rows, cols)), shape=(basis.dim, basis.dim), dtype=np.float64
    )


def boundary_block(
    spec: ModelSpec, basis_from: SectorBasis, basis_to: SectorBasis
) -> sparse.csr_matrix:
    """Rectangular block of the boundary term between two sector bases."""
    for b in (basis_from, basis_to):
        if b.kind != spec.kind or b.L != spec.L:
            raise ValueError("basis does not match the model")
    rows, cols, vals = [], [], []
    for ia in range(basis_from.dim):
        s = int(basis_from.states[ia])
        for s2, val in _boundary_actions(spec, s):
            if basis_to.contains(s2):
                rows.append(basis_to.index_of(s2))
                cols.append(ia)
                vals.append(val)
    return sparse.csr_matrix(
        (vals, (rows, cols)), shape=(basis_to.dim, basis_from.dim), dtype=np.float64
    )
