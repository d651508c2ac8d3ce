"""Occupation bit-string bases for chains of fermions and spins-1/2.

A basis state is a Python integer whose bit ``b`` holds the occupation of
mode ``b``.  Chain sites are numbered ``1..L`` from the left; site ``j``
is mode ``j - 1``.  For spinful chains the modes interleave spin species
as ``(1up, 1down, 2up, 2down, ...)``, i.e. mode ``2*(j-1) + s`` with
``s = 0`` for up and ``s = 1`` for down.

Fermionic operators acting on a basis state pick up the sign
``(-1)^(number of occupied modes below the target mode)``, which fixes
every matrix-element sign relative to the left-to-right site ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

DEFAULT_CAP = 2**20


class CapExceededError(RuntimeError):
    """A requested basis or matrix exceeds the configured dimension cap."""


def mode_of_site(site: int) -> int:
    """Bit position of chain site ``site`` (1-based)."""
    return site - 1


def mode_of_site_spin(site: int, spin: int) -> int:
    """Bit position of (site, spin) with spin 0 = up, 1 = down."""
    return 2 * (site - 1) + spin


def jw_phase(state: int, mode: int) -> int:
    """Sign (-1)^(occupied modes below `mode`) of a string operator."""
    return -1 if ((state & ((1 << mode) - 1)).bit_count() & 1) else 1


def apply_create(state: int, mode: int):
    """Apply a creation operator; returns (phase, new_state) or None."""
    if (state >> mode) & 1:
        return None
    return jw_phase(state, mode), state | (1 << mode)


def apply_annihilate(state: int, mode: int):
    """Apply an annihilation operator; returns (phase, new_state) or None."""
    if not (state >> mode) & 1:
        return None
    return jw_phase(state, mode), state & ~(1 << mode)


def apply_hop(state: int, i: int, j: int):
    """Apply c_i^dagger c_j (modes, i != j); returns (phase, new_state) or None."""
    r = apply_annihilate(state, j)
    if r is None:
        return None
    ph, s1 = r
    r = apply_create(s1, i)
    if r is None:
        return None
    ph2, s2 = r
    return ph * ph2, s2


@dataclass(frozen=True)
class SectorBasis:
    """Ordered basis of occupation bit strings for one symmetry sector.

    Attributes
    ----------
    kind : str
        'fermion', 'spin' or 'spinful'.
    L : int
        Number of chain sites.
    n_modes : int
        Number of modes (L, except 2L for spinful chains).
    states : np.ndarray
        Bit strings sorted ascending as integers.
    charge : float or None
        Fixed charge of the sector: particle number N for (spinful)
        fermions, z-magnetization Sz for spins.  None if unconstrained.
    parity : int or None
        Fixed occupation parity (0 even, 1 odd), or None.
    """

    kind: str
    L: int
    n_modes: int
    states: np.ndarray
    charge: float | None = None
    parity: int | None = None
    _lookup: dict | None = field(default=None, init=False, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def index_of(self, state: int) -> int:
        """Position of a bit string in the basis; KeyError if absent."""
        lookup = self._lookup
        if lookup is None:
            lookup = {int(s): i for i, s in enumerate(self.states)}
            object.__setattr__(self, "_lookup", lookup)
        try:
            return lookup[int(state)]
        except KeyError:
            raise KeyError(f"state {state:#x} is not in this sector") from None

    def contains(self, state: int) -> bool:
        lookup = self._lookup
        if lookup is None:
            self.index_of(int(self.states[0]))  # build lookup
            lookup = self._lookup
        return int(state) in lookup

    def charge_values(self) -> np.ndarray:
        """Charge of every basis state: N for fermions, Sz for spins."""
        pop = np.bitwise_count(self.states).astype(np.float64)
        if self.kind == "spin":
            return pop - self.L / 2.0
        return pop

    def spin_z_values(self) -> np.ndarray:
        """z-magnetization of every basis state of a spinful-fermion chain."""
        if self.kind != "spinful":
            raise ValueError("spin_z_values requires a spinful basis")
        up_mask = sum(1 << m for m in range(0, self.n_modes, 2))
        down_mask = up_mask << 1
        n_up = np.bitwise_count(self.states & np.int64(up_mask))
        n_dn = np.bitwise_count(self.states & np.int64(down_mask))
        return (n_up.astype(np.float64) - n_dn.astype(np.float64)) / 2.0

    def occupations(self, index: int) -> np.ndarray:
        """Occupation vector (length n_modes) of the index-th basis state."""
        s = int(self.states[index])
        return np.array([(s >> m) & 1 for m in range(self.n_modes)], dtype=np.int8)


def _occupied_count(kind: str, L: int, charge) -> int:
    if kind == "spin":
        n_up = charge + L / 2.0
        if abs(n_up - round(n_up)) > 1e-9:
            raise ValueError(f"Sz={charge} is not realizable on {L} spins")
        n_up = int(round(n_up))
        if not 0 <= n_up <= L:
            raise ValueError(f"Sz={charge} is not realizable on {L} spins")
        return n_up
    n = int(round(charge))
    if abs(n - charge) > 1e-9:
        raise ValueError(f"particle number {charge} is not an integer")
    return n


def enumerate_sector(
    kind: str,
    L: int,
    charge=None,
    parity: int | None = None,
    cap: int = DEFAULT_CAP,
) -> SectorBasis:
    """Enumerate the occupation bit strings of one symmetry sector.

    Exactly one of ``charge`` and ``parity`` may be given; with neither,
    the full space is enumerated.  ``charge`` is the particle number for
    (spinful) fermion chains and the z-magnetization for spin chains.
    Raises CapExceededError if the sector dimension exceeds ``cap``.
    """
    if kind not in ("fermion", "spin", "spinful"):
        raise ValueError(f"unknown basis kind {kind!r}")
    if charge is not None and parity is not None:
        raise ValueError("charge and parity constraints are mutually exclusive")
    n_modes = 2 * L if kind == "spinful" else L
    if n_modes < 1 or n_modes > 62:
        raise ValueError(f"unsupported mode count {n_modes}")

    if charge is not None:
        n_occ = _occupied_count(kind, L, charge)
        if not 0 <= n_occ <= n_modes:
            raise ValueError(f"charge {charge} is not realizable on {n_modes} modes")
        dim = math.comb(n_modes, n_occ)
        if dim > cap:
            raise CapExceededError(f"sector dimension {dim} exceeds cap {cap}")
        states = np.sort(
            np.fromiter(
                (sum(1 << p for p in c) for c in combinations(range(n_modes), n_occ)),
                dtype=np.int64,
                count=dim,
            )
        )
        return SectorBasis(kind, L, n_modes, states, charge=charge)

    if parity is not None:
        if parity not in (0, 1):
            raise ValueError("parity must be 0 (even) or 1 (odd)")
        dim = 2 ** (n_modes - 1)
        if dim > cap:
            raise CapExceededError(f"sector dimension {dim} exceeds cap {cap}")
        allstates = np.arange(2**n_modes, dtype=np.int64)
        states = allstates[np.bitwise_count(allstates) % 2 == parity]
        return SectorBasis(kind, L, n_modes, states, parity=parity)

    dim = 2**n_modes
    if dim > cap:
        raise CapExceededError(f"sector dimension {dim} exceeds cap {cap}")
    return SectorBasis(kind, L, n_modes, np.arange(dim, dtype=np.int64))


def bits_from_occupations(occupations) -> int:
    """Pack an occupation vector into a bit-string integer."""
    occ = np.asarray(occupations)
    return int(sum(1 << m for m in np.flatnonzero(occ)))


def occupations_from_bits(state: int, n_modes: int) -> np.ndarray:
    """Unpack a bit-string integer into an occupation vector."""
    return np.array([(state >> m) & 1 for m in range(n_modes)], dtype=np.int8)


def sites_mask(sites, n_modes: int) -> int:
    """Bit mask of a set of 1-based mode indices; validates the range."""
    mask = 0
    for s in sites:
        s = int(s)
        if not 1 <= s <= n_modes:
            raise ValueError(f"mode index {s} out of range 1..{n_modes}")
        mask |= 1 << (s - 1)
    return mask
