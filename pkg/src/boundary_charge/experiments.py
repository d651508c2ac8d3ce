"""Protocol drivers: sampled steady-state scans, quench runs with energy
tracking, Floquet scans, half-chain transport scans, two-parameter phase
diagrams, and boundary-matrix-element criterion scans.

Every driver samples seeded random product states, evolves them with the
boundary term switched on, and reports statistics of the charge variance
and charge difference.  Per-sample random streams are derived from the
master seed and the (L, grid point, sample) indices, so results are
reproducible bit-for-bit and independent of the worker-thread count.
"""

from __future__ import annotations

import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ed import enumerate_sector, sample_occupations
from .fock import DEFAULT_CAP, SectorBasis, bits_from_occupations
from .gaussian import propagated_blocks, _wick_variance
from .models import (
    ModelSpec,
    Variant,
    boundary_nambu,
    boundary_term_matrix,
    build_many_body,
    build_nambu,
)
from .perturbation import (
    boundary_matrix_element,
    find_pairs,
    realizable_charges,
    sector_spectra,
)

__all__ = [
    "Protocol",
    "ScanRow",
    "ScanResult",
    "QuenchResult",
    "PhaseDiagram",
    "CriterionResult",
    "run_steady_scan",
    "run_quench_energy",
    "run_floquet_scan",
    "run_transport_scan",
    "run_phase_diagram",
    "run_criterion_scan",
]

PROTOCOL_KINDS = (
    "steady_scan",
    "quench_energy",
    "floquet_scan",
    "transport_scan",
    "phase_diagram_2d",
    "criterion_scan",
)


@dataclass
class Protocol:
    """Configuration of one experiment run.

    ``param``/``grid`` name the swept coupling and its values; a second
    pair is used by the two-parameter phase diagram.  ``nu`` is the
    filling of the initial product states (fraction of up spins for the
    spin chain, per-species filling for the spinful chain, left-half
    filling for transport, where ``nu_r`` fills the right half).
    """

    kind: str
    model: ModelSpec
    param: str | None = None
    grid: tuple[float, ...] = ()
    param2: str | None = None
    grid2: tuple[float, ...] = ()
    L_list: tuple[int, ...] = ()
    nu: float = 0.5
    nu_r: float | None = None
    n_samples: int = 200
    seed: int = 0
    engine: str = "auto"
    n_periods: int | None = None
    n_times: int = 50
    threads: int = 1
    energy_tol: float | None = None
    delta_charge: tuple[float, ...] | None = None
    max_pairs: int = 1000
    threshold: float = 0.01
    growth_cutoff: float = 1.3
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.kind not in PROTOCOL_KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.engine not in ("auto", "gaussian", "ed"):
            raise ValueError(f"unknown engine {self.engine!r}")
        self.grid = tuple(float(v) for v in self.grid)
        self.grid2 = tuple(float(v) for v in self.grid2)
        self.L_list = tuple(int(L) for L in self.L_list) or (self.model.L,)
        if self.param is not None and not self.grid:
            raise ValueError("swept parameter given without grid values")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


@dataclass
class ScanRow:
    params: tuple[float, ...]
    L: int
    mean_var_density: float
    mean_var: float
    mean_dN: float
    stderr: float
    n_samples: int
    seed: int


@dataclass
class ScanResult:
    """Rows of per-(parameter, L) sample statistics."""

    param_names: tuple[str, ...]
    rows: list[ScanRow]
    meta: dict = field(default_factory=dict)

    def row(self, L: int, *params: float) -> ScanRow:
        for r in self.rows:
            if r.L == L and all(abs(a - b) < 1e-12 for a, b in zip(r.params, params)):
                return r
        raise KeyError(f"no row with L={L}, params={params}")

    def to_csv(self, path_or_file="-") -> None:
        header = list(self.param_names) + [
            "L",
            "mean_var_density",
            "mean_var",
            "mean_dN",
            "stderr",
            "n_samples",
            "seed",
        ]
        rows = [
            list(r.params)
            + [r.L, r.mean_var_density, r.mean_var, r.mean_dN, r.stderr, r.n_samples, r.seed]
            for r in self.rows
        ]
        _write_csv(path_or_file, header, rows)


@dataclass
class QuenchResult:
    """Time series of particle number and energy across the quench."""

    times: np.ndarray
    mean_N: np.ndarray
    mean_E: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_csv(self, path_or_file="-") -> None:
        rows = [[t, n, e] for t, n, e in zip(self.times, self.mean_N, self.mean_E)]
        _write_csv(path_or_file, ["t", "mean_N", "mean_E"], rows)


@dataclass
class PhaseDiagram:
    """Grid of frozen/fluctuating labels plus the raw variance densities."""

    param_names: tuple[str, str]
    values1: tuple[float, ...]
    values2: tuple[float, ...]
    L_list: tuple[int, ...]
    labels: list[list[str]]
    density: dict[int, list[list[float]]]
    threshold: float
    growth_cutoff: float
    scan: ScanResult

    def to_json(self, path_or_file=None) -> str:
        payload = {
            "param_names": list(self.param_names),
            "values1": list(self.values1),
            "values2": list(self.values2),
            "L_list": list(self.L_list),
            "labels": self.labels,
            "density": {str(L): grid for L, grid in self.density.items()},
            "threshold": self.threshold,
            "growth_cutoff": self.growth_cutoff,
        }
        text = json.dumps(payload, indent=2)
        if path_or_file is not None:
            with _open_out(path_or_file) as fh:
                fh.write(text + "\n")
        return text


@dataclass
class CriterionResult:
    """Mean boundary matrix element between near-degenerate cross-charge
    eigenstate pairs, per swept parameter value."""

    param_name: str
    rows: list[tuple[float, float, int, float]]  # (value, mean, n_pairs, energy_tol)
    meta: dict = field(default_factory=dict)

    def to_csv(self, path_or_file="-") -> None:
        _write_csv(
            path_or_file,
            [self.param_name, "mean_element", "n_pairs", "energy_tol"],
            [list(r) for r in self.rows],
        )


def _open_out(path_or_file):
    if hasattr(path_or_file, "write"):
        return _NullCtx(path_or_file)
    if path_or_file in ("-", None):
        return _NullCtx(sys.stdout)
    return open(path_or_file, "w", newline="")


class _NullCtx:
    def __init__(self, fh):
        self.fh = fh

    def __enter__(self):
        return self.fh

    def __exit__(self, *exc):
        return False


def _write_csv(path_or_file, header, rows):
    with _open_out(path_or_file) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _rng(seed: int, key: tuple[int, ...]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def _resolve_engine(spec: ModelSpec, engine: str) -> str:
    if engine == "auto":
        return "gaussian" if spec.is_quadratic else "ed"
    if engine == "gaussian" and not spec.is_quadratic:
        raise ValueError(f"variant {spec.variant.value!r} needs the ed engine")
    return engine


def _initial_occupations(spec: ModelSpec, nu: float, nu_r, rng) -> np.ndarray:
    """Random product-state occupations at the protocol's filling."""
    L = spec.L
    if spec.variant is Variant.SPINFUL_FERMION:
        n_each = _round_half_up(nu * L)
        up = sample_occupations(rng, L, n_each)
        down = sample_occupations(rng, L, n_each)
        occ = np.zeros(2 * L, dtype=np.int8)
        occ[0::2], occ[1::2] = up, down
        return occ
    if spec.variant is Variant.TRANSPORT:
        half = L // 2
        left = sample_occupations(rng, half, _round_half_up(nu * half))
        right = sample_occupations(rng, half, _round_half_up((nu_r or 0.0) * half))
        return np.concatenate([left, right])
    return sample_occupations(rng, L, _round_half_up(nu * L))


def _charge_of(spec: ModelSpec, occ: np.ndarray) -> float:
    n = float(occ.sum())
    return n - spec.L / 2.0 if spec.variant is Variant.XXZ_SPIN else n


def _evolution_basis(spec: ModelSpec, occ: np.ndarray, cap: int) -> SectorBasis:
    """Smallest sector that is closed under the full evolution."""
    boundary_active = spec.Delta != 0.0
    n = int(occ.sum())
    if not boundary_active or spec.variant is Variant.TRANSPORT:
        return enumerate_sector(spec.kind, spec.L, charge=_charge_of(spec, occ), cap=cap)
    if spec.variant is Variant.XXZ_SPIN:
        return enumerate_sector(spec.kind, spec.L, cap=cap)
    return enumerate_sector(spec.kind, spec.L, parity=n % 2, cap=cap)


def _ed_point(spec, nu, nu_r, n_samples, seed, key, cap, sites=None):
    """Sample statistics of the charge variance/difference via dense ED."""
    rng0 = _rng(seed, key + (0,))
    occ0 = _initial_occupations(spec, nu, nu_r, rng0)
    basis = _evolution_basis(spec, occ0, cap)
    H = build_many_body(spec, basis, include_boundary=True, cap=cap)
    energies, vectors = np.linalg.eigh(H)
    phase = np.exp(-1j * energies * 2.0 * spec.L)
    if sites is None:
        values = basis.charge_values()
    else:
        mask = np.int64(sum(1 << (s - 1) for s in sites))
        values = np.bitwise_count(basis.states & mask).astype(np.float64)
    values_sq = values**2
    variances = np.empty(n_samples)
    differences = np.empty(n_samples)
    for i in range(n_samples):
        occ = occ0 if i == 0 else _initial_occupations(spec, nu, nu_r, _rng(seed, key + (i,)))
        idx = basis.index_of(bits_from_occupations(occ))
        amp = vectors @ (phase * vectors[idx].conj())
        weights = np.abs(amp) ** 2
        mean = float(weights @ values)
        variances[i] = max(0.0, float(weights @ values_sq) - mean**2)
        differences[i] = mean - values[idx]
    return variances, differences


def _gaussian_point(spec, nu, nu_r, n_samples, seed, key, U, sites=None, spin_guard=False):
    """Sample statistics under a precomputed single-particle unitary ``U``."""
    M = U.shape[0] // 2
    sel = None
    if sites is not None:
        sel = np.asarray(sorted({int(s) for s in sites})) - 1
    variances = np.empty(n_samples)
    differences = np.empty(n_samples)
    max_drift = 0.0
    for i in range(n_samples):
        occ = _initial_occupations(spec, nu, nu_r, _rng(seed, key + (i,)))
        G, F = propagated_blocks(U, occ)
        if spin_guard:
            n_modes = np.diag(G).real
            sz_t = 0.5 * (np.sum(n_modes[0::2]) - np.sum(n_modes[1::2]))
            sz_0 = 0.5 * (float(occ[0::2].sum()) - float(occ[1::2].sum()))
            drift = abs(sz_t - sz_0)
            max_drift = max(max_drift, drift)
            if drift > 1e-9:
                raise RuntimeError(f"total spin-z drifted by {drift:.3e} in one sample")
        if sel is None:
            variances[i] = _wick_variance(G, F)
            differences[i] = float(np.trace(G).real) - float(occ.sum())
        else:
            block = np.ix_(sel, sel)
            variances[i] = _wick_variance(G[block], F[block])
            differences[i] = float(np.trace(G[block]).real) - float(occ[sel].sum())
    return variances, differences, max_drift


def _stats(variances, differences, spec, n_samples, seed, params) -> ScanRow:
    mean_var = float(variances.mean())
    stderr = float(variances.std(ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return ScanRow(
        params=params,
        L=spec.L,
        mean_var_density=mean_var / spec.L,
        mean_var=mean_var,
        mean_dN=float(differences.mean()),
        stderr=stderr,
        n_samples=n_samples,
        seed=seed,
    )


def _run_tasks(tasks, work, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(work, tasks))
    return [work(t) for t in tasks]


def _sweepable(spec: ModelSpec, param: str):
    if param not in ("t0", "mu0", "Delta", "U", "Jperp", "Jz", "h", "tl", "tr", "mul", "mur"):
        raise ValueError(f"unknown swept coupling {param!r}")


def run_steady_scan(protocol: Protocol) -> ScanResult:
    """Steady-state charge statistics at t = 2L versus one bulk coupling.

    Initial states are random fixed-charge product states; the boundary
    term is on from t = 0 and the observables are read out at the single
    time t = 2L.
    """
    p = protocol
    if p.kind != "steady_scan":
        raise ValueError(f"protocol kind {p.kind!r} is not steady_scan")
    if p.model.variant is Variant.TRANSPORT:
        raise ValueError("use run_transport_scan for the half-chain model")
    if p.param is None:
        raise ValueError("steady_scan needs a swept parameter")
    _sweepable(p.model, p.param)

    tasks = [
        (iL, L, ig, value)
        for iL, L in enumerate(p.L_list)
        for ig, value in enumerate(p.grid)
    ]

    def work(task):
        iL, L, ig, value = task
        spec = p.model.with_params(L=L, boundary_on=True, **{p.param: value})
        engine = _resolve_engine(spec, p.engine)
        if engine == "gaussian":
            h = build_nambu(spec, include_boundary=True)
            U = h.propagator(2.0 * L)
            variances, differences, _ = _gaussian_point(
                spec, p.nu, None, p.n_samples, p.seed, (iL, ig), U
            )
        else:
            variances, differences = _ed_point(
                spec, p.nu, None, p.n_samples, p.seed, (iL, ig), p.cap
            )
        return _stats(variances, differences, spec, p.n_samples, p.seed, (value,))

    rows = _run_tasks(tasks, work, p.threads)
    filled = {L: _round_half_up(p.nu * L) for L in p.L_list}
    return ScanResult(
        (p.param,), rows, meta={"kind": p.kind, "nu": p.nu, "n_filled_by_L": filled}
    )


def _isometry_series(h, W0, times):
    """Columns-of-propagator evolution of an isometry, one output per time."""
    energies, vectors = h.eig()
    coeff = vectors.conj().T @ W0
    return [vectors @ (np.exp(-1j * energies * t)[:, None] * coeff) for t in times]


def _isometry_observables(W, h):
    M = W.shape[0] // 2
    n = float(np.sum(np.abs(W[M:]) ** 2))
    e = float(h.const - 0.5 * np.sum(W.conj() * (h.H @ W)).real)
    return n, e


def run_quench_energy(protocol: Protocol) -> QuenchResult:
    """Charge and energy tracking across a delayed boundary switch-on.

    The state evolves under the bulk Hamiltonian from t = 0 to t = L,
    then under the full Hamiltonian (boundary on) until t = 2L.  The
    energy is measured against the generator active in each segment.
    """
    p = protocol
    if p.kind != "quench_energy":
        raise ValueError(f"protocol kind {p.kind!r} is not quench_energy")
    spec = p.model
    if not spec.is_quadratic:
        raise ValueError("the quench driver supports quadratic models only")
    L = spec.L
    h0 = build_nambu(spec, include_boundary=False)
    hf = build_nambu(spec, include_boundary=True)
    times0 = np.linspace(0.0, L, p.n_times + 1)
    times1 = np.linspace(float(L), 2.0 * L, p.n_times + 1)[1:]
    times = np.concatenate([times0, times1])
    acc_N = np.zeros(times.size)
    acc_E = np.zeros(times.size)
    for i in range(p.n_samples):
        occ = _initial_occupations(spec, p.nu, p.nu_r, _rng(p.seed, (0, 0, i)))
        diag = np.concatenate([1.0 - occ, occ]).astype(np.float64)
        W0 = np.eye(2 * spec.n_modes, dtype=np.complex128)[:, np.flatnonzero(diag)]
        first = _isometry_series(h0, W0, times0)
        WL = first[-1]
        second = _isometry_series(hf, WL, times1 - L)
        for j, W in enumerate(first):
            n, e = _isometry_observables(W, h0)
            acc_N[j] += n
            acc_E[j] += e
        for j, W in enumerate(second):
            n, e = _isometry_observables(W, hf)
            acc_N[len(times0) + j] += n
            acc_E[len(times0) + j] += e
    meta = {"kind": p.kind, "L": L, "switch_time": float(L), "seed": p.seed}
    return QuenchResult(times, acc_N / p.n_samples, acc_E / p.n_samples, meta)


def run_floquet_scan(protocol: Protocol) -> ScanResult:
    """Charge statistics after stroboscopic driving, versus one coupling.

    One period applies exp(-i H_boundary) exp(-i H_bulk) and advances the
    nominal time by two units; the default period count is L.  For the
    spinful model the conservation of total spin-z is asserted on every
    sample and the largest observed drift is reported in the metadata.
    """
    p = protocol
    if p.kind != "floquet_scan":
        raise ValueError(f"protocol kind {p.kind!r} is not floquet_scan")
    if p.model.variant not in (Variant.FREE_FERMION, Variant.SPINFUL_FERMION):
        raise ValueError("floquet scans support the free and spinful chains")
    if p.param is None:
        raise ValueError("floquet_scan needs a swept parameter")
    _sweepable(p.model, p.param)
    spin_guard = p.model.variant is Variant.SPINFUL_FERMION

    tasks = [
        (iL, L, ig, value)
        for iL, L in enumerate(p.L_list)
        for ig, value in enumerate(p.grid)
    ]
    drift = [0.0]

    def work(task):
        iL, L, ig, value = task
        spec = p.model.with_params(L=L, boundary_on=True, **{p.param: value})
        periods = p.n_periods if p.n_periods is not None else L
        u0 = build_nambu(spec, include_boundary=False).propagator(1.0)
        uB = boundary_nambu(spec).propagator(1.0)
        U = np.linalg.matrix_power(uB @ u0, periods)
        variances, differences, d = _gaussian_point(
            spec, p.nu, None, p.n_samples, p.seed, (iL, ig), U, spin_guard=spin_guard
        )
        drift[0] = max(drift[0], d)
        return _stats(variances, differences, spec, p.n_samples, p.seed, (value,))

    rows = _run_tasks(tasks, work, p.threads)
    meta = {"kind": p.kind, "nu": p.nu, "n_periods": p.n_periods}
    if spin_guard:
        meta["max_spin_z_drift"] = drift[0]
    return ScanResult((p.param,), rows, meta=meta)


def run_transport_scan(protocol: Protocol) -> ScanResult:
    """Right-half charge statistics of the bridged half-chains at t = 2L.

    The left half is filled at ``nu``, the right half at ``nu_r``; the
    variance and difference refer to the right-half particle number.  The
    metadata reports the analytic bounds of the frozen window,
    mur < -2(|tl|+|tr|) + mul  or  mur > 2(|tl|+|tr|) + mul.
    """
    p = protocol
    if p.kind != "transport_scan":
        raise ValueError(f"protocol kind {p.kind!r} is not transport_scan")
    if p.model.variant is not Variant.TRANSPORT:
        raise ValueError("transport scans need the transport variant")
    if p.param is None:
        raise ValueError("transport_scan needs a swept parameter")
    _sweepable(p.model, p.param)
    nu_r = p.nu_r if p.nu_r is not None else p.nu

    tasks = [
        (iL, L, ig, value)
        for iL, L in enumerate(p.L_list)
        for ig, value in enumerate(p.grid)
    ]

    def work(task):
        iL, L, ig, value = task
        spec = p.model.with_params(L=L, boundary_on=True, **{p.param: value})
        sites = range(L // 2 + 1, L + 1)
        h = build_nambu(spec, include_boundary=True)
        U = h.propagator(2.0 * L)
        variances, differences, _ = _gaussian_point(
            spec, p.nu, nu_r, p.n_samples, p.seed, (iL, ig), U, sites=sites
        )
        return _stats(variances, differences, spec, p.n_samples, p.seed, (value,))

    rows = _run_tasks(tasks, work, p.threads)
    bandwidth = 2.0 * (abs(p.model.tl) + abs(p.model.tr))
    meta = {
        "kind": p.kind,
        "nu_l": p.nu,
        "nu_r": nu_r,
        "frozen_below_mur": -bandwidth + p.model.mul,
        "frozen_above_mur": bandwidth + p.model.mul,
    }
    return ScanResult((p.param,), rows, meta=meta)


def run_phase_diagram(protocol: Protocol) -> PhaseDiagram:
    """Frozen/fluctuating labels over a two-coupling grid.

    Each cell is classified at the largest L: frozen requires the
    variance density to fall below ``threshold`` and, when at least two
    chain lengths are available, the raw variance growth from the
    second-largest to the largest L to stay below ``growth_cutoff``.
    The raw values are returned so the labeling is auditable.
    """
    p = protocol
    if p.kind != "phase_diagram_2d":
        raise ValueError(f"protocol kind {p.kind!r} is not phase_diagram_2d")
    if p.param is None or p.param2 is None or not p.grid or not p.grid2:
        raise ValueError("phase diagrams need two swept parameters with grids")
    _sweepable(p.model, p.param)
    _sweepable(p.model, p.param2)
    L_sorted = tuple(sorted(p.L_list))

    tasks = [
        (i1, v1, i2, v2, iL, L)
        for i1, v1 in enumerate(p.grid)
        for i2, v2 in enumerate(p.grid2)
        for iL, L in enumerate(L_sorted)
    ]

    def work(task):
        i1, v1, i2, v2, iL, L = task
        spec = p.model.with_params(L=L, boundary_on=True, **{p.param: v1, p.param2: v2})
        engine = _resolve_engine(spec, p.engine)
        if engine == "gaussian":
            h = build_nambu(spec, include_boundary=True)
            U = h.propagator(2.0 * L)
            variances, differences, _ = _gaussian_point(
                spec, p.nu, None, p.n_samples, p.seed, (i1, i2, iL), U
            )
        else:
            variances, differences = _ed_point(
                spec, p.nu, None, p.n_samples, p.seed, (i1, i2, iL), p.cap
            )
        return _stats(variances, differences, spec, p.n_samples, p.seed, (v1, v2))

    rows = _run_tasks(tasks, work, p.threads)
    scan = ScanResult((p.param, p.param2), rows, meta={"kind": p.kind, "nu": p.nu})

    density = {L: [[0.0] * len(p.grid2) for _ in p.grid] for L in L_sorted}
    labels = [["" for _ in p.grid2] for _ in p.grid]
    for i1, v1 in enumerate(p.grid):
        for i2, v2 in enumerate(p.grid2):
            per_L = {L: scan.row(L, v1, v2) for L in L_sorted}
            for L in L_sorted:
                density[L][i1][i2] = per_L[L].mean_var_density
            largest = per_L[L_sorted[-1]]
            frozen = largest.mean_var_density < p.threshold
            if len(L_sorted) >= 2 and frozen:
                prev = per_L[L_sorted[-2]]
                if prev.mean_var > 0:
                    frozen = largest.mean_var / prev.mean_var < p.growth_cutoff
            labels[i1][i2] = "frozen" if frozen else "fluctuating"
    return PhaseDiagram(
        (p.param, p.param2),
        p.grid,
        p.grid2,
        L_sorted,
        labels,
        density,
        p.threshold,
        p.growth_cutoff,
        scan,
    )


def run_criterion_scan(protocol: Protocol) -> CriterionResult:
    """Mean boundary matrix element between near-degenerate cross-charge
    eigenstate pairs of the bulk Hamiltonian, versus one coupling.

    Pairs are drawn across the whole spectrum with the protocol's seed;
    the energy window defaults to 0.1 for fermion chains and 0.3 for the
    spin chain, and the charge difference to +2 and +/-1 respectively.
    """
    p = protocol
    if p.kind != "criterion_scan":
        raise ValueError(f"protocol kind {p.kind!r} is not criterion_scan")
    if p.param is None:
        raise ValueError("criterion_scan needs a swept parameter")
    _sweepable(p.model, p.param)
    spin = p.model.variant is Variant.XXZ_SPIN
    energy_tol = p.energy_tol if p.energy_tol is not None else (0.3 if spin else 0.1)
    delta_charge = p.delta_charge if p.delta_charge is not None else (
        (1.0, -1.0) if spin else (2.0,)
    )
    full = enumerate_sector(p.model.kind, p.model.L, cap=p.cap)
    rows = []
    for ig, value in enumerate(p.grid):
        spec = p.model.with_params(boundary_on=True, **{p.param: value})
        spectra = sector_spectra(spec, realizable_charges(spec), cap=p.cap)
        pairs = find_pairs(
            spectra,
            delta_charge,
            energy_tol,
            max_pairs=p.max_pairs,
            seed=np.random.SeedSequence(p.seed, spawn_key=(ig,)),
        )
        hb = boundary_term_matrix(spec, full)
        mean, _ = boundary_matrix_element(pairs, hb, full)
        rows.append((value, mean, len(pairs), energy_tol))
    meta = {"kind": p.kind, "delta_charge": tuple(delta_charge), "max_pairs": p.max_pairs}
    return CriterionResult(p.param, rows, meta=meta)
