"""Simulation toolkit for 1D chains with a symmetry-breaking boundary term.

Energy-conserving chains whose bulk conserves a charge (particle number
or z-magnetization) respond to a charge-breaking boundary term in one of
two ways: the charge stays frozen up to an O(1) change, or it develops
fluctuations that grow with the system size.  This package provides the
machinery to map out that transition: quadratic (Nambu) and many-body
Hamiltonian builders, a fermionic-Gaussian evolution engine, dense exact
diagonalization, the projected effective-Hamiltonian criterion, and
reproducible sampled experiment drivers with a CLI front end.
"""

from .fock import CapExceededError, SectorBasis, enumerate_sector
from .models import (
    ModelSpec,
    NambuMatrix,
    Variant,
    boundary_block,
    boundary_nambu,
    boundary_term_matrix,
    build_many_body,
    build_nambu,
    dispersion,
)
from .gaussian import (
    GaussianState,
    charge_variance,
    energy,
    evolve,
    floquet_step,
    particle_number,
    product_state,
    spin_z,
    subsystem_charge_variance,
)
from .ed import (
    DenseState,
    basis_vector,
    charge_mean_mb,
    charge_variance_mb,
    evolve_exact,
    floquet_unitary_mb,
    parity_mb,
    random_sector_product_state,
    sample_occupations,
    spin_z_mb,
    subsystem_charge_mean_mb,
    subsystem_charge_variance_mb,
)
from .perturbation import (
    DegeneratePair,
    EffectiveHamiltonian,
    ResolventSingularError,
    SectorSpectrum,
    boundary_matrix_element,
    effective_hamiltonian,
    find_pairs,
    php_offdiag_scaling,
    sector_spectra,
)
from .experiments import (
    CriterionResult,
    PhaseDiagram,
    Protocol,
    QuenchResult,
    ScanResult,
    ScanRow,
    run_criterion_scan,
    run_floquet_scan,
    run_phase_diagram,
    run_quench_energy,
    run_steady_scan,
    run_transport_scan,
)

__version__ = "0.1.0"
