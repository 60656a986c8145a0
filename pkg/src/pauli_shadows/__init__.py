"""Energy estimation for Pauli-sum Hamiltonians from randomized
product-basis measurements, with uniform (CS), locally-biased (LBCS),
and per-shot adaptive (APS) basis selection, plus a benchmark harness.
"""

from .paulis import (
    EmptyHamiltonianError,
    Hamiltonian,
    HamiltonianFormatError,
    MeasurementBasis,
    PauliOp,
    covers,
    load_hamiltonian,
    parse_hamiltonian,
    serialize_hamiltonian,
)
from .states import (
    CapacityError,
    GroundStateConvergenceError,
    ShotOutcome,
    StateVector,
    apply_pauli,
    expectation,
    ground_state,
    hamiltonian_expectation,
    load_state,
    measurement_distribution,
    sample_measurement,
    sigmas_from_index,
)
from .sampling import (
    AdaptiveBasisSampler,
    BasisDistribution,
    CostTriple,
    PartialAssignment,
    ProductBasisSampler,
    ProductDistribution,
    choose_adaptive_basis,
    closed_form_distribution,
    diagonal_cost,
    locally_biased_distribution,
    sample_product_basis,
    stage_costs,
    uniform_distribution,
)
from .estimation import (
    Accumulator,
    EstimationResult,
    estimate_energy,
    exact_single_shot_variance,
    update_accumulator,
)
from .benchmark import (
    BenchmarkReport,
    ExperimentConfig,
    compare_methods,
    run_benchmark,
)

__version__ = "0.1.0"

__all__ = [
    "Accumulator",
    "AdaptiveBasisSampler",
    "BasisDistribution",
    "BenchmarkReport",
    "CapacityError",
    "CostTriple",
    "EmptyHamiltonianError",
    "EstimationResult",
    "ExperimentConfig",
    "GroundStateConvergenceError",
    "Hamiltonian",
    "HamiltonianFormatError",
    "MeasurementBasis",
    "PartialAssignment",
    "PauliOp",
    "ProductBasisSampler",
    "ProductDistribution",
    "ShotOutcome",
    "StateVector",
    "apply_pauli",
    "choose_adaptive_basis",
    "closed_form_distribution",
    "compare_methods",
    "covers",
    "diagonal_cost",
    "estimate_energy",
    "exact_single_shot_variance",
    "expectation",
    "ground_state",
    "hamiltonian_expectation",
    "load_hamiltonian",
    "load_state",
    "locally_biased_distribution",
    "measurement_distribution",
    "parse_hamiltonian",
    "run_benchmark",
    "sample_measurement",
    "sample_product_basis",
    "serialize_hamiltonian",
    "sigmas_from_index",
    "stage_costs",
    "uniform_distribution",
    "update_accumulator",
]
