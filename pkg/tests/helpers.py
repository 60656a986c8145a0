"""Independent oracles shared by the test suite.

Everything here deliberately avoids the library's own vectorized code
paths: matrices are built with dense Kronecker products, distributions
by brute-force enumeration, and optima by grid search, so agreement with
the package is meaningful evidence of correctness.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from pauli_shadows import Hamiltonian, MeasurementBasis, PauliOp

SQ2 = 1.0 / math.sqrt(2.0)

DENSE_LETTER = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Rotation taking each basis' eigenvectors to the computational basis.
DENSE_ROTATION = {
    "X": np.array([[SQ2, SQ2], [SQ2, -SQ2]], dtype=complex),
    "Y": np.array([[SQ2, -1j * SQ2], [SQ2, 1j * SQ2]], dtype=complex),
    "Z": np.eye(2, dtype=complex),
}

BELL_AMPLITUDES = np.array([SQ2, 0.0, 0.0, SQ2], dtype=complex)


def dense_pauli(letters: str) -> np.ndarray:
    """Kronecker-product matrix of a Pauli string, qubit 0 first."""
    matrix = np.eye(1, dtype=complex)
    for letter in letters:
        matrix = np.kron(matrix, DENSE_LETTER[letter])
    return matrix


def dense_hamiltonian(hamiltonian: Hamiltonian) -> np.ndarray:
    dim = 2**hamiltonian.n
    matrix = hamiltonian.offset * np.eye(dim, dtype=complex)
    for alpha, pauli in hamiltonian.terms:
        matrix += alpha * dense_pauli(str(pauli))
    return matrix


def dense_measurement_probs(amplitudes: np.ndarray, basis_letters: str) -> np.ndarray:
    """Outcome probabilities via one dense rotation matrix."""
    rotation = np.eye(1, dtype=complex)
    for letter in basis_letters:
        rotation = np.kron(rotation, DENSE_ROTATION[letter])
    rotated = rotation @ amplitudes
    return np.abs(rotated) ** 2


def all_bases(n: int) -> list[MeasurementBasis]:
    return [MeasurementBasis("".join(w)) for w in itertools.product("XYZ", repeat=n)]


def product_of_sigmas(index: int, n: int, pauli: PauliOp) -> int:
    """±1 product of the outcome's readouts over the string's non-I qubits."""
    product = 1
    for qubit, code in enumerate(pauli.codes):
        if code == 0:
            continue
        bit = (index >> (n - 1 - qubit)) & 1
        product *= 1 - 2 * bit
    return product


def covers_reference(basis_letters: str, pauli_letters: str) -> bool:
    """Letter-by-letter re-statement of the covering rule."""
    return all(p == "I" or p == b for b, p in zip(basis_letters, pauli_letters))


def simplex_grid(step_count: int) -> np.ndarray:
    """All (p_x, p_y, p_z) with entries i/step_count summing to 1."""
    points = []
    for i in range(step_count + 1):
        for j in range(step_count + 1 - i):
            points.append((i / step_count, j / step_count, (step_count - i - j) / step_count))
    return np.array(points)


def grid_objective_minimum(costs, grid: np.ndarray) -> float:
    """Brute-force minimum of sum_B c_B / p_B over a simplex grid."""
    total = np.zeros(len(grid))
    for column, c in enumerate(costs):
        if c == 0.0:
            continue
        with np.errstate(divide="ignore"):
            total = total + c / grid[:, column]
    return float(total.min())


def exact_adaptive_distribution(
    hamiltonian: Hamiltonian, ordering: tuple[int, ...] | None = None
) -> dict[str, float]:
    """Exact basis distribution of adaptive selection, by full enumeration.

    Walks every qubit ordering (uniformly weighted unless one is fixed)
    and every letter choice, recomputing the stage masses from scratch
    with plain loops. Returns letter-string -> probability.
    """
    n = hamiltonian.n
    orderings = [ordering] if ordering is not None else list(itertools.permutations(range(n)))
    result: dict[str, float] = {}

    def stage_distribution(order, chosen, stage):
        qubit = order[stage]
        masses = {"X": 0.0, "Y": 0.0, "Z": 0.0}
        for alpha, pauli in hamiltonian.terms:
            letters = str(pauli)
            if letters[qubit] == "I":
                continue
            if any(
                letters[order[j]] != "I" and letters[order[j]] != chosen[j] for j in range(stage)
            ):
                continue
            masses[letters[qubit]] += alpha * alpha
        total = sum(masses.values())
        if total == 0.0:
            return {"X": 1 / 3, "Y": 1 / 3, "Z": 1 / 3}
        roots = {k: math.sqrt(v) for k, v in masses.items()}
        scale = sum(roots.values())
        return {k: v / scale for k, v in roots.items()}

    for order in orderings:
        def walk(stage, chosen, probability):
            if stage == n:
                letters = [""] * n
                for j, qubit in enumerate(order):
                    letters[qubit] = chosen[j]
                word = "".join(letters)
                result[word] = result.get(word, 0.0) + probability / len(orderings)
                return
            dist = stage_distribution(order, chosen, stage)
            for letter, p in dist.items():
                if p > 0.0:
                    walk(stage + 1, chosen + [letter], probability * p)

        walk(0, [], 1.0)
    return result


def coverage_count(pauli_letters: str, n: int) -> Fraction:
    """Fraction of all 3^n bases covering the string, counted exactly."""
    covering = 0
    for word in itertools.product("XYZ", repeat=n):
        if covers_reference("".join(word), pauli_letters):
            covering += 1
    return Fraction(covering, 3**n)


def random_hamiltonian(
    rng: np.random.Generator,
    n: int,
    n_terms: int,
    max_weight: int | None = None,
    coeff_range: tuple[float, float] = (0.05, 1.0),
) -> Hamiltonian:
    """Random test Hamiltonian with distinct non-identity strings."""
    max_weight = max_weight or n
    n_terms = min(n_terms, 4**n - 1)  # only that many distinct strings exist
    terms = {}
    while len(terms) < n_terms:
        weight = int(rng.integers(1, max_weight + 1))
        qubits = rng.choice(n, size=weight, replace=False)
        letters = ["I"] * n
        for qubit in qubits:
            letters[qubit] = "XYZ"[rng.integers(3)]
        word = "".join(letters)
        if word not in terms:
            sign = 1.0 if rng.random() < 0.5 else -1.0
            terms[word] = sign * float(rng.uniform(*coeff_range))
    return Hamiltonian(n, [(alpha, PauliOp(word)) for word, alpha in terms.items()])


def random_state_amplitudes(rng: np.random.Generator, n: int) -> np.ndarray:
    amps = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return amps / np.linalg.norm(amps)
