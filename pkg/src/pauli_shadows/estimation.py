"""The per-shot estimation loop and its exact small-instance oracles.

Every strategy runs the same loop: pick a basis, measure once, and fold
the ±1 product of each covered term into that term's running mean. The
energy estimate is the coefficient-weighted sum of the running means
plus the Hamiltonian's constant offset.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Protocol

import numpy as np

from .paulis import CODE_I, Hamiltonian, MeasurementBasis, PauliOp
from .states import (
    CapacityError,
    ShotOutcome,
    StateVector,
    hamiltonian_expectation,
    measurement_cumulative,
    measurement_distribution,
    sample_outcome_index,
)
from .sampling import ProductDistribution

VARIANCE_ORACLE_MAX_QUBITS = 4

# Cap on cached per-basis outcome tables inside one estimation run
# (memory bound of roughly 64 MiB of cumulative distributions).
_CACHE_BYTE_BUDGET = 1 << 26


class BasisSampler(Protocol):
    """Anything that can draw a measurement basis per shot."""

    def sample(self, rng: np.random.Generator) -> MeasurementBasis: ...


class Accumulator:
    """Running mean and hit count for a fixed set of Pauli strings.

    Keys are the strings themselves; lookups hash the letter sequence, so
    they cost O(n). Means use the incremental update
    ``mu <- (s * mu + product) / (s + 1)`` term by term.
    """

    __slots__ = ("paulis", "_index", "_codes", "_nontrivial", "_positions", "means", "counts")

    # Below this many (term, qubit) cells a plain-Python update beats the
    # fixed overhead of vectorized numpy calls on tiny arrays.
    _SMALL_CELLS = 96

    def __init__(self, paulis: Iterable[PauliOp]):
        self.paulis = tuple(paulis)
        self._index = {pauli: i for i, pauli in enumerate(self.paulis)}
        if len(self._index) != len(self.paulis):
            raise ValueError("duplicate Pauli keys")
        if self.paulis:
            n = self.paulis[0].n
            if any(p.n != n for p in self.paulis):
                raise ValueError("all keys must share one qubit count")
            self._codes = np.stack([p.codes for p in self.paulis])
        else:
            self._codes = np.zeros((0, 0), dtype=np.uint8)
        self._nontrivial = self._codes != CODE_I
        if self._codes.size <= self._SMALL_CELLS:
            # (qubit, letter) pairs of each key's non-identity positions
            self._positions = [
                [(q, int(c)) for q, c in enumerate(p.codes) if c != CODE_I] for p in self.paulis
            ]
        else:
            self._positions = None
        self.means = np.zeros(len(self.paulis))
        self.counts = np.zeros(len(self.paulis), dtype=np.int64)

    @classmethod
    def for_hamiltonian(cls, hamiltonian: Hamiltonian) -> "Accumulator":
        return cls(hamiltonian.paulis)

    def update(self, basis: MeasurementBasis, outcome: ShotOutcome) -> "Accumulator":
        """Fold one measurement into every covered key; returns self.

        The product over an empty letter set (an all-identity key) is +1.
        """
        if len(self.paulis) == 0:
            return self
        if basis.n != self._codes.shape[1] or len(outcome) != basis.n:
            raise ValueError("basis/outcome length does not match accumulator keys")
        if self._positions is not None:
            basis_codes = basis.codes.tolist()
            sigmas = outcome.sigmas.tolist()
            means, counts = self.means, self.counts
            for i, positions in enumerate(self._positions):
                product = 1.0
                for qubit, code in positions:
                    if code != basis_codes[qubit]:
                        break
                    product *= sigmas[qubit]
                else:
                    s = counts[i]
                    means[i] = (s * means[i] + product) / (s + 1)
                    counts[i] = s + 1
            return self
        nontrivial = self._nontrivial
        covered = ~np.logical_and(nontrivial, self._codes != basis.codes).any(axis=1)
        if covered.any():
            negative = outcome.sigmas < 0
            parity = np.logical_and(nontrivial[covered], negative).sum(axis=1) & 1
            products = 1.0 - 2.0 * parity
            s = self.counts[covered]
            self.means[covered] = (s * self.means[covered] + products) / (s + 1)
            self.counts[covered] = s + 1
        return self

    def __getitem__(self, pauli: PauliOp) -> tuple[float, int]:
        i = self._index[pauli]
        return float(self.means[i]), int(self.counts[i])

    def __contains__(self, pauli: PauliOp) -> bool:
        return pauli in self._index

    def __len__(self) -> int:
        return len(self.paulis)

    def items(self):
        for i, pauli in enumerate(self.paulis):
            yield pauli, (float(self.means[i]), int(self.counts[i]))

    def uncovered(self) -> list[PauliOp]:
        """Keys that no shot has covered yet."""
        return [p for p, c in zip(self.paulis, self.counts) if c == 0]


def update_accumulator(
    acc: Accumulator, basis: MeasurementBasis, outcome: ShotOutcome
) -> Accumulator:
    """Functional spelling of `Accumulator.update`."""
    return acc.update(basis, outcome)


@dataclass
class EstimationResult:
    """Outcome of one estimation run.

    ``energy`` equals the constant offset plus the coefficient-weighted
    running means; terms never covered contribute zero and are listed in
    ``uncovered_terms`` so callers can flag potentially biased runs.
    """

    energy: float
    per_term: Accumulator
    shots_used: int
    uncovered_terms: list[PauliOp] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "energy": self.energy,
            "shots": self.shots_used,
            "terms": [
                {"pauli": str(pauli), "mu": mu, "s": count}
                for pauli, (mu, count) in self.per_term.items()
            ],
            "uncovered": [str(p) for p in self.uncovered_terms],
        }


def estimate_energy(
    hamiltonian: Hamiltonian,
    state: StateVector,
    shots: int,
    sampler: BasisSampler,
    rng: np.random.Generator,
) -> EstimationResult:
    """Run the measurement loop for ``shots`` iterations.

    Each iteration draws a basis from ``sampler``, simulates one
    measurement of ``state`` in that basis, and updates the running mean
    of every covered term. Deterministic given the inputs and the rng
    state; replaying a seed reproduces the result bit for bit.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if state.n != hamiltonian.n:
        raise ValueError("state and Hamiltonian qubit counts differ")

    acc = Accumulator.for_hamiltonian(hamiltonian)
    n = hamiltonian.n
    cache: dict[bytes, np.ndarray] = {}
    max_cached = max(16, _CACHE_BYTE_BUDGET // (8 * 2**n))

    # One ±1 row per outcome index; shots only read rows from it.
    shifts = np.arange(n - 1, -1, -1)
    sigma_table = (1 - 2 * ((np.arange(2**n)[:, None] >> shifts) & 1)).astype(np.int8)
    sigma_table.setflags(write=False)

    for _ in range(shots):
        basis = sampler.sample(rng)
        key = basis.codes.tobytes()
        cumulative = cache.get(key)
        if cumulative is None:
            cumulative = measurement_cumulative(state, basis)
            if len(cache) >= max_cached:
                cache.clear()
            cache[key] = cumulative
        index = sample_outcome_index(cumulative, rng)
        outcome = ShotOutcome._from_trusted(sigma_table[index])
        acc.update(basis, outcome)

    energy = hamiltonian.offset + float(np.dot(hamiltonian.coeffs, acc.means))
    return EstimationResult(
        energy=energy,
        per_term=acc,
        shots_used=shots,
        uncovered_terms=acc.uncovered(),
    )


def exact_single_shot_variance(
    hamiltonian: Hamiltonian, state: StateVector, pd: ProductDistribution
) -> float:
    """Exact variance of the inverse-probability one-shot energy estimator.

    The estimator reweights each covered term's ±1 product by its
    coverage probability, which makes a single shot unbiased; this
    routine enumerates every basis (weighted by ``pd``) and every outcome
    (weighted by the exact measurement distribution) to compute its
    variance. Also cross-checks that the enumerated mean matches the
    exact energy to 1e-9. Returns ``math.inf`` when some term can never
    be covered.

    Note: the running-mean loop in `estimate_energy` conditions on
    coverage instead of reweighting. Both are unbiased, but their
    variances differ; this oracle describes the reweighted estimator.
    """
    n = hamiltonian.n
    if n > VARIANCE_ORACLE_MAX_QUBITS:
        raise CapacityError(
            f"variance oracle enumerates 3^n * 2^n states; limit is n <= {VARIANCE_ORACLE_MAX_QUBITS}"
        )
    if pd.n != n or state.n != n:
        raise ValueError("Hamiltonian, state, and distribution qubit counts differ")

    coverages = np.array([pd.coverage_probability(p) for p in hamiltonian.paulis])
    if np.any(coverages == 0.0):
        return math.inf

    coeffs = hamiltonian.coeffs
    codes = hamiltonian.codes
    outcome_indices = np.arange(2**n)
    # Sign of each term's product for every outcome index: parity of the
    # minus-one readouts at the term's non-identity positions.
    term_masks = np.array(
        [sum(1 << (n - 1 - q) for q in range(n) if p.codes[q] != CODE_I) for p in hamiltonian.paulis],
        dtype=np.int64,
    )
    sign_table = 1.0 - 2.0 * (np.bitwise_count(outcome_indices[:, None] & term_masks[None, :]) & 1)

    mean = 0.0
    second_moment = 0.0
    for letters in itertools.product((1, 2, 3), repeat=n):
        basis = MeasurementBasis(np.array(letters, dtype=np.uint8))
        basis_prob = 1.0
        for qubit, code in enumerate(letters):
            basis_prob *= pd[qubit].probs[code - 1]
        if basis_prob == 0.0:
            continue
        covered = ~((codes != CODE_I) & (codes != basis.codes)).any(axis=1)
        if covered.any():
            weights = coeffs[covered] / coverages[covered]
            estimates = hamiltonian.offset + sign_table[:, covered] @ weights
        else:
            estimates = np.full(2**n, hamiltonian.offset)
        outcome_probs = measurement_distribution(state, basis)
        mean += basis_prob * float(outcome_probs @ estimates)
        second_moment += basis_prob * float(outcome_probs @ (estimates * estimates))

    exact = hamiltonian_expectation(state, hamiltonian)
    if abs(mean - exact) > 1e-9:
        raise ArithmeticError(
            f"enumerated estimator mean {mean} differs from exact energy {exact}"
        )
    return max(0.0, second_moment - mean * mean)
