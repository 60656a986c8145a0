"""Measurement-basis selection strategies.

Three ways to pick product Pauli bases for energy estimation:

* uniform per-qubit letters (classical shadows, CS),
* a fixed locally-biased product distribution fitted to the Hamiltonian
  (LBCS),
* per-shot adaptive selection that conditions each qubit's letter
  distribution on the letters already assigned (APS).

All three share one convex subproblem: minimizing
``c_X/p_X + c_Y/p_Y + c_Z/p_Z`` over the probability simplex, whose
closed-form solution is ``p_B proportional to sqrt(c_B)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .paulis import CODE_I, Hamiltonian, MeasurementBasis, PauliOp

PROB_SUM_TOL = 1e-12

# Probability floor applied to per-qubit letters while the LBCS descent is
# running; keeps every coverage probability positive so the per-coordinate
# masses stay finite. Removed from the final answer when safe.
LBCS_PROB_FLOOR = 1e-12


class CostTriple(NamedTuple):
    """Squared-coefficient masses attributed to the X, Y, and Z letters."""

    x: float
    y: float
    z: float


class BasisDistribution:
    """Probabilities for measuring one qubit in the X, Y, or Z basis."""

    __slots__ = ("probs",)

    def __init__(self, probs: Sequence[float]):
        probs = tuple(float(p) for p in probs)
        if len(probs) != 3:
            raise ValueError("a basis distribution needs exactly three probabilities")
        if any(p < 0.0 or p > 1.0 for p in probs):
            raise ValueError(f"probabilities must lie in [0, 1], got {probs}")
        if abs(sum(probs) - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities must sum to 1, got {sum(probs)}")
        self.probs = probs

    @classmethod
    def uniform(cls) -> "BasisDistribution":
        return cls((1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0))

    def __getitem__(self, index: int) -> float:
        return self.probs[index]

    def __iter__(self):
        return iter(self.probs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BasisDistribution):
            return NotImplemented
        return self.probs == other.probs

    def __repr__(self) -> str:
        return f"BasisDistribution({self.probs})"


class ProductDistribution:
    """Independent per-qubit basis distributions for a whole register."""

    __slots__ = ("per_qubit",)

    def __init__(self, per_qubit: Sequence[BasisDistribution]):
        per_qubit = tuple(per_qubit)
        if not per_qubit:
            raise ValueError("a product distribution needs at least one qubit")
        if not all(isinstance(d, BasisDistribution) for d in per_qubit):
            raise TypeError("per_qubit entries must be BasisDistribution instances")
        self.per_qubit = per_qubit

    @property
    def n(self) -> int:
        return len(self.per_qubit)

    def __len__(self) -> int:
        return len(self.per_qubit)

    def __getitem__(self, qubit: int) -> BasisDistribution:
        return self.per_qubit[qubit]

    def __iter__(self):
        return iter(self.per_qubit)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProductDistribution):
            return NotImplemented
        return self.per_qubit == other.per_qubit

    def as_array(self) -> np.ndarray:
        """Probabilities as an (n, 3) array with columns X, Y, Z."""
        return np.array([d.probs for d in self.per_qubit], dtype=np.float64)

    def coverage_probability(self, pauli: PauliOp) -> float:
        """Probability that a sampled basis covers ``pauli``."""
        if pauli.n != self.n:
            raise ValueError("Pauli length does not match distribution length")
        prob = 1.0
        for qubit, code in enumerate(pauli.codes):
            if code != CODE_I:
                prob *= self.per_qubit[qubit].probs[code - 1]
        return prob

    def to_jsonable(self) -> list[list[float]]:
        return [list(d.probs) for d in self.per_qubit]

    def __repr__(self) -> str:
        return f"ProductDistribution(n={self.n})"


def closed_form_distribution(costs: CostTriple | Sequence[float]) -> BasisDistribution:
    """Minimizer of ``sum_B c_B / p_B`` over the probability simplex.

    With every mass zero the objective is flat, so the uniform
    distribution is returned. Letters with zero mass get probability
    exactly 0 (convention c/0 = 0), and are therefore never sampled.
    """
    c = tuple(float(v) for v in costs)
    if len(c) != 3:
        raise ValueError("expected three cost masses")
    if any(v < 0.0 for v in c):
        raise ValueError(f"cost masses must be nonnegative, got {c}")
    roots = tuple(math.sqrt(v) for v in c)
    total = sum(roots)
    if total == 0.0:
        return BasisDistribution.uniform()
    return BasisDistribution(tuple(r / total for r in roots))


def _distribution_objective(costs: Sequence[float], probs: Sequence[float]) -> float:
    """The simplex objective with the c/0 = 0 (c=0) and +inf (c>0) conventions."""
    total = 0.0
    for c, p in zip(costs, probs):
        if c == 0.0:
            continue
        if p == 0.0:
            return math.inf
        total += c / p
    return total


@dataclass(frozen=True)
class PartialAssignment:
    """A qubit processing order plus the letters chosen so far.

    ``ordering`` is a bijection on qubits; stage j handles qubit
    ``ordering[j]``. ``assigned[j]`` is the letter code already chosen at
    stage j, so ``len(assigned)`` stages are complete.
    """

    ordering: tuple[int, ...]
    assigned: tuple[int, ...]

    def __post_init__(self):
        n = len(self.ordering)
        if sorted(self.ordering) != list(range(n)):
            raise ValueError("ordering must be a bijection on {0, ..., n-1}")
        if len(self.assigned) > n:
            raise ValueError("more assigned letters than stages")
        if any(code not in (1, 2, 3) for code in self.assigned):
            raise ValueError("assigned letters must be X, Y, or Z codes")


def stage_costs(hamiltonian: Hamiltonian, assignment: PartialAssignment, stage: int) -> CostTriple:
    """Letter masses for the current stage of adaptive basis selection.

    Collects the Hamiltonian terms that act non-trivially on the stage's
    qubit and are still consistent with every previously assigned letter,
    and splits their squared coefficients by the letter at that qubit.
    """
    if not 0 <= stage < len(assignment.ordering):
        raise ValueError(f"stage {stage} out of range")
    if stage > len(assignment.assigned):
        raise ValueError(f"stage {stage} reached before earlier stages were assigned")
    qubit = assignment.ordering[stage]
    masses = [0.0, 0.0, 0.0]
    for alpha, pauli in hamiltonian.terms:
        code = int(pauli.codes[qubit])
        if code == CODE_I:
            continue
        consistent = True
        for done in range(stage):
            prior = int(pauli.codes[assignment.ordering[done]])
            if prior != CODE_I and prior != assignment.assigned[done]:
                consistent = False
                break
        if consistent:
            masses[code - 1] += alpha * alpha
    return CostTriple(*masses)


def _sample_letter(probs: Sequence[float], u: float) -> int:
    """Pick a letter code from (p_X, p_Y, p_Z) given a uniform draw.

    Zero-probability letters are never returned, even when rounding
    leaves the probabilities summing slightly below one.
    """
    remaining = u
    last_positive = 0
    for code, p in enumerate(probs, start=1):
        if p <= 0.0:
            continue
        if remaining < p:
            return code
        remaining -= p
        last_positive = code
    return last_positive


def choose_adaptive_basis(hamiltonian: Hamiltonian, rng: np.random.Generator) -> MeasurementBasis:
    """Draw one measurement basis by per-qubit adaptive selection (APS).

    Visits qubits in a fresh uniformly random order; at each qubit it
    solves the closed-form simplex problem for the terms still consistent
    with the letters assigned so far, then samples that qubit's letter.
    One call costs O(n_terms * n): the consistent-term set is maintained
    incrementally instead of being recomputed from scratch per stage.
    For repeated draws, `AdaptiveBasisSampler` amortizes the setup.
    """
    return AdaptiveBasisSampler(hamiltonian).sample(rng)


def uniform_distribution(n: int) -> ProductDistribution:
    """The classical-shadows distribution: every letter of every qubit is 1/3."""
    if n < 1:
        raise ValueError("need at least one qubit")
    return ProductDistribution([BasisDistribution.uniform() for _ in range(n)])


def sample_product_basis(pd: ProductDistribution, rng: np.random.Generator) -> MeasurementBasis:
    """Sample a basis with independent per-qubit letters."""
    return ProductBasisSampler(pd).sample(rng)


def diagonal_cost(hamiltonian: Hamiltonian, pd: ProductDistribution) -> float:
    """Variance surrogate ``sum_P alpha_P^2 / Pr[P covered]``.

    Returns ``math.inf`` when some term has zero coverage probability.
    The constant offset never contributes (it is measured exactly).
    """
    if hamiltonian.n != pd.n:
        raise ValueError("Hamiltonian and distribution qubit counts differ")
    total = 0.0
    for alpha, pauli in hamiltonian.terms:
        coverage = pd.coverage_probability(pauli)
        if coverage == 0.0:
            return math.inf
        total += alpha * alpha / coverage
    return total


def _lbcs_sweeps(
    hamiltonian: Hamiltonian, max_sweeps: int
) -> Iterator[tuple[np.ndarray, float]]:
    """Yield (raw probability table, floored-table cost) after each sweep.

    One sweep performs a cyclic pass over qubits; each per-qubit update is
    the exact coordinate minimizer given the other (floored) qubits.
    """
    n = hamiltonian.n
    m = hamiltonian.n_terms
    codes = hamiltonian.codes
    masses_all = hamiltonian.coeffs * hamiltonian.coeffs

    raw = np.full((n, 3), 1.0 / 3.0)
    floored = raw.copy()

    # factor[t, q] = floored prob of term t's letter at qubit q (1 where identity)
    nontrivial = codes != CODE_I
    letter_index = np.where(nontrivial, codes.astype(np.int64) - 1, 0)
    qubit_index = np.tile(np.arange(n), (m, 1))

    def term_factors() -> np.ndarray:
        factors = floored[qubit_index, letter_index]
        factors[~nontrivial] = 1.0
        return factors

    factors = term_factors()
    coverage = factors.prod(axis=1)

    for _ in range(max_sweeps):
        for qubit in range(n):
            column = codes[:, qubit]
            active = column != CODE_I
            masses = np.zeros(3)
            if active.any():
                # effective mass: alpha^2 divided by the other qubits' letter
                # probabilities, i.e. coverage with this qubit's factor removed
                partial = masses_all[active] * (factors[active, qubit] / coverage[active])
                masses = np.bincount(column[active] - 1, weights=partial, minlength=3)
            total = masses.sum()
            if total > 0.0:
                roots = np.sqrt(masses)
                new_raw = roots / roots.sum()
            else:
                new_raw = np.full(3, 1.0 / 3.0)
            raw[qubit] = new_raw
            clipped = np.maximum(new_raw, LBCS_PROB_FLOOR)
            floored[qubit] = clipped / clipped.sum()
            if active.any():
                new_factors = floored[qubit, column[active] - 1]
                coverage[active] *= new_factors / factors[active, qubit]
                factors[active, qubit] = new_factors

        cost = float(np.sum(masses_all / coverage))
        yield raw.copy(), cost


def locally_biased_distribution(
    hamiltonian: Hamiltonian, tol: float = 1e-10, max_sweeps: int = 10_000
) -> ProductDistribution:
    """Fit the LBCS product distribution by cyclic coordinate descent.

    Starts from the uniform distribution and sweeps qubits in index
    order; each qubit's triple is replaced by the closed-form coordinate
    minimizer of the diagonal cost. Stops when a full sweep changes the
    cost by less than ``tol * (1 + |cost|)`` or after ``max_sweeps``.
    """
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be at least 1")
    if hamiltonian.n_terms == 0:
        return uniform_distribution(hamiltonian.n)

    raw = None
    previous_cost = math.inf
    for raw, cost in _lbcs_sweeps(hamiltonian, max_sweeps):
        if abs(previous_cost - cost) < tol * (1.0 + abs(cost)):
            break
        previous_cost = cost

    unfloored = ProductDistribution([BasisDistribution(tuple(row)) for row in raw])
    if math.isfinite(diagonal_cost(hamiltonian, unfloored)):
        return unfloored
    clipped = np.maximum(raw, LBCS_PROB_FLOOR)
    clipped /= clipped.sum(axis=1, keepdims=True)
    return ProductDistribution([BasisDistribution(tuple(row)) for row in clipped])


class ProductBasisSampler:
    """Draws measurement bases from a fixed product distribution."""

    def __init__(self, distribution: ProductDistribution):
        self.distribution = distribution
        table = distribution.as_array()
        # Cumulative thresholds with zero-probability letters forced to
        # zero-width intervals: X iff u < t0, Y iff t0 <= u < t1, else Z.
        t0 = table[:, 0].copy()
        t1 = table[:, 0] + table[:, 1]
        t1[table[:, 2] == 0.0] = 1.0
        t0[(table[:, 1] == 0.0) & (table[:, 2] == 0.0)] = 1.0
        self._t0 = t0
        self._t1 = t1

    @property
    def n(self) -> int:
        return self.distribution.n

    def sample(self, rng: np.random.Generator) -> MeasurementBasis:
        draws = rng.random(self.distribution.n)
        basis_codes = (1 + (draws >= self._t0) + (draws >= self._t1)).astype(np.uint8)
        basis_codes.setflags(write=False)
        return MeasurementBasis._from_trusted(basis_codes)


class AdaptiveBasisSampler:
    """Draws measurement bases by per-shot adaptive selection (APS).

    Precomputes plain-Python term tables once so the per-shot stage loop
    touches each surviving term a constant number of times, keeping one
    draw at O(n_terms * n) worst case.
    """

    def __init__(self, hamiltonian: Hamiltonian):
        self.hamiltonian = hamiltonian
        codes = hamiltonian.codes
        self._columns = [[int(c) for c in codes[:, q]] for q in range(hamiltonian.n)]
        self._masses = [float(a) * float(a) for a in hamiltonian.coeffs]

    @property
    def n(self) -> int:
        return self.hamiltonian.n

    def sample(self, rng: np.random.Generator) -> MeasurementBasis:
        n = self.hamiltonian.n
        masses = self._masses
        columns = self._columns
        alive = list(range(len(masses)))
        basis_codes = np.empty(n, dtype=np.uint8)

        for qubit in rng.permutation(n):
            column = columns[qubit]
            c_x = c_y = c_z = 0.0
            for term in alive:
                code = column[term]
                if code == 1:
                    c_x += masses[term]
                elif code == 2:
                    c_y += masses[term]
                elif code == 3:
                    c_z += masses[term]
            total = c_x + c_y + c_z
            if total > 0.0:
                r_x, r_y, r_z = math.sqrt(c_x), math.sqrt(c_y), math.sqrt(c_z)
                scale = r_x + r_y + r_z
                probs = (r_x / scale, r_y / scale, r_z / scale)
            else:
                probs = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
            letter = _sample_letter(probs, rng.random())
            basis_codes[qubit] = letter
            alive = [term for term in alive if column[term] == 0 or column[term] == letter]

        basis_codes.setflags(write=False)
        return MeasurementBasis._from_trusted(basis_codes)
