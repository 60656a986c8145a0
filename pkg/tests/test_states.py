"""Tests for the dense statevector simulation."""

import math

import numpy as np
import pytest

from pauli_shadows import (
    GroundStateConvergenceError,
    Hamiltonian,
    MeasurementBasis,
    PauliOp,
    StateVector,
    apply_pauli,
    expectation,
    ground_state,
    hamiltonian_expectation,
    load_state,
    measurement_distribution,
    parse_hamiltonian,
    sample_measurement,
    sigmas_from_index,
)

from helpers import (
    BELL_AMPLITUDES,
    all_bases,
    dense_hamiltonian,
    dense_measurement_probs,
    dense_pauli,
    product_of_sigmas,
    random_state_amplitudes,
)

SQ2 = 1.0 / math.sqrt(2.0)


def bell_state():
    return StateVector(BELL_AMPLITUDES)


def plus_state():
    return StateVector([SQ2, SQ2])


class TestStateVector:
    def test_zero_state(self):
        s = StateVector.zero_state(3)
        assert s.n == 3
        assert s.amplitudes[0] == 1.0

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            StateVector([1.0, 1.0])

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            StateVector([1.0, 0.0, 0.0])


class TestApplyPauli:
    def test_z_on_zero(self):
        out = apply_pauli(StateVector.zero_state(1), PauliOp("Z"))
        np.testing.assert_allclose(out.amplitudes, [1.0, 0.0])

    def test_x_on_zero(self):
        out = apply_pauli(StateVector.zero_state(1), PauliOp("X"))
        np.testing.assert_allclose(out.amplitudes, [0.0, 1.0])

    def test_y_on_zero(self):
        out = apply_pauli(StateVector.zero_state(1), PauliOp("Y"))
        np.testing.assert_allclose(out.amplitudes, [0.0, 1.0j])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            apply_pauli(StateVector.zero_state(2), PauliOp("X"))

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(11)
        for n in (1, 2, 3):
            for _ in range(10):
                amps = random_state_amplitudes(rng, n)
                word = "".join(rng.choice(list("IXYZ"), size=n))
                out = apply_pauli(StateVector(amps), PauliOp(word))
                np.testing.assert_allclose(out.amplitudes, dense_pauli(word) @ amps, atol=1e-12)

    def test_involution(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            n = int(rng.integers(1, 4))
            amps = random_state_amplitudes(rng, n)
            word = "".join(rng.choice(list("IXYZ"), size=n))
            state = StateVector(amps)
            twice = apply_pauli(apply_pauli(state, PauliOp(word)), PauliOp(word))
            np.testing.assert_allclose(twice.amplitudes, amps, atol=1e-12)


class TestExpectation:
    def test_zero_state_z(self):
        assert expectation(StateVector.zero_state(1), PauliOp("Z")) == pytest.approx(1.0)

    def test_plus_state_x(self):
        assert expectation(plus_state(), PauliOp("X")) == pytest.approx(1.0)

    def test_bell_correlations(self):
        assert expectation(bell_state(), PauliOp("XX")) == pytest.approx(1.0)
        assert expectation(bell_state(), PauliOp("ZZ")) == pytest.approx(1.0)

    def test_matches_dense_oracle_and_range(self):
        rng = np.random.default_rng(13)
        for _ in range(30):
            n = int(rng.integers(1, 4))
            amps = random_state_amplitudes(rng, n)
            word = "".join(rng.choice(list("IXYZ"), size=n))
            value = expectation(StateVector(amps), PauliOp(word))
            oracle = np.vdot(amps, dense_pauli(word) @ amps).real
            assert value == pytest.approx(oracle, abs=1e-10)
            assert -1.0 <= value <= 1.0


class TestMeasurementDistribution:
    def test_zero_state_z(self):
        probs = measurement_distribution(StateVector.zero_state(1), MeasurementBasis("Z"))
        np.testing.assert_allclose(probs, [1.0, 0.0], atol=1e-12)

    def test_plus_state_z(self):
        probs = measurement_distribution(plus_state(), MeasurementBasis("Z"))
        np.testing.assert_allclose(probs, [0.5, 0.5], atol=1e-12)

    def test_bell_xx(self):
        # Exact four-amplitude computation: rotating both qubits by the
        # X-frame map sends (|00>+|11>)/sqrt(2) back to itself.
        probs = measurement_distribution(bell_state(), MeasurementBasis("XX"))
        np.testing.assert_allclose(probs, [0.5, 0.0, 0.0, 0.5], atol=1e-12)

    def test_bell_zz(self):
        probs = measurement_distribution(bell_state(), MeasurementBasis("ZZ"))
        np.testing.assert_allclose(probs, [0.5, 0.0, 0.0, 0.5], atol=1e-12)

    def test_sigma_index_convention(self):
        sigmas = sigmas_from_index(2, 2)  # binary 10: qubit 0 read as -1
        assert list(sigmas) == [-1, 1]

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(14)
        for n in (1, 2, 3):
            amps = random_state_amplitudes(rng, n)
            state = StateVector(amps)
            for basis in all_bases(n):
                probs = measurement_distribution(state, basis)
                np.testing.assert_allclose(
                    probs, dense_measurement_probs(amps, str(basis)), atol=1e-12
                )
                assert probs.sum() == pytest.approx(1.0, abs=1e-10)

    def test_covered_products_reproduce_expectations(self):
        # Weighting each outcome's ±1 product by its probability recovers
        # the exact expectation for every covered string.
        rng = np.random.default_rng(15)
        for n in (1, 2, 3):
            amps = random_state_amplitudes(rng, n)
            state = StateVector(amps)
            for basis in all_bases(n):
                probs = measurement_distribution(state, basis)
                for word_codes in np.ndindex(*(4,) * n):
                    word = "".join("IXYZ"[c] for c in word_codes)
                    pauli = PauliOp(word)
                    if not all(w == "I" or w == b for w, b in zip(word, str(basis))):
                        continue
                    weighted = sum(
                        p * product_of_sigmas(i, n, pauli) for i, p in enumerate(probs)
                    )
                    assert weighted == pytest.approx(expectation(state, pauli), abs=1e-10)


class TestSampleMeasurement:
    def test_deterministic_z(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            outcome = sample_measurement(StateVector.zero_state(1), MeasurementBasis("Z"), rng)
            assert list(outcome.sigmas) == [1]

    def test_zero_state_x_is_unbiased(self):
        rng = np.random.default_rng(1)
        draws = 20000
        plus = sum(
            sample_measurement(StateVector.zero_state(1), MeasurementBasis("X"), rng).sigmas[0] == 1
            for _ in range(draws)
        )
        se = math.sqrt(draws * 0.25)
        assert abs(plus - draws / 2) < 4 * se

    def test_bell_zz_outcomes(self):
        rng = np.random.default_rng(2)
        state = bell_state()
        basis = MeasurementBasis("ZZ")
        counts = {(1, 1): 0, (-1, -1): 0}
        draws = 20000
        for _ in range(draws):
            outcome = sample_measurement(state, basis, rng)
            pair = (int(outcome.sigmas[0]), int(outcome.sigmas[1]))
            assert pair[0] * pair[1] == 1  # product is always +1
            counts[pair] += 1
        se = math.sqrt(draws * 0.25)
        assert abs(counts[(1, 1)] - draws / 2) < 4 * se

    def test_empirical_frequencies_match_distribution(self):
        rng = np.random.default_rng(3)
        amps = random_state_amplitudes(rng, 3)
        state = StateVector(amps)
        basis = MeasurementBasis("XYZ")
        probs = measurement_distribution(state, basis)
        draws = 30000
        counts = np.zeros(8)
        for _ in range(draws):
            outcome = sample_measurement(state, basis, rng)
            index = sum((1 - int(s)) // 2 << (2 - q) for q, s in enumerate(outcome.sigmas))
            counts[index] += 1
        for k in range(8):
            se = math.sqrt(max(draws * probs[k] * (1 - probs[k]), 1.0))
            assert abs(counts[k] - draws * probs[k]) <= 4 * se


class TestGroundState:
    def test_single_qubit_z(self):
        energy, state = ground_state(parse_hamiltonian("1.0 Z"))
        assert energy == pytest.approx(-1.0, abs=1e-9)
        assert abs(state.amplitudes[1]) == pytest.approx(1.0, abs=1e-8)

    def test_single_qubit_x(self):
        energy, state = ground_state(parse_hamiltonian("1.0 X"))
        assert energy == pytest.approx(-1.0, abs=1e-9)
        assert expectation(state, PauliOp("X")) == pytest.approx(-1.0, abs=1e-9)

    def test_two_qubit_matches_dense_oracle(self):
        h = parse_hamiltonian("0.5 ZZ\n0.3 XI")
        energy, state = ground_state(h)
        dense_energy = np.linalg.eigvalsh(dense_hamiltonian(h))[0]
        assert energy == pytest.approx(dense_energy, abs=1e-8)
        assert hamiltonian_expectation(state, h) == pytest.approx(dense_energy, abs=1e-8)

    def test_random_hamiltonians_match_dense_oracle(self):
        from helpers import random_hamiltonian

        rng = np.random.default_rng(21)
        for _ in range(5):
            h = random_hamiltonian(rng, 3, 6)
            energy, state = ground_state(h)
            dense_energy = np.linalg.eigvalsh(dense_hamiltonian(h))[0]
            assert energy == pytest.approx(dense_energy, abs=1e-8)
            residual = dense_hamiltonian(h) @ state.amplitudes - energy * state.amplitudes
            assert np.linalg.norm(residual) <= 1e-7

    def test_offset_shifts_energy(self):
        base = parse_hamiltonian("1.0 Z")
        shifted = parse_hamiltonian("1.0 Z\n0.25 I")
        assert ground_state(shifted)[0] == pytest.approx(ground_state(base)[0] + 0.25, abs=1e-9)

    def test_identity_only(self):
        energy, state = ground_state(parse_hamiltonian("0.75 II"))
        assert energy == 0.75
        assert state.n == 2

    def test_term_order_invariance(self):
        text = "0.5 ZZI\n0.3 XII\n-0.2 IYX\n0.1 ZIZ"
        lines = text.splitlines()
        reference = ground_state(parse_hamiltonian(text))[0]
        permuted = ground_state(parse_hamiltonian("\n".join(reversed(lines))))[0]
        assert permuted == pytest.approx(reference, abs=1e-9)

    def test_non_convergence_raises(self):
        from helpers import random_hamiltonian

        h = random_hamiltonian(np.random.default_rng(22), 3, 8)
        with pytest.raises(GroundStateConvergenceError) as excinfo:
            ground_state(h, tol=1e-12, max_iter=1)
        assert excinfo.value.best_residual > 0.0


class TestLoadState:
    def test_zero_state(self):
        state = load_state("1 0\n0 0\n", 1)
        np.testing.assert_allclose(state.amplitudes, [1.0, 0.0])

    def test_renormalizes_small_error(self):
        state = load_state("0.7071 0\n0.7071 0\n", 1)
        np.testing.assert_allclose(state.amplitudes, [SQ2, SQ2], atol=1e-6)

    def test_zero_norm_rejected(self):
        with pytest.raises(ValueError):
            load_state("0 0\n0 0\n", 1)

    def test_gross_norm_violation_rejected(self):
        with pytest.raises(ValueError):
            load_state("0.5 0\n0.5 0\n", 1)

    def test_wrong_line_count(self):
        with pytest.raises(ValueError):
            load_state("1 0\n", 1)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            load_state("nan 0\n0 0\n", 1)

    def test_comments_and_imaginary_parts(self):
        state = load_state("# a Y eigenstate\n0.7071067811865476 0\n0 0.7071067811865476\n", 1)
        assert expectation(state, PauliOp("Y")) == pytest.approx(1.0, abs=1e-9)
