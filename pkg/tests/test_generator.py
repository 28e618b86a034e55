import math

import numpy as np
import pytest

from llmqas.ansatz import AnsatzSpec, TwoLocalConfig, build_circuit
from llmqas.errors import InvalidDiscriminatorOutput, ParamLengthMismatch
from llmqas.generator import (
    GeneratorModel,
    distribution_jacobian,
    generator_distribution,
    generator_loss_and_grad,
)
from llmqas.statevector import Circuit, Gate

from oracles import H, circuit_unitary, embed, finite_difference


def oracle_distribution(circuit, theta):
    n = circuit.n_qubits
    plus = np.zeros(2**n, dtype=complex)
    plus[0] = 1
    for q in range(n):
        plus = embed(n, q, H) @ plus
    amps = circuit_unitary(circuit, theta) @ plus
    return np.abs(amps) ** 2


def random_model(rng, n_max=4, n_blocks_max=4):
    n = int(rng.integers(1, n_max + 1))
    blocks = tuple(int(b) for b in rng.integers(1, 6, size=rng.integers(1, n_blocks_max + 1)))
    configs = {
        i: TwoLocalConfig(
            tuple(rng.choice(["RX", "RY", "RZ"], size=int(rng.integers(1, 4)), replace=False)),
            str(rng.choice(["full", "linear", "circular", "sca", "pairwise", "reverse_linear"])),
        )
        for i, b in enumerate(blocks)
        if b == 5
    }
    return GeneratorModel.initialize(build_circuit(AnsatzSpec(blocks, configs), n), rng)


class TestDistribution:
    def test_cz_only_is_uniform(self):
        m = GeneratorModel(2, build_circuit([4], 2), [])
        np.testing.assert_allclose(generator_distribution(m), [0.25] * 4, atol=1e-15)

    @pytest.mark.parametrize("theta", [0.0, 0.3, -2.1, math.pi])
    def test_rx_on_plus_is_constant(self, theta):
        m = GeneratorModel(1, build_circuit([1], 1), [theta])
        np.testing.assert_allclose(generator_distribution(m), [0.5, 0.5], atol=1e-15)

    def test_matches_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(40):
            m = random_model(rng)
            np.testing.assert_allclose(generator_distribution(m), oracle_distribution(m.ansatz, m.theta), atol=1e-12)

    def test_sums_to_one(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            assert generator_distribution(random_model(rng)).sum() == pytest.approx(1.0, abs=1e-12)

    def test_appending_cz_block_keeps_distribution(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            m = random_model(rng)
            n = m.n_qubits
            extended = GeneratorModel(n, m.ansatz + build_circuit([4], n), m.theta)
            np.testing.assert_allclose(generator_distribution(extended), generator_distribution(m), atol=1e-14)

    def test_theta_length_checked(self):
        with pytest.raises(ParamLengthMismatch):
            GeneratorModel(2, build_circuit([1], 2), [0.1])

    def test_initialize_range(self):
        m = GeneratorModel.initialize(build_circuit([3, 3], 3), np.random.default_rng(0))
        assert m.theta.shape == (18,)
        assert np.all(np.abs(m.theta) <= math.pi)


class TestJacobian:
    def test_constant_distribution_gives_zero_column(self):
        m = GeneratorModel(1, build_circuit([1], 1), [0.7])
        np.testing.assert_allclose(distribution_jacobian(m), np.zeros((2, 1)), atol=1e-15)

    def test_bare_rx_at_half_pi(self):
        # no Hadamard layer: prepend H twice so the plus state is undone
        c = Circuit(1, (Gate("H", (0,)), Gate("RX", (0,), 0)))
        m = GeneratorModel(1, c, [math.pi / 2])
        np.testing.assert_allclose(generator_distribution(m), [0.5, 0.5], atol=1e-15)
        assert distribution_jacobian(m)[0, 0] == pytest.approx(-0.5, abs=1e-12)

    def test_no_parameters(self):
        m = GeneratorModel(2, build_circuit([4], 2), [])
        assert distribution_jacobian(m).shape == (4, 0)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            m = random_model(rng, n_max=3)
            fd = finite_difference(lambda t: oracle_distribution(m.ansatz, t), m.theta, 1e-5)
            np.testing.assert_allclose(distribution_jacobian(m), fd, atol=1e-6)

    def test_columns_sum_to_zero(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            jac = distribution_jacobian(random_model(rng))
            np.testing.assert_allclose(jac.sum(axis=0), 0.0, atol=1e-9)


class TestLoss:
    def test_perfect_discriminator_output(self):
        m = random_model(np.random.default_rng(7))
        loss, grad = generator_loss_and_grad(m, np.ones(2**m.n_qubits))
        assert loss == 0.0
        np.testing.assert_array_equal(grad, np.zeros_like(m.theta))

    def test_half_output(self):
        m = random_model(np.random.default_rng(8))
        loss, grad = generator_loss_and_grad(m, np.full(2**m.n_qubits, 0.5))
        assert loss == pytest.approx(math.log(2), abs=1e-12)
        np.testing.assert_allclose(grad, 0.0, atol=1e-12)

    def test_grad_matches_finite_differences(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            m = random_model(rng, n_max=3)
            d = rng.uniform(0.05, 0.95, 2**m.n_qubits)
            _, grad = generator_loss_and_grad(m, d)

            def loss_at(t):
                return -oracle_distribution(m.ansatz, t) @ np.log(d)

            np.testing.assert_allclose(grad, finite_difference(loss_at, m.theta, 1e-5), atol=1e-6)

    @pytest.mark.parametrize("bad", [0.0, -0.1, 1.5, float("nan")])
    def test_invalid_outputs(self, bad):
        m = GeneratorModel(1, build_circuit([1], 1), [0.1])
        with pytest.raises(InvalidDiscriminatorOutput):
            generator_loss_and_grad(m, [0.5, bad])

    def test_wrong_length(self):
        m = GeneratorModel(1, build_circuit([1], 1), [0.1])
        with pytest.raises(ValueError):
            generator_loss_and_grad(m, [0.5])
