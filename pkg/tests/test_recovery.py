import numpy as np
import pytest
from hypothesis import given, strategies as st

from kl_recovery import fixtures as fx
from kl_recovery.channel import QuantumChannel, apply_channel, encode, is_trace_preserving
from kl_recovery.errors import DimensionError, NotCorrectableError, NotUnitaryError, SingularAncillaError, SpanError
from kl_recovery.kl import verify_correctable
from kl_recovery.recovery import (
    build_recovery,
    conjugate_output,
    extend_plan,
    recover,
    recover_full,
    rotate_kraus,
)

from conftest import ginibre

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def plan_for(inst):
    return build_recovery(inst.channel, inst.code, verify_correctable(inst.channel, inst.code))


def same_up_to_column_phase(a, b, atol=1e-12):
    overlaps = np.sum(a.conj() * b, axis=0)
    return np.allclose(np.abs(overlaps), 1, atol=atol) and np.allclose(b, a * overlaps, atol=atol)


class TestRotateKraus:
    def test_identity_rotation(self):
        phi = fx.example2((0.4, 0.3, 0.2, 0.1)).channel
        for a, b in zip(rotate_kraus(phi, np.eye(4)), phi.kraus):
            np.testing.assert_array_equal(a, b)

    def test_hadamard_mix(self, rng):
        a, b = ginibre(rng, 3, 3), ginibre(rng, 3, 3)
        h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        g0, g1 = rotate_kraus(QuantumChannel([a, b]), h)
        np.testing.assert_allclose(g0, (a + b) / np.sqrt(2), atol=1e-15)
        np.testing.assert_allclose(g1, (a - b) / np.sqrt(2), atol=1e-15)
        rho = ginibre(rng, 3, 3)
        lhs = g0 @ rho @ g0.conj().T + g1 @ rho @ g1.conj().T
        np.testing.assert_allclose(lhs, a @ rho @ a.conj().T + b @ rho @ b.conj().T, atol=1e-13)

    def test_rejects_bad_rotation(self):
        phi = QuantumChannel([np.eye(2), np.eye(2)])
        with pytest.raises(NotUnitaryError):
            rotate_kraus(phi, [[1, 1], [0, 1]])
        with pytest.raises(DimensionError):
            rotate_kraus(phi, np.eye(3))


class TestBuildRecovery:
    def test_bitflip_matches_permutation(self):
        plan = plan_for(fx.example2((0.4, 0.3, 0.2, 0.1)))
        assert same_up_to_column_phase(fx.bitflip_recovery_unitary(), plan.r_unitary)

    def test_bitflip_other_ordering(self):
        p = np.array([0.1, 0.2, 0.4, 0.3])
        plan = plan_for(fx.example2(p))
        order = np.argsort(-p)
        ref = fx.bitflip_recovery_unitary()
        cols = np.concatenate([np.arange(2 * j, 2 * j + 2) for j in order])
        assert same_up_to_column_phase(ref[:, cols], plan.r_unitary)

    def test_example1(self, rng):
        inst = fx.example1()
        plan = plan_for(inst)
        assert plan.q == 2
        for _ in range(5):
            data = fx.random_mixed_state(2, rng)
            out = conjugate_output(plan, apply_channel(inst.channel, encode(inst.code, data)))
            np.testing.assert_allclose(out, np.kron(np.eye(2) / 2, data), atol=1e-12)

    def test_identity(self):
        plan = plan_for(fx.identity_instance(3))
        assert plan.q == 1
        np.testing.assert_allclose(plan.xi, [[1]])
        assert same_up_to_column_phase(np.eye(3), plan.r_unitary)

    def test_refuses_non_correctable(self):
        phi, code = fx.non_correctable_instance()
        with pytest.raises(NotCorrectableError):
            build_recovery(phi, code, verify_correctable(phi, code))

    def test_singular_xi(self):
        inst = fx.example2((0.5, 0.3, 0.2, 0.0))
        # rank_tol of zero keeps the zero eigenvalue, so xi^{-1/2} does not exist
        report = verify_correctable(inst.channel, inst.code, rank_tol=0.0)
        report = type(report)(**{**report.__dict__, "q": 4, "xi": np.diag(report.eigenvalues).astype(complex)})
        with pytest.raises(SingularAncillaError):
            build_recovery(inst.channel, inst.code, report)

    def test_rank_deficient_block_structure(self, rng):
        inst = fx.example2((0.5, 0.3, 0.2, 0.0))
        plan = plan_for(inst)
        assert plan.q == 3 and plan.block_dim == 6
        data = fx.random_mixed_state(2, rng)
        out = conjugate_output(plan, apply_channel(inst.channel, encode(inst.code, data)))
        expected = np.zeros((8, 8), dtype=complex)
        expected[:6, :6] = np.kron(np.diag([0.5, 0.3, 0.2]), data)
        np.testing.assert_allclose(out, expected, atol=1e-12)
        # dropped error operator annihilates the code
        assert np.linalg.norm(plan.rotated_kraus[3] @ inst.code.w) <= 1e-12


class TestConjugateAndRecover:
    def test_conjugate_bitflip(self, rng):
        p = (0.4, 0.3, 0.2, 0.1)
        inst = fx.example2(p)
        plan = plan_for(inst)
        data = fx.random_pure_state(2, rng)
        out = conjugate_output(plan, apply_channel(inst.channel, encode(inst.code, data)))
        np.testing.assert_allclose(out, np.kron(np.diag(p), data), atol=1e-12)

    def test_zero_in_zero_out(self):
        plan = plan_for(fx.example1())
        np.testing.assert_array_equal(conjugate_output(plan, np.zeros((4, 4))), 0)
        np.testing.assert_array_equal(recover_full(plan, np.zeros((4, 4))), 0)

    def test_dimension_mismatch(self):
        plan = plan_for(fx.example1())
        with pytest.raises(DimensionError):
            recover(plan, np.eye(3))

    def test_bitflip_unitary_is_probability_independent(self, rng):
        plan = plan_for(fx.example2((0.4, 0.3, 0.2, 0.1)))
        other = fx.example2((0.55, 0.25, 0.15, 0.05))
        data = fx.random_mixed_state(2, rng)
        got, leak = recover(plan, apply_channel(other.channel, encode(other.code, data)))
        np.testing.assert_allclose(got, data, atol=1e-12)
        assert leak <= 1e-12

    def test_identity_channel_roundtrip(self, rng):
        inst = fx.identity_instance(2)
        plan = plan_for(inst)
        data = fx.random_mixed_state(2, rng)
        got, leak = recover(plan, data)
        np.testing.assert_allclose(got, data, atol=1e-14)
        assert leak == 0.0

    def test_random_three_qubit(self, rng):
        inst = fx.random_correctable(8, 2, 4, seed=3)
        plan = plan_for(inst)
        data = fx.random_mixed_state(2, rng)
        got, leak = recover(plan, apply_channel(inst.channel, encode(inst.code, data)))
        assert np.linalg.norm(got - data) <= 1e-9 and leak <= 1e-9

    def test_recover_full_returns_encoded_state(self, rng):
        inst = fx.example2((0.7, 0.1, 0.1, 0.1))
        plan = plan_for(inst)
        data = fx.random_pure_state(2, rng)
        rho = encode(inst.code, data)
        np.testing.assert_allclose(recover_full(plan, apply_channel(inst.channel, rho)), rho, atol=1e-12)

    def test_subnormalized_scales_by_gamma(self, rng):
        inst = fx.example2((0.2, 0.15, 0.1, 0.05))
        plan = plan_for(inst)
        assert plan.gamma == pytest.approx(0.5)
        rho = encode(inst.code, fx.random_mixed_state(2, rng))
        out = apply_channel(inst.channel, rho)
        np.testing.assert_allclose(recover_full(plan, out), 0.5 * rho, atol=1e-12)
        got, _ = recover(plan, out)
        np.testing.assert_allclose(encode(inst.code, got), rho, atol=1e-12)

    def test_non_divisible_dimension(self, rng):
        # k does not divide n: only the leading q*k block is traced
        inst = fx.random_correctable(7, 2, 3, seed=11)
        plan = plan_for(inst)
        data = fx.random_mixed_state(2, rng)
        rho = encode(inst.code, data)
        out = apply_channel(inst.channel, rho)
        got, leak = recover(plan, out)
        assert np.linalg.norm(got - data) <= 1e-9 and leak <= 1e-9
        np.testing.assert_allclose(recover_full(plan, out), rho, atol=1e-9)


class TestExtendPlan:
    def test_example3_closed_form(self):
        plan = plan_for(fx.example2((0.4, 0.3, 0.2, 0.1)))
        p_t, t = (0.4, 0.2, 0.2, 0.2), (0.3, 0.7, 1.1)
        ext = extend_plan(plan, fx.example3(p_t, t))
        np.testing.assert_allclose(ext.xi_tilde, fx.example3_xi_tilde(p_t, t), atol=1e-12)
        assert ext.residual <= 1e-12

    def test_example3_coefficients(self):
        p = np.array([0.4, 0.3, 0.2, 0.1])
        plan = plan_for(fx.example2(p))
        p_t, t = np.array([0.4, 0.2, 0.2, 0.2]), np.array([0.3, 0.7, 1.1])
        ext = extend_plan(plan, fx.example3(p_t, t))
        expected = np.zeros((4, 4), dtype=complex)
        expected[0, 0] = np.sqrt(p_t[0] / p[0])
        for a in (1, 2, 3):
            expected[0, a] = np.sqrt(p_t[a] / p[0]) * np.cos(t[a - 1])
            expected[a, a] = 1j * np.sqrt(p_t[a] / p[a]) * np.sin(t[a - 1])
        np.testing.assert_allclose(ext.coeffs, expected, atol=1e-12)

    def test_same_channel(self):
        inst = fx.random_correctable(8, 2, 4, seed=5)
        plan = plan_for(inst)
        ext = extend_plan(plan, inst.channel)
        np.testing.assert_allclose(ext.xi_tilde, plan.xi, atol=1e-12)
        np.testing.assert_allclose(ext.coeffs @ ext.coeffs.conj().T, np.eye(4), atol=1e-12)

    def test_synthesized_from_known_coefficients(self, rng):
        inst = fx.random_correctable(8, 2, 4, seed=9)
        plan = plan_for(inst)
        t = ginibre(rng, 4, 3)
        new = QuantumChannel([sum(t[i, j] * plan.rotated_kraus[i] for i in range(4)) for j in range(3)])
        ext = extend_plan(plan, new)
        s = np.sqrt(plan.xi)
        np.testing.assert_allclose(ext.coeffs, t, atol=1e-9)
        np.testing.assert_allclose(ext.xi_tilde, s @ t @ t.conj().T @ s, atol=1e-9)

    def test_phase_flip_outside_span(self):
        plan = plan_for(fx.example2((0.4, 0.3, 0.2, 0.1)))
        with pytest.raises(SpanError) as info:
            extend_plan(plan, fx.phase_flip_channel())
        assert info.value.residual > 0.1

    def test_dimension_mismatch(self):
        plan = plan_for(fx.example1())
        with pytest.raises(DimensionError):
            extend_plan(plan, QuantumChannel([np.eye(3)]))


SHAPES = st.sampled_from([(8, 2, 4), (6, 2, 2), (9, 3, 3), (7, 2, 3), (12, 3, 4), (10, 2, 5)])


class TestProperties:
    @given(seeds, SHAPES)
    def test_unitary(self, seed, shape):
        plan = plan_for(fx.random_correctable(*shape, seed=seed))
        n = plan.dim
        assert np.linalg.norm(plan.r_unitary.conj().T @ plan.r_unitary - np.eye(n)) <= 1e-10

    @given(seeds, SHAPES)
    def test_rotated_kraus_same_channel(self, seed, shape):
        inst = fx.random_correctable(*shape, seed=seed)
        plan = plan_for(inst)
        n = inst.channel.dim
        rotated = QuantumChannel(plan.rotated_kraus)
        for a in range(n):
            for b in range(n):
                e = np.zeros((n, n))
                e[a, b] = 1
                assert np.linalg.norm(apply_channel(rotated, e) - apply_channel(inst.channel, e)) <= 1e-10

    def test_roundtrip_hundred_states(self):
        inst = fx.random_correctable(8, 2, 4, seed=1)
        plan = plan_for(inst)
        rng = np.random.default_rng(2)
        for trial in range(100):
            data = fx.random_data_state(2, trial, rng)
            out = apply_channel(inst.channel, encode(inst.code, data))
            got, leak = recover(plan, out)
            assert np.linalg.norm(got - data) <= 1e-9
            assert leak <= 1e-9
            block = conjugate_output(plan, out)[: plan.block_dim, : plan.block_dim]
            assert np.linalg.norm(np.kron(plan.xi, data) - block) <= 1e-9

    @given(seeds, SHAPES)
    def test_trace_preserving_recovery(self, seed, shape):
        inst = fx.random_correctable(*shape, seed=seed)
        plan = plan_for(inst)
        rho = encode(inst.code, fx.random_mixed_state(inst.code.code_dim, seed))
        out = recover_full(plan, apply_channel(inst.channel, rho))
        assert abs(np.trace(out) - np.trace(rho)) <= 1e-10

    @given(seeds)
    def test_representation_freedom(self, seed):
        inst = fx.random_correctable(8, 2, 4, seed=seed)
        v = fx.random_unitary(4, seed + 1)
        mixed = QuantumChannel(rotate_kraus(inst.channel, v))
        plan_a = plan_for(inst)
        plan_b = build_recovery(mixed, inst.code, verify_correctable(mixed, inst.code))
        rng = np.random.default_rng(seed)
        for trial in range(4):
            out = apply_channel(inst.channel, encode(inst.code, fx.random_data_state(2, trial, rng)))
            a, _ = recover(plan_a, out)
            b, _ = recover(plan_b, out)
            assert np.linalg.norm(a - b) <= 1e-9

    @given(seeds, st.integers(4, 6))
    def test_extension_consistency(self, seed, s):
        inst = fx.random_correctable(8, 2, 4, seed=seed)
        plan = plan_for(inst)
        # orthonormal rows keep the new channel trace preserving
        t = fx.random_unitary(s, seed + 1)[:4, :]
        new = QuantumChannel([sum(t[i, j] * plan.rotated_kraus[i] for i in range(4)) for j in range(s)])
        assert is_trace_preserving(new)[0]
        ext = extend_plan(plan, new)
        assert abs(np.trace(ext.xi_tilde) - 1) <= 1e-10
        rng = np.random.default_rng(seed)
        for trial in range(3):
            data = fx.random_data_state(2, trial, rng)
            out = conjugate_output(plan, apply_channel(new, encode(inst.code, data)))
            assert np.linalg.norm(out - np.kron(ext.xi_tilde, data)) <= 1e-9
