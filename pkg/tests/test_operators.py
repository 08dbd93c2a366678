"""Entry oracles, the interval model, and the mixed-basis coefficients."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from carpenter.errors import ValidationError
from carpenter.moves import FrameVector
from carpenter.operators import (
    CompressedBasisOracle,
    DenseSymmetricOracle,
    DiagonalOracle,
    IntervalLaplacianModel,
    compressed_entry,
    dirichlet_target,
    neumann_model,
    sample_function,
    sine_in_cosine_coeffs,
)
from carpenter.sequences import TailRegime, values_of


class TestCompressedEntry:
    def test_dense_two_by_two_entries(self):
        oracle = DenseSymmetricOracle([[0.0, 1.0], [1.0, 2.0]])
        e1, e2 = FrameVector.basis(1), FrameVector.basis(2)
        assert compressed_entry(oracle, e1, e1) == 0.0
        assert compressed_entry(oracle, e2, e2) == 2.0
        assert compressed_entry(oracle, e1, e2) == 1.0
        u = FrameVector.combine(1 / math.sqrt(2), e1, 1 / math.sqrt(2), e2)
        assert abs(compressed_entry(oracle, u, u) - 2.0) <= 1e-15

    def test_bilinear_in_both_arguments(self):
        rng = np.random.default_rng(3)
        oracle = DenseSymmetricOracle(
            (lambda a: (a + a.T) / 2)(rng.uniform(-1, 1, size=(4, 4)))
        )
        basis = [FrameVector.basis(i) for i in range(1, 5)]
        u = FrameVector.combine(0.3, basis[0], -1.2, basis[2])
        v = FrameVector.combine(0.5, basis[1], 0.8, basis[3])
        w = FrameVector.combine(2.0, u, -0.7, v)
        lhs = compressed_entry(oracle, w, basis[0])
        rhs = 2.0 * compressed_entry(oracle, u, basis[0]) - 0.7 * compressed_entry(
            oracle, v, basis[0]
        )
        assert abs(lhs - rhs) <= 1e-14

    def test_diagonal_fast_path_matches_dense(self):
        values = [2.0, -1.0, 0.5]
        diag = DiagonalOracle(values)
        dense = DenseSymmetricOracle(np.diag(values))
        u = FrameVector.combine(0.6, FrameVector.basis(1), 0.8, FrameVector.basis(3))
        v = FrameVector.combine(1.0, FrameVector.basis(3), 0.0, FrameVector.basis(2))
        assert abs(
            compressed_entry(diag, u, v) - compressed_entry(dense, u, v)
        ) <= 1e-15

    def test_disjoint_supports_give_zero(self):
        diag = DiagonalOracle([1.0, 2.0])
        assert compressed_entry(diag, FrameVector.basis(1), FrameVector.basis(2)) == 0.0

    def test_support_outside_window_rejected(self):
        diag = DiagonalOracle([1.0, 2.0])
        with pytest.raises(ValidationError):
            compressed_entry(diag, FrameVector.basis(3), FrameVector.basis(1))


class TestOracles:
    def test_diagonal_oracle_entries(self):
        diag = DiagonalOracle([5.0, 7.0])
        assert diag.entry(1, 1) == 5.0
        assert diag.entry(2, 2) == 7.0
        assert diag.entry(1, 2) == 0.0
        with pytest.raises(ValidationError):
            diag.entry(0, 1)
        with pytest.raises(ValidationError):
            diag.entry(1, 3)

    def test_diagonal_oracle_needs_values(self):
        with pytest.raises(ValidationError):
            DiagonalOracle([])

    def test_dense_oracle_validates_shape_and_symmetry(self):
        with pytest.raises(ValidationError):
            DenseSymmetricOracle(np.zeros((2, 3)))
        with pytest.raises(ValidationError):
            DenseSymmetricOracle([[0.0, 1.0], [0.0, 0.0]])

    def test_compressed_basis_oracle_caches_entries(self):
        calls = {"n": 0}

        class Counting(DenseSymmetricOracle):
            def entry(self, i, j):
                calls["n"] += 1
                return super().entry(i, j)

        base = Counting([[1.0, 0.5], [0.5, 2.0]])
        derived = CompressedBasisOracle(
            base, {1: FrameVector.basis(1), 2: FrameVector.basis(2)}
        )
        first = derived.entry(1, 2)
        before = calls["n"]
        again = derived.entry(2, 1)
        assert again == first == 0.5
        assert calls["n"] == before

    def test_compressed_basis_oracle_validations(self):
        base = DiagonalOracle([1.0, 2.0])
        with pytest.raises(ValidationError):
            CompressedBasisOracle(base, {})
        with pytest.raises(ValidationError):
            CompressedBasisOracle(base, {0: FrameVector.basis(1)})
        sparse = CompressedBasisOracle(base, {2: FrameVector.basis(1)})
        with pytest.raises(ValidationError):
            sparse.entry(1, 2)


class TestIntervalModel:
    def test_neumann_eigenvalues_start_at_zero(self):
        model = IntervalLaplacianModel("neumann", 5)
        assert model.eigenvalues() == (0.0, 1.0, 4.0, 9.0, 16.0)

    def test_dirichlet_eigenvalues_are_squares(self):
        model = IntervalLaplacianModel("dirichlet", 4)
        assert model.eigenvalues() == (1.0, 4.0, 9.0, 16.0)

    def test_unknown_flavor_rejected(self):
        with pytest.raises(ValidationError):
            IntervalLaplacianModel("robin", 3)

    def test_window_and_mode_bounds(self):
        with pytest.raises(ValidationError):
            IntervalLaplacianModel("neumann", 0)
        model = IntervalLaplacianModel("neumann", 3)
        with pytest.raises(ValidationError):
            model.eigenvalue(4)

    def test_basis_normalization_on_fine_grid(self):
        xs = np.linspace(0.0, math.pi, 4097)
        for flavor in ("neumann", "dirichlet"):
            model = IntervalLaplacianModel(flavor, 6)
            for j in range(1, 7):
                ys = model.basis_values(j, xs) ** 2
                mass = float(np.trapezoid(ys, xs))
                assert abs(mass - 1.0) <= 1e-6

    def test_model_helpers_wrap_specs(self):
        oracle, spec = neumann_model(4)
        assert list(values_of(spec)) == [0.0, 1.0, 4.0, 9.0]
        assert list(oracle.values) == [0.0, 1.0, 4.0, 9.0]
        assert spec.regime is TailRegime.EXPLICIT
        target = dirichlet_target(4)
        assert list(values_of(target)) == [1.0, 4.0, 9.0, 16.0]
        assert target.regime is TailRegime.POINTWISE


class TestSampleFunction:
    def test_constant_ground_mode(self):
        xs, ys = sample_function(FrameVector.basis(1), "neumann", 8)
        assert xs[0] == 0.0 and abs(xs[-1] - math.pi) <= 1e-15
        assert np.allclose(ys, 1.0 / math.sqrt(math.pi))

    def test_second_neumann_mode_endpoints(self):
        _, ys = sample_function(FrameVector.basis(2), "neumann", 3)
        amp = math.sqrt(2.0 / math.pi)
        assert abs(ys[0] - amp) <= 1e-15
        assert abs(ys[-1] + amp) <= 1e-15

    def test_combined_vector_keeps_parseval_mass(self):
        rng = np.random.default_rng(9)
        coeffs = rng.uniform(-1, 1, size=8)
        coeffs /= math.sqrt(float(np.sum(coeffs**2)))
        vec = FrameVector({j + 1: float(c) for j, c in enumerate(coeffs)})
        xs, ys = sample_function(vec, "dirichlet", 4097)
        mass = float(np.trapezoid(ys**2, xs))
        assert abs(mass - 1.0) <= 1e-6

    def test_grid_needs_two_points(self):
        with pytest.raises(ValidationError):
            sample_function(FrameVector.basis(1), "neumann", 1)

    def test_empty_vector_rejected(self):
        with pytest.raises(ValidationError):
            sample_function(FrameVector(coeffs={}), "neumann", 4)


class TestSineInCosineCoeffs:
    def test_reference_values(self):
        assert sine_in_cosine_coeffs(1, 0) == 2.0
        assert sine_in_cosine_coeffs(2, 1) == 4.0 / 3.0
        assert sine_in_cosine_coeffs(1, 1) == 0.0
        assert sine_in_cosine_coeffs(3, 1) == 0.0
        assert sine_in_cosine_coeffs(2, 0) == 0.0

    def test_validation(self):
        with pytest.raises(ValidationError):
            sine_in_cosine_coeffs(0, 1)
        with pytest.raises(ValidationError):
            sine_in_cosine_coeffs(1, -1)
        with pytest.raises(ValidationError):
            sine_in_cosine_coeffs(1.5, 0)

    def test_quadrature_oracle_agreement(self):
        # independent check: numerical integral of sin(j x) cos(k x)
        for j in range(1, 33):
            for k in range(0, 33):
                want, err = quad(
                    lambda x: math.sin(j * x) * math.cos(k * x),
                    0.0,
                    math.pi,
                    limit=200,
                )
                # the reported bound is conservative for oscillatory modes
                assert err <= 1e-7
                assert abs(sine_in_cosine_coeffs(j, k) - want) <= 1e-10
