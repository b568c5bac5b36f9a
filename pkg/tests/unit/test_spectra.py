"""
Юнит-тесты корреляционной матрицы, метода Якоби и удаления рыночной моды.
"""

import numpy as np
import pytest

from analysis.exceptions import ConvergenceError, DegenerateModeError, InputError, NormalizationIntegrityError
from analysis.returns import ReturnPanel
from analysis.spectra import CorrelationMatrix, correlation_matrix, eigendecompose, remove_market_mode, spectrum
from analysis.synth import gen_one_factor, gen_wishart_noise


def uniform_correlation(n, rho):
    return (1.0 - rho) * np.eye(n) + rho * np.ones((n, n))


def random_symmetric(rng, n):
    factors = rng.standard_normal((n, 2 * n))
    matrix = factors @ factors.T / (2 * n)
    return (matrix + matrix.T) / 2


def panel_from_rows(rows):
    rows = np.asarray(rows, dtype=float)
    timestamps = np.arange(rows.shape[1]) * 60
    return ReturnPanel(tuple(f'S{index}' for index in range(rows.shape[0])), 1, rows, timestamps)


@pytest.mark.unit
class TestCorrelationMatrix:
    """Тесты построения C = M M^T / (T - 1)."""

    def test_identical_rows(self):
        """Тест: одинаковые строки дают корреляцию 1."""
        row = gen_wishart_noise(2, 50, seed=1).matrix[0]

        matrix = correlation_matrix(panel_from_rows([row, row]))

        np.testing.assert_allclose(matrix.values, [[1.0, 1.0], [1.0, 1.0]], atol=1e-12)

    def test_opposite_rows(self):
        """Тест: противоположные строки дают корреляцию -1."""
        row = gen_wishart_noise(2, 50, seed=1).matrix[0]

        matrix = correlation_matrix(panel_from_rows([row, -row]))

        assert matrix.values[0, 1] == pytest.approx(-1.0, abs=1e-12)

    def test_independent_rows_nearly_uncorrelated(self):
        """Тест: независимые строки длины 10^5 почти не коррелируют."""
        matrix = correlation_matrix(gen_wishart_noise(2, 100_000, seed=2))

        assert abs(matrix.values[0, 1]) < 0.02

    def test_symmetric_with_unit_diagonal(self):
        """Тест симметрии и единичной диагонали."""
        matrix = correlation_matrix(gen_one_factor(6, 200, 0.4, seed=3))

        np.testing.assert_array_equal(matrix.values, matrix.values.T)
        np.testing.assert_allclose(np.diag(matrix.values), 1.0, atol=1e-12)
        assert np.all(np.abs(matrix.values) <= 1.0 + 1e-12)

    def test_unnormalized_rows_detected(self):
        """Тест: строки с дисперсией 4 нарушают нормировку."""
        panel = gen_wishart_noise(3, 100, seed=4)

        with pytest.raises(NormalizationIntegrityError):
            correlation_matrix(panel.with_matrix(2.0 * panel.matrix))

    def test_non_symmetric_matrix_rejected(self):
        """Тест: несимметричная матрица."""
        with pytest.raises(InputError):
            CorrelationMatrix(np.array([[1.0, 0.5], [0.4, 1.0]]))


@pytest.mark.unit
class TestEigendecompose:
    """Тесты циклического метода Якоби."""

    def test_identity(self):
        """Тест: единичная матрица не требует вращений."""
        result = eigendecompose(np.eye(5))

        np.testing.assert_array_equal(result.eigenvalues, np.ones(5))
        assert result.sweeps == 0

    def test_two_by_two(self):
        """Тест: [[1, 0.6], [0.6, 1]] -> 1.6 и 0.4, v1 = (1, 1)/sqrt(2)."""
        result = eigendecompose(uniform_correlation(2, 0.6))

        np.testing.assert_allclose(result.eigenvalues, [1.6, 0.4], atol=1e-12)
        np.testing.assert_allclose(result.vector(1), [2 ** -0.5, 2 ** -0.5], atol=1e-12)

    def test_uniform_correlation(self):
        """Тест: N = 20, rho = 0.3 -> lambda_1 = 6.7, остальные 0.7."""
        result = eigendecompose(uniform_correlation(20, 0.3))

        assert result.lambda1 == pytest.approx(6.7, abs=1e-10)
        np.testing.assert_allclose(result.eigenvalues[1:], 0.7, atol=1e-10)
        np.testing.assert_allclose(result.vector(1), 20 ** -0.5, atol=1e-10)
        assert result.participation_ratio(1) == pytest.approx(1 / 20, abs=1e-10)

    @pytest.mark.parametrize('n', [2, 3, 7, 15, 30])
    def test_eigen_equation_and_orthonormality(self, n):
        """Тест невязки C v = lambda v, ортонормальности и следа."""
        matrix = random_symmetric(np.random.default_rng(n), n)

        result = eigendecompose(matrix)
        vectors = result.eigenvectors

        residual = np.max(np.abs(matrix @ vectors - vectors * result.eigenvalues))
        assert residual <= 1e-10 * n
        assert np.max(np.abs(vectors.T @ vectors - np.eye(n))) <= 1e-10
        assert result.eigenvalues.sum() == pytest.approx(np.trace(matrix), abs=1e-9)
        np.testing.assert_allclose(vectors @ np.diag(result.eigenvalues) @ vectors.T, matrix, atol=1e-8)

    def test_descending_order_and_sign_convention(self):
        """Тест: собственные значения по убыванию, сумма компонент векторов неотрицательна."""
        result = eigendecompose(random_symmetric(np.random.default_rng(8), 12))

        assert np.all(np.diff(result.eigenvalues) <= 0)
        assert np.all(result.eigenvectors.sum(axis=0) >= 0)

    @pytest.mark.parametrize('n', [2, 3])
    def test_matches_characteristic_polynomial(self, n):
        """Тест: собственные значения - корни характеристического многочлена."""
        rng = np.random.default_rng(40 + n)
        basis, _ = np.linalg.qr(rng.standard_normal((n, n)))
        matrix = basis @ np.diag([3.0, 1.5, 0.2][:n]) @ basis.T
        matrix = (matrix + matrix.T) / 2

        if n == 2:
            coefficients = [1.0, -np.trace(matrix), np.linalg.det(matrix)]
        else:
            minors = sum(np.linalg.det(matrix[np.ix_(pair, pair)]) for pair in ([0, 1], [0, 2], [1, 2]))
            coefficients = [1.0, -np.trace(matrix), minors, -np.linalg.det(matrix)]
        roots = np.sort(np.roots(coefficients).real)[::-1]

        np.testing.assert_allclose(eigendecompose(matrix).eigenvalues, roots, atol=1e-10)

    def test_permutation_of_rows(self):
        """Тест: перестановка бумаг переставляет компоненты векторов и не меняет спектр."""
        panel = gen_one_factor(8, 400, 0.3, seed=9)
        order = np.array([3, 0, 7, 1, 6, 2, 5, 4])
        permuted = ReturnPanel(tuple(np.array(panel.stock_ids)[order]), 1, panel.matrix[order], panel.timestamps)

        original = spectrum(panel)
        shuffled = spectrum(permuted)

        np.testing.assert_allclose(shuffled.eigenvalues, original.eigenvalues, atol=1e-12)
        np.testing.assert_allclose(shuffled.eigenvectors, original.eigenvectors[order], atol=1e-8)

    def test_convergence_failure(self):
        """Тест: без проходов метод не сходится."""
        with pytest.raises(ConvergenceError) as exc_info:
            eigendecompose(uniform_correlation(4, 0.5), max_sweeps=0)

        assert exc_info.value.sweeps == 0
        assert exc_info.value.off_norm > exc_info.value.target

    def test_metadata_from_panel(self):
        """Тест: спектр помнит группу, лаг и длину ряда."""
        panel = gen_one_factor(4, 100, 0.2, seed=1)

        result = spectrum(panel)

        assert (result.group_id, result.tau, result.T) == ('one-factor', 1, 100)
        assert result.stock_ids == panel.stock_ids
        assert result.trace == pytest.approx(4.0, abs=1e-12)


@pytest.mark.unit
class TestRemoveMarketMode:
    """Тесты удаления рыночной моды регрессией на z(t)."""

    def test_one_factor_mode_removed(self):
        """Тест: после удаления моды у однофакторной модели lambda_1 < 1.5."""
        panel = gen_one_factor(10, 20_000, 0.5, seed=12)
        before = spectrum(panel)

        after = spectrum(remove_market_mode(panel, before))

        assert before.lambda1 > 5.0
        assert after.lambda1 < 1.5

    def test_residual_rows_normalized_and_orthogonal_to_mode(self):
        """Тест: остатки нормированы и не содержат рыночного сигнала."""
        panel = gen_one_factor(6, 500, 0.4, seed=13)
        before = spectrum(panel)

        cleaned = remove_market_mode(panel, before)
        market = before.vector(1) @ panel.matrix

        np.testing.assert_allclose(cleaned.matrix.mean(axis=1), 0.0, atol=1e-12)
        np.testing.assert_allclose(cleaned.matrix.var(axis=1, ddof=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(cleaned.matrix @ market, 0.0, atol=1e-8)
        assert cleaned.stock_ids == panel.stock_ids

    def test_single_stock_fully_explained(self):
        """Тест: две одинаковые строки полностью описываются рыночной модой."""
        row = gen_wishart_noise(2, 50, seed=1).matrix[0]
        panel = panel_from_rows([row, row])

        with pytest.raises(DegenerateModeError):
            remove_market_mode(panel, spectrum(panel))

    def test_order_mismatch(self):
        """Тест: спектр от другой панели."""
        with pytest.raises(InputError):
            remove_market_mode(gen_wishart_noise(3, 50, seed=1), spectrum(gen_wishart_noise(4, 50, seed=1)))
