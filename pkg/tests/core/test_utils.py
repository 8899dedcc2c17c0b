import numpy as np
import pytest

from implicit_pf.utils import as_vector, central_difference_jacobian, relative_error, sup_norm


def test_as_vector_from_scalar():
    result = as_vector(2.5)

    assert result.shape == (1,)
    assert result.dtype == np.float64


def test_as_vector_flattens_and_checks_length():
    """Матрица вытягивается в вектор, длина сверяется с ожидаемой."""
    assert as_vector([[1, 2], [3, 4]], 4).tolist() == [1.0, 2.0, 3.0, 4.0]

    with pytest.raises(ValueError, match="x0"):
        as_vector([1.0, 2.0], 3, "x0")


def test_sup_norm():
    assert sup_norm(np.array([1.0, -3.0, 2.0])) == 3.0
    assert sup_norm(np.array([])) == 0.0


def test_central_difference_jacobian_of_quadratic():
    """Для квадратичной функции центральные разности точны до округления."""

    def fn(x):
        return np.array([x[0] ** 2 + x[1], 3.0 * x[0] * x[1]])

    x = np.array([1.5, -2.0])
    expected = np.array([[3.0, 1.0], [-6.0, 4.5]])

    np.testing.assert_allclose(central_difference_jacobian(fn, x), expected, rtol=1e-8)


def test_relative_error():
    assert relative_error(np.array([1.1, 2.0]), np.array([1.0, 2.0])) == pytest.approx(0.05)
    assert relative_error(np.zeros(2), np.zeros(2)) == 0.0
