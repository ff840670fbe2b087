import numpy as np
import pytest

from perfcast.errors import EmptyTrainingSet, SchemaMismatch
from perfcast.records import build_schema
from perfcast.regressors import PolyParams, load_model, poly_fit, poly_predict, save_model
from perfcast.regressors.poly import PolyModel, expansion_terms

from oracles import oracle_ols
from test_gbt import matrix_from


class TestExpansion:
    def test_term_order_documented(self):
        assert expansion_terms(2, 3) == [
            (0,), (1,),
            (0, 0), (0, 1), (1, 1),
            (0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1),
        ]

    def test_counts(self):
        # C(d + k, k) - 1 monomials of total degree 1..k
        assert len(expansion_terms(3, 2)) == 9
        assert len(expansion_terms(4, 3)) == 34


class TestFit:
    def test_constant_targets(self):
        m = matrix_from(np.random.default_rng(0).normal(size=(20, 3)), np.full(20, 6.5))
        model = poly_fit(m, PolyParams(degree=2, alpha=0.1, l1_ratio=0.9))
        assert model.intercept == pytest.approx(6.5, abs=1e-12)
        np.testing.assert_allclose(model.coef, 0.0, atol=1e-12)

    def test_alpha_zero_degree1_matches_ols(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            n = int(rng.integers(20, 60))
            d = int(rng.integers(2, 5))
            X = rng.normal(size=(n, d))
            y = X @ rng.normal(size=d) + rng.normal() + 0.1 * rng.normal(size=n)
            m = matrix_from(X, y)
            model = poly_fit(m, PolyParams(degree=1, alpha=0.0, max_iterations=20000, tolerance=1e-13))
            Z = (X - model.mean) / model.std
            oracle_b, oracle_w = oracle_ols(Z, y)
            np.testing.assert_allclose(model.coef, oracle_w, atol=1e-8)
            assert model.intercept == pytest.approx(oracle_b, abs=1e-8)

    def test_huge_alpha_kills_coefficients(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(30, 3))
        y = rng.normal(size=30)
        model = poly_fit(matrix_from(X, y), PolyParams(degree=2, alpha=1e6))
        assert np.all(np.abs(model.coef) < 1e-6)

    def test_objective_non_increasing(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(40, 4))
        y = X[:, 0] - 2 * X[:, 2] + rng.normal(size=40)
        model = poly_fit(matrix_from(X, y), PolyParams(degree=2, alpha=0.05, l1_ratio=0.5))
        hist = model.objective_history
        assert len(hist) >= 2
        for prev, cur in zip(hist, hist[1:]):
            assert cur <= prev + 1e-12 * max(1.0, hist[0])

    def test_non_convergence_flagged(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(50, 4))
        y = rng.normal(size=50)
        model = poly_fit(matrix_from(X, y), PolyParams(degree=2, alpha=0.0, max_iterations=1, tolerance=1e-16))
        assert not model.converged

    def test_empty(self):
        with pytest.raises(EmptyTrainingSet):
            poly_fit(matrix_from(np.empty((0, 2)), np.empty(0)), PolyParams())

    def test_missing_cells_imputed_with_column_mean(self):
        X = np.array([[1.0, 5.0], [2.0, 7.0], [3.0, 0.0]])
        mask = np.zeros_like(X, dtype=bool)
        mask[2, 1] = True
        m = matrix_from(X, [1.0, 2.0, 3.0], mask)
        model = poly_fit(m, PolyParams(degree=1, alpha=0.0))
        assert model.impute[1] == pytest.approx(6.0)  # mean of the observed 5 and 7

    def test_degree_validation(self):
        with pytest.raises(ValueError):
            PolyParams(degree=0)
        with pytest.raises(ValueError):
            PolyParams(degree=4)


class TestPredict:
    def test_zero_coefficients_give_intercept(self):
        m = matrix_from([[1.0], [2.0]], [3.0, 3.0])
        model = poly_fit(m, PolyParams(degree=2, alpha=0.1))
        np.testing.assert_allclose(poly_predict(model, m), [3.0, 3.0], atol=1e-12)

    def test_pure_square_term(self):
        schema = build_schema(("proxy",), ["f0"])
        model = PolyModel(
            params=PolyParams(degree=2),
            terms=expansion_terms(1, 2),
            intercept=0.0,
            coef=np.array([0.0, 1.0]),  # x then x^2; coefficient only on x^2
            impute=np.zeros(1),
            mean=np.zeros(1),
            std=np.ones(1),
            fingerprint=schema.fingerprint(),
            converged=True,
            n_sweeps=0,
        )
        m = matrix_from([[3.0]], [0.0])
        np.testing.assert_allclose(poly_predict(model, m), [9.0])

    def test_matches_manual_expansion(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(25, 3))
        y = rng.normal(size=25)
        m = matrix_from(X, y)
        model = poly_fit(m, PolyParams(degree=3, alpha=0.01))
        Z = (X - model.mean) / model.std
        expected = np.full(25, model.intercept)
        for coef, term in zip(model.coef, model.terms):
            col = np.ones(25)
            for j in term:
                col = col * Z[:, j]
            expected += coef * col
        np.testing.assert_allclose(poly_predict(model, m), expected, atol=1e-12)

    def test_schema_mismatch(self):
        m = matrix_from([[1.0], [2.0]], [1.0, 2.0])
        model = poly_fit(m, PolyParams(degree=1))
        other = matrix_from([[1.0, 1.0], [2.0, 2.0]], [1.0, 2.0])
        with pytest.raises(SchemaMismatch):
            poly_predict(model, other)


class TestSerialization:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(30, 3))
        y = rng.normal(size=30)
        mask = rng.uniform(size=X.shape) < 0.1
        m = matrix_from(X, y, mask)
        model = poly_fit(m, PolyParams(degree=2, alpha=0.02))
        path = str(tmp_path / "model.json")
        save_model(model, path)
        loaded = load_model(path)
        np.testing.assert_array_equal(poly_predict(loaded, m), poly_predict(model, m))
