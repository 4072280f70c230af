import numpy as np
import pytest
from scipy import special

from fosid import (
    Dataset,
    FosModel,
    HistorySegment,
    OrderValue,
    SampledSignal,
    binom_coeff_derivs,
    binom_coeffs,
    concat_history_output,
    gl_full,
    gl_initialized,
    gl_solve,
    gl_uninitialized,
    make_grid,
    psi_init,
    simulate_fos,
)
from fosid.glkernel import fos_residual

from conftest import ex1_model, ex2_inverse_crime, ex2_model


def gamma_weights(alpha: float, n: int) -> np.ndarray:
    """Independent closed-form oracle (-1)^j binom(alpha, j)."""
    j = np.arange(n + 1)
    return (-1.0) ** j * special.binom(alpha, j)


class TestBinomCoeffs:
    def test_hand_unrolled(self):
        assert np.allclose(binom_coeffs(0.7, 2), [1.0, -0.7, -0.105], rtol=0, atol=1e-15)

    def test_first_difference(self):
        assert np.allclose(binom_coeffs(1.0, 3), [1.0, -1.0, 0.0, 0.0], rtol=0, atol=1e-15)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7, 1.5])
    def test_gamma_ratio_oracle(self, alpha):
        c = binom_coeffs(alpha, 20)
        ref = gamma_weights(alpha, 20)
        assert np.max(np.abs(c - ref) / np.abs(ref)) < 1e-10

    @pytest.mark.parametrize("alpha", [0.3, 0.7, 1.0, 1.5])
    def test_recursion_replays_bit_exactly(self, alpha):
        c = binom_coeffs(alpha, 300)
        assert c[0] == 1.0
        for j in range(1, 301):
            assert c[j] == (1.0 - (1.0 + alpha) / j) * c[j - 1]

    def test_table_is_readonly(self):
        c = binom_coeffs(0.7, 5)
        with pytest.raises(ValueError):
            c[0] = 2.0

    def test_rejects_negative_length(self):
        with pytest.raises(ValueError):
            binom_coeffs(0.5, -1)


class TestBinomCoeffDerivs:
    def test_n_zero(self):
        for alpha in (0.123, 0.9, 1.7):
            assert binom_coeff_derivs(alpha, 0)[0] == 0.0

    def test_first_entry(self):
        for alpha in (0.1, 0.5, 1.9):
            assert binom_coeff_derivs(alpha, 1)[1] == pytest.approx(-1.0, abs=1e-15)

    def test_closed_form_second_entry(self):
        # C_2 = alpha (alpha - 1) / 2, so dC_2 = (2 alpha - 1) / 2
        assert binom_coeff_derivs(0.7, 2)[2] == pytest.approx(0.2, abs=1e-14)

    @pytest.mark.parametrize("alpha", [0.3, 0.7, 1.5])
    def test_finite_difference_oracle(self, alpha):
        delta = 1e-6
        dc = binom_coeff_derivs(alpha, 20)
        fd = (binom_coeffs(alpha + delta, 20) - binom_coeffs(alpha - delta, 20)) / (2 * delta)
        # scaled by the largest derivative: entries crossing zero carry no
        # relative meaning of their own
        assert np.max(np.abs(dc - fd)) / np.max(np.abs(fd)) < 1e-6


class TestGlFull:
    def test_order_zero_is_identity(self):
        rng = np.random.default_rng(1)
        z = rng.normal(size=30)
        for k in (0, 7, 29):
            assert gl_full(z, 0.0, 0.05, k) == pytest.approx(z[k], rel=1e-15)

    def test_backward_difference(self):
        assert gl_full(np.array([0.0, 1.0]), 1.0, 0.1, 1) == pytest.approx(10.0, rel=1e-12)

    def test_unit_step_analytic_oracle(self):
        # D^0.5 of the unit step from its birth is t^-0.5 / Gamma(0.5);
        # measured discretization error at k=500 is 2.5e-4
        h, k = 0.01, 500
        value = gl_full(np.ones(k + 1), 0.5, h, k)
        analytic = (k * h) ** -0.5 / special.gamma(0.5)
        assert abs(value - analytic) / analytic < 1e-3

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            gl_full(np.ones(3), 0.5, 0.1, 3)


class TestPsiInit:
    def test_zero_history_window(self):
        grid = make_grid(0.01, 0.0, 0, 10)
        assert psi_init(HistorySegment.empty(), 0.5, grid, 0) == 0.0

    def test_zero_valued_history(self):
        grid = make_grid(0.01, 0.0, 10, 10)
        assert psi_init(HistorySegment(np.zeros(10)), 0.5, grid, 3) == 0.0

    def test_split_identity_single_point(self):
        grid = make_grid(0.01, 0.0, 10, 5)
        hist = HistorySegment(np.ones(10))
        y = SampledSignal(grid.t_in, grid.h, np.zeros(5))
        z = concat_history_output(hist, y, grid)
        full = gl_full(z, 0.5, grid.h, 10)
        uninit = gl_uninitialized(y.values, 0.5, grid.h)[0]
        psi = psi_init(hist, 0.5, grid, 0)
        assert uninit + psi == pytest.approx(full, rel=1e-12)

    def test_index_out_of_range(self):
        grid = make_grid(0.01, 0.0, 4, 3)
        with pytest.raises(IndexError):
            psi_init(HistorySegment(np.ones(4)), 0.5, grid, 3)


class TestSplitIdentity:
    def test_randomized_cases(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n3 = int(rng.integers(0, 30))
            k = int(rng.integers(1, 40))
            h = float(rng.uniform(0.01, 0.5))
            alpha = float(rng.uniform(0.05, 1.95))
            grid = make_grid(h, float(rng.uniform(-3, 3)), n3, k)
            hist = HistorySegment(rng.uniform(-1, 1, n3))
            y = SampledSignal(grid.t_in, h, rng.uniform(-1, 1, k))
            z = concat_history_output(hist, y, grid)
            lhs = gl_initialized(y, hist, alpha, grid).values
            rhs = np.array([gl_full(z, alpha, h, kk + n3) for kk in range(k)])
            assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))


class TestGlInitialized:
    def test_order_zero_identity(self):
        grid = make_grid(0.1, 0.0, 6, 20)
        rng = np.random.default_rng(5)
        hist = HistorySegment(rng.normal(size=6))
        y = SampledSignal(grid.t_in, 0.1, rng.normal(size=20))
        out = gl_initialized(y, hist, 0.0, grid)
        assert np.array_equal(out.values, y.values)

    def test_empty_history_reduces_to_uninitialized(self):
        grid = make_grid(0.05, 0.0, 0, 25)
        rng = np.random.default_rng(6)
        y = SampledSignal(0.0, 0.05, rng.normal(size=25))
        out = gl_initialized(y, HistorySegment.empty(), 0.8, grid)
        assert np.array_equal(out.values, gl_uninitialized(y.values, 0.8, 0.05))

    def test_linearity(self):
        grid = make_grid(0.02, -0.1, 5, 15)
        rng = np.random.default_rng(8)
        h1, h2 = rng.normal(size=5), rng.normal(size=5)
        y1, y2 = rng.normal(size=15), rng.normal(size=15)
        a, b = 1.7, -0.4
        combined = gl_initialized(
            SampledSignal(grid.t_in, grid.h, a * y1 + b * y2),
            HistorySegment(a * h1 + b * h2),
            0.6,
            grid,
        ).values
        parts = a * gl_initialized(
            SampledSignal(grid.t_in, grid.h, y1), HistorySegment(h1), 0.6, grid
        ).values + b * gl_initialized(
            SampledSignal(grid.t_in, grid.h, y2), HistorySegment(h2), 0.6, grid
        ).values
        assert np.max(np.abs(combined - parts)) <= 1e-12 * np.max(np.abs(parts))


class TestOrderValue:
    def test_strict_interior(self):
        OrderValue(0.5, (0, 1))
        with pytest.raises(ValueError):
            OrderValue(1.0, (0, 1))
        with pytest.raises(ValueError):
            OrderValue(0.0, (0, 1))
        with pytest.raises(ValueError):
            OrderValue(0.5, (1, 0))

    def test_from_alpha(self):
        assert OrderValue.from_alpha(1.5).interval == (1, 2)
        assert OrderValue.from_alpha(0.7).interval == (0, 1)


class TestFosModel:
    def test_orders_must_increase(self):
        with pytest.raises(ValueError):
            FosModel.from_values([1.0, 2.0], 1.0, [1.5, 0.5], [(1, 2), (0, 1)])

    def test_coeff_count_must_match(self):
        with pytest.raises(ValueError):
            FosModel.from_values([1.0], 1.0, [0.5, 1.5], [(0, 1), (1, 2)])


class TestSimulateFos:
    def test_zero_gain_zero_history(self):
        grid = make_grid(0.1, 0.0, 0, 30)
        model = FosModel.from_values([1.0], 0.0, [0.7])
        u = SampledSignal(0.0, 0.1, np.sin(np.arange(30)))
        y = simulate_fos(model, u, HistorySegment.empty(), grid)
        assert np.array_equal(y.values, np.zeros(30))

    def test_step_response_steady_state(self):
        # y + D^0.7 y = 0.5 for a unit step: the derivative of the settled
        # response decays like t^-0.7, leaving y -> 0.5.  The asymptotic
        # deviation is ~2.2% at t = 50 and drops below 1% by t = 200.
        h = 0.01
        model = ex1_model()
        k = int(200.0 / h) + 1
        grid = make_grid(h, 0.0, 0, k)
        u = SampledSignal(0.0, h, np.ones(k))
        y = simulate_fos(model, u, HistorySegment.empty(), grid).values
        at_50 = y[int(50.0 / h)]
        assert abs(at_50 - 0.5) / 0.5 < 0.03
        assert abs(y[-1] - 0.5) / 0.5 < 0.01

    def test_plugback_residual_example1(self):
        rng = np.random.default_rng(11)
        h = 0.01
        grid = make_grid(h, -0.4, 40, 200)
        hist = HistorySegment(rng.uniform(0, 1, 40))
        u = SampledSignal(grid.t_in, h, rng.uniform(0, 100, 200))
        model = ex1_model()
        y = simulate_fos(model, u, hist, grid)
        res = fos_residual(model, y, u, hist, grid)
        scale = np.max(np.abs(model.gain * u.values))
        assert np.max(np.abs(res)) <= 1e-10 * scale

    def test_plugback_residual_example2(self):
        dataset, history, model = ex2_inverse_crime(n_history=20, seed=3)
        res = fos_residual(model, dataset.y, dataset.u, history, dataset.grid)
        scale = np.max(np.abs(model.gain * dataset.u.values))
        assert np.max(np.abs(res)) <= 1e-10 * scale

    def test_singular_denominator_rejected(self):
        # a = -h^alpha makes 1 + a h^-alpha vanish
        h = 0.1
        model = FosModel.from_values([-(h**0.5)], 1.0, [0.5])
        grid = make_grid(h, 0.0, 0, 5)
        u = SampledSignal(0.0, h, np.ones(5))
        with pytest.raises(ValueError, match="ill-posed"):
            simulate_fos(model, u, HistorySegment.empty(), grid)


class TestGlSolve:
    def test_order_zero_returns_input(self):
        u = SampledSignal(0.0, 0.1, np.arange(5.0))
        assert np.allclose(gl_solve(u, 0.0, 0.1).values, u.values, rtol=1e-14)

    def test_inverts_gl_full(self):
        rng = np.random.default_rng(9)
        u = SampledSignal(0.0, 0.05, rng.normal(size=40))
        y = gl_solve(u, 0.5, 0.05)
        back = np.array([gl_full(y.values, 0.5, 0.05, k) for k in range(40)])
        assert np.max(np.abs(back - u.values)) <= 1e-10 * np.max(np.abs(u.values))

    def test_aberration_divergence(self):
        # two drives agreeing for t >= 5 but differing before keep their
        # responses apart afterwards
        h = 0.01
        n = int(round(10.0 / h)) + 1
        t = h * np.arange(n)
        ramp = np.where(t >= 5.0, 1.0, np.where(t > 0, t, 0.0))
        quart = np.where(t >= 5.0, 1.0, np.where(t > 0, 0.25 * t**4, 0.0))
        y1 = gl_solve(SampledSignal(0.0, h, ramp), 0.5, h).values
        y2 = gl_solve(SampledSignal(0.0, h, quart), 0.5, h).values
        mask = t > 5.0
        divergence = np.max(np.abs(y1[mask] - y2[mask])) / np.max(np.abs(y1[mask]))
        assert divergence >= 0.01
