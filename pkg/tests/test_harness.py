import numpy as np
import pytest

from fosid import (
    Dataset,
    HistorySegment,
    HistorySpec,
    SampledSignal,
    aberration_demo,
    apply_history,
    build_duplicate_history,
    example_names,
    generate,
    get_example,
    make_grid,
    neuro_param_map,
    relative_error_param,
    relative_error_signal,
)
from fosid.io import (
    read_dataset_csv,
    read_history_csv,
    read_kv,
    write_dataset_csv,
    write_history_csv,
    write_kv,
)


class TestBuildDuplicateHistory:
    def test_zero_cycles(self):
        y = SampledSignal(0.0, 0.1, [1.0, 2.0, 3.0])
        assert len(build_duplicate_history(y, 2, 0)) == 0

    def test_tiles_first_cycle(self):
        y = SampledSignal(0.0, 0.1, [1.0, 2.0, 3.0, 4.0])
        hist = build_duplicate_history(y, 2, 2)
        assert np.array_equal(hist.values, [1.0, 2.0, 1.0, 2.0])

    def test_periodic_output_gives_exact_backward_continuation(self):
        length, n_cycles = 12, 3
        t = 0.1 * np.arange(48)
        y_vals = np.sin(2 * np.pi * t / 1.2) + 0.5
        y = SampledSignal(0.0, 0.1, y_vals)
        hist = build_duplicate_history(y, length, n_cycles)
        # continuing the periodic signal backwards reproduces the history
        t_back = 0.1 * np.arange(-n_cycles * length, 0)
        expected = np.sin(2 * np.pi * t_back / 1.2) + 0.5
        assert np.allclose(hist.values, expected, rtol=0, atol=1e-12)

    def test_cycle_longer_than_record_rejected(self):
        y = SampledSignal(0.0, 0.1, [1.0, 2.0])
        with pytest.raises(ValueError):
            build_duplicate_history(y, 3, 1)


class TestHistorySpec:
    def test_modes_validated(self):
        HistorySpec(mode="zero")
        HistorySpec(mode="duplicate", n_cycles=3, cycle_length=10)
        HistorySpec(mode="file", path="hist.csv")
        with pytest.raises(ValueError):
            HistorySpec(mode="mirror")
        with pytest.raises(ValueError):
            HistorySpec(mode="duplicate", n_cycles=-1)
        with pytest.raises(ValueError):
            HistorySpec(mode="file")


class TestApplyHistory:
    def test_grid_rebuilt_around_segment(self):
        grid = make_grid(0.1, 0.0, 0, 10)
        sig = SampledSignal(0.0, 0.1, np.ones(10))
        ds = Dataset(grid=grid, u=sig, y=sig)
        out = apply_history(ds, HistorySegment(np.zeros(25)))
        assert out.grid.n_history == 25
        assert out.grid.t_abs == pytest.approx(-2.5, abs=1e-12)
        assert out.grid.t_in == pytest.approx(0.0, abs=1e-12)


class TestMetrics:
    def test_param_error(self):
        assert relative_error_param(1.0, 1.1) == pytest.approx(10.0, rel=1e-12)
        assert relative_error_param(0.5, 0.5) == 0.0
        with pytest.raises(ValueError):
            relative_error_param(0.0, 1.0)

    def test_signal_error(self):
        y = np.array([1.0, 2.0, -1.0])
        assert relative_error_signal(y, y) == 0.0
        assert relative_error_signal(y, 2 * y) == pytest.approx(100.0, rel=1e-12)
        with pytest.raises(ValueError):
            relative_error_signal(np.zeros(3), y)
        with pytest.raises(ValueError):
            relative_error_signal(y, np.ones(4))

    def test_signal_error_accepts_sampled_signals(self):
        y = SampledSignal(0.0, 0.1, [1.0, 2.0])
        assert relative_error_signal(y, y) == 0.0


class TestCsvRoundTrips:
    def test_dataset_bit_exact(self, tmp_path):
        rng = np.random.default_rng(21)
        grid = make_grid(0.01, -0.05, 5, 40)
        u = SampledSignal(grid.t_in, 0.01, rng.normal(size=40) * 1e3)
        y = SampledSignal(grid.t_in, 0.01, rng.normal(size=40) * 1e-4)
        ds = Dataset(grid=grid, u=u, y=y)
        path = tmp_path / "ds.csv"
        write_dataset_csv(path, ds)
        back = read_dataset_csv(path)
        assert np.array_equal(back.u.values, u.values)
        assert np.array_equal(back.y.values, y.values)
        assert back.grid.n_estimation == 40

    def test_history_roundtrip(self, tmp_path):
        rng = np.random.default_rng(22)
        seg = HistorySegment(rng.normal(size=17))
        path = tmp_path / "hist.csv"
        write_history_csv(path, seg, t_in=0.0, h=0.1)
        back = read_history_csv(path)
        assert np.array_equal(back.values, seg.values)

    def test_kv_roundtrip(self, tmp_path):
        record = {
            "a": [1.0, 2.5],
            "b": 0.5,
            "seed": 42,
            "converged": True,
            "generator": "ex1-pulse",
        }
        path = tmp_path / "rec.txt"
        write_kv(path, record, header="round trip")
        back = read_kv(path)
        assert back["a"] == [1.0, 2.5]
        assert back["b"] == 0.5
        assert back["seed"] == 42
        assert back["converged"] is True
        assert back["generator"] == "ex1-pulse"

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n1,2\n")
        with pytest.raises(ValueError):
            read_dataset_csv(path)


class TestGenerators:
    def test_registry_names(self):
        names = example_names()
        for expected in (
            "ex1-random",
            "ex1-pulse",
            "ex2-sinc",
            "ex2-square",
            "windkessel",
            "neuro",
            "aberration",
        ):
            assert expected in names
        with pytest.raises(ValueError):
            get_example("nope")

    def test_sinc_input_at_zero(self):
        gex = generate("ex2-sinc", seed=1)
        assert gex.dataset.u.values[0] == pytest.approx(10.0, rel=1e-14)

    def test_neuro_gaussian_peak(self):
        gex = generate("neuro", seed=1)
        t = gex.dataset.grid.estimation_times()
        k5 = int(np.argmin(np.abs(t - 5.0)))
        assert gex.dataset.u.values[k5] == pytest.approx(1.0, rel=1e-12)

    def test_pulse_duty_cycle(self):
        gex = generate("ex1-pulse", seed=1, n_samples=84)
        t = gex.dataset.grid.estimation_times()
        u = gex.dataset.u.values
        on = t < 0.27 * 0.84
        assert np.all(u[on] == 350.0)
        assert np.all(u[(t >= 0.27 * 0.84) & (t < 0.84)] == 0.0)

    def test_random_input_is_seeded(self):
        a = generate("ex1-random", seed=7, n_samples=84)
        b = generate("ex1-random", seed=7, n_samples=84)
        c = generate("ex1-random", seed=8, n_samples=84)
        assert np.array_equal(a.dataset.u.values, b.dataset.u.values)
        assert not np.array_equal(a.dataset.u.values, c.dataset.u.values)
        assert np.all((a.dataset.u.values >= 0) & (a.dataset.u.values <= 100))

    def test_prefix_becomes_true_history(self):
        gex = generate("windkessel", seed=1, n_samples=84, prefix_samples=168)
        assert len(gex.true_history) == 168
        assert gex.dataset.grid.n_history == 168
        assert gex.dataset.grid.t_in == pytest.approx(0.0, abs=1e-12)

    def test_truth_record_contents(self):
        gex = generate("neuro", seed=3)
        rec = gex.truth_record()
        assert rec["generator"] == "neuro"
        assert rec["k"] == pytest.approx(0.65)
        assert rec["gamma"] == pytest.approx(0.41)
        assert rec["alpha"] == pytest.approx([0.6, 1.7])


class TestNeuroParamMap:
    def test_paper_values(self):
        p_hat = [0.65 / 0.41, 1 / 0.41, 1 / 0.41]
        k, gamma, a_high, a_low = neuro_param_map(p_hat, [0.6, 1.7])
        assert k == pytest.approx(0.65, rel=1e-12)
        assert gamma == pytest.approx(0.41, rel=1e-12)
        assert (a_high, a_low) == (1.7, 0.6)

    def test_trivial_gain(self):
        k, gamma, *_ = neuro_param_map([0.0, 0.3, 1.0], [0.5, 1.5])
        assert (k, gamma) == (0.0, 1.0)

    def test_roundtrip(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            k, gamma = rng.uniform(0.1, 3.0, 2)
            p = [k / gamma, 1 / gamma, 1 / gamma]
            k2, gamma2, *_ = neuro_param_map(p, [0.6, 1.7])
            assert abs(k2 - k) <= 1e-12 * k
            assert abs(gamma2 - gamma) <= 1e-12 * gamma

    def test_zero_gain_rejected(self):
        with pytest.raises(ValueError):
            neuro_param_map([1.0, 1.0, 0.0], [0.6, 1.7])


class TestAberrationDemo:
    def test_zero_precharge_stays_zero_before_five(self):
        demo = aberration_demo(8.0, 0.02)
        before = demo.t < 5.0
        assert np.all(demo.outputs[0][before] == 0.0)

    def test_all_outputs_zero_at_birth(self):
        # every drive is zero up to and including t = 0, so each response
        # starts from rest
        demo = aberration_demo(6.0, 0.05)
        for y in demo.outputs:
            assert y[0] == 0.0

    def test_divergence_threshold(self):
        demo = aberration_demo(10.0, 0.01)
        assert demo.divergence() >= 0.01

    def test_horizon_validation(self):
        with pytest.raises(ValueError):
            aberration_demo(4.0, 0.01)
