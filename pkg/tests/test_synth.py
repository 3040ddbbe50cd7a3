import io

import numpy as np
import pytest

from tapestry.dataio import (DataError, MEAN, load_monthly_csv,
                             standardize_and_anomalize, to_seasonal)
from tapestry.synth import (SynthConfig, ar1_predictive_logdensity, generate,
                            lorenz_trajectory, rk4_step, to_monthly_csv)


def lorenz_oracle(n_steps, dt, initial=(1.0, 1.0, 1.0)):
    """Independent integrator at half the step size (two half-steps per step)."""
    s = np.asarray(initial, dtype=float)
    out = np.empty((n_steps, 3))
    for i in range(n_steps):
        s = rk4_step(s, dt / 2)
        s = rk4_step(s, dt / 2)
        out[i] = s
    return out


class TestLorenz:
    def test_bounded_and_matches_half_step_oracle(self):
        traj = lorenz_trajectory(10_000, 0.01)
        assert np.max(np.abs(traj[:, 0])) < 50
        # oracle comparison from a shared initial state (no transient, so
        # chaos only amplifies the truncation-error difference itself)
        n = 800
        traj = lorenz_trajectory(n, 0.01, transient=0)
        oracle = lorenz_oracle(n, 0.01)
        assert np.max(np.abs(traj - oracle)) < 1e-3

    def test_divergence_detected(self):
        with pytest.raises(DataError, match="diverged"):
            lorenz_trajectory(2000, 0.5)


class TestGenerate:
    def test_deterministic(self):
        cfg = SynthConfig(seed=9)
        a = generate(cfg, 80)
        b = generate(cfg, 80)
        assert np.array_equal(a.series.values, b.series.values)
        assert np.array_equal(a.latent, b.latent)

    def test_noise_layer_leaves_latent(self):
        noisy = generate(SynthConfig(seed=4, noise_sd=0.2), 80)
        clean = generate(SynthConfig(seed=4, noise_sd=0.0), 80)
        assert np.array_equal(noisy.latent, clean.latent)
        assert not np.array_equal(noisy.series.values, clean.series.values)

    def test_noise_scale_relative_to_signal(self):
        out = generate(SynthConfig(seed=2, noise_sd=0.1), 400)
        resid = out.series.values.reshape(-1, 3) - out.latent
        ratio = resid.std(axis=0) / out.latent.std(axis=0)
        assert np.all(np.abs(ratio - 0.1) < 0.02)

    def test_minimum_length(self):
        with pytest.raises(DataError):
            generate(SynthConfig(), 20)

    def test_ar_control_autocorrelation(self):
        cfg = SynthConfig(system="noisy-AR-control", noise_sd=0.0,
                          ar_phi=0.7, seed=11)
        out = generate(cfg, 2000)
        x = out.latent[:, 0]
        phi_hat = np.corrcoef(x[1:], x[:-1])[0, 1]
        assert phi_hat == pytest.approx(0.7, abs=0.05)

    def test_ar1_analytic_density(self):
        # matches a hand-written normal logpdf
        from scipy.stats import norm
        val = ar1_predictive_logdensity(1.0, 0.9, phi=0.7, sigma=0.5)
        assert val == pytest.approx(norm.logpdf(0.9, loc=0.7, scale=0.5))


class TestCsvRoundtrip:
    def test_pipeline_recovers_seasonal_values(self, tmp_path):
        out = generate(SynthConfig(seed=5, noise_sd=0.1), 80)
        text = to_monthly_csv(out.series)
        path = tmp_path / "synth.csv"
        path.write_text(text)
        monthly = load_monthly_csv(path, list(out.series.variables),
                                   [MEAN] * 3)
        seasonal = to_seasonal(monthly)
        assert seasonal.years == out.series.years
        assert np.allclose(seasonal.values, out.series.values, atol=1e-12)

    def test_standardizes_cleanly(self, tmp_path):
        out = generate(SynthConfig(seed=5), 120)
        path = tmp_path / "synth.csv"
        path.write_text(to_monthly_csv(out.series))
        monthly = load_monthly_csv(path, list(out.series.variables), [MEAN] * 3)
        series = standardize_and_anomalize(to_seasonal(monthly),
                                           train_through=out.series.years[-8])
        train = series.values[: series.n_years - 7]
        assert np.allclose(train.mean(axis=0), 0.0, atol=1e-9)
