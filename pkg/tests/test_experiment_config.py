"""Tests for experiment file loading, defaults and overrides."""

import pytest

from config.experiment import ExperimentConfig, Mode, load_experiment
from core.calculators.rate_calculator import Decoder
from core.rxchain.metrics import MetricKind
from utils.constants import DEFAULT_EBN0_GRID_DB, DEFAULT_SEED, DEFAULT_SNR_GRID_DB
from utils.exceptions import ConfigurationError


def write_toml(tmp_path, text, name="exp.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestDefaults:
    def test_ber_defaults(self):
        cfg = load_experiment(None, mode="ber")
        assert cfg.mode is Mode.BER
        assert cfg.snr_grid == list(DEFAULT_EBN0_GRID_DB)
        assert cfg.num_subcarriers == 50
        assert cfg.iterations == 4
        assert cfg.pilot_lengths == [2, 4, 8]
        assert cfg.metrics == list(MetricKind)
        assert cfg.code_spec.generators_octal == (0o5, 0o7)
        assert cfg.budget.min_frames == 10_000
        assert cfg.budget.min_bit_errors == 100
        assert cfg.seed == DEFAULT_SEED

    def test_outage_defaults(self):
        cfg = load_experiment(None, mode="outage")
        assert cfg.snr_grid == list(DEFAULT_SNR_GRID_DB)
        assert cfg.num_subcarriers == 16
        assert cfg.rates.outage_probability == 0.01
        assert cfg.rates.estimate_draws == 300
        assert cfg.rates.posterior_draws == 500
        assert cfg.decoders == list(Decoder)

    def test_seed_fallback_only_fills_missing(self, tmp_path):
        assert load_experiment(None, mode="outage", seed=7).seed == 7
        path = write_toml(tmp_path, "seed = 3\n")
        assert load_experiment(path, mode="outage", seed=7).seed == 3


class TestLoadExperiment:
    def test_tables_per_module(self, tmp_path):
        path = write_toml(tmp_path, """
mode = "outage"
snr_grid = [5.0, 10.0]
pilot_lengths = [4]

[channel]
tx_antennas = 4
rx_antennas = 4

[frame]
num_subcarriers = 8

[rates]
outage_probability = 0.05
estimate_draws = 100
""")
        cfg = load_experiment(path, mode="outage")
        assert cfg.snr_grid == [5.0, 10.0]
        assert cfg.channel.tx_antennas == 4
        assert cfg.num_subcarriers == 8
        assert cfg.rates.outage_probability == 0.05
        assert cfg.rates.posterior_draws == 500

    def test_octal_generators(self, tmp_path):
        path = write_toml(tmp_path, "[code]\nconstraint_length = 3\ngenerators_octal = [0o5, 0o7]\n")
        assert load_experiment(path, mode="ber").code_spec.generators_octal == (5, 7)

    def test_mode_mismatch(self, tmp_path):
        path = write_toml(tmp_path, 'mode = "ber"\n')
        with pytest.raises(ConfigurationError):
            load_experiment(path, mode="outage")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError) as exc:
            load_experiment(tmp_path / "nope.toml", mode="ber")
        assert "nope.toml" in exc.value.get_context()["path"]

    def test_malformed_toml(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_experiment(write_toml(tmp_path, "snr_grid = [1.0,\n"), mode="ber")

    @pytest.mark.parametrize("text,field", [
        ("snr_grid = []\n", "snr_grid"),
        ("pilot_lengths = [1]\n", "pilot_lengths"),
        ("iterations = 0\n", "iterations"),
        ("unknown = 1\n", "unknown"),
        ("[channel]\ntx_antennas = 4\nrx_antennas = 2\n", "channel"),
        ("[budget]\nmin_frames = 100\nmax_frames = 10\n", "budget"),
        ("[rates]\nposterior_draws = 50\n", "rates.posterior_draws"),
        ("[rates]\noutage_probability = 1.5\n", "rates.outage_probability"),
    ])
    def test_invalid_values_name_the_field(self, tmp_path, text, field):
        with pytest.raises(ConfigurationError) as exc:
            load_experiment(write_toml(tmp_path, text), mode="outage")
        ctx = exc.value.get_context()
        assert field in " ".join(ctx["fields"] + ctx["errors"])

    def test_unknown_metric(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_experiment(write_toml(tmp_path, 'metrics = ["oracle"]\n'), mode="ber")


class TestOverrides:
    def test_command_line_wins(self, tmp_path):
        cfg = load_experiment(write_toml(tmp_path, "snr_grid = [1.0]\nseed = 5\n"), mode="ber")
        out = cfg.with_overrides(snr_grid=[2.0, 3.0], seed=9, metrics=[MetricKind.IMPROVED], pilot_lengths=None)
        assert out.snr_grid == [2.0, 3.0]
        assert out.seed == 9
        assert out.metrics == [MetricKind.IMPROVED]
        assert out.pilot_lengths == cfg.pilot_lengths

    def test_no_overrides_returns_same(self):
        cfg = load_experiment(None, mode="ber")
        assert cfg.with_overrides(seed=None) is cfg

    def test_overrides_are_revalidated(self):
        cfg = load_experiment(None, mode="ber")
        with pytest.raises(ConfigurationError):
            cfg.with_overrides(pilot_lengths=[1])
        with pytest.raises(ConfigurationError):
            cfg.with_overrides(seed=-1)


class TestDerivedConfigs:
    def test_ebn0_to_noise_variance(self):
        cfg = ExperimentConfig(mode="ber")
        # Eb/N0 = 1 / (0.5 * 4 * σ_z²)
        assert cfg.noise_variance_for_ebn0(0.0) == pytest.approx(0.5)
        assert cfg.noise_variance_for_ebn0(10.0) == pytest.approx(0.05)

    def test_channel_config_uses_data_energy_for_pilots(self):
        cfg = ExperimentConfig(mode="ber")
        ch = cfg.channel_config(0.0, 4)
        assert ch.pilot_power == 1.0
        assert ch.pilot_length == 4
        assert ch.num_subcarriers == 50
        assert ch.error_variance == pytest.approx(0.125)

    def test_rate_config_from_snr(self):
        cfg = ExperimentConfig(mode="outage")
        rc = cfg.rate_config(10.0, 2)
        assert rc.noise_variance == pytest.approx(0.2)
        assert rc.error_variance == pytest.approx(0.1)
        assert rc.num_subcarriers == 16

    def test_explicit_pilot_power(self):
        cfg = ExperimentConfig(mode="outage", channel={"pilot_power": 2.0})
        assert cfg.rate_config(10.0, 2).error_variance == pytest.approx(0.05)


class TestLoggingSetup:
    def test_every_package_has_a_logger(self):
        from config.settings import LOGGING

        assert {"api", "config", "core", "utils"} <= set(LOGGING["loggers"])
