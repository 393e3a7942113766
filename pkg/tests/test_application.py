import logging

import pytest

from singlet import application


@pytest.fixture
def clean_environment(monkeypatch):
    monkeypatch.delenv("SINGLET_PRECISION", raising=False)
    monkeypatch.delenv("SINGLET_LOG_LEVEL", raising=False)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "singlet.conf"
    path.write_text("# defaults\nprecision_digits = 50\n\nseries_tail_tol=1e-20\n")
    return path


# ---- Settings Tests ----
class TestSettings:

    def test_updated_ignores_missing_entries(self):
        settings = application.Settings().updated({"precision_digits": None, "max_terms": 10})

        assert settings.precision_digits == application.Settings().precision_digits
        assert settings.max_terms == 10

    def test_updated_validates_types(self):
        with pytest.raises(application.InvalidConfigError):
            application.Settings().updated({"precision_digits": "many"})

    def test_updated_validates_log_level(self):
        with pytest.raises(application.InvalidConfigError):
            application.Settings().updated({"log_level": "LOUD"})


# ---- Configuration source Tests ----
class TestConfigurationSources:

    def test_environment(self, monkeypatch, clean_environment):
        # Arrange
        monkeypatch.setenv("SINGLET_PRECISION", "45")
        monkeypatch.setenv("SINGLET_LOG_LEVEL", "debug")

        # Act
        settings = application.from_environment()

        # Assert
        assert settings.precision_digits == 45
        assert settings.log_level == "debug"

    def test_environment_defaults(self, clean_environment):
        assert application.from_environment() == application.Settings()

    def test_config_file(self, config_file):
        settings = application.from_config_file(str(config_file), application.Settings())

        assert settings.precision_digits == 50
        assert settings.series_tail_tol == 1e-20

    def test_flags_override_file(self, config_file):
        settings = application.from_config_file(str(config_file), application.Settings())

        settings = settings.updated({"precision_digits": 20})

        assert settings.precision_digits == 20
        assert settings.series_tail_tol == 1e-20

    @pytest.mark.parametrize("text", ["precision_digits 50\n", "colour = blue\n", "max_terms = lots\n"])
    def test_invalid_config_file(self, tmp_path, text):
        path = tmp_path / "bad.conf"
        path.write_text(text)

        with pytest.raises(application.InvalidConfigError):
            application.from_config_file(str(path), application.Settings())

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(application.InvalidConfigError):
            application.from_config_file(str(tmp_path / "absent.conf"), application.Settings())


# ---- Entry point Tests ----
class TestMain:

    def test_main_exits_with_the_command_status(self, mocker):
        # Arrange
        mocker.patch("sys.argv", ["singlet", "verlinde", "--wzw", "2"])
        run = mocker.patch("singlet.adapters.cli.run", return_value=0)

        # Act
        with pytest.raises(SystemExit) as exit_:
            application.main()

        # Assert
        assert exit_.value.code == 0
        run.assert_called_once_with(["verlinde", "--wzw", "2"])

    def test_configure_logging(self, mocker):
        basic_config = mocker.patch("logging.basicConfig")

        application.configure_logging("info")

        assert basic_config.call_args.kwargs["level"] == logging.INFO
