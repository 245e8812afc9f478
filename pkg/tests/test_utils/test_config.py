import logging

import pytest
from rich.logging import RichHandler

from neuro_qp.utils.config import Settings, load_environment
from neuro_qp.utils.log import setup_logging

ENV_VARS = [
    'NEUROQP_STATE_FMT', 'NEUROQP_WEIGHT_BITS', 'NEUROQP_SCALAR_FMT', 'NEUROQP_ALPHA_PERIOD',
    'NEUROQP_BETA_PERIOD', 'NEUROQP_ITERS', 'NEUROQP_SYNC_COST', 'NEUROQP_NEURONS_PER_CORE', 'NEUROQP_LOG_LEVEL',
]


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    for name in ENV_VARS:
        monkeypatch.setenv(name, "")
        monkeypatch.delenv(name)
    empty = tmp_path / ".env"
    empty.write_text("")
    return str(empty)


def test_defaults(clean_env):
    assert load_environment(clean_env) == Settings()


def test_environment_overrides(clean_env, monkeypatch):
    monkeypatch.setenv('NEUROQP_STATE_FMT', 'Q13.18')
    monkeypatch.setenv('NEUROQP_ITERS', '1000')
    monkeypatch.setenv('NEUROQP_LOG_LEVEL', 'debug')
    settings = load_environment(clean_env)
    assert settings.state_fmt == 'Q13.18'
    assert settings.iters == 1000
    assert settings.log_level == 'DEBUG'


def test_dotenv_file_is_read(clean_env, tmp_path):
    """Values in a .env file are picked up like environment variables."""
    path = tmp_path / "custom.env"
    path.write_text("NEUROQP_WEIGHT_BITS=12\nNEUROQP_SYNC_COST=\n")
    settings = load_environment(str(path))
    assert settings.weight_bits == 12
    assert settings.sync_cost == 64


def test_non_integer_is_rejected(clean_env, monkeypatch):
    monkeypatch.setenv('NEUROQP_WEIGHT_BITS', 'eight')
    with pytest.raises(ValueError, match="NEUROQP_WEIGHT_BITS"):
        load_environment(clean_env)


def test_setup_logging_installs_one_handler():
    logger = setup_logging(logging.INFO)
    setup_logging('DEBUG')
    handlers = [h for h in logger.handlers if isinstance(h, RichHandler)]
    assert len(handlers) == 1
    assert logger.level == logging.DEBUG
    assert not logger.propagate


@pytest.mark.parametrize("name", ['NEUROQP_ITERS', 'NEUROQP_ALPHA_PERIOD', 'NEUROQP_BETA_PERIOD',
                                  'NEUROQP_NEURONS_PER_CORE'])
def test_non_positive_count_is_rejected(clean_env, monkeypatch, name):
    """Budgets and periods below one are configuration errors."""
    monkeypatch.setenv(name, '0')
    with pytest.raises(ValueError, match=f"{name} must be >= 1"):
        load_environment(clean_env)
