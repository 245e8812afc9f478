"""Configuration, logging and file I/O helpers."""

from neuro_qp.utils.config import Settings, load_environment
from neuro_qp.utils.files import load_problem, save_generated, save_problem
from neuro_qp.utils.log import setup_logging

__all__ = ['Settings', 'load_environment', 'load_problem', 'save_generated', 'save_problem', 'setup_logging']
