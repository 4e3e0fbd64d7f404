"""Configuration module for the conversation quality pipeline."""

from .settings import Settings, get_settings, load_settings
from .logging_setup import console, setup_logging

__all__ = ['Settings', 'get_settings', 'load_settings', 'console', 'setup_logging']
