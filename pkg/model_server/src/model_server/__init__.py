"""Scorer sidecar: embedding and NLI models behind the wire protocol."""

from .app import create_app
from .config import ModelConfig

__version__ = "0.1.0"
