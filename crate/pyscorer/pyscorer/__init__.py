"""Scorer adapter speaking gojun's line-delimited JSON protocol."""

from .backends import MockBackend, NeuralBackend, load_backend
from .serve import PROTO, serve

__all__ = ["MockBackend", "NeuralBackend", "load_backend", "serve", "PROTO"]
