"""Knowledge-graph embedding workbench.

Compositional translation embeddings over multi-relational graphs, toroidal
self-organizing-map fingerprints, and a small convolutional classifier for
compound-gene interaction prediction, with a CLI and an HTTP explorer service.
"""

from . import checkpoint, cnn, embedding, evaluation, fingerprint, kg, pipeline, som
from .errors import SomekgError

__all__ = [
    "checkpoint",
    "cnn",
    "embedding",
    "evaluation",
    "fingerprint",
    "kg",
    "pipeline",
    "som",
    "SomekgError",
]

__version__ = "0.1.0"
