"""Sentence-embedding export for dialogue-act datasets.

Reads the dataset JSON-Lines format, runs a pretrained sentence encoder
(USE or BERT-base) over every utterance, and writes the sentence-embedding
JSON-Lines format the classifier toolkit consumes.
"""

from .encoders import ENCODER_DIMS, EncoderUnavailable, SentenceEncoder, resolve_encoder
from .exporter import ExportError, ExportJob, export_embeddings, verify_export

__all__ = [
    "ENCODER_DIMS",
    "EncoderUnavailable",
    "SentenceEncoder",
    "resolve_encoder",
    "ExportError",
    "ExportJob",
    "export_embeddings",
    "verify_export",
]

__version__ = "0.1.0"
