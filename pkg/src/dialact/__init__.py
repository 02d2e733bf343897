"""Dialogue act classification toolkit.

Train utterance classifiers on a large tagged speech corpus and evaluate
them cross-domain on GitHub issue comments.  Ships a from-scratch
numpy training core (dense / 1-D convolution / LSTM layers with analytic
gradients and Adam), five classifier architectures, and full
metric/confusion reporting.
"""

__version__ = "0.1.0"
