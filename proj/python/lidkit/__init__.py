"""Language identification toolkit: n-gram softmax classifier, thresholded
decisions, corpus utilities and evaluation metrics."""

from ._lidkit import *  # noqa: F401,F403

__version__ = "0.1.0"
