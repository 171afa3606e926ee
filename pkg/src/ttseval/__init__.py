"""Objective evaluation and DSP toolkit for speech synthesis.

Covers MCD, log-F0 RMSE and CER with DTW alignment, MOS statistics,
Griffin-Lim vocoding, feature extraction, and prosody utilities, plus the
``ttseval`` batch CLI.
"""

__version__ = "0.1.0"
