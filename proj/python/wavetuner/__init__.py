"""Wavelet-packet subband forecasting: Python surface over the C++ core."""

try:
    from ._wavetuner import *  # noqa: F401,F403  (installed package layout)
except ImportError:
    from _wavetuner import *  # noqa: F401,F403  (in-tree build on PYTHONPATH)
