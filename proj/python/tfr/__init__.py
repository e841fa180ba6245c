"""Template-based Fourier reconstruction anomaly detection."""

try:
    from ._tfr import *  # noqa: F401,F403
    from ._tfr import __version__
except ImportError:
    from _tfr import *  # noqa: F401,F403
    from _tfr import __version__
