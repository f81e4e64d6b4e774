"""Privacy-metric calculus: f-divergence leakages, probabilistic information
privacy audits, divergence-to-privacy conversions and a chi-square regularized
sanitizer."""

__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402

__all__ = ["BACKEND", "__version__"]
