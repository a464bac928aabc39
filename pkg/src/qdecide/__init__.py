"""Exact and interval-certified tools for decision problems about quantum states and channels."""

__version__ = "0.1.0"

from .channels import Channel, is_completely_positive  # noqa: E402
from .core.cmatrix import CMatrix  # noqa: E402

__all__ = ["Channel", "CMatrix", "is_completely_positive", "__version__"]
