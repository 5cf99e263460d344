"""Core infrastructure for dumotion."""

from dumotion.core.config import settings
from dumotion.core.exceptions import DUMotionError

__all__ = ["settings", "DUMotionError"]
