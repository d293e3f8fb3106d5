"""Python interface to the riskprobe planner and experiment runner."""

from ._riskprobe import *  # noqa: F401,F403
from ._riskprobe import __doc__, version

__version__ = version()
