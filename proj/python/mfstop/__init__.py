# SPDX-License-Identifier: MIT
"""Mean-field optimal stopping: equilibrium solvers, population simulation and fee design."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
