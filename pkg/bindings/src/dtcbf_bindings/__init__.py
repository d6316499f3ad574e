"""Thin episodic bindings over the dtcbf shielded environments.

The binding adds no logic of its own: rewards, costs, termination, and
filtering all come from the core library; this layer only adapts the
episodic protocol to the (observation, reward, cost, done, info) tuple
convention of constrained-RL frameworks and exposes space descriptors.
"""

from .api import BoundEnv, ParityReport, make, parity_check

__all__ = ["BoundEnv", "ParityReport", "make", "parity_check"]
__version__ = "0.1.0"
