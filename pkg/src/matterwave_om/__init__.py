"""Optomechanical read-out of matter-wave coherence: phase-space and homodyne signatures."""

from .beamstate import BeamState, Mode

__all__ = ["BeamState", "Mode"]
__version__ = "0.1.0"
