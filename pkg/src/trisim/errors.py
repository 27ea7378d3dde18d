"""Exception hierarchy for trisim.

Everything raised on purpose derives from TrisimError so callers (and the CLI)
can distinguish domain failures from genuine bugs.
"""


class TrisimError(Exception):
    """Base class for all trisim domain errors."""


class GeometryError(TrisimError):
    """Degenerate or inconsistent geometric input (zero-length base, bad lattice step...)."""


class VisibilityError(TrisimError):
    """A required marker does not project into the current image."""


class ControllerTimeout(TrisimError):
    """A vertex maneuver failed to settle within its time budget."""


class ScenarioError(TrisimError):
    """Scenario file or Scenario value is invalid (unknown key, bad range, off-lattice start)."""


class PlanningError(TrisimError):
    """No robot can take a step: every candidate vertex of every mover is blocked."""


class SimulationError(TrisimError):
    """A run violated an internal bound (step/tick budget exceeded, maneuver failure)."""
