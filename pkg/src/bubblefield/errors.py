"""Exception and warning types shared across the solver modules."""


class BubblefieldError(Exception):
    """Base class for all solver errors."""


class SingularSystem(BubblefieldError):
    """Assembled block linear system is numerically singular."""


class MeshTooCoarse(BubblefieldError):
    """Mesh has fewer than one interval."""


class IntegrationFailure(BubblefieldError):
    """Interval IVP integration produced non-finite values."""


class AxisSingularity(BubblefieldError):
    """sin(theta)/r requested below the radial floor without regularization."""


class NewtonDivergence(BubblefieldError):
    """Newton iteration exceeded its iteration budget."""


class ZeroSurfaceTension(BubblefieldError):
    """Bond number requested with sigma = 0."""


class NoClosure(BubblefieldError):
    """Arc-length continuation exhausted its search range."""


class DegenerateProfile(BubblefieldError):
    """Profile has no usable radial or vertical extent."""


class CflViolation(BubblefieldError):
    """Explicit step size exceeds the stability bound."""


class EmptyBubbleList(BubblefieldError):
    """Level-set initialization called with no bubbles."""


class ImaginaryFrequency(BubblefieldError):
    """Breathing-mode radicand is negative; no stable oscillation."""


class ConfigError(BubblefieldError):
    """Run configuration is missing or malformed; message names the key."""


class LostBubbleWarning(UserWarning):
    """A tracked bubble's region vanished, merged or left the domain."""
