"""Exception hierarchy shared by every module.

Each error class carries the CLI exit code that reports it, so scripts can
rely on the numeric contract: 2 input validation, 3 unreachable, 4 singular
input, 5 file/parse error.
"""


class HandError(Exception):
    exit_code = 1


class SpecParseError(HandError):
    """The hand-spec or script document could not be parsed."""

    exit_code = 5


class SpecValidationError(HandError, ValueError):
    """A document parsed but violates a structural invariant."""

    exit_code = 2


class JointLimitError(HandError, ValueError):
    """A joint angle lies outside its row's range."""

    exit_code = 2

    def __init__(self, joint, value, bound, side):
        self.joint = joint
        self.value = value
        self.bound = bound
        self.side = side
        word = "exceeds" if side == "max" else "is below"
        super().__init__(f"{joint} {word} {bound:g}° (got {value:g}°)")


class ArityError(HandError, ValueError):
    exit_code = 2


class UnreachableError(HandError):
    exit_code = 3


class IndeterminateError(HandError):
    """Lateral angle is undefined because the target lies on the base axis."""

    exit_code = 4


class SingularConfigurationError(HandError):
    exit_code = 4


class GeometryError(HandError, ValueError):
    """Tendon geometry is invalid at the requested joint angle."""

    exit_code = 2


class GraspError(HandError):
    exit_code = 3


class ScriptSyntaxError(SpecParseError):
    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class StrokeError(HandError, ValueError):
    """Requested tendon reel-in exceeds what the flexion path can absorb."""

    exit_code = 2


class ThermalError(HandError, ValueError):
    """Heating power cannot reach the transition temperature against losses."""

    exit_code = 2
