"""Exception hierarchy shared by all solver stages."""


class RsPoseError(Exception):
    """Base class for every error raised by rspose."""


class DegenerateDistortion(RsPoseError):
    """A point maps to infinity under the division model."""


class NoConvergence(RsPoseError):
    """A fixed-point iteration did not settle."""


class BehindCamera(RsPoseError):
    """A scene point has non-positive depth."""


class RankDegenerate(RsPoseError):
    """A linear system has the wrong numerical rank for the configuration."""


class PivotSingular(RsPoseError):
    """Gauss-Jordan elimination hit a vanishing pivot."""


class EigenFailure(RsPoseError):
    """An eigenvalue routine failed to converge."""


class SingularCalibration(RsPoseError):
    """The leading 3x3 block of a projection matrix is singular."""


class TemplateSingular(RsPoseError):
    """The elimination template of the polynomial solver lost rank."""


class NoFeasibleSolution(RsPoseError):
    """No candidate is real with positive focal length."""


class NoModelFound(RsPoseError):
    """Robust estimation found no feasible hypothesis."""


#: errors that mean "this sample is degenerate" (CLI exit code 3)
DEGENERACY_ERRORS = (
    RankDegenerate,
    PivotSingular,
    SingularCalibration,
    TemplateSingular,
    DegenerateDistortion,
)
