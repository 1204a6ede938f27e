"""Exception types raised across the package.

Everything derives from CausalKitError so callers (notably the CLI) can
catch one base class. File-system problems propagate as the builtin
OSError/IOError.
"""


class CausalKitError(Exception):
    """Base class for all causalkit errors."""


# graph construction / parsing

class GraphSyntaxError(CausalKitError):
    """A line of graph source text could not be parsed."""


class CycleError(CausalKitError):
    """The edge set admits no topological order."""


class DuplicateEdgeError(CausalKitError):
    """The same directed edge was declared twice."""


class UnknownNodeError(CausalKitError):
    """A node name is not declared in the graph."""


class OverlapError(CausalKitError):
    """An endpoint of a separation query appears in the conditioning set."""


class NoCausalPathError(CausalKitError):
    """The outcome is not a descendant of the treatment."""


class NoValidAdjustmentSetError(CausalKitError):
    """No candidate subset blocks every backdoor path."""


# tabular data

class EmptyFileError(CausalKitError):
    """The CSV file contains no header line."""


class DuplicateHeaderError(CausalKitError):
    """Two CSV columns share a name."""


class AllRowsDroppedError(CausalKitError):
    """Every data row was dropped (or the file had none)."""


class UnknownColumnError(CausalKitError):
    """A referenced column does not exist in the table."""


class NameCollisionError(CausalKitError):
    """A new column name is already taken."""


class EmptyColumnError(CausalKitError):
    """An operation needs at least one value in the column."""


# propensity model

class SingularHessianError(CausalKitError):
    """Newton system unsolvable even with the ridge term (duplicated covariates)."""


class NonBinaryTargetError(CausalKitError):
    """Logistic fit target contains values outside {0, 1}."""


class DimensionMismatchError(CausalKitError):
    """Parameter vector length does not match the design matrix."""


# estimation

class EmptyTreatmentArmError(CausalKitError):
    """One treatment group has no units."""


class NonBinaryVariableError(CausalKitError):
    """A column that must be binary contains other values."""


class AllStrataDroppedError(CausalKitError):
    """Every propensity stratum lacked a treated or a control unit."""


class RankDeficientDesignError(CausalKitError):
    """The regression design matrix does not have full column rank."""


class ResampleExhaustedError(CausalKitError):
    """Bootstrap redraws kept producing an empty arm."""


class DegenerateSubsetError(CausalKitError):
    """A refuter subsample lost a treatment arm despite redraws."""


class EmptyReplicatesError(CausalKitError):
    """A p-value was requested for an empty replicate list."""


# simulation

class ScmSpecError(CausalKitError):
    """A structural model definition violates its ordering or link rules."""


class UnknownVariableError(CausalKitError):
    """A referenced variable is not part of the structural model."""
