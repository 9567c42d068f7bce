"""Exception types shared across the package."""


class TspBnbError(Exception):
    """Base class for every error raised by this package."""


class InvalidInstanceError(TspBnbError):
    """Instance cannot be built (too few vertices, malformed coordinates)."""


class ParseError(TspBnbError):
    """Malformed TSPLIB input; the message names the offending line."""


class OracleSizeError(TspBnbError):
    """Brute-force oracle invoked above its size cap."""


class InputError(TspBnbError):
    """Bad runtime input: dimension mismatch, out-of-range matrix entries, etc."""


class ConfigError(TspBnbError):
    """Inconsistent solver or experiment configuration."""


class InfeasibleSubproblem(TspBnbError):
    """Signal: the current forced/forbidden edge set admits no 1-tree.

    Used for control flow inside the branch and bound; a caught signal closes
    the subproblem, it is not a user-facing failure.
    """


class BranchingExhausted(TspBnbError):
    """Signal: no free edge is available to branch on."""


class InsufficientDataError(TspBnbError):
    """Statistical test invoked with too few nonzero pairs."""


class BenchError(TspBnbError):
    """Experiment harness failure (empty population, missing probability file)."""
