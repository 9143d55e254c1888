"""
Exception hierarchy
Every error carries the exit code the command line reports for it
"""

EXIT_OK = 0
EXIT_DATA = 1
EXIT_CAPACITY = 2
EXIT_INVALID = 3
EXIT_NO_FEASIBLE = 4
EXIT_USAGE = 64


class PaintSeqError(Exception):
    exit_code = EXIT_DATA


class InstanceFormatError(PaintSeqError):
    """Instance file could not be read or parsed"""


class InvalidSequenceError(PaintSeqError):
    """An order is not a permutation of the instance's vehicle ids"""


class DimensionError(PaintSeqError):
    """Array or bitstring length does not match the model"""


class CapacityError(PaintSeqError):
    exit_code = EXIT_CAPACITY


class InvalidInstanceError(PaintSeqError):
    exit_code = EXIT_INVALID

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(
            f'{len(self.violations)} validation error(s): '
            + '; '.join(v.message for v in self.violations)
        )


class NoFeasibleSampleError(PaintSeqError):
    exit_code = EXIT_NO_FEASIBLE


class ConfigurationError(PaintSeqError):
    exit_code = EXIT_USAGE
