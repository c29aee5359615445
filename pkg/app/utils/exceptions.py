"""
Custom Exception Classes for the reserve-risk engine
Provides standardized error handling with process exit codes
"""


class ReservingError(Exception):
    """
    Base error class
    All custom exceptions inherit from this class
    """
    exit_code = 1

    def __init__(self, message, exit_code=None, payload=None):
        """
        Initialize ReservingError

        Args:
            message (str): Error message to display to the user
            exit_code (int, optional): Process exit code used by the CLI (default: 1)
            payload (dict, optional): Additional error context data (row, column, key, ...)
        """
        super().__init__(message)
        self.message = message
        if exit_code is not None:
            self.exit_code = exit_code
        self.payload = payload

    def to_dict(self):
        """
        Convert exception to dictionary for machine-readable output

        Returns:
            dict: Error dictionary
        """
        rv = dict(self.payload or ())
        rv['error'] = self.message
        rv['exit_code'] = self.exit_code
        return rv


class ValidationError(ReservingError):
    """
    Exit code 2 - Validation errors (user input errors)

    Usage:
        raise ValidationError('gamma must be 0 or 1')
        raise ValidationError('alpha must lie in (0, 1)', payload={'field': 'alpha'})
    """
    exit_code = 2


class TriangleFormatError(ValidationError):
    """
    Exit code 2 - Malformed triangle file

    Usage:
        raise TriangleFormatError('non-numeric cell', line=4, column=2)
    """

    def __init__(self, message, line=None, column=None):
        payload = {}
        if line is not None:
            payload['line'] = line
        if column is not None:
            payload['column'] = column
        super().__init__(message, payload=payload or None)
        self.line = line
        self.column = column


class ConfigurationError(ValidationError):
    """
    Exit code 2 - Invalid run configuration

    Usage:
        raise ConfigurationError('unknown key', payload={'key': 'sigma'})
        raise ConfigurationError('bootstrap pool needs at least 2 residues')
    """
    pass


class EstimationError(ReservingError):
    """
    Exit code 3 - Chain-ladder estimation failed on the given data

    Usage:
        raise EstimationError('zero weight sum in column 3')
    """
    exit_code = 3


class EmptyResiduePoolError(EstimationError):
    """
    Exit code 3 - No column carries residues (every sigma2hat is zero)
    """
    pass


class SimulationError(ReservingError):
    """
    Exit code 4 - A simulation worker failed

    Usage:
        raise SimulationError('replicate chunk 12 failed', original_exception=exc)
    """
    exit_code = 4

    def __init__(self, message, original_exception=None, payload=None):
        super().__init__(message, payload=payload)
        self.original_exception = original_exception
