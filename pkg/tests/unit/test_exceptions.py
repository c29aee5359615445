"""
Unit tests for custom exception classes and their exit codes.
"""
import pytest

from app.utils.exceptions import (
    ConfigurationError,
    EmptyResiduePoolError,
    EstimationError,
    ReservingError,
    SimulationError,
    TriangleFormatError,
    ValidationError,
)


class TestReservingError:
    """Test base ReservingError class"""

    def test_default_exit_code(self):
        """Test that ReservingError exits with 1"""
        error = ReservingError('Test error')
        assert error.exit_code == 1
        assert error.message == 'Test error'
        assert str(error) == 'Test error'

    def test_custom_exit_code(self):
        """Test that the exit code can be overridden per instance"""
        assert ReservingError('Test error', exit_code=7).exit_code == 7

    def test_to_dict(self):
        """Test conversion to a dictionary including payload"""
        result = ReservingError('Test error', payload={'key': 'f0'}).to_dict()
        assert result == {'key': 'f0', 'error': 'Test error', 'exit_code': 1}


class TestExitCodes:
    """Test the exit code of every subclass"""

    @pytest.mark.parametrize('error, code', [
        (ValidationError('bad alpha'), 2),
        (TriangleFormatError('bad cell', line=3, column=2), 2),
        (ConfigurationError('unknown key'), 2),
        (EstimationError('zero weights'), 3),
        (EmptyResiduePoolError('no residues'), 3),
        (SimulationError('worker died'), 4),
    ])
    def test_exit_code(self, error, code):
        """Test that each error class maps to its process exit code"""
        assert error.exit_code == code
        assert isinstance(error, ReservingError)

    def test_configuration_error_is_validation_error(self):
        """Test that configuration errors are user input errors"""
        assert issubclass(ConfigurationError, ValidationError)


class TestTriangleFormatError:
    """Test TriangleFormatError position payload"""

    def test_position_in_payload(self):
        """Test that line and column end up in the payload"""
        error = TriangleFormatError('non-numeric cell', line=4, column=2)
        assert error.payload == {'line': 4, 'column': 2}
        assert error.line == 4

    def test_no_position(self):
        """Test that a message without position has no payload"""
        assert TriangleFormatError('empty file').payload is None


class TestSimulationError:
    """Test SimulationError"""

    def test_keeps_original_exception(self):
        """Test that the wrapped exception is available"""
        cause = RuntimeError('boom')
        error = SimulationError('chunk failed', original_exception=cause)
        assert error.original_exception is cause
