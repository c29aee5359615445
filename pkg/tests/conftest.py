"""
Pytest configuration and fixtures for testing.
"""
import pytest

from app import create_app
from app.models import TrueParams
from app.services import triangle_service


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long statistical runs (deselect with -m "not slow")')


@pytest.fixture(scope='function')
def app():
    """
    Create and configure a Flask app instance for testing.
    Function-scoped for complete test isolation.
    """
    app = create_app('testing')

    # Establish application context
    ctx = app.app_context()
    ctx.push()

    yield app

    ctx.pop()


@pytest.fixture(scope='function')
def runner(app):
    """
    Create a test CLI runner for the Flask app.
    Function-scoped for complete test isolation.
    """
    return app.test_cli_runner()


@pytest.fixture(scope='session')
def reference_triangle():
    """The bundled 9-accident-year paid triangle."""
    return triangle_service.load_reference_triangle()


@pytest.fixture
def small_params():
    """A 5-accident-year normal world, small enough for exhaustive unit tests."""
    return TrueParams.from_table(
        f0=1000.0,
        sigma0=100.0,
        f=[1.5, 1.2, 1.1, 1.0],
        sigma_scaled=[0.1, 0.05, 0.02, 0.0],
        gamma=0,
    )


@pytest.fixture
def small_params_gamma1():
    """Volume-weighted variant of small_params."""
    return TrueParams.from_table(
        f0=1000.0,
        sigma0=100.0,
        f=[1.5, 1.2, 1.1, 1.0],
        sigma_scaled=[0.1, 0.05, 0.02, 0.0],
        gamma=1,
    )


@pytest.fixture
def small_triangle():
    """A hand-made 4-accident-year triangle (n = 3) with exact ratios."""
    return triangle_service.parse_triangle(
        '100,150,180,180\n'
        '200,320,352\n'
        '400,560\n'
        '300\n'
    )


@pytest.fixture
def run_config_file(tmp_path):
    """Factory writing a run-config file and returning its path."""

    def _write(text):
        path = tmp_path / 'run.cfg'
        path.write_text(text, encoding='utf-8')
        return str(path)

    return _write
