"""
Flask application configuration.
Defines environment-based configuration classes.
"""
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

BASE_DIR = os.path.dirname(os.path.abspath(__file__))


def _int(name, default):
    return int(os.environ.get(name) or default)


class Config:
    """Base configuration with common settings."""

    @classmethod
    def init_app(cls, app):
        """Initialize application with configuration-specific settings."""
        pass

    # Bundled data
    REFERENCE_TRIANGLE = os.environ.get('REFERENCE_TRIANGLE') or \
        os.path.join(BASE_DIR, 'app', 'data', 'reference_triangle.csv')
    DEFAULT_BACKTEST_CONFIG = os.environ.get('DEFAULT_BACKTEST_CONFIG') or \
        os.path.join(BASE_DIR, 'app', 'data', 'normal_world_gamma0.cfg')

    # SCR
    SCR_SCENARIOS = _int('SCR_SCENARIOS', 100_000)
    SCR_BLOCK_SIZE = _int('SCR_BLOCK_SIZE', 10_000)

    # Backtest (desk scale; full scale is s=100,000, t=10,000)
    BACKTEST_REPLICATES = _int('BACKTEST_REPLICATES', 20_000)
    BACKTEST_SCENARIOS = _int('BACKTEST_SCENARIOS', 2_000)
    BACKTEST_CHUNK_SIZE = _int('BACKTEST_CHUNK_SIZE', 100)
    WORKERS = _int('WORKERS', os.cpu_count() or 1)

    # Fiducial example (0 scenarios = analytic quantiles)
    FIDUCIAL_REPLICATES = _int('FIDUCIAL_REPLICATES', 100_000)
    FIDUCIAL_SCENARIOS = _int('FIDUCIAL_SCENARIOS', 0)

    # Output
    REPORT_DIR = os.environ.get('REPORT_DIR') or 'reports'

    # Logging
    LOG_LEVEL = os.environ.get('LOG_LEVEL') or 'INFO'
    LOG_TO_FILE = os.environ.get('LOG_TO_FILE', 'false').lower() == 'true'
    SIMULATION_LOG_FILE = os.environ.get('SIMULATION_LOG_FILE') or \
        os.path.join(BASE_DIR, 'logs', 'simulation.log')

    @classmethod
    def configure_logging(cls, app):
        """Configure the simulation logger used by all services."""
        import logging
        from logging.handlers import RotatingFileHandler

        formatter = logging.Formatter('[%(asctime)s] %(levelname)s: %(message)s')

        simulation_logger = logging.getLogger('simulation')
        simulation_logger.setLevel(app.config.get('LOG_LEVEL', 'INFO'))
        simulation_logger.handlers.clear()

        # File handler for run logs
        if app.config.get('LOG_TO_FILE'):
            log_file = app.config['SIMULATION_LOG_FILE']
            os.makedirs(os.path.dirname(log_file), exist_ok=True)
            file_handler = RotatingFileHandler(
                log_file,
                maxBytes=10485760,  # 10MB
                backupCount=10
            )
            file_handler.setFormatter(formatter)
            simulation_logger.addHandler(file_handler)

        # Also log to console in development
        if app.config.get('DEBUG'):
            console_handler = logging.StreamHandler()
            console_handler.setFormatter(formatter)
            simulation_logger.addHandler(console_handler)


class DevelopmentConfig(Config):
    """Development environment configuration."""
    DEBUG = True
    TESTING = False


class ProductionConfig(Config):
    """Production environment configuration."""
    DEBUG = False
    TESTING = False

    LOG_TO_FILE = os.environ.get('LOG_TO_FILE', 'true').lower() == 'true'


class TestingConfig(Config):
    """Testing environment configuration."""
    TESTING = True
    DEBUG = False

    # Small sizes so CLI flows finish quickly
    SCR_SCENARIOS = 2_000
    SCR_BLOCK_SIZE = 500
    BACKTEST_REPLICATES = 40
    BACKTEST_SCENARIOS = 200
    BACKTEST_CHUNK_SIZE = 10
    WORKERS = 1
    FIDUCIAL_REPLICATES = 2_000
    FIDUCIAL_SCENARIOS = 0

    LOG_TO_FILE = False


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}
