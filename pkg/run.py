"""
Command-line entry point.

Usage:
    FLASK_APP=run.py flask reserve --gamma 0
    python run.py scr --method inversion --alpha 0.995 --seed 1
"""
import os

from flask.cli import FlaskGroup

from app import create_app


def _create_app():
    return create_app(os.environ.get('APP_CONFIG') or 'default')


# Create Flask application
app = _create_app()

cli = FlaskGroup(create_app=_create_app)

if __name__ == '__main__':
    cli()
