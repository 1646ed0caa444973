"""WSGI entry point for Gunicorn: `gunicorn wsgi:app`."""
import os

from amparser import create_app

app = create_app(config_name=os.environ.get('AMPARSER_ENV', 'production'))
