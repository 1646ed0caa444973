import logging

from flask import Flask

__version__ = '0.1.0'


def create_app(config_name='development'):
    """Application factory function."""
    from config import config_by_name

    app = Flask(__name__)

    # Load configuration
    app.config.from_object(config_by_name(config_name))
    logging.getLogger('amparser').setLevel(app.config['LOG_LEVEL'])

    # Register blueprints
    from amparser.routes import api_bp
    app.register_blueprint(api_bp)

    return app
