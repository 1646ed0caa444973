import os

from dotenv import load_dotenv

load_dotenv()


def _flag(name, default):
    value = os.environ.get(name)
    if value is None:
        return default
    return value.strip().lower() in ('1', 'true', 'yes', 'on')


class Config:
    """Base configuration."""
    SECRET_KEY = os.environ.get('SECRET_KEY', 'dev-secret-key-change-in-production')
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')

    # Lexicon used when a request or command does not bring its own
    AMPARSER_LEXICON = os.environ.get('AMPARSER_LEXICON', os.path.join('instance', 'desk.lex'))

    # Decoder defaults; CLI flags and request bodies override them
    AMPARSER_DECODER = os.environ.get('AMPARSER_DECODER', 'astar')
    AMPARSER_HEURISTIC = os.environ.get('AMPARSER_HEURISTIC', 'ignore-aware')
    AMPARSER_K_SUPERTAGS = int(os.environ.get('AMPARSER_K_SUPERTAGS', 6))  # 0 keeps every constant
    AMPARSER_DEQUEUE_LIMIT = int(os.environ.get('AMPARSER_DEQUEUE_LIMIT', 1_000_000))
    AMPARSER_BEAM = int(os.environ.get('AMPARSER_BEAM', 1))
    AMPARSER_JOBS = int(os.environ.get('AMPARSER_JOBS', 1))
    AMPARSER_DEBUG_CHECKS = _flag('AMPARSER_DEBUG_CHECKS', False)


class DevelopmentConfig(Config):
    """Development configuration."""
    DEBUG = True
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'DEBUG')
    AMPARSER_DEBUG_CHECKS = _flag('AMPARSER_DEBUG_CHECKS', True)


class ProductionConfig(Config):
    """Production configuration."""
    DEBUG = False
    TESTING = False


class TestingConfig(Config):
    """Configuration for the test suite."""
    TESTING = True
    DEBUG = False
    AMPARSER_DEBUG_CHECKS = True
    AMPARSER_LEXICON = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'instance', 'desk.lex')


CONFIGS = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
}


def config_by_name(name):
    """Config class for `development`, `production` or `testing`."""
    try:
        return CONFIGS[name]
    except KeyError:
        raise ValueError(f'Unknown configuration {name!r}; expected one of {", ".join(CONFIGS)}')
