import logging
from functools import lru_cache

from flask import Blueprint, current_app, jsonify, request

from amparser.formats import FormatError, read_lexicon
from amparser.services import DecoderSettings, ParsingService, load_lexicon

logger = logging.getLogger(__name__)

api_bp = Blueprint('api', __name__)


@lru_cache(maxsize=8)
def _configured_lexicon(path):
    return load_lexicon(path)


def _lexicon(data):
    """Lexicon text from the request body, else the configured lexicon file. Body text is never a path."""
    text = data.get('lexicon')
    if text:
        if not isinstance(text, str):
            raise FormatError('lexicon must be a string')
        return read_lexicon(text, name='request')
    return _configured_lexicon(current_app.config['AMPARSER_LEXICON'])


def _body():
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        return None
    return data


def _bad_request(message):
    return jsonify({'success': False, 'error': message}), 400


def _respond(result, failure_status=400):
    payload = {key: value for key, value in result.items() if key not in ('records', 'exit_code')}
    return jsonify(payload), 200 if result['success'] else failure_status


@api_bp.route('/health')
def health():
    """Health check endpoint for deployment monitoring."""
    return {'status': 'healthy'}, 200


@api_bp.route('/api/evaluate', methods=['POST'])
def evaluate():
    """Type-check and evaluate a tree file; 422 when a tree is ill-typed."""
    data = _body()
    if data is None or not data.get('tree'):
        return _bad_request('Expected a JSON body with a "tree" field')
    try:
        lexicon = _lexicon(data)
    except (FormatError, OSError) as e:
        return _bad_request(f'Invalid lexicon: {e}')
    result = ParsingService.evaluate(data['tree'], lexicon)
    return _respond(result, failure_status=422 if result.get('reports') else 400)


@api_bp.route('/api/parse', methods=['POST'])
def parse():
    """Decode a cost file; decoder knobs come from the body, defaults from the app config."""
    data = _body()
    if data is None or not data.get('costs'):
        return _bad_request('Expected a JSON body with a "costs" field')
    try:
        lexicon = _lexicon(data)
        settings = DecoderSettings.from_config(
            current_app.config,
            decoder=data.get('decoder'),
            heuristic=data.get('heuristic'),
            k_supertags=data.get('k_supertags'),
            dequeue_limit=data.get('dequeue_limit'),
            beam=data.get('beam'),
            type_check=data.get('type_check'),
            augment=data.get('augment'),
            trace=data.get('trace'),
        )
    except (FormatError, OSError, TypeError, ValueError) as e:
        return _bad_request(str(e))
    result = ParsingService.parse(data['costs'], lexicon, settings)
    if result['success']:
        logger.info(f'API parse: {result["report"]["totals"]["sentences"]} sentences with {settings.decoder}')
    return _respond(result)


@api_bp.route('/api/oracle', methods=['POST'])
def oracle():
    """Transition sequences that build the given trees."""
    data = _body()
    if data is None or not data.get('tree'):
        return _bad_request('Expected a JSON body with a "tree" field')
    try:
        lexicon = _lexicon(data)
    except (FormatError, OSError) as e:
        return _bad_request(f'Invalid lexicon: {e}')
    result = ParsingService.oracle(data['tree'], lexicon, data.get('system', 'ltf'), bool(data.get('augment')))
    return _respond(result)
