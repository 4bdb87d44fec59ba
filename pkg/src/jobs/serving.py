"""Serves a model over the scorer protocol on standard streams"""


import sys
from src.utils.io import load_model
from src.utils.scorer import SCORER_TOP_N, serve_model
from src import logger


def serve(model_config: str, top: int = SCORER_TOP_N) -> int:
    """Answers scorer requests from stdin until EOF; returns the request count."""

    model = load_model(model_config)
    try:
        logger.info(f'Serving {model_config} on stdin/stdout')
        n_answered = serve_model(model, sys.stdin, sys.stdout, top=top)
    finally:
        model.close()

    logger.info(f'Answered {n_answered} requests.')
    return n_answered
