import logging
from os import environ
from dotenv import load_dotenv


load_dotenv('.env')

__version__ = '0.3.0'

logging.basicConfig(
    level=environ.get('LOG_LEVEL', 'INFO').upper(),
    format='%(asctime)s [%(levelname)s]: %(message)s',
    handlers=[
        logging.StreamHandler()
    ]
)

logger = logging.getLogger(__name__)
