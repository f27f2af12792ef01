import logging

from sysconfigs.settings import get_log_level

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

logging.basicConfig(level=get_log_level('INFO'), format=LOG_FORMAT)
logger = logging.getLogger('spsolve')


def set_log_level(level: str) -> None:
    logging.getLogger().setLevel(level.upper())
