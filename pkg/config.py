import logging
import os

from dotenv import load_dotenv

load_dotenv()

LOG_LEVEL = os.getenv('QT_LOG_LEVEL', 'INFO').upper()
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

# 远程求解服务地址, 未设置时只使用本地退火
REMOTE_SOLVER_URL = os.getenv('QT_REMOTE_SOLVER_URL', '')
REMOTE_TIMEOUT = float(os.getenv('QT_REMOTE_TIMEOUT', '60'))
WORKERS = int(os.getenv('QT_WORKERS', '1'))
VAR_BUDGET = int(os.getenv('QT_VAR_BUDGET', '8192'))


def setup_logging(level: str = LOG_LEVEL):
    logging.basicConfig(level=level, format=LOG_FORMAT)
