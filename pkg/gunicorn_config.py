import multiprocessing
import os

bind = os.getenv('QT_BIND', '0.0.0.0:8000')  # 绑定的IP和端口
# 退火是 CPU 密集型, 每个核一个进程
workers = multiprocessing.cpu_count()
threads = 1
worker_class = 'sync'
timeout = int(float(os.getenv('QT_REMOTE_TIMEOUT', '60'))) + 30

accesslog = '-'
errorlog = '-'
loglevel = os.getenv('QT_LOG_LEVEL', 'info').lower()
