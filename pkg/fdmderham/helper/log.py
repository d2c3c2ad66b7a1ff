import logging
from threading import Lock

collector = None


def init_collector(names, level=logging.WARNING):
    '''
    Attaches a single MessageCollector to the named loggers
    '''
    global collector
    if collector is None:
        collector = MessageCollector(level=level)
        for n in names:
            logging.getLogger(n).addHandler(collector)
    return collector


def remove_collector(names):
    global collector
    if collector is not None:
        for n in names:
            logging.getLogger(n).removeHandler(collector)
    collector = None


def get_messages():
    if collector is None:
        return []
    return list(collector.messages)


class MessageCollector(logging.Handler):

    def __init__(self, level=logging.NOTSET):
        super(MessageCollector, self).__init__(level=level)
        self._lock = Lock()
        self.messages = []

    def emit(self, record):
        message = f'{record.levelname}: {record.getMessage()}'
        with self._lock:
            self.messages.append(message)
