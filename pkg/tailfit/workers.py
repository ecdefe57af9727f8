# -*- coding: UTF-8 -*-
#!/usr/bin/env python

import os
import threading
import traceback

from PyQt5.QtCore import QRunnable, QThreadPool

from tailfit.conf import THREADS_ENV
from tailfit.defaults import THREADS
from tailfit.helpers import Logger
from tailfit.utils import split_list

logger = Logger(__name__)


def thread_count(requested=None):
    """Worker count: explicit request, then TAILFIT_THREADS, then the default."""
    if requested:
        return max(1, int(requested))
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            logger.warning("Ignoring invalid {}={!r}".format(THREADS_ENV, value))
    return THREADS


def call(func, item):
    """
    Run ``func(item)`` and wrap the outcome in a result dict; a worker never
    lets an exception escape its thread.
    """
    try:
        data = func(item)
    except Exception as e:
        logger.debug("Work item {!r} failed: {}".format(item, e))
        return {"ok": False, "data": None, "error": e, "message": str(e) or type(e).__name__}
    return {"ok": True, "data": data, "error": None, "message": None}


class Worker(QRunnable):
    activeCount = 0
    _lock = threading.Lock()

    def __init__(self, func, queue, slots, results):
        super(Worker, self).__init__()
        self.setAutoDelete(False)
        self._func = func
        self._queue = queue
        self._slots = slots
        self._results = results

    def run(self):
        with Worker._lock:
            Worker.activeCount += 1
            logger.debug("Worker started on {} items, {} active".format(len(self._queue), Worker.activeCount))
        try:
            for slot, item in zip(self._slots, self._queue):
                self._results[slot] = call(self._func, item)
        except BaseException:
            # Qt aborts the process on an exception leaving run()
            logger.error(traceback.format_exc())
        finally:
            with Worker._lock:
                Worker.activeCount -= 1


def run_parallel(func, items, threads=None):
    """
    Apply ``func`` to every item on a pool of ``threads`` workers.

    Items are split into contiguous queues, one per worker, and the result
    dicts come back in item order whatever the scheduling was.
    """
    items = list(items)
    threads = thread_count(threads)
    if threads == 1 or len(items) <= 1:
        return [call(func, item) for item in items]
    results = [None] * len(items)
    pool = QThreadPool()
    pool.setMaxThreadCount(threads)
    workers = []
    offset = 0
    for queue in split_list(items, threads):
        slots = range(offset, offset + len(queue))
        offset += len(queue)
        workers.append(Worker(func, queue, slots, results))
    for worker in workers:
        pool.start(worker)
    pool.waitForDone()
    for i, result in enumerate(results):
        if result is None:
            results[i] = {"ok": False, "data": None, "error": None, "message": "worker aborted"}
    return results
