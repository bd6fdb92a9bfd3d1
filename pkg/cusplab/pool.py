"""
Fixed set of worker threads that hand results back in submission order
"""
import logging
import queue
import threading
import traceback

from queue import Queue as ThreadQueue

log = logging.getLogger('cusplab.pool')


class PoolTask(object):
    def __init__(self, index, label, func, args):
        self.index = index
        self.label = label
        self.func = func
        self.args = args
        self.value = None
        self.error = None
        self.trace = None


class OrderedPool(object):
    """
    Runs independent per-member jobs on background threads. Results are
    collected by submission index, so the output order never depends on
    scheduling.
    """
    def __init__(self, workers=4):
        self.workers = max(1, int(workers))
        self.input_queue = ThreadQueue()
        self.results_lock = threading.Lock()
        self.results = {}
        self.threads = []
        self.active = False

    def start(self):
        self.input_queue = ThreadQueue()
        self.active = True
        for _ in range(self.workers):
            thread = threading.Thread(target=OrderedPool.thread, args=(self,))
            thread.daemon = True
            thread.start()
            self.threads.append(thread)

    def stop(self):
        self.active = False
        for _ in self.threads:
            self.input_queue.put(None)
        for thread in self.threads:
            thread.join()
        self.threads = []

    def thread(self):
        while self.active:
            try:
                task = self.input_queue.get(timeout=1)
            except queue.Empty:
                continue
            if task is None:
                self.input_queue.task_done()
                break
            self._run(task)
            with self.results_lock:
                self.results[task.index] = task
            self.input_queue.task_done()

    @staticmethod
    def _run(task):
        try:
            task.value = task.func(*task.args)
        except Exception as exc:
            task.error = exc
            task.trace = traceback.format_exc()
            log.error('task %s failed: %s', task.label, task.trace)

    def map(self, func, items, labels=None):
        """
        Call func(item) for every item and return the PoolTask list in input
        order. A single worker runs inline on the calling thread.
        """
        items = list(items)
        labels = list(labels) if labels is not None else [str(i) for i in range(len(items))]
        tasks = [PoolTask(i, labels[i], func, (item,)) for i, item in enumerate(items)]
        if self.workers == 1 or len(tasks) <= 1:
            for task in tasks:
                self._run(task)
            return tasks

        self.results = {}
        self.start()
        try:
            for task in tasks:
                self.input_queue.put(task)
            self.input_queue.join()
        finally:
            self.stop()
        with self.results_lock:
            return [self.results[i] for i in range(len(tasks))]

    def map_values(self, func, items, labels=None):
        """Like map() but re-raises the first failure in input order"""
        tasks = self.map(func, items, labels)
        for task in tasks:
            if task.error is not None:
                raise task.error
        return [task.value for task in tasks]
