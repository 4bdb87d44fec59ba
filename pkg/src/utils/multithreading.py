"""Multithreading functions"""


import threading
from queue import Queue
from src import logger


_STOP = object()


def parallel_execute(func, args, num_threads=1, **kwargs):
    """Runs the operation over every argument using multiple threads.

    Parameters
    ----------
    func : function
        The function to execute in multiple threads.

    args : list
        A list of values to use per function call.

    num_threads : int, default 1
        The number of threads in parallel to use. With 1 thread the calls run
        in the calling thread.

    **kwargs
        Additional keyword arguments to pass to the provided function.

    Returns
    -------
    results : list
        The return value of each call, in the order of ``args`` regardless of
        which thread finished first.

    Raises
    ------
    Exception
        The exception of the earliest failing argument (in input order), after
        all other work has drained.

    """

    args = list(args)
    results = [None] * len(args)
    caught_exceptions = []

    if num_threads <= 1 or len(args) <= 1:
        for idx, a in enumerate(args):
            try:
                results[idx] = func(a, **kwargs)
            except Exception as e:
                caught_exceptions.append((idx, e))

    else:
        lock = threading.Lock()

        def run_func(queue):
            while True:
                item = queue.get(block=True)
                if item is _STOP:
                    queue.task_done()
                    return
                idx, arg = item
                try:
                    results[idx] = func(arg, **kwargs)
                except Exception as e:
                    with lock:
                        caught_exceptions.append((idx, e))

                queue.task_done()

        # Create queue and fill up with tasks
        queue = Queue()
        for idx, a in enumerate(args):
            logger.debug('Adding to queue: {}'.format(idx))
            queue.put((idx, a))

        # Create threads
        n_workers = min(num_threads, len(args))
        for i in range(n_workers):
            logger.debug('Creating thread: {}'.format(i+1))
            worker = threading.Thread(target=run_func, args=(queue,), daemon=True)
            worker.start()

        # Wait until queue is empty, then release the workers
        queue.join()
        for _ in range(n_workers):
            queue.put(_STOP)
        queue.join()

    # Check if any exceptions occurred
    if len(caught_exceptions) > 0:
        logger.warning('{} errors occurred.'.format(len(caught_exceptions)))
        raise min(caught_exceptions, key=lambda pair: pair[0])[1]

    return results
