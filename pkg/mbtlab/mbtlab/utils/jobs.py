# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

import time
from contextlib import contextmanager

from mbtlab.mbtlab.utils.logger import log_error, logger


@contextmanager
def job(tag, title=None, module="jobs"):
	"""
	Log start, completion and failure of a long-running job with its duration.

	Failures are recorded with log_error and re-raised.
	"""
	log = logger(module)
	start = time.perf_counter()
	log.info(f"[{tag}] Job started")
	try:
		yield log
	except Exception as e:
		duration = time.perf_counter() - start
		log.error(f"[{tag}] Job failed (Duration: {duration:.2f}s) - Error: {e}")
		log_error(title or f"Error in {tag}", str(e))
		raise
	duration = time.perf_counter() - start
	log.info(f"[{tag}] Job completed successfully (Duration: {duration:.2f}s)")
