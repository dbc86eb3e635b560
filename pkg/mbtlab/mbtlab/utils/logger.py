# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

import logging
from logging.handlers import RotatingFileHandler

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"

_configured = False


def configure_logging(level="INFO", log_file=None):
	"""Attach handlers to the `mbtlab` root logger. Safe to call again with new values."""
	global _configured
	root = logging.getLogger("mbtlab")
	for handler in list(root.handlers):
		root.removeHandler(handler)
		handler.close()

	stream = logging.StreamHandler()
	stream.setFormatter(logging.Formatter(LOG_FORMAT))
	root.addHandler(stream)

	if log_file:
		file_handler = RotatingFileHandler(log_file, maxBytes=1_000_000, backupCount=5)
		file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
		root.addHandler(file_handler)

	root.setLevel(level)
	root.propagate = False
	_configured = True
	return root


def logger(module="mbtlab"):
	"""
	Return the logger for `module` under the `mbtlab` namespace.

	Args:
		module: short component name, e.g. "mb_engine"

	Returns:
		logging.Logger
	"""
	if not _configured:
		configure_logging()
	name = module if module.startswith("mbtlab") else f"mbtlab.{module}"
	return logging.getLogger(name)


def log_error(title, message):
	"""Record a failed job on the error logger."""
	logger("errors").error(f"{title}: {message}")
