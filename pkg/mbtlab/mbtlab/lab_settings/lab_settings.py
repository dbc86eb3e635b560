# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

import json
import os
from functools import lru_cache
from pathlib import Path

from mbtlab.exceptions import throw
from mbtlab.mbtlab.utils.logger import configure_logging, logger

SCHEMA_PATH = Path(__file__).with_name("lab_settings.json")
CONFIG_ENV = "MBTLAB_CONFIG"
LAYOUT_FIELDTYPES = {"Section Break", "Column Break"}


@lru_cache(maxsize=1)
def get_schema():
	"""Value fields of the settings schema, keyed by fieldname."""
	with open(SCHEMA_PATH) as f:
		meta = json.load(f)
	return {df["fieldname"]: df for df in meta["fields"] if df["fieldtype"] not in LAYOUT_FIELDTYPES}


def coerce_value(df, value):
	"""Convert a raw config value to the type declared by its schema field."""
	fieldname = df["fieldname"]
	fieldtype = df["fieldtype"]
	try:
		if fieldtype == "Int":
			return int(str(value).strip())
		if fieldtype == "Float":
			return float(str(value).strip())
	except ValueError:
		throw(f"Setting {fieldname} expects {fieldtype}, got {value!r}")

	value = "" if value is None else str(value).strip()
	if fieldtype == "Select":
		options = df["options"].split("\n")
		if value not in options:
			throw(f"Setting {fieldname} must be one of {', '.join(options)}, got {value!r}")
	return value


def read_config_file(path):
	"""
	Parse a key=value config file.

	Args:
		path: file path; blank lines and lines starting with # are skipped

	Returns:
		dict of raw string values
	"""
	values = {}
	with open(path) as f:
		for lineno, line in enumerate(f, start=1):
			line = line.strip()
			if not line or line.startswith("#"):
				continue
			if "=" not in line:
				throw(f"{path}:{lineno}: expected key=value, got {line!r}")
			key, value = line.split("=", 1)
			values[key.strip()] = value.strip()
	return values


class LabSettings:
	"""Single settings record for a lab run."""

	def __init__(self, values=None):
		schema = get_schema()
		for fieldname, df in schema.items():
			setattr(self, fieldname, coerce_value(df, df.get("default", "")))
		for key, value in (values or {}).items():
			self.set(key, value)

	def set(self, key, value):
		schema = get_schema()
		if key not in schema:
			throw(f"Unknown setting {key!r}")
		setattr(self, key, coerce_value(schema[key], value))

	def as_dict(self):
		return {fieldname: getattr(self, fieldname) for fieldname in get_schema()}

	def validate(self):
		for fieldname in ("gw_table_cap", "split_table_cap", "backbone_node_cap", "ghp_exact_cap", "bootstrap_resamples"):
			if getattr(self, fieldname) <= 0:
				throw(f"Setting {fieldname} must be positive")
		if not 0 < self.quad_step <= 1:
			throw("Setting quad_step must lie in (0, 1]")
		if self.quad_margin <= 0:
			throw("Setting quad_margin must be positive")
		if self.workers < 0:
			throw("Setting workers must be >= 0")
		if not 0 < self.chi_square_pvalue < 1:
			throw("Setting chi_square_pvalue must lie in (0, 1)")
		return self

	def effective_workers(self):
		"""Worker count with 0 resolved to the available parallelism."""
		if self.workers:
			return self.workers
		return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def get_settings(config_path=None, overrides=None):
	"""
	Build settings from schema defaults, then the config file, then explicit overrides.

	Args:
		config_path: key=value file; falls back to the MBTLAB_CONFIG environment variable
		overrides: dict of values that win over the file (None values are ignored)

	Returns:
		LabSettings, validated, with logging configured from it
	"""
	settings = LabSettings()
	config_path = config_path or os.environ.get(CONFIG_ENV)
	if config_path:
		for key, value in read_config_file(config_path).items():
			settings.set(key, value)
	for key, value in (overrides or {}).items():
		if value is not None:
			settings.set(key, value)
	settings.validate()
	configure_logging(settings.log_level, settings.log_file or None)
	if config_path:
		logger("lab_settings").debug(f"[Settings] Loaded {config_path}")
	return settings
