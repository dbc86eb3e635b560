# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
Exception hierarchy shared by every component.
Each class carries the process exit code the command line reports for it.
"""


class MBTLabError(Exception):
	code = 1

	def to_record(self):
		"""Machine-readable error record printed by the command line."""
		return {"error": type(self).__name__, "code": self.code, "message": str(self)}


class UnknownModelError(MBTLabError):
	code = 3


class ValidationError(MBTLabError):
	code = 4


class UnsupportedSizeError(MBTLabError):
	code = 5


class BudgetExceededError(MBTLabError):
	code = 6


class NumericalError(MBTLabError):
	code = 7


def throw(msg, exc=ValidationError):
	"""Raise `exc` with `msg`; the single call style for domain validation."""
	raise exc(msg)
