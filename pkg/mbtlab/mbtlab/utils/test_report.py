# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

import logging

import pytest

from mbtlab.exceptions import ValidationError
from mbtlab.mbtlab.utils.jobs import job
from mbtlab.mbtlab.utils.report import RULE, CheckResult, all_passed, check, render_report


def test_check_directions():
	assert check("gap", 0.01, 0.05).passed
	assert not check("gap", 0.1, 0.05).passed
	assert check("p-value", 0.2, 0.001, below=False).passed
	assert not check("p-value", 1e-5, 0.001, below=False).passed


def test_check_line():
	line = check("Triangle inequality", 0.0, 1e-9, "max violation").line()
	assert line.startswith("PASS  Triangle inequality")
	assert "threshold=1e-09" in line
	assert line.endswith("max violation")
	assert CheckResult("flag", False).line() == "FAIL  flag"


def test_render_report():
	sections = {"pmf": [check("a", 0.0, 1.0)], "ghp": [check("b", 2.0, 1.0), check("c", 0.0, 1.0)]}
	text = render_report("Validation report", sections)
	lines = text.splitlines()
	assert lines[:3] == [RULE, "VALIDATION REPORT", RULE]
	assert "2/3 checks passed" in lines
	assert not all_passed(sections)
	assert all_passed({"pmf": sections["pmf"]})


def test_job_logs_and_reraises(caplog):
	root = logging.getLogger("mbtlab")
	root.addHandler(caplog.handler)
	try:
		with caplog.at_level(logging.INFO, logger="mbtlab"):
			with job("Sample", module="tests"):
				pass
			with pytest.raises(ValidationError):
				with job("Sample", title="Error in sampling", module="tests"):
					raise ValidationError("bad size")
	finally:
		root.removeHandler(caplog.handler)
	messages = [r.getMessage() for r in caplog.records]
	assert "[Sample] Job started" in messages
	assert any(m.startswith("[Sample] Job completed successfully (Duration: ") for m in messages)
	assert any(m.startswith("[Sample] Job failed") and "bad size" in m for m in messages)
	assert "Error in sampling: bad size" in messages
