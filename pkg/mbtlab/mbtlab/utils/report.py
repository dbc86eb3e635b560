# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""Plain-text PASS/FAIL reports of validation checks."""

from dataclasses import dataclass

RULE = "=" * 70
THIN_RULE = "-" * 70


@dataclass(frozen=True)
class CheckResult:
	name: str
	passed: bool
	value: float | None = None
	threshold: float | None = None
	detail: str = ""

	def line(self):
		status = "PASS" if self.passed else "FAIL"
		parts = [f"{status}  {self.name}"]
		if self.value is not None:
			parts.append(f"value={_fmt(self.value)}")
		if self.threshold is not None:
			parts.append(f"threshold={_fmt(self.threshold)}")
		if self.detail:
			parts.append(self.detail)
		return "  ".join(parts)


def _fmt(x):
	return f"{x:.6g}" if isinstance(x, float) else str(x)


def check(name, value, threshold, detail="", below=True):
	"""CheckResult passing when value <= threshold (or >= when below is False)."""
	passed = value <= threshold if below else value >= threshold
	return CheckResult(name, bool(passed), float(value), float(threshold), detail)


def render_report(title, sections):
	"""
	Args:
		title: report heading
		sections: mapping of section name -> list of CheckResult

	Returns:
		the rendered report as a string
	"""
	lines = [RULE, title.upper(), RULE]
	passed = total = 0
	for name, checks in sections.items():
		lines += ["", name, THIN_RULE]
		for c in checks:
			lines.append(c.line())
			passed += c.passed
			total += 1
	lines += ["", RULE, f"{passed}/{total} checks passed", RULE]
	return "\n".join(lines)


def all_passed(sections):
	return all(c.passed for checks in sections.values() for c in checks)
