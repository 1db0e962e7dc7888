"""Verification reports shared by the synthesis and checking code."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

ARTIFACT_VERSION = "0.1.0"


@dataclass(frozen=True)
class Check:
    """One named check.

    ``expected_fail`` marks a negative control: the check passes when the
    underlying condition is violated.
    """

    name: str
    ok: bool
    residual: float = 0.0
    details: str = ""
    expected_fail: bool = False

    @property
    def passed(self) -> bool:
        return self.ok != self.expected_fail

    def to_dict(self) -> dict[str, Any]:
        details = self.details
        if self.expected_fail:
            details = f"expected-fail; condition {'held' if self.ok else 'violated'}" + (
                f"; {details}" if details else ""
            )
        residual = float(self.residual)
        return {
            "name": self.name,
            "pass": bool(self.passed),
            "residual": residual if math.isfinite(residual) else str(residual),
            "details": details,
        }


@dataclass
class VerificationReport:
    code_name: str = ""
    checks: list[Check] = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, ok: bool, residual: float = 0.0, details: str = "", expected_fail: bool = False) -> Check:
        check = Check(name, bool(ok), float(residual), details, expected_fail)
        self.checks.append(check)
        return check

    def extend(self, other: "VerificationReport", prefix: str = "") -> "VerificationReport":
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.ok, c.residual, c.details, c.expected_fail))
        return self

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def __bool__(self) -> bool:
        return self.overall

    def to_dict(self) -> dict[str, Any]:
        return {
            "artifact_version": ARTIFACT_VERSION,
            "code_name": self.code_name,
            "checks": [c.to_dict() for c in self.checks],
            "overall": self.overall,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def summary(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}  residual={c.residual:.3g}" for c in self.checks]
        lines.append(f"overall: {'PASS' if self.overall else 'FAIL'}")
        return "\n".join(lines)
