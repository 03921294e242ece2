"""Named pass/fail checks shared by the validation operations."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class Check:
    name: str
    passed: bool
    value: float | None = None
    limit: float | None = None
    detail: str = ""

    def as_dict(self) -> dict:
        return {"passed": bool(self.passed), "value": self.value,
                "limit": self.limit, "detail": self.detail}


class Report(dict):
    """Ordered mapping of check name -> Check."""

    def add(self, check: Check) -> Check:
        self[check.name] = check
        return check

    def merge(self, other: "Report", prefix: str = "") -> "Report":
        for name, chk in other.items():
            self[prefix + name] = Check(prefix + name, chk.passed, chk.value, chk.limit, chk.detail)
        return self

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.values())

    def failed(self) -> list[str]:
        return [n for n, c in self.items() if not c.passed]

    def as_dict(self) -> dict:
        return {n: c.as_dict() for n, c in self.items()}

    def table(self) -> str:
        width = max((len(n) for n in self), default=4)
        lines = []
        for n, c in self.items():
            val = "" if c.value is None else f"{c.value:.6g}"
            lim = "" if c.limit is None else f"{c.limit:.3g}"
            status = "pass" if c.passed else "FAIL"
            lines.append(f"{n:<{width}}  {status}  {val:>14}  {lim:>10}  {c.detail}".rstrip())
        return "\n".join(lines)
