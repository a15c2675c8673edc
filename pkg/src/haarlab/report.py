"""Check records and their JSON-lines / CSV serialization."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .grid import GridInterval


@dataclass(frozen=True)
class CheckRecord:
    check: str
    label: str
    passed: bool
    witness: tuple = ()
    detail: str = ""

    @classmethod
    def fail(cls, check: str, label: str, witness: Sequence = (), detail: str = "") -> "CheckRecord":
        return cls(check, label, False, tuple(_triple(w) for w in witness), detail)

    @classmethod
    def ok(cls, check: str, label: str, detail: str = "") -> "CheckRecord":
        return cls(check, label, True, (), detail)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "label": self.label,
            "passed": self.passed,
            "witness": [list(w) if isinstance(w, tuple) else w for w in self.witness],
            "detail": self.detail,
        }


def _triple(w):
    if isinstance(w, GridInterval):
        return w.as_triple()
    return w if isinstance(w, (str, int, tuple)) else str(w)


@dataclass
class Report:
    records: list[CheckRecord] = field(default_factory=list)

    def add(self, record: CheckRecord) -> None:
        self.records.append(record)

    def extend(self, records: Iterable[CheckRecord]) -> None:
        self.records.extend(records)

    def merge(self, other: "Report") -> "Report":
        return Report(self.records + other.records)

    @property
    def violations(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.passed]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.records)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in self.records)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "label", "passed", "witness", "detail"])
        for r in self.records:
            wit = ";".join(":".join(map(str, t)) if isinstance(t, tuple) else str(t) for t in r.witness)
            w.writerow([r.check, r.label, int(r.passed), wit, r.detail])
        return buf.getvalue()
