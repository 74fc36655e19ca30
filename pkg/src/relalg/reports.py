"""Check verdicts and the JSON-lines report schema."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

REPORT_KEYS = ("kind", "subject", "result", "witness")


@dataclass(frozen=True)
class Verdict:
    ok: bool
    witness: Any = None
    reason: str = ""
    failures: tuple = field(default=())

    def __bool__(self) -> bool:
        return self.ok


PASS = Verdict(True)


def report_line(kind: str, subject: str, result: bool, witness: Any = None, **detail: Any) -> str:
    """One report object, serialized with sorted keys and no spaces."""
    obj: dict[str, Any] = {"kind": kind, "subject": subject, "result": bool(result), "witness": witness}
    if detail:
        obj["detail"] = detail
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_jsonable)


def _jsonable(x: Any) -> Any:
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    if isinstance(x, tuple):
        return list(x)
    return str(x)


def validate_report(obj: Any) -> list[str]:
    """Problems with a decoded report object against the documented schema."""
    problems = []
    if not isinstance(obj, dict):
        return ["report is not an object"]
    for key in REPORT_KEYS:
        if key not in obj:
            problems.append(f"missing key {key!r}")
    extra = set(obj) - set(REPORT_KEYS) - {"detail"}
    if extra:
        problems.append(f"unexpected keys {sorted(extra)}")
    if not isinstance(obj.get("kind"), str):
        problems.append("kind must be a string")
    if not isinstance(obj.get("subject"), str):
        problems.append("subject must be a string")
    if not isinstance(obj.get("result"), bool):
        problems.append("result must be a boolean")
    if "detail" in obj and not isinstance(obj["detail"], dict):
        problems.append("detail must be an object")
    return problems
