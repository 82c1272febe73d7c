"""Deterministic content scanning that turns text into danger flags.

A matcher holds a list of case-insensitive regex patterns, each tagged with
the flag it raises and the attribute keys it applies to. Scanning happens
once, at ingestion time; the audit rules afterwards only ever look at the
resulting danger_flags lists, never at raw text.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .errors import IngestionError


@dataclass(frozen=True)
class DangerPattern:
    flag: str
    pattern: str
    applies_to: tuple

    def to_dict(self) -> dict:
        return {
            "flag": self.flag,
            "pattern": self.pattern,
            "applies_to": list(self.applies_to),
        }


class DangerMatcher:
    """Applies a pattern pack to element attributes."""

    def __init__(self, patterns):
        self.patterns = tuple(patterns)
        self._compiled = []
        for item in self.patterns:
            try:
                compiled = re.compile(item.pattern, re.IGNORECASE)
            except re.error as exc:
                raise IngestionError(
                    f"bad danger pattern for flag {item.flag!r}: {exc}"
                ) from None
            self._compiled.append((item, compiled))

    def scan(self, attributes: dict) -> list:
        """Return the sorted set of flags raised by the given attributes."""
        hits = set()
        for item, compiled in self._compiled:
            for key in item.applies_to:
                value = attributes.get(key)
                if value is None:
                    continue
                for text in _texts_of(value):
                    if compiled.search(text):
                        hits.add(item.flag)
                        break
                if item.flag in hits:
                    break
        return sorted(hits)

    def to_dict(self) -> dict:
        return {"patterns": [p.to_dict() for p in self.patterns]}

    @classmethod
    def from_dict(cls, doc: dict) -> "DangerMatcher":
        try:
            raw = doc["patterns"]
        except (TypeError, KeyError):
            raise IngestionError("matcher pack needs a patterns list") from None
        patterns = []
        for entry in raw:
            try:
                patterns.append(
                    DangerPattern(
                        flag=str(entry["flag"]),
                        pattern=str(entry["pattern"]),
                        applies_to=tuple(entry["applies_to"]),
                    )
                )
            except (TypeError, KeyError) as missing:
                raise IngestionError(
                    f"matcher pattern entry is missing field {missing}"
                ) from None
        return cls(patterns)

    @classmethod
    def from_json(cls, text: str) -> "DangerMatcher":
        return cls.from_dict(json.loads(text))


def _texts_of(value):
    if isinstance(value, str):
        yield value
    elif isinstance(value, dict):
        for key in sorted(value):
            yield str(value[key])
    elif isinstance(value, (list, tuple)):
        for item in value:
            yield str(item)


# ---------------------------------------------------------------------------
# default pack
# ---------------------------------------------------------------------------

FLAG_DESTRUCTIVE = "destructive_command"
FLAG_EXFILTRATION = "exfiltration_endpoint"
FLAG_CONFIRMATION_BYPASS = "confirmation_bypass"
FLAG_PRIVILEGE_CLAIM = "privilege_claim"
FLAG_CODE_EXECUTION = "external_code_execution"

_DEFAULT_PATTERNS = (
    DangerPattern(
        FLAG_DESTRUCTIVE,
        r"\brm\s+-\w*r\w*f\b|\brm\s+-\w*f\w*r\b|\brmtree\b|\bdel\s+/s\b|\bformat\s+c:",
        ("content", "parameters"),
    ),
    # any URL inside tool parameters is suspect; in prose we require an
    # exfiltration verb nearby so plain informational links stay clean
    DangerPattern(FLAG_EXFILTRATION, r"https?://\S+", ("parameters",)),
    DangerPattern(
        FLAG_EXFILTRATION,
        r"(?:post|upload|send|transmit|curl|exfiltrat)\w*[^.\n]{0,80}?https?://\S+",
        ("content",),
    ),
    DangerPattern(
        FLAG_CONFIRMATION_BYPASS,
        r"without\s+(?:user\s+|asking\s+for\s+)?confirmation"
        r"|skip(?:ping)?\s+(?:the\s+)?confirmation"
        r"|no\s+confirmation"
        r"|never\s+ask\s+the\s+user"
        r"|bypass\s+(?:the\s+)?(?:confirmation|approval)"
        r"|pre-?approved",
        ("content", "parameters"),
    ),
    DangerPattern(
        FLAG_PRIVILEGE_CLAIM,
        r"full\s+authority"
        r"|(?:admin(?:istrator)?|elevated|system-?level)\s+(?:privileges?|authority|rights|access)"
        r"|admin(?:istrator)?(?:'s)?\s+(?:full\s+)?authority"
        r"|you\s+are\s+now\s+the\s+\w+\s+administrator"
        r"|forged\s+authority",
        ("content", "parameters"),
    ),
    DangerPattern(
        FLAG_CODE_EXECUTION,
        r"\b(?:python3?|bash|sh|node)\s+\S+\.(?:py|sh|js)\b"
        r"|\bexec(?:ute)?\s+(?:the\s+)?(?:file|script)\b"
        r"|\beval\s*\(",
        ("content", "parameters"),
    ),
)


def default_matcher() -> DangerMatcher:
    return DangerMatcher(_DEFAULT_PATTERNS)
