"""Backend that answers from a previously recorded transcript."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from ..errors import FixtureExhausted, ReplayMismatch
from .base import DecisionRequest, Reasoner, load_transcript_records


class ReplayReasoner(Reasoner):
    """Hands back recorded raw replies in order.

    ``records`` may be plain strings (raw replies, no kind check) or
    transcript records as written by :meth:`Transcript.to_jsonl`, in which case
    each request's kind must equal the recorded kind.
    """

    name = "replay"

    def __init__(self, records: Iterable[str | dict]):
        super().__init__()
        self._records = list(records)
        self._cursor = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "ReplayReasoner":
        return cls(load_transcript_records(Path(path)))

    @property
    def remaining(self) -> int:
        return len(self._records) - self._cursor

    def _complete(self, request: DecisionRequest, prompt: str) -> tuple[str, dict | None]:
        if self._cursor >= len(self._records):
            raise FixtureExhausted(f"no recorded reply left for {request.kind.value} "
                                   f"(used {len(self._records)})")
        record = self._records[self._cursor]
        self._cursor += 1
        if isinstance(record, str):
            return record, None
        if record.get("kind") != request.kind.value:
            raise ReplayMismatch(f"record {self._cursor - 1} is {record.get('kind')!r}, "
                                 f"request is {request.kind.value!r}")
        return record["raw"], record.get("tokens")
