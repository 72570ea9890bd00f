"""Append-only record of mechanism invocations with sequential and parallel composition."""

import json
import logging
import threading
from typing import Iterable, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..exceptions import LedgerViolationError
from .mechanisms import PrivacyBudget


logger = logging.getLogger(__name__)


class LedgerEntry(BaseModel):
    """One mechanism invocation over a contiguous range of sample indices."""

    model_config = ConfigDict(frozen=True)

    mechanism: str = Field(description="Mechanism id, e.g. 'phase-3/x'")
    budget: PrivacyBudget = Field(description="Claimed (epsilon, delta) of this invocation")
    partition: str = Field(description="Dataset partition id")
    start: int = Field(ge=0, description="First sample index covered")
    stop: int = Field(gt=0, description="One past the last sample index covered")
    group: Optional[str] = Field(
        default=None, description="Parallel composition group; None composes sequentially"
    )
    sensitivity: float = Field(default=0.0, ge=0)
    sigma: float = Field(default=0.0, ge=0)
    private: bool = Field(default=True, description="False when recorded in no-noise mode")

    @model_validator(mode="after")
    def check_range(self) -> "LedgerEntry":
        if self.stop <= self.start:
            raise ValueError(f"Empty partition range [{self.start}, {self.stop})")
        return self


class PrivacyLedger:
    """Ordered ledger; totals are a pure function of the entries."""

    def __init__(self, entries: Optional[Iterable[LedgerEntry]] = None):
        self._entries: list[LedgerEntry] = list(entries or [])
        self._lock = threading.Lock()

    def append(self, entry: LedgerEntry) -> None:
        with self._lock:
            self._entries.append(entry)
        logger.debug(
            f"Ledger: {entry.mechanism} ({entry.budget.epsilon:.4g}, {entry.budget.delta:.3g}) "
            f"on {entry.partition}, group={entry.group}"
        )

    def extend(self, other: "PrivacyLedger") -> None:
        """Append every entry of another ledger, e.g. a child algorithm's."""
        for entry in other.entries:
            self.append(entry)

    @property
    def entries(self) -> tuple[LedgerEntry, ...]:
        with self._lock:
            return tuple(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def is_private(self) -> bool:
        return all(entry.private for entry in self.entries)

    def validate(self) -> None:
        """
        Check that every parallel group covers pairwise disjoint partitions.

        Raises:
            LedgerViolationError: On a repeated partition id or overlapping index ranges
        """
        groups: dict[str, list[LedgerEntry]] = {}
        for entry in self.entries:
            if entry.group is not None:
                groups.setdefault(entry.group, []).append(entry)
        for key, members in groups.items():
            ids = [m.partition for m in members]
            if len(set(ids)) != len(ids):
                raise LedgerViolationError(f"Parallel group '{key}' repeats a partition id")
            ranges = sorted((m.start, m.stop, m.partition) for m in members)
            for (_, stop, first), (start, _, second) in zip(ranges, ranges[1:]):
                if start < stop:
                    raise LedgerViolationError(
                        f"Parallel group '{key}' declares overlapping partitions "
                        f"'{first}' and '{second}'"
                    )

    def total(self) -> PrivacyBudget:
        """
        Composed budget of all entries.

        Entries of one parallel group contribute their maximum epsilon and maximum
        delta; groups and sequential entries then add up.

        Raises:
            LedgerViolationError: If a parallel group touches overlapping partitions
        """
        self.validate()
        epsilon = 0.0
        delta = 0.0
        seen: dict[str, tuple[float, float]] = {}
        order: list[str] = []
        for entry in self.entries:
            if entry.group is None:
                epsilon += entry.budget.epsilon
                delta += entry.budget.delta
                continue
            if entry.group not in seen:
                order.append(entry.group)
                seen[entry.group] = (entry.budget.epsilon, entry.budget.delta)
            else:
                eps, dlt = seen[entry.group]
                seen[entry.group] = (max(eps, entry.budget.epsilon), max(dlt, entry.budget.delta))
        for key in order:
            epsilon += seen[key][0]
            delta += seen[key][1]
        # Totals are reported, not re-validated against the (0, 1) range of a configured budget
        return PrivacyBudget.model_construct(epsilon=epsilon, delta=delta)

    def to_jsonl(self) -> str:
        """One JSON object per entry and line."""
        return "".join(entry.model_dump_json() + "\n" for entry in self.entries)

    @classmethod
    def from_jsonl(cls, text: str) -> "PrivacyLedger":
        lines = [line for line in text.splitlines() if line.strip()]
        return cls(LedgerEntry.model_validate(json.loads(line)) for line in lines)


def ledger_total(ledger: PrivacyLedger) -> PrivacyBudget:
    """Composed (epsilon, delta) of a ledger."""
    return ledger.total()
