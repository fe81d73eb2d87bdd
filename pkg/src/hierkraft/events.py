"""Event records shared by the allocator, the insurance wrapper and the replayer."""

from __future__ import annotations

from dataclasses import dataclass

from .dyadic import DyadicInterval


@dataclass(frozen=True)
class Alloc:
    node: int
    interval: DyadicInterval
    seq: int

    def line(self) -> str:
        return f"alloc {self.node} {self.interval.serialize()} {self.seq}"


@dataclass(frozen=True)
class Burn:
    interval: DyadicInterval
    seq: int

    def line(self) -> str:
        return f"burn {self.interval.serialize()} {self.seq}"


@dataclass(frozen=True)
class Error:
    kind: str
    seq: int

    def line(self) -> str:
        return f"error {self.kind} {self.seq}"


Event = Alloc | Burn | Error
