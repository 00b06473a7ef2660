"""Three-valued outcomes for statements checked only up to a finite depth."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

SUPPORTED = "supported"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"

EXIT_CODES = {SUPPORTED: 0, REFUTED: 2, INCONCLUSIVE: 3}


class BadEpsilon(ValueError):
    pass


class CapExceeded(RuntimeError):
    """An exact enumeration would exceed the configured size cap."""


@dataclass
class Verdict:
    status: str
    depth: int
    N: int | None = None
    witness: Any = None
    reason: str = ""
    details: dict = field(default_factory=dict)
    folner_flag: bool = False

    @property
    def supported(self) -> bool:
        return self.status == SUPPORTED

    @property
    def refuted(self) -> bool:
        return self.status == REFUTED

    @property
    def inconclusive(self) -> bool:
        return self.status == INCONCLUSIVE

    def __str__(self):
        extra = f" N={self.N}" if self.N is not None else ""
        if self.witness is not None:
            extra += f" witness={self.witness}"
        return f"{self.status}(depth={self.depth}{extra}) {self.reason}".rstrip()


def supported(depth, N=None, reason="", **details) -> Verdict:
    return Verdict(SUPPORTED, depth, N=N, reason=reason, details=details)


def refuted(depth, witness, reason="", **details) -> Verdict:
    return Verdict(REFUTED, depth, witness=witness, reason=reason, details=details)


def inconclusive(depth, reason, **details) -> Verdict:
    return Verdict(INCONCLUSIVE, depth, reason=reason, details=details)


def check_epsilon(eps) -> None:
    if not 0 < eps < 1:
        raise BadEpsilon(f"epsilon must lie strictly between 0 and 1, got {eps}")
