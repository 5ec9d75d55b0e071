"""Configuration diagnostics shared by the engine and adversary strategies."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

__all__ = ["ConfigError", "Diagnostic", "error", "warning"]


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" | "warning"
    code: str
    message: str

    @property
    def is_error(self) -> bool:
        return self.level == "error"

    def __str__(self) -> str:
        return f"{self.level}[{self.code}]: {self.message}"


def error(code: str, message: str) -> Diagnostic:
    return Diagnostic("error", code, message)


def warning(code: str, message: str) -> Diagnostic:
    return Diagnostic("warning", code, message)


class ConfigError(ValueError):
    """A simulation config breaks one or more model assumptions."""

    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = [d for d in diagnostics if d.is_error]
        super().__init__("; ".join(str(d) for d in self.diagnostics) or "invalid configuration")
