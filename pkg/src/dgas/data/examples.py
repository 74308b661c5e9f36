"""Labeled domain examples and family-name canonicalization."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigurationError, InvalidInputError

LABEL_BENIGN = "benign"
LABEL_MALWARE = "malware"
BENIGN_FAMILY = "benign"


@dataclass(frozen=True)
class DomainExample:
    """One labeled domain: name, benign/malware label, family, provenance."""

    name: str
    label: str
    family: str
    source: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise InvalidInputError("domain name must be non-empty")
        if self.label not in (LABEL_BENIGN, LABEL_MALWARE):
            raise InvalidInputError(f"unknown label {self.label!r}")
        if self.label == LABEL_MALWARE and self.family == BENIGN_FAMILY:
            raise InvalidInputError("malware examples cannot carry the benign family")


def normalize_domain(name: str) -> str:
    """Trim, lowercase, and drop a single trailing dot."""
    cleaned = name.strip().lower()
    if cleaned.endswith("."):
        cleaned = cleaned[:-1]
    return cleaned


@dataclass
class FamilyAliasTable:
    """Maps feed-specific family names onto canonical ones.

    Canonical names are fixed points, so applying the table twice is the
    same as applying it once.
    """

    canonical_of: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for alias, canonical in self.canonical_of.items():
            target = self.canonical_of.get(canonical, canonical)
            if target != canonical:
                raise ConfigurationError(
                    f"canonical name {canonical!r} is itself aliased to {target!r}"
                )

    def canonicalize(self, family: str) -> str:
        return self.canonical_of.get(family, family)

    @classmethod
    def from_csv(cls, path: str | Path) -> "FamilyAliasTable":
        """Two-column CSV: alias,canonical. '#' lines are comments."""
        mapping: dict[str, str] = {}
        for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip().lower() for p in line.split(",")]
            if len(parts) != 2 or not all(parts):
                raise InvalidInputError(f"{path}:{line_no}: expected 'alias,canonical'")
            mapping[parts[0]] = parts[1]
        return cls(mapping)
