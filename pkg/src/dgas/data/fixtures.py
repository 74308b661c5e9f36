"""Access to the bundled data files.

``benign_domains.txt`` is a desk-scale sample of popular domains standing
in for full whitelist snapshots; ``wordlist.txt`` is the default
dictionary for the wordlist generator.
"""
from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..errors import InvalidInputError

_FIXTURES = {"benign_domains", "wordlist"}


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled fixture (without the .txt suffix)."""
    if name not in _FIXTURES:
        raise InvalidInputError(f"unknown fixture {name!r}; have {sorted(_FIXTURES)}")
    return Path(str(resources.files("dgas.data").joinpath(f"fixtures/{name}.txt")))


@lru_cache(maxsize=None)
def bundled_wordlist() -> tuple[str, ...]:
    lines = fixture_path("wordlist").read_text(encoding="utf-8").splitlines()
    return tuple(w for w in (line.strip() for line in lines) if w and not w.startswith("#"))


@lru_cache(maxsize=None)
def bundled_benign_domains() -> tuple[str, ...]:
    lines = fixture_path("benign_domains").read_text(encoding="utf-8").splitlines()
    return tuple(d for d in (line.strip() for line in lines) if d and not d.startswith("#"))
