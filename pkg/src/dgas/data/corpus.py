"""Corpus construction: ingest domain lists, merge aliases, drop
benign/malware conflicts, cap family sizes, and assemble the final
labeled dataset with a manifest of everything that happened.

Sources merge in lexicographic source-tag order with per-source order
preserved, so a corpus build is reproducible regardless of how the
sources were enumerated.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..errors import ConfigurationError, InvalidInputError
from .examples import (
    BENIGN_FAMILY,
    LABEL_BENIGN,
    LABEL_MALWARE,
    DomainExample,
    FamilyAliasTable,
    normalize_domain,
)
from .fixtures import fixture_path
from .generators import DEFAULT_DIFFICULTY, DgaSpec, fnv1a64, generate_dga

DEFAULT_CAPS = {"easy": 40_000, "difficult": 400_000}


def load_domain_list(
    path: str | Path,
    label: str,
    family: str = "",
    alias_table: FamilyAliasTable | None = None,
) -> list[DomainExample]:
    """Read one domain per line, or CSV rows of ``domain,family``.

    Names are trimmed, case-folded, and lose a trailing dot; families are
    canonicalized; duplicate (name, family) pairs collapse to the first
    occurrence. '#' lines are comments.
    """
    path = Path(path)
    aliases = alias_table or FamilyAliasTable()
    if label == LABEL_BENIGN:
        family = BENIGN_FAMILY
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None

    is_csv = path.suffix.lower() == ".csv"
    source = f"file:{path.name}"
    seen: set[tuple[str, str]] = set()
    out: list[DomainExample] = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if is_csv:
            row = next(csv.reader([line]))
            if len(row) != 2:
                raise InvalidInputError(f"{path}:{line_no}: expected 'domain,family'")
            if line_no == 1 and row[0].strip().lower() == "domain":
                continue
            name_field, family_field = row[0].strip(), row[1].strip().lower()
            if not family_field:
                raise InvalidInputError(f"{path}:{line_no}: missing family")
        else:
            name_field, family_field = line, family
        name = normalize_domain(name_field)
        if not name:
            raise InvalidInputError(f"{path}:{line_no}: empty domain name")
        fam = aliases.canonicalize(family_field) if family_field else family
        if label == LABEL_MALWARE and not fam:
            raise InvalidInputError(f"{path}:{line_no}: malware entry without a family")
        key = (name, fam)
        if key in seen:
            continue
        seen.add(key)
        out.append(DomainExample(name, label, fam, source))
    return out


def remove_conflicts(
    benign: Sequence[DomainExample], malware: Sequence[DomainExample]
) -> tuple[list[DomainExample], list[DomainExample], list[str]]:
    """Drop every name that appears on both sides; report the removals."""
    shared = {ex.name for ex in benign} & {ex.name for ex in malware}
    clean_benign = [ex for ex in benign if ex.name not in shared]
    clean_malware = [ex for ex in malware if ex.name not in shared]
    return clean_benign, clean_malware, sorted(shared)


def _family_rng(seed: int, family: str) -> np.random.Generator:
    return np.random.default_rng([seed & (2**63 - 1), fnv1a64(family.encode("utf-8"))])


def _sample_family(
    examples: list[DomainExample], cap: int, seed: int, family: str
) -> list[DomainExample]:
    if len(examples) <= cap:
        return examples
    keep = _family_rng(seed, family).choice(len(examples), size=cap, replace=False)
    keep_set = set(keep.tolist())
    return [ex for i, ex in enumerate(examples) if i in keep_set]


def cap_families(
    examples: Sequence[DomainExample],
    difficulty_of: dict[str, str],
    seed: int,
    caps: dict[str, int] | None = None,
) -> list[DomainExample]:
    """Cap per-family sizes by difficulty; oversized families keep a
    seeded uniform sample (without replacement)."""
    caps = caps or DEFAULT_CAPS
    grouped: dict[str, list[int]] = {}
    for i, ex in enumerate(examples):
        grouped.setdefault(ex.family, []).append(i)
    kept: list[int] = []
    for family, positions in grouped.items():
        difficulty = difficulty_of.get(family)
        if difficulty is None:
            raise ConfigurationError(f"no difficulty tag for family {family!r}")
        if difficulty not in caps:
            raise ConfigurationError(f"no cap configured for difficulty {difficulty!r}")
        cap = caps[difficulty]
        if len(positions) <= cap:
            kept.extend(positions)
        else:
            picked = _family_rng(seed, family).choice(len(positions), size=cap, replace=False)
            kept.extend(positions[i] for i in picked.tolist())
    return [examples[i] for i in sorted(kept)]


@dataclass
class DatasetManifest:
    """Accounting of one corpus build."""

    seed: int
    caps: dict[str, int]
    conflicts_removed: int
    families: dict[str, dict] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(entry["count"] for entry in self.families.values())

    def to_json(self) -> str:
        payload = {
            "format": "dgas-manifest",
            "version": 1,
            "seed": self.seed,
            "caps": self.caps,
            "conflicts_removed": self.conflicts_removed,
            "total": self.total,
            "families": {name: self.families[name] for name in sorted(self.families)},
        }
        return json.dumps(payload, indent=2, sort_keys=True)


@dataclass
class CorpusSpec:
    """Declarative build recipe, loadable from JSON."""

    benign: list[str] = field(default_factory=list)          # paths or builtin: tokens
    malware_files: list[dict] = field(default_factory=list)  # {"path": ..., "family": ...}
    generators: list[DgaSpec] = field(default_factory=list)
    difficulty: dict[str, str] = field(default_factory=dict)
    aliases: dict[str, str] = field(default_factory=dict)
    caps: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_CAPS))


def load_corpus_spec(path: str | Path) -> CorpusSpec:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON: {exc}") from None
    generators = []
    for entry in payload.get("generators", []):
        entry = dict(entry)
        generators.append(
            DgaSpec(
                kind=entry.pop("kind", ""),
                seed=entry.pop("seed", -1),
                family=entry.pop("family", ""),
                date=entry.pop("date", ""),
                count=entry.pop("count", 0),
                params=entry.pop("params", {}),
            )
        )
        if entry:
            raise InvalidInputError(f"{path}: unknown generator fields {sorted(entry)}")
    return CorpusSpec(
        benign=list(payload.get("benign", [])),
        malware_files=list(payload.get("malware_files", [])),
        generators=generators,
        difficulty=dict(payload.get("difficulty", {})),
        aliases=dict(payload.get("aliases", {})),
        caps=dict(payload.get("caps", DEFAULT_CAPS)),
    )


def _resolve_source(token: str) -> Path:
    if token.startswith("builtin:"):
        return fixture_path(token.split(":", 1)[1])
    return Path(token)


def build_corpus(
    spec: CorpusSpec,
    seed: int = 0,
    per_family_limit: int | None = None,
) -> tuple[list[DomainExample], DatasetManifest]:
    """Run the full pipeline: load, merge aliases, drop conflicts, cap.

    ``per_family_limit`` additionally caps every family, the benign side
    included; it exists so small reproducible corpora can be cut from the
    same recipe.
    """
    if not spec.benign:
        raise ConfigurationError("corpus needs at least one benign source")
    if not spec.malware_files and not spec.generators:
        raise ConfigurationError("corpus needs at least one malware source")

    alias_table = FamilyAliasTable(dict(spec.aliases))

    benign: list[DomainExample] = []
    for token in spec.benign:
        benign.extend(load_domain_list(_resolve_source(token), LABEL_BENIGN, alias_table=alias_table))

    malware: list[DomainExample] = []
    difficulty = dict(spec.difficulty)
    for entry in spec.malware_files:
        family = entry.get("family", "")
        loaded = load_domain_list(
            _resolve_source(entry["path"]), LABEL_MALWARE, family=family, alias_table=alias_table
        )
        malware.extend(loaded)
        for ex in loaded:
            if ex.family not in difficulty:
                raise ConfigurationError(f"no difficulty tag for file family {ex.family!r}")
    for gen in spec.generators:
        if gen.seed < 0:
            gen = DgaSpec(
                kind=gen.kind,
                seed=fnv1a64(f"{seed}|{gen.family}".encode("utf-8")) & (2**63 - 1),
                family=gen.family,
                date=gen.date,
                count=gen.count,
                params=gen.params,
            )
        count = gen.count
        if per_family_limit is not None and per_family_limit == 0:
            count = 0
        malware.extend(generate_dga(gen, count))
        difficulty.setdefault(gen.family, DEFAULT_DIFFICULTY[gen.kind])

    # Global (name, family) dedup across sources, first occurrence wins.
    seen: set[tuple[str, str]] = set()
    malware = [ex for ex in malware if not ((ex.name, ex.family) in seen or seen.add((ex.name, ex.family)))]
    benign_seen: set[str] = set()
    benign = [ex for ex in benign if not (ex.name in benign_seen or benign_seen.add(ex.name))]

    benign, malware, removed = remove_conflicts(benign, malware)
    malware = cap_families(malware, difficulty, seed, spec.caps)

    if per_family_limit is not None:
        benign = _sample_family(benign, per_family_limit, seed, BENIGN_FAMILY)
        limited: dict[str, list[DomainExample]] = {}
        for ex in malware:
            limited.setdefault(ex.family, []).append(ex)
        malware = []
        for family in limited:
            malware.extend(_sample_family(limited[family], per_family_limit, seed, family))

    examples = sorted(benign + malware, key=lambda ex: ex.source)

    manifest = DatasetManifest(seed=seed, caps=dict(spec.caps), conflicts_removed=len(removed))
    for ex in examples:
        entry = manifest.families.setdefault(
            ex.family,
            {
                "count": 0,
                "label": ex.label,
                "difficulty": difficulty.get(ex.family),
                "cap": spec.caps.get(difficulty.get(ex.family, ""), None),
            },
        )
        entry["count"] += 1
    return examples, manifest


def write_corpus_csv(examples: Iterable[DomainExample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["name", "label", "family", "source"])
        for ex in examples:
            writer.writerow([ex.name, ex.label, ex.family, ex.source])


def read_corpus_csv(path: str | Path) -> list[DomainExample]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None
    rows = list(csv.reader(text.splitlines()))
    if not rows or rows[0] != ["name", "label", "family", "source"]:
        raise InvalidInputError(f"{path}: missing 'name,label,family,source' header")
    out = []
    for line_no, row in enumerate(rows[1:], 2):
        if len(row) != 4:
            raise InvalidInputError(f"{path}:{line_no}: expected 4 columns")
        out.append(DomainExample(*row))
    return out


def desk_corpus_spec(per_generator: int = 1500) -> CorpusSpec:
    """Recipe for the bundled desk-scale experiment corpus.

    One generator per taxonomy kind. The wordlist family draws from a
    120-word slice of the bundled dictionary, the way real wordlist DGAs
    rotate through subsets of a larger list.
    """
    return CorpusSpec(
        benign=["builtin:benign_domains"],
        generators=[
            DgaSpec(kind="arithmetic", seed=-1, count=per_generator),
            DgaSpec(kind="hash", seed=-1, count=per_generator),
            DgaSpec(
                kind="wordlist",
                seed=-1,
                count=per_generator,
                # TLD mix and hyphenation rate roughly match the benign
                # sample, so the word sequences themselves carry the signal.
                params={
                    "subset_size": 60,
                    "hyphen_chance": 0.14,
                    "tlds": ["com"] * 7 + ["net", "org"],
                },
            ),
            DgaSpec(
                kind="permutation",
                seed=-1,
                count=per_generator,
                params={"base_domain": "westgatepublishing.com"},
            ),
        ],
    )
