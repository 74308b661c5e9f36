"""Dataset construction: ingestion, cleaning, and synthetic DGA generators."""
from .corpus import (
    DEFAULT_CAPS,
    CorpusSpec,
    DatasetManifest,
    build_corpus,
    cap_families,
    desk_corpus_spec,
    load_corpus_spec,
    load_domain_list,
    read_corpus_csv,
    remove_conflicts,
    write_corpus_csv,
)
from .examples import (
    BENIGN_FAMILY,
    LABEL_BENIGN,
    LABEL_MALWARE,
    DomainExample,
    FamilyAliasTable,
    normalize_domain,
)
from .fixtures import bundled_benign_domains, bundled_wordlist, fixture_path
from .generators import (
    ALL_KINDS,
    DEFAULT_DIFFICULTY,
    DgaSpec,
    SplitMix64,
    domain_at,
    fnv1a64,
    generate_dga,
    is_valid_domain,
    resolve_words,
)

__all__ = [
    "ALL_KINDS",
    "BENIGN_FAMILY",
    "DEFAULT_CAPS",
    "DEFAULT_DIFFICULTY",
    "CorpusSpec",
    "DatasetManifest",
    "DgaSpec",
    "DomainExample",
    "FamilyAliasTable",
    "LABEL_BENIGN",
    "LABEL_MALWARE",
    "SplitMix64",
    "build_corpus",
    "bundled_benign_domains",
    "bundled_wordlist",
    "cap_families",
    "desk_corpus_spec",
    "domain_at",
    "fixture_path",
    "fnv1a64",
    "generate_dga",
    "is_valid_domain",
    "load_corpus_spec",
    "load_domain_list",
    "normalize_domain",
    "read_corpus_csv",
    "remove_conflicts",
    "resolve_words",
    "write_corpus_csv",
]
