"""Deterministic synthetic DGA generators, one per taxonomy class.

Four generation styles cover the landscape of real malware generators:

* ``arithmetic``  — a linear congruential generator drives character
  selection over a configurable alphabet.
* ``hash``        — iterated 64-bit FNV-1a of (seed | date | index),
  rendered as a hex-digest prefix.
* ``wordlist``    — concatenation of dictionary words chosen from a
  (possibly subsetted) wordlist.
* ``permutation`` — a seeded shuffle of the label of a base domain.

Every emitted name is a pure function of (kind, seed, date, params,
index); no global randomness is involved anywhere.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date as date_type

from ..errors import ConfigurationError
from .examples import LABEL_MALWARE, DomainExample

KIND_ARITHMETIC = "arithmetic"
KIND_HASH = "hash"
KIND_WORDLIST = "wordlist"
KIND_PERMUTATION = "permutation"
ALL_KINDS = (KIND_ARITHMETIC, KIND_HASH, KIND_WORDLIST, KIND_PERMUTATION)

# Dictionary-style generators are the hard ones for character statistics.
DEFAULT_DIFFICULTY = {
    KIND_ARITHMETIC: "easy",
    KIND_HASH: "easy",
    KIND_WORDLIST: "difficult",
    KIND_PERMUTATION: "difficult",
}

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 14695981039346656037
_FNV_PRIME = 1099511628211

_LABEL_RE = re.compile(r"^[a-z0-9]([a-z0-9-]*[a-z0-9])?$")


def is_valid_domain(name: str) -> bool:
    """DNS syntax check: dot-separated labels of [a-z0-9-], each <= 63 chars."""
    if not name or len(name) > 253:
        return False
    labels = name.split(".")
    if len(labels) < 2:
        return False
    return all(len(label) <= 63 and _LABEL_RE.match(label) for label in labels)


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


class SplitMix64:
    """Tiny deterministic 64-bit stream used by the word/permutation kinds."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        return self.next() % bound


@dataclass(frozen=True)
class DgaSpec:
    """Configuration of one synthetic generator family."""

    kind: str
    seed: int
    family: str = ""
    date: str = ""                 # ISO date mixed into the seeding, optional
    count: int = 0                 # default emission size in corpus builds
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ALL_KINDS:
            raise ConfigurationError(f"unknown generator kind {self.kind!r}")
        if not self.family:
            object.__setattr__(self, "family", self.kind)
        if self.date:
            date_type.fromisoformat(self.date)  # validate eagerly
        _validate_params(self.kind, self.effective_params())

    def effective_params(self) -> dict:
        merged = dict(_DEFAULT_PARAMS[self.kind])
        merged.update(self.params)
        return merged

    def date_key(self) -> int:
        return date_type.fromisoformat(self.date).toordinal() if self.date else 0


_DEFAULT_PARAMS: dict[str, dict] = {
    KIND_ARITHMETIC: {
        "alphabet": "abcdefghijklmnopqrstuvwxyz0123456789",
        "length_min": 8,
        "length_max": 15,
        "tlds": ["com", "net", "org", "info"],
        "multiplier": 1103515245,
        "increment": 12345,
        "modulus": 2**31,
    },
    KIND_HASH: {
        "length": 16,
        "tlds": ["com", "net", "biz", "ru"],
    },
    KIND_WORDLIST: {
        "words": None,  # None selects the bundled wordlist
        "subset_size": None,
        "last_subset_size": None,  # separate, smaller list for the final slot
        "words_min": 2,
        "words_max": 3,
        "hyphen_chance": 0.0,  # chance of joining words with hyphens
        "tlds": ["com", "net", "org"],
    },
    KIND_PERMUTATION: {
        "base_domain": "",
        "tlds": None,  # None keeps the base domain's suffix
    },
}


def _validate_params(kind: str, params: dict) -> None:
    unknown = params.keys() - _DEFAULT_PARAMS[kind].keys()
    if unknown:
        raise ConfigurationError(f"{kind} generator: unknown params {sorted(unknown)}")
    if kind == KIND_ARITHMETIC:
        alphabet = params["alphabet"]
        if not alphabet:
            raise ConfigurationError("arithmetic generator: alphabet is empty")
        if not all(c.islower() or c.isdigit() or c == "-" for c in alphabet):
            raise ConfigurationError("arithmetic generator: alphabet must be [a-z0-9-]")
        if alphabet == "-":
            raise ConfigurationError("arithmetic generator: alphabet needs a non-hyphen character")
        if not 1 <= params["length_min"] <= params["length_max"] <= 63:
            raise ConfigurationError("arithmetic generator: invalid length range")
        if params["modulus"] < 2:
            raise ConfigurationError("arithmetic generator: modulus must exceed 1")
    elif kind == KIND_HASH:
        if not 1 <= params["length"] <= 63:
            raise ConfigurationError("hash generator: length must be in [1, 63]")
    elif kind == KIND_WORDLIST:
        words = params["words"]
        if words is not None:
            if len(words) < 2:
                raise ConfigurationError("wordlist generator: needs at least two words")
            if not all(w and w.isalpha() and w.islower() for w in words):
                raise ConfigurationError("wordlist generator: words must be lowercase letters")
        if params["subset_size"] is not None and params["subset_size"] < 2:
            raise ConfigurationError("wordlist generator: subset_size must be at least 2")
        if params["last_subset_size"] is not None and params["last_subset_size"] < 2:
            raise ConfigurationError("wordlist generator: last_subset_size must be at least 2")
        if not 1 <= params["words_min"] <= params["words_max"]:
            raise ConfigurationError("wordlist generator: invalid word-count range")
        if not 0.0 <= params["hyphen_chance"] <= 1.0:
            raise ConfigurationError("wordlist generator: hyphen_chance must be in [0, 1]")
    elif kind == KIND_PERMUTATION:
        base = params["base_domain"]
        if not base or "." not in base:
            raise ConfigurationError("permutation generator: base_domain must be label.tld")
        if not is_valid_domain(base.lower()):
            raise ConfigurationError(f"permutation generator: invalid base_domain {base!r}")
    tlds = params.get("tlds")
    if tlds is not None and (not tlds or not all(t.isalpha() and t.islower() for t in tlds)):
        raise ConfigurationError(f"{kind} generator: tlds must be lowercase alphabetic")


def _fix_hyphens(label: str, alphabet: str) -> str:
    """DNS labels cannot start or end with '-'; remap those deterministically."""
    filler = next(c for c in alphabet if c != "-")
    if label.startswith("-"):
        label = filler + label[1:]
    if label.endswith("-"):
        label = label[:-1] + filler
    return label


def _arithmetic_domain(spec: DgaSpec, params: dict, index: int) -> str:
    a, c, m = params["multiplier"], params["increment"], params["modulus"]
    state = (spec.seed + index * 0x9E3779B9 + spec.date_key() * 0x85EBCA6B) % m
    lo, hi = params["length_min"], params["length_max"]
    length = lo
    if hi > lo:
        state = (a * state + c) % m
        length = lo + state % (hi - lo + 1)
    alphabet = params["alphabet"]
    chars = []
    for _ in range(length):
        state = (a * state + c) % m
        chars.append(alphabet[state % len(alphabet)])
    tlds = params["tlds"]
    tld = tlds[0]
    if len(tlds) > 1:
        state = (a * state + c) % m
        tld = tlds[state % len(tlds)]
    return _fix_hyphens("".join(chars), alphabet) + "." + tld


def _hash_domain(spec: DgaSpec, params: dict, index: int) -> str:
    message = f"{spec.seed}|{spec.date}|{index}".encode("utf-8")
    digest = fnv1a64(message)
    hex_digits = format(digest, "016x")
    while len(hex_digits) < params["length"]:
        digest = fnv1a64(format(digest, "016x").encode("ascii"))
        hex_digits += format(digest, "016x")
    label = hex_digits[: params["length"]]
    tlds = params["tlds"]
    return label + "." + tlds[fnv1a64(message + b"|tld") % len(tlds)]


def _wordlist_domain(
    spec: DgaSpec,
    params: dict,
    index: int,
    words: tuple[str, ...],
    last_words: tuple[str, ...] | None,
) -> str:
    stream = SplitMix64(
        spec.seed ^ (index * 0xC2B2AE3D27D4EB4F) ^ (spec.date_key() * 0x165667B19E3779F9)
    )
    lo, hi = params["words_min"], params["words_max"]
    word_count = lo if hi == lo else lo + stream.below(hi - lo + 1)
    picked = [words[stream.below(len(words))] for _ in range(word_count)]
    if last_words is not None:
        picked[-1] = last_words[stream.below(len(last_words))]
    joiner = ""
    if params["hyphen_chance"] > 0.0:
        if stream.next() / 2.0**64 < params["hyphen_chance"]:
            joiner = "-"
    label = joiner.join(picked)[:63].strip("-")
    tlds = params["tlds"]
    return label + "." + tlds[stream.below(len(tlds))]


def _permutation_domain(spec: DgaSpec, params: dict, index: int) -> str:
    base = params["base_domain"].lower()
    label, _, suffix = base.partition(".")
    if params["tlds"]:
        stream_tld = SplitMix64(spec.seed ^ ((index + 1) * 0x9E3779B97F4A7C15))
        suffix = params["tlds"][stream_tld.below(len(params["tlds"]))]
    chars = list(label)
    stream = SplitMix64(
        spec.seed ^ (index * 0xC2B2AE3D27D4EB4F) ^ (spec.date_key() * 0x165667B19E3779F9)
    )
    for i in range(len(chars) - 1, 0, -1):  # Fisher-Yates
        j = stream.below(i + 1)
        chars[i], chars[j] = chars[j], chars[i]
    return _fix_hyphens("".join(chars), "a") + "." + suffix


def domain_at(
    spec: DgaSpec,
    index: int,
    words: tuple[str, ...] | None = None,
    last_words: tuple[str, ...] | None = None,
) -> str:
    """The index-th domain of a generator family; pure and stateless.

    The word pools may be passed in to avoid re-resolving them per call.
    """
    params = spec.effective_params()
    if spec.kind == KIND_ARITHMETIC:
        return _arithmetic_domain(spec, params, index)
    if spec.kind == KIND_HASH:
        return _hash_domain(spec, params, index)
    if spec.kind == KIND_WORDLIST:
        if words is None:
            words = resolve_words(spec)
        if last_words is None:
            last_words = resolve_last_words(spec)
        return _wordlist_domain(spec, params, index, words, last_words)
    return _permutation_domain(spec, params, index)


def _pair_counts(word: str) -> dict[str, int]:
    out: dict[str, int] = {}
    for i in range(len(word) - 1):
        pair = word[i : i + 2]
        out[pair] = out.get(pair, 0) + 1
    return out


def _matched_subset(words: tuple[str, ...], subset: int, seed: int) -> tuple[str, ...]:
    """Pick ``subset`` words whose joint bigram profile tracks the full list.

    Greedy: each step takes the word leaving the subset's bigram token
    distribution closest to the full dictionary's in squared distance.
    With counts c, token total T and target t, that distance is
    sum_p (c_p/T - t_p)^2 = A/T^2 - 2B/T + const for A = sum c_p^2 and
    B = sum t_p c_p, so candidates cost O(word length) to score. Seeded
    jitter breaks ties; the pick is a pure function of (words, seed).
    """
    pairs_of = {word: _pair_counts(word) for word in words}
    target: dict[str, float] = {}
    for word in words:
        for pair, mult in pairs_of[word].items():
            target[pair] = target.get(pair, 0.0) + mult
    total = sum(target.values())
    for pair in target:
        target[pair] /= total
    # Very short words make weak sequence patterns; real DGA lists favour
    # full words, so skip them when the pool allows.
    longer = tuple(w for w in words if len(w) >= 5)
    if len(longer) >= subset:
        words = longer

    stream = SplitMix64(seed)
    jitter = {word: stream.next() / 2.0**64 * 1e-6 for word in words}

    counts: dict[str, float] = {}
    tokens = 0
    sum_sq = 0.0  # A
    sum_ct = 0.0  # B
    chosen: list[str] = []
    remaining = set(words)
    for _ in range(subset):
        best_word, best_cost = None, float("inf")
        for word in remaining:
            delta_sq = 0.0
            delta_ct = 0.0
            extra = 0
            for pair, mult in pairs_of[word].items():
                c = counts.get(pair, 0.0)
                delta_sq += (c + mult) ** 2 - c * c
                delta_ct += target[pair] * mult
                extra += mult
            new_tokens = tokens + extra
            cost = (sum_sq + delta_sq) / new_tokens**2 - 2.0 * (sum_ct + delta_ct) / new_tokens
            cost += jitter[word]
            if cost < best_cost:
                best_word, best_cost = word, cost
        chosen.append(best_word)
        remaining.discard(best_word)
        for pair, mult in pairs_of[best_word].items():
            c = counts.get(pair, 0.0)
            sum_sq += (c + mult) ** 2 - c * c
            sum_ct += target[pair] * mult
            counts[pair] = c + mult
            tokens += mult
    return tuple(sorted(chosen))


def _full_wordlist(params: dict) -> tuple[str, ...]:
    words = params["words"]
    if words is None:
        from .fixtures import bundled_wordlist

        words = bundled_wordlist()
    return tuple(words)


def resolve_words(spec: DgaSpec) -> tuple[str, ...]:
    """The effective vocabulary of a wordlist family.

    Starts from the configured or bundled list. When ``subset_size`` is
    set, the slice is chosen so that its character pairs track the full
    dictionary's bigram distribution: real wordlist DGAs blend into
    ordinary dictionary traffic because their lists cover the common
    letter pairs, and a uniformly sampled small slice would instead carry
    tell-tale rate deviations.
    """
    params = spec.effective_params()
    words = _full_wordlist(params)
    subset = params["subset_size"]
    if subset is None or subset >= len(words):
        return words
    return _matched_subset(words, subset, spec.seed * 0x9E3779B97F4A7C15 + 0x1B873593)


def resolve_last_words(spec: DgaSpec) -> tuple[str, ...] | None:
    """The vocabulary of the final word slot, when configured separately.

    Real wordlist DGAs combine per-position lists (verbs with nouns, for
    example); ``last_subset_size`` models a family whose closing word
    comes from a narrower list. Same bigram-tracking selection as
    :func:`resolve_words`, drawn with a different seed salt.
    """
    params = spec.effective_params()
    subset = params["last_subset_size"]
    if subset is None:
        return None
    words = _full_wordlist(params)
    if subset >= len(words):
        return words
    return _matched_subset(words, subset, spec.seed * 0xC2B2AE3D27D4EB4F + 0x85EBCA6B)


def generate_dga(spec: DgaSpec, count: int) -> list[DomainExample]:
    """First ``count`` distinct domains of a family, in index order."""
    if count < 0:
        raise ConfigurationError("count must be nonnegative")
    words = last_words = None
    if spec.kind == KIND_WORDLIST:
        words = resolve_words(spec)
        last_words = resolve_last_words(spec)
    source = f"dga:{spec.kind}:{spec.family}"
    seen: set[str] = set()
    out: list[DomainExample] = []
    index = 0
    limit = 100 * count + 1000
    while len(out) < count:
        if index >= limit:
            raise ConfigurationError(
                f"{spec.kind} generator exhausted after {index} candidates "
                f"({len(out)}/{count} distinct names)"
            )
        name = domain_at(spec, index, words, last_words)
        index += 1
        if name in seen:
            continue
        seen.add(name)
        out.append(DomainExample(name, LABEL_MALWARE, spec.family, source))
    return out
