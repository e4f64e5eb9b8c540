"""Rule-based term/phrase classifiers: an include/exclude seed filter and a
signal-word second pass.

Phrases are stored pre-stemmed and matched as contiguous stem subsequences,
so surface inflections still hit ("jobs" matches the phrase "job").
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

from .normalize import NormalizedDoc, SlangDictionary, Tweet, normalize, stem

MAX_PHRASE_STEMS = 4


@dataclass(frozen=True)
class LexiconRuleSet:
    """Include/exclude phrase lists, each phrase a tuple of 1-4 stems."""

    name: str
    include: tuple[tuple[str, ...], ...]
    exclude: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if not self.include:
            raise ValueError("include list must be nonempty")
        for phrase in self.include + self.exclude:
            if not 1 <= len(phrase) <= MAX_PHRASE_STEMS:
                raise ValueError(f"phrase must have 1-{MAX_PHRASE_STEMS} stems: {phrase!r}")
            for word in phrase:
                if not word or word != word.lower():
                    raise ValueError(f"phrase words must be lowercase and nonempty: {phrase!r}")


@dataclass(frozen=True)
class RuleVerdict:
    matched: bool
    hit_include: tuple[str, ...]
    hit_exclude: tuple[str, ...]

    def __post_init__(self) -> None:
        expected = bool(self.hit_include) and not self.hit_exclude
        if self.matched != expected:
            raise ValueError("matched must equal (include hit and no exclude hit)")


def make_ruleset(name: str, include: Iterable[str], exclude: Iterable[str] = ()) -> LexiconRuleSet:
    """Build a rule set from raw phrases, stemming each word."""
    def prep(phrases: Iterable[str]) -> tuple[tuple[str, ...], ...]:
        return tuple(tuple(stem(w) for w in p.lower().split()) for p in phrases)

    return LexiconRuleSet(name=name, include=prep(include), exclude=prep(exclude))


def load_ruleset(path: str | Path, name: str | None = None) -> LexiconRuleSet:
    """Parse a plain-text rule file with [include] / [exclude] sections."""
    include: list[str] = []
    exclude: list[str] = []
    section: list[str] | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.lower() == "[include]":
                section = include
            elif line.lower() == "[exclude]":
                section = exclude
            elif line.startswith("["):
                raise ValueError(f"{path}:{lineno}: unknown section {line!r}")
            elif section is None:
                raise ValueError(f"{path}:{lineno}: phrase outside any section")
            else:
                section.append(line)
    return make_ruleset(name or Path(path).stem, include, exclude)


def _packaged_ruleset(filename: str, name: str) -> LexiconRuleSet:
    ref = resources.files("jobforge.fixtures") / filename
    with resources.as_file(ref) as path:
        return load_ruleset(path, name=name)


def c0_ruleset() -> LexiconRuleSet:
    """The seed include/exclude filter that extracts the job-likely set."""
    return _packaged_ruleset("c0.rules", "c0")


def c4_ruleset() -> LexiconRuleSet:
    """Signal words for the second rule pass (career, hustle, wrk, ...)."""
    return _packaged_ruleset("c4.rules", "c4")


def default_slang() -> SlangDictionary:
    """The packaged starter slang dictionary."""
    ref = resources.files("jobforge.fixtures") / "slang.tsv"
    with resources.as_file(ref) as path:
        return SlangDictionary.from_file(path)


def _phrase_hits(stems: tuple[str, ...], phrases: tuple[tuple[str, ...], ...]) -> tuple[str, ...]:
    hits = []
    for phrase in phrases:
        width = len(phrase)
        for i in range(len(stems) - width + 1):
            if stems[i:i + width] == phrase:
                hits.append(" ".join(phrase))
                break
    return tuple(hits)


def match_rules(doc: NormalizedDoc, rules: LexiconRuleSet) -> RuleVerdict:
    """Phrase hit = contiguous stem subsequence equal to the phrase."""
    hit_include = _phrase_hits(doc.stems, rules.include)
    hit_exclude = _phrase_hits(doc.stems, rules.exclude)
    return RuleVerdict(
        matched=bool(hit_include) and not hit_exclude,
        hit_include=hit_include,
        hit_exclude=hit_exclude,
    )


def job_likely_filter(
    tweets: Iterable[Tweet],
    rules: LexiconRuleSet,
    min_tokens: int = 5,
    slang: SlangDictionary | None = None,
) -> set[str]:
    """Ids of tweets with >= min_tokens normalized tokens that match the rules."""
    if min_tokens < 1:
        raise ValueError("min_tokens must be >= 1")
    slang = slang if slang is not None else SlangDictionary()
    selected: set[str] = set()
    for tweet in tweets:
        doc = normalize(tweet, slang)
        if len(doc.tokens) >= min_tokens and match_rules(doc, rules).matched:
            selected.add(tweet.tweet_id)
    return selected
