"""Twitter-aware text primitives: anonymization, tokenization, slang
expansion, plural stemming and n-gram extraction.

Everything in this module is a pure function over immutable inputs, so the
rest of the toolkit can call it from any number of workers.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

MENTION_PLACEHOLDER = "@SOMEONE"
URL_PLACEHOLDER = "HTTP://LINK"

# A mention is a whole whitespace-delimited token starting with '@'.
_MENTION_RE = re.compile(r"(?<!\S)@\S*")
# URL substrings: scheme-prefixed, or www.-prefixed at a word boundary.
# The placeholders HTTP://LINK and HTTP://URL both match the scheme rule,
# which is what makes anonymize a fixed point on its own output.
_URL_RE = re.compile(r"(?:https?://\S*|(?<![\w.])www\.\S*)", re.IGNORECASE)
_URL_AT_START_RE = re.compile(r"(?:https?://|www\.)", re.IGNORECASE)


def anonymize(text: str) -> str:
    """Replace @-mention tokens with @SOMEONE and URL substrings with HTTP://LINK."""
    text = _MENTION_RE.sub(MENTION_PLACEHOLDER, text)
    text = _URL_RE.sub(URL_PLACEHOLDER, text)
    return text


def contains_url(text: str) -> bool:
    """True when the text embeds anything matching the URL patterns above."""
    return _URL_RE.search(text) is not None


@dataclass(frozen=True)
class Tweet:
    """One ingested post."""

    tweet_id: str
    text: str
    account_id: str
    created_at: str | None = None
    geo: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if not self.tweet_id:
            raise ValueError("tweet_id must be nonempty")
        if len(self.text) < 1:
            raise ValueError("text must be nonempty")


class SlangDictionary:
    """Exact whole-token/phrase expansion table for out-of-vocabulary slang.

    Keys are lowercase token phrases; expansion output is never re-expanded,
    and the loader rejects dictionaries whose expansions would themselves be
    expandable (that would make normalization non-idempotent).
    """

    def __init__(self, entries: dict[str, str] | None = None) -> None:
        self._table: dict[tuple[str, ...], tuple[str, ...]] = {}
        self._max_key_len = 0
        for slang, expansion in (entries or {}).items():
            self._add(slang, expansion)
        self._check_expansions_stable()

    def _add(self, slang: str, expansion: str) -> None:
        key = tuple(slang.lower().split())
        value = tuple(expansion.lower().split())
        if not key or not value:
            raise ValueError(f"empty slang entry: {slang!r} -> {expansion!r}")
        self._table[key] = value
        self._max_key_len = max(self._max_key_len, len(key))

    def _check_expansions_stable(self) -> None:
        for key, value in self._table.items():
            if tuple(self.expand(list(value))) != value:
                raise ValueError(
                    f"expansion of {' '.join(key)!r} is itself expandable; "
                    "slang dictionaries must not chain"
                )

    def __len__(self) -> int:
        return len(self._table)

    def __contains__(self, phrase: str) -> bool:
        return tuple(phrase.lower().split()) in self._table

    def expand(self, tokens: list[str]) -> list[str]:
        """Replace slang tokens/phrases by their expansions, longest match first."""
        out: list[str] = []
        i = 0
        n = len(tokens)
        while i < n:
            match_len = 0
            for length in range(min(self._max_key_len, n - i), 0, -1):
                if tuple(tokens[i:i + length]) in self._table:
                    match_len = length
                    break
            if match_len:
                out.extend(self._table[tuple(tokens[i:i + match_len])])
                i += match_len
            else:
                out.append(tokens[i])
                i += 1
        return out

    @classmethod
    def from_file(cls, path: str | Path) -> "SlangDictionary":
        """Load a UTF-8 two-column tab-separated file; '#' lines are comments."""
        entries: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                if "\t" not in line:
                    raise ValueError(f"{path}:{lineno}: expected slang<TAB>expansion")
                slang, expansion = line.split("\t", 1)
                entries[slang.strip()] = expansion.strip()
        return cls(entries)


@dataclass(frozen=True)
class NormalizedDoc:
    """Lowercased, slang-expanded token sequence with parallel stems."""

    tweet_id: str
    tokens: tuple[str, ...]
    stems: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.stems):
            raise ValueError("stems must parallel tokens")
        for tok in self.tokens:
            if tok != tok.lower():
                raise ValueError(f"token not lowercase: {tok!r}")
            if not _has_alnum(tok):
                raise ValueError(f"punctuation-only token survived: {tok!r}")


def _has_alnum(token: str) -> bool:
    return any(c.isalnum() for c in token)


def tokenize(text: str) -> list[str]:
    """Lowercase, whitespace-split, Twitter-aware tokenization.

    Hashtags, mentions and URLs stay whole; leading/trailing punctuation is
    peeled off word tokens, each punctuation character becoming its own token.
    """
    tokens: list[str] = []
    for chunk in text.lower().split():
        tokens.extend(_split_chunk(chunk))
    return tokens


def _split_chunk(chunk: str) -> list[str]:
    if _URL_AT_START_RE.match(chunk):
        return [chunk]
    left: list[str] = []
    right: list[str] = []
    core = chunk
    while core:
        c = core[0]
        if c.isalnum():
            break
        if c in "#@" and len(core) > 1 and core[1].isalnum():
            break  # hashtag/mention prefix is semantic, keep attached
        left.append(c)
        core = core[1:]
    while core and not core[-1].isalnum():
        right.append(core[-1])
        core = core[:-1]
    out = left
    if core:
        out.append(core)
    out.extend(reversed(right))
    return out


def stem(word: str) -> str:
    """Plural-suffix stemmer (s/es/ies rules, possessives stripped).

    Deliberately light so topical signal words keep their surface form:
    "training", "employed" and "wrk" are fixed points, while "managers"
    stems to "manager" and "companies" to "company".
    """
    if word.endswith("'s"):
        word = word[:-2]
    if len(word) <= 3:
        return word
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word if word.endswith(("aies", "eies")) else word[:-3] + "y"
    if word.endswith("ss"):
        return word
    if word.endswith("es"):
        return word if word.endswith(("aes", "ees", "oes")) else word[:-1]
    if word.endswith("s") and not word.endswith("us"):
        return word[:-1]
    return word


def normalize(tweet: Tweet, slang: SlangDictionary) -> NormalizedDoc:
    """Tokenize, drop punctuation-only tokens, expand slang, stem.

    Deterministic, and idempotent when re-applied to its own detokenized
    output (guaranteed by SlangDictionary's no-chaining check).
    """
    tokens = [t for t in tokenize(tweet.text) if _has_alnum(t)]
    tokens = slang.expand(tokens)
    return NormalizedDoc(
        tweet_id=tweet.tweet_id,
        tokens=tuple(tokens),
        stems=tuple(stem(t) for t in tokens),
    )


def ngrams(doc: NormalizedDoc, max_n: int) -> Counter[str]:
    """All contiguous 1..max_n-grams over the stems, space-joined, with counts."""
    if not 1 <= max_n <= 3:
        raise ValueError(f"max_n must be in [1, 3], got {max_n}")
    stems = doc.stems
    grams: Counter[str] = Counter()
    for n in range(1, max_n + 1):
        for i in range(len(stems) - n + 1):
            grams[" ".join(stems[i:i + n])] += 1
    return grams
