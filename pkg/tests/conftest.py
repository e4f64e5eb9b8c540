from __future__ import annotations

import pytest

from jobforge.normalize import NormalizedDoc, SlangDictionary, Tweet, stem


def make_doc(tweet_id: str, words: str | list[str]) -> NormalizedDoc:
    """Build a NormalizedDoc straight from lowercase words (stemming applied)."""
    tokens = words.split() if isinstance(words, str) else list(words)
    return NormalizedDoc(
        tweet_id=tweet_id,
        tokens=tuple(tokens),
        stems=tuple(stem(t) for t in tokens),
    )


def stems_doc(tweet_id: str, stems: list[str]) -> NormalizedDoc:
    """Build a NormalizedDoc whose stems are given verbatim."""
    return NormalizedDoc(tweet_id=tweet_id, tokens=tuple(stems), stems=tuple(stems))


@pytest.fixture
def empty_slang() -> SlangDictionary:
    return SlangDictionary()


@pytest.fixture
def tweet_factory():
    counter = iter(range(1, 10_000))

    def make(text: str, tweet_id: str | None = None, account_id: str = "900") -> Tweet:
        return Tweet(
            tweet_id=tweet_id or str(100 + next(counter)),
            text=text,
            account_id=account_id,
        )

    return make
