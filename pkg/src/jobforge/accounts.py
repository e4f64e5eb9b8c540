"""Recruitment-pattern detection and the personal-vs-business account
heuristic, plus the hashtag co-occurrence census.

Pattern matching runs on the raw (pre-normalization) text so hashtags and
URLs survive intact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .metrics import round_half_up
from .normalize import Tweet, contains_url

DEFAULT_RECRUITMENT_HASHTAGS = (
    "#veteranjob", "#job", "#jobs", "#tweetmyjobs",
    "#hiring", "#retail", "#realestate", "#hr",
)

_HASHTAG_RE = re.compile(r"#\w+")

PERSONAL = "personal"
BUSINESS = "business"


@dataclass(frozen=True)
class RecruitmentPattern:
    """Listed job hashtag co-occurring with an embedded URL."""

    hashtags: frozenset[str]
    requires_url: bool = True

    @classmethod
    def default(cls) -> "RecruitmentPattern":
        return cls(hashtags=frozenset(DEFAULT_RECRUITMENT_HASHTAGS))

    @classmethod
    def from_file(cls, path: str | Path) -> "RecruitmentPattern":
        """One hashtag per line, '#' alone on a line is not a comment marker;
        lines not starting with '#' are prefixed with one."""
        tags = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                tag = line.strip().lower()
                if not tag:
                    continue
                tags.append(tag if tag.startswith("#") else f"#{tag}")
        if not tags:
            raise ValueError(f"{path}: no hashtags found")
        return cls(hashtags=frozenset(tags))


def _hashtags_in(text: str) -> set[str]:
    return set(_HASHTAG_RE.findall(text.lower()))


def has_recruitment_pattern(tweet: Tweet | str,
                            pattern: RecruitmentPattern | None = None) -> bool:
    """True when the raw text carries a listed hashtag and an embedded URL."""
    pattern = pattern or RecruitmentPattern.default()
    text = tweet.text if isinstance(tweet, Tweet) else tweet
    if not _hashtags_in(text) & pattern.hashtags:
        return False
    return contains_url(text) if pattern.requires_url else True


@dataclass(frozen=True)
class AccountProfile:
    account_id: str
    n_pattern_job: int
    n_other: int
    kind: str

    def __post_init__(self) -> None:
        if self.kind != (BUSINESS if self.n_pattern_job > self.n_other else PERSONAL):
            raise ValueError("kind must follow the strict-majority rule")


def classify_account(
    account_tweets: Sequence[tuple[Tweet, str]],
    pattern: RecruitmentPattern | None = None,
) -> AccountProfile:
    """Business iff strictly more pattern-matching job tweets than all others."""
    if not account_tweets:
        raise ValueError("cannot classify an account with no tweets")
    account_ids = {tweet.account_id for tweet, _ in account_tweets}
    if len(account_ids) != 1:
        raise ValueError(f"tweets span multiple accounts: {sorted(account_ids)}")
    pattern = pattern or RecruitmentPattern.default()
    n_pattern_job = sum(
        1 for tweet, topic in account_tweets
        if topic == "job" and has_recruitment_pattern(tweet, pattern)
    )
    n_other = len(account_tweets) - n_pattern_job
    kind = BUSINESS if n_pattern_job > n_other else PERSONAL
    return AccountProfile(account_id=account_ids.pop(), n_pattern_job=n_pattern_job,
                          n_other=n_other, kind=kind)


@dataclass(frozen=True)
class CensusRow:
    hashtag: str
    count_with_hashtag: int
    count_with_hashtag_and_url: int
    percent: float


def hashtag_census(
    corpus: Iterable[Tweet],
    hashtags: Sequence[str] = DEFAULT_RECRUITMENT_HASHTAGS,
) -> list[CensusRow]:
    """Per listed hashtag: tweets containing it, and the subset that also
    embeds a URL; percent is presentation-rounded to 2 decimals."""
    tags = [t.lower() for t in hashtags]
    with_tag = {t: 0 for t in tags}
    with_both = {t: 0 for t in tags}
    for tweet in corpus:
        present = _hashtags_in(tweet.text)
        if not present:
            continue
        has_url = contains_url(tweet.text)
        for tag in tags:
            if tag in present:
                with_tag[tag] += 1
                if has_url:
                    with_both[tag] += 1
    rows = []
    for tag in tags:
        count = with_tag[tag]
        both = with_both[tag]
        percent = round_half_up(100.0 * both / count, 2) if count else 0.0
        rows.append(CensusRow(tag, count, both, percent))
    return rows
