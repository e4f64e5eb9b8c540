from __future__ import annotations

import pytest

from jobforge.accounts import (
    RecruitmentPattern,
    classify_account,
    has_recruitment_pattern,
    hashtag_census,
)
from jobforge.normalize import Tweet

PANERA = ("Panera Bread: Baker - Night (#Rochester, NY) HTTP://URL "
          "#Hospitality #VeteranJob #Job #Jobs #TweetMyJobs")


def tw(text, tweet_id="1", account="a"):
    return Tweet(tweet_id=tweet_id, text=text, account_id=account)


class TestRecruitmentPattern:
    def test_recruitment_post_matches(self):
        assert has_recruitment_pattern(tw(PANERA))

    def test_url_required(self):
        assert not has_recruitment_pattern(tw("#job hunting is exhausting"))

    def test_listed_hashtag_required(self):
        assert not has_recruitment_pattern(tw("check this http://x.co"))

    def test_case_insensitive_hashtags(self):
        assert has_recruitment_pattern(tw("now #HIRING apply http://x.co"))

    def test_hashtag_must_match_whole_tag(self):
        # '#jobless' is not the listed '#job'
        assert not has_recruitment_pattern(tw("#jobless rant http://x.co"))

    def test_custom_hashtag_file(self, tmp_path):
        path = tmp_path / "tags.txt"
        path.write_text("#custom\nplain\n", encoding="utf-8")
        pattern = RecruitmentPattern.from_file(path)
        assert pattern.hashtags == frozenset({"#custom", "#plain"})
        assert has_recruitment_pattern(tw("#plain see http://x.co"), pattern)


class TestClassifyAccount:
    def _pattern_tweet(self, i):
        return tw(f"Baker wanted #job http://x.co/{i}", tweet_id=str(i))

    def _plain_tweet(self, i):
        return tw(f"nice weather today {i}", tweet_id=str(100 + i))

    def test_majority_pattern_job_is_business(self):
        tweets = [(self._pattern_tweet(i), "job") for i in range(5)]
        tweets += [(self._plain_tweet(i), "notjob") for i in range(2)]
        profile = classify_account(tweets)
        assert profile.kind == "business"
        assert profile.n_pattern_job == 5
        assert profile.n_other == 2

    def test_zero_pattern_is_personal(self):
        tweets = [(self._plain_tweet(i), "notjob") for i in range(3)]
        tweets += [(tw("ugh long day at work", tweet_id="50"), "job")]
        assert classify_account(tweets).kind == "personal"

    def test_tie_is_personal(self):
        tweets = [(self._pattern_tweet(i), "job") for i in range(3)]
        tweets += [(self._plain_tweet(i), "notjob") for i in range(3)]
        assert classify_account(tweets).kind == "personal"

    def test_job_label_required_for_pattern_count(self):
        # a pattern-shaped tweet labeled notjob counts as "other"
        tweets = [(self._pattern_tweet(1), "notjob"), (self._pattern_tweet(2), "job")]
        profile = classify_account(tweets)
        assert profile.n_pattern_job == 1
        assert profile.n_other == 1
        assert profile.kind == "personal"

    def test_permutation_invariant(self):
        tweets = [(self._pattern_tweet(i), "job") for i in range(4)]
        tweets += [(self._plain_tweet(i), "notjob") for i in range(1)]
        forward = classify_account(tweets)
        backward = classify_account(list(reversed(tweets)))
        assert forward == backward

    def test_adding_non_pattern_tweet_never_flips_to_business(self):
        tweets = [(self._pattern_tweet(i), "job") for i in range(2)]
        tweets += [(self._plain_tweet(i), "notjob") for i in range(2)]
        assert classify_account(tweets).kind == "personal"
        tweets += [(self._plain_tweet(9), "notjob")]
        assert classify_account(tweets).kind == "personal"

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            classify_account([])

    def test_mixed_accounts_rejected(self):
        with pytest.raises(ValueError):
            classify_account([(tw("x", "1", "a"), "job"), (tw("y", "2", "b"), "job")])


class TestHashtagCensus:
    def test_single_cooccurrence(self):
        rows = hashtag_census([tw("apply #job http://x.co")])
        by_tag = {row.hashtag: row for row in rows}
        assert by_tag["#job"].count_with_hashtag == 1
        assert by_tag["#job"].count_with_hashtag_and_url == 1
        assert by_tag["#job"].percent == 100.00

    def test_empty_corpus_zero_rows(self):
        rows = hashtag_census([])
        assert len(rows) == 8
        assert all(row.count_with_hashtag == 0 for row in rows)
        assert all(row.percent == 0.0 for row in rows)

    def test_percent_two_decimals(self):
        tweets = [tw(f"#job {i} http://x.co", tweet_id=str(i)) for i in range(3)]
        tweets.append(tw("#job but no link", tweet_id="99"))
        rows = {r.hashtag: r for r in hashtag_census(tweets)}
        assert rows["#job"].count_with_hashtag == 4
        assert rows["#job"].count_with_hashtag_and_url == 3
        assert rows["#job"].percent == 75.00

    def test_published_shape(self):
        # one row per listed hashtag, co-occurrence never exceeds occurrence
        tweets = [tw(PANERA, tweet_id="1"), tw("#retail therapy", tweet_id="2")]
        for row in hashtag_census(tweets):
            assert row.count_with_hashtag_and_url <= row.count_with_hashtag
