from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from jobforge.lexicon import (
    LexiconRuleSet,
    c0_ruleset,
    c4_ruleset,
    default_slang,
    job_likely_filter,
    load_ruleset,
    make_ruleset,
    match_rules,
)
from jobforge.normalize import Tweet, normalize

from conftest import make_doc

# 20 crafted tweets; the golden sets below were derived by hand-applying the
# rules (include/exclude phrase hits on stems, 5-token gate for the seed set).
FIXTURE_TWEETS = [
    ("101", "Really bored....., no entertainment at work today"),
    ("102", "i hate my manager at this place today"),
    ("103", "work now"),
    ("104", "nice job on your slides everyone"),
    ("105", "my boss made me stay late at work again"),
    ("106", "dreading school tomorrow because homework"),
    ("107", "the manager of our team should be fired"),
    ("108", "jobs report came out this morning"),
    ("109", "being jobless sucks so much right now"),
    ("110", "great job team so proud of you"),
    ("111", "boss ass playlist for the gym tonight"),
    ("112", "my work is never appreciated around here"),
    ("113", "gotta finish this class project by friday"),
    ("114", "manager"),
    ("115", "lol u ok"),
    ("116", "finals week is killing every student here"),
    ("117", "dinner with friends at the new place downtown"),
    ("118", "what a career from vince young"),
    ("119", "payday is finally here thank god"),
    ("120", "their work ethic is just school level"),
]

C0_GOLDEN = {"101", "102", "105", "107", "108", "109", "112"}
C4_GOLDEN = {"118", "119"}


def fixture_tweets() -> list[Tweet]:
    return [Tweet(tid, text, account_id="900") for tid, text in FIXTURE_TWEETS]


class TestMatchRules:
    def test_at_work_include(self, empty_slang):
        doc = normalize(Tweet("1", "Really bored....., no entertainment at work today", "a"),
                        empty_slang)
        verdict = match_rules(doc, c0_ruleset())
        assert verdict.matched
        assert "at work" in verdict.hit_include

    def test_exclude_beats_include(self, empty_slang):
        doc = normalize(Tweet("1", "nice job on your slides", "a"), empty_slang)
        verdict = match_rules(doc, c0_ruleset())
        assert not verdict.matched
        assert "job" in verdict.hit_include
        assert "nice job" in verdict.hit_exclude

    def test_empty_doc(self):
        doc = make_doc("1", [])
        assert not match_rules(doc, c0_ruleset()).matched

    def test_stem_based_matching(self):
        rules = make_ruleset("r", include=["job"])
        assert match_rules(make_doc("1", "jobs"), rules).matched

    def test_phrase_must_be_contiguous(self):
        rules = make_ruleset("r", include=["at work"])
        assert not match_rules(make_doc("1", "at the work"), rules).matched


class TestC4:
    def test_payday(self):
        assert match_rules(make_doc("1", "payday tomorrow finally"), c4_ruleset()).matched

    def test_career_false_positive_matches(self):
        doc = make_doc("1", "what a career from vince young")
        assert match_rules(doc, c4_ruleset()).matched

    def test_no_signal(self):
        assert not match_rules(make_doc("1", "sunday brunch with friends"), c4_ruleset()).matched

    def test_ruleset_shape(self):
        rules = c4_ruleset()
        include = {" ".join(p) for p in rules.include}
        assert include == {"career", "hustle", "wrk", "employed", "training",
                           "payday", "company", "coworker", "agent"}
        assert rules.exclude == ()


class TestJobLikelyFilter:
    def test_token_gate(self):
        got = job_likely_filter([Tweet("1", "work now", "a")], c0_ruleset(), min_tokens=5)
        assert got == set()

    def test_basic_match(self):
        got = job_likely_filter(
            [Tweet("1", "i hate my manager at this place today", "a")],
            c0_ruleset(), min_tokens=5)
        assert got == {"1"}

    def test_twenty_tweet_golden(self):
        got = job_likely_filter(fixture_tweets(), c0_ruleset(), min_tokens=5,
                                slang=default_slang())
        assert got == C0_GOLDEN

    def test_c4_golden_no_gate(self):
        got = job_likely_filter(fixture_tweets(), c4_ruleset(), min_tokens=1,
                                slang=default_slang())
        assert got == C4_GOLDEN

    def test_min_tokens_validated(self):
        with pytest.raises(ValueError):
            job_likely_filter([], c0_ruleset(), min_tokens=0)

    @given(st.sets(st.sampled_from([tid for tid, _ in FIXTURE_TWEETS])))
    def test_monotone_in_include(self, _ignored):
        # adding an include phrase never shrinks the result; adding an
        # exclude phrase never grows it
        base = c0_ruleset()
        tweets = fixture_tweets()
        baseline = job_likely_filter(tweets, base, slang=default_slang())
        wider = LexiconRuleSet(name="w", include=base.include + (("career",),),
                               exclude=base.exclude)
        narrower = LexiconRuleSet(name="n", include=base.include,
                                  exclude=base.exclude + (("manager",),))
        assert baseline <= job_likely_filter(tweets, wider, slang=default_slang())
        assert job_likely_filter(tweets, narrower, slang=default_slang()) <= baseline


class TestRuleFiles:
    def test_load_sections(self, tmp_path):
        path = tmp_path / "x.rules"
        path.write_text("# c\n[include]\nmanagers\n[exclude]\ngreat job\n", encoding="utf-8")
        rules = load_ruleset(path)
        assert rules.include == (("manager",),)
        assert rules.exclude == (("great", "job"),)

    def test_phrase_outside_section(self, tmp_path):
        path = tmp_path / "x.rules"
        path.write_text("job\n", encoding="utf-8")
        with pytest.raises(ValueError, match="outside"):
            load_ruleset(path)

    def test_include_required(self):
        with pytest.raises(ValueError, match="include"):
            make_ruleset("r", include=[])

    def test_phrase_length_cap(self):
        with pytest.raises(ValueError, match="1-4"):
            make_ruleset("r", include=["a b c d e"])
