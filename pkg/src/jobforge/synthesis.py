"""Synthetic corpus generator for desk-scale end-to-end runs.

Job tweets draw from personal work-talk and business recruitment templates
(the latter carrying listed hashtags plus a URL); not-job tweets draw from a
background bank plus confounders that deliberately bait the rule filters
("their jobs" in sports talk, "career" around athletes, "boss ass" slang).
The class split is exact by construction and everything is seeded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .normalize import Tweet

PERSONAL_JOB_TEMPLATES = (
    "ugh another long shift at work today",
    "my manager is driving me crazy again",
    "i hate my job so much right now",
    "my boss made me stay late at work again",
    "so tired of being jobless every single day",
    "overtime at work again this whole week",
    "my work schedule is absolutely brutal lately",
    "really bored no entertainment at work today",
    "two more days of work then i finally get a day off",
    "cant wait for payday this friday night",
    "first day of training at the new company",
    "finally employed after six long months searching",
    "my coworker keeps stealing my snacks lol",
    "the hustle never stops grinding every day",
    "back to wrk early tomorrow morning ugh",
    "clocking in early tomorrow for the opening shift",
    "another double today pray for me yall",
    "this overnight shift is going to kill me slowly",
    "customers were so rude to me all day long",
    "leaving work at 430 and driving in this snow",
    "my shift got extended again this evening ugh",
    "got promoted to assistant manager at the store",
    "the new hire at my job keeps asking questions",
    "interview tomorrow morning wish me luck yall",
    "quit my job today and honestly it feels amazing",
)

RECRUITMENT_TEMPLATES = (
    "panera bread baker night (#rochester, ny) HTTP://URL #hospitality #veteranjob #job #jobs #tweetmyjobs",
    "now #hiring retail associate apply at http://jobs.example/{i} #jobs #retail",
    "real estate agent wanted #realestate #jobs apply http://hire.example/{i}",
    "night shift cashier opening apply today http://apply.example/{i} #job #hiring",
    "hr coordinator position open #hr #jobs http://careers.example/{i}",
    "warehouse team lead needed #job #jobs apply now http://work.example/{i}",
)

BUSINESS_FILLER_TEMPLATES = (
    "store hours updated for the holiday weekend",
    "thanks rochester for an amazing year everyone",
)

BACKGROUND_TEMPLATES = (
    "watching the game tonight with my friends",
    "this weather is absolutely beautiful today honestly",
    "dinner at grandmas house again on sunday",
    "new episode dropped last night and wow",
    "traffic on the highway was insane this morning",
    "cant stop listening to this new album",
    "brunch with the girls tomorrow finally yay",
    "my dog did the funniest thing today",
    "road trip this weekend lets go finally",
    "that sunset tonight was something else wow",
    "one of the best friday nights in a while",
    "@friend32 you coming over later or what",
    "check out these photos http://pics.example/88 so good",
    "being a mommy is the hardest but most rewarding thing",
    "the sunset by the lake was unreal tonight",
    "my sister just adopted the cutest puppy ever",
    "pancakes for breakfast this morning because why not",
    "this playlist has been on repeat all morning",
    "cant believe that plot twist in the finale",
    "the gym was packed again this evening ugh",
    "farmers market haul was amazing this morning",
    "movie night with the roommates again tonight",
    "my bracket is already busted this year lol",
    "the concert last night was absolutely incredible",
    "coffee shop downtown has the best muffins fr",
    "raining all weekend so inside plans it is",
    "finally beat that level after like twenty tries",
    "grandma made her famous pie again yesterday",
    "the puppy chewed through another charger today smh",
    "leaves are finally turning colors around here",
)

CONFOUNDER_TEMPLATES = (
    # bait for the seed include terms, truly not job talk
    "these refs need to do their jobs tonight",
    "the manager of this team should be fired",
    "what a boss move from the champ last night",
    "watching that speedrun is a full time job honestly",
    "that boss fight took me all night to clear",
    "my fantasy team manager skills are elite lol",
    # bait for the signal-word pass
    "what a career from vince young",
    "i hope derrick rose plays the best game of his career tonight",
    "spring training starts next month go sox",
    "the agent in that movie was so cool",
    "she said hustle culture is a total scam lol",
    "my company for the weekend is this cat",
    "the training montage in that movie goes hard",
    "free agent rumors are getting wild this week",
    "pure hustle from the rookie on that play",
    # exclusion-phrase bait: the seed filter must skip these
    "great job team so proud of you tonight",
    "boss ass playlist for the gym this morning",
    "nice job by the refs totally blind tonight",
)

FILLERS = ("lol", "haha", "fr", "ngl", "smh", "rn", "tbh", "yall", "today", "honestly")


@dataclass(frozen=True)
class SimulationProfile:
    corpus_size: int = 10_000
    job_fraction: float = 0.2
    confounder_rate: float = 0.1
    n_accounts: int = 400
    business_account_fraction: float = 0.08
    business_tweet_share: float = 0.25  # fraction of job tweets that are recruitment posts
    seed: int = 0

    def __post_init__(self) -> None:
        if self.corpus_size < 10:
            raise ValueError("corpus_size must be >= 10")
        for name in ("job_fraction", "confounder_rate", "business_account_fraction",
                     "business_tweet_share"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.n_accounts < 2:
            raise ValueError("n_accounts must be >= 2")


@dataclass(frozen=True)
class TruthRecord:
    topic: str         # job | notjob
    account_kind: str  # personal | business
    origin: str        # personal_job | recruitment | business_filler | background | confounder


def _vary(template: str, i: int, rng: np.random.Generator) -> str:
    text = template.replace("{i}", str(i))
    extra = int(rng.integers(0, 3))
    if extra:
        picks = rng.choice(len(FILLERS), size=extra, replace=False)
        text = text + " " + " ".join(FILLERS[p] for p in picks)
    return text


def generate_synthetic_corpus(
    profile: SimulationProfile,
) -> tuple[list[Tweet], dict[str, TruthRecord]]:
    """Seeded corpus plus ground truth; exact job count by construction."""
    rng = np.random.default_rng(profile.seed)
    size = profile.corpus_size
    n_job = round(size * profile.job_fraction)
    n_recruitment = round(n_job * profile.business_tweet_share)
    n_personal_job = n_job - n_recruitment
    n_notjob = size - n_job
    n_confounder = round(n_notjob * profile.confounder_rate)

    n_business_accounts = max(1, round(profile.n_accounts * profile.business_account_fraction))
    n_personal_accounts = max(1, profile.n_accounts - n_business_accounts)
    business_ids = [f"b{i:04d}" for i in range(n_business_accounts)]
    personal_ids = [f"p{i:04d}" for i in range(n_personal_accounts)]

    # every business account gets one non-pattern tweet, the rest background
    n_business_filler = min(n_business_accounts, n_notjob - n_confounder)
    n_background = n_notjob - n_confounder - n_business_filler

    plan: list[tuple[str, str, str, str]] = []  # (topic, kind, origin, template)
    for k in range(n_recruitment):
        template = RECRUITMENT_TEMPLATES[int(rng.integers(len(RECRUITMENT_TEMPLATES)))]
        plan.append(("job", "business", "recruitment", template))
    for k in range(n_personal_job):
        template = PERSONAL_JOB_TEMPLATES[int(rng.integers(len(PERSONAL_JOB_TEMPLATES)))]
        plan.append(("job", "personal", "personal_job", template))
    for k in range(n_confounder):
        template = CONFOUNDER_TEMPLATES[int(rng.integers(len(CONFOUNDER_TEMPLATES)))]
        plan.append(("notjob", "personal", "confounder", template))
    for k in range(n_business_filler):
        template = BUSINESS_FILLER_TEMPLATES[int(rng.integers(len(BUSINESS_FILLER_TEMPLATES)))]
        plan.append(("notjob", "business", "business_filler", template))
    for k in range(n_background):
        template = BACKGROUND_TEMPLATES[int(rng.integers(len(BACKGROUND_TEMPLATES)))]
        plan.append(("notjob", "personal", "background", template))

    order = rng.permutation(len(plan))
    tweets: list[Tweet] = []
    truth: dict[str, TruthRecord] = {}
    business_cursor = 0
    personal_cursor = 0
    filler_cursor = 0
    for position, plan_index in enumerate(order):
        topic, kind, origin, template = plan[plan_index]
        tweet_id = str(600_000_000_000_000_000 + position)
        if kind == "business":
            if origin == "business_filler":
                account = business_ids[filler_cursor % n_business_accounts]
                filler_cursor += 1
            else:
                account = business_ids[business_cursor % n_business_accounts]
                business_cursor += 1
        else:
            account = personal_ids[personal_cursor % n_personal_accounts]
            personal_cursor += 1
        minutes = position % (60 * 24)
        created = f"2013-07-{1 + position % 28:02d}T{minutes // 60:02d}:{minutes % 60:02d}:00Z"
        tweets.append(Tweet(
            tweet_id=tweet_id,
            text=_vary(template, position, rng),
            account_id=account,
            created_at=created,
        ))
        truth[tweet_id] = TruthRecord(topic=topic, account_kind=kind, origin=origin)
    return tweets, truth


def truth_topic_counts(truth: Iterable[TruthRecord]) -> dict[str, int]:
    counts = {"job": 0, "notjob": 0}
    for record in truth:
        counts[record.topic] += 1
    return counts
