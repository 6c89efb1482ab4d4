#!/usr/bin/env python3
"""Regenerate the bundled sample: data/sample/events.csv and data/sample/archive.json.

The World Series 2024 and Super Bowl XLVI-XLVIII rows carry published viewer
counts; every other row and every post is synthetic. Output is a pure function
of the seed.
"""
import argparse
import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

SUBREDDIT = {
    "Super_Bowl": "nfl",
    "World_Series": "baseball",
    "NBA_Finals": "nba",
    "Stanley_Cup": "hockey",
    "MLS_Cup": "MLS",
}
TITLE = {
    "Super_Bowl": "Super Bowl",
    "World_Series": "World Series",
    "NBA_Finals": "NBA Finals",
    "Stanley_Cup": "Stanley Cup",
    "MLS_Cup": "MLS Cup",
}

# name, sport, year, teams, local start, utc offset, viewers (M), posts, comments, score
EVENTS = [
    ("WS G1 2024", "World_Series", 2024, ("LAD", "NYY"), "2024-10-25T17:11", "-07:00", 14.16, None, None, None),
    ("WS G2 2024", "World_Series", 2024, ("LAD", "NYY"), "2024-10-26T17:15", "-07:00", 13.71, None, None, None),
    ("WS G3 2024", "World_Series", 2024, ("LAD", "NYY"), "2024-10-28T17:17", "-07:00", 13.21, None, None, None),
    ("WS G4 2024", "World_Series", 2024, ("LAD", "NYY"), "2024-10-29T17:08", "-07:00", 16.28, None, None, None),
    ("WS G5 2024", "World_Series", 2024, ("LAD", "NYY"), "2024-10-30T17:08", "-07:00", 18.15, None, None, None),
    ("SB XLVI", "Super_Bowl", 2012, ("NYG", "NEP"), "2012-02-05T18:30", "-05:00", 111.35, 98, 2067, 1277),
    ("SB XLVII", "Super_Bowl", 2013, ("BAL", "SF"), "2013-02-03T17:30", "-06:00", 108.69, 107, 2099, 4923),
    ("SB XLVIII", "Super_Bowl", 2014, ("SEA", "DEN"), "2014-02-02T18:30", "-05:00", 112.19, 160, 2237, 3077),
    ("SB XLIX", "Super_Bowl", 2015, ("NEP", "SEA"), "2015-02-01T16:30", "-07:00", 114.40, None, None, None),
    ("SB 50", "Super_Bowl", 2016, ("DEN", "CAR"), "2016-02-07T15:30", "-08:00", 111.90, None, None, None),
    ("SB LI", "Super_Bowl", 2017, ("NEP", "ATL"), "2017-02-05T17:30", "-06:00", 111.30, None, None, None),
    ("NBA G1 2019", "NBA_Finals", 2019, ("TOR", "GSW"), "2019-05-30T21:00", "-04:00", 13.38, None, None, None),
    ("NBA G2 2019", "NBA_Finals", 2019, ("TOR", "GSW"), "2019-06-02T20:00", "-04:00", 14.10, None, None, None),
    ("NBA G3 2019", "NBA_Finals", 2019, ("TOR", "GSW"), "2019-06-05T21:00", "-04:00", 14.48, None, None, None),
    ("NBA G4 2019", "NBA_Finals", 2019, ("TOR", "GSW"), "2019-06-07T21:00", "-04:00", 15.33, None, None, None),
    ("NBA G5 2019", "NBA_Finals", 2019, ("TOR", "GSW"), "2019-06-10T21:00", "-04:00", 18.34, None, None, None),
    ("SC G4 2019", "Stanley_Cup", 2019, ("STL", "BOS"), "2019-06-03T20:00", "-05:00", 4.81, None, None, None),
    ("SC G5 2019", "Stanley_Cup", 2019, ("STL", "BOS"), "2019-06-06T20:00", "-04:00", 5.28, None, None, None),
    ("SC G6 2019", "Stanley_Cup", 2019, ("STL", "BOS"), "2019-06-09T20:00", "-05:00", 5.64, None, None, None),
    ("SC G7 2019", "Stanley_Cup", 2019, ("STL", "BOS"), "2019-06-12T20:00", "-04:00", 8.72, None, None, None),
    ("MLS Cup 2017", "MLS_Cup", 2017, ("TOR", "SEA"), "2017-12-09T16:00", "-05:00", 1.43, None, None, None),
    ("MLS Cup 2018", "MLS_Cup", 2018, ("ATL", "POR"), "2018-12-08T20:00", "-05:00", 1.19, None, None, None),
    ("MLS Cup 2019", "MLS_Cup", 2019, ("SEA", "TOR"), "2019-11-10T12:00", "-08:00", 1.47, None, None, None),
    ("MLS Cup 2021", "MLS_Cup", 2021, ("NYC", "POR"), "2021-12-11T12:00", "-08:00", 1.03, None, None, None),
]

POSITIVE = ["great", "awesome", "love", "excited", "amazing", "hyped", "best", "fun", "clutch", "legendary", "good"]
NEGATIVE = ["terrible", "worried", "rigged", "boring", "hate", "nervous", "awful", "bad", "trash"]
BOOSTERS = ["very", "really", "so", "extremely", ""]
TEMPLATES = [
    "{title} prediction thread: {team} looks {mood}",
    "{booster} {mood} about {team} in the {title}",
    "Anyone else {mood} for tonight? {team} {punct}",
    "{team} fans, how are we feeling? I'm {booster} {mood}",
    "Not {mood} about this {title} matchup",
    "{title} hype {punct} {team} vs {other}",
    "{MOOD} {team} {punct}",
    "Injury report ahead of the {title}: {team} depth chart",
    "Ticket prices for the {title} are {mood}",
    "{title} halftime show thoughts",
]
BODIES = [
    "",
    "",
    "Honestly this could go either way. {team} defense has been {mood}.",
    "I never thought {team} would make it this far, {mood} season.",
    "[removed]",
    "[deleted]",
    "Long time lurker. {booster} {mood} for the game.",
]


def utc_epoch(local, offset):
    return int(datetime.fromisoformat(local + offset).timestamp())


def split_total(rng, total, parts, low):
    """Random non-negative-ish integers with an exact sum, each >= low."""
    if parts == 0:
        return []
    cuts = sorted(rng.randint(0, total - low * parts) for _ in range(parts - 1))
    edges = [0] + cuts + [total - low * parts]
    return [low + edges[i + 1] - edges[i] for i in range(parts)]


def make_text(rng, title, teams, positive_bias):
    team = rng.choice(teams)
    other = [t for t in teams if t != team][0] if len(teams) > 1 else team
    mood = rng.choice(POSITIVE if rng.random() < positive_bias else NEGATIVE)
    fields = dict(
        title=title,
        team=team,
        other=other,
        mood=mood,
        MOOD=mood.upper(),
        booster=rng.choice(BOOSTERS),
        punct=rng.choice(["", "!", "!!", "!!!", "?"]),
    )
    text = rng.choice(TEMPLATES).format(**fields)
    body = rng.choice(BODIES).format(**fields)
    return " ".join(text.split()), body


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "sample")
    ap.add_argument("--seed", type=int, default=20250101)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)

    rows = []
    posts = []
    next_id = [0]

    def post(created, subreddit, title, body, score, comments):
        next_id[0] += 1
        posts.append(
            dict(
                id=f"t3_{next_id[0]:06x}",
                title=title,
                selftext=body,
                score=score,
                num_comments=comments,
                created_utc=created,
                subreddit=subreddit,
            )
        )

    for name, sport, year, teams, local, offset, viewers, n_posts, n_comments, n_score in EVENTS:
        start = utc_epoch(local, offset)
        after = start - 72 * 3600
        sub = SUBREDDIT[sport]
        title = TITLE[sport]
        rows.append((name, sport, year, ";".join(teams), local + offset, sub, viewers))

        if n_posts is None:
            # Engagement grows with audience size, with noise.
            n_posts = max(3, int(round(7.0 * viewers ** 0.62 * rng.uniform(0.9, 1.1))))
            n_posts = min(n_posts, 150)
            n_comments = int(n_posts * rng.uniform(14, 19))
            n_score = int(n_posts * rng.uniform(20, 32))
        positive_bias = rng.uniform(0.55, 0.85)

        times = sorted((rng.randint(after, start - 1) for _ in range(n_posts)), reverse=True)
        times[-1] = after  # window start is inclusive
        if n_posts > 100:
            # Posts 100 and 101 (newest first) share a second, straddling the first page boundary.
            times[100] = times[99]
        comments = split_total(rng, n_comments, n_posts, 0)
        # Scores may be negative; shift a random split so the sum stays exact.
        scores = split_total(rng, n_score + 3 * n_posts, n_posts, 0)
        scores = [s - 3 for s in scores]
        for t, c, s in zip(times, comments, scores):
            text, body = make_text(rng, title, list(teams), positive_bias)
            post(t, sub if rng.random() < 0.9 else sub.lower() if sub != sub.lower() else sub.upper(), text, body, s, c)

        # Noise that the fetcher must exclude.
        post(start, sub, f"{title} live thread: {teams[0]} vs {teams[1]}", "", 500, 900)
        post(after - 1, sub, f"{title} is in three days, {teams[0]} fans check in", "", 12, 4)
        post(start + 3600, sub, f"{teams[0]} wins the {title}!", "", 800, 1200)
        post(rng.randint(after, start - 1), "sports", f"{title} pick'em: {teams[1]}", "", 33, 12)
        post(rng.randint(after, start - 1), sub, "Weekly off-topic discussion", "", 5, 40)

    rng.shuffle(posts)
    with open(args.out / "archive.json", "w", encoding="utf-8") as f:
        json.dump({"data": posts}, f, indent=1, ensure_ascii=False)
        f.write("\n")
    with open(args.out / "events.csv", "w", encoding="utf-8", newline="") as f:
        f.write("name,sport,year,teams,start_time,subreddit,avg_viewers_millions\n")
        for r in rows:
            f.write(",".join(str(x) for x in r) + "\n")
    print(f"{len(rows)} events, {len(posts)} posts -> {args.out}")


if __name__ == "__main__":
    main()
