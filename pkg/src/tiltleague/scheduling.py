"""Single round-robin calendars via the circle method.

A league of ``2n`` teams plays ``2n - 1`` rounds; each round is a perfect
matching and every unordered pair meets exactly once across the season.
Pairs are stored as ``(low, high)`` index tuples and each round is sorted by
its first coordinate so calendars compare structurally.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

Round = tuple[tuple[int, int], ...]


class SchedulingError(ValueError):
    """Calendar construction or validation failure."""


@dataclass(frozen=True)
class Calendar:
    two_n: int
    rounds: tuple[Round, ...]

    def opponent_of(self, team: int, round_index: int) -> int:
        """Opponent of ``team`` in round ``round_index`` (0-based)."""
        for i, j in self.rounds[round_index]:
            if i == team:
                return j
            if j == team:
                return i
        raise SchedulingError(f"team {team} missing from round {round_index}")


def _normalize(two_n: int, raw_rounds: list[list[tuple[int, int]]]) -> Calendar:
    rounds = tuple(
        tuple(sorted((min(i, j), max(i, j)) for i, j in rnd))
        for rnd in raw_rounds)
    return Calendar(two_n, rounds)


def circle_calendar(two_n: int) -> Calendar:
    """Classic circle construction: team 0 stays fixed, others rotate."""
    if two_n < 2 or two_n % 2 != 0:
        raise SchedulingError(f"league size must be even and >= 2, got {two_n}")
    others = list(range(1, two_n))
    raw = []
    for r in range(1, two_n):
        rot = others[r - 1:] + others[:r - 1]
        matches = [(0, rot[0])]
        for i in range(1, two_n // 2):
            matches.append((rot[i], rot[two_n - 1 - i]))
        raw.append(matches)
    cal = _normalize(two_n, raw)
    validate_calendar(cal)
    return cal


def canonical_focal_calendar(two_n: int) -> Calendar:
    """Circle calendar relabelled so team 0 meets team j in round j.

    Rounds are 1-based in that statement: the pair ``(0, j)`` appears in
    ``rounds[j - 1]``. The relabelling permutes only the non-focal teams.
    """
    base = circle_calendar(two_n)
    sigma = {0: 0}
    for r in range(two_n - 1):
        sigma[base.opponent_of(0, r)] = r + 1
    raw = [[(sigma[i], sigma[j]) for i, j in rnd] for rnd in base.rounds]
    cal = _normalize(two_n, raw)
    validate_calendar(cal)
    for r in range(two_n - 1):
        if cal.opponent_of(0, r) != r + 1:
            raise SchedulingError("focal relabelling failed")
    return cal


def validate_calendar(cal: Calendar) -> None:
    """Check perfect matchings per round and exact all-pairs coverage."""
    two_n = cal.two_n
    if len(cal.rounds) != two_n - 1:
        raise SchedulingError(
            f"expected {two_n - 1} rounds, got {len(cal.rounds)}")
    seen: set[tuple[int, int]] = set()
    for r, rnd in enumerate(cal.rounds):
        teams = [t for pair in rnd for t in pair]
        if sorted(teams) != list(range(two_n)):
            raise SchedulingError(f"round {r} is not a perfect matching")
        for pair in rnd:
            if pair in seen:
                raise SchedulingError(f"pair {pair} scheduled twice")
            seen.add(pair)
    want = {(i, j) for i in range(two_n) for j in range(i + 1, two_n)}
    if seen != want:
        raise SchedulingError("calendar does not cover every pair exactly once")


def calendar_to_csv(cal: Calendar, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "team_i", "team_j"])
        for r, rnd in enumerate(cal.rounds):
            for i, j in rnd:
                writer.writerow([r + 1, i, j])


def calendar_from_csv(path: str | Path) -> Calendar:
    rows: dict[int, list[tuple[int, int]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["round", "team_i", "team_j"]:
            raise SchedulingError(
                f"expected header round,team_i,team_j in {path}")
        for row in reader:
            r = int(row["round"])
            rows.setdefault(r, []).append((int(row["team_i"]), int(row["team_j"])))
    if not rows or sorted(rows) != list(range(1, len(rows) + 1)):
        raise SchedulingError(f"rounds in {path} must be 1..R without gaps")
    two_n = 2 * len(rows[1])
    cal = _normalize(two_n, [rows[r] for r in sorted(rows)])
    validate_calendar(cal)
    return cal
