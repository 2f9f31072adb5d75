"""Discrete, bounded time axis: periods, coalesced temporal sets, calendar mapping.

Time points are plain non-negative integers (granule indices counted from the
axis origin). A :class:`Period` is a closed interval of points and a
:class:`TemporalSet` is the canonical maximal-period decomposition of a point
set.
"""
from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from typing import Iterable, Iterator

GRANULARITIES = ("day", "hour", "minute")

# granules per day, per granularity
_PER_DAY = {"day": 1, "hour": 24, "minute": 1440}

# duration units in minutes; months and years use fixed lengths
_UNIT_MINUTES = {
    "minute": 1,
    "hour": 60,
    "day": 1440,
    "week": 7 * 1440,
    "month": 30 * 1440,
    "year": 365 * 1440,
}
_GRAN_MINUTES = {"day": 1440, "hour": 60, "minute": 1}

DATE_RE = re.compile(r"^(\d{1,2})/(\d{1,2})/(\d{2}|\d{4})$")
TIME_RE = re.compile(r"^(\d{1,2}):(\d{2})(am|pm)?$", re.IGNORECASE)


class TimeError(ValueError):
    """Base class for time-axis errors."""


class PeriodError(TimeError):
    pass


class RangeError(TimeError):
    pass


class ResolutionError(TimeError):
    pass


class GranularityError(TimeError):
    pass


@dataclass(frozen=True, order=True)
class Period:
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise PeriodError(
                f"reversed period bounds: start {self.start} > end {self.end}")
        if self.start < 0:
            raise RangeError(f"negative time point {self.start}")

    def __len__(self) -> int:
        return self.end - self.start + 1

    def __contains__(self, point: int) -> bool:
        return self.start <= point <= self.end

    def within(self, other: Period | None) -> bool:
        """True iff every point of self lies in `other`."""
        return other is not None and other.start <= self.start and self.end <= other.end

    def intersect(self, other: Period | None) -> Period | None:
        if other is None:
            return None
        lo, hi = max(self.start, other.start), min(self.end, other.end)
        return Period(lo, hi) if lo <= hi else None

    def points(self) -> range:
        return range(self.start, self.end + 1)

    def __repr__(self) -> str:
        return f"[{self.start},{self.end}]"


def make_period(start: int, end: int, axis: Axis | None = None) -> Period:
    if start > end:
        raise PeriodError(f"reversed period bounds: {start} > {end}")
    if axis is not None:
        for p in (start, end):
            axis.check_point(p)
    return Period(start, end)


@dataclass(frozen=True)
class TemporalSet:
    """Sorted, pairwise disjoint, non-adjacent periods (use :func:`normalize`)."""

    periods: tuple[Period, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.periods)

    def __iter__(self) -> Iterator[Period]:
        return iter(self.periods)

    def __len__(self) -> int:
        return len(self.periods)

    def _locate(self, point: int) -> Period | None:
        i = bisect_right(self.periods, Period(point, point)) - 1
        # a period starting exactly at `point` sorts after Period(point, point)
        # only if its end is larger, so also look one slot ahead
        for j in (i, i + 1):
            if 0 <= j < len(self.periods) and point in self.periods[j]:
                return self.periods[j]
        return None

    def contains(self, p: Period) -> bool:
        q = self._locate(p.start)
        return q is not None and p.end <= q.end

    def contains_point(self, point: int) -> bool:
        return self._locate(point) is not None

    def points(self) -> set[int]:
        return {t for p in self.periods for t in p.points()}

    def intersect(self, window: Period | None) -> TemporalSet:
        if window is None:
            return TemporalSet()
        return TemporalSet(tuple(q for p in self.periods
                                 if (q := p.intersect(window)) is not None))

    def union(self, other: TemporalSet) -> TemporalSet:
        return normalize(list(self.periods) + list(other.periods))

    def __repr__(self) -> str:
        return "{" + ",".join(repr(p) for p in self.periods) + "}"


def normalize(periods: Iterable[Period]) -> TemporalSet:
    """Coalesce overlapping or adjacent periods into maximal periods."""
    merged: list[list[int]] = []
    for p in sorted(periods):
        if merged and p.start <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], p.end)
        else:
            merged.append([p.start, p.end])
    return TemporalSet(tuple(Period(s, e) for s, e in merged))


def contains(ts: TemporalSet, p: Period) -> bool:
    return ts.contains(p)


# ---------------------------------------------------------------- calendar

def parse_date(text: str) -> date:
    m = DATE_RE.match(text.strip())
    if not m:
        raise ResolutionError(f"malformed date {text!r}")
    d, mo, y = int(m.group(1)), int(m.group(2)), m.group(3)
    year = int(y)
    if len(y) == 2:
        year += 1900 if year >= 50 else 2000
    try:
        return date(year, mo, d)
    except ValueError as exc:
        raise ResolutionError(f"invalid date {text!r}: {exc}") from None


def parse_time(text: str) -> tuple[int, int]:
    """'5:00pm' -> (17, 0); '17:00' -> (17, 0)."""
    m = TIME_RE.match(text.strip())
    if not m:
        raise ResolutionError(f"malformed time {text!r}")
    h, mm, ampm = int(m.group(1)), int(m.group(2)), (m.group(3) or "").lower()
    if ampm:
        if not 1 <= h <= 12:
            raise ResolutionError(f"invalid 12-hour time {text!r}")
        h = h % 12 + (12 if ampm == "pm" else 0)
    if h > 23 or mm > 59:
        raise ResolutionError(f"invalid time {text!r}")
    return h, mm


@dataclass(frozen=True)
class Axis:
    origin: datetime
    granularity: str
    horizon: int

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise GranularityError(f"unknown granularity {self.granularity!r}")
        if self.horizon < 1:
            raise RangeError("axis horizon must be >= 1")
        if self.origin.time() != datetime.min.time():
            raise RangeError("axis origin must be at midnight")

    @classmethod
    def spanning(cls, first: str | date, last: str | date, granularity: str = "day") -> Axis:
        """Axis covering whole calendar days `first` .. `last` inclusive."""
        if granularity not in GRANULARITIES:
            raise GranularityError(f"unknown granularity {granularity!r}")
        first = parse_date(first) if isinstance(first, str) else first
        last = parse_date(last) if isinstance(last, str) else last
        days = (last - first).days + 1
        if days < 1:
            raise RangeError(f"axis end {last} precedes origin {first}")
        origin = datetime.combine(first, datetime.min.time())
        return cls(origin, granularity, days * _PER_DAY[granularity] - 1)

    @property
    def full(self) -> Period:
        return Period(0, self.horizon)

    @property
    def step(self) -> timedelta:
        return timedelta(minutes=_GRAN_MINUTES[self.granularity])

    def check_point(self, point: int) -> int:
        if not 0 <= point <= self.horizon:
            raise RangeError(f"time point {point} outside axis [0,{self.horizon}]")
        return point

    def to_datetime(self, point: int) -> datetime:
        return self.origin + point * self.step

    def point_of(self, when: datetime) -> int:
        """Index of the granule containing `when` (may lie off-axis)."""
        return int((when - self.origin) // self.step)

    def day_period(self, d: date) -> Period | None:
        """Granules of calendar day `d`, clipped to the axis; None if disjoint."""
        first = self.point_of(datetime.combine(d, datetime.min.time()))
        last = first + _PER_DAY[self.granularity] - 1
        if last < 0 or first > self.horizon:
            return None
        return Period(max(first, 0), min(last, self.horizon))

    def point_from_text(self, text: str, *, end_of_day: bool = False) -> int:
        """Database/CLI timestamp: integer index, DATE, or DATE@HH:MM / 'DATE HH:MM'."""
        text = text.strip()
        if text.isdigit():
            return self.check_point(int(text))
        datepart, _, timepart = text.replace("@", " ").partition(" ")
        d = parse_date(datepart)
        if timepart.strip():
            h, mm = parse_time(timepart.strip())
            when = datetime.combine(d, datetime.min.time()) + timedelta(hours=h, minutes=mm)
            return self.check_point(self.point_of(when))
        first = self.point_of(datetime.combine(d, datetime.min.time()))
        return self.check_point(first + _PER_DAY[self.granularity] - 1 if end_of_day else first)

    def render_point(self, point: int) -> str:
        t = self.to_datetime(point)
        day = f"{t.day}/{t.month}/{t.year}"
        if self.granularity == "day":
            return day
        if self.granularity == "hour":
            return f"{day} {t.hour:02d}:00"
        return f"{day} {t.hour:02d}:{t.minute:02d}"


def render_period(p: Period, axis: Axis) -> str:
    return f"{axis.render_point(p.start)}..{axis.render_point(p.end)}"


@dataclass(frozen=True)
class DurationUnit:
    name: str
    points: int


UNITS = tuple(_UNIT_MINUTES)


def duration_unit(name: str, granularity: str) -> DurationUnit:
    if name not in _UNIT_MINUTES:
        raise GranularityError(f"unknown duration unit {name!r}")
    minutes, gran = _UNIT_MINUTES[name], _GRAN_MINUTES[granularity]
    if minutes < gran:
        raise GranularityError(f"unit {name!r} is finer than {granularity} granularity")
    return DurationUnit(name, minutes // gran)


def duration_points(unit: DurationUnit | str, n: int, granularity: str = "day") -> int:
    if n < 1:
        raise ValueError(f"duration count must be positive, got {n}")
    if isinstance(unit, str):
        unit = duration_unit(unit, granularity)
    return n * unit.points


def calendar_resolve(expr: str, axis: Axis) -> tuple[Period, ...]:
    """Periods denoted by a date ('1/6/94') or a clock time ('5:00pm') on `axis`.

    A date is the single period covering that day; a clock time is every
    granule of that time-of-day across the axis.
    """
    expr = expr.strip()
    if DATE_RE.match(expr):
        p = axis.day_period(parse_date(expr))
        if p is None:
            raise ResolutionError(f"date {expr} lies outside the axis")
        return (p,)
    if TIME_RE.match(expr):
        h, mm = parse_time(expr)
        if axis.granularity == "day":
            raise GranularityError(f"time of day {expr} on a day-granularity axis")
        if axis.granularity == "hour":
            if mm:
                raise GranularityError(f"time {expr} is finer than hour granularity")
            offset, per_day = h, 24
        else:
            offset, per_day = h * 60 + mm, 1440
        out = tuple(Period(p, p) for p in range(offset, axis.horizon + 1, per_day))
        if not out:
            raise ResolutionError(f"time {expr} does not occur on the axis")
        return out
    raise ResolutionError(f"unrecognised temporal expression {expr!r}")
