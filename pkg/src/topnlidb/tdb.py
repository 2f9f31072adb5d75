"""In-memory valid-time database with coalesced tuples and climax points.

File format (one directive per line, ``#`` starts a comment)::

    axis 1/1/1994 31/12/1995 day
    relation contain/2 state
    tuple contain tank2 water valid=1/6/1994..30/6/1994
    relation fixing/2 culm_activity
    tuple fixing john eng2 valid=2/6/1994..5/6/1994 climax=5/6/1994
    relation engine/1 timeless
    tuple engine eng2

Timestamps are dates (a period bound covers the whole day), ``DATE@HH:MM``
on finer axes, or raw point indices.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .timecore import Axis, Period, TemporalSet, TimeError, normalize
from .topast import Constant, Term, Variable

VERB_CLASSES = ("state", "activity", "culm_activity", "point", "timeless")


class DatabaseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class Tuple:
    values: tuple[str, ...]
    valid: TemporalSet
    climaxes: frozenset[int] = frozenset()


@dataclass(frozen=True)
class Relation:
    predicate: str
    arity: int
    verb_class: str
    tuples: tuple[Tuple, ...] = ()
    index: Mapping[tuple[str, ...], Tuple] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {t.values: t for t in self.tuples})

    def lookup(self, values: tuple[str, ...]) -> Tuple | None:
        return self.index.get(values)


@dataclass(frozen=True)
class Database:
    axis: Axis
    relations: Mapping[str, Relation]
    entities: frozenset[str]

    def relation(self, pred: str) -> Relation:
        try:
            return self.relations[pred]
        except KeyError:
            raise DatabaseError(f"unknown predicate {pred}") from None

    def predicate_info(self, symbol: str):
        rel = self.relations.get(symbol)
        return None if rel is None else (rel.arity, rel.verb_class)

    def valid_time(self, t: Tuple, rel: Relation) -> TemporalSet:
        if rel.verb_class == "timeless":
            return TemporalSet((self.axis.full,))
        return t.valid


def build_database(axis: Axis, schema: Iterable[tuple[str, int, str]],
                   rows: Iterable[tuple] = ()) -> Database:
    """Assemble a database, coalescing value-equivalent tuples.

    `rows` holds ``(pred, values, periods, climaxes)`` entries; periods and
    climaxes are point indices already on `axis`.
    """
    decl = {}
    for pred, arity, cls in schema:
        if cls not in VERB_CLASSES:
            raise DatabaseError(f"unknown class {cls!r}")
        if pred in decl:
            raise DatabaseError(f"duplicate relation {pred}")
        decl[pred] = (arity, cls)
    acc: dict[str, dict[tuple, list]] = {p: {} for p in decl}
    for pred, values, periods, climaxes in rows:
        if pred not in decl:
            raise DatabaseError(f"tuple for undeclared relation {pred}")
        arity, cls = decl[pred]
        values = tuple(values)
        if len(values) != arity:
            raise DatabaseError(f"{pred} expects {arity} values, got {len(values)}")
        for p in periods:
            axis.check_point(p.start)
            axis.check_point(p.end)
        if climaxes and cls != "culm_activity":
            raise DatabaseError(f"climax points given for non-culminating relation {pred}")
        slot = acc[pred].setdefault(values, [[], set()])
        slot[0].extend(periods)
        slot[1].update(climaxes)
    relations = {}
    entities: set[str] = set()
    for pred, (arity, cls) in decl.items():
        tuples = []
        for values, (periods, climaxes) in sorted(acc[pred].items()):
            valid = normalize(periods)
            if cls != "timeless" and not valid:
                raise DatabaseError(f"{pred}{values} has an empty valid time")
            ends = {p.end for p in valid}
            orphans = sorted(set(climaxes) - ends)
            if orphans:
                raise DatabaseError(
                    f"climax {orphans[0]} of {pred}{values} is not the end of a maximal period")
            tuples.append(Tuple(values, valid, frozenset(climaxes)))
            entities.update(values)
        relations[pred] = Relation(pred, arity, cls, tuple(tuples))
    return Database(axis, relations, frozenset(entities))


_REL_RE = re.compile(r"^([a-z_][a-z0-9_]*)/(\d+)$")


def load_database(text: str) -> Database:
    axis = None
    schema, rows = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0]
        try:
            if head == "axis":
                if axis is not None:
                    raise DatabaseError("duplicate axis declaration", lineno)
                if len(words) != 4:
                    raise DatabaseError("expected: axis FIRST-DATE LAST-DATE GRANULARITY", lineno)
                axis = Axis.spanning(words[1], words[2], words[3])
            elif head == "relation":
                if len(words) != 3 or not _REL_RE.match(words[1]):
                    raise DatabaseError("expected: relation NAME/ARITY CLASS", lineno)
                name, arity = _REL_RE.match(words[1]).groups()
                if words[2] not in VERB_CLASSES:
                    raise DatabaseError(f"unknown class {words[2]!r}", lineno)
                schema.append((name, int(arity), words[2]))
            elif head == "tuple":
                if axis is None:
                    raise DatabaseError("tuple before axis declaration", lineno)
                rows.append(_parse_tuple(words[1:], axis, dict((s[0], s) for s in schema), lineno))
            else:
                raise DatabaseError(f"unknown directive {head!r}", lineno)
        except TimeError as exc:
            raise DatabaseError(str(exc), lineno) from None
    if axis is None:
        raise DatabaseError("missing axis declaration")
    try:
        return build_database(axis, schema, rows)
    except TimeError as exc:
        raise DatabaseError(str(exc)) from None


def _parse_tuple(words: list[str], axis: Axis, schema: dict, lineno: int):
    if not words:
        raise DatabaseError("empty tuple", lineno)
    pred = words[0]
    if pred not in schema:
        raise DatabaseError(f"tuple for undeclared relation {pred}", lineno)
    _, arity, cls = schema[pred]
    values, periods, climaxes = [], [], []
    for w in words[1:]:
        if w.startswith("valid="):
            for part in w[6:].split(";"):
                lo, sep, hi = part.partition("..")
                if not sep:
                    raise DatabaseError(f"malformed period {part!r}", lineno)
                start = axis.point_from_text(lo)
                end = axis.point_from_text(hi, end_of_day=True)
                if start > end:
                    raise DatabaseError(f"reversed period {part!r}", lineno)
                periods.append(Period(start, end))
        elif w.startswith("climax="):
            climaxes.extend(axis.point_from_text(c, end_of_day=True) for c in w[7:].split(";"))
        else:
            values.append(w)
    if len(values) != arity:
        raise DatabaseError(f"{pred} expects {arity} values, got {len(values)}", lineno)
    if cls == "timeless":
        if periods:
            raise DatabaseError(f"timeless tuple {pred} takes no valid=", lineno)
    elif not periods:
        raise DatabaseError(f"tuple {pred} needs valid=", lineno)
    return pred, tuple(values), periods, climaxes


def denotation(db: Database, pred: str, pattern: Iterable[Term],
               bindings: Mapping[Variable, str] | None = None):
    """Rows ``(bindings, valid, climaxes)`` of tuples matching `pattern`."""
    rel = db.relation(pred)
    pattern = tuple(pattern)
    if len(pattern) != rel.arity:
        raise DatabaseError(f"arity mismatch for {pred}: expected {rel.arity}, got {len(pattern)}")
    bindings = bindings or {}
    out = []
    for t in rel.tuples:
        env = {}
        for term, value in zip(pattern, t.values):
            if isinstance(term, Constant):
                ok = term.name == value
            else:
                want = bindings.get(term, env.get(term))
                ok = want is None or want == value
                env[term] = value
            if not ok:
                break
        else:
            out.append((env, db.valid_time(t, rel), t.climaxes))
    return out


def snapshot(db: Database, pred: str, t: int) -> set[tuple[str, ...]]:
    rel = db.relation(pred)
    db.axis.check_point(t)
    return {tup.values for tup in rel.tuples if db.valid_time(tup, rel).contains_point(t)}
