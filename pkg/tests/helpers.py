"""Random databases and formulae shared by the property and acceptance tests."""
from __future__ import annotations

import random
from datetime import date, timedelta

from topnlidb.tdb import Database, build_database
from topnlidb.timecore import Axis, Period
from topnlidb.topast import (
    At, Begin, Culm, End, Exists, For, Interrog, InterrogMxl, Past, Perf, Pred, Pres,
    Variable, ev, pattern, term, well_formed,
)

ORIGIN = date(1994, 1, 1)
CONSTANTS = ("c1", "c2", "c3")
CLASSES = ("state", "activity", "culm_activity", "point", "timeless")


def random_db(rng: random.Random, horizon: int | None = None, n_relations: int | None = None,
              granularity: str = "day") -> Database:
    if horizon is None:
        horizon = rng.choice([rng.randint(8, 40), rng.randint(8, 40), rng.randint(41, 120)])
    per_day = {"day": 1, "hour": 24}[granularity]
    days = max(1, (horizon + 1) // per_day)
    axis = Axis.spanning(ORIGIN, ORIGIN + timedelta(days=days - 1), granularity)
    H = axis.horizon
    n_relations = n_relations or rng.randint(1, 4)
    schema, rows = [], []
    for k in range(n_relations):
        cls = rng.choice(CLASSES)
        arity = rng.choice((1, 2))
        name = f"r{k}"
        schema.append((name, arity, cls))
        for _ in range(rng.randint(1, 5)):
            values = tuple(rng.choice(CONSTANTS) for _ in range(arity))
            if cls == "timeless":
                rows.append((name, values, [], []))
                continue
            periods = []
            for _ in range(rng.randint(1, 3)):
                s = rng.randint(0, H)
                e = min(H, s + rng.randint(0, max(1, H // 3)))
                periods.append(Period(s, e))
            rows.append((name, values, periods, []))
    db = build_database(axis, schema, rows)
    # climaxes at a random subset of maximal-period ends
    rows2 = []
    for name, values, periods, _ in rows:
        rel = db.relation(name)
        climaxes = []
        if rel.verb_class == "culm_activity":
            t = rel.lookup(tuple(values))
            climaxes = [p.end for p in t.valid if rng.random() < 0.6]
        rows2.append((name, values, periods, climaxes))
    return build_database(axis, schema, rows2)


class FormulaGen:
    """Closed, well-formed formulae of bounded depth over a database schema."""

    def __init__(self, rng: random.Random, db: Database):
        self.rng = rng
        self.db = db
        self.events = 0
        self.entities = 0

    def fresh_event(self) -> Variable:
        self.events += 1
        return ev(f"e{self.events}")

    def fresh_entity(self) -> Variable:
        self.entities += 1
        return Variable(f"x{self.entities}")

    def args(self, arity: int, scope: list[Variable]):
        out = []
        for _ in range(arity):
            if scope and self.rng.random() < 0.6:
                out.append(self.rng.choice(scope))
            else:
                out.append(term(self.rng.choice(CONSTANTS)))
        return tuple(out)

    def atom_args(self, r, scope):
        if r.tuples and self.rng.random() < 0.5:
            # copy a stored tuple so the atom has a chance of holding
            values = self.rng.choice(r.tuples).values
            return tuple(self.rng.choice(scope) if scope and self.rng.random() < 0.3
                         else term(v) for v in values)
        return self.args(r.arity, scope)

    def atom(self, scope):
        rels = list(self.db.relations.values())
        culm = [r for r in rels if r.verb_class == "culm_activity"]
        if culm and self.rng.random() < 0.35:
            r = self.rng.choice(culm)
            return Culm(Pred(r.predicate, self.atom_args(r, scope)))
        r = self.rng.choice(rels)
        return Pred(r.predicate, self.atom_args(r, scope))

    def date_pattern(self):
        axis = self.db.axis
        p = self.rng.randint(0, axis.horizon)
        stored = [q for r in self.db.relations.values() for t in r.tuples for q in t.valid]
        if stored and self.rng.random() < 0.7:
            q = self.rng.choice(stored)
            p = self.rng.randint(q.start, q.end)
        d = axis.to_datetime(p).date()
        return pattern(f"{d.day}/{d.month}/{d.year}")

    def time_pattern(self):
        return pattern(f"{self.rng.randint(0, 23)}:00")

    def formula(self, depth: int, scope: list[Variable]):
        if depth <= 0 or self.rng.random() < 0.2:
            return self.atom(scope)
        op = self.rng.choice(("Past", "Pres", "Perf", "At", "For", "Begin", "End", "Exists",
                              "Past", "At", "Perf"))
        sub = lambda sc=scope: self.formula(depth - 1, sc)  # noqa: E731
        if op == "Past":
            return Past(self.fresh_event(), sub())
        if op == "Pres":
            return Pres(self.fresh_event(), sub())
        if op == "Perf":
            return Perf(self.fresh_event(), sub())
        if op == "At":
            if self.db.axis.granularity == "hour" and self.rng.random() < 0.5:
                return At(self.time_pattern(), sub())
            return At(self.date_pattern(), sub())
        if op == "For":
            unit = "hour" if self.db.axis.granularity == "hour" else "day"
            return For(unit, self.rng.randint(1, 4), sub())
        if op == "Begin":
            return Begin(sub())
        if op == "End":
            return End(sub())
        x = self.fresh_entity()
        return Exists(x, self.restriction(x, scope), sub(scope + [x]))

    def restriction(self, x: Variable, scope):
        rels = [r for r in self.db.relations.values() if r.arity == 1]
        if not rels or self.rng.random() < 0.3:
            return ()
        r = self.rng.choice(rels)
        return (Pred(r.predicate, (x,)),)

    def question(self, depth: int = 4):
        """A random question: yes/no, entity, or when, with depth <= `depth`."""
        kind = self.rng.choice(("bool", "bool", "which", "when", "which-when"))
        prefix = []
        scope: list[Variable] = []
        if kind.startswith("which"):
            for _ in range(self.rng.choice((1, 1, 2))):
                x = self.fresh_entity()
                prefix.append(("?", x, self.restriction(x, scope)))
                scope = scope + [x]
        if kind.endswith("when"):
            e = self.fresh_event()
            inner = self.formula(max(0, depth - 2), scope)
            body = Past(e, inner) if self.rng.random() < 0.7 else Pres(e, inner)
            if depth >= 3 and self.rng.random() < 0.4:
                body = At(self.date_pattern(), body)
            body = InterrogMxl(e, body)
        else:
            body = self.formula(depth, scope)
        for _, x, rest in reversed(prefix):
            body = Interrog(x, rest, body)
        assert not well_formed(body, self.db), (body, well_formed(body, self.db))
        return body


def random_case(seed: int, horizon: int | None = None, depth: int = 4):
    rng = random.Random(seed)
    gran = "hour" if rng.random() < 0.15 else "day"
    if gran == "hour" and horizon is None:
        horizon = rng.choice((47, 71))
    db = random_db(rng, horizon, granularity=gran)
    f = FormulaGen(rng, db).question(depth)
    H = db.axis.horizon
    st = rng.randint(0, H) if rng.random() < 0.3 else rng.randint(H // 2, H)
    return db, f, st


def depth(f) -> int:
    from topnlidb.topast import children
    kids = [c for c in children(f) if not isinstance(c, Pred) or c is getattr(f, "body", None)]
    return 0 if isinstance(f, Pred) else 1 + max((depth(c) for c in kids), default=0)


def point_set(periods) -> set[int]:
    return {x for p in periods for x in range(p.start, p.end + 1)}


def maximal_runs(points: set[int]) -> list[tuple[int, int]]:
    runs, cur = [], None
    for x in sorted(points):
        if cur and x == cur[1] + 1:
            cur[1] = x
        else:
            if cur:
                runs.append(tuple(cur))
            cur = [x, x]
    if cur:
        runs.append(tuple(cur))
    return runs


def dump_database(db: Database) -> str:
    """Database file text reproducing `db` (period bounds as raw point indices)."""
    ax = db.axis
    last = ax.to_datetime(ax.horizon).date()
    first = ax.origin.date()
    lines = [f"axis {first.day}/{first.month}/{first.year} {last.day}/{last.month}/{last.year} "
             f"{ax.granularity}"]
    for rel in db.relations.values():
        lines.append(f"relation {rel.predicate}/{rel.arity} {rel.verb_class}")
    for rel in db.relations.values():
        for t in rel.tuples:
            words = ["tuple", rel.predicate, *t.values]
            if rel.verb_class != "timeless":
                words.append("valid=" + ";".join(f"{p.start}..{p.end}" for p in t.valid))
            if t.climaxes:
                words.append("climax=" + ";".join(str(c) for c in sorted(t.climaxes)))
            lines.append(" ".join(words))
    return "\n".join(lines) + "\n"
