"""Denotational evaluation of TOP formulae over a bounded discrete axis.

:func:`holds` is the satisfaction relation, one clause per operator, with
speech time ``st``, localisation window ``lt`` and event time ``et``.
:func:`evaluate` answers a question by enumerating event times and checking
each with :func:`holds`.

Enumeration does not visit all O(H^2) periods blindly. Each subformula yields
*candidate families* (all subperiods of a period, or an explicit list) that
over-approximate the event times where it can hold; every candidate is still
confirmed with :func:`holds`. The over-approximation rests on one property
of the clauses: a formula holds under window ``lt`` exactly when it holds
under the full axis and ``et`` lies inside ``lt``.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from itertools import islice
from typing import Iterator

from .tdb import Database, DatabaseError
from .timecore import Axis, Period, calendar_resolve, duration_points, render_period
from .topast import (
    At, Begin, Constant, Culm, End, Exists, For, Formula, Interrog, InterrogMxl, Past,
    Perf, Pred, Pres, Variable, walk,
)


class EvaluationError(ValueError):
    pass


class ConfigurationError(EvaluationError):
    pass


Env = tuple  # sorted ((var_name, constant), ...)


def _bind(env: Env, var: Variable, value: str) -> Env:
    return tuple(sorted((*[(k, v) for k, v in env if k != var.name], (var.name, value))))


def _lookup(env: Env, name: str) -> str | None:
    for k, v in env:
        if k == name:
            return v
    return None


@dataclass(frozen=True)
class Context:
    st: int
    lt: Period | None
    bindings: Env = ()

    @classmethod
    def initial(cls, db: Database, st: int) -> Context:
        return cls(st, db.axis.full, ())

    def bind(self, var: Variable, value: str) -> Context:
        return Context(self.st, self.lt, _bind(self.bindings, var, value))


@dataclass(frozen=True)
class Answer:
    """``kind`` is 'boolean' (value: bool) or 'bindings' (value: sorted rows)."""

    kind: str
    value: object
    columns: tuple[str, ...] = ()

    @classmethod
    def boolean(cls, v: bool) -> Answer:
        return cls("boolean", bool(v))

    @classmethod
    def rows(cls, columns, rows) -> Answer:
        return cls("bindings", tuple(sorted(set(rows))), tuple(columns))

    def render(self, axis: Axis) -> list[str]:
        if self.kind == "boolean":
            return ["yes" if self.value else "no"]
        if not self.value:
            return ["(no answers)"]
        out = []
        for row in self.value:
            cells = [render_period(c, axis) if isinstance(c, Period) else c for c in row]
            out.append("\t".join(cells))
        return out


# ---------------------------------------------------------- candidate families

def _members(fam) -> Iterator[Period]:
    kind, data = fam
    if kind == "set":
        yield from data
        return
    p = data
    yield p
    for length in range(len(p) - 1, 0, -1):
        for s in range(p.start, p.end - length + 2):
            yield Period(s, s + length - 1)


def _members_by_end(fam) -> Iterator[Period]:
    kind, data = fam
    if kind == "set":
        yield from sorted(data, key=lambda q: (q.end, -q.start))
        return
    for e in data.points():
        for s in range(e, data.start - 1, -1):
            yield Period(s, e)


def maximal_periods(periods) -> list[Period]:
    ps = sorted(set(periods), key=lambda p: (p.start, -p.end))
    out = []
    for p in ps:
        if not any(p.within(q) and p != q for q in ps):
            out.append(p)
    return out


class _Evaluator:
    def __init__(self, db: Database, st: int):
        if not 0 <= st <= db.axis.horizon:
            raise ConfigurationError(f"speech time {st} lies outside the axis [0,{db.axis.horizon}]")
        self.db = db
        self.st = st
        self.full = db.axis.full
        self.past = Period(0, st - 1) if st > 0 else None
        self.now = Period(st, st)
        self.entities = sorted(db.entities)
        self._cands: dict = {}
        self._min_end: dict = {}
        self._ends: dict = {}
        self._starts: dict = {}
        self._resolved: dict = {}

    # ------------------------------------------------------------ helpers
    def resolve(self, pattern) -> tuple[Period, ...]:
        key = (type(pattern), pattern.key)
        if key not in self._resolved:
            self._resolved[key] = tuple(sorted(calendar_resolve(pattern.text, self.db.axis)))
        return self._resolved[key]

    def tuple_for(self, p: Pred, env: Env):
        values = []
        for t in p.terms:
            if isinstance(t, Constant):
                values.append(t.name)
            else:
                v = _lookup(env, t.name)
                if v is None:
                    raise EvaluationError(f"unbound variable {t.name}")
                values.append(v)
        rel = self.db.relation(p.symbol)
        if rel.arity != len(values):
            raise DatabaseError(f"arity mismatch for {p.symbol}")
        tup = rel.lookup(tuple(values))
        return rel, tup

    def restriction_ok(self, restriction, env: Env) -> bool:
        for p in restriction:
            rel, tup = self.tuple_for(p, env)
            if tup is None or not self.db.valid_time(tup, rel):
                return False
        return True

    def witnesses(self, q, env: Env) -> Iterator[Env]:
        for c in self.entities:
            env2 = _bind(env, q.var, c)
            if self.restriction_ok(q.restriction, env2):
                yield env2

    # -------------------------------------------------------- satisfaction
    def holds(self, f: Formula, lt: Period | None, env: Env, et: Period) -> bool:
        if isinstance(f, Pred):
            if not et.within(lt):
                return False
            rel, tup = self.tuple_for(f, env)
            return tup is not None and self.db.valid_time(tup, rel).contains(et)
        if isinstance(f, Culm):
            if not et.within(lt):
                return False
            rel, tup = self.tuple_for(f.body, env)
            return (tup is not None and et in tup.valid.periods and et.end in tup.climaxes)
        if isinstance(f, Past):
            w = self.past.intersect(lt) if self.past is not None else None
            return et.within(w) and self.holds(f.body, w, env, et)
        if isinstance(f, Pres):
            w = self.now.intersect(lt)
            return et.within(w) and self.holds(f.body, w, env, et)
        if isinstance(f, At):
            pats = self.resolve(f.pattern)
            # only a pattern period containing et can admit it
            i = bisect_right(pats, Period(et.start, self.db.axis.horizon))
            for p in pats[max(0, i - 1):i + 1]:
                w = p.intersect(lt)
                if w is not None and et.within(w) and self.holds(f.body, w, env, et):
                    return True
            return False
        if isinstance(f, Perf):
            if not et.within(lt):
                return False
            m = self.min_end(f.body, env)
            return m is not None and m < et.start
        if isinstance(f, (End, Begin)):
            if et.start != et.end or not et.within(lt):
                return False
            pts = self.ends(f.body, env) if isinstance(f, End) else self.starts(f.body, env)
            return et.start in pts
        if isinstance(f, For):
            n = duration_points(f.unit, f.count, self.db.axis.granularity)
            return len(et) == n and self.holds(f.body, lt, env, et)
        if isinstance(f, (Exists, Interrog)):
            return any(self.holds(f.body, lt, env2, et) for env2 in self.witnesses(f, env))
        if isinstance(f, InterrogMxl):
            return self.holds(f.body, lt, env, et)
        raise TypeError(f"not a formula: {f!r}")

    # ------------------------------------------- existential sub-summaries
    def min_end(self, f: Formula, env: Env) -> int | None:
        """Earliest end point of an event time where `f` holds (full window)."""
        key = (f, env)
        if key not in self._min_end:
            best = None
            for fam in self.candidates(f, self.full, env):
                for et in _members_by_end(fam):
                    if best is not None and et.end >= best:
                        break
                    if self.holds(f, self.full, env, et):
                        best = et.end
                        break
            self._min_end[key] = best
        return self._min_end[key]

    def ends(self, f: Formula, env: Env) -> frozenset[int]:
        key = (f, env)
        if key not in self._ends:
            found: set[int] = set()
            for kind, data in self.candidates(f, self.full, env):
                if kind == "set":
                    found.update(q.end for q in data
                                 if q.end not in found and self.holds(f, self.full, env, q))
                    continue
                for e in data.points():
                    if e in found:
                        continue
                    if any(self.holds(f, self.full, env, Period(s, e))
                           for s in range(e, data.start - 1, -1)):
                        found.add(e)
            self._ends[key] = frozenset(found)
        return self._ends[key]

    def starts(self, f: Formula, env: Env) -> frozenset[int]:
        key = (f, env)
        if key not in self._starts:
            found: set[int] = set()
            for kind, data in self.candidates(f, self.full, env):
                if kind == "set":
                    found.update(q.start for q in data
                                 if q.start not in found and self.holds(f, self.full, env, q))
                    continue
                for s in data.points():
                    if s in found:
                        continue
                    if any(self.holds(f, self.full, env, Period(s, e))
                           for e in range(s, data.end + 1)):
                        found.add(s)
            self._starts[key] = frozenset(found)
        return self._starts[key]

    # ------------------------------------------------------------ candidates
    def candidates(self, f: Formula, lt: Period | None, env: Env) -> list:
        """Families of periods covering every et at which `f` may hold."""
        if lt is None:
            return []
        key = (f, lt, env)
        if key in self._cands:
            return self._cands[key]
        out: list = []
        if isinstance(f, Pred):
            rel, tup = self.tuple_for(f, env)
            if tup is not None:
                out = [("sub", q) for q in self.db.valid_time(tup, rel).intersect(lt)]
        elif isinstance(f, Culm):
            rel, tup = self.tuple_for(f.body, env)
            if tup is not None:
                hits = tuple(q for q in tup.valid if q.end in tup.climaxes and q.within(lt))
                out = [("set", hits)] if hits else []
        elif isinstance(f, Past):
            if self.past is not None:
                out = self.candidates(f.body, self.past.intersect(lt), env)
        elif isinstance(f, Pres):
            out = self.candidates(f.body, self.now.intersect(lt), env)
        elif isinstance(f, At):
            for p in self.resolve(f.pattern):
                out.extend(self.candidates(f.body, p.intersect(lt), env))
        elif isinstance(f, Perf):
            m = self.min_end(f.body, env)
            if m is not None and m < self.db.axis.horizon:
                w = Period(m + 1, self.db.axis.horizon).intersect(lt)
                out = [("sub", w)] if w is not None else []
        elif isinstance(f, (End, Begin)):
            pts = self.ends(f.body, env) if isinstance(f, End) else self.starts(f.body, env)
            hits = tuple(Period(p, p) for p in sorted(pts) if p in lt)
            out = [("set", hits)] if hits else []
        elif isinstance(f, For):
            n = duration_points(f.unit, f.count, self.db.axis.granularity)
            hits = []
            for kind, data in self.candidates(f.body, lt, env):
                if kind == "set":
                    hits.extend(q for q in data if len(q) == n)
                else:
                    hits.extend(Period(s, s + n - 1) for s in range(data.start, data.end - n + 2))
            out = [("set", tuple(hits))] if hits else []
        elif isinstance(f, (Exists, Interrog)):
            for env2 in self.witnesses(f, env):
                out.extend(self.candidates(f.body, lt, env2))
        elif isinstance(f, InterrogMxl):
            out = self.candidates(f.body, lt, env)
        self._cands[key] = out
        return out

    # --------------------------------------------------------------- answers
    def satisfiable(self, f: Formula, env: Env) -> bool:
        for fam in self.candidates(f, self.full, env):
            for et in _members(fam):
                if self.holds(f, self.full, env, et):
                    return True
        return False

    def collect_maximal(self, f: Formula, env: Env, found: list[Period]):
        """Add to `found` every satisfying et not inside an already found one."""
        def covered(p):
            return any(p.within(q) for q in found)

        for kind, data in self.candidates(f, self.full, env):
            if kind == "sub":
                if covered(data):
                    continue
                if self.holds(f, self.full, env, data):
                    found.append(data)
                    continue
                members = islice(_members((kind, data)), 1, None)
            else:
                members = sorted(data, key=lambda q: -len(q))
            for et in members:
                if not covered(et) and self.holds(f, self.full, env, et):
                    found.append(et)


def _has_interrogative(f: Formula) -> bool:
    return any(isinstance(g, (Interrog, InterrogMxl)) for g in walk(f))


def holds(db: Database, f: Formula, ctx: Context, et: Period) -> bool:
    return _Evaluator(db, ctx.st).holds(f, ctx.lt, ctx.bindings, et)


def evaluate(db: Database, f: Formula, st: int) -> Answer:
    ev = _Evaluator(db, st)
    columns: list[str] = []
    mxl: list[str] = []
    found: dict[tuple, object] = {}

    def prefix(g: Formula, env: Env, key: tuple):
        if isinstance(g, Interrog):
            for env2 in ev.witnesses(g, env):
                prefix(g.body, env2, key + (_lookup(env2, g.var.name),))
        elif isinstance(g, Exists) and _has_interrogative(g.body):
            for env2 in ev.witnesses(g, env):
                prefix(g.body, env2, key)
        elif isinstance(g, InterrogMxl):
            prefix(g.body, env, key)
        elif mxl:
            ev.collect_maximal(g, env, found.setdefault(key, []))
        elif key not in found and ev.satisfiable(g, env):
            found[key] = True

    g = f
    while isinstance(g, (Exists, Interrog, InterrogMxl)):
        if isinstance(g, Interrog):
            columns.append(g.var.name)
        elif isinstance(g, InterrogMxl):
            mxl.append(g.var.name)
        g = g.body
    prefix(f, (), ())
    if not columns and not mxl:
        return Answer.boolean(bool(found))
    if not mxl:
        return Answer.rows(columns, found.keys())
    rows = [(*key, p) for key, lst in found.items() for p in maximal_periods(lst)]
    return Answer.rows(columns + mxl, rows)


def row_holds(db: Database, f: Formula, st: int, row: tuple, et: Period) -> bool:
    """Does `et` satisfy the body of question `f` under answer row `row`?"""
    ev = _Evaluator(db, st)
    values = [v for v in row if not isinstance(v, Period)]

    def go(g: Formula, env: Env, i: int) -> bool:
        if isinstance(g, Interrog):
            env2 = _bind(env, g.var, values[i])
            return ev.restriction_ok(g.restriction, env2) and go(g.body, env2, i + 1)
        if isinstance(g, Exists) and _has_interrogative(g.body):
            return any(go(g.body, env2, i) for env2 in ev.witnesses(g, env))
        if isinstance(g, InterrogMxl):
            return go(g.body, env, i)
        return ev.holds(g, ev.full, env, et)

    return go(f, (), 0)


def oracle_eval(db: Database, f: Formula, st: int) -> Answer:
    """Answer `f` with the naive reference evaluator in :mod:`topnlidb.oracle`."""
    from .oracle import oracle_eval as naive
    return naive(db, f, st)
