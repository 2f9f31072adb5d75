"""Compile TOP formulae to a temporal relational algebra and evaluate it.

Every algebra node produces rows ``(bindings, periods, mode)`` describing the
event times at which the source subformula holds (under the full window;
narrower windows appear as explicit :class:`WindowRestrict` nodes):

* ``downward_closed`` - every subperiod of every listed period;
* ``exact`` - exactly the listed periods;
* ``points`` - exactly the listed single-point periods.

The mode of a node is fixed by its type, so it is known at translation time.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from itertools import product
from typing import Iterable

from .tdb import Database, DatabaseError
from .timecore import Axis, Period, calendar_resolve, duration_points
from .topast import (
    At, Begin, Constant, Culm, End, Exists, For, Formula, Interrog, InterrogMxl, Past,
    Perf, Pred, Pres, Term, Variable, interrogative_columns, render,
)
from .topeval import Answer, maximal_periods

DC, EXACT, POINTS = "downward_closed", "exact", "points"


class TranslationError(ValueError):
    pass


# ------------------------------------------------------------------ nodes

class AlgExpr:
    """Base class of algebra nodes."""

    mode: str = DC


@dataclass(frozen=True)
class Scan(AlgExpr):
    pred: str
    pattern: tuple[Term, ...]
    source: str = ""

    mode = DC


@dataclass(frozen=True)
class CulmSelect(AlgExpr):
    child: Scan
    source: str = ""

    mode = EXACT


@dataclass(frozen=True)
class BeginPoints(AlgExpr):
    child: AlgExpr
    source: str = ""

    mode = POINTS


@dataclass(frozen=True)
class EndPoints(AlgExpr):
    child: AlgExpr
    source: str = ""

    mode = POINTS


@dataclass(frozen=True)
class WindowRestrict(AlgExpr):
    """Keep event times inside one of `windows` (sorted, disjoint)."""

    child: AlgExpr
    windows: tuple[Period, ...]
    label: str = "at"  # past | pres | at
    source: str = ""
    pattern: str = ""  # calendar expression of an at-window

    @property
    def mode(self):
        return self.child.mode


@dataclass(frozen=True)
class SubperiodsOfDuration(AlgExpr):
    child: AlgExpr
    points: int
    source: str = ""

    mode = EXACT


@dataclass(frozen=True)
class PrecedesJoin(AlgExpr):
    """Event times starting after the end of some child event time."""

    window: Period
    child: AlgExpr
    source: str = ""

    mode = DC


@dataclass(frozen=True)
class EntityJoin(AlgExpr):
    var: Variable
    kind: str  # exists | interrog
    restriction: tuple[Scan, ...]
    body: AlgExpr
    source: str = ""

    @property
    def mode(self):
        return self.body.mode


@dataclass(frozen=True)
class Collect(AlgExpr):
    kind: str  # bool | bindings | maximal
    child: AlgExpr
    columns: tuple[str, ...] = ()
    period_column: str | None = None
    source: str = ""

    @property
    def mode(self):
        return self.child.mode


def alg_children(a: AlgExpr) -> tuple[AlgExpr, ...]:
    if isinstance(a, Scan):
        return ()
    if isinstance(a, EntityJoin):
        return (*a.restriction, a.body)
    return (a.child,)


def restrict(a: AlgExpr, windows: tuple[Period, ...], label: str = "at", source: str = "",
             pattern: str = "") -> AlgExpr:
    """Wrap `a` in a window, pushed beneath any windows already on top of it."""
    if isinstance(a, WindowRestrict):
        inner = restrict(a.child, windows, label, source, pattern)
        return WindowRestrict(inner, a.windows, a.label, a.source, a.pattern)
    return WindowRestrict(a, windows, label, source, pattern)


def entity_vars(a: AlgExpr) -> tuple[str, ...]:
    """Entity variables carried by the rows of `a`, sorted."""
    if isinstance(a, Scan):
        return tuple(sorted({t.name for t in a.pattern if isinstance(t, Variable)}))
    if isinstance(a, EntityJoin):
        names = set(entity_vars(a.body))
        for r in a.restriction:
            names.update(entity_vars(r))
        names.add(a.var.name)
        if a.kind == "exists":
            names.discard(a.var.name)
        return tuple(sorted(names))
    if isinstance(a, Collect):
        return a.columns
    return entity_vars(a.child)


# -------------------------------------------------------------- translate

def translate(f: Formula, st: int, axis: Axis) -> Collect:
    if not 0 <= st <= axis.horizon:
        raise TranslationError(f"speech time {st} lies outside the axis [0,{axis.horizon}]")
    cols, mxl = interrogative_columns(f)
    body = _translate(f, st, axis)
    if mxl is not None:
        kind = "maximal"
    elif cols:
        kind = "bindings"
    else:
        kind = "bool"
    return Collect(kind, body, tuple(v.name for v in cols), mxl.name if mxl else None, render(f))


def _translate(f: Formula, st: int, axis: Axis) -> AlgExpr:
    src = render(f)
    if isinstance(f, Pred):
        return Scan(f.symbol, f.terms, src)
    if isinstance(f, Culm):
        if not isinstance(f.body, Pred):
            raise TranslationError("Culm over non-atomic formula")
        return CulmSelect(Scan(f.body.symbol, f.body.terms, render(f.body)), src)
    if isinstance(f, Past):
        window = (Period(0, st - 1),) if st > 0 else ()
        return restrict(_translate(f.body, st, axis), window, "past", src)
    if isinstance(f, Pres):
        return restrict(_translate(f.body, st, axis), (Period(st, st),), "pres", src)
    if isinstance(f, At):
        pats = tuple(sorted(calendar_resolve(f.pattern.text, axis)))
        return restrict(_translate(f.body, st, axis), pats, "at", src, f.pattern.text)
    if isinstance(f, Perf):
        return PrecedesJoin(axis.full, _translate(f.body, st, axis), src)
    if isinstance(f, End):
        return EndPoints(_translate(f.body, st, axis), src)
    if isinstance(f, Begin):
        return BeginPoints(_translate(f.body, st, axis), src)
    if isinstance(f, For):
        n = duration_points(f.unit, f.count, axis.granularity)
        return SubperiodsOfDuration(_translate(f.body, st, axis), n, src)
    if isinstance(f, (Exists, Interrog)):
        kind = "exists" if isinstance(f, Exists) else "interrog"
        rest = tuple(Scan(p.symbol, p.terms, render(p)) for p in f.restriction)
        return EntityJoin(f.var, kind, rest, _translate(f.body, st, axis), src)
    if isinstance(f, InterrogMxl):
        return _translate(f.body, st, axis)
    raise TranslationError(f"cannot translate {f!r}")


# ------------------------------------------------------------------- rows

@dataclass(frozen=True)
class AlgRow:
    bindings: tuple[tuple[str, str], ...]
    et_periods: tuple[Period, ...]
    mode: str


def _merge_env(a, b):
    """Natural join of two sorted binding tuples, or None on a clash."""
    d = dict(a)
    for k, v in b:
        if d.setdefault(k, v) != v:
            return None
    return tuple(sorted(d.items()))


def _scan_envs(db: Database, s: Scan):
    rel = db.relation(s.pred)
    if rel.arity != len(s.pattern):
        raise DatabaseError(f"arity mismatch for {s.pred}: expected {rel.arity}, got {len(s.pattern)}")
    for t in rel.tuples:
        env = {}
        ok = True
        for term, value in zip(s.pattern, t.values):
            if isinstance(term, Constant):
                ok = term.name == value
            else:
                ok = env.setdefault(term.name, value) == value
            if not ok:
                break
        if ok:
            yield tuple(sorted(env.items())), rel, t


def _windows_hit(windows, p: Period):
    """Windows that overlap `p` (windows sorted and disjoint)."""
    lo = bisect_left([w.end for w in windows], p.start)
    for w in windows[lo:]:
        if w.start > p.end:
            break
        yield w


class _AlgEvaluator:
    def __init__(self, db: Database):
        self.db = db
        self.H = db.axis.horizon

    def rows(self, a: AlgExpr) -> list[AlgRow]:
        meth = getattr(self, "_" + type(a).__name__)
        return [r for r in meth(a) if r.et_periods]

    def _Scan(self, a: Scan):
        for env, rel, t in _scan_envs(self.db, a):
            yield AlgRow(env, self.db.valid_time(t, rel).periods, DC)

    def _CulmSelect(self, a: CulmSelect):
        for env, rel, t in _scan_envs(self.db, a.child):
            yield AlgRow(env, tuple(p for p in t.valid if p.end in t.climaxes), EXACT)

    def _WindowRestrict(self, a: WindowRestrict):
        ws = a.windows
        for r in self.rows(a.child):
            if r.mode == DC:
                out = [p.intersect(w) for p in r.et_periods for w in _windows_hit(ws, p)]
            else:
                out = [p for p in r.et_periods if any(p.within(w) for w in _windows_hit(ws, p))]
            yield AlgRow(r.bindings, tuple(sorted(set(out))), r.mode)

    def _SubperiodsOfDuration(self, a: SubperiodsOfDuration):
        n = a.points
        for r in self.rows(a.child):
            if r.mode == DC:
                out = {Period(s, s + n - 1) for p in r.et_periods
                       for s in range(p.start, p.end - n + 2)}
            else:
                out = {p for p in r.et_periods if len(p) == n}
            yield AlgRow(r.bindings, tuple(sorted(out)), EXACT)

    def _PrecedesJoin(self, a: PrecedesJoin):
        earliest: dict = {}
        for r in self.rows(a.child):
            # the earliest-ending member of a down-closed family is a single point
            m = min(p.start if r.mode == DC else p.end for p in r.et_periods)
            earliest[r.bindings] = min(m, earliest.get(r.bindings, m))
        for env, m in sorted(earliest.items()):
            if m < a.window.end:
                yield AlgRow(env, (Period(max(m + 1, a.window.start), a.window.end),), DC)

    def _points(self, a, pick):
        acc: dict = {}
        for r in self.rows(a.child):
            pts = acc.setdefault(r.bindings, set())
            for p in r.et_periods:
                if r.mode == DC:
                    pts.update(p.points())
                else:
                    pts.add(pick(p))
        for env, pts in sorted(acc.items()):
            yield AlgRow(env, tuple(Period(x, x) for x in sorted(pts)), POINTS)

    def _EndPoints(self, a: EndPoints):
        return self._points(a, lambda p: p.end)

    def _BeginPoints(self, a: BeginPoints):
        return self._points(a, lambda p: p.start)

    def _restriction_envs(self, a: EntityJoin):
        if not a.restriction:
            return [((a.var.name, c),) for c in sorted(self.db.entities)]
        envs = [()]
        for s in a.restriction:
            scanned = [env for env, _, _ in _scan_envs(self.db, s)]
            envs = [m for e1, e2 in product(envs, scanned) if (m := _merge_env(e1, e2)) is not None]
        # bind the quantified variable even if no restriction mentions it
        out = []
        for env in envs:
            if any(k == a.var.name for k, _ in env):
                out.append(env)
            else:
                out.extend(_merge_env(env, ((a.var.name, c),)) for c in sorted(self.db.entities))
        return out

    def _EntityJoin(self, a: EntityJoin):
        rest = sorted(set(self._restriction_envs(a)))
        merged: dict = {}
        for r in self.rows(a.body):
            for renv in rest:
                env = _merge_env(r.bindings, renv)
                if env is None:
                    continue
                if a.kind == "exists":
                    env = tuple(kv for kv in env if kv[0] != a.var.name)
                merged.setdefault(env, set()).update(r.et_periods)
        mode = a.body.mode
        for env, ps in sorted(merged.items()):
            yield AlgRow(env, tuple(sorted(ps)), mode)

    def _Collect(self, a: Collect):
        return self.rows(a.child)


def eval_rows(db: Database, a: AlgExpr) -> list[AlgRow]:
    return _AlgEvaluator(db).rows(a)


def eval_alg(db: Database, a: Collect) -> Answer:
    if not isinstance(a, Collect):
        raise TranslationError("eval_alg expects a Collect root")
    rows = eval_rows(db, a.child)
    if a.kind == "bool":
        return Answer.boolean(bool(rows))
    def key(env):
        d = dict(env)
        return tuple(d[c] for c in a.columns)
    if a.kind == "bindings":
        return Answer.rows(a.columns, {key(r.bindings) for r in rows})
    groups: dict = {}
    for r in rows:
        groups.setdefault(key(r.bindings), []).extend(r.et_periods)
    out = [(*k, p) for k, ps in groups.items() for p in maximal_periods(ps)]
    return Answer.rows((*a.columns, a.period_column), out)


def answer_formula(db: Database, f: Formula, st: int) -> Answer:
    return eval_alg(db, translate(f, st, db.axis))


def show(a: AlgExpr, indent: int = 0) -> str:
    """Indented one-node-per-line dump of an algebra tree."""
    pad = "  " * indent
    if isinstance(a, Scan):
        args = ", ".join(str(t) for t in a.pattern)
        return f"{pad}Scan({a.pred}, [{args}]) {a.mode}"
    if isinstance(a, WindowRestrict):
        head = f"WindowRestrict[{a.label}: {len(a.windows)} window(s)"
        if len(a.windows) == 1:
            head = f"WindowRestrict[{a.label}: {a.windows[0]!r}"
        head += "]"
    elif isinstance(a, SubperiodsOfDuration):
        head = f"SubperiodsOfDuration[{a.points}]"
    elif isinstance(a, PrecedesJoin):
        head = f"PrecedesJoin[{a.window!r}]"
    elif isinstance(a, EntityJoin):
        head = f"EntityJoin[{a.kind} {a.var.name}]"
    elif isinstance(a, Collect):
        head = f"Collect[{a.kind}]"
    else:
        head = type(a).__name__
    lines = [f"{pad}{head} {a.mode}"]
    lines.extend(show(c, indent + 1) for c in alg_children(a))
    return "\n".join(lines)


def iter_nodes(a: AlgExpr) -> Iterable[AlgExpr]:
    yield a
    for c in alg_children(a):
        yield from iter_nodes(c)
