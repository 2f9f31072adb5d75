"""Naive reference evaluator used to cross-check the other two paths.

Every subformula's satisfaction set is computed by testing *every* period of
the axis; valid times are plain Python sets of points. Nothing here is
shared with :mod:`topnlidb.topeval` or :mod:`topnlidb.tralg` beyond the
formula classes, the calendar resolver and the Answer type.
"""
from __future__ import annotations

from itertools import product

from .tdb import Database
from .timecore import Period, calendar_resolve, duration_points
from .topast import (
    At, Begin, Constant, Culm, End, Exists, For, Interrog, InterrogMxl, Past, Perf, Pred, Pres,
)
from .topeval import Answer

MAX_HORIZON = 1000


class OracleGuardError(ValueError):
    pass


def oracle_eval(db: Database, f, st: int) -> Answer:
    H = db.axis.horizon
    if H > MAX_HORIZON:
        raise OracleGuardError(f"axis horizon {H} exceeds oracle limit {MAX_HORIZON}")
    if not 0 <= st <= H:
        raise OracleGuardError(f"speech time {st} outside axis")
    periods = [(s, e) for s in range(H + 1) for e in range(s, H + 1)]
    full = (0, H)
    entities = sorted(db.entities)

    facts = {}
    for sym, rel in db.relations.items():
        for t in rel.tuples:
            pts = set(range(H + 1)) if rel.verb_class == "timeless" else {
                x for p in t.valid for x in range(p.start, p.end + 1)}
            facts[(sym, t.values)] = (pts, set(t.climaxes))

    def inside(p, w):
        return w is not None and w[0] <= p[0] and p[1] <= w[1]

    def meet(a, b):
        if a is None or b is None:
            return None
        lo, hi = max(a[0], b[0]), min(a[1], b[1])
        return (lo, hi) if lo <= hi else None

    def ground(p: Pred, env: dict):
        return (p.symbol, tuple(t.name if isinstance(t, Constant) else env[t.name] for t in p.terms))

    def is_maximal_run(p, pts):
        return (all(x in pts for x in range(p[0], p[1] + 1))
                and (p[0] - 1) not in pts and (p[1] + 1) not in pts)

    calendar = {}

    def resolved(text):
        if text not in calendar:
            calendar[text] = [(q.start, q.end) for q in calendar_resolve(text, db.axis)]
        return calendar[text]

    memo = {}

    def sat(g, lt, env: dict) -> frozenset:
        key = (g, lt, tuple(sorted(env.items())))
        if key not in memo:
            memo[key] = frozenset(p for p in periods if check(g, lt, env, p))
        return memo[key]

    summaries = {}

    def summary(g, env: dict):
        """(earliest end, all ends, all starts) of the full-axis satisfaction set."""
        key = (g, tuple(sorted(env.items())))
        if key not in summaries:
            s = sat(g, full, env)
            summaries[key] = (min((q[1] for q in s), default=None),
                              {q[1] for q in s}, {q[0] for q in s})
        return summaries[key]

    def check(g, lt, env, p) -> bool:
        if isinstance(g, Pred):
            fact = facts.get(ground(g, env))
            return inside(p, lt) and fact is not None and all(
                x in fact[0] for x in range(p[0], p[1] + 1))
        if isinstance(g, Culm):
            fact = facts.get(ground(g.body, env))
            return (inside(p, lt) and fact is not None and is_maximal_run(p, fact[0])
                    and p[1] in fact[1])
        if isinstance(g, Past):
            w = meet(lt, (0, st - 1)) if st > 0 else None
            return inside(p, w) and check(g.body, w, env, p)
        if isinstance(g, Pres):
            w = meet(lt, (st, st))
            return inside(p, w) and check(g.body, w, env, p)
        if isinstance(g, At):
            # every clause demands p inside its window, so only windows around p matter
            for q in resolved(g.pattern.text):
                if inside(p, q) and check(g.body, meet(lt, q), env, p):
                    return True
            return False
        if isinstance(g, Perf):
            first_end = summary(g.body, env)[0]
            return inside(p, lt) and first_end is not None and first_end < p[0]
        if isinstance(g, End):
            return p[0] == p[1] and inside(p, lt) and p[0] in summary(g.body, env)[1]
        if isinstance(g, Begin):
            return p[0] == p[1] and inside(p, lt) and p[0] in summary(g.body, env)[2]
        if isinstance(g, For):
            n = duration_points(g.unit, g.count, db.axis.granularity)
            return p[1] - p[0] + 1 == n and check(g.body, lt, env, p)
        if isinstance(g, (Exists, Interrog)):
            for c in entities:
                env2 = {**env, g.var.name: c}
                if restriction_ok(g.restriction, env2) and check(g.body, lt, env2, p):
                    return True
            return False
        if isinstance(g, InterrogMxl):
            return check(g.body, lt, env, p)
        raise TypeError(f"not a formula: {g!r}")

    def restriction_ok(preds, env):
        for r in preds:
            fact = facts.get(ground(r, env))
            if fact is None or not fact[0]:
                return False
        return True

    # interrogative prefix: enumerate every assignment to the quantifier
    # variables that carry interrogatives below them
    prefix = []
    g = f
    while isinstance(g, (Exists, Interrog, InterrogMxl)):
        below = [h for h in _nodes(g.body) if isinstance(h, (Interrog, InterrogMxl))]
        if isinstance(g, Exists) and not below:
            break
        prefix.append(g)
        g = g.body
    body = g
    quant = [q for q in prefix if not isinstance(q, InterrogMxl)]
    cols = [q.var.name for q in quant if isinstance(q, Interrog)]
    mxl = [q.var.name for q in prefix if isinstance(q, InterrogMxl)]

    results: dict[tuple, set] = {}
    for combo in product(entities, repeat=len(quant)):
        env = {}
        ok = True
        for q, c in zip(quant, combo):
            env[q.var.name] = c
            if not restriction_ok(q.restriction, env):
                ok = False
                break
        if not ok:
            continue
        s = sat(body, full, env)
        if s:
            key = tuple(env[c] for c in cols)
            results.setdefault(key, set()).update(s)

    if not cols and not mxl:
        return Answer.boolean(bool(results))
    if not mxl:
        return Answer.rows(cols, results.keys())
    rows = []
    for key, s in results.items():
        for p in s:
            if not any(q != p and q[0] <= p[0] and p[1] <= q[1] for q in s):
                rows.append((*key, Period(*p)))
    return Answer.rows(cols + mxl, rows)


def _nodes(f):
    yield f
    if isinstance(f, Pred):
        return
    if isinstance(f, (Exists, Interrog)):
        yield from f.restriction
    yield from _nodes(f.body)
