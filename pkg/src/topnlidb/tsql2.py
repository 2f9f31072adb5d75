"""TSQL2-style text for compiled TOP formulae, plus a recognizer for the dialect.

The text is for inspection only; nothing here executes it. Each algebra node
becomes one SELECT block, nested as a derived table inside its parent's
block and preceded by a ``-- TOP:`` comment naming the subformula it
computes. See ``docs/tsql2-dialect.md`` for the grammar.
"""
from __future__ import annotations

import re
from itertools import count

from .timecore import Axis, Period, render_period
from .topast import Constant, Formula, Variable
from .tralg import (
    DC, BeginPoints, Collect, CulmSelect, EndPoints, EntityJoin, PrecedesJoin, Scan,
    SubperiodsOfDuration, WindowRestrict, entity_vars, translate,
)

INDENT = "  "


class DialectError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


def _q(text: str) -> str:
    return "'" + text.replace("'", "''") + "'"


class _Emitter:
    def __init__(self, axis: Axis):
        self.axis = axis
        self.ids = count(1)

    def lit(self, p: Period) -> str:
        return f"PERIOD {_q(render_period(p, self.axis))}"

    def derived(self, node, alias: str) -> list[str]:
        inner = self.block(node)
        return ["(", *[INDENT + line for line in inner], f") AS {alias}"]

    @staticmethod
    def assemble(head: list[str], sources: list[list[str]], where: list[str],
                 tail: list[str] = ()) -> list[str]:
        lines = list(head)
        for i, src in enumerate(sources):
            first = ("FROM " if i == 0 else "  , ") + src[0]
            lines.append(first)
            lines.extend(src[1:])
        if where:
            lines.append("WHERE " + where[0])
            lines.extend("  AND " + w for w in where[1:])
        lines.extend(tail)
        return lines

    @staticmethod
    def select(alias: str, names, valid: str | None, distinct=False) -> list[str]:
        cols = ", ".join(f"{alias}.{n}" for n in names) or "*"
        kw = "SELECT DISTINCT " if distinct else "SELECT "
        out = [kw + cols]
        if valid is not None:
            out.append("VALID " + valid)
        return out

    def block(self, a) -> list[str]:
        meth = getattr(self, "_" + type(a).__name__)
        return [f"-- TOP: {a.source}", *meth(a)] if a.source else meth(a)

    def _Scan(self, a: Scan, climax: bool = False) -> list[str]:
        t = f"t{next(self.ids)}"
        first: dict[str, int] = {}
        where = []
        for i, term in enumerate(a.pattern, 1):
            if isinstance(term, Constant):
                where.append(f"{t}.a{i} = {_q(term.name)}")
            elif term.name in first:
                where.append(f"{t}.a{i} = {t}.a{first[term.name]}")
            else:
                first[term.name] = i
        cols = [f"{t}.a{first[n]} AS {n}" for n in sorted(first)]
        if climax:
            cols.append(f"{t}.climax AS climax")
        head = ["SELECT " + (", ".join(cols) or "*"), f"VALID VALID({t})"]
        return self.assemble(head, [[f"{a.pred.upper()} AS {t}"]], where)

    def _CulmSelect(self, a: CulmSelect) -> list[str]:
        t = f"t{next(self.ids)}"
        inner = [f"-- TOP: {a.child.source}", *self._Scan(a.child, climax=True)]
        src = ["(", *[INDENT + x for x in inner], f") AS {t}"]
        head = self.select(t, entity_vars(a), f"VALID({t})")
        return self.assemble(head, [src], [f"END(VALID({t})) = {t}.climax"])

    def _WindowRestrict(self, a: WindowRestrict) -> list[str]:
        t = f"t{next(self.ids)}"
        src = self.derived(a.child, t)
        dc = a.child.mode == DC
        names = entity_vars(a)
        if not a.windows:
            return self.assemble(self.select(t, names, f"VALID({t})"), [src], ["1 = 0"])
        if len(a.windows) > 1:
            w = f"w{next(self.ids)}"
            cal = [f"CALENDAR({_q(a.pattern)}) AS {w}"]
            if dc:
                head = self.select(t, names, f"INTERSECT(VALID({t}), VALID({w}))")
                cond = f"VALID({t}) OVERLAPS VALID({w})"
            else:
                head = self.select(t, names, f"VALID({t})")
                cond = f"VALID({w}) CONTAINS VALID({t})"
            return self.assemble(head, [src, cal], [cond])
        win = a.windows[0]
        if dc:
            head = self.select(t, names, f"INTERSECT(VALID({t}), {self.lit(win)})")
        else:
            head = self.select(t, names, f"VALID({t})")
        if a.label == "past":
            # everything strictly before the speech-time point
            now = self.lit(Period(win.end + 1, win.end + 1))
            cond = f"{'BEGIN(VALID(' + t + '))' if dc else 'VALID(' + t + ')'} PRECEDES {now}"
        elif dc:
            cond = f"VALID({t}) OVERLAPS {self.lit(win)}"
        else:
            cond = f"{self.lit(win)} CONTAINS VALID({t})"
        return self.assemble(head, [src], [cond])

    def _SubperiodsOfDuration(self, a: SubperiodsOfDuration) -> list[str]:
        t = f"t{next(self.ids)}"
        src = self.derived(a.child, t)
        names = entity_vars(a)
        if a.child.mode == DC:
            p = f"p{next(self.ids)}"
            head = self.select(t, names, f"VALID({p})")
            return self.assemble(head, [src, [f"SUBPERIODS(VALID({t}), {a.points}) AS {p}"]], [])
        head = self.select(t, names, f"VALID({t})")
        return self.assemble(head, [src], [f"DURATION(VALID({t})) = {a.points}"])

    def _PrecedesJoin(self, a: PrecedesJoin) -> list[str]:
        t = f"t{next(self.ids)}"
        src = self.derived(a.child, t)
        names = entity_vars(a)
        edge = "BEGIN" if a.child.mode == DC else "END"
        valid = f"PERIOD(MIN({edge}(VALID({t}))) + 1, END({self.lit(a.window)}))"
        tail = ["GROUP BY " + ", ".join(f"{t}.{n}" for n in names)] if names else []
        return self.assemble(self.select(t, names, valid), [src], [], tail)

    def _points(self, a, fn: str) -> list[str]:
        t = f"t{next(self.ids)}"
        src = self.derived(a.child, t)
        names = entity_vars(a)
        if a.child.mode == DC:
            p = f"p{next(self.ids)}"
            head = self.select(t, names, f"VALID({p})", distinct=True)
            return self.assemble(head, [src, [f"POINTS(VALID({t})) AS {p}"]], [])
        edge = f"{fn}(VALID({t}))"
        head = self.select(t, names, f"PERIOD({edge}, {edge})", distinct=True)
        return self.assemble(head, [src], [])

    def _EndPoints(self, a: EndPoints) -> list[str]:
        return self._points(a, "END")

    def _BeginPoints(self, a: BeginPoints) -> list[str]:
        return self._points(a, "BEGIN")

    def _EntityJoin(self, a: EntityJoin) -> list[str]:
        t = f"t{next(self.ids)}"
        sources = [self.derived(a.body, t)]
        owner: dict[str, str] = {n: t for n in entity_vars(a.body)}
        where = []
        for r in a.restriction:
            alias = f"r{next(self.ids)}"
            sources.append(self.derived(r, alias))
            for n in entity_vars(r):
                if n in owner:
                    where.append(f"{alias}.{n} = {owner[n]}.{n}")
                else:
                    owner[n] = alias
        v = a.var.name
        if not any(v in entity_vars(r) for r in a.restriction):
            d = f"d{next(self.ids)}"
            sources.append([f"ENTITIES AS {d}"])
            if v in owner:
                where.append(f"{d}.name = {owner[v]}.{v}")
            else:
                owner[v] = d
        cols = []
        for n in entity_vars(a):
            src = owner[n]
            cols.append(f"{src}.name AS {n}" if src.startswith("d") else f"{src}.{n}")
        head = ["SELECT DISTINCT " + (", ".join(cols) or "*"), f"VALID VALID({t})"]
        return self.assemble(head, sources, where)

    def _Collect(self, a: Collect) -> list[str]:
        cols = list(a.columns)
        if a.kind != "maximal":
            q = "q"
            src = self.derived(a.child, q)
            if a.kind == "bool":
                head = ["SELECT DISTINCT 'yes' AS answer"]
            else:
                head = ["SELECT DISTINCT " + ", ".join(f"{q}.{c}" for c in cols)]
            return self.assemble(head, [src], [])
        inner = self.block(a.child)
        lines = ["WITH ans AS (", *[INDENT + x for x in inner], ")"]
        items = [f"q.{c}" for c in cols] + [f"VALID(q) AS {a.period_column}"]
        lines.append("SELECT DISTINCT " + ", ".join(items))
        lines.append("FROM ans AS q")
        lines.append("WHERE NOT EXISTS (")
        sub = ["SELECT *", "FROM ans AS r"]
        conds = [f"r.{c} = q.{c}" for c in cols]
        conds += ["VALID(r) CONTAINS VALID(q)", "VALID(r) <> VALID(q)"]
        sub.append("WHERE " + conds[0])
        sub.extend("  AND " + c for c in conds[1:])
        lines.extend(INDENT + x for x in sub)
        lines.append(")")
        return lines


def emit_tsql2(f: Formula, st: int, axis: Axis) -> str:
    """TSQL2-dialect text for question `f` asked at speech time `st`."""
    return emit_algebra(translate(f, st, axis), axis)


def emit_algebra(a: Collect, axis: Axis) -> str:
    lines = _Emitter(axis).block(a)
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------- recognizer

KEYWORDS = {
    "SELECT", "DISTINCT", "VALID", "FROM", "WHERE", "AND", "OR", "NOT", "EXISTS", "AS",
    "WITH", "GROUP", "BY", "PERIOD", "PRECEDES", "CONTAINS", "OVERLAPS", "MEETS",
}
COMPARATORS = {"=", "<>", "<", ">", "<=", ">=", "PRECEDES", "CONTAINS", "OVERLAPS", "MEETS"}

_TOKEN = re.compile(r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<str>'(?:[^']|'')*')
  | (?P<num>\d+)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><>|<=|>=|[=<>(),.*+-])
""", re.VERBOSE)


def _tokens(text: str) -> list[tuple[str, str, int]]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DialectError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            val = m.group()
            if kind == "word" and val.upper() == val and val in KEYWORDS:
                kind = "kw"
            out.append((kind, val, pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Recognizer:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, expected: str):
        kind, val, pos = self.peek()
        raise DialectError(f"expected {expected}, found {val or 'end of input'!r}", pos)

    def accept(self, val: str) -> bool:
        if self.peek()[1] == val and self.peek()[0] in ("kw", "op"):
            self.i += 1
            return True
        return False

    def expect(self, val: str):
        if not self.accept(val):
            self.fail(repr(val))

    def ident(self) -> str:
        kind, val, _ = self.peek()
        if kind != "word":
            self.fail("identifier")
        self.i += 1
        return val

    def query(self):
        if self.accept("WITH"):
            self.ident()
            self.expect("AS")
            self.expect("(")
            self.query()
            self.expect(")")
        self.select()

    def select(self):
        self.expect("SELECT")
        self.accept("DISTINCT")
        if not self.accept("*"):
            self.item()
            while self.accept(","):
                self.item()
        if self.peek()[1] == "VALID" and self.peek(1)[1] != "(":
            self.i += 1
            self.expr()
        elif self.peek()[1] == "VALID" and self.peek(1)[1] == "(":
            # "VALID VALID(t)" is the clause; a bare "VALID(t)" here would be an item
            self.fail("FROM")
        self.expect("FROM")
        self.source()
        while self.accept(","):
            self.source()
        if self.accept("WHERE"):
            self.cond()
        if self.accept("GROUP"):
            self.expect("BY")
            self.expr()
            while self.accept(","):
                self.expr()

    def item(self):
        self.expr()
        if self.accept("AS"):
            self.ident()

    def source(self):
        if self.accept("("):
            self.query()
            self.expect(")")
        else:
            name = self.ident()
            if self.accept("("):
                if not name.isupper():
                    self.fail("table name")
                self.args()
        self.expect("AS")
        self.ident()

    def args(self):
        if not self.accept(")"):
            self.expr()
            while self.accept(","):
                self.expr()
            self.expect(")")

    def cond(self):
        self.conj()
        while self.accept("OR"):
            self.conj()

    def conj(self):
        self.unary()
        while self.accept("AND"):
            self.unary()

    def unary(self):
        if self.accept("NOT"):
            self.expect("EXISTS")
            self.expect("(")
            self.query()
            self.expect(")")
            return
        if self.accept("EXISTS"):
            self.expect("(")
            self.query()
            self.expect(")")
            return
        self.expr()
        kind, val, _ = self.peek()
        if val not in COMPARATORS:
            self.fail("comparison")
        self.i += 1
        self.expr()

    def expr(self):
        self.term()
        while self.accept("+") or self.accept("-"):
            self.term()

    def term(self):
        kind, val, _ = self.peek()
        if kind in ("str", "num"):
            self.i += 1
            return
        if val == "PERIOD" and self.peek(1)[0] == "str":
            self.i += 2
            return
        if kind in ("word", "kw") and self.peek(1)[1] == "(":
            if val != val.upper():
                self.fail("function name")
            if kind == "kw" and val not in ("VALID", "PERIOD"):
                self.fail("expression")
            self.i += 2
            self.args()
            return
        if kind == "word":
            self.i += 1
            if self.accept("."):
                self.ident()
            return
        if self.accept("("):
            self.expr()
            self.expect(")")
            return
        self.fail("expression")


def recognize(text: str) -> None:
    """Raise :class:`DialectError` unless `text` is one query of the dialect."""
    r = _Recognizer(text)
    r.query()
    if r.peek()[0] != "eof":
        r.fail("end of input")
