"""TOP formulae: abstract syntax, well-formedness, text rendering and parsing.

Concrete syntax (one formula per string)::

    F := PRED | Culm[F] | Begin[F] | End[F]
       | Past[VAR, F] | Pres[VAR, F] | Perf[VAR, F]
       | At["DATE-or-TIME", F] | For[UNIT, INT, F]
       | exists VAR [PRED (and PRED)*] : F
       | ? VAR [PRED (and PRED)*] : F
       | ?mxl VAR F

Entity variables are spelled ``x<digits>``, event variables ``e<digits>``;
every other identifier in a predicate argument is a constant.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterator, Union

from .timecore import DATE_RE, TIME_RE, UNITS, parse_date, parse_time

ENTITY_VAR_RE = re.compile(r"^x\d+$")
EVENT_VAR_RE = re.compile(r"^e\d+$")


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str = "entity"  # entity | event

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Constant:
    name: str

    def __str__(self):
        return self.name


Term = Union[Constant, Variable]


def term(name: str) -> Term:
    if ENTITY_VAR_RE.match(name):
        return Variable(name)
    return Constant(name)


@dataclass(frozen=True)
class DatePattern:
    text: str = field(compare=False)
    key: tuple = field(default=(), repr=False)

    def __post_init__(self):
        d = parse_date(self.text)
        object.__setattr__(self, "key", (d.year, d.month, d.day))


@dataclass(frozen=True)
class TimeOfDayPattern:
    text: str = field(compare=False)
    key: tuple = field(default=(), repr=False)

    def __post_init__(self):
        object.__setattr__(self, "key", parse_time(self.text))


TemporalPattern = Union[DatePattern, TimeOfDayPattern]


def pattern(text: str) -> TemporalPattern:
    text = text.strip()
    if DATE_RE.match(text):
        return DatePattern(text)
    if TIME_RE.match(text):
        return TimeOfDayPattern(text)
    raise ValueError(f"not a date or time of day: {text!r}")


class Formula:
    """Base class of TOP formula nodes (all frozen dataclasses)."""

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Pred(Formula):
    symbol: str
    terms: tuple[Term, ...]


@dataclass(frozen=True)
class Culm(Formula):
    body: Pred


@dataclass(frozen=True)
class Begin(Formula):
    body: Formula


@dataclass(frozen=True)
class End(Formula):
    body: Formula


@dataclass(frozen=True)
class Past(Formula):
    var: Variable
    body: Formula


@dataclass(frozen=True)
class Pres(Formula):
    var: Variable
    body: Formula


@dataclass(frozen=True)
class Perf(Formula):
    var: Variable
    body: Formula


@dataclass(frozen=True)
class At(Formula):
    pattern: TemporalPattern
    body: Formula


@dataclass(frozen=True)
class For(Formula):
    unit: str
    count: int
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: Variable
    restriction: tuple[Pred, ...]
    body: Formula


@dataclass(frozen=True)
class Interrog(Formula):
    var: Variable
    restriction: tuple[Pred, ...]
    body: Formula


@dataclass(frozen=True)
class InterrogMxl(Formula):
    var: Variable
    body: Formula


TENSES = (Past, Pres)
INDEXED = (Past, Pres, Perf)
QUANTIFIERS = (Exists, Interrog)
UNARY = (Culm, Begin, End, Past, Pres, Perf, At, For, Exists, Interrog, InterrogMxl)


def ev(name: str) -> Variable:
    return Variable(name, "event")


def pred(symbol: str, *args: str) -> Pred:
    return Pred(symbol, tuple(term(a) for a in args))


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Pred):
        return ()
    if isinstance(f, QUANTIFIERS):
        return (*f.restriction, f.body)
    return (f.body,)


def walk(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from walk(c)


def map_body(f: Formula, fn) -> Formula:
    """Copy of unary node `f` with its body replaced by fn(body)."""
    return replace(f, body=fn(f.body))


# ------------------------------------------------------------- rendering

def _render_pred(p: Pred) -> str:
    return f"{p.symbol}({', '.join(str(t) for t in p.terms)})"


def render(f: Formula) -> str:
    if isinstance(f, Pred):
        return _render_pred(f)
    if isinstance(f, (Culm, Begin, End)):
        return f"{type(f).__name__}[{render(f.body)}]"
    if isinstance(f, INDEXED):
        return f"{type(f).__name__}[{f.var}, {render(f.body)}]"
    if isinstance(f, At):
        return f'At["{f.pattern.text}", {render(f.body)}]'
    if isinstance(f, For):
        return f"For[{f.unit}, {f.count}, {render(f.body)}]"
    if isinstance(f, QUANTIFIERS):
        q = "exists" if isinstance(f, Exists) else "?"
        rest = " and ".join(_render_pred(p) for p in f.restriction)
        head = f"{q} {f.var} {rest}" if rest else f"{q} {f.var}"
        return f"{head} : {render(f.body)}"
    if isinstance(f, InterrogMxl):
        return f"?mxl {f.var} {render(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------- parsing

class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN_RE = re.compile(r'\s*(?:(\?mxl\b)|("[^"]*")|([A-Za-z_][A-Za-z0-9_]*)|(\d+)|([\[\](),:?]))')


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            start = len(text) - len(text[pos:].lstrip())
            raise FormulaSyntaxError(f"unexpected character {text[start]!r}", start)
        kinds = ("mxl", "str", "ident", "int", "punct")
        for kind, val in zip(kinds, m.groups()):
            if val is not None:
                out.append((kind, val, m.start(m.lastindex)))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self):
        return self.toks[self.i]

    def fail(self, expected: str):
        kind, val, pos = self.cur
        got = "end of input" if kind == "eof" else repr(val)
        raise FormulaSyntaxError(f"expected {expected}, got {got}", pos)

    def take(self, value: str | None = None, kind: str | None = None) -> str:
        k, v, _ = self.cur
        if (value is not None and v != value) or (kind is not None and k != kind) or k == "eof":
            self.fail(repr(value) if value else kind)
        self.i += 1
        return v

    def variable(self, kind: str) -> Variable:
        name = self.take(kind="ident")
        regex = EVENT_VAR_RE if kind == "event" else ENTITY_VAR_RE
        if not regex.match(name):
            self.i -= 1
            self.fail(f"{kind} variable")
        return Variable(name, kind)

    def predicate(self) -> Pred:
        sym = self.take(kind="ident")
        self.take("(")
        args = [term(self.take(kind="ident"))]
        while self.cur[1] == ",":
            self.take(",")
            args.append(term(self.take(kind="ident")))
        self.take(")")
        return Pred(sym, tuple(args))

    def restriction(self) -> tuple[Pred, ...]:
        preds = []
        if self.cur[1] != ":":
            preds.append(self.predicate())
            while self.cur[1] == "and":
                self.take("and")
                preds.append(self.predicate())
        self.take(":")
        return tuple(preds)

    def formula(self) -> Formula:
        kind, val, _ = self.cur
        if kind == "mxl":
            self.take()
            var = self.variable("event")
            return InterrogMxl(var, self.formula())
        if val in ("exists", "?"):
            self.take()
            var = self.variable("entity")
            rest = self.restriction()
            cls = Exists if val == "exists" else Interrog
            return cls(var, rest, self.formula())
        if kind != "ident":
            self.fail("formula")
        if val in ("Culm", "Begin", "End"):
            self.take()
            self.take("[")
            body = self.formula()
            self.take("]")
            if val == "Culm":
                if not isinstance(body, Pred):
                    raise FormulaSyntaxError("Culm expects an atomic formula", self.cur[2])
                return Culm(body)
            return (Begin if val == "Begin" else End)(body)
        if val in ("Past", "Pres", "Perf"):
            self.take()
            self.take("[")
            var = self.variable("event")
            self.take(",")
            body = self.formula()
            self.take("]")
            return {"Past": Past, "Pres": Pres, "Perf": Perf}[val](var, body)
        if val == "At":
            self.take()
            self.take("[")
            k, s, pos = self.cur
            if k != "str":
                self.fail("quoted date or time")
            self.take()
            try:
                pat = pattern(s[1:-1])
            except ValueError as exc:
                raise FormulaSyntaxError(str(exc), pos) from None
            self.take(",")
            body = self.formula()
            self.take("]")
            return At(pat, body)
        if val == "For":
            self.take()
            self.take("[")
            unit = self.take(kind="ident")
            if unit not in UNITS:
                self.i -= 1
                self.fail("duration unit")
            self.take(",")
            count = int(self.take(kind="int"))
            self.take(",")
            body = self.formula()
            self.take("]")
            return For(unit, count, body)
        return self.predicate()


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    if p.cur[0] != "eof":
        p.fail("end of input")
    return f


# ------------------------------------------------------- variables, alpha

def _binder_vars(f: Formula) -> tuple[Variable, ...]:
    if isinstance(f, (*INDEXED, *QUANTIFIERS, InterrogMxl)):
        return (f.var,)
    return ()


def free_vars(f: Formula) -> set[Variable]:
    if isinstance(f, Pred):
        return {t for t in f.terms if isinstance(t, Variable)}
    out: set[Variable] = set()
    for c in children(f):
        out |= free_vars(c)
    if isinstance(f, InterrogMxl):
        # the ?mxl variable is an event variable bound by a Past/Pres below
        return out
    return out - set(_binder_vars(f))


def alpha_normalize(f: Formula) -> Formula:
    """Rename bound variables to x1, x2, ... / e1, e2, ... in binding order."""
    counters = {"entity": 0, "event": 0}

    def fresh(v: Variable) -> Variable:
        counters[v.kind] += 1
        return Variable(("x" if v.kind == "entity" else "e") + str(counters[v.kind]), v.kind)

    def subst_terms(p: Pred, env) -> Pred:
        return Pred(p.symbol, tuple(env.get(t, t) if isinstance(t, Variable) else t for t in p.terms))

    def go(g: Formula, env: dict) -> Formula:
        if isinstance(g, Pred):
            return subst_terms(g, env)
        if isinstance(g, InterrogMxl):
            # the ?mxl variable is bound by the operator it indexes below
            new = fresh(g.var)
            return InterrogMxl(new, go(g.body, {**env, g.var: new, ("mxl", g.var.name): new}))
        if isinstance(g, INDEXED):
            key = ("mxl", g.var.name)
            new = env[key] if key in env else fresh(g.var)
            inner = {k: v for k, v in env.items() if k != key}
            return type(g)(new, go(g.body, {**inner, g.var: new}))
        if isinstance(g, QUANTIFIERS):
            new = fresh(g.var)
            env2 = {**env, g.var: new}
            return type(g)(new, tuple(subst_terms(p, env2) for p in g.restriction), go(g.body, env2))
        return map_body(g, lambda b: go(b, env))

    return go(f, {})


def alpha_equal(f: Formula, g: Formula) -> bool:
    return alpha_normalize(f) == alpha_normalize(g)


# ------------------------------------------------------- well-formedness

def _tense_on_top_path(f: Formula, name: str) -> bool:
    """Does a Past/Pres indexed by `name` occur without crossing Perf/Begin/End?"""
    if isinstance(f, TENSES) and f.var.name == name:
        return True
    if isinstance(f, (Perf, Begin, End, Culm, Pred)):
        return False
    return _tense_on_top_path(f.body, name)


def well_formed(f: Formula, schema=None) -> list[str]:
    """Invariant violations of `f` (empty list when well-formed).

    `schema` is anything with ``predicate_info(symbol) -> (arity, verb_class)
    | None`` (a Lexicon or a Database); without one, predicate checks are
    skipped.
    """
    problems: list[str] = []

    def note(msg: str):
        if msg not in problems:
            problems.append(msg)

    def check_pred(p: Pred):
        if schema is None:
            return
        info = schema.predicate_info(p.symbol)
        if info is None:
            note(f"unknown predicate {p.symbol}")
        elif info[0] != len(p.terms):
            note(f"arity mismatch for {p.symbol}: expected {info[0]}, got {len(p.terms)}")

    seen_events: set[str] = set()
    mxl_count = 0

    def go(g: Formula, bound: frozenset, in_prefix: bool):
        nonlocal mxl_count
        if isinstance(g, Pred):
            check_pred(g)
            for t in g.terms:
                if isinstance(t, Variable) and t not in bound:
                    note(f"unbound variable {t.name}")
            return
        if isinstance(g, Culm):
            if not isinstance(g.body, Pred):
                note("Culm over non-atomic formula")
            elif schema is not None:
                info = schema.predicate_info(g.body.symbol)
                if info is not None and info[1] != "culm_activity":
                    note("Culm over non-culminated-activity predicate")
            go(g.body, bound, False)
            return
        if isinstance(g, INDEXED):
            if g.var.kind != "event":
                note(f"{type(g).__name__} indexed by non-event variable {g.var.name}")
            if g.var.name in seen_events:
                note(f"duplicate event variable {g.var.name}")
            seen_events.add(g.var.name)
            go(g.body, bound | {g.var}, False)
            return
        if isinstance(g, QUANTIFIERS):
            if isinstance(g, Interrog) and not in_prefix:
                note("interrogative quantifier below a temporal operator")
            if g.var.kind != "entity":
                note(f"quantifier over non-entity variable {g.var.name}")
            inner = bound | {g.var}
            for p in g.restriction:
                go(p, inner, False)
            go(g.body, inner, in_prefix)
            return
        if isinstance(g, InterrogMxl):
            mxl_count += 1
            if not in_prefix:
                note("?mxl below a temporal operator")
            occurrences = sum(1 for h in walk(g.body)
                              if isinstance(h, TENSES) and h.var.name == g.var.name)
            if occurrences != 1:
                note(f"?mxl variable {g.var.name} must index exactly one Past/Pres")
            elif not _tense_on_top_path(g.body, g.var.name):
                note(f"?mxl variable {g.var.name} must index the question's own event time")
            go(g.body, bound, in_prefix)
            return
        if isinstance(g, For):
            if g.unit not in UNITS:
                note(f"unknown duration unit {g.unit}")
            if g.count < 1:
                note("For count must be positive")
        go(g.body, bound, False)

    go(f, frozenset(), True)
    if mxl_count > 1:
        note("more than one ?mxl quantifier")
    return problems


# ------------------------------------------------------ post-processing

def strip_culm(f: Formula) -> Formula:
    if isinstance(f, Culm):
        return f.body
    if isinstance(f, Pred):
        return f
    if isinstance(f, QUANTIFIERS):
        return replace(f, body=strip_culm(f.body))
    return map_body(f, strip_culm)


def cancel_culm_under_for(f: Formula) -> Formula:
    """Remove every Culm dominated by a For node."""
    if isinstance(f, Pred):
        return f
    if isinstance(f, For):
        return replace(f, body=strip_culm(f.body))
    if isinstance(f, QUANTIFIERS):
        return replace(f, body=cancel_culm_under_for(f.body))
    return map_body(f, cancel_culm_under_for)


def interrogative_columns(f: Formula) -> tuple[list[Variable], Variable | None]:
    """Interrogative entity variables (prefix order) and the ?mxl variable."""
    ents, mxl = [], None
    g = f
    while isinstance(g, (*QUANTIFIERS, InterrogMxl)):
        if isinstance(g, Interrog):
            ents.append(g.var)
        elif isinstance(g, InterrogMxl):
            mxl = g.var
        g = g.body
    return ents, mxl
