"""English front end: lexicon, morphology, a fragment chart parser, composition.

Lexicon file (one entry per line, ``#`` comments)::

    verb contain state contain(subj,obj)
    verb fix culm_activity fixing(subj,obj)
    verb run activity run(subj) past=ran pastpart=run
    noun engine engine
    name tank_2 tank2

Only base verb forms are listed; inflected forms come from spelling rules
plus the optional irregular overrides. Multi-word names and nouns are
written with underscores and matched greedily over the input tokens.

Grammar (CKY over binary and unary rules; each daughter carries a role)::

    NP    -> DET N | NAME | WHPRO
    VP    -> V NP | V | EVER VP | VP[pastpart] PP      (last: low attachment)
    PP    -> on DATE | at TIME | at DATE | for NUM UNIT
    AUXS  -> AUX NP                                     (inverted auxiliary)
    AUXVP -> AUX VP
    S     -> AUXS VP | NP VP[finite] | NP AUXVP | NP[wh] S[gap]
           | S PP | PP S | when S
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import count

from .timecore import DATE_RE, TIME_RE
from .topast import (
    At, Begin, Culm, End, Exists, For, Formula, Interrog, InterrogMxl, Past, Perf, Pred, Pres,
    Variable, alpha_normalize, cancel_culm_under_for, ev, pattern, term, well_formed,
)

VERB_CLASSES = ("state", "activity", "culm_activity", "point")
FORMS = ("base", "third", "past", "past_participle", "present_participle")
_OVERRIDE_KEYS = {"past": "past", "pastpart": "past_participle",
                  "prespart": "present_participle", "third": "third"}

NUMBER_WORDS = {w: i for i, w in enumerate(
    "zero one two three four five six seven eight nine ten eleven twelve".split())}
UNIT_WORDS = {"minute": "minute", "hour": "hour", "day": "day", "week": "week",
              "month": "month", "year": "year"}

# closed classes: word -> (kind, feature)
CLOSED = {
    "did": ("auxiliary", ("do", "past")), "does": ("auxiliary", ("do", "pres")),
    "do": ("auxiliary", ("do", "pres")),
    "was": ("auxiliary", ("be", "past")), "were": ("auxiliary", ("be", "past")),
    "is": ("auxiliary", ("be", "pres")), "are": ("auxiliary", ("be", "pres")),
    "had": ("auxiliary", ("have", "past")), "has": ("auxiliary", ("have", "pres")),
    "have": ("auxiliary", ("have", "pres")),
    "a": ("determiner", "exists"), "an": ("determiner", "exists"),
    "the": ("determiner", "exists"), "some": ("determiner", "exists"),
    "who": ("wh_word", "pronoun"), "what": ("wh_word", "both"), "which": ("wh_word", "determiner"),
    "when": ("wh_word", "when"),
    "on": ("preposition", "on"), "at": ("preposition", "at"), "for": ("preposition", "for"),
    "ever": ("adverb", "ever"),
}
AUX_FORM = {"do": "base", "be": "present_participle", "have": "past_participle"}


class LexiconError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class ParseError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class ComposeError(ValueError):
    pass


# ----------------------------------------------------------------- lexicon

@dataclass(frozen=True)
class LexEntry:
    kind: str  # verb | noun | proper_name | determiner | wh_word | preposition | auxiliary | adverb
    base: str
    verb_class: str | None = None
    predicate: str | None = None
    roles: tuple[str, ...] = ()  # verbs: argument template, e.g. ("subj", "obj")
    irregular_forms: tuple[tuple[str, str], ...] = ()
    noun_predicate: str | None = None
    constant: str | None = None
    feature: object = None  # closed classes

    @property
    def transitive(self) -> bool:
        return "obj" in self.roles


def _ends_cvc(w: str) -> bool:
    """Monosyllable ending consonant-vowel-consonant (final consonant doubles)."""
    return (re.search(r"[^aeiou][aeiou][^aeiouwxy]$", w) is not None
            and len(re.findall(r"[aeiouy]+", w)) == 1)


def third_singular(w: str) -> str:
    if re.search(r"(s|x|z|ch|sh|o)$", w):
        return w + "es"
    if re.search(r"[^aeiou]y$", w):
        return w[:-1] + "ies"
    return w + "s"


def past_regular(w: str) -> str:
    if w.endswith("e"):
        return w + "d"
    if re.search(r"[^aeiou]y$", w):
        return w[:-1] + "ied"
    if _ends_cvc(w):
        return w + w[-1] + "ed"
    return w + "ed"


def present_participle(w: str) -> str:
    if w.endswith("ie"):
        return w[:-2] + "ying"
    if w.endswith("e") and not re.search(r"(ee|ye|oe)$", w):
        return w[:-1] + "ing"
    if _ends_cvc(w):
        return w + w[-1] + "ing"
    return w + "ing"


def noun_plural(w: str) -> str:
    return third_singular(w)


def verb_forms(e: LexEntry) -> dict[str, str]:
    over = dict(e.irregular_forms)
    return {
        "base": e.base,
        "third": over.get("third", third_singular(e.base)),
        "past": over.get("past", past_regular(e.base)),
        "past_participle": over.get("past_participle", over.get("past", past_regular(e.base))),
        "present_participle": over.get("present_participle", present_participle(e.base)),
    }


@dataclass(frozen=True)
class Lexicon:
    entries: tuple[LexEntry, ...]
    index: dict = field(default=None, compare=False, repr=False)
    multiword: frozenset = field(default=frozenset(), compare=False, repr=False)

    def __post_init__(self):
        index: dict[str, list] = {}
        multi = set()
        for e in self.entries:
            if e.kind == "verb":
                for form, word in verb_forms(e).items():
                    index.setdefault(word, []).append((e, form))
            elif e.kind == "noun":
                index.setdefault(e.base, []).append((e, "singular"))
                index.setdefault(noun_plural(e.base), []).append((e, "plural"))
            else:
                index.setdefault(e.base, []).append((e, None))
            if "_" in e.base:
                multi.add(e.base)
        object.__setattr__(self, "index", {k: tuple(v) for k, v in index.items()})
        object.__setattr__(self, "multiword", frozenset(multi))

    def analyses(self, word: str) -> list[tuple[LexEntry, object]]:
        word = word.lower()
        out = list(self.index.get(word, ()))
        if word in CLOSED:
            kind, feat = CLOSED[word]
            out.append((LexEntry(kind, word, feature=feat), feat))
        return out

    def predicate_info(self, symbol: str):
        for e in self.entries:
            if e.kind == "verb" and e.predicate == symbol:
                return len(e.roles), e.verb_class
            if e.kind == "noun" and e.noun_predicate == symbol:
                return 1, "timeless"
        return None

    def predicates(self) -> dict[str, tuple[int, str]]:
        out = {}
        for e in self.entries:
            if e.kind == "verb":
                out[e.predicate] = (len(e.roles), e.verb_class)
            elif e.kind == "noun":
                out[e.noun_predicate] = (1, "timeless")
        return out


_TEMPLATE_RE = re.compile(r"^([a-z_][a-z0-9_]*)\(([a-z, ]*)\)$")
_WORD_RE = re.compile(r"^[a-z][a-z0-9_]*$")


def analyses(word: str, lexicon: Lexicon):
    return lexicon.analyses(word)


def load_lexicon(text: str) -> Lexicon:
    entries: list[LexEntry] = []
    seen: set[tuple[str, str]] = set()
    preds: dict[str, tuple[int, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        kind = words[0]
        if kind == "verb":
            entry = _parse_verb(words[1:], lineno)
            info = (len(entry.roles), entry.verb_class)
            if preds.setdefault(entry.predicate, info) != info:
                raise LexiconError(f"predicate {entry.predicate} declared inconsistently", lineno)
        elif kind in ("noun", "name"):
            if len(words) != 3 or not _WORD_RE.match(words[1]) or not _WORD_RE.match(words[2]):
                raise LexiconError(f"expected: {kind} WORD SYMBOL", lineno)
            if kind == "noun":
                entry = LexEntry("noun", words[1], noun_predicate=words[2])
                if preds.setdefault(words[2], (1, "timeless")) != (1, "timeless"):
                    raise LexiconError(f"predicate {words[2]} declared inconsistently", lineno)
            else:
                entry = LexEntry("proper_name", words[1], constant=words[2])
        else:
            raise LexiconError(f"unknown entry kind {kind!r}", lineno)
        if entry.base in CLOSED:
            raise LexiconError(f"{entry.base!r} is a built-in word", lineno)
        key = (entry.kind, entry.base)
        if key in seen:
            raise LexiconError(f"duplicate base form {entry.base!r}", lineno)
        seen.add(key)
        entries.append(entry)
    return Lexicon(tuple(entries))


def _parse_verb(words: list[str], lineno: int) -> LexEntry:
    if len(words) < 3:
        raise LexiconError("expected: verb BASE CLASS PRED(subj[,obj]) [overrides]", lineno)
    base, cls, template, *rest = words
    if not _WORD_RE.match(base):
        raise LexiconError(f"bad verb base {base!r}", lineno)
    if cls not in VERB_CLASSES:
        raise LexiconError(f"unknown class {cls!r}", lineno)
    m = _TEMPLATE_RE.match(template)
    if not m:
        raise LexiconError(f"bad predicate template {template!r}", lineno)
    roles = tuple(r.strip() for r in m.group(2).split(",") if r.strip())
    if "subj" not in roles or not set(roles) <= {"subj", "obj"} or len(set(roles)) != len(roles):
        raise LexiconError(f"template {template!r} must name subj and optionally obj", lineno)
    over = []
    for item in rest:
        key, sep, value = item.partition("=")
        if not sep or key not in _OVERRIDE_KEYS or not _WORD_RE.match(value):
            raise LexiconError(f"bad override {item!r}", lineno)
        over.append((_OVERRIDE_KEYS[key], value))
    return LexEntry("verb", base, cls, m.group(1), roles, tuple(sorted(over)))


# --------------------------------------------------------------- tokenizer

_STRIP = "?!.,;:\"'()"


def tokenize(question: str, lexicon: Lexicon) -> list[str]:
    raw = []
    for w in question.split():
        w = w.strip(_STRIP).lower()
        if not w:
            continue
        if w in ("am", "pm") and raw and re.match(r"^\d{1,2}:\d{2}$", raw[-1]):
            raw[-1] += w
            continue
        raw.append(w)
    longest = max((m.count("_") + 1 for m in lexicon.multiword), default=1)
    out, i = [], 0
    while i < len(raw):
        for k in range(min(longest, len(raw) - i), 1, -1):
            cand = "_".join(raw[i:i + k])
            if cand in lexicon.multiword:
                out.append(cand)
                i += k
                break
        else:
            out.append(raw[i])
            i += 1
    return out


# ------------------------------------------------------------------ parser

@dataclass(frozen=True)
class ParseTree:
    label: str
    feats: tuple[tuple[str, object], ...]
    daughters: tuple[tuple[str, ParseTree], ...] = ()
    word: str | None = None
    start: int = 0
    end: int = 0

    def f(self, name: str, default=None):
        for k, v in self.feats:
            if k == name:
                return v
        return default

    def head(self) -> ParseTree | None:
        for role, d in self.daughters:
            if role == "head":
                return d
        return None

    def pretty(self, indent: int = 0) -> str:
        pad = "  " * indent
        if self.word is not None:
            return f"{pad}{self.label} '{self.word}'"
        lines = [f"{pad}{self.label}"]
        for role, d in self.daughters:
            sub = d.pretty(indent + 1)
            lines.append(sub.replace(pad + "  ", pad + "  " + role + ": ", 1))
        return "\n".join(lines)


def _node(label, daughters, **feats) -> ParseTree:
    ds = tuple(daughters)
    return ParseTree(label, tuple(sorted(feats.items())), ds, None, ds[0][1].start, ds[-1][1].end)


def _leaves(tokens: list[str], i: int, lexicon: Lexicon) -> list[ParseTree]:
    tok = tokens[i]
    out = []

    def leaf(label, **feats):
        out.append(ParseTree(label, tuple(sorted(feats.items())), (), tok, i, i + 1))

    if DATE_RE.match(tok):
        leaf("DATE", text=tok)
    if TIME_RE.match(tok):
        leaf("TIME", text=tok)
    if tok.isdigit():
        leaf("NUM", n=int(tok))
    if tok in NUMBER_WORDS:
        leaf("NUM", n=NUMBER_WORDS[tok])
    unit = UNIT_WORDS.get(tok) or UNIT_WORDS.get(tok[:-1] if tok.endswith("s") else "")
    if unit:
        leaf("UNIT", unit=unit)
    for e, feat in lexicon.analyses(tok):
        if e.kind == "verb":
            leaf("V", entry=e, form=feat)
        elif e.kind == "noun":
            leaf("N", entry=e)
        elif e.kind == "proper_name":
            leaf("NAME", entry=e)
        elif e.kind == "determiner":
            leaf("DET", q=feat)
        elif e.kind == "auxiliary":
            leaf("AUX", lemma=feat[0], tense=feat[1])
        elif e.kind == "preposition":
            leaf("PREP", prep=feat)
        elif e.kind == "adverb":
            leaf("EVER")
        elif e.kind == "wh_word":
            if feat == "when":
                leaf("WHEN")
            if feat in ("pronoun", "both"):
                leaf("WHPRO")
            if feat in ("determiner", "both"):
                leaf("DET", q="interrog")
    return out


def _unary(t: ParseTree) -> list[ParseTree]:
    if t.label == "NAME":
        return [_node("NP", [("head", t)], wh=False)]
    if t.label == "WHPRO":
        return [_node("NP", [("head", t)], wh=True)]
    if t.label == "V":
        e = t.f("entry")
        if e.transitive:
            return [_node("VP", [("head", t)], form=t.f("form"), gap=True, low=False, ever=False)]
        return [_node("VP", [("head", t)], form=t.f("form"), gap=False, low=False, ever=False)]
    return []


_FINITE = ("past", "third", "base")


def _binary(a: ParseTree, b: ParseTree) -> list[ParseTree]:
    la, lb = a.label, b.label
    out = []
    if la == "DET" and lb == "N":
        out.append(_node("NP", [("head", a), ("complement", b)], wh=a.f("q") == "interrog"))
    elif la == "V" and lb == "NP" and a.f("entry").transitive and not b.f("wh"):
        out.append(_node("VP", [("head", a), ("complement", b)],
                         form=a.f("form"), gap=False, low=False, ever=False))
    elif la == "EVER" and lb == "VP" and not b.f("low") and not b.f("ever"):
        out.append(_node("VP", [("adjunct", a), ("head", b)],
                         form=b.f("form"), gap=b.f("gap"), low=False, ever=True))
    elif la == "VP" and lb == "PP" and a.f("form") == "past_participle":
        out.append(_node("VP", [("head", a), ("adjunct", b)],
                         form=a.f("form"), gap=a.f("gap"), low=True, ever=a.f("ever")))
    elif la == "PREP" and lb == "DATE" and a.f("prep") in ("on", "at"):
        out.append(_node("PP", [("head", a), ("complement", b)], kind="at"))
    elif la == "PREP" and lb == "TIME" and a.f("prep") == "at":
        out.append(_node("PP", [("head", a), ("complement", b)], kind="at"))
    elif la == "NUM" and lb == "UNIT" and a.f("n") >= 1:
        out.append(_node("DUR", [("adjunct", a), ("head", b)]))
    elif la == "PREP" and lb == "DUR" and a.f("prep") == "for":
        out.append(_node("PP", [("head", a), ("complement", b)], kind="for"))
    elif la == "AUX" and lb == "NP" and not b.f("wh"):
        out.append(_node("AUXS", [("head", a), ("subject", b)]))
    elif la == "AUXS" and lb == "VP":
        aux = a.head()
        if b.f("form") == AUX_FORM[aux.f("lemma")]:
            out.append(_node("S", [("head", a), ("complement", b)], gap=b.f("gap"),
                             fronted=False, when=False, perfect=_perfect(aux)))
    elif la == "AUX" and lb == "VP" and not b.f("gap"):
        if b.f("form") == AUX_FORM[a.f("lemma")]:
            out.append(_node("AUXVP", [("head", a), ("complement", b)], perfect=_perfect(a)))
    elif la == "NP" and lb == "VP" and b.f("form") in _FINITE and not b.f("gap"):
        out.append(_node("S", [("subject", a), ("head", b)],
                         gap=False, fronted=False, when=False, perfect=None))
    elif la == "NP" and lb == "AUXVP":
        out.append(_node("S", [("subject", a), ("head", b)],
                         gap=False, fronted=False, when=False, perfect=b.f("perfect")))
    elif la == "NP" and lb == "S" and a.f("wh") and b.f("gap") and not b.f("fronted"):
        out.append(_node("S", [("complement", a), ("head", b)],
                         gap=False, fronted=False, when=False, perfect=b.f("perfect")))
    elif la == "S" and lb == "PP" and not a.f("gap") and not a.f("fronted") \
            and a.f("perfect") != "pres":
        out.append(_node("S", [("head", a), ("adjunct", b)], gap=False, fronted=False,
                         when=a.f("when"), perfect=a.f("perfect")))
    elif la == "PP" and lb == "S" and not b.f("gap"):
        out.append(_node("S", [("adjunct", a), ("head", b)], gap=False, fronted=True,
                         when=b.f("when"), perfect=b.f("perfect")))
    elif la == "WHEN" and lb == "S" and not b.f("gap") and not b.f("when"):
        out.append(_node("S", [("adjunct", a), ("head", b)], gap=False, fronted=True,
                         when=True, perfect=b.f("perfect")))
    return out


def _perfect(aux: ParseTree):
    return aux.f("tense") if aux.f("lemma") == "have" else None


def _key(t: ParseTree):
    return (t.label, t.feats)


def parse(question: str, lexicon: Lexicon) -> list[ParseTree]:
    tokens = tokenize(question, lexicon)
    if not tokens:
        raise ParseError("empty question", 0)
    n = len(tokens)
    chart: dict[tuple[int, int], list[ParseTree]] = {}

    def add(span, items):
        cell = chart.setdefault(span, [])
        agenda = list(items)
        while agenda:
            t = agenda.pop(0)
            cell.append(t)
            agenda.extend(_unary(t))

    for i in range(n):
        leaves = _leaves(tokens, i, lexicon)
        if not leaves:
            raise ParseError(f"unknown word {tokens[i]!r} at position {i + 1}", i)
        add((i, i + 1), leaves)
    for width in range(2, n + 1):
        for i in range(n - width + 1):
            j = i + width
            found = []
            for k in range(i + 1, j):
                for a in chart.get((i, k), ()):
                    for b in chart.get((k, j), ()):
                        found.extend(_binary(a, b))
            if found:
                add((i, j), found)
    roots = [t for t in chart.get((0, n), ()) if t.label == "S" and not t.f("gap")]
    if not roots:
        longest = max((j for (i, j), cell in chart.items()
                       if i == 0 and any(t.label in ("S", "AUXS", "NP", "PP") for t in cell)),
                      default=0)
        prefix = " ".join(tokens[:longest])
        hint = f"; longest analysable prefix: {prefix!r}" if prefix else ""
        raise ParseError(f"no parse for {' '.join(tokens)!r}{hint}", longest)
    return roots


# ------------------------------------------------------------- composition

@dataclass(frozen=True)
class QStoreItem:
    kind: str  # exists | interrog | mxl
    var: Variable
    restriction: tuple[Pred, ...]
    position: int


@dataclass
class _NP:
    const: str | None = None
    quant: str | None = None  # exists | interrog
    noun: str | None = None
    position: int = 0


@dataclass
class _Adj:
    kind: str  # at | for
    text: str = ""
    is_time: bool = False
    unit: str = ""
    count: int = 0


@dataclass
class _VP:
    entry: LexEntry
    form: str
    obj: _NP | None = None
    gap: bool = False
    low: list = field(default_factory=list)


@dataclass
class _Clause:
    subject: _NP
    aux: tuple[str, str] | None
    vp: _VP
    filler: _NP | None = None
    high: list = field(default_factory=list)
    when: list = field(default_factory=list)


def _interp(t: ParseTree):
    lab = t.label
    if lab == "NP":
        h = t.head()
        if h.label == "NAME":
            return _NP(const=h.f("entry").constant, position=t.start)
        if h.label == "WHPRO":
            return _NP(quant="interrog", position=t.start)
        noun = t.daughters[1][1].f("entry").noun_predicate
        return _NP(quant=h.f("q"), noun=noun, position=t.start)
    if lab == "PP":
        comp = t.daughters[1][1]
        if t.f("kind") == "for":
            return _Adj("for", unit=comp.head().f("unit"), count=comp.daughters[0][1].f("n"))
        return _Adj("at", text=comp.word, is_time=comp.label == "TIME")
    if lab == "VP":
        roles = dict(t.daughters)
        h = roles["head"]
        if h.label == "V":
            vp = _VP(h.f("entry"), h.f("form"), gap=t.f("gap"))
            if "complement" in roles:
                vp.obj = _interp(roles["complement"])
            return vp
        vp = _interp(h)
        if "adjunct" in roles and roles["adjunct"].label == "PP":
            vp = _VP(vp.entry, vp.form, vp.obj, vp.gap, [*vp.low, _interp(roles["adjunct"])])
        return vp
    if lab == "S":
        roles = dict(t.daughters)
        h = roles["head"]
        if h.label == "AUXS":
            aux = h.head()
            subj = _interp(dict(h.daughters)["subject"])
            return _Clause(subj, (aux.f("lemma"), aux.f("tense")), _interp(roles["complement"]))
        if h.label == "AUXVP":
            aux = h.head()
            vp = _interp(dict(h.daughters)["complement"])
            return _Clause(_interp(roles["subject"]), (aux.f("lemma"), aux.f("tense")), vp)
        if h.label == "VP":
            return _Clause(_interp(roles["subject"]), None, _interp(h))
        c = _interp(h)
        if "complement" in roles:
            c.filler = _interp(roles["complement"])
        adj = roles.get("adjunct")
        if adj is not None:
            if adj.label == "WHEN":
                c.when.append(adj.start)
            else:
                c.high.append(_interp(adj))
        return c
    raise ComposeError(f"cannot interpret {lab}")


def _wrap(adj: _Adj, f: Formula) -> Formula:
    if adj.kind == "for":
        return For(adj.unit, adj.count, f)
    return At(pattern(adj.text), f)


def _coerce(core: Formula, cls: str) -> list[Formula]:
    """Readings of a non-progressive clause located by an 'at TIME' adjunct."""
    if cls == "activity":
        return [Begin(core)]
    if cls == "culm_activity":
        return [End(core), Begin(core)]
    return [core]


def compose(tree: ParseTree, lexicon: Lexicon) -> list[Formula]:
    """Formulae for one parse tree (two when an 'at' clock time is ambiguous)."""
    c = _interp(tree)
    if len(c.when) > 1:
        raise ComposeError("more than one 'when' in a question")
    entry, vp = c.vp.entry, c.vp
    obj = c.filler if vp.gap else vp.obj
    if vp.gap and c.filler is None:
        raise ComposeError("missing object")
    if entry.transitive and obj is None:
        raise ComposeError(f"verb {entry.base!r} needs an object")

    # quantifier store, surface order
    nps = sorted([np for np in (c.subject, obj) if np is not None], key=lambda n: n.position)
    counter = count(1)
    store: list[QStoreItem] = []
    terms: dict[int, object] = {}
    for np in nps:
        if np.const is not None:
            terms[id(np)] = np.const
            continue
        v = Variable(f"x{next(counter)}")
        terms[id(np)] = v
        rest = (Pred(np.noun, (v,)),) if np.noun else ()
        store.append(QStoreItem(np.quant, v, rest, np.position))
    e1 = ev("e1")
    for pos in c.when:
        store.append(QStoreItem("mxl", e1, (), pos))
    store.sort(key=lambda q: q.position)

    slot = {"subj": c.subject, "obj": obj}
    args = tuple(t if isinstance(t, Variable) else term(t)
                 for t in (terms[id(slot[r])] for r in entry.roles))
    core = Pred(entry.predicate, args)

    lemma, tense = c.aux if c.aux else (None, None)
    progressive = lemma == "be"
    perfect = lemma == "have"
    if lemma is None:
        tense = "past" if vp.form == "past" else "pres"
    if entry.verb_class == "culm_activity" and not progressive:
        core = Culm(core)
    if tense == "pres" and not progressive and not perfect and entry.verb_class != "state":
        raise ComposeError(f"simple present of {entry.verb_class} verb {entry.base!r} is not covered")
    Tense = Past if tense == "past" else Pres
    coercible = not progressive

    def at_time(adjs):
        return any(a.kind == "at" and a.is_time for a in adjs)

    if perfect:
        cores = _coerce(core, entry.verb_class) if coercible and at_time(vp.low) else [core]
        bodies = []
        for x in cores:
            for a in vp.low:
                x = _wrap(a, x)
            bodies.append(Tense(e1, Perf(ev("e2"), x)))
    else:
        cores = _coerce(core, entry.verb_class) if coercible and at_time(c.high) else [core]
        bodies = [Tense(e1, x) for x in cores]

    out = []
    for x in bodies:
        for a in c.high:
            x = _wrap(a, x)
        for q in reversed(store):
            if q.kind == "mxl":
                x = InterrogMxl(q.var, x)
            elif q.kind == "exists":
                x = Exists(q.var, q.restriction, x)
            else:
                x = Interrog(q.var, q.restriction, x)
        x = cancel_culm_under_for(x)
        problems = well_formed(x, lexicon)
        if problems:
            raise ComposeError("; ".join(problems))
        out.append(x)
    return out


def _attachment(tree: ParseTree) -> int:
    """0 for readings with every adjunct at clause level, 1 with a low adjunct."""
    def low(t):
        return (t.label == "VP" and t.f("low")) or any(low(d) for _, d in t.daughters)
    return 1 if low(tree) else 0


def analyze(question: str, lexicon: Lexicon) -> list[Formula]:
    """All distinct readings of `question`, clause-level attachment first."""
    trees = sorted(parse(question, lexicon), key=_attachment)
    out, seen, errors = [], set(), []
    for t in trees:
        try:
            fs = compose(t, lexicon)
        except ComposeError as exc:
            errors.append(str(exc))
            continue
        for f in fs:
            key = alpha_normalize(f)
            if key not in seen:
                seen.add(key)
                out.append(f)
    if not out:
        raise ComposeError("; ".join(dict.fromkeys(errors)) or "no reading")
    return out
