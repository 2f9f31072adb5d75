"""Command-line front end: answer questions interactively or from a file.

Every question is parsed into one or more TOP readings, each answered by the
denotational evaluator. ``--check`` also answers each reading through the
compiled algebra and reports any disagreement.

A line starting with ``:top`` is taken as a TOP formula in canonical syntax
instead of an English question; ``:quit`` ends an interactive session.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from .lexgram import ComposeError, Lexicon, LexiconError, ParseError, analyze, load_lexicon
from .tdb import Database, DatabaseError, load_database
from .timecore import TimeError
from .topast import FormulaSyntaxError, parse_formula, render, well_formed
from .topeval import EvaluationError, evaluate
from .tralg import answer_formula
from .tsql2 import emit_tsql2

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE = 0, 1, 2

# failures caused by the question rather than by this program
USER_ERRORS = (ParseError, ComposeError, FormulaSyntaxError, TimeError, EvaluationError,
               DatabaseError)


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class SessionConfig:
    db_path: str
    lexicon_path: str
    now: str
    show_top: bool = False
    show_tsql2: bool = False
    check: bool = False
    readings: str = "all"


@dataclass
class Session:
    config: SessionConfig
    db: Database
    lexicon: Lexicon
    st: int
    failures: int = 0
    divergences: int = 0
    internal: int = 0


def check_compatible(lexicon: Lexicon, db: Database) -> list[str]:
    """Lexicon predicates whose declaration contradicts the database schema."""
    problems = []
    for symbol, (arity, cls) in sorted(lexicon.predicates().items()):
        info = db.predicate_info(symbol)
        if info is not None and info != (arity, cls):
            problems.append(f"predicate {symbol}: lexicon says {arity}/{cls}, "
                            f"database says {info[0]}/{info[1]}")
    return problems


def open_session(config: SessionConfig) -> Session:
    try:
        db = load_database(Path(config.db_path).read_text(encoding="utf-8"))
    except (OSError, DatabaseError) as exc:
        raise ConfigError(f"cannot load database {config.db_path}: {exc}") from None
    try:
        lexicon = load_lexicon(Path(config.lexicon_path).read_text(encoding="utf-8"))
    except (OSError, LexiconError) as exc:
        raise ConfigError(f"cannot load lexicon {config.lexicon_path}: {exc}") from None
    problems = check_compatible(lexicon, db)
    if problems:
        raise ConfigError("lexicon does not match database: " + "; ".join(problems))
    try:
        st = db.axis.point_from_text(config.now)
    except TimeError as exc:
        raise ConfigError(f"--now {config.now!r} does not resolve onto the axis: {exc}") from None
    return Session(config, db, lexicon, st)


def _readings(session: Session, line: str):
    if line.startswith(":top"):
        f = parse_formula(line[4:].strip())
        problems = well_formed(f, session.db)
        if problems:
            raise ComposeError("; ".join(problems))
        return [f]
    fs = analyze(line, session.lexicon)
    return fs[:1] if session.config.readings == "first" else fs


def answer_line(session: Session, line: str, out: TextIO) -> None:
    """Answer one input line, writing every result to `out`."""
    cfg = session.config
    try:
        readings = _readings(session, line)
    except USER_ERRORS as exc:
        session.failures += 1
        out.write(f"error: {exc}\n")
        return
    for i, f in enumerate(readings, 1):
        pad = ""
        if len(readings) > 1:
            out.write(f"reading {i}/{len(readings)}:\n")
            pad = "  "
        try:
            if cfg.show_top:
                out.write(f"{pad}TOP: {render(f)}\n")
            if cfg.show_tsql2:
                out.write(f"{pad}TSQL2:\n")
                for sql in emit_tsql2(f, session.st, session.db.axis).splitlines():
                    out.write(f"{pad}  {sql}\n")
            answer = evaluate(session.db, f, session.st)
            for row in answer.render(session.db.axis):
                out.write(f"{pad}{row}\n")
            if cfg.check:
                compiled = answer_formula(session.db, f, session.st)
                if compiled == answer:
                    out.write(f"{pad}CHECK OK\n")
                else:
                    session.divergences += 1
                    out.write(f"{pad}CHECK DIVERGENCE in {line!r}, reading {i}: "
                              f"topeval={answer.render(session.db.axis)} "
                              f"tralg={compiled.render(session.db.axis)}\n")
        except USER_ERRORS as exc:
            session.failures += 1
            out.write(f"{pad}error: {exc}\n")
        except Exception as exc:  # noqa: BLE001 - reported, never fatal
            session.internal += 1
            out.write(f"{pad}internal error: {type(exc).__name__}: {exc}\n")


def _questions(lines: Iterable[str]):
    for raw in lines:
        line = raw.strip()
        if line and not line.startswith("#"):
            yield line


def run_batch(config: SessionConfig, questions_file: str, out: TextIO) -> int:
    try:
        session = open_session(config)
        text = Path(questions_file).read_text(encoding="utf-8")
    except ConfigError as exc:
        print(f"topnlidb: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"topnlidb: cannot read {questions_file}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return _batch(session, text.splitlines(), out)


def _batch(session: Session, lines: Iterable[str], out: TextIO) -> int:
    n = 0
    for line in _questions(lines):
        if n:
            out.write("\n")
        out.write(f"Q: {line}\n")
        answer_line(session, line, out)
        n += 1
    if n:
        print(f"{n} question(s), {session.failures} failed, "
              f"{session.divergences} divergence(s)", file=sys.stderr)
    if session.divergences:
        return EXIT_DIVERGENCE
    return EXIT_CONFIG if session.internal else EXIT_OK


def run_repl(config: SessionConfig, inp: TextIO = sys.stdin, out: TextIO = sys.stdout) -> int:
    try:
        session = open_session(config)
    except ConfigError as exc:
        print(f"topnlidb: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    interactive = inp.isatty()
    while True:
        if interactive:
            out.write("> ")
            out.flush()
        raw = inp.readline()
        if not raw:
            break
        line = raw.strip()
        if line in (":quit", ":q"):
            break
        if line:
            answer_line(session, line, out)
            out.flush()
    return EXIT_DIVERGENCE if session.divergences else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="topnlidb", description=__doc__.splitlines()[0])
    p.add_argument("--db", required=True, metavar="FILE", help="database file")
    p.add_argument("--lexicon", required=True, metavar="FILE", help="lexicon file")
    p.add_argument("--now", required=True, metavar='"D/M/YYYY[ HH:MM]"',
                   help="speech time (the moment the questions are asked)")
    p.add_argument("--show-top", action="store_true", help="print each TOP reading")
    p.add_argument("--show-tsql2", action="store_true", help="print the compiled TSQL2 text")
    p.add_argument("--check", action="store_true",
                   help="also answer through the compiled algebra and compare")
    p.add_argument("--readings", choices=("all", "first"), default="all")
    p.add_argument("--batch", metavar="FILE", help="answer every line of FILE, then exit")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = SessionConfig(args.db, args.lexicon, args.now, args.show_top, args.show_tsql2,
                           args.check, args.readings)
    if args.batch:
        return run_batch(config, args.batch, sys.stdout)
    return run_repl(config)


if __name__ == "__main__":
    sys.exit(main())
