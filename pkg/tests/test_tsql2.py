import pytest
from hypothesis import given, settings, strategies as st

from topnlidb.topast import parse_formula
from topnlidb.tralg import translate
from topnlidb.tsql2 import DialectError, emit_algebra, emit_tsql2, recognize
from tests.conftest import check_golden
from tests.helpers import random_case

NOW = "1/7/1996"
CASES = {
    "past_state": "Past[e1, contain(tank2, water)]",
    "at_past_culm": 'At["1/6/94", Past[e1, Culm[fixing(john, eng2)]]]',
    "mxl_past": "?mxl e1 Past[e1, contain(tank2, water)]",
    "which_engine": "? x1 engine(x1) : Past[e1, Culm[fixing(john, x1)]]",
    "perf_high": 'At["1/1/85", Past[e1, Perf[e2, advertise(ibi, ppc)]]]',
    "perf_low": 'Past[e1, Perf[e2, At["1/1/85", advertise(ibi, ppc)]]]',
    "for_year": "For[year, 2, Past[e1, building(housecorp, bridge2)]]",
    "end_culm": 'At["3/6/94", Past[e1, End[Culm[fixing(john, eng2)]]]]',
    "mxl_perf": "?mxl e1 Past[e1, Perf[e2, Culm[fixing(john, eng2)]]]",
    "exists_pres": "exists x1 tank(x1) : Pres[e1, contain(x1, water)]",
}
CLOCK_CASES = {
    "clock_begin": 'At["5:00pm", Past[e1, Begin[run(john)]]]',
}


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_sample(name, sample_db):
    st_ = sample_db.axis.point_from_text(NOW)
    text = emit_tsql2(parse_formula(CASES[name]), st_, sample_db.axis)
    check_golden(f"tsql2/{name}.sql", text + "\n")
    recognize(text)


@pytest.mark.parametrize("name", sorted(CLOCK_CASES))
def test_golden_clock(name, clock_db):
    st_ = clock_db.axis.point_from_text("2/6/1994 12:00")
    text = emit_tsql2(parse_formula(CLOCK_CASES[name]), st_, clock_db.axis)
    check_golden(f"tsql2/{name}.sql", text + "\n")
    assert "CALENDAR('5:00pm')" in text
    recognize(text)


def test_required_shapes(sample_db):
    st_ = sample_db.axis.point_from_text(NOW)
    ax = sample_db.axis
    past = emit_tsql2(parse_formula(CASES["past_state"]), st_, ax)
    assert "FROM CONTAIN AS" in past and "PRECEDES PERIOD '1/7/1996..1/7/1996'" in past
    culm = emit_tsql2(parse_formula(CASES["at_past_culm"]), st_, ax)
    assert "FROM FIXING AS" in culm and ".climax AS climax" in culm
    assert "END(VALID(t3)) = t3.climax" in culm
    mxl = emit_tsql2(parse_formula(CASES["mxl_past"]), st_, ax)
    assert "NOT EXISTS (" in mxl and "VALID(r) CONTAINS VALID(q)" in mxl
    assert mxl.splitlines()[0].startswith("-- TOP: ?mxl")


def test_one_top_comment_per_node(sample_db):
    from topnlidb.tralg import iter_nodes
    st_ = sample_db.axis.point_from_text(NOW)
    a = translate(parse_formula(CASES["which_engine"]), st_, sample_db.axis)
    text = emit_algebra(a, sample_db.axis)
    assert text.count("-- TOP:") == sum(1 for n in iter_nodes(a) if n.source)


@pytest.mark.parametrize("text", [
    "SELECT",
    "SELECT * FROM",
    "SELECT * FROM T AS t1 WHERE",
    "SELECT * FROM T AS t1 WHERE t1.a1 = ",
    "SELECT * FROM (SELECT * FROM T AS t2 AS t1",
    "DELETE FROM T",
    "SELECT * FROM T AS t1 WHERE t1.a1 == 'x'",
])
def test_recognizer_rejects(text):
    with pytest.raises(DialectError):
        recognize(text)


def test_recognizer_accepts_handwritten():
    recognize("SELECT DISTINCT t1.a1 AS x\nVALID VALID(t1)\nFROM RUN AS t1\n"
              "WHERE VALID(t1) OVERLAPS PERIOD '1/1/1994..2/1/1994' AND NOT EXISTS "
              "(SELECT * FROM RUN AS t2 WHERE t2.a1 <> t1.a1)")


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_random_round_trip(seed):
    db, f, st_ = random_case(seed)
    text = emit_tsql2(f, st_, db.axis)
    assert text == emit_tsql2(f, st_, db.axis)
    recognize(text)
    assert text.isascii() and "\t" not in text
    for line in text.splitlines():
        assert (len(line) - len(line.lstrip(" "))) % 2 == 0
