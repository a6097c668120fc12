from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import profiles
from ncgame.fileio import (
    ProfileFormatError,
    dump_profile,
    load_profile,
    parse_profile,
    parse_rational,
    serialize_profile,
)
from ncgame.graph import build_profile

alphas = st.fractions(min_value=Fraction(1, 1000), max_value=1000)


@given(profiles(max_n=8), st.one_of(st.none(), alphas))
def test_round_trip_is_exact(p, alpha):
    text = serialize_profile(p, alpha)
    doc = parse_profile(text)
    assert doc.profile == p
    assert doc.alpha == alpha
    assert serialize_profile(doc.profile, doc.alpha) == text


def test_file_round_trip(tmp_path):
    p = build_profile(3, [(1, 0), (1, 2)])
    path = tmp_path / "p.json"
    dump_profile(path, p, Fraction(7, 2))
    assert path.read_text() == '{"n": 3, "alpha": "7/2", "edges": [[1, 0], [1, 2]]}\n'
    assert load_profile(path).alpha == Fraction(7, 2)


@pytest.mark.parametrize("text,value", [("7/2", Fraction(7, 2)), ("4", Fraction(4)), (" 10 / 4 ", Fraction(5, 2)), (3, Fraction(3))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("text", ["0.5", "1e3", "x", "1/0", "", True])
def test_parse_rational_rejects(text):
    with pytest.raises(ValueError):
        parse_rational(text)


@pytest.mark.parametrize(
    "text,position",
    [
        ('{"n": 3, "edges": [[0, 1],]}', "line 1 column 27"),
        ("[1, 2]", "document"),
        ('{"n": -1}', "n"),
        ('{"n": 2, "alpha": 0.5}', "alpha"),
        ('{"n": 2, "alpha": "-1"}', "alpha"),
        ('{"n": 3, "edges": [[0, 1], [1]]}', "edges[1]"),
        ('{"n": 3, "edges": [[0, 1], [2, 2]]}', "edges[1]"),
        ('{"n": 3, "edges": [[0, 1], [0, 1]]}', "edges[1]"),
        ('{"n": 3, "colour": 1}', "document"),
    ],
)
def test_parse_errors_carry_position(text, position):
    with pytest.raises(ProfileFormatError) as err:
        parse_profile(text)
    assert err.value.position == position
