import json
from fractions import Fraction as F

import pytest
from conftest import CBP_TEXT, ORIGINAL_TEXT
from hypothesis import given, settings
from hypothesis import strategies as st

from crnlyap import Reaction, build_network, parse_dmatrix, parse_network, print_network
from crnlyap.dsl import network_from_dict, network_to_dict, parse_complex
from crnlyap.errors import CrnError, CrnSyntaxError, NegativeCoefficient, NonpositiveEntry, NonpositiveRate, SelfLoopReaction


def test_parse_original(original):
    assert original.species == ("S1", "S2")
    assert [rx.reactant for rx in original.reactions] == [(2, 0), (3, 0), (2, 1)]
    assert [rx.product for rx in original.reactions] == [(3, 0), (2, 1), (2, 0)]
    assert [rx.exact_rate for rx in original.reactions] == [2, 1, 2]


def test_parse_cbp(cbp_net):
    assert [rx.product for rx in cbp_net.reactions] == [(5, 0), (0, 1), (2, 0)]
    assert [rx.exact_rate for rx in cbp_net.reactions] == [F(2, 9), F(1, 27), F(2, 9)]


def test_print_is_byte_exact(original, cbp_net):
    assert print_network(original) == ORIGINAL_TEXT
    assert print_network(cbp_net) == CBP_TEXT


def test_whitespace_and_comments_ignored():
    text = "# header\n\n  2S1->3 S1;k=2   # trailing\n3 S1 -> 2 S1 + S2 ; k = 1\n2 S1+S2 -> 2 S1 ; k = 2\n"
    assert print_network(parse_network(text).network) == ORIGINAL_TEXT


def test_source_spans():
    doc = parse_network("# c\n\nA -> B ; k = 1\n  B -> A ; k = 2\n")
    assert doc.source_spans == {0: (3, 1), 1: (4, 3)}


def test_zero_complex_round_trip():
    text = "0 -> S1 ; k = 1\n"
    net = parse_network(text).network
    assert net.reactions[0].reactant == (0,)
    assert print_network(net) == text


def test_fractional_coefficient_printing():
    net = build_network(["S1"], [Reaction.make((F(5, 3),), (0,), 1)])
    assert print_network(net) == "5/3 S1 -> 0 ; k = 1\n"


def test_decimal_rate_kept_exact():
    net = parse_network("A -> B ; k = 0.1\n").network
    assert net.reactions[0].exact_rate == F(1, 10)
    assert print_network(net) == "A -> B ; k = 1/10\n"


def test_self_loop_located():
    with pytest.raises(SelfLoopReaction) as info:
        parse_network("S1 -> S1 ; k = 1")
    assert info.value.line == 1


@pytest.mark.parametrize(
    "text, exc, line",
    [
        ("A -> B ; k = 1\nA -> ; k = 1\n", CrnSyntaxError, 2),
        ("A -> B ; k = 0\n", NonpositiveRate, 1),
        ("A -> B\n", CrnSyntaxError, 1),
        ("-1 A -> B ; k = 1\n", NegativeCoefficient, 1),
        ("2 -> B ; k = 1\n", CrnSyntaxError, 1),
        ("A -> B ; k = 1 junk\n", CrnSyntaxError, 1),
    ],
)
def test_errors_carry_locations(text, exc, line):
    with pytest.raises(exc) as info:
        parse_network(text)
    assert info.value.line == line
    assert info.value.column is not None
    assert f"line {line}" in str(info.value)


def test_parse_dmatrix():
    assert parse_dmatrix("1/3, 1") == (F(1, 3), F(1))
    assert parse_dmatrix("1, 1") == (F(1), F(1))
    with pytest.raises(NonpositiveEntry):
        parse_dmatrix("0, 1")
    with pytest.raises(CrnSyntaxError):
        parse_dmatrix("1/3,,1")


def test_parse_complex():
    assert parse_complex("2 S1 + S2", ["S1", "S2"]) == (2, 1)
    assert parse_complex("0", ["S1", "S2"]) == (0, 0)


def test_json_round_trip(cbp_net):
    data = network_to_dict(cbp_net)
    assert list(data) == ["species", "reactions"]
    assert data["reactions"][1] == {"reactant": {"S1": "3"}, "product": {"S2": "1"}, "k": "1/27"}
    assert network_from_dict(json.loads(json.dumps(data))) == cbp_net


names = st.sampled_from(["A", "B", "C2", "x_y", "Zz"])
coeffs = st.fractions(F(0), F(4), max_denominator=3)


@st.composite
def networks(draw):
    species = draw(st.lists(names, min_size=1, max_size=4, unique=True))
    n = len(species)
    comp = st.tuples(*[coeffs for _ in range(n)])
    pairs = draw(st.lists(st.tuples(comp, comp).filter(lambda p: p[0] != p[1]), min_size=1, max_size=5))
    rate = st.one_of(st.fractions(F(1, 100), F(100)), st.floats(1e-6, 1e6, allow_nan=False))
    rx = [Reaction.make(a, b, draw(rate)) for a, b in pairs]
    return build_network(species, rx)


@settings(max_examples=150)
@given(networks())
def test_parse_print_round_trip(net):
    again = parse_network(print_network(net)).network
    assert again.species == net.species
    for a, b in zip(net.reactions, again.reactions, strict=True):
        assert (a.reactant, a.product) == (b.reactant, b.product)
        if a.exact_rate is not None:
            assert b.exact_rate == a.exact_rate
        # shortest round-trip decimals parse back to the same double
        assert b.rate == a.rate


@settings(max_examples=300)
@given(st.binary(max_size=200))
def test_parser_never_crashes_on_bytes(blob):
    try:
        parse_network(blob)
    except CrnError as exc:
        assert exc.line is not None


@settings(max_examples=300)
@given(st.text(alphabet="AS12 +-/>;=k#0.\n", max_size=80))
def test_parser_never_crashes_on_near_grammar(text):
    try:
        parse_network(text)
    except CrnError as exc:
        assert exc.line is not None
