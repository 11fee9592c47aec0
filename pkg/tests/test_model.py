"""Protocol type, parser, serializer and validation tests."""

import random

import pytest

from regverify.errors import (ProtocolSemanticError, ProtocolSyntaxError)
from regverify.model import (Action, Protocol, READ, Transition, is_uninitialized,
                             parse_protocol, serialize_protocol, validate)
from regverify.reductions import (CnfFormula, builtin_examples,
                                  sat_to_uninit_target)

PROTOCOLS, _ = builtin_examples()


def test_fig1_shape():
    p = PROTOCOLS["fig1"]
    assert p.num_states == 5
    assert p.register_count == 1
    assert p.symbol_names == ("d0", "a", "b", "c")
    assert len(p.transitions) == 8
    assert p.initial_states == {p.state_id("q0")}


def test_minimal_protocol():
    p = parse_protocol("flavor: roundless\nstates: q0\ninitial: q0\n"
                       "registers: 1\nalphabet: d0\ntransitions:\n")
    assert p.num_states == 1
    assert p.transitions == ()
    assert validate(p) == []


def test_write_of_initial_symbol_rejected():
    src = ("flavor: roundless\nstates: q0\ninitial: q0\nregisters: 1\n"
           "alphabet: d0\ntransitions:\n  q0 write(1, d0) q0\n")
    with pytest.raises(ProtocolSemanticError, match="write of initial symbol"):
        parse_protocol(src)


def test_syntax_error_carries_line():
    with pytest.raises(ProtocolSyntaxError, match="line 2"):
        parse_protocol("flavor: roundless\nstates q0\n")


def test_unknown_state_in_transition():
    src = ("flavor: roundless\nstates: q0\ninitial: q0\nregisters: 1\n"
           "alphabet: d0 a\ntransitions:\n  q0 write(1, a) nowhere\n")
    with pytest.raises(ProtocolSemanticError, match="nowhere"):
        parse_protocol(src)


def test_roundbased_needs_visibility():
    with pytest.raises(ProtocolSyntaxError, match="visibility"):
        parse_protocol("flavor: roundbased\nstates: q0\ninitial: q0\n"
                       "registers: 1\nalphabet: d0\ntransitions:\n")


@pytest.mark.parametrize("name", ["fig1", "fig1_blue", "fig1_red", "fig4",
                                  "ex22", "ex42"])
def test_roundtrip_builtin(name):
    p = PROTOCOLS[name]
    assert parse_protocol(serialize_protocol(p)) == p
    assert validate(p) == []


def test_serialization_is_bit_stable():
    p = PROTOCOLS["fig4"]
    assert serialize_protocol(p) == serialize_protocol(
        parse_protocol(serialize_protocol(p)))


def test_validate_unknown_state_finding():
    p = PROTOCOLS["fig1"]
    broken = Protocol(flavor=p.flavor, state_names=p.state_names,
                      initial_states=p.initial_states,
                      register_count=p.register_count,
                      symbol_names=p.symbol_names,
                      transitions=p.transitions + (
                          Transition(0, Action(READ, reg=0, symbol=0), 99),))
    codes = [f.code for f in validate(broken)]
    assert "UnknownState" in codes


def test_validate_depth_out_of_range():
    p = PROTOCOLS["fig4"]
    broken = Protocol(flavor=p.flavor, state_names=p.state_names,
                      initial_states=p.initial_states,
                      register_count=p.register_count,
                      symbol_names=p.symbol_names, visibility=p.visibility,
                      transitions=p.transitions + (
                          Transition(0, Action(READ, reg=0, symbol=0,
                                               depth=p.visibility + 1), 0),))
    codes = [f.code for f in validate(broken)]
    assert "DepthOutOfRange" in codes


def test_is_uninitialized():
    assert not is_uninitialized(PROTOCOLS["fig1"])  # two read(d0) transitions
    empty = parse_protocol("flavor: roundless\nstates: q0\ninitial: q0\n"
                           "registers: 1\nalphabet: d0\ntransitions:\n")
    assert is_uninitialized(empty)
    cnf = CnfFormula(1, (( 1, 1, 1),))
    p, _ = sat_to_uninit_target(cnf)
    assert is_uninitialized(p)


def test_uninitialized_monotone_under_transition_removal():
    rng = random.Random(7)
    for name in ("fig1", "fig1_red", "fig4"):
        p = PROTOCOLS[name]
        for _ in range(20):
            keep = tuple(t for t in p.transitions if rng.random() < 0.6)
            sub = Protocol(flavor=p.flavor, state_names=p.state_names,
                           initial_states=p.initial_states,
                           register_count=p.register_count,
                           symbol_names=p.symbol_names,
                           visibility=p.visibility, transitions=keep)
            if is_uninitialized(p):
                assert is_uninitialized(sub)
