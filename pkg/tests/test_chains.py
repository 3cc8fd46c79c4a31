from __future__ import annotations

import pytest

from gep.chains import EvolutionChain, build_chains, read_chains, remove_duplicates, restrict_span, write_chains
from gep.errors import ConfigError
from gep.tracking import EventType as E
from gep.tracking import EvolutionEvent


def ev(src, dst, kind, f=60.0, b=60.0):
    return EvolutionEvent(src, dst, kind, f, b)


# Five windows; G(j, w) written as (w, j). One group grows, splits in two,
# the halves merge back and the result shrinks.
SCENARIO = [
    ev((0, 0), (1, 0), E.GROWING),
    ev((1, 0), (2, 0), E.SPLITTING),
    ev((1, 0), (2, 1), E.SPLITTING),
    ev((2, 0), (3, 0), E.MERGING),
    ev((2, 1), (3, 0), E.MERGING),
    ev((3, 0), (4, 0), E.SHRINKING),
]

TWO_STATE = [
    (((0, 0), (1, 0)), (E.GROWING,), E.SPLITTING),
    (((1, 0), (2, 0)), (E.SPLITTING,), E.MERGING),
    (((1, 0), (2, 1)), (E.SPLITTING,), E.MERGING),
    (((2, 0), (3, 0)), (E.MERGING,), E.SHRINKING),
    (((2, 1), (3, 0)), (E.MERGING,), E.SHRINKING),
]

ONE_STATE = [
    ((0, 0), E.GROWING),
    ((1, 0), E.SPLITTING),
    ((2, 0), E.MERGING),
    ((2, 1), E.MERGING),
    ((3, 0), E.SHRINKING),
]


def shape(chains):
    return [(c.states, c.transitions, c.label) for c in chains]


def test_two_state_chains_of_scenario():
    assert shape(build_chains(SCENARIO, 2)) == TWO_STATE


def test_one_state_chains_of_scenario():
    chains = build_chains(SCENARIO, 1)
    assert [(c.states[0], c.label) for c in chains] == ONE_STATE
    assert remove_duplicates(chains) == chains


def test_grouping_on_last_state_drops_fifth_chain():
    chains = build_chains(SCENARIO, 2)
    kept = remove_duplicates(chains, "last-state")
    assert shape(kept) == TWO_STATE[:4]


def test_dedup_modes():
    chains = build_chains(SCENARIO, 1)
    assert remove_duplicates(chains + chains, "full") == chains
    assert len(remove_duplicates(chains + chains, "none")) == 10
    with pytest.raises(ConfigError):
        remove_duplicates(chains, "fuzzy")


def test_state_with_no_outgoing_event_yields_nothing():
    one = build_chains([ev((0, 0), (1, 0), E.CONTINUING)], 1)
    assert [c.states for c in one] == [((0, 0),)]
    assert build_chains([ev((0, 0), (1, 0), E.CONTINUING)], 2) == []


def test_two_labels_from_one_state():
    events = [ev((0, 0), (1, 0), E.GROWING), ev((0, 0), (1, 1), E.SPLITTING), ev((0, 0), (1, 2), E.SPLITTING)]
    assert [c.label for c in build_chains(events, 1)] == [E.GROWING, E.SPLITTING]


def test_entry_event_and_inclusions():
    events = [ev(None, (0, 0), E.FORMING, 0, 0), ev((0, 0), (1, 0), E.GROWING, 70, 40), ev((1, 0), (2, 0), E.CONTINUING)]
    c = build_chains(events, 2)[-1]
    assert c.entry_event is E.FORMING
    assert c.inclusions == ((0.0, 0.0), (70.0, 40.0))
    assert c.previous_event(1) is E.GROWING
    assert c.key == "0:0>1:0|continuing"


def test_bad_length():
    with pytest.raises(ConfigError):
        build_chains(SCENARIO, 0)


def test_restrict_span():
    chains = build_chains(SCENARIO, 2)
    assert restrict_span(chains, 0, 4) == chains
    assert shape(restrict_span(chains, 0, 1)) == TWO_STATE[:1]
    assert restrict_span(chains, 7, 9) == []
    with pytest.raises(ConfigError):
        restrict_span(chains, 3, 1)


def test_csv_roundtrip(tmp_path):
    chains = build_chains(SCENARIO, 2) + build_chains([ev(None, (0, 0), E.FORMING, 0.1, 0.2), ev((0, 0), (1, 0), E.GROWING, 1 / 3, 2 / 3)], 1)
    write_chains(chains, tmp_path / "c.csv")
    back = read_chains(tmp_path / "c.csv")
    assert back == chains
    assert isinstance(back[0], EvolutionChain)
