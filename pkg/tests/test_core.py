"""Semantics, flatness, size accounting, and the text format."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import flat_by_cycle_enumeration, random_multigraph_vass
from vasskit.core import (
    CaTransition,
    Configuration,
    CounterAutomaton,
    EncodingKind,
    NegativeCounter,
    Run,
    RunValidationError,
    Transition,
    Vass,
    WrongState,
    ca_validate_run,
    canonical_form,
    dumps,
    encoded_size,
    fire,
    format_config,
    is_flat,
    isomorphic,
    loads,
    parse_config,
    to_dot,
    validate_run,
)


def two_state_vass():
    return Vass("t", 2, ("q", "p"), (Transition("q", (-1, 1), "p"),))


class TestFire:
    def test_single_step_arithmetic(self):
        v = two_state_vass()
        t = Transition("q", (-1, 1), "p")
        assert fire(v, Configuration("q", (2, 0)), t) == Configuration("p", (1, 1))

    def test_guard_at_zero(self):
        v = Vass("t", 2, ("q", "p"), (Transition("q", (-1, 0), "p"),))
        with pytest.raises(NegativeCounter):
            fire(v, Configuration("q", (0, 0)), v.transitions[0])

    def test_example1_first_edge(self, example1_vass):
        v = example1_vass
        first = v.transitions[0]
        assert first.effect == (1, 0)
        got = fire(v, Configuration(v.initial, (0, 0)), first)
        assert got.counters == (1, 0)

    def test_wrong_state(self):
        v = two_state_vass()
        with pytest.raises(WrongState):
            fire(v, Configuration("p", (1, 1)), v.transitions[0])


class TestValidateRun:
    def test_empty_run_identity(self):
        v = two_state_vass()
        final, effect = validate_run(v, Run(Configuration("q", (3, 1)), ()))
        assert final == Configuration("q", (3, 1))
        assert effect == (0, 0)

    def test_example1_full_loops(self, example1_vass):
        # 1 -> flush -> x2 -> flush -> x2 by hand: x = 4, y = 0
        from vasskit.reach import maximal_decider, scripted_run
        from vasskit.lang import compile_plan, expand, parse
        from conftest import EXAMPLE1_TEXT

        compiled = compile_plan(expand(parse(EXAMPLE1_TEXT), {}))
        run = scripted_run(compiled, maximal_decider)
        final, effect = validate_run(compiled.vass, run)
        assert final.state == compiled.vass.final
        assert final.counters == (4, 0)
        assert effect == (4, 0)

    def test_mismatch_reported_at_step_two(self):
        v = Vass("t", 1, ("a", "b"), (Transition("a", (1,), "b"),
                                      Transition("b", (1,), "a")))
        bad = Run(Configuration("a", (0,)), (v.transitions[0], v.transitions[0]))
        with pytest.raises(RunValidationError) as exc:
            validate_run(v, bad)
        assert exc.value.step == 2
        assert isinstance(exc.value.cause, WrongState)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_effect_additivity_over_splits(self, seed):
        rng = random.Random(seed)
        v = random_multigraph_vass(rng)
        by_src: dict[str, list[Transition]] = {}
        for t in v.transitions:
            by_src.setdefault(t.src, []).append(t)
        start = Configuration(rng.choice(v.states), (rng.randint(0, 3),))
        state, value = start.state, start.counters[0]
        steps: list[Transition] = []
        for _ in range(rng.randint(0, 8)):
            options = [t for t in by_src.get(state, []) if value + t.effect[0] >= 0]
            if not options:
                break
            t = rng.choice(options)
            steps.append(t)
            value += t.effect[0]
            state = t.dst
        run = Run(start, tuple(steps))
        final, effect = validate_run(v, run)
        k = rng.randint(0, len(steps))
        mid, eff1 = validate_run(v, Run(start, tuple(steps[:k])))
        _, eff2 = validate_run(v, Run(mid, tuple(steps[k:])))
        assert tuple(a + b for a, b in zip(eff1, eff2)) == effect
        assert final.counters[0] == start.counters[0] + effect[0]

    def test_replay_determinism(self, example1_vass):
        v = example1_vass
        run = Run(Configuration(v.initial, (0, 0)), (v.transitions[0],))
        assert validate_run(v, run) == validate_run(v, run)


class TestCaValidate:
    def automaton(self):
        ts = (
            CaTransition("i", (1, 0), "i"),
            CaTransition("i", (0, 1), "f", zero_test=0),
        )
        return CounterAutomaton("a", 2, ("i", "f"), ts, "i", "f")

    def test_empty_run_under_bound(self):
        a = self.automaton()
        got = ca_validate_run(a, Run(Configuration("i", (0, 0)), ()), 1)
        assert got == Configuration("i", (0, 0))

    def test_zero_test_failure(self):
        a = self.automaton()
        run = Run(Configuration("i", (0, 0)),
                  (a.transitions[0], a.transitions[0], a.transitions[1]))
        with pytest.raises(RunValidationError) as exc:
            ca_validate_run(a, run, 10)
        assert isinstance(exc.value.cause, type(exc.value.cause))
        assert "not 0" in str(exc.value)

    def test_strict_bound(self):
        a = self.automaton()
        run = Run(Configuration("i", (0, 0)), (a.transitions[0], a.transitions[0]))
        with pytest.raises(RunValidationError) as exc:
            ca_validate_run(a, run, 2)
        assert "2" in str(exc.value.cause)


class TestFlatness:
    def test_example1_flat(self, example1_vass):
        assert is_flat(example1_vass)

    def test_two_self_loops_not_flat(self):
        v = Vass("t", 1, ("q",), (Transition("q", (1,), "q"),
                                  Transition("q", (-1,), "q")))
        assert not is_flat(v)

    def test_subset_sum_output_flat(self):
        from vasskit.reductions import SubsetSumInstance, subset_sum_to_vass

        v = subset_sum_to_vass(SubsetSumInstance(3, (1, 2)))
        assert is_flat(v)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=150, deadline=None)
    def test_agrees_with_cycle_enumeration(self, seed):
        v = random_multigraph_vass(random.Random(seed))
        assert is_flat(v) == flat_by_cycle_enumeration(v)


class TestEncodedSize:
    def test_empty_vass(self):
        assert encoded_size(Vass("e", 1, ("q",), ()), EncodingKind.UNARY) == 1

    def test_unary_entry_weight(self):
        v = Vass("t", 1, ("q", "p"), (Transition("q", (3,), "p"),))
        # 2 states + 2 endpoints + (1 + |3|) for the entry
        assert encoded_size(v, EncodingKind.UNARY) == 2 + 2 + 4
        assert encoded_size(v, EncodingKind.BINARY) == 2 + 2 + 1 + 2

    def test_pump_size_regression(self):
        from vasskit.reductions import PumpParams, pspace_pump

        v = pspace_pump(PumpParams(1, 1))
        unary = encoded_size(v, EncodingKind.UNARY)
        binary = encoded_size(v, EncodingKind.BINARY)
        assert unary < 10 * binary * binary
        # frozen on first computation; guards against accidental shape drift
        assert (unary, binary) == (117, 89)

    def test_monotone_in_extra_transition(self):
        v1 = Vass("t", 1, ("q",), (Transition("q", (2,), "q"),))
        v2 = Vass("t", 1, ("q",), v1.transitions + (Transition("q", (-1,), "q"),))
        for kind in EncodingKind:
            assert encoded_size(v2, kind) > encoded_size(v1, kind)


class TestTextFormat:
    def test_vass_round_trip(self, example1_vass):
        again = loads(dumps(example1_vass))
        assert again == example1_vass

    def test_automaton_round_trip(self):
        a = CounterAutomaton(
            "a", 2, ("i", "f"),
            (CaTransition("i", (1, -1), "f"), CaTransition("f", (0, 0), "i", zero_test=1)),
            "i", "f")
        assert loads(dumps(a)) == a

    def test_comments_and_blanks(self):
        text = "# header\nvass t dim 1\n\nstate q  # the only state\n"
        v = loads(text)
        assert v.states == ("q",)

    def test_config_literal(self):
        c = Configuration("p5.loop", (1, 0, 7))
        assert parse_config(format_config(c)) == c
        assert format_config(c) == "p5.loop(1,0,7)"

    def test_dot_export(self, example1_vass):
        dot = to_dot(example1_vass)
        assert dot.startswith("digraph")
        for s in example1_vass.states:
            assert f'"{s}"' in dot
        assert dot.count("->") == len(example1_vass.transitions)


class TestIsomorphism:
    def test_renamed_vass_isomorphic(self, example1_vass):
        mapping = {s: f"n{i}" for i, s in enumerate(example1_vass.states)}
        renamed = Vass(
            "renamed", 2,
            tuple(mapping[s] for s in example1_vass.states),
            tuple(Transition(mapping[t.src], t.effect, mapping[t.dst])
                  for t in example1_vass.transitions),
            initial=mapping[example1_vass.initial],
            final=mapping[example1_vass.final])
        assert isomorphic(example1_vass, renamed)

    def test_different_effect_not_isomorphic(self, example1_vass):
        v = example1_vass
        tweaked = Vass(v.name, 2, v.states,
                       (Transition(v.transitions[0].src, (2, 0), v.transitions[0].dst),)
                       + v.transitions[1:], v.initial, v.final)
        assert not isomorphic(v, tweaked)
        assert canonical_form(v) != canonical_form(tweaked)
