"""Zero-test gadget behavior: emitters, instrumentation, and cheat detection."""

from __future__ import annotations

import pytest

from vasskit.core import Configuration
from vasskit.gadgets import (
    CtrlSpec,
    GadgetError,
    PairSpec,
    TripleSpec,
    amplifier_stmts,
    build_amplifier,
    emit_flush,
    emit_multiply,
    expand_pair_tests,
    expand_triple_tests,
    instrument_ctrl,
    pair_epilogue_stmt,
    pair_test_stmts,
    triple_test_stmts,
    with_strategy,
)
from vasskit.lang import (
    Choice,
    CoreProgram,
    CtrlTag,
    Loop,
    PairFinal,
    Update,
    ZeroTest,
    compile_plan,
    interpret,
)
from vasskit.reach import MAXIMAL, Caps, explore_monitored, maximal_decider, scripted_run


def run_to_final(compiled, decider, start):
    run = scripted_run(compiled, decider, start)
    counters = list(start)
    for t in run.steps:
        for i, e in enumerate(t.effect):
            counters[i] += e
    return tuple(counters)


class TestFlush:
    def test_shape(self):
        st = emit_flush("a", "b", "d")
        assert st == Loop((Update((("a", -1), ("b", 1), ("d", -1))),))

    def test_full_flush(self):
        cp = CoreProgram("f", ("a", "b", "d"), (emit_flush("a", "b", "d"),))
        got = run_to_final(compile_plan(cp), maximal_decider, (5, 2, 7))
        assert got == (0, 7, 2)

    def test_idle_flush(self):
        cp = CoreProgram("f", ("a", "b", "d"), (emit_flush("a", "b", "d"),))

        def idle(kind, path, t, counters):
            return 0

        assert run_to_final(compile_plan(cp), idle, (5, 2, 7)) == (5, 2, 7)

    def test_distinct_names_required(self):
        with pytest.raises(GadgetError):
            emit_flush("a", "a", "d")


class TestMultiply:
    def test_honest_doubling(self):
        # independent oracle: interpret the macro with exact zero-test semantics
        cp = CoreProgram("m", ("x1", "x3"), tuple(emit_multiply("x1", "x3", 2)))
        out = interpret(cp, 64, zero_tests="exact", start=(4, 0))
        assert out == {(8, 0)}

    def test_factor_one_is_identity(self):
        cp = CoreProgram("m", ("x", "y"), tuple(emit_multiply("x", "y", 1)))
        out = interpret(cp, 64, zero_tests="exact", start=(5, 0))
        assert out == {(5, 0)}

    def test_two_markers_per_instance(self):
        stmts = emit_multiply("x", "y", 3)
        assert sum(isinstance(s, ZeroTest) for s in stmts) == 2
        assert all(s.strategy is None for s in stmts if isinstance(s, ZeroTest))

    def test_with_strategy_fills_tags(self):
        tagged = with_strategy(emit_multiply("x", "y", 3), CtrlTag("c"))
        tags = [s.strategy for s in tagged if isinstance(s, ZeroTest)]
        assert tags == [CtrlTag("c"), CtrlTag("c")]


class TestInstrumentCtrl:
    def test_pump_line3_coefficient(self):
        from vasskit.reductions import PumpParams, pspace_program

        for n in (1, 2, 3):
            inst = instrument_ctrl(pspace_program(PumpParams(1, n)),
                                   CtrlSpec("x5", ("x1", "x2", "x3")))
            for i in range(1, n + 1):
                flush_a = inst.body[1 + 4 * (i - 1)]
                delta = sum(v for name, v in flush_a.body[0].entries if name == "x5")
                assert delta == n + 1 - i

    def test_subset_sum_line4_net(self):
        from vasskit.reductions import SubsetSumInstance, subset_sum_program

        inst = SubsetSumInstance(3, (1, 2))
        k, n = inst.bit_width, 2
        out = instrument_ctrl(subset_sum_program(inst), CtrlSpec("c", ("x", "y")))
        block1 = out.body[2 + 3 * (k - 1)]  # choice for value 1
        flush = block1.left[1]
        delta = sum(v for name, v in flush.body[0].entries if name == "c")
        assert delta == -(n - 1) - 1

    def test_pump_line1_nonzero(self):
        from vasskit.reductions import PumpParams, pspace_program

        inst = instrument_ctrl(pspace_program(PumpParams(1, 1)),
                               CtrlSpec("x5", ("x1", "x2", "x3")))
        first = inst.body[0]
        assert ("x5", 20) in first.entries

    def test_unbalanced_choice_rejected(self):
        cp = CoreProgram("u", ("a", "k"),
                         (Choice((ZeroTest("a", CtrlTag("k")),), (Update((("a", 1),)),)),))
        with pytest.raises(GadgetError):
            instrument_ctrl(cp, CtrlSpec("k", ("a",)))

    def test_balanced_choice_accepted(self):
        cp = CoreProgram("b", ("a", "k"),
                         (Update((("a", 1),)),
                          Choice((ZeroTest("a", CtrlTag("k")),),
                                 (ZeroTest("a", CtrlTag("k")),))))
        out = instrument_ctrl(cp, CtrlSpec("k", ("a",)))
        assert ("k", 1) in out.body[0].entries

    def test_marker_in_loop_rejected(self):
        cp = CoreProgram("l", ("a", "k"), (Loop((ZeroTest("a", CtrlTag("k")),)),))
        with pytest.raises(GadgetError):
            instrument_ctrl(cp, CtrlSpec("k", ("a",)))

    def test_uncontrolled_marker_rejected(self):
        cp = CoreProgram("u", ("a", "b", "k"), (ZeroTest("b", CtrlTag("k")),))
        with pytest.raises(GadgetError):
            instrument_ctrl(cp, CtrlSpec("k", ("a",)))

    def test_markers_removed_notes_added(self):
        cp = CoreProgram("n", ("a", "k"), (Update((("a", 1),)), ZeroTest("a", CtrlTag("k"))))
        out = instrument_ctrl(cp, CtrlSpec("k", ("a",)))
        assert not any(isinstance(s, ZeroTest) for s in out.body)
        assert any("start at 0" in note for note in out.notes)


class TestTripleExpansion:
    def spec(self, fam):
        return TripleSpec(b="b", c="c", d="d", family=fam)

    def test_family_of_three_shape(self):
        stmts = triple_test_stmts("x1", self.spec(("x1", "x2", "x3")))
        assert sum(isinstance(s, Loop) for s in stmts) == 6
        assert stmts[-1] == Update((("c", -2),))

    def test_family_of_one_classic(self):
        stmts = triple_test_stmts("x", self.spec(("x",)))
        assert stmts[0] == emit_flush("b", "x", "d")
        assert stmts[1] == emit_flush("x", "b", "d")
        assert stmts[2] == Update((("c", -2),))

    def test_rotation_puts_tested_first(self):
        stmts = triple_test_stmts("x2", self.spec(("x1", "x2", "x3")))
        # forward chain: x3 -> x2 first (tested counter receives first)
        assert stmts[0] == emit_flush("x3", "x2", "d")

    def test_symmetric_b_expansion(self):
        stmts = triple_test_stmts("b", self.spec(("x1", "x2")))
        assert stmts[0] == emit_flush("x1", "b", "d")

    def test_marker_outside_family_rejected(self):
        spec = self.spec(("x1",))
        cp = CoreProgram("t", ("x1", "x2", "b", "c", "d"),
                         (ZeroTest("x2", spec),))
        with pytest.raises(GadgetError):
            expand_triple_tests(cp, spec)

    def test_honest_test_drains_exactly_2b_and_restores(self):
        spec = self.spec(("x1", "x2"))
        cp = CoreProgram("t", ("x1", "x2", "b", "c", "d"),
                         (ZeroTest("x1", spec),))
        expanded = expand_triple_tests(cp, spec)
        start = (0, 3, 5, 2, 100)  # x1=0 honest, total b + family = 8
        final = run_to_final(compile_plan(expanded), maximal_decider, start)
        assert final == (0, 3, 5, 0, 100 - 2 * 8)


class TestPairExpansion:
    def spec(self, fam=("x",)):
        return PairSpec(b="b", c="c", family=fam)

    def test_single_counter_shape(self):
        stmts = pair_test_stmts("x", self.spec())
        assert stmts[0] == Update((("c", 1),))
        assert stmts[1] == emit_flush("b", "x", "c")
        assert stmts[2] == emit_flush("x", "b", "c")
        assert stmts[3] == Update((("b", -1),))

    def test_honest_test_steps_square_invariant(self):
        spec = self.spec()
        cp = CoreProgram("p", ("x", "b", "c"),
                         (ZeroTest("x", spec), PairFinal(spec)))
        expanded = expand_pair_tests(cp, spec)
        compiled = compile_plan(expanded)
        B = 5

        def decider(kind, path, t, counters):
            if kind == "loop":
                if t is None:
                    return 0  # skip the epilogue loop entirely
                return MAXIMAL
            return "left"

        final = run_to_final(compiled, decider, (0, B, B * B))
        assert final == (0, B - 1, (B - 1) * (B - 1))

    def test_epilogue_alone_drains_pair_to_zero(self):
        spec = self.spec()
        cp = CoreProgram("p", ("x", "b", "c"), (PairFinal(spec),))
        expanded = expand_pair_tests(cp, spec)
        compiled = compile_plan(expanded)
        B = 3

        def decider(kind, path, t, counters):
            if kind == "choice":
                return "right"  # always the artificial test body
            if t is None:
                return 2 * B  # one full artificial test per epilogue iteration
            return MAXIMAL

        final = run_to_final(compiled, decider, (0, 2 * B, 4 * B * B))
        assert final == (0, 0, 0)

    def test_missing_pairfinal_rejected(self):
        spec = self.spec()
        cp = CoreProgram("p", ("x", "b", "c"), (ZeroTest("x", spec),))
        with pytest.raises(GadgetError):
            expand_pair_tests(cp, spec)

    def test_epilogue_shape(self):
        epi = pair_epilogue_stmt(self.spec(("x", "y")))
        assert isinstance(epi, Loop)
        choice = epi.body[0]
        assert isinstance(choice, Choice)
        assert choice.left == (Update((("x", -1),)),)


class TestCheatDetection:
    """Exhaustive exploration: the budget pair (c, d) reaches (0, 0) only on
    runs whose expanded tests were all honest."""

    def monitored(self, cp_with_markers, spec, expander, start, caps_vec):
        body_expanded: list = []
        positions: list[tuple[int, str]] = []
        for st in cp_with_markers.body:
            if isinstance(st, ZeroTest) and st.strategy == spec:
                positions.append((len(body_expanded), st.counter))
                body_expanded.append(Update(()))
                body_expanded.append(Update(()))
                body_expanded.extend(expander(st.counter, spec))
            elif isinstance(st, PairFinal) and st.spec == spec:
                body_expanded.append(pair_epilogue_stmt(spec))
            else:
                body_expanded.append(st)
        cp = CoreProgram(cp_with_markers.name, cp_with_markers.counters,
                         tuple(body_expanded))
        compiled = compile_plan(cp)
        index = {name: i for i, name in enumerate(cp.counters)}
        watched: dict[str, tuple[int, ...]] = {}
        for idx, counter in positions:
            state = compiled.plan.children[idx].transition.dst
            watched[state] = watched.get(state, ()) + (index[counter],)
        product, exhausted = explore_monitored(
            compiled.vass, Configuration(compiled.vass.initial, start),
            Caps(per_counter=caps_vec, node_budget=3_000_000), watched)
        assert exhausted
        return compiled.vass, product

    @pytest.mark.parametrize("B,C", [(2, 1), (3, 2), (4, 3)])
    def test_triple_family_one(self, B, C):
        spec = TripleSpec(b="b", c="c", d="d", family=("x",))
        body = []
        for _ in range(C):
            body += [Loop((Update((("x", 1), ("b", -1))),)),
                     ZeroTest("x", spec),
                     Loop((Update((("x", -1), ("b", 1))),))]
        cp = CoreProgram("cheat", ("x", "b", "c", "d"), tuple(body))
        start = (0, B, 2 * C, 2 * B * C)
        caps = (B, B, 2 * C, 2 * B * C)
        v, product = self.monitored(cp, spec, triple_test_stmts, start, caps)
        finals = [(vec, flag) for (state, vec, flag) in product if state == v.final]
        cheats = [vec for vec, flag in finals if not flag
                  and vec[2] == 0 and vec[3] == 0]
        assert cheats == []
        honest = [vec for vec, flag in finals if flag and vec[2] == 0 and vec[3] == 0]
        assert honest  # the honest run itself gets through

    @pytest.mark.parametrize("B,C", [(2, 2), (3, 2)])
    def test_triple_family_two(self, B, C):
        spec = TripleSpec(b="b", c="c", d="d", family=("x", "y"))
        body = []
        for _ in range(C):
            body += [Loop((Update((("x", 1), ("b", -1))),)),
                     Loop((Update((("x", -1), ("y", 1))),)),
                     ZeroTest("x", spec),
                     Loop((Update((("y", -1), ("b", 1))),))]
        cp = CoreProgram("cheat2", ("x", "y", "b", "c", "d"), tuple(body))
        start = (0, 0, B, 2 * C, 2 * B * C)
        caps = (B, B, B, 2 * C, 2 * B * C)
        v, product = self.monitored(cp, spec, triple_test_stmts, start, caps)
        finals = [(vec, flag) for (state, vec, flag) in product if state == v.final]
        cheats = [vec for vec, flag in finals if not flag
                  and vec[3] == 0 and vec[4] == 0]
        assert cheats == []

    @pytest.mark.parametrize("B", [2, 3, 4])
    def test_pair_analogue(self, B):
        spec = PairSpec(b="b", c="c", family=("x",))
        body = [Loop((Update((("x", 1), ("b", -1))),)),
                ZeroTest("x", spec),
                Loop((Update((("x", -1), ("b", 1))),)),
                PairFinal(spec)]
        cp = CoreProgram("cheatp", ("x", "b", "c", "d"), tuple(body))
        # d unused; keeps the monitored harness signature uniform
        start = (0, 2 * B, 4 * B * B, 0)
        caps = (2 * B, 2 * B, 4 * B * B + 2 * B, 0)
        v, product = self.monitored(cp, spec, pair_test_stmts, start, caps)
        finals = [(vec, flag) for (state, vec, flag) in product if state == v.final]
        cheats = [vec for vec, flag in finals if not flag
                  and vec[1] == 0 and vec[2] == 0]
        assert cheats == []
        honest = [vec for vec, flag in finals if flag
                  and vec[1] == 0 and vec[2] == 0 and vec[0] == 0]
        assert honest


class TestAmplifier:
    def test_marker_budget(self):
        stmts = amplifier_stmts(("x1", "x2", "x3"), ("x4", "x5", "x6", "x7"))
        main = stmts[2]
        markers = [s for s in main.body if isinstance(s, ZeroTest)]
        assert len(markers) == 4
        assert all(isinstance(m.strategy, TripleSpec) for m in markers)
        assert all(m.strategy.c == "x1" and m.strategy.b == "x2" for m in markers)

    def test_distinct_counters_required(self):
        with pytest.raises(GadgetError):
            build_amplifier(("a", "b", "c"), ("a", "e", "f", "g"))

    def amplifier_decider(self, inner_guess, main_iterations):
        cycled = []

        def decider(kind, path, t, counters):
            if kind != "loop":
                raise AssertionError(kind)
            if t is None:
                return main_iterations
            eff = t.effect
            if eff[2] < 0:  # chain flush paying from the d counter x3
                if eff[1] < 0:
                    m = min(counters[i] // -e for i, e in enumerate(eff) if e < 0)
                    cycled.append(m)
                    return m
                if eff[1] > 0:
                    return cycled.pop()
                return 0
            if eff[5] > 0 and eff[6] > 0:
                return inner_guess
            return MAXIMAL

        return decider

    def test_canonical_stage(self):
        # triple (B, C, BC) = (8, 257c', 8*257c') amplifies to (256, c', 256c')
        spec_prog = build_amplifier()
        expanded = expand_triple_tests(
            spec_prog, TripleSpec(b="x2", c="x1", d="x3", family=("x4", "x5", "x6", "x7")))
        compiled = compile_plan(expanded)
        c_prime = 2
        C = 257 * c_prime
        final = run_to_final(compiled, self.amplifier_decider(c_prime, 1),
                             (8, C, 8 * C, 0, 0, 0, 0))
        assert final == (0, 0, 0, 0, 256, c_prime, 256 * c_prime)

    def test_zero_budget_stage(self):
        spec_prog = build_amplifier()
        expanded = expand_triple_tests(
            spec_prog, TripleSpec(b="x2", c="x1", d="x3", family=("x4", "x5", "x6", "x7")))
        compiled = compile_plan(expanded)
        c_prime = 3
        final = run_to_final(compiled, self.amplifier_decider(c_prime, 0),
                             (0, 5, 0, 0, 0, 0, 0))
        assert final == (0, 0, 0, 0, 1, c_prime, c_prime)
