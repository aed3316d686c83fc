"""Parser, expander, compiler, and the interpreter oracle equivalence."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EXAMPLE1_TEXT, EXAMPLE2_TEXT, random_core_program
from vasskit.core import Configuration, is_flat
from vasskit.lang import (
    BinExpr,
    Choice,
    CoreProgram,
    CtrlTag,
    ExpandError,
    LangError,
    Loop,
    ParseError,
    Program,
    ResidualZeroTest,
    Update,
    ZeroTest,
    compile,
    compile_plan,
    count_zero_tests,
    expand,
    interpret,
    parse,
    pretty,
)


class TestParse:
    def test_single_update(self):
        p = parse("program t() counters x { x += 1; }")
        assert p.body == (Update((("x", 1),)),)

    def test_simultaneous_loop_line(self):
        p = parse("program t() counters x y { loop { x -= 1, y += 1; } }")
        assert p.body == (Loop((Update((("x", -1), ("y", 1))),)),)

    def test_zerotest_inside_loop_rejected(self):
        with pytest.raises(LangError):
            parse("program t() counters x { loop { zerotest x; } }")

    def test_syntax_error_carries_position(self):
        with pytest.raises(ParseError) as exc:
            parse("program t() counters x {\n  x ?= 1;\n}")
        assert exc.value.line == 2

    def test_unknown_counter(self):
        with pytest.raises(LangError):
            parse("program t() counters x { y += 1; }")

    def test_strategies(self):
        p = parse("""
        program t() counters x b c d e {
          zerotest x via ctrl(c);
          zerotest x via triple(b, c, d | x, e);
          zerotest x via pair(b, c | x);
          pairfinal(b, c | x);
        }
        """)
        tags = [st.strategy for st in p.body[:3]]
        assert tags[0] == CtrlTag("c")
        assert tags[1].family == ("x", "e")
        assert tags[2].b == "b"

    def test_expression_precedence(self):
        p = parse("program t(n) counters x { x += 1 + 2 * n; }")
        (_, e), = p.body[0].entries
        assert e == BinExpr("+", 1, BinExpr("*", 2, "n"))


class TestExpand:
    def test_for_unroll(self):
        p = parse("program t(n) counters x { for i := 1 to 2 { x += i; } }")
        cp = expand(p, {"n": 0})
        assert cp.body == (Update((("x", 1),)), Update((("x", 2),)))

    def test_example2_at_two_matches_example1(self):
        core1 = expand(parse(EXAMPLE1_TEXT), {})
        core2 = expand(parse(EXAMPLE2_TEXT), {"n": 2})
        assert core1.body == core2.body

    def test_empty_range(self):
        p = parse("program t() counters x { for i := 1 to 0 { x += i; } }")
        assert expand(p, {}).body == ()

    def test_unbound_parameter(self):
        with pytest.raises(ExpandError):
            expand(parse("program t(n) counters x { x += n; }"), {})

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_idempotent_on_core_programs(self, seed):
        cp = random_core_program(seed)
        assert expand(cp).body == cp.body

    def test_marker_surfacing_from_for_body(self):
        p = parse("""
        program t(n) counters x c {
          for i := 1 to n { zerotest x via ctrl(c); }
        }
        """)
        cp = expand(p, {"n": 3})
        assert sum(isinstance(s, ZeroTest) for s in cp.body) == 3


class TestPretty:
    def test_example1_round_trip(self):
        p = parse(EXAMPLE1_TEXT)
        assert parse(pretty(p)) == p

    def test_strategy_round_trip(self):
        text = """
        program t(n) counters x b c d {
          x += 4 * n;
          zerotest x via triple(b, c, d | x);
          choice { x += 1; } or { x -= 1, b += n - 1; }
          pairfinal(b, c | x);
        }
        """
        p = parse(text)
        assert parse(pretty(p)) == p

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_random_programs_round_trip(self, seed):
        cp = random_core_program(seed)
        p = Program(cp.name, (), cp.counters, cp.body)
        assert parse(pretty(p)) == p


class TestCompile:
    def test_example1_shape(self):
        cp = expand(parse(EXAMPLE1_TEXT), {})
        v = compile(cp)
        assert len(v.states) == 5
        assert len(v.transitions) == 8
        self_loops = sorted(t.effect for t in v.transitions if t.src == t.dst)
        assert self_loops == [(-1, 1), (-1, 1), (2, -1), (2, -1)]
        chain = [t.effect for t in v.transitions if t.src != t.dst]
        assert sorted(chain) == [(0, 0), (0, 0), (0, 0), (1, 0)]

    def test_empty_program(self):
        v = compile(CoreProgram("e", ("x",), ()))
        assert len(v.states) == 1 and not v.transitions
        assert v.initial == v.final

    def test_choice_exit_values(self):
        from vasskit.reach import Caps, explore

        cp = CoreProgram("c", ("x",), (Choice((Update((("x", 1),)),),
                                              (Update((("x", 2),)),)),))
        v = compile(cp)
        report = explore(v, Configuration(v.initial, (0,)), Caps(per_counter=(8,)))
        assert sorted(report.reached.vectors_at(v.final)) == [(1,), (2,)]

    def test_residual_marker_rejected(self):
        cp = CoreProgram("m", ("x", "c"), (ZeroTest("x", CtrlTag("c")),))
        with pytest.raises(ResidualZeroTest):
            compile(cp)

    def test_nested_loop_not_flat(self):
        cp = CoreProgram("n", ("x",),
                         (Loop((Update((("x", 1),)), Loop((Update((("x", -1),)),)))),))
        assert not is_flat(compile(cp))


class TestCountZeroTests:
    def test_pump_schedule_at_n1(self):
        from vasskit.reductions import PumpParams, pspace_program

        schedule = count_zero_tests(pspace_program(PumpParams(1, 1)))
        assert {k: len(v) for k, v in schedule.items()} == {"x1": 1, "x2": 1, "x3": 2}

    def test_no_markers(self):
        assert count_zero_tests(CoreProgram("e", ("x",), (Update((("x", 1),)),))) == {}

    def test_tower_ctrl_schedule_at_n2(self):
        from vasskit.lang import CtrlTag
        from vasskit.reductions import TowerParams, tower_program

        schedule = count_zero_tests(tower_program(TowerParams(2, 8)))
        ctrl_counts = {
            counter: sum(1 for m in marks if m.strategy == CtrlTag("x8"))
            for counter, marks in schedule.items()
        }
        for name in ("x1", "x2", "x3", "x4", "x5", "x6", "x7"):
            assert ctrl_counts[name] == 2

    def test_positions_in_program_order(self):
        cp = CoreProgram("o", ("x", "y", "c"),
                         (ZeroTest("x", CtrlTag("c")), Update((("y", 1),)),
                          ZeroTest("x", CtrlTag("c"))))
        marks = count_zero_tests(cp)["x"]
        assert [m.ordinal for m in marks] == sorted(m.ordinal for m in marks)
        assert marks[0].path < marks[1].path


class TestCompileSoundness:
    """Small-scope equivalence of compile+explore against the AST interpreter."""

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_exit_sets_match_interpreter(self, seed):
        from vasskit.reach import Caps, explore

        cap = 8
        cp = random_core_program(seed)
        oracle = interpret(cp, cap)
        compiled = compile_plan(cp)
        v = compiled.vass
        report = explore(v, Configuration(v.initial, (0,) * v.dimension),
                         Caps(per_counter=(cap,) * v.dimension, node_budget=500_000))
        assert report.frontier_exhausted
        got = set(report.reached.vectors_at(v.final))
        assert got == oracle
