"""Zero-test elimination gadgets and reusable macro emitters.

Three techniques turn zero-test markers into plain VASS code:

* controlling counter - one extra counter accumulates, for every update of a
  controlled counter, the update weighted by the number of tests still ahead;
  ending with the controlling counter at zero certifies all marked zeros.
* multiplication triples - counters (b, c, d) = (B, C, BC) pay for C/2 tests
  on counters whose sum is bounded by B, via flush chains that drain d.
* quadratic pairs - counters (b, c) = (2B, 4B^2) pay for B tests through the
  invariant (sum + b)^2 = c, plus a drain epilogue of artificial tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .core import VassError
from .lang import (
    Choice,
    CoreProgram,
    CtrlTag,
    Loop,
    PairFinal,
    PairSpec,
    Stmt,
    TripleSpec,
    Update,
    ZeroTest,
)

__all__ = [
    "CtrlSpec", "TripleSpec", "PairSpec", "GadgetError",
    "emit_flush", "emit_multiply", "with_strategy",
    "instrument_ctrl", "expand_triple_tests", "expand_pair_tests",
    "triple_test_stmts", "pair_test_stmts", "pair_epilogue_stmt",
    "build_amplifier", "amplifier_stmts",
]


class GadgetError(VassError):
    pass


@dataclass(frozen=True)
class CtrlSpec:
    """Controlling counter and the set of counters it certifies."""

    ctrl: str
    controlled: frozenset[str]

    def __init__(self, ctrl: str, controlled: Iterable[str]):
        object.__setattr__(self, "ctrl", ctrl)
        object.__setattr__(self, "controlled", frozenset(controlled))
        if self.ctrl in self.controlled:
            raise GadgetError("controlling counter cannot control itself")


# ---------------------------------------------------------------------------
# Macro emitters

def emit_flush(x: str, y: str, z: str) -> Stmt:
    """loop { x -= 1, y += 1, z -= 1 }: move x into y, paying one z per unit."""
    if len({x, y, z}) != 3:
        raise GadgetError(f"flush counters must be distinct: {x}, {y}, {z}")
    return Loop((Update(((x, -1), (y, 1), (z, -1))),))


def emit_multiply(x: str, y: str, c: int) -> list[Stmt]:
    """Flush x into y, zero-test x, refill x by c per unit of y, zero-test y.

    With honest tests and full loops this multiplies x by c exactly.  The two
    markers are left untagged; callers pick the elimination strategy.
    """
    if x == y:
        raise GadgetError("multiply needs two distinct counters")
    if c < 1:
        raise GadgetError("multiply factor must be >= 1")
    return [
        Loop((Update(((x, -1), (y, 1))),)),
        ZeroTest(x),
        Loop((Update(((x, c), (y, -1))),)),
        ZeroTest(y),
    ]


def with_strategy(stmts: Iterable[Stmt], strategy) -> list[Stmt]:
    """Tag every untagged zero-test marker in `stmts` (recursively)."""
    out: list[Stmt] = []
    for st in stmts:
        if isinstance(st, ZeroTest) and st.strategy is None:
            out.append(ZeroTest(st.counter, strategy))
        elif isinstance(st, Loop):
            out.append(Loop(tuple(with_strategy(st.body, strategy))))
        elif isinstance(st, Choice):
            out.append(Choice(tuple(with_strategy(st.left, strategy)),
                              tuple(with_strategy(st.right, strategy))))
        else:
            out.append(st)
    return out


# ---------------------------------------------------------------------------
# Controlling-counter instrumentation

def instrument_ctrl(cp: CoreProgram, spec: CtrlSpec) -> CoreProgram:
    """Derive controlling-counter entries and drop the ctrl markers.

    Every update entry (x, a) with x controlled gains a simultaneous entry
    (ctrl, a * Z) where Z counts the ctrl markers on x strictly after the
    update in program order; a marker just past a loop therefore counts for
    updates inside that loop.  Choice branches must schedule equally many
    markers per controlled counter, since only one branch runs.
    """
    if spec.ctrl not in cp.counters:
        raise GadgetError(f"controlling counter {spec.ctrl!r} not declared")
    for x in spec.controlled:
        if x not in cp.counters:
            raise GadgetError(f"controlled counter {x!r} not declared")

    def rewrite(body: tuple[Stmt, ...], after: dict[str, int]) -> tuple[list[Stmt], dict[str, int]]:
        counts = dict.fromkeys(spec.controlled, 0)
        out_rev: list[Stmt] = []
        for st in reversed(body):
            if isinstance(st, ZeroTest) and st.strategy == CtrlTag(spec.ctrl):
                if st.counter not in spec.controlled:
                    raise GadgetError(
                        f"ctrl marker on uncontrolled counter {st.counter!r}")
                after[st.counter] += 1
                counts[st.counter] += 1
            elif isinstance(st, Update):
                coeff = 0
                for name, val in st.entries:
                    if name in spec.controlled:
                        coeff += val * after[name]
                if coeff != 0:
                    st = Update(st.entries + ((spec.ctrl, coeff),))
                out_rev.append(st)
            elif isinstance(st, Loop):
                inner, inner_counts = rewrite(st.body, dict(after))
                if any(inner_counts.values()):
                    raise GadgetError("ctrl marker inside a loop body")
                out_rev.append(Loop(tuple(inner)))
            elif isinstance(st, Choice):
                left, lc = rewrite(st.left, dict(after))
                right, rc = rewrite(st.right, dict(after))
                if lc != rc:
                    raise GadgetError(
                        "choice branches schedule different ctrl marker counts: "
                        f"{dict(lc)} vs {dict(rc)}")
                for x, k in lc.items():
                    after[x] += k
                    counts[x] += k
                out_rev.append(Choice(tuple(left), tuple(right)))
            else:
                out_rev.append(st)
        return out_rev[::-1], counts

    new_body, _ = rewrite(cp.body, dict.fromkeys(spec.controlled, 0))
    note = (f"ctrl({spec.ctrl}) instrumentation assumes controlled counters "
            f"{sorted(spec.controlled)} start at 0")
    return CoreProgram(cp.name, cp.counters, tuple(new_body), cp.notes + (note,))


# ---------------------------------------------------------------------------
# Multiplication-triple expansion

def _chain(tested: str, b: str, family: tuple[str, ...]) -> tuple[str, ...]:
    if tested == b:
        return (b,) + family
    if tested not in family:
        raise GadgetError(f"tested counter {tested!r} outside family and b")
    k = family.index(tested)
    return family[k:] + family[:k] + (b,)


def triple_test_stmts(tested: str, spec: TripleSpec) -> list[Stmt]:
    """Flush chain realizing one zero-test on `tested`, paying 2 from c.

    The family order is rotated so the tested counter heads the chain; a test
    on b itself swaps b into the head and shifts the family to the tail.
    """
    chain = _chain(tested, spec.b, spec.family)
    out: list[Stmt] = []
    for i in range(len(chain) - 1):
        out.append(emit_flush(chain[i + 1], chain[i], spec.d))
    for i in reversed(range(len(chain) - 1)):
        out.append(emit_flush(chain[i], chain[i + 1], spec.d))
    out.append(Update(((spec.c, -2),)))
    return out


def expand_triple_tests(cp: CoreProgram, spec: TripleSpec) -> CoreProgram:
    """Replace every marker tagged with `spec` by its flush-chain expansion."""

    def rewrite(body: tuple[Stmt, ...]) -> list[Stmt]:
        out: list[Stmt] = []
        for st in body:
            if isinstance(st, ZeroTest) and st.strategy == spec:
                out.extend(triple_test_stmts(st.counter, spec))
            elif isinstance(st, Loop):
                out.append(Loop(tuple(rewrite(st.body))))
            elif isinstance(st, Choice):
                out.append(Choice(tuple(rewrite(st.left)), tuple(rewrite(st.right))))
            else:
                out.append(st)
        return out

    return CoreProgram(cp.name, cp.counters, tuple(rewrite(cp.body)), cp.notes)


# ---------------------------------------------------------------------------
# Quadratic-pair expansion

def pair_test_stmts(tested: str, spec: PairSpec) -> list[Stmt]:
    """One pair-technique zero-test, stepping the invariant (x+b)^2 = c to
    the next square down: credit c by 1, run the flush chain paying c per
    unit, then decrement b.

    The credit comes first so that the very last drain unit stays payable
    (an honest test at x+b = 1 must spend 2 from c but holds only 1 until
    credited); splitting the b and c steps this way keeps every per-test
    account identical and is what makes draining to exactly (0, 0) feasible.
    """
    chain = _chain(tested, spec.b, spec.family)
    out: list[Stmt] = [Update(((spec.c, 1),))]
    for i in range(len(chain) - 1):
        out.append(emit_flush(chain[i + 1], chain[i], spec.c))
    for i in reversed(range(len(chain) - 1)):
        out.append(emit_flush(chain[i], chain[i + 1], spec.c))
    out.append(Update(((spec.b, -1),)))
    return out


def pair_epilogue_stmt(spec: PairSpec) -> Stmt:
    """Drain loop: arbitrary family decreases interleaved with artificial tests."""
    branch: list[Stmt] = pair_test_stmts(spec.family[0], spec)
    for x in reversed(spec.family):
        branch = [Choice((Update(((x, -1),)),), tuple(branch))]
    return Loop(tuple(branch))


def expand_pair_tests(cp: CoreProgram, spec: PairSpec) -> CoreProgram:
    """Replace pair markers by their expansions and the final marker by the
    drain epilogue.  A pair marker without a matching pairfinal is an error."""
    saw_marker = False
    saw_final = False

    def rewrite(body: tuple[Stmt, ...]) -> list[Stmt]:
        nonlocal saw_marker, saw_final
        out: list[Stmt] = []
        for st in body:
            if isinstance(st, ZeroTest) and st.strategy == spec:
                saw_marker = True
                out.extend(pair_test_stmts(st.counter, spec))
            elif isinstance(st, PairFinal) and st.spec == spec:
                saw_final = True
                out.append(pair_epilogue_stmt(spec))
            elif isinstance(st, Loop):
                out.append(Loop(tuple(rewrite(st.body))))
            elif isinstance(st, Choice):
                out.append(Choice(tuple(rewrite(st.left)), tuple(rewrite(st.right))))
            else:
                out.append(st)
        return out

    new_body = rewrite(cp.body)
    if saw_marker and not saw_final:
        raise GadgetError("pair markers present but no pairfinal placement marker")
    return CoreProgram(cp.name, cp.counters, tuple(new_body), cp.notes)


# ---------------------------------------------------------------------------
# Amplifier

def amplifier_stmts(triple: tuple[str, str, str],
                    work: tuple[str, str, str, str]) -> list[Stmt]:
    """Statement list of the 2^k amplifier.

    `triple` holds (B, C, BC); `work` are the four scratch counters.  The
    produced markers use the triple in the swapped role: the counter holding
    B is the test budget (drained 2 per test), the counter holding C bounds
    the family, so each main-loop iteration costs 8 of the budget.
    """
    x1, x2, x3 = triple
    x4, x5, x6, x7 = work
    spec = TripleSpec(b=x2, c=x1, d=x3, family=(x4, x5, x6, x7))
    main = with_strategy(emit_multiply(x5, x4, 256) + emit_multiply(x7, x4, 256), spec)
    return [
        Update(((x5, 1),)),
        Loop((Update(((x6, 1), (x7, 1))),)),
        Loop(tuple(main)),
        Loop((Update(((x2, -1),)),)),
    ]


def build_amplifier(triple: tuple[str, str, str] = ("x1", "x2", "x3"),
                    work: tuple[str, str, str, str] = ("x4", "x5", "x6", "x7"),
                    ) -> CoreProgram:
    """The amplifier as a standalone program; compile() gives q_in/q_out as
    the entry and exit states."""
    names = triple + work
    if len(set(names)) != 7:
        raise GadgetError("amplifier needs 7 distinct counters")
    return CoreProgram("amplifier", names, tuple(amplifier_stmts(triple, work)))
