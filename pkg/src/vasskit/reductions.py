"""Generators for the hardness constructions and counter-automaton translations.

Every program-shaped construction is emitted as a counter-program AST first,
run through the gadget passes (triple/pair expansion, controlling-counter
instrumentation), and compiled; coefficients printed in the underlying
analysis are regression constants checked against the derived ones, never
the source of truth.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Configuration, CounterAutomaton, Transition, Vass, VassError
from .gadgets import (
    CtrlSpec,
    TripleSpec,
    amplifier_stmts,
    emit_multiply,
    expand_triple_tests,
    instrument_ctrl,
    with_strategy,
)
from .lang import (
    Choice,
    CompiledProgram,
    CoreProgram,
    CtrlTag,
    Loop,
    Stmt,
    Update,
    ZeroTest,
    compile_plan,
)


class ReductionError(VassError):
    pass


# ---------------------------------------------------------------------------
# Parameter records

@dataclass(frozen=True)
class SubsetSumInstance:
    """Does some subset of `values` sum to exactly `target`?"""

    target: int
    values: tuple[int, ...]

    def __post_init__(self):
        if self.target < 0 or any(v < 0 for v in self.values):
            raise ReductionError("subset-sum numbers must be nonnegative")

    @property
    def bit_width(self) -> int:
        longest = max([self.target.bit_length()] + [v.bit_length() for v in self.values])
        return max(2, longest)


@dataclass(frozen=True)
class PumpParams:
    s: int
    n: int

    def __post_init__(self):
        if self.s < 1 or self.n < 1:
            raise ReductionError("pump parameters must be >= 1")


@dataclass(frozen=True)
class TowerParams:
    n: int
    seed: int = 8

    def __post_init__(self):
        if self.n < 1:
            raise ReductionError("tower stage count must be >= 1")
        if self.seed != 1 and (self.seed < 8 or self.seed % 8 != 0):
            raise ReductionError("seed must be 1 (literal variant) or a multiple of 8, >= 8")


def tower(n: int) -> int:
    """Tower(1) = 2, Tower(n+1) = 2^Tower(n)."""
    if n < 1:
        raise ReductionError("tower defined for n >= 1")
    value = 2
    for _ in range(n - 1):
        value = 2 ** value
    return value


def zero_test_budget(s: int, d: int, bound: int) -> int:
    """Zero-tests sufficient for any shortest accepting run: 2 * s * d * B^(d-1)."""
    if s < 1 or d < 1 or bound < 1:
        raise ReductionError("budget arguments must be >= 1")
    return 2 * s * d * bound ** (d - 1)


def _max_entry(v: Vass) -> int:
    return max((abs(e) for t in v.transitions for e in t.effect), default=0)


# ---------------------------------------------------------------------------
# Subset-Sum -> flat unary 4-VASS

_SS_COUNTERS = ("x", "y", "z", "c")


def _bits_msb_first(value: int, k: int) -> tuple[int, ...]:
    return tuple((value >> j) & 1 for j in range(k - 1, -1, -1))


def _block_stmts(i: int, sign: int, value: int, k: int) -> list[Stmt]:
    """One generator block: build `value` on x bit by bit, then move it onto z
    weighted by `sign` (+1 summing target, -1 subtract, 0 skip)."""
    ctrl = CtrlTag("c")
    bits = _bits_msb_first(value, k)
    out: list[Stmt] = [Update((("x", bits[0]),))]
    for j in range(k - 2, -1, -1):
        out += [
            Loop((Update((("x", -1), ("y", 1))),)),
            ZeroTest("x", ctrl),
            Loop((Update((("x", 2), ("y", -1))),)),
            ZeroTest("y", ctrl),
            Update((("x", bits[k - 1 - j]),)),
        ]
    out += [
        Loop((Update((("x", -1), ("z", sign))),)),
        ZeroTest("x", ctrl),
    ]
    return out


def subset_sum_program(inst: SubsetSumInstance) -> CoreProgram:
    """The marker program: target block, then a take-or-skip choice per value."""
    k = inst.bit_width
    body: list[Stmt] = _block_stmts(0, 1, inst.target, k)
    for i, value in enumerate(inst.values, start=1):
        body.append(Choice(tuple(_block_stmts(i, -1, value, k)),
                           tuple(_block_stmts(i, 0, value, k))))
    return CoreProgram("subset_sum", _SS_COUNTERS, tuple(body))


def _block_ctrl_coefficients(i: int, value: int, k: int, n: int) -> list[int]:
    """Closed-form controlling-counter deltas for block i, in statement order."""
    bits = _bits_msb_first(value, k)
    out = [bits[0] * k * (n - i + 1)]
    for j in range(k - 2, -1, -1):
        out += [
            -(n + 1 - i),
            (k + 1) * (n - i) + (j + 1),
            bits[k - 1 - j] * (k * (n - i) + (j + 1)),
        ]
    out.append(-(k * (n - i) + 1))
    return out


def _ctrl_entry(u: Update) -> int:
    return sum(val for name, val in u.entries if name == "c")


def _collect_block_deltas(stmts: tuple[Stmt, ...]) -> list[int]:
    out = []
    for st in stmts:
        if isinstance(st, Update):
            out.append(_ctrl_entry(st))
        elif isinstance(st, Loop):
            out.append(_ctrl_entry(st.body[0]))
    return out


def _assert_subset_sum_coefficients(instrumented: CoreProgram,
                                    inst: SubsetSumInstance) -> None:
    k = inst.bit_width
    n = len(inst.values)
    per_block = 2 + 3 * (k - 1)
    top = instrumented.body
    blocks: list[tuple[int, int, tuple[Stmt, ...]]] = [(0, inst.target, top[:per_block])]
    for i, value in enumerate(inst.values, start=1):
        choice = top[per_block + i - 1]
        assert isinstance(choice, Choice)
        blocks.append((i, value, choice.left))
        blocks.append((i, value, choice.right))
    for i, value, stmts in blocks:
        derived = _collect_block_deltas(stmts)
        expected = _block_ctrl_coefficients(i, value, k, n)
        if derived != expected:
            raise ReductionError(
                f"ctrl coefficients diverge from closed form in block {i}: "
                f"{derived} != {expected}")


def subset_sum_compiled(inst: SubsetSumInstance) -> CompiledProgram:
    instrumented = instrument_ctrl(subset_sum_program(inst), CtrlSpec("c", ("x", "y")))
    _assert_subset_sum_coefficients(instrumented, inst)
    compiled = compile_plan(instrumented)
    k, n = inst.bit_width, len(inst.values)
    bound = 2 * k * (n + 1)
    if _max_entry(compiled.vass) > bound:
        raise ReductionError(f"entry magnitude exceeds unary bound {bound}")
    return compiled


def subset_sum_to_vass(inst: SubsetSumInstance) -> Vass:
    """Flat unary 4-VASS: 0^4 reaches 0^4 at the exit iff the instance is positive."""
    return subset_sum_compiled(inst).vass


def solve_subset_sum(inst: SubsetSumInstance) -> tuple[int, ...] | None:
    """Brute-force oracle; returns chosen indices (1-based) or None."""
    n = len(inst.values)
    for mask in range(1 << n):
        total = sum(v for i, v in enumerate(inst.values) if mask >> i & 1)
        if total == inst.target:
            return tuple(i + 1 for i in range(n) if mask >> i & 1)
    return None


# ---------------------------------------------------------------------------
# PSpace pump: unary 5-VASS

_PUMP_COUNTERS = ("x1", "x2", "x3", "x4", "x5")


def pspace_program(p: PumpParams) -> CoreProgram:
    s, n = p.s, p.n
    body: list[Stmt] = [Update((("x1", 4 * s), ("x2", 16 * s * s)))]
    for _ in range(n):
        body += with_strategy(emit_multiply("x1", "x3", 2), CtrlTag("x5"))
        body += with_strategy(emit_multiply("x2", "x3", 4), CtrlTag("x5"))
    return CoreProgram("pspace_pump", _PUMP_COUNTERS, tuple(body))


def pspace_target(p: PumpParams) -> tuple[int, ...]:
    return (4 * p.s * 2 ** p.n, 16 * p.s * p.s * 4 ** p.n, 0, 0, 0)


def pspace_compiled(p: PumpParams) -> CompiledProgram:
    instrumented = instrument_ctrl(pspace_program(p), CtrlSpec("x5", ("x1", "x2", "x3")))
    compiled = compile_plan(instrumented)
    s, n = p.s, p.n
    bound = max(16 * s * s, (4 * s + 16 * s * s) * n, 4)
    if _max_entry(compiled.vass) > bound:
        raise ReductionError(f"entry magnitude exceeds unary bound {bound}")
    return compiled


def pspace_pump(p: PumpParams) -> Vass:
    """Unary 5-VASS: every run q_I(0^5) -> q_F(v, 0 on x5) forces
    (v1..v4) = (4s*2^n, 16s^2*4^n, 0, 0)."""
    return pspace_compiled(p).vass


def sequential_compose(v1: Vass, v2: Vass, pad: int) -> Vass:
    """Disjoint union of zero-padded copies with one zero edge final1 -> initial2."""
    for v in (v1, v2):
        if v.initial is None or v.final is None:
            raise ReductionError(f"{v.name!r} lacks distinguished states")
        if v.dimension > pad:
            raise ReductionError(f"cannot pad dimension {v.dimension} down to {pad}")

    def lift(prefix: str, v: Vass) -> tuple[list[str], list[Transition]]:
        extra = (0,) * (pad - v.dimension)
        states = [prefix + s for s in v.states]
        trans = [Transition(prefix + t.src, t.effect + extra, prefix + t.dst)
                 for t in v.transitions]
        return states, trans

    s1, t1 = lift("c1.", v1)
    s2, t2 = lift("c2.", v2)
    glue = Transition("c1." + v1.final, (0,) * pad, "c2." + v2.initial)
    return Vass(
        name=f"{v1.name}+{v2.name}",
        dimension=pad,
        states=tuple(s1 + s2),
        transitions=tuple(t1 + [glue] + t2),
        initial="c1." + v1.initial,
        final="c2." + v2.final,
    )


# ---------------------------------------------------------------------------
# ExpSpace pump: binary 6-VASS

_EXP_COUNTERS = ("x1", "x2", "x3", "x4", "x5", "x6")
_EXP_SPEC = TripleSpec(b="x4", c="x5", d="x6", family=("x1", "x2", "x3"))


def _multiply_conserving(x: str, y: str, c: int, comp: str) -> list[Stmt]:
    """`emit_multiply` with the refill also paying c-1 from `comp`, so the
    total of the family plus `comp` is invariant."""
    return [
        Loop((Update(((x, -1), (y, 1))),)),
        ZeroTest(x),
        Loop((Update(((x, c), (y, -1), (comp, -(c - 1)))),)),
        ZeroTest(y),
    ]


def expspace_program(p: PumpParams) -> CoreProgram:
    s, n = p.s, p.n
    unit = 8 * 2 ** n + 2
    offset = 6 * s + 36 * s * s
    loop_body = with_strategy(
        _multiply_conserving("x1", "x3", 4, "x4")
        + _multiply_conserving("x2", "x3", 16, "x4"),
        _EXP_SPEC,
    )
    body: list[Stmt] = [
        Update((("x5", unit),)),
        Loop((Update((("x4", 1), ("x6", unit))),)),
        Update((("x1", 6 * s), ("x2", 36 * s * s), ("x4", -offset))),
        Loop(tuple(loop_body)),
        ZeroTest("x4", _EXP_SPEC),
    ]
    return CoreProgram("expspace_pump", _EXP_COUNTERS, tuple(body))


def expspace_target(p: PumpParams) -> tuple[int, ...]:
    s, n = p.s, p.n
    return (6 * s * 4 ** (2 ** n), 36 * s * s * 16 ** (2 ** n), 0, 0, 0, 0)


def expspace_honest_guess(p: PumpParams) -> int:
    """The only preload of x4 that lets the final test drain it to exactly 0."""
    t = expspace_target(p)
    return t[0] + t[1]


def expspace_compiled(p: PumpParams) -> CompiledProgram:
    return compile_plan(expand_triple_tests(expspace_program(p), _EXP_SPEC))


def expspace_pump(p: PumpParams) -> Vass:
    """Binary 6-VASS with a nondeterministically guessed triple preload."""
    return expspace_compiled(p).vass


# ---------------------------------------------------------------------------
# Tower pump: unary 8-VASS

_TOWER_COUNTERS = ("x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8")
_TOWER_SPEC = TripleSpec(b="x2", c="x1", d="x3", family=("x4", "x5", "x6", "x7"))


def tower_program(p: TowerParams) -> CoreProgram:
    ctrl = CtrlTag("x8")
    body: list[Stmt] = [
        Update((("x1", p.seed),)),
        Loop((Update((("x2", 1), ("x3", p.seed))),)),
    ]
    for _ in range(p.n):
        body += amplifier_stmts(("x1", "x2", "x3"), ("x4", "x5", "x6", "x7"))
        body += [ZeroTest(x, ctrl) for x in ("x1", "x2", "x3", "x4")]
        body += [
            Loop((Update((("x5", -1), ("x1", 1))),)),
            Loop((Update((("x6", -1), ("x2", 1))),)),
            Loop((Update((("x7", -1), ("x3", 1))),)),
        ]
        body += [ZeroTest(x, ctrl) for x in ("x5", "x6", "x7")]
    return CoreProgram("tower_pump", _TOWER_COUNTERS, tuple(body))


def tower_compiled(p: TowerParams) -> CompiledProgram:
    expanded = expand_triple_tests(tower_program(p), _TOWER_SPEC)
    instrumented = instrument_ctrl(
        expanded, CtrlSpec("x8", ("x1", "x2", "x3", "x4", "x5", "x6", "x7")))
    compiled = compile_plan(instrumented)
    bound = 256 * (p.n + 1) + p.seed * (p.n + 1)
    if _max_entry(compiled.vass) > bound:
        raise ReductionError(f"entry magnitude exceeds unary bound {bound}")
    return compiled


def tower_pump(p: TowerParams) -> Vass:
    """Unary 8-VASS iterating the amplifier n times under the x8 control."""
    return tower_compiled(p).vass


# ---------------------------------------------------------------------------
# Counter automaton -> VASS, multiplication-triple route

def _flush_cycle(prefix: str, anchor_in: str, anchor_out: str,
                 chain: tuple[int, ...], budget: int, dim: int,
                 final_effect: tuple[int, ...],
                 states: list[str], transitions: list[Transition]) -> None:
    """Wire flush hubs realizing one test over `chain` (counter indexes,
    tested first, complement-role last), paying `budget` per moved unit,
    from anchor_in to anchor_out ending with `final_effect`."""
    def flush_vec(src_i: int, dst_i: int) -> tuple[int, ...]:
        vec = [0] * dim
        vec[src_i] -= 1
        vec[dst_i] += 1
        vec[budget] -= 1
        return tuple(vec)

    hops = []
    for i in range(len(chain) - 1):
        hops.append(flush_vec(chain[i + 1], chain[i]))
    for i in reversed(range(len(chain) - 1)):
        hops.append(flush_vec(chain[i], chain[i + 1]))
    zero = (0,) * dim
    at = anchor_in
    for hi, vec in enumerate(hops):
        hub = f"{prefix}.f{hi + 1}"
        states.append(hub)
        transitions.append(Transition(at, zero, hub))
        transitions.append(Transition(hub, vec, hub))
        at = hub
    transitions.append(Transition(at, final_effect, anchor_out))


def _ca_chain(tested: int, members: tuple[int, ...], complement: int) -> tuple[int, ...]:
    if tested == complement:
        return (complement,) + members
    k = members.index(tested)
    return members[k:] + members[:k] + (complement,)


def ca_to_vass_triple(a: CounterAutomaton, bound: int, tests: int) -> Vass:
    """Simulate `a` on counters (b, c, d, x1..xd): plain moves mirror into the
    complement b, zero-tests become flush-chain expansions, and a drain cycle
    at the accepting state pads the test count to exactly `tests`.

    Contract: a has an accepting run using at most `tests` zero-tests with
    counter sum at most `bound` iff
    q_I(bound, 2*tests, 2*bound*tests, 0^d) reaches q_F(bound, 0^{d+2}).
    """
    d = a.dimension
    dim = d + 3
    b_i, c_i, d_i = 0, 1, 2
    members = tuple(range(3, 3 + d))
    states = list(a.states)
    transitions: list[Transition] = []

    def lifted(u: tuple[int, ...], extra_c: int = 0) -> tuple[int, ...]:
        return (-sum(u), extra_c, 0) + u

    for ti, t in enumerate(a.transitions):
        if t.zero_test is None:
            transitions.append(Transition(t.src, lifted(t.effect), t.dst))
        else:
            chain = _ca_chain(3 + t.zero_test, members, b_i)
            _flush_cycle(f"zt{ti}", t.src, t.dst, chain, d_i, dim,
                         lifted(t.effect, extra_c=-2), states, transitions)
    # artificial tests at acceptance drain the remaining c and d budget
    drain_chain = _ca_chain(members[0], members, b_i)
    drain_final = [0] * dim
    drain_final[c_i] = -2
    _flush_cycle("drain", a.accepting, a.accepting, drain_chain, d_i, dim,
                 tuple(drain_final), states, transitions)
    return Vass(f"{a.name}.triple", dim, tuple(states), tuple(transitions),
                initial=a.initial, final=a.accepting)


def ca_triple_source(a: CounterAutomaton, bound: int, tests: int) -> Configuration:
    return Configuration(a.initial, (bound, 2 * tests, 2 * bound * tests) + (0,) * a.dimension)


def ca_triple_target(a: CounterAutomaton, bound: int) -> Configuration:
    return Configuration(a.accepting, (bound,) + (0,) * (a.dimension + 2))


# ---------------------------------------------------------------------------
# Counter automaton -> VASS, quadratic-pair route

def ca_to_vass_pair(a: CounterAutomaton, bound: int) -> Vass:
    """Simulate the promised `bound`-bounded automaton on (b, c, x1..xd).

    Zero-tests expand to flush chains paying from c, each followed by
    b -= 1, c += 1; the accepting state carries the drain epilogue (family
    decrements plus artificial tests).  Contract: an accepting run firing at
    most `bound` zero-tests exists iff
    q_I(2*bound, 4*bound^2, 0^d) reaches q_F(0^{d+2}).
    """
    d = a.dimension
    dim = d + 2
    b_i, c_i = 0, 1
    members = tuple(range(2, 2 + d))
    states = list(a.states)
    transitions: list[Transition] = []
    zero = (0,) * dim

    def lifted(u: tuple[int, ...]) -> tuple[int, ...]:
        return (-sum(u), 0) + u

    def unit(i: int, delta: int) -> tuple[int, ...]:
        vec = [0] * dim
        vec[i] = delta
        return tuple(vec)

    # The c credit leads each test and the b decrement trails it, so the
    # final drain unit stays payable (see gadgets.pair_test_stmts).
    for ti, t in enumerate(a.transitions):
        if t.zero_test is None:
            transitions.append(Transition(t.src, lifted(t.effect), t.dst))
        else:
            entry = f"zt{ti}.credit"
            mid = f"zt{ti}.step"
            states += [entry, mid]
            transitions.append(Transition(t.src, unit(c_i, 1), entry))
            chain = _ca_chain(2 + t.zero_test, members, b_i)
            _flush_cycle(f"zt{ti}", entry, mid, chain, c_i, dim,
                         unit(b_i, -1), states, transitions)
            transitions.append(Transition(mid, lifted(t.effect), t.dst))
    for i in members:
        transitions.append(Transition(a.accepting, unit(i, -1), a.accepting))
    drain_entry = "drain.credit"
    states.append(drain_entry)
    transitions.append(Transition(a.accepting, unit(c_i, 1), drain_entry))
    drain_chain = _ca_chain(members[0], members, b_i)
    _flush_cycle("drain", drain_entry, a.accepting, drain_chain, c_i, dim,
                 unit(b_i, -1), states, transitions)
    return Vass(f"{a.name}.pair", dim, tuple(states), tuple(transitions),
                initial=a.initial, final=a.accepting)


def ca_pair_source(a: CounterAutomaton, bound: int) -> Configuration:
    return Configuration(a.initial, (2 * bound, 4 * bound * bound) + (0,) * a.dimension)


def ca_pair_target(a: CounterAutomaton) -> Configuration:
    return Configuration(a.accepting, (0,) * (a.dimension + 2))


# ---------------------------------------------------------------------------
# Canonical witnesses (scripted intended runs)

def _certificate(construction: str, params: dict[str, int], compiled: CompiledProgram,
                 decider, expected: tuple[int, ...]):
    from .reach import InfeasibleParams, WitnessCertificate, scripted_run

    run = scripted_run(compiled, decider)
    final_state = compiled.vass.final
    got = list(run.start.counters)
    for t in run.steps:
        for i, e in enumerate(t.effect):
            got[i] += e
    endpoint = Configuration(final_state, tuple(got))
    if tuple(got) != expected:
        raise InfeasibleParams(
            f"{construction} intended run ends at {tuple(got)}, contract says {expected}")
    return WitnessCertificate(construction, tuple(sorted(params.items())), run, endpoint)


def pspace_canonical_witness(s: int = 1, n: int = 1):
    from .reach import maximal_decider

    p = PumpParams(s, n)
    return _certificate("pspace", {"s": s, "n": n}, pspace_compiled(p),
                        maximal_decider, pspace_target(p))


def expspace_canonical_witness(s: int = 1, n: int = 1):
    from .reach import MAXIMAL, InfeasibleParams

    p = PumpParams(s, n)
    guess = expspace_honest_guess(p)
    unit = 8 * 2 ** n + 2
    if unit * guess > 5_000_000:
        raise InfeasibleParams(
            f"intended run needs about {unit * guess} steps; too long to materialize")

    def decider(kind, path, t, counters):
        if kind != "loop":
            raise InfeasibleParams(f"unexpected {kind} at {path}")
        if path == (1,):
            return guess
        if path == (3,):
            return 2 ** n
        return MAXIMAL

    return _certificate("expspace", {"s": s, "n": n}, expspace_compiled(p),
                        decider, expspace_target(p))


def tower_canonical_witness(n: int = 1, seed: int = 8, inner_guess: int = 1):
    from .reach import MAXIMAL, InfeasibleParams

    p = TowerParams(n, seed)
    if seed == 1:
        raise InfeasibleParams(
            "literal seed 1 admits no intended run: the amplifier pays 8 budget "
            "units per doubling round, so the stage budget must be divisible by 8")
    if n != 1:
        raise InfeasibleParams(
            "intended runs beyond one stage have tower-sized length; only n=1 "
            "witnesses are materialized")
    amplified = 2 ** seed
    outer_guess = inner_guess * (1 + amplified)
    if seed * outer_guess + amplified * (inner_guess + 1) > 5_000_000:
        raise InfeasibleParams("intended run too long to materialize")

    cycled: list[int] = []

    def decider(kind, path, t, counters):
        if kind != "loop":
            raise InfeasibleParams(f"unexpected {kind} at {path}")
        if t is None:
            return seed // 8  # amplifier main loop
        eff = t.effect
        if eff[2] < 0:  # chain flush paying from the d budget x3
            if eff[1] < 0:  # forward: cycle as much of the b counter as affordable
                m = min(counters[i] // -e for i, e in enumerate(eff) if e < 0)
                cycled.append(m)
                return m
            if eff[1] > 0:  # backward: return exactly what went out
                return cycled.pop()
            return 0  # family members stay put; the budget is paid by b alone
        if eff[1] > 0 and eff[2] > 0:
            return outer_guess
        if eff[5] > 0 and eff[6] > 0:
            return inner_guess
        return MAXIMAL

    expected = (amplified, inner_guess, amplified * inner_guess, 0, 0, 0, 0, 0)
    return _certificate("tower", {"n": n, "seed": seed}, tower_compiled(p),
                        decider, expected)


def subset_sum_reachable(inst: SubsetSumInstance,
                         node_budget: int = 10_000_000) -> tuple[bool, bool]:
    """Decide 0^4 -> 0^4 reachability by capped exploration.

    Caps are the per-state envelopes of the honest subset replays: any run
    reaching 0^4 has all marked zeros correct (controlling-counter lemma), so
    it follows some subset's honest trajectory and stays inside its envelope;
    everything outside is provably dead and pruned.  Returns
    (reachable, exhausted).
    """
    from .reach import MAXIMAL, Caps, InfeasibleParams, _explore, scripted_run

    compiled = subset_sum_compiled(inst)
    v = compiled.vass
    dim = v.dimension
    n = len(inst.values)
    envelope: dict[str, list[int]] = {s: [0] * dim for s in v.states}

    def record(state: str, counters: list[int]) -> None:
        env = envelope[state]
        for i, c in enumerate(counters):
            if c > env[i]:
                env[i] = c

    for mask in range(1 << n):
        picks = iter(bool(mask >> i & 1) for i in range(n))

        def decider(kind, path, t, counters):
            if kind == "loop":
                return MAXIMAL
            return "left" if next(picks) else "right"

        try:
            run = scripted_run(compiled, decider)
            steps = run.steps
        except InfeasibleParams:
            continue
        counters = [0] * dim
        record(v.initial, counters)
        for t in steps:
            for i, e in enumerate(t.effect):
                counters[i] += e
            record(t.dst, counters)

    global_max = [max(env[i] for env in envelope.values()) for i in range(dim)]
    caps = Caps(per_counter=tuple(global_max), node_budget=node_budget,
                per_state={s: tuple(env) for s, env in envelope.items()})
    src = Configuration(v.initial, (0,) * dim)
    trg = Configuration(v.final, (0,) * dim)
    report, _ = _explore(v, src, caps, targets=frozenset({trg}))
    conclusive = bool(report.hits) or report.frontier_exhausted
    return bool(report.hits), conclusive


def subset_sum_canonical_witness(target: int, values: tuple[int, ...]):
    from .reach import MAXIMAL, InfeasibleParams

    inst = SubsetSumInstance(target, tuple(values))
    chosen = solve_subset_sum(inst)
    if chosen is None:
        raise InfeasibleParams(f"no subset of {values} sums to {target}")
    picks = iter(i + 1 in set(chosen) for i in range(len(values)))

    def decider(kind, path, t, counters):
        if kind == "loop":
            return MAXIMAL
        return "left" if next(picks) else "right"

    return _certificate("subset-sum", {"target": target, **{f"v{i+1}": v for i, v in enumerate(values)}},
                        subset_sum_compiled(inst), decider, (0, 0, 0, 0))
