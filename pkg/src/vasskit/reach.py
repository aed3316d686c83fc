"""Bounded exploration, reachability with witnesses, and canonical-run builders.

Exploration is an exact breadth-first closure of the capped configuration
space: deterministic (fixed transition order), pruning any configuration
that exceeds the caps, and flagging the result inconclusive when the node
budget runs out instead of failing.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from random import Random
from typing import Callable, Iterator

from .core import (
    CaTransition,
    Configuration,
    CounterAutomaton,
    Run,
    Transition,
    Vass,
    VassError,
    validate_run,
)
from .lang import CompiledProgram, ChoiceNode, LoopNode, SeqNode, UpdateNode


class InfeasibleParams(VassError):
    """The requested canonical run does not exist; carries a diagnostic."""


class InconclusiveSearch(VassError):
    """A search exhausted its node budget before settling the question."""


@dataclass(frozen=True)
class Caps:
    """Exploration bounds: per-counter limits and/or a sum limit, plus a node budget.

    `per_state` optionally tightens the per-counter limits at individual
    states; callers use it to prune provably dead regions without changing
    which target configurations are reachable.
    """

    per_counter: tuple[int, ...] | None = None
    total: int | None = None
    node_budget: int = 10_000_000
    per_state: dict[str, tuple[int, ...]] | None = None

    def __post_init__(self):
        if self.per_counter is None and self.total is None:
            raise VassError("caps need a per-counter or total bound")
        if self.node_budget < 1:
            raise VassError("node budget must be >= 1")

    def admits(self, counters: tuple[int, ...], state: str | None = None) -> bool:
        if self.per_counter is not None:
            if len(self.per_counter) != len(counters):
                raise VassError("caps dimension mismatch")
            if any(v > m for v, m in zip(counters, self.per_counter)):
                return False
        if self.total is not None and sum(counters) > self.total:
            return False
        if state is not None and self.per_state is not None:
            local = self.per_state.get(state)
            if local is not None and any(v > m for v, m in zip(counters, local)):
                return False
        return True

    @staticmethod
    def from_maxima(vectors: list[tuple[int, ...]], factor: int = 4,
                    node_budget: int = 10_000_000) -> "Caps":
        """Per-counter caps at `factor` times the componentwise maxima."""
        dim = len(vectors[0])
        maxima = [max(v[i] for v in vectors) for i in range(dim)]
        return Caps(per_counter=tuple(factor * m for m in maxima), node_budget=node_budget)


class ReachedSet:
    """Immutable view of an explored configuration set."""

    def __init__(self, states: tuple[str, ...], radixes: tuple[int, ...], packed: set[int]):
        self._states = states
        self._radixes = radixes
        self._packed = packed

    def _unpack(self, key: int) -> Configuration:
        vals = []
        for r in reversed(self._radixes):
            vals.append(key % r)
            key //= r
        return Configuration(self._states[key], tuple(reversed(vals)))

    def __len__(self) -> int:
        return len(self._packed)

    def __iter__(self) -> Iterator[Configuration]:
        for key in sorted(self._packed):
            yield self._unpack(key)

    def __contains__(self, config: Configuration) -> bool:
        try:
            key = _pack(self._states.index(config.state), config.counters, self._radixes)
        except (ValueError, OverflowError):
            return False
        return key in self._packed

    def vectors_at(self, state: str) -> list[tuple[int, ...]]:
        out = [c.counters for c in self if c.state == state]
        return out


@dataclass
class ReachReport:
    """Outcome of a capped exploration."""

    explored: int
    frontier_exhausted: bool
    reached: ReachedSet
    hits: tuple[Configuration, ...] = ()


def _pack(state_idx: int, counters: tuple[int, ...], radixes: tuple[int, ...]) -> int:
    key = state_idx
    for v, r in zip(counters, radixes):
        if v >= r:
            raise OverflowError
        key = key * r + v
    return key


def _radixes(v: Vass, caps: Caps) -> tuple[int, ...]:
    if caps.per_counter is not None:
        per = caps.per_counter
        if caps.total is not None:
            per = tuple(min(p, caps.total) for p in per)
    else:
        per = (caps.total,) * v.dimension
    return tuple(p + 1 for p in per)


def _explore(v: Vass, src: Configuration, caps: Caps,
             targets: frozenset[Configuration] = frozenset(),
             want_witness: bool = False,
             ) -> tuple[ReachReport, dict[Configuration, Run]]:
    if not caps.admits(src.counters, src.state):
        raise VassError(f"source {src} outside caps")
    state_idx = {s: i for i, s in enumerate(v.states)}
    radixes = _radixes(v, caps)
    mult = [1] * len(radixes)
    for i in range(len(radixes) - 2, -1, -1):
        mult[i] = mult[i + 1] * radixes[i + 1]
    state_mult = mult[0] * radixes[0] if radixes else 1
    # per-edge packed-key delta makes the inner loop O(1) in packing work
    adjacency: list[list[tuple[tuple[int, ...], int, int, int]]] = [[] for _ in v.states]
    for ti, t in enumerate(v.transitions):
        si, di = state_idx[t.src], state_idx[t.dst]
        key_delta = (di - si) * state_mult + sum(e * m for e, m in zip(t.effect, mult))
        adjacency[si].append((t.effect, di, ti, key_delta))

    total_cap = caps.total
    per = caps.per_counter
    local_caps: list[tuple[int, ...] | None] = [None] * len(v.states)
    if caps.per_state is not None:
        for s, lim in caps.per_state.items():
            if s in state_idx:
                local_caps[state_idx[s]] = lim
    src_key = _pack(state_idx[src.state], src.counters, radixes)
    target_keys = {}
    for trg in targets:
        try:
            target_keys[_pack(state_idx[trg.state], trg.counters, radixes)] = trg
        except (KeyError, OverflowError):
            continue
    parents: dict[int, tuple[int, int] | None] = {}
    visited: set[int] = {src_key}
    if want_witness:
        parents[src_key] = None
    queue: deque[tuple[int, int, tuple[int, ...]]] = deque()
    queue.append((src_key, state_idx[src.state], src.counters))
    found: dict[int, Configuration] = {}
    if src_key in target_keys:
        found[src_key] = target_keys[src_key]
    explored = 0
    budget = caps.node_budget
    exhausted = True
    while queue:
        if explored >= budget:
            exhausted = False
            break
        key, si, counters = queue.popleft()
        explored += 1
        for effect, di, ti, key_delta in adjacency[si]:
            nkey = key + key_delta
            if nkey in visited:
                continue
            new = tuple(map(int.__add__, counters, effect))
            ok = True
            s = 0
            lim = local_caps[di]
            for i, c in enumerate(new):
                if c < 0 or (per is not None and c > per[i]) or (lim is not None and c > lim[i]):
                    ok = False
                    break
                s += c
            if not ok or (total_cap is not None and s > total_cap):
                continue
            visited.add(nkey)
            if want_witness:
                parents[nkey] = (key, ti)
            queue.append((nkey, di, new))
            if nkey in target_keys:
                found[nkey] = target_keys[nkey]
                if len(found) == len(target_keys):
                    queue.clear()
                    exhausted = False
                    break
        else:
            continue
        break

    witnesses: dict[Configuration, Run] = {}
    if want_witness:
        for nkey, config in found.items():
            steps: list[Transition] = []
            cur = nkey
            while parents[cur] is not None:
                prev, ti = parents[cur]
                steps.append(v.transitions[ti])
                cur = prev
            witnesses[config] = Run(src, tuple(reversed(steps)))
    report = ReachReport(
        explored=explored,
        frontier_exhausted=exhausted and not queue,
        reached=ReachedSet(v.states, radixes, visited),
        hits=tuple(found[k] for k in sorted(found)),
    )
    return report, witnesses


def explore(v: Vass, src: Configuration, caps: Caps) -> ReachReport:
    """Breadth-first closure of {src} under firing, pruned at the caps."""
    report, _ = _explore(v, src, caps)
    return report


def find_run(v: Vass, src: Configuration, trg: Configuration,
             caps: Caps) -> tuple[Run | None, ReachReport]:
    """Witness run from src to trg within caps, or None plus the exploration report."""
    report, witnesses = _explore(v, src, caps, targets=frozenset({trg}), want_witness=True)
    run = witnesses.get(trg)
    if run is not None:
        final, _ = validate_run(v, run)
        if final != trg:
            raise VassError("internal: witness does not end at target")
    return run, report


def explore_monitored(v: Vass, src: Configuration, caps: Caps,
                      watched: dict[str, tuple[int, ...]],
                      ) -> tuple[set[tuple[str, tuple[int, ...], bool]], bool]:
    """Capped closure over (configuration, clean) pairs.

    `watched` maps states to counter indices that are demanded to be zero
    whenever the run sits at that state; arriving (or starting) there with a
    nonzero watched counter flips `clean` to False for the rest of the run.
    Returns the reached product set and the frontier-exhausted flag.
    Harness support for the zero-test soundness checks.
    """
    def clean_after(state: str, counters: tuple[int, ...], clean: bool) -> bool:
        for i in watched.get(state, ()):
            if counters[i] != 0:
                return False
        return clean

    start = (src.state, src.counters, clean_after(src.state, src.counters, True))
    seen: set[tuple[str, tuple[int, ...], bool]] = {start}
    queue = deque([start])
    adjacency: dict[str, list[Transition]] = {s: [] for s in v.states}
    for t in v.transitions:
        adjacency[t.src].append(t)
    explored = 0
    while queue:
        if explored >= caps.node_budget:
            return seen, False
        state, counters, clean = queue.popleft()
        explored += 1
        for t in adjacency[state]:
            new = tuple(c + e for c, e in zip(counters, t.effect))
            if any(c < 0 for c in new) or not caps.admits(new):
                continue
            item = (t.dst, new, clean_after(t.dst, new, clean))
            if item not in seen:
                seen.add(item)
                queue.append(item)
    return seen, True


# ---------------------------------------------------------------------------
# Counter-automaton oracle search

def ca_accepting_run_search(a: CounterAutomaton, bound: int, max_tests: int,
                            caps: Caps | None = None) -> Run | None:
    """Search for an accepting run: initial(0^d) to accepting(0^d), counter sum
    strictly below `bound` throughout, at most `max_tests` zero-test firings.

    Runs dominated by an already-seen (state, counters) pair with fewer or
    equal tests are pruned.  Raises InconclusiveSearch on budget exhaustion.
    """
    budget = caps.node_budget if caps is not None else 10_000_000
    zero = (0,) * a.dimension
    if sum(zero) >= bound:
        return None
    adjacency: dict[str, list[tuple[int, CaTransition]]] = {s: [] for s in a.states}
    for ti, t in enumerate(a.transitions):
        adjacency[t.src].append((ti, t))
    start = (a.initial, zero)
    best: dict[tuple[str, tuple[int, ...]], int] = {start: 0}
    parents: dict[tuple[str, tuple[int, ...], int], tuple | None] = {(a.initial, zero, 0): None}
    queue = deque([(a.initial, zero, 0)])
    explored = 0
    goal = None
    if a.initial == a.accepting:
        goal = (a.initial, zero, 0)
    while queue and goal is None:
        if explored >= budget:
            raise InconclusiveSearch(f"ca search exceeded {budget} nodes")
        state, counters, tests = queue.popleft()
        explored += 1
        for ti, t in adjacency[state]:
            ntests = tests
            if t.zero_test is not None:
                if counters[t.zero_test] != 0:
                    continue
                ntests += 1
                if ntests > max_tests:
                    continue
            new = tuple(c + e for c, e in zip(counters, t.effect))
            if any(c < 0 for c in new) or sum(new) >= bound:
                continue
            if caps is not None and not caps.admits(new):
                continue
            seen = best.get((t.dst, new))
            if seen is not None and seen <= ntests:
                continue
            best[(t.dst, new)] = ntests
            parents[(t.dst, new, ntests)] = (state, counters, tests, ti)
            queue.append((t.dst, new, ntests))
            if t.dst == a.accepting and new == zero:
                goal = (t.dst, new, ntests)
                break
    if goal is None:
        return None
    steps: list[CaTransition] = []
    cur = goal
    while parents[cur] is not None:
        ps, pc, pt, ti = parents[cur]
        steps.append(a.transitions[ti])
        cur = (ps, pc, pt)
    return Run(Configuration(a.initial, zero), tuple(reversed(steps)))


# ---------------------------------------------------------------------------
# Scripted runs over compiled programs

MAXIMAL = None

Decider = Callable[[str, tuple[int, ...], Transition | None, tuple[int, ...]], object]


class _Walker:
    def __init__(self, compiled: CompiledProgram, decider: Decider,
                 start: tuple[int, ...]):
        self.vass = compiled.vass
        self.decider = decider
        self.counters = list(start)
        self.steps: list[Transition] = []
        self.state = compiled.vass.initial

    def take(self, t: Transition, times: int = 1) -> None:
        for _ in range(times):
            if t.src != self.state:
                raise InfeasibleParams(
                    f"scripted run broke at {self.state}: transition leaves {t.src}")
            for i, e in enumerate(t.effect):
                self.counters[i] += e
                if self.counters[i] < 0:
                    raise InfeasibleParams(
                        f"scripted run drives counter {i + 1} to {self.counters[i]} "
                        f"at {t.src} -> {t.dst}")
            self.steps.append(t)
            self.state = t.dst

    def maximal(self, t: Transition) -> int:
        best = None
        for i, e in enumerate(t.effect):
            if e < 0:
                room = self.counters[i] // -e
                best = room if best is None else min(best, room)
        if best is None:
            raise InfeasibleParams(
                f"self-loop at {t.src} with effect {t.effect} has no maximal "
                "iteration count; the decider must schedule it")
        return best

    def loop_count(self, path: tuple[int, ...], t: Transition | None) -> int:
        k = self.decider("loop", path, t, tuple(self.counters))
        if k is MAXIMAL:
            if t is None:
                raise InfeasibleParams(f"complex loop at {path} must be scheduled")
            return self.maximal(t)
        if not isinstance(k, int) or k < 0:
            raise InfeasibleParams(f"bad loop count {k!r} at {path}")
        return k

    def walk(self, node: SeqNode, path: tuple[int, ...]) -> None:
        for idx, child in enumerate(node.children):
            here = path + (idx,)
            if isinstance(child, UpdateNode):
                self.take(child.transition)
            elif isinstance(child, LoopNode):
                if child.glue is not None:
                    self.take(child.glue)
                if child.self_loop is not None:
                    self.take(child.self_loop, self.loop_count(here, child.self_loop))
                elif child.body is not None:
                    k = self.loop_count(here, None)
                    for _ in range(k):
                        self.walk(child.body, here)
                        self.take(child.close)
                    self.take(child.exit)
            elif isinstance(child, ChoiceNode):
                side = self.decider("choice", here, None, tuple(self.counters))
                if side == "left":
                    self.take(child.enter_left)
                    self.walk(child.left, here)
                    self.take(child.exit_left)
                elif side == "right":
                    self.take(child.enter_right)
                    self.walk(child.right, here)
                    self.take(child.exit_right)
                else:
                    raise InfeasibleParams(f"bad choice {side!r} at {here}")


def scripted_run(compiled: CompiledProgram, decider: Decider,
                 start: tuple[int, ...] | None = None) -> Run:
    """Drive the program plan with `decider` and return the resulting run.

    The default policy for self-loops is to fire them the maximal possible
    number of times; deciders return an explicit count (or branch) where the
    construction demands one.  Raises InfeasibleParams when the script walks
    into an unfireable transition.
    """
    v = compiled.vass
    start_vec = start if start is not None else (0,) * v.dimension
    w = _Walker(compiled, decider, start_vec)
    w.walk(compiled.plan, ())
    return Run(Configuration(v.initial, start_vec), tuple(w.steps))


def maximal_decider(kind: str, path: tuple[int, ...], t: Transition | None,
                    counters: tuple[int, ...]):
    """Fire every self-loop maximally; refuse complex loops and choices."""
    if kind == "loop":
        return MAXIMAL
    raise InfeasibleParams(f"no decision for {kind} at {path}")


# ---------------------------------------------------------------------------
# Witness certificates

@dataclass(frozen=True)
class WitnessCertificate:
    """A construction's intended run plus its asserted endpoint."""

    construction: str
    params: tuple[tuple[str, int], ...]
    run: Run
    endpoint: Configuration


def verify_certificate(v: Vass, cert: WitnessCertificate) -> None:
    """Replay the certificate; raises if it does not end at the endpoint."""
    final, _ = validate_run(v, cert.run)
    if final != cert.endpoint:
        raise VassError(f"certificate endpoint mismatch: {final} != {cert.endpoint}")


def canonical_witness(construction: str, **params: int) -> WitnessCertificate:
    """Build the intended run of a construction: full flushes, exact
    multiplications, honest tests, and the unique honest guess where one is
    demanded.  Raises InfeasibleParams when no such run exists."""
    from . import reductions

    builders = {
        "pspace": reductions.pspace_canonical_witness,
        "expspace": reductions.expspace_canonical_witness,
        "tower": reductions.tower_canonical_witness,
        "subset-sum": reductions.subset_sum_canonical_witness,
    }
    if construction not in builders:
        raise VassError(f"unknown construction {construction!r}")
    return builders[construction](**params)


@dataclass(frozen=True)
class MutationReport:
    """Outcome of endpoint-contract mutation testing."""

    total: int
    validation_failures: int
    endpoint_mismatches: int
    surviving: tuple[int, ...]


def mutate_and_check(v: Vass, cert: WitnessCertificate, mutations: int,
                     seed: int = 0) -> MutationReport:
    """Apply random single-step deletions/truncations to the certified run.

    Every mutant must fail validation or end away from the asserted endpoint;
    mutants that still satisfy the contract are reported by index.
    """
    verify_certificate(v, cert)
    rng = Random(seed)
    steps = cert.run.steps
    bad_valid = 0
    bad_endpoint = 0
    surviving: list[int] = []
    for m in range(mutations):
        i = rng.randrange(len(steps))
        if rng.random() < 0.5:
            mutant = Run(cert.run.start, steps[:i] + steps[i + 1:])
        else:
            mutant = Run(cert.run.start, steps[:i])
        try:
            final, _ = validate_run(v, mutant)
        except VassError:
            bad_valid += 1
            continue
        if final != cert.endpoint:
            bad_endpoint += 1
        else:
            surviving.append(m)
    return MutationReport(mutations, bad_valid, bad_endpoint, tuple(surviving))
