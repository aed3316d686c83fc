"""Shared fixtures and brute-force oracles for the test suite."""

from __future__ import annotations

import random

import pytest

from vasskit.core import Transition, Vass
from vasskit.lang import Choice, CoreProgram, Loop, Update


EXAMPLE1_TEXT = """
program ex1() counters x y {
  x += 1;
  loop { x -= 1, y += 1; }
  loop { x += 2, y -= 1; }
  loop { x -= 1, y += 1; }
  loop { x += 2, y -= 1; }
}
"""

EXAMPLE2_TEXT = """
program ex2(n) counters x y {
  x += 1;
  for i := 1 to n {
    loop { x -= 1, y += 1; }
    loop { x += 2, y -= 1; }
  }
}
"""


@pytest.fixture
def example1_vass():
    from vasskit.lang import compile, expand, parse

    return compile(expand(parse(EXAMPLE1_TEXT), {}))


def enumerate_elementary_cycles(n_states: int,
                                edges: list[tuple[int, int]]) -> list[tuple[int, ...]]:
    """All elementary cycles of a directed multigraph, as canonical (minimal
    rotation) tuples of edge indices.  Parallel edges count separately."""
    cycles: set[tuple[int, ...]] = set()

    def canonical(seq: list[int]) -> tuple[int, ...]:
        rotations = [tuple(seq[i:] + seq[:i]) for i in range(len(seq))]
        return min(rotations)

    def dfs(start: int, state: int, visited: set[int], path: list[int]) -> None:
        for ei, (u, v) in enumerate(edges):
            if u != state:
                continue
            if v == start:
                cycles.add(canonical(path + [ei]))
            elif v > start and v not in visited:
                dfs(start, v, visited | {v}, path + [ei])

    for start in range(n_states):
        dfs(start, start, {start}, [])
    return sorted(cycles)


def flat_by_cycle_enumeration(v: Vass) -> bool:
    """Brute-force flatness: every state on at most one elementary cycle."""
    idx = {s: i for i, s in enumerate(v.states)}
    edges = [(idx[t.src], idx[t.dst]) for t in v.transitions]
    cycles = enumerate_elementary_cycles(len(v.states), edges)
    on_cycle: dict[int, int] = {}
    for cyc in cycles:
        touched = {edges[ei][0] for ei in cyc}
        for s in touched:
            on_cycle[s] = on_cycle.get(s, 0) + 1
    return all(k <= 1 for k in on_cycle.values())


def random_multigraph_vass(rng: random.Random) -> Vass:
    n = rng.randint(1, 4)
    states = tuple(f"s{i}" for i in range(n))
    m = rng.randint(0, 6)
    transitions = []
    for k in range(m):
        u = rng.randrange(n)
        v = rng.randrange(n)
        transitions.append(Transition(states[u], (k + 1,), states[v]))
    return Vass("rand", 1, states, tuple(transitions))


def random_core_program(seed: int, max_stmts: int = 6,
                        n_counters: int = 3, span: int = 2) -> CoreProgram:
    """Ground marker-free program over up to `n_counters` counters with
    update entries in [-span, span]."""
    rng = random.Random(seed)
    counters = tuple("abc"[: rng.randint(1, n_counters)])

    def some_update() -> Update:
        entries = []
        for ctr in counters:
            if rng.random() < 0.6:
                val = rng.randint(-span, span)
                if val:
                    entries.append((ctr, val))
        if not entries:
            entries.append((rng.choice(counters), 1))
        return Update(tuple(entries))

    def stmts(budget: int, depth: int) -> tuple:
        out = []
        while budget > 0 and rng.random() < 0.75:
            roll = rng.random()
            if roll < 0.45 or depth >= 2:
                out.append(some_update())
                budget -= 1
            elif roll < 0.75:
                inner = stmts(min(budget - 1, 2), depth + 1) or (some_update(),)
                out.append(Loop(inner))
                budget -= 1 + len(inner)
            else:
                left = stmts(1, depth + 1) or (some_update(),)
                right = stmts(1, depth + 1) or (some_update(),)
                out.append(Choice(left, right))
                budget -= 1 + len(left) + len(right)
        return tuple(out)

    return CoreProgram(f"r{seed}", counters, stmts(max_stmts, 0))
