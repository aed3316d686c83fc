"""Core value types and semantics for VASSes and bounded counter automata.

A d-dimensional VASS is a finite state graph whose transitions add integer
vectors to d nonnegative counters; a transition fires only if the result
stays nonnegative.  Counter automata extend VASSes with zero-test
transitions that additionally require one counter to be exactly zero.

All types here are immutable values; they can be shared freely across
concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

CounterVector = tuple[int, ...]

_ID_FORBIDDEN = set(" \t\n\r()#,")


class VassError(Exception):
    """Base class for semantic and format errors raised by this package."""


class WrongState(VassError):
    """Transition source does not match the current configuration state."""


class NegativeCounter(VassError):
    """Firing would drive a counter below zero (the transition is not enabled)."""


class ZeroTestFailed(VassError):
    """A zero-test transition was fired while the tested counter was nonzero."""


class BoundExceeded(VassError):
    """The counter sum reached the boundedness threshold."""


class FormatError(VassError):
    """Malformed text in the vass/automaton/run exchange format."""


class RunValidationError(VassError):
    """Replay failed; carries the 1-based step index and the underlying cause."""

    def __init__(self, step: int, cause: VassError):
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause


@dataclass(frozen=True, slots=True)
class Transition:
    """A transition (src, effect, dst); the effect is an integer vector."""

    src: str
    effect: CounterVector
    dst: str


@dataclass(frozen=True)
class CaTransition(Transition):
    """Counter-automaton transition; `zero_test` is a 0-based counter index or None."""

    zero_test: int | None = None


def _check_state_id(s: str) -> None:
    if not s or any(ch in _ID_FORBIDDEN for ch in s):
        raise FormatError(f"bad state id {s!r}")


@dataclass(frozen=True)
class Vass:
    """A named d-VASS with an ordered state list and optional distinguished states."""

    name: str
    dimension: int
    states: tuple[str, ...]
    transitions: tuple[Transition, ...]
    initial: str | None = None
    final: str | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise VassError("dimension must be >= 1")
        if len(set(self.states)) != len(self.states):
            raise VassError(f"duplicate state ids in {self.name!r}")
        for s in self.states:
            _check_state_id(s)
        known = set(self.states)
        for t in self.transitions:
            if t.src not in known or t.dst not in known:
                raise VassError(f"dangling state reference in transition {t}")
            if len(t.effect) != self.dimension:
                raise VassError(f"effect dimension {len(t.effect)} != {self.dimension}")
        for s in (self.initial, self.final):
            if s is not None and s not in known:
                raise VassError(f"distinguished state {s!r} not declared")

    @property
    def state_set(self) -> frozenset[str]:
        return frozenset(self.states)


@dataclass(frozen=True)
class CounterAutomaton:
    """A VASS with zero-test transitions and distinguished initial/accepting states."""

    name: str
    dimension: int
    states: tuple[str, ...]
    transitions: tuple[CaTransition, ...]
    initial: str
    accepting: str

    def __post_init__(self):
        if self.dimension < 1:
            raise VassError("dimension must be >= 1")
        if len(set(self.states)) != len(self.states):
            raise VassError(f"duplicate state ids in {self.name!r}")
        for s in self.states:
            _check_state_id(s)
        known = set(self.states)
        if self.initial not in known or self.accepting not in known:
            raise VassError("initial/accepting state not declared")
        for t in self.transitions:
            if t.src not in known or t.dst not in known:
                raise VassError(f"dangling state reference in transition {t}")
            if len(t.effect) != self.dimension:
                raise VassError(f"effect dimension {len(t.effect)} != {self.dimension}")
            if t.zero_test is not None and not 0 <= t.zero_test < self.dimension:
                raise VassError(f"zero-test index {t.zero_test} out of range")


@dataclass(frozen=True)
class Configuration:
    """A state paired with a nonnegative counter vector, written q(v)."""

    state: str
    counters: CounterVector

    def __post_init__(self):
        if any(c < 0 for c in self.counters):
            raise NegativeCounter(f"negative entry in configuration {self}")

    def __str__(self) -> str:
        return format_config(self)


@dataclass(frozen=True)
class Run:
    """A start configuration plus transitions in firing order.

    Validity (every step enabled, states chaining up) is established by
    `validate_run`, not by construction.
    """

    start: Configuration
    steps: tuple[Transition, ...]

    def __len__(self) -> int:
        return len(self.steps)


class EncodingKind(Enum):
    UNARY = "unary"
    BINARY = "binary"


# ---------------------------------------------------------------------------
# Semantics


def fire(vass: Vass, config: Configuration, t: Transition) -> Configuration:
    """Fire `t` in `config`; raises WrongState / NegativeCounter when not enabled."""
    if len(config.counters) != vass.dimension:
        raise VassError("configuration dimension mismatch")
    if config.state != t.src:
        raise WrongState(f"at {config.state}, transition leaves {t.src}")
    new = tuple(c + e for c, e in zip(config.counters, t.effect))
    for i, c in enumerate(new):
        if c < 0:
            raise NegativeCounter(f"counter {i + 1} would become {c}")
    return Configuration(t.dst, new)


def validate_run(vass: Vass, run: Run) -> tuple[Configuration, CounterVector]:
    """Replay `run` step by step; return (final configuration, total effect).

    Raises RunValidationError carrying the first failing 1-based step index.
    """
    if len(run.start.counters) != vass.dimension:
        raise VassError("start configuration dimension mismatch")
    state = run.start.state
    counters = list(run.start.counters)
    effect = [0] * vass.dimension
    for idx, t in enumerate(run.steps, start=1):
        if t.src != state:
            raise RunValidationError(idx, WrongState(f"at {state}, transition leaves {t.src}"))
        for i, e in enumerate(t.effect):
            counters[i] += e
            effect[i] += e
        for i, c in enumerate(counters):
            if c < 0:
                raise RunValidationError(idx, NegativeCounter(f"counter {i + 1} would become {c}"))
        state = t.dst
    return Configuration(state, tuple(counters)), tuple(effect)


def ca_validate_run(a: CounterAutomaton, run: Run, bound: int) -> Configuration:
    """Replay a counter-automaton run under the strict sum bound (sum < bound).

    Enforces nonnegativity, zero-test guards on the pre-firing value, and the
    bound at every configuration including the start.
    """
    state = run.start.state
    counters = list(run.start.counters)
    if sum(counters) >= bound:
        raise RunValidationError(0, BoundExceeded(f"initial sum {sum(counters)} >= {bound}"))
    for idx, t in enumerate(run.steps, start=1):
        if t.src != state:
            raise RunValidationError(idx, WrongState(f"at {state}, transition leaves {t.src}"))
        zt = getattr(t, "zero_test", None)
        if zt is not None and counters[zt] != 0:
            raise RunValidationError(
                idx, ZeroTestFailed(f"counter {zt + 1} is {counters[zt]}, not 0")
            )
        for i, e in enumerate(t.effect):
            counters[i] += e
        for i, c in enumerate(counters):
            if c < 0:
                raise RunValidationError(idx, NegativeCounter(f"counter {i + 1} would become {c}"))
        if sum(counters) >= bound:
            raise RunValidationError(idx, BoundExceeded(f"sum {sum(counters)} >= {bound}"))
        state = t.dst
    return Configuration(state, tuple(counters))


# ---------------------------------------------------------------------------
# Flatness

def _sccs(n: int, edges: list[tuple[int, int]]) -> list[list[int]]:
    """Tarjan's strongly connected components, iterative."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            while pi < len(adj[v]):
                w = adj[v][pi]
                pi += 1
                if index[w] == -1:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
            if work:
                u, _ = work[-1]
                low[u] = min(low[u], low[v])
    return out


def is_flat(vass: Vass) -> bool:
    """True iff every state lies on at most one state-cycle.

    Parallel transitions count as distinct edges, so a state with two
    self-loop transitions is on two cycles and the VASS is not flat.
    """
    idx = {s: i for i, s in enumerate(vass.states)}
    edges = [(idx[t.src], idx[t.dst]) for t in vass.transitions]
    for comp in _sccs(len(vass.states), edges):
        members = set(comp)
        internal = sum(1 for u, v in edges if u in members and v in members)
        limit = 1 if len(comp) == 1 else len(comp)
        if internal > limit:
            return False
    return True


# ---------------------------------------------------------------------------
# Size accounting

def _entry_weight(entry: int, kind: EncodingKind) -> int:
    if kind is EncodingKind.UNARY:
        return abs(entry)
    return abs(entry).bit_length()


def encoded_size(vass: Vass, kind: EncodingKind) -> int:
    """Deterministic size measure: one unit per state, two per transition
    (endpoints), and 1 + weight(entry) per effect entry."""
    size = len(vass.states)
    for t in vass.transitions:
        size += 2
        for e in t.effect:
            size += 1 + _entry_weight(e, kind)
    return size


# ---------------------------------------------------------------------------
# Text exchange format

def format_vector(vec: CounterVector) -> str:
    return "(" + ",".join(str(x) for x in vec) + ")"


def parse_vector(text: str) -> CounterVector:
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise FormatError(f"expected (v1,...,vd), got {text!r}")
    inner = text[1:-1].strip()
    if not inner:
        raise FormatError("empty vector")
    try:
        return tuple(int(p) for p in inner.split(","))
    except ValueError as exc:
        raise FormatError(f"bad vector {text!r}") from exc


def format_config(config: Configuration) -> str:
    return f"{config.state}{format_vector(config.counters)}"


def parse_config(text: str) -> Configuration:
    text = text.strip()
    lp = text.find("(")
    if lp <= 0 or not text.endswith(")"):
        raise FormatError(f"expected state(v1,...,vd), got {text!r}")
    return Configuration(text[:lp], parse_vector(text[lp:]))


def dumps(obj: Vass | CounterAutomaton) -> str:
    """Serialize to the line-oriented text format."""
    lines = [f"vass {obj.name} dim {obj.dimension}"]
    for s in obj.states:
        lines.append(f"state {s}")
    if isinstance(obj, CounterAutomaton):
        lines.append(f"init {obj.initial}")
        lines.append(f"final {obj.accepting}")
    else:
        if obj.initial is not None:
            lines.append(f"init {obj.initial}")
        if obj.final is not None:
            lines.append(f"final {obj.final}")
    for t in obj.transitions:
        zt = getattr(t, "zero_test", None)
        if zt is None:
            lines.append(f"trans {t.src} {format_vector(t.effect)} {t.dst}")
        else:
            lines.append(f"ztrans {t.src} {format_vector(t.effect)} zt={zt + 1} {t.dst}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> Vass | CounterAutomaton:
    """Parse the text format; yields a CounterAutomaton iff a ztrans line occurs."""
    name = None
    dim = None
    states: list[str] = []
    initial = None
    final = None
    transitions: list[CaTransition] = []
    has_zt = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "vass":
                name = parts[1]
                if parts[2] != "dim":
                    raise FormatError("expected 'dim'")
                dim = int(parts[3])
            elif kind == "state":
                states.append(parts[1])
            elif kind == "init":
                initial = parts[1]
            elif kind == "final":
                final = parts[1]
            elif kind == "trans":
                transitions.append(CaTransition(parts[1], parse_vector(parts[2]), parts[3]))
            elif kind == "ztrans":
                if not parts[3].startswith("zt="):
                    raise FormatError("expected zt=<k>")
                has_zt = True
                k = int(parts[3][3:])
                transitions.append(
                    CaTransition(parts[1], parse_vector(parts[2]), parts[4], zero_test=k - 1)
                )
            else:
                raise FormatError(f"unknown item {kind!r}")
        except (IndexError, ValueError) as exc:
            raise FormatError(f"line {lineno}: {raw!r}") from exc
    if name is None or dim is None:
        raise FormatError("missing 'vass <name> dim <d>' header")
    if has_zt:
        if initial is None or final is None:
            raise FormatError("counter automaton requires init and final states")
        return CounterAutomaton(name, dim, tuple(states), tuple(transitions), initial, final)
    plain = tuple(Transition(t.src, t.effect, t.dst) for t in transitions)
    return Vass(name, dim, tuple(states), plain, initial, final)


def to_dot(vass: Vass | CounterAutomaton) -> str:
    """DOT export: one node per state, one edge per transition labeled by its effect."""
    initial = vass.initial if isinstance(vass, Vass) else vass.initial
    final = vass.final if isinstance(vass, Vass) else vass.accepting
    lines = [f'digraph "{vass.name}" {{']
    for s in vass.states:
        attrs = []
        if s == initial:
            attrs.append("shape=box")
        if s == final:
            attrs.append("peripheries=2")
        suffix = f" [{','.join(attrs)}]" if attrs else ""
        lines.append(f'  "{s}"{suffix};')
    for t in vass.transitions:
        label = format_vector(t.effect)
        zt = getattr(t, "zero_test", None)
        if zt is not None:
            label += f" zt={zt + 1}"
        lines.append(f'  "{t.src}" -> "{t.dst}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Structural comparison

def canonical_form(vass: Vass) -> tuple:
    """A renaming-invariant canonical description.

    States are relabeled by a deterministic BFS from the initial state with
    out-edges ordered by effect, so two VASSes that differ only in state
    names canonicalize identically whenever each state's outgoing effects
    are pairwise distinct (true for all graphs compared in this package).
    """
    outgoing: dict[str, list[Transition]] = {s: [] for s in vass.states}
    for t in vass.transitions:
        outgoing[t.src].append(t)

    order: dict[str, int] = {}
    queue: list[str] = []
    roots = [s for s in (vass.initial,) if s is not None]
    for root in roots + list(vass.states):
        if root in order:
            continue
        order[root] = len(order)
        queue.append(root)
        while queue:
            s = queue.pop(0)
            nbrs = sorted(
                outgoing[s], key=lambda t: (t.effect, order.get(t.dst, len(vass.states)))
            )
            for t in nbrs:
                if t.dst not in order:
                    order[t.dst] = len(order)
                    queue.append(t.dst)
    edges = sorted((order[t.src], t.effect, order[t.dst]) for t in vass.transitions)
    return (
        vass.dimension,
        len(vass.states),
        tuple(edges),
        order.get(vass.initial) if vass.initial else None,
        order.get(vass.final) if vass.final else None,
    )


def isomorphic(v1: Vass, v2: Vass) -> bool:
    """Structural equality up to state renaming (deterministic-relabel check)."""
    return canonical_form(v1) == canonical_form(v2)
