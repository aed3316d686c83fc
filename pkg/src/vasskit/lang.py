"""Counter-program language: AST, parser, macro expansion, and compilation to VASSes.

Counter programs are syntactic sugar for VASSes: simultaneous updates,
nondeterministic `loop` and `choice`, compile-time `for` macros, and
zero-test markers that must be eliminated (see `gadgets`) before a program
can be compiled.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Union

from .core import Transition, Vass, VassError


class LangError(VassError):
    """Base class for language-level errors."""


class ParseError(LangError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


class ExpandError(LangError):
    pass


class ResidualZeroTest(LangError):
    """A zero-test marker survived to compilation; gadgets must remove them."""


# ---------------------------------------------------------------------------
# Expressions

@dataclass(frozen=True)
class BinExpr:
    op: str  # one of + - *
    left: "Expr"
    right: "Expr"


Expr = Union[int, str, BinExpr]


def eval_expr(e: Expr, env: dict[str, int]) -> int:
    if isinstance(e, int):
        return e
    if isinstance(e, str):
        if e not in env:
            raise ExpandError(f"unbound name {e!r}")
        return env[e]
    a, b = eval_expr(e.left, env), eval_expr(e.right, env)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    return a * b


# ---------------------------------------------------------------------------
# Zero-test strategy tags (surface syntax: `via ctrl(c)`, `via triple(...)`, ...)

@dataclass(frozen=True)
class CtrlTag:
    """Marker handled by the controlling-counter technique with counter `ctrl`."""

    ctrl: str


@dataclass(frozen=True)
class TripleSpec:
    """Multiplication-triple counters (b, c, d) plus the flushable family."""

    b: str
    c: str
    d: str
    family: tuple[str, ...]

    def __post_init__(self):
        names = (self.b, self.c, self.d, *self.family)
        if len(set(names)) != len(names):
            raise LangError(f"triple counters not distinct: {names}")
        if not self.family:
            raise LangError("triple family must be nonempty")


@dataclass(frozen=True)
class PairSpec:
    """Quadratic-pair counters (b, c) plus the flushable family."""

    b: str
    c: str
    family: tuple[str, ...]

    def __post_init__(self):
        names = (self.b, self.c, *self.family)
        if len(set(names)) != len(names):
            raise LangError(f"pair counters not distinct: {names}")
        if not self.family:
            raise LangError("pair family must be nonempty")


Strategy = Union[CtrlTag, TripleSpec, PairSpec]


# ---------------------------------------------------------------------------
# Statements

@dataclass(frozen=True)
class Update:
    """Simultaneous multi-counter update; compiles to a single transition."""

    entries: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True)
class Loop:
    """Fire the whole body zero or more times (nondeterministic)."""

    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class For:
    """Compile-time macro: body repeated for var = lo..hi (empty when hi < lo)."""

    var: str
    lo: Expr
    hi: Expr
    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class Choice:
    """Nondeterministic branch between two statement lists."""

    left: tuple["Stmt", ...]
    right: tuple["Stmt", ...]


@dataclass(frozen=True)
class ZeroTest:
    """Marker demanding `counter` = 0 here; eliminated by gadgets."""

    counter: str
    strategy: Strategy | None = None


@dataclass(frozen=True)
class PairFinal:
    """Placement marker for the quadratic-pair drain epilogue."""

    spec: PairSpec


Stmt = Union[Update, Loop, For, Choice, ZeroTest, PairFinal]


@dataclass(frozen=True)
class Program:
    name: str
    parameters: tuple[str, ...]
    counters: tuple[str, ...]
    body: tuple[Stmt, ...]

    def __post_init__(self):
        if len(set(self.counters)) != len(self.counters):
            raise LangError("duplicate counter names")
        if len(set(self.parameters)) != len(self.parameters):
            raise LangError("duplicate parameter names")
        if set(self.parameters) & set(self.counters):
            raise LangError("parameter names must be disjoint from counters")


@dataclass(frozen=True)
class CoreProgram:
    """Ground program: no For statements, all expressions integer literals.

    May still contain zero-test markers.  `notes` records obligations such as
    the controlling-counter start-at-zero assumption.
    """

    name: str
    counters: tuple[str, ...]
    body: tuple[Stmt, ...]
    notes: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# Tokenizer / parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\+=|-=|:=|[+\-*(){},;|])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"program", "counters", "loop", "for", "to", "choice", "or", "zerotest",
             "via", "pairfinal"}


@dataclass
class _Tok:
    kind: str  # int | id | op | eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(value)
        else:
            toks.append(_Tok(kind, value, line, col))
            col += len(value)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def error(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg + (f", got {t.text!r}" if t.kind != "eof" else ", got end of input"),
                          t.line, t.col)

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text:
            raise self.error(f"expected {text!r}")
        return self.next()

    def ident(self) -> str:
        t = self.peek()
        if t.kind != "id" or t.text in _KEYWORDS:
            raise self.error("expected identifier")
        return self.next().text

    # expr ::= term (("+"|"-") term)* ; term ::= factor ("*" factor)*
    # factor ::= int | id | "(" expr ")" | "-" factor
    def expr(self) -> Expr:
        e = self.term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            e = BinExpr(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek().text == "*":
            self.next()
            e = BinExpr("*", e, self.factor())
        return e

    def factor(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return int(t.text)
        if t.kind == "id" and t.text not in _KEYWORDS:
            self.next()
            return t.text
        if t.text == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if t.text == "-":
            self.next()
            f = self.factor()
            if isinstance(f, int):
                return -f
            return BinExpr("-", 0, f)
        raise self.error("expected expression")

    def name_list(self, closer: str) -> tuple[str, ...]:
        names = []
        while self.peek().text != closer:
            names.append(self.ident())
            if self.peek().text == ",":
                self.next()
        return tuple(names)

    def strategy(self) -> Strategy:
        t = self.peek()
        if t.text == "ctrl":
            self.next()
            self.expect("(")
            c = self.ident()
            self.expect(")")
            return CtrlTag(c)
        if t.text == "triple":
            self.next()
            self.expect("(")
            b = self.ident()
            self.expect(",")
            c = self.ident()
            self.expect(",")
            d = self.ident()
            self.expect("|")
            fam = self.name_list(")")
            self.expect(")")
            return TripleSpec(b, c, d, fam)
        if t.text == "pair":
            self.next()
            self.expect("(")
            b = self.ident()
            self.expect(",")
            c = self.ident()
            self.expect("|")
            fam = self.name_list(")")
            self.expect(")")
            return PairSpec(b, c, fam)
        raise self.error("expected ctrl(...), triple(...), or pair(...)")

    def block(self) -> tuple[Stmt, ...]:
        self.expect("{")
        stmts = []
        while self.peek().text != "}":
            stmts.append(self.stmt())
        self.expect("}")
        return tuple(stmts)

    def stmt(self) -> Stmt:
        t = self.peek()
        if t.text == "loop":
            self.next()
            return Loop(self.block())
        if t.text == "for":
            self.next()
            var = self.ident()
            self.expect(":=")
            lo = self.expr()
            self.expect("to")
            hi = self.expr()
            return For(var, lo, hi, self.block())
        if t.text == "choice":
            self.next()
            left = self.block()
            self.expect("or")
            right = self.block()
            return Choice(left, right)
        if t.text == "zerotest":
            self.next()
            counter = self.ident()
            strat = None
            if self.peek().text == "via":
                self.next()
                strat = self.strategy()
            self.expect(";")
            return ZeroTest(counter, strat)
        if t.text == "pairfinal":
            self.next()
            self.expect("(")
            b = self.ident()
            self.expect(",")
            c = self.ident()
            self.expect("|")
            fam = self.name_list(")")
            self.expect(")")
            self.expect(";")
            return PairFinal(PairSpec(b, c, fam))
        # updates: id (+=|-=) expr ("," ...)* ";"
        entries = []
        while True:
            name = self.ident()
            op = self.peek()
            if op.text not in ("+=", "-="):
                raise self.error("expected += or -=")
            self.next()
            e = self.expr()
            if op.text == "-=":
                e = -e if isinstance(e, int) else BinExpr("-", 0, e)
            entries.append((name, e))
            if self.peek().text == ",":
                self.next()
                continue
            break
        self.expect(";")
        return Update(tuple(entries))

    def program(self) -> Program:
        self.expect("program")
        name = self.ident()
        self.expect("(")
        params = self.name_list(")")
        self.expect(")")
        self.expect("counters")
        counters = []
        while self.peek().text != "{":
            counters.append(self.ident())
        body = self.block()
        if self.peek().kind != "eof":
            raise self.error("trailing input after program")
        return Program(name, params, tuple(counters), body)


def _check_names(body: Iterable[Stmt], counters: set[str], scopes: set[str],
                 in_loop: bool) -> None:
    for st in body:
        if isinstance(st, Update):
            for name, _e in st.entries:
                if name not in counters:
                    raise LangError(f"unknown counter {name!r}")
        elif isinstance(st, Loop):
            _check_names(st.body, counters, scopes, True)
        elif isinstance(st, For):
            if st.var in counters or st.var in scopes:
                raise LangError(f"for-variable {st.var!r} shadows a counter or parameter")
            _check_names(st.body, counters, scopes, in_loop)
        elif isinstance(st, Choice):
            _check_names(st.left, counters, scopes, in_loop)
            _check_names(st.right, counters, scopes, in_loop)
        elif isinstance(st, ZeroTest):
            if st.counter not in counters:
                raise LangError(f"unknown counter {st.counter!r}")
            if in_loop:
                raise LangError(f"zero-test marker on {st.counter!r} inside a loop body")
        elif isinstance(st, PairFinal):
            pass
        else:  # pragma: no cover
            raise LangError(f"unknown statement {st!r}")


def parse(text: str) -> Program:
    """Parse the surface syntax into a Program; round-trips with `pretty`."""
    prog = _Parser(text).program()
    _check_names(prog.body, set(prog.counters), set(prog.parameters), False)
    return prog


# ---------------------------------------------------------------------------
# Pretty printer

def _expr_str(e: Expr, prec: int = 0) -> str:
    if isinstance(e, int):
        return str(e) if e >= 0 or prec == 0 else f"({e})"
    if isinstance(e, str):
        return e
    mine = 1 if e.op in "+-" else 2
    s = f"{_expr_str(e.left, mine)} {e.op} {_expr_str(e.right, mine + 1)}"
    return f"({s})" if mine < prec else s


def _strategy_str(s: Strategy) -> str:
    if isinstance(s, CtrlTag):
        return f"ctrl({s.ctrl})"
    if isinstance(s, TripleSpec):
        return f"triple({s.b}, {s.c}, {s.d} | {', '.join(s.family)})"
    return f"pair({s.b}, {s.c} | {', '.join(s.family)})"


def _stmt_lines(st: Stmt, indent: str) -> list[str]:
    if isinstance(st, Update):
        parts = []
        for name, e in st.entries:
            if isinstance(e, int) and e < 0:
                parts.append(f"{name} -= {-e}")
            elif isinstance(e, BinExpr) and e.op == "-" and e.left == 0:
                parts.append(f"{name} -= {_expr_str(e.right, 2)}")
            else:
                parts.append(f"{name} += {_expr_str(e)}")
        return [indent + ", ".join(parts) + ";"]
    if isinstance(st, Loop):
        return [indent + "loop {"] + _body_lines(st.body, indent + "  ") + [indent + "}"]
    if isinstance(st, For):
        head = f"for {st.var} := {_expr_str(st.lo)} to {_expr_str(st.hi)} {{"
        return [indent + head] + _body_lines(st.body, indent + "  ") + [indent + "}"]
    if isinstance(st, Choice):
        out = [indent + "choice {"]
        out += _body_lines(st.left, indent + "  ")
        out += [indent + "} or {"]
        out += _body_lines(st.right, indent + "  ")
        out += [indent + "}"]
        return out
    if isinstance(st, ZeroTest):
        via = f" via {_strategy_str(st.strategy)}" if st.strategy is not None else ""
        return [f"{indent}zerotest {st.counter}{via};"]
    if isinstance(st, PairFinal):
        s = st.spec
        return [f"{indent}pairfinal({s.b}, {s.c} | {', '.join(s.family)});"]
    raise LangError(f"unknown statement {st!r}")  # pragma: no cover


def _body_lines(body: tuple[Stmt, ...], indent: str) -> list[str]:
    out: list[str] = []
    for st in body:
        out.extend(_stmt_lines(st, indent))
    return out


def pretty(prog: Program | CoreProgram) -> str:
    """Deterministic surface-syntax rendering; parse(pretty(p)) == p for Programs."""
    params = ", ".join(getattr(prog, "parameters", ()))
    head = f"program {prog.name}({params}) counters {' '.join(prog.counters)} {{"
    return "\n".join([head] + _body_lines(prog.body, "  ") + ["}"]) + "\n"


# ---------------------------------------------------------------------------
# Macro expansion

def _expand_body(body: Iterable[Stmt], env: dict[str, int]) -> tuple[Stmt, ...]:
    out: list[Stmt] = []
    for st in body:
        if isinstance(st, Update):
            out.append(Update(tuple((n, eval_expr(e, env)) for n, e in st.entries)))
        elif isinstance(st, Loop):
            out.append(Loop(_expand_body(st.body, env)))
        elif isinstance(st, For):
            lo, hi = eval_expr(st.lo, env), eval_expr(st.hi, env)
            for i in range(lo, hi + 1):
                out.extend(_expand_body(st.body, {**env, st.var: i}))
        elif isinstance(st, Choice):
            out.append(Choice(_expand_body(st.left, env), _expand_body(st.right, env)))
        else:
            out.append(st)
    return tuple(out)


def expand(prog: Program | CoreProgram, env: dict[str, int] | None = None) -> CoreProgram:
    """Unroll all For macros and evaluate expressions; idempotent on CorePrograms."""
    env = dict(env or {})
    if isinstance(prog, CoreProgram):
        params: tuple[str, ...] = ()
    else:
        params = prog.parameters
    missing = [p for p in params if p not in env]
    if missing:
        raise ExpandError(f"unbound parameters: {', '.join(missing)}")
    body = _expand_body(prog.body, env)
    notes = getattr(prog, "notes", ())
    core = CoreProgram(prog.name, prog.counters, body, notes)
    _check_names(core.body, set(core.counters), set(), False)
    return core


# ---------------------------------------------------------------------------
# Marker positions

@dataclass(frozen=True)
class MarkerPosition:
    """A zero-test marker's place in program order."""

    ordinal: int
    path: tuple[int, ...]
    counter: str
    strategy: Strategy | None


def _walk_markers(body: tuple[Stmt, ...], path: tuple[int, ...],
                  counter_box: list[int], out: list[MarkerPosition]) -> None:
    for idx, st in enumerate(body):
        here = path + (idx,)
        counter_box[0] += 1
        if isinstance(st, ZeroTest):
            out.append(MarkerPosition(counter_box[0], here, st.counter, st.strategy))
        elif isinstance(st, Loop):
            _walk_markers(st.body, here, counter_box, out)
        elif isinstance(st, Choice):
            _walk_markers(st.left, here + (0,), counter_box, out)
            _walk_markers(st.right, here + (1,), counter_box, out)


def count_zero_tests(cp: CoreProgram) -> dict[str, list[MarkerPosition]]:
    """All zero-test markers grouped by counter, in program order."""
    found: list[MarkerPosition] = []
    _walk_markers(cp.body, (), [0], found)
    schedule: dict[str, list[MarkerPosition]] = {}
    for m in found:
        schedule.setdefault(m.counter, []).append(m)
    return schedule


# ---------------------------------------------------------------------------
# Compilation

@dataclass(frozen=True)
class UpdateNode:
    transition: Transition


@dataclass(frozen=True)
class LoopNode:
    glue: Transition | None          # entry edge when the previous state carried a cycle
    self_loop: Transition | None     # single-update body
    body: "SeqNode | None"           # multi-statement body
    close: Transition | None         # body exit back to the hub
    exit: Transition | None          # hub to the fresh exit state
    hub: str


@dataclass(frozen=True)
class ChoiceNode:
    enter_left: Transition
    left: "SeqNode"
    exit_left: Transition
    enter_right: Transition
    right: "SeqNode"
    exit_right: Transition


@dataclass(frozen=True)
class SeqNode:
    entry: str
    exit: str
    children: tuple[UpdateNode | LoopNode | ChoiceNode, ...]


@dataclass(frozen=True)
class CompiledProgram:
    """Compilation result plus the structural plan used to script runs."""

    vass: Vass
    plan: SeqNode
    core: CoreProgram

    def state_at(self, seq_path: tuple[int, ...], index: int) -> str:
        """State occupied between child `index-1` and `index` of the addressed
        statement list (loop bodies and choice branches extend the path)."""
        node = self.plan
        for step in seq_path:
            child = node.children[step]
            if isinstance(child, LoopNode):
                if child.body is None:
                    raise LangError("cannot address inside a self-loop body")
                node = child.body
            elif isinstance(child, ChoiceNode):
                raise LangError("choice path steps need a branch marker; use state_at_branch")
            else:
                raise LangError("path does not address a nested statement list")
        return self._state_in_seq(node, index)

    @staticmethod
    def _state_in_seq(node: SeqNode, index: int) -> str:
        if index == 0:
            return node.entry
        child = node.children[index - 1]
        if isinstance(child, UpdateNode):
            return child.transition.dst
        if isinstance(child, LoopNode):
            return child.exit.dst if child.exit is not None else child.hub
        return child.exit_left.dst


class _Builder:
    def __init__(self, dimension: int):
        self.dimension = dimension
        self.states: list[str] = []
        self.transitions: list[Transition] = []
        self.counter = 0

    def fresh(self, hint: str) -> str:
        self.counter += 1
        name = f"{hint}{self.counter}"
        self.states.append(name)
        return name

    def edge(self, src: str, effect: tuple[int, ...], dst: str) -> Transition:
        t = Transition(src, effect, dst)
        self.transitions.append(t)
        return t

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.dimension


def _update_vector(entries: tuple[tuple[str, int], ...], index: dict[str, int],
                   dim: int) -> tuple[int, ...]:
    vec = [0] * dim
    for name, val in entries:
        if not isinstance(val, int):
            raise LangError(f"non-ground update entry {name} += {val!r}")
        vec[index[name]] += val
    return tuple(vec)


def _compile_seq(body: tuple[Stmt, ...], b: _Builder, index: dict[str, int],
                 entry: str, entry_cycles: bool, prefix: str) -> tuple[SeqNode, str, bool]:
    children: list[UpdateNode | LoopNode | ChoiceNode] = []
    at, cycles = entry, entry_cycles
    for pos, st in enumerate(body):
        tag = f"{prefix}p{pos + 1}"
        if isinstance(st, Update):
            vec = _update_vector(st.entries, index, b.dimension)
            nxt = b.fresh(f"{tag}.s")
            children.append(UpdateNode(b.edge(at, vec, nxt)))
            at, cycles = nxt, False
        elif isinstance(st, Loop):
            if not st.body:
                children.append(LoopNode(None, None, None, None, None, at))
                continue
            glue = None
            if cycles:
                hub = b.fresh(f"{tag}.L")
                glue = b.edge(at, b.zero(), hub)
            else:
                hub = at
            if len(st.body) == 1 and isinstance(st.body[0], Update):
                vec = _update_vector(st.body[0].entries, index, b.dimension)
                sl = b.edge(hub, vec, hub)
                children.append(LoopNode(glue, sl, None, None, None, hub))
                at, cycles = hub, True
            else:
                inner, bx, _bc = _compile_seq(st.body, b, index, hub, True, f"{tag}.")
                close = b.edge(bx, b.zero(), hub)
                out = b.fresh(f"{tag}.x")
                exit_edge = b.edge(hub, b.zero(), out)
                children.append(LoopNode(glue, None, inner, close, exit_edge, hub))
                at, cycles = out, False
        elif isinstance(st, Choice):
            le = b.fresh(f"{tag}.a")
            re_ = b.fresh(f"{tag}.b")
            enter_l = b.edge(at, b.zero(), le)
            enter_r = b.edge(at, b.zero(), re_)
            lnode, lx, _ = _compile_seq(st.left, b, index, le, False, f"{tag}.a.")
            rnode, rx, _ = _compile_seq(st.right, b, index, re_, False, f"{tag}.b.")
            out = b.fresh(f"{tag}.j")
            exit_l = b.edge(lx, b.zero(), out)
            exit_r = b.edge(rx, b.zero(), out)
            children.append(ChoiceNode(enter_l, lnode, exit_l, enter_r, rnode, exit_r))
            at, cycles = out, False
        elif isinstance(st, (ZeroTest, PairFinal)):
            raise ResidualZeroTest(f"marker {st} must be eliminated before compilation")
        elif isinstance(st, For):
            raise LangError("For statements must be expanded before compilation")
        else:  # pragma: no cover
            raise LangError(f"unknown statement {st!r}")
    return SeqNode(entry, at, tuple(children)), at, cycles


def compile_plan(cp: CoreProgram) -> CompiledProgram:
    """Compile a ground, marker-free program and keep the structural plan."""
    index = {name: i for i, name in enumerate(cp.counters)}
    b = _Builder(len(cp.counters))
    entry = b.fresh("in")
    plan, exit_state, _ = _compile_seq(cp.body, b, index, entry, False, "")
    vass = Vass(cp.name, len(cp.counters), tuple(b.states), tuple(b.transitions),
                initial=entry, final=exit_state)
    return CompiledProgram(vass, plan, cp)


def compile(cp: CoreProgram) -> Vass:  # noqa: A001 - name fixed by the module contract
    """Compile a ground, marker-free CoreProgram to a VASS with entry/exit states."""
    return compile_plan(cp).vass


# ---------------------------------------------------------------------------
# Set-semantics interpreter (oracle for compile)

def interpret(cp: CoreProgram, caps: int | tuple[int, ...],
              zero_tests: str = "forbid",
              start: tuple[int, ...] | None = None) -> set[tuple]:
    """Reachable exit valuations by direct AST interpretation.

    Counter values are pruned above `caps` (scalar or per-counter), mirroring
    capped exploration of the compiled VASS.  `zero_tests` selects marker
    semantics: "forbid" raises on markers, "exact" filters to honest states,
    "flag" threads a cheated bit - states become (vec, honest_bool).
    """
    dim = len(cp.counters)
    limits = (caps,) * dim if isinstance(caps, int) else tuple(caps)
    index = {name: i for i, name in enumerate(cp.counters)}
    flagged = zero_tests == "flag"
    v0 = start if start is not None else (0,) * dim
    init = (v0, True) if flagged else v0

    def ok(vec: tuple[int, ...]) -> bool:
        return all(0 <= v <= m for v, m in zip(vec, limits))

    def apply_update(states: set, vec_delta: tuple[int, ...]) -> set:
        out = set()
        for s in states:
            vec = s[0] if flagged else s
            new = tuple(v + d for v, d in zip(vec, vec_delta))
            if ok(new):
                out.add((new, s[1]) if flagged else new)
        return out

    def run_body(body: tuple[Stmt, ...], states: set) -> set:
        for st in body:
            states = run_stmt(st, states)
            if not states:
                break
        return states

    def run_stmt(st: Stmt, states: set) -> set:
        if isinstance(st, Update):
            delta = [0] * dim
            for name, val in st.entries:
                delta[index[name]] += val
            return apply_update(states, tuple(delta))
        if isinstance(st, Loop):
            seen = set(states)
            frontier = set(states)
            while frontier:
                new = run_body(st.body, frontier) - seen
                seen |= new
                frontier = new
            return seen
        if isinstance(st, Choice):
            return run_body(st.left, states) | run_body(st.right, states)
        if isinstance(st, ZeroTest):
            if zero_tests == "forbid":
                raise ResidualZeroTest(f"marker on {st.counter} in interpreted program")
            i = index[st.counter]
            if zero_tests == "exact":
                return {s for s in states if s[i] == 0}
            return {(vec, honest and vec[i] == 0) for vec, honest in states}
        if isinstance(st, PairFinal):
            raise ResidualZeroTest("pairfinal marker in interpreted program")
        if isinstance(st, For):
            raise LangError("For statements must be expanded before interpretation")
        raise LangError(f"unknown statement {st!r}")  # pragma: no cover

    return run_body(cp.body, {init})
