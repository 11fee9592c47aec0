"""Concrete and abstract operational semantics for both protocol flavors.

Configurations are immutable values.  Roundless populations range over state
ids; round-based populations range over locations ``(state, round)``.
Roundless register banks are dense tuples indexed by register; round-based
banks are sparse frozensets of ``((round, register), symbol)`` holding only
non-initial entries, every other register reading as the initial symbol.

All operations are pure functions of their inputs and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (EmptySupport, MissingWindow, NotEnabled, NotInitialState,
                     ReplayFailure, TargetNotPopulated)
from .model import D0, INC, READ, ROUNDBASED, ROUNDLESS, WRITE, Protocol, Transition

CONCRETE = "concrete"
ABSTRACT = "abstract"


@dataclass(frozen=True)
class AbstractConfig:
    pop: frozenset  # state ids (roundless) or (state, round) locations
    regs: object    # tuple of symbol ids, or frozenset of ((round, reg), sym)


@dataclass(frozen=True)
class ConcreteConfig:
    pop: tuple      # sorted ((element, count), ...) with count > 0
    regs: object


@dataclass(frozen=True)
class Move:
    trans: Transition
    rnd: int | None = None   # round-based only
    desert: bool = False     # abstract semantics only; ignored concretely


@dataclass(frozen=True)
class Execution:
    start: object             # AbstractConfig or ConcreteConfig
    moves: tuple[Move, ...]


# --- population and register helpers ----------------------------------------

def multiset(items) -> tuple:
    counts: dict = {}
    for x in items:
        counts[x] = counts.get(x, 0) + 1
    return tuple(sorted(counts.items()))


def mset_count(pop: tuple, elem) -> int:
    for x, n in pop:
        if x == elem:
            return n
    return 0


def mset_add(pop: tuple, elem, delta: int = 1) -> tuple:
    counts = dict(pop)
    counts[elem] = counts.get(elem, 0) + delta
    if counts[elem] < 0:
        raise ValueError("negative multiplicity")
    if counts[elem] == 0:
        del counts[elem]
    return tuple(sorted(counts.items()))


def mset_support(pop: tuple) -> frozenset:
    return frozenset(x for x, _ in pop)


def mset_total(pop: tuple) -> int:
    return sum(n for _, n in pop)


def initial_regs(p: Protocol):
    if p.flavor == ROUNDLESS:
        return (D0,) * p.register_count
    return frozenset()


def reg_get(p: Protocol, regs, key) -> int:
    if p.flavor == ROUNDLESS:
        return regs[key]
    for k, v in regs:
        if k == key:
            return v
    return D0


def reg_set(p: Protocol, regs, key, sym: int):
    if p.flavor == ROUNDLESS:
        out = list(regs)
        out[key] = sym
        return tuple(out)
    pruned = frozenset((k, v) for k, v in regs if k != key)
    if sym == D0:
        return pruned
    return pruned | {(key, sym)}


def move_source(p: Protocol, m: Move):
    if p.flavor == ROUNDLESS:
        return m.trans.source
    return (m.trans.source, m.rnd)


def move_dest(p: Protocol, m: Move):
    if p.flavor == ROUNDLESS:
        return m.trans.dest
    rnd = m.rnd + 1 if m.trans.action.kind == INC else m.rnd
    return (m.trans.dest, rnd)


# --- constructors ------------------------------------------------------------

def initial_configuration(p: Protocol, support) -> AbstractConfig:
    """Abstract initial configuration with the given populated support."""
    support = frozenset(support)
    if not support:
        raise EmptySupport("initial support must be nonempty")
    bad = support - p.initial_states
    if bad:
        names = ", ".join(sorted(p.state_names[q] for q in bad))
        raise NotInitialState(f"not initial: {names}")
    if p.flavor == ROUNDLESS:
        pop = support
    else:
        pop = frozenset((q, 0) for q in support)
    return AbstractConfig(pop, initial_regs(p))


def concrete_initial(p: Protocol, counts: dict) -> ConcreteConfig:
    """Concrete initial configuration from a state -> multiplicity map."""
    if not counts or all(n == 0 for n in counts.values()):
        raise EmptySupport("at least one process required")
    bad = set(counts) - p.initial_states
    if bad:
        raise NotInitialState(f"not initial: {sorted(bad)}")
    if p.flavor == ROUNDLESS:
        pop = tuple(sorted((q, n) for q, n in counts.items() if n > 0))
    else:
        pop = tuple(sorted(((q, 0), n) for q, n in counts.items() if n > 0))
    return ConcreteConfig(pop, initial_regs(p))


def project(c: ConcreteConfig) -> AbstractConfig:
    """Projection: keep the support of the population, registers unchanged."""
    return AbstractConfig(mset_support(c.pop), c.regs)


# --- enabledness -------------------------------------------------------------

def _check_action(p: Protocol, regs, act, rnd: int | None) -> None:
    """Raise NotEnabled unless the action's register precondition holds."""
    if act.kind == READ:
        if p.flavor == ROUNDLESS:
            key = act.reg
        else:
            target = rnd - act.depth
            if target < 0:
                raise NotEnabled(f"depth underflow: round {rnd} - {act.depth}")
            key = (target, act.reg)
        have = reg_get(p, regs, key)
        if have != act.symbol:
            raise NotEnabled(
                f"register mismatch: holds {p.symbol_names[have]}, "
                f"read expects {p.symbol_names[act.symbol]}")


def _apply_regs(p: Protocol, regs, act, rnd: int | None):
    if act.kind == WRITE:
        key = act.reg if p.flavor == ROUNDLESS else (rnd, act.reg)
        return reg_set(p, regs, key, act.symbol)
    return regs


# --- steps -------------------------------------------------------------------

def concrete_step(p: Protocol, c: ConcreteConfig, m: Move) -> ConcreteConfig:
    """Unique concrete successor; the move's desert flag is ignored."""
    if p.flavor == ROUNDBASED and m.rnd is None:
        raise NotEnabled("round-based move needs a round")
    src = move_source(p, m)
    if mset_count(c.pop, src) == 0:
        raise NotEnabled("source empty")
    _check_action(p, c.regs, m.trans.action, m.rnd)
    pop = mset_add(mset_add(c.pop, src, -1), move_dest(p, m), +1)
    return ConcreteConfig(pop, _apply_regs(p, c.regs, m.trans.action, m.rnd))


def abstract_step(p: Protocol, c: AbstractConfig, m: Move) -> AbstractConfig:
    """Abstract successor honoring the move's desert flag."""
    if p.flavor == ROUNDBASED and m.rnd is None:
        raise NotEnabled("round-based move needs a round")
    src = move_source(p, m)
    if src not in c.pop:
        raise NotEnabled("source empty")
    _check_action(p, c.regs, m.trans.action, m.rnd)
    dest = move_dest(p, m)
    if m.desert:
        pop = (c.pop - {src}) | {dest}
    else:
        pop = c.pop | {dest}
    return AbstractConfig(pop, _apply_regs(p, c.regs, m.trans.action, m.rnd))


def abstract_successors(p: Protocol, c: AbstractConfig,
                        window: tuple[int, int] | None = None):
    """All pairs (move, successor) of the abstract step relation.

    Round-based protocols need an explicit ``window = (lo, hi)`` bounding the
    rounds a generated move may have an effect on (a move at round k has
    effect on round k, an increment also on round k+1); the move set is
    infinite otherwise.  Roundless protocols ignore the window.

    Both the deserting and non-deserting variant of each enabled transition
    are produced unless they coincide.
    """
    out = []
    if p.flavor == ROUNDLESS:
        rounds = [None]
    else:
        if window is None:
            raise MissingWindow("round-based successors need a round window")
        lo, hi = max(window[0], 0), window[1]
        rounds = range(lo, hi + 1)
    for t in p.transitions:
        for rnd in rounds:
            if p.flavor == ROUNDBASED:
                if t.action.kind == INC and rnd + 1 > hi:
                    continue
                if t.action.kind == READ and rnd - t.action.depth < 0:
                    continue
            for desert in (False, True):
                m = Move(t, rnd, desert)
                try:
                    succ = abstract_step(p, c, m)
                except NotEnabled:
                    break  # the non-desert variant failed; desert will too
                if desert and out and out[-1][0].trans is t \
                        and out[-1][0].rnd == rnd and out[-1][1] == succ:
                    continue  # variants coincide (self-loop)
                out.append((m, succ))
    return out


def replay(p: Protocol, exec: Execution, mode: str):
    """Fold the execution's steps, failing fast; returns the final config.

    This is the trusted witness checker: NotEnabled carries the index of the
    offending step.
    """
    step = concrete_step if mode == CONCRETE else abstract_step
    cur = exec.start
    for i, m in enumerate(exec.moves):
        try:
            cur = step(p, cur, m)
        except NotEnabled as e:
            raise NotEnabled(e.reason, step_index=i) from None
    return cur


def replay_configs(p: Protocol, exec: Execution, mode: str) -> list:
    """All intermediate configurations, start first."""
    step = concrete_step if mode == CONCRETE else abstract_step
    out = [exec.start]
    for i, m in enumerate(exec.moves):
        try:
            out.append(step(p, out[-1], m))
        except NotEnabled as e:
            raise NotEnabled(e.reason, step_index=i) from None
    return out


# --- copycat and realization --------------------------------------------------

def copycat_extend(p: Protocol, exec: Execution, target) -> Execution:
    """Add one process retracing another's path to ``target``.

    ``exec`` is concrete and ``target`` (a state id, or a location for
    round-based protocols) must be populated in its final configuration.  The
    result replays from the start population plus one process on some initial
    support member, and ends at the final population plus one process on
    ``target`` with identical register values.
    """
    configs = replay_configs(p, exec, CONCRETE)
    if mset_count(configs[-1].pop, target) == 0:
        raise TargetNotPopulated(f"{target} not populated at the end")
    tracked = target
    dup = [False] * len(exec.moves)
    for i in reversed(range(len(exec.moves))):
        m = exec.moves[i]
        if tracked == move_dest(p, m):
            dup[i] = True
            tracked = move_source(p, m)
    new_start = ConcreteConfig(mset_add(exec.start.pop, tracked, +1),
                               exec.start.regs)
    moves: list[Move] = []
    for i, m in enumerate(exec.moves):
        moves.append(m)
        if dup[i]:
            moves.append(m)
    return Execution(new_start, tuple(moves))


def abstract_to_concrete(p: Protocol, exec: Execution) -> Execution:
    """Realize an abstract execution concretely.

    Processes are duplicated (via the copycat construction) only when a
    non-deserting step would otherwise drain a support member that the
    abstract configuration keeps populated; deserting steps move every
    process off the source.
    """
    try:
        replay(p, exec, ABSTRACT)
    except NotEnabled as e:
        raise ReplayFailure(f"abstract execution does not replay: {e}")
    start_elems = sorted(exec.start.pop)
    cur_start = ConcreteConfig(multiset(start_elems), exec.start.regs)
    cur_moves: list[Move] = []
    cur = cur_start
    for m in exec.moves:
        src = move_source(p, m)
        if m.desert:
            for _ in range(mset_count(cur.pop, src)):
                cur_moves.append(m)
                cur = concrete_step(p, cur, m)
        else:
            if mset_count(cur.pop, src) == 1:
                ext = copycat_extend(p, Execution(cur_start, tuple(cur_moves)),
                                     src)
                cur_start = ext.start
                cur_moves = list(ext.moves)
                cur = replay(p, Execution(cur_start, tuple(cur_moves)),
                             CONCRETE)
            cur_moves.append(m)
            cur = concrete_step(p, cur, m)
    return Execution(cur_start, tuple(cur_moves))


# --- witness trace format ------------------------------------------------------

def _format_pop_elem(p: Protocol, elem) -> str:
    if p.flavor == ROUNDLESS:
        return p.state_names[elem]
    q, k = elem
    return f"{p.state_names[q]}@{k}"


def _format_regs(p: Protocol, regs) -> str:
    if p.flavor == ROUNDLESS:
        return " ".join(f"{j + 1}={p.symbol_names[s]}"
                        for j, s in enumerate(regs))
    return " ".join(f"{k}.{j + 1}={p.symbol_names[s]}"
                    for (k, j), s in sorted(regs))


def write_trace(p: Protocol, exec: Execution, mode: str) -> str:
    """Render an execution in the line-oriented witness trace format."""
    from .model import format_action

    lines = [f"trace: {p.flavor} {mode}"]
    if mode == CONCRETE:
        elems = []
        for elem, n in exec.start.pop:
            elems.extend([elem] * n)
    else:
        elems = sorted(exec.start.pop)
    pop_part = " ".join(_format_pop_elem(p, e) for e in elems)
    lines.append(f"start: {pop_part} | {_format_regs(p, exec.start.regs)}")
    lines.append("steps:")
    for m in exec.moves:
        flag = "desert" if m.desert else "keep"
        prefix = f"{m.rnd} " if p.flavor == ROUNDBASED else ""
        lines.append(f"  {prefix}{p.state_names[m.trans.source]} "
                     f"{format_action(p, m.trans.action)} "
                     f"{p.state_names[m.trans.dest]} {flag}")
    return "\n".join(lines) + "\n"


def parse_trace(p: Protocol, text: str) -> tuple[Execution, str]:
    """Parse the witness trace format; returns (execution, mode)."""
    from .model import _parse_action

    lines = [ln.split("#", 1)[0].rstrip() for ln in text.splitlines()]
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(lines) if ln.strip()]
    if not lines or not lines[0][1].startswith("trace:"):
        raise ReplayFailure("trace must begin with a 'trace:' line")
    head = lines[0][1][len("trace:"):].split()
    if len(head) != 2 or head[0] != p.flavor or head[1] not in (CONCRETE,
                                                                ABSTRACT):
        raise ReplayFailure(f"bad trace header {lines[0][1]!r}")
    mode = head[1]
    if len(lines) < 2 or not lines[1][1].startswith("start:"):
        raise ReplayFailure("missing 'start:' line")
    start_body = lines[1][1][len("start:"):]
    pop_part, _, reg_part = start_body.partition("|")
    elems = []
    for tok in pop_part.split():
        if p.flavor == ROUNDLESS:
            elems.append(p.state_id(tok))
        else:
            name, _, k = tok.partition("@")
            elems.append((p.state_id(name), int(k)))
    regs = initial_regs(p)
    for tok in reg_part.split():
        key_part, _, sym_name = tok.partition("=")
        sym = p.symbol_id(sym_name)
        if p.flavor == ROUNDLESS:
            key = int(key_part) - 1
        else:
            k, _, j = key_part.partition(".")
            key = (int(k), int(j) - 1)
        regs = reg_set(p, regs, key, sym)
    if mode == CONCRETE:
        if not elems:
            raise EmptySupport("concrete trace start has no processes")
        start = ConcreteConfig(multiset(elems), regs)
    else:
        start = AbstractConfig(frozenset(elems), regs)

    moves = []
    rest = lines[2:]
    if rest and rest[0][1] == "steps:":
        rest = rest[1:]
    for lineno, ln in rest:
        toks = ln.split()
        if len(toks) < 4:
            raise ReplayFailure(f"line {lineno}: malformed step {ln!r}")
        rnd = None
        if p.flavor == ROUNDBASED:
            rnd = int(toks[0])
            toks = toks[1:]
        flag = toks[-1]
        if flag not in ("desert", "keep"):
            raise ReplayFailure(f"line {lineno}: bad desert flag {flag!r}")
        src = p.state_id(toks[0])
        dst = p.state_id(toks[-2])
        act_text = " ".join(toks[1:-2])
        action = _parse_action(act_text, p.flavor, p.register_count,
                               p.visibility or 0, p.symbol_ids, lineno)
        moves.append(Move(Transition(src, action, dst), rnd,
                          flag == "desert"))
    return Execution(start, tuple(moves)), mode
