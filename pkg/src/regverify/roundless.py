"""Decision procedures for roundless protocols.

Four routes: a bounded exhaustive search realizing the short-witness
argument (every reachable presence pattern has a witness of at most 4|Q|
abstract steps), a saturation fixpoint for uninitialized coverability, a
first-write-order enumeration for coverability with fixed register count,
and the one-register DNF decision via covset/cocovset pruning.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .constraints import (ClauseDecomposition, dnf_clauses, eval_roundless)
from .errors import NotUninitialized, WrongRegisterCount
from .model import (D0, READ, ROUNDLESS, WRITE, Action, Protocol, Transition,
                    is_uninitialized)
from .oracle import _initial_supports
from .semantics import (AbstractConfig, Execution, Move, abstract_successors,
                        initial_configuration)
from .verdict import NEGATIVE, POSITIVE, Verdict


def witness_bound(p: Protocol) -> int:
    """Maximum abstract witness length the bounded search must consider."""
    return 4 * p.num_states


def solve_prp_bounded(p: Protocol, phi) -> Verdict:
    """Decide PRP by exhaustive depth-bounded search.

    Deterministic and complete within the 4|Q| bound: depth-first over
    abstract executions with a per-configuration best-depth visited map.
    Positive verdicts carry a replayable witness of at most 4|Q| steps.
    """
    if p.flavor != ROUNDLESS:
        raise ValueError("solve_prp_bounded needs a roundless protocol")
    bound = witness_bound(p)
    best_depth: dict[AbstractConfig, int] = {}
    stats = {"nodes": 0, "bound": bound}

    def dfs(c: AbstractConfig, depth: int, path: list[Move]):
        stats["nodes"] += 1
        if eval_roundless(c, phi):
            return list(path)
        if depth == bound:
            return None
        for move, succ in abstract_successors(p, c):
            if best_depth.get(succ, bound + 1) <= depth + 1:
                continue
            best_depth[succ] = depth + 1
            path.append(move)
            hit = dfs(succ, depth + 1, path)
            if hit is not None:
                return hit
            path.pop()
        return None

    for support in _initial_supports(p):
        start = initial_configuration(p, support)
        if best_depth.get(start, bound + 1) <= 0:
            continue
        best_depth[start] = 0
        moves = dfs(start, 0, [])
        if moves is not None:
            return Verdict(POSITIVE, "bounded",
                           Execution(start, tuple(moves)), stats)
    return Verdict(NEGATIVE, "bounded", None, stats)


@dataclass
class SaturationState:
    """Grow-only saturation record: covered states and established writes."""

    covered: set = field(default_factory=set)
    writable: dict = field(default_factory=dict)  # register -> set of symbols
    iterations: int = 0


def saturate_uninitialized(p: Protocol) -> SaturationState:
    """Fixpoint of the uninitialized coverability rules.

    From the initial states, a write transition always extends coverage; a
    read extends coverage once its symbol can be written to that register
    from covered states.
    """
    st = SaturationState(covered=set(p.initial_states))
    changed = True
    while changed:
        changed = False
        st.iterations += 1
        for t in p.transitions:
            if t.source not in st.covered:
                continue
            a = t.action
            if a.kind == WRITE:
                ok = True
            elif a.kind == READ:
                ok = any(w.action.kind == WRITE and w.action.reg == a.reg
                         and w.action.symbol == a.symbol
                         and w.source in st.covered and w.dest in st.covered
                         for w in p.transitions)
            else:
                ok = False
            if ok and t.dest not in st.covered:
                st.covered.add(t.dest)
                changed = True
        for t in p.transitions:
            a = t.action
            if a.kind == WRITE and t.source in st.covered:
                st.writable.setdefault(a.reg, set()).add(a.symbol)
    return st


def solve_cover_uninitialized(p: Protocol, target: int) -> Verdict:
    """Saturation decision for uninitialized coverability; exact."""
    if p.flavor != ROUNDLESS:
        raise ValueError("needs a roundless protocol")
    if not is_uninitialized(p):
        raise NotUninitialized("protocol reads the initial symbol")
    st = saturate_uninitialized(p)
    answer = POSITIVE if target in st.covered else NEGATIVE
    return Verdict(answer, "saturation", None,
                   {"covered": sorted(p.state_names[q] for q in st.covered),
                    "iterations": st.iterations})


@dataclass(frozen=True)
class FirstWriteOrder:
    """The order in which registers irreversibly lose the initial symbol."""

    registers: tuple  # distinct 0-based register ids

    def __post_init__(self):
        if len(set(self.registers)) != len(self.registers):
            raise ValueError("first-write order repeats a register")


def first_write_orders(p: Protocol):
    """All orders, shortest first, lexicographic within a length."""
    for m in range(p.register_count + 1):
        for order in itertools.permutations(range(p.register_count), m):
            yield FirstWriteOrder(order)


def _saturate_phases(p: Protocol, order: FirstWriteOrder) -> set:
    """Phase-wise saturation along one first-write order.

    Phase i allows reading the initial symbol only from registers not yet
    first-written, and writes/reads only on the first i opened registers;
    an order is abandoned once the next register cannot be written from the
    covered set.
    """
    S = set(p.initial_states)
    regs = order.registers
    for i in range(len(regs) + 1):
        opened = set(regs[:i])
        changed = True
        while changed:
            changed = False
            for t in p.transitions:
                if t.source not in S or t.dest in S:
                    continue
                a = t.action
                if a.kind == READ and a.symbol == D0 and a.reg not in opened:
                    ok = True
                elif a.kind == WRITE and a.reg in opened:
                    ok = True
                elif a.kind == READ and a.reg in opened and a.symbol != D0:
                    ok = any(w.action.kind == WRITE and w.action.reg == a.reg
                             and w.action.symbol == a.symbol and w.source in S
                             for w in p.transitions)
                else:
                    ok = False
                if ok:
                    S.add(t.dest)
                    changed = True
        if i < len(regs):
            nxt = regs[i]
            if not any(t.action.kind == WRITE and t.action.reg == nxt
                       and t.source in S for t in p.transitions):
                break  # order infeasible beyond this phase
    return S


def solve_cover_fixed_r(p: Protocol, target: int,
                        parallel: bool = False) -> Verdict:
    """Coverability via enumeration of first-write orders.

    Exact for any register count; cost grows factorially in it, so intended
    for small, fixed register counts.  Orders are independent; ``parallel``
    fans them over a thread pool, first success (in order) winning.
    """
    if p.flavor != ROUNDLESS:
        raise ValueError("needs a roundless protocol")
    orders = list(first_write_orders(p))
    if parallel and len(orders) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=4) as pool:
            sets = list(pool.map(lambda o: _saturate_phases(p, o), orders))
    else:
        sets = None
    tried = 0
    for idx, order in enumerate(orders):
        tried += 1
        S = sets[idx] if sets is not None else _saturate_phases(p, order)
        if target in S:
            return Verdict(POSITIVE, "fixed-r", None,
                           {"order": [j + 1 for j in order.registers],
                            "orders_tried": tried})
    return Verdict(NEGATIVE, "fixed-r", None, {"orders_tried": tried})


def reduce_cover_to_target(p: Protocol, error: int) -> tuple[Protocol, int]:
    """Joker reduction: coverability of ``error`` becomes synchronization.

    Adds a fresh joker symbol, a write-joker self-loop on the error state and
    a read-joker edge from every state to it, so that once the error state is
    reached everybody can be pulled in.
    """
    if p.flavor != ROUNDLESS:
        raise ValueError("needs a roundless protocol")
    joker = "joker"
    while joker in p.symbol_ids:
        joker += "_"
    symbols = p.symbol_names + (joker,)
    jid = len(symbols) - 1
    extra = [Transition(error, Action(WRITE, reg=0, symbol=jid), error)]
    for q in range(p.num_states):
        extra.append(Transition(q, Action(READ, reg=0, symbol=jid), error))
    p2 = Protocol(flavor=ROUNDLESS, state_names=p.state_names,
                  initial_states=p.initial_states,
                  register_count=p.register_count, symbol_names=symbols,
                  transitions=p.transitions + tuple(extra))
    return p2, error


def reduce_initialized_to_uninit_r1(p: Protocol) -> Protocol:
    """Fold the initial-value phase of a one-register protocol away.

    States reachable through read-initial chains become initial, and the
    read-initial transitions disappear; presence reachability answers
    coincide for every constraint.
    """
    if p.flavor != ROUNDLESS:
        raise ValueError("needs a roundless protocol")
    if p.register_count != 1:
        raise WrongRegisterCount("reduction needs exactly one register")
    closure = set(p.initial_states)
    changed = True
    while changed:
        changed = False
        for t in p.transitions:
            if (t.action.kind == READ and t.action.symbol == D0
                    and t.source in closure and t.dest not in closure):
                closure.add(t.dest)
                changed = True
    keep = tuple(t for t in p.transitions
                 if not (t.action.kind == READ and t.action.symbol == D0))
    return Protocol(flavor=ROUNDLESS, state_names=p.state_names,
                    initial_states=frozenset(closure),
                    register_count=1, symbol_names=p.symbol_names,
                    transitions=keep)


# --- one-register DNF decision ------------------------------------------------

def _alive_transitions(p: Protocol, alive: set) -> list[Transition]:
    return [t for t in p.transitions if t.source in alive and t.dest in alive]


def compute_cov_set(p: Protocol, alive: set | None = None) -> set:
    """The unique maximal jointly-coverable state set (uninitialized, r=1)."""
    if p.register_count != 1:
        raise WrongRegisterCount("covset needs exactly one register")
    if not is_uninitialized(p):
        raise NotUninitialized("covset needs an uninitialized protocol")
    if alive is None:
        alive = set(range(p.num_states))
    trans = _alive_transitions(p, alive)
    S = set(p.initial_states) & alive
    changed = True
    while changed:
        changed = False
        for t in trans:
            if t.source not in S or t.dest in S:
                continue
            if t.action.kind == WRITE:
                S.add(t.dest)
                changed = True
            elif t.action.kind == READ:
                if any(w.action.kind == WRITE
                       and w.action.symbol == t.action.symbol
                       and w.source in S and w.dest in S for w in trans):
                    S.add(t.dest)
                    changed = True
    return S


def _previous_symbol(trans: list[Transition], num_states: int, S: set,
                     symbols) -> set | None:
    """One backward phase: saturate with reads, then demand a writer.

    Iterates every candidate symbol, accumulating each success; None when no
    symbol admits a writer into its read-closure.
    """
    found = False
    S = set(S)
    for a in symbols:
        T = set(S)
        changed = True
        while changed:
            changed = False
            for t in trans:
                if (t.action.kind == READ and t.action.symbol == a
                        and t.dest in T and t.source not in T):
                    T.add(t.source)
                    changed = True
        writers = {t.source for t in trans
                   if t.action.kind == WRITE and t.action.symbol == a
                   and t.dest in T}
        if writers:
            S = T | writers
            found = True
    return S if found else None


def compute_cocov_set(p: Protocol, clause: ClauseDecomposition,
                      alive: set | None = None) -> set:
    """Maximal backward-coverable set for one clause (uninitialized, r=1)."""
    if p.register_count != 1:
        raise WrongRegisterCount("cocovset needs exactly one register")
    if not is_uninitialized(p):
        raise NotUninitialized("cocovset needs an uninitialized protocol")
    if alive is None:
        alive = set(range(p.num_states))
    trans = _alive_transitions(p, alive)
    allowed = alive - clause.q_minus
    d_ok = sorted(clause.d_ok[0])
    first = _previous_symbol(trans, p.num_states, allowed, d_ok)
    if first is None:
        return set()
    S = first
    writable = [s for s in range(1, p.num_symbols)]
    while True:
        nxt = _previous_symbol(trans, p.num_states, S, writable)
        if nxt is None or nxt == S:
            break
        S = nxt
    return S


def _clause_route(pu: Protocol, dec: ClauseDecomposition) -> str | None:
    """Whether one clause accepts on the uninitialized protocol, and how."""
    if not dec.satisfiable:
        return None
    base = pu.initial_states - dec.q_minus
    if D0 in dec.d_ok[0] and dec.q_plus <= base and base:
        return "initial"
    alive = set(range(pu.num_states))
    while alive:
        cov = compute_cov_set(pu, alive)
        cocov = compute_cocov_set(pu, dec, alive)
        new_alive = alive & cov & cocov
        if new_alive == alive:
            break
        alive = new_alive
    if alive and dec.q_plus <= alive:
        return "fixpoint"
    return None


def solve_dnfprp_one_register(p: Protocol, phi,
                              parallel: bool = False) -> Verdict:
    """Polynomial-time DNF presence reachability for one register.

    Reduces to the uninitialized case, then per clause prunes the state set
    to the intersection of forward- and backward-coverable sets until stable;
    a clause accepts when its required states survive a nonempty fixpoint.
    Zero-step witnesses (initial configurations already satisfying a clause)
    are checked before the fixpoint, which only reasons about executions
    containing a write.  Clauses are independent; ``parallel`` fans them
    over a thread pool.
    """
    if p.flavor != ROUNDLESS:
        raise ValueError("needs a roundless protocol")
    if p.register_count != 1:
        raise WrongRegisterCount("one-register route needs r = 1")
    decs = dnf_clauses(p, phi)  # raises NotDNF on bad input
    pu = reduce_initialized_to_uninit_r1(p)
    stats = {"clauses": len(decs)}
    if parallel and len(decs) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=4) as pool:
            routes = pool.map(lambda d: _clause_route(pu, d), decs)
    else:
        routes = (_clause_route(pu, dec) for dec in decs)
    for route in routes:
        if route is not None:
            return Verdict(POSITIVE, "one-reg", None,
                           dict(stats, route=route))
    return Verdict(NEGATIVE, "one-reg", None, stats)
