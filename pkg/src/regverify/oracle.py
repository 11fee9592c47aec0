"""Brute-force ground truth at desk scale.

Exhaustive abstract reachability, breadth-first with parent links so that
shortest witnesses fall out, for roundless protocols and for round-based
protocols truncated at a round cap.  Every specialized solver is validated
against these sets; they are not a scalable model checker and refuse
instances beyond their caps.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .constraints import eval_roundbased, eval_roundless, max_constant
from .errors import CapExceeded
from .model import INC, READ, ROUNDBASED, ROUNDLESS, Protocol
from .semantics import (ABSTRACT, AbstractConfig, Execution, Move,
                        abstract_successors, initial_configuration, replay)
from .verdict import NEGATIVE, POSITIVE, Verdict

DEFAULT_STATE_CAP = 12
DEFAULT_SPACE_CAP = 200_000


@dataclass
class ReachSet:
    """Abstract reach set with parent links for witness extraction."""

    members: set = field(default_factory=set)
    parents: dict = field(default_factory=dict)  # config -> (pred, Move)|None
    order: list = field(default_factory=list)    # BFS discovery order

    def witness(self, config: AbstractConfig) -> Execution:
        moves: list[Move] = []
        cur = config
        while True:
            link = self.parents[cur]
            if link is None:
                break
            cur, move = link
            moves.append(move)
        moves.reverse()
        return Execution(cur, tuple(moves))


def _initial_supports(p: Protocol):
    q0 = sorted(p.initial_states)
    for r in range(1, len(q0) + 1):
        for combo in itertools.combinations(q0, r):
            yield frozenset(combo)


def _bfs_roundless(p: Protocol, space_cap: int) -> ReachSet:
    """Packed-integer BFS: register fields below, population bits above."""
    sym_bits = max(1, (p.num_symbols - 1).bit_length())
    sym_mask = (1 << sym_bits) - 1
    pop_shift = p.register_count * sym_bits

    ops = []
    for t in p.transitions:
        a = t.action
        ops.append((1 << (pop_shift + t.source), 1 << (pop_shift + t.dest),
                    a.reg * sym_bits, a.symbol, a.kind == READ,
                    Move(t, None, False), Move(t, None, True)))

    def decode(code: int) -> AbstractConfig:
        pop = frozenset(q for q in range(p.num_states)
                        if code & (1 << (pop_shift + q)))
        regs = tuple((code >> (j * sym_bits)) & sym_mask
                     for j in range(p.register_count))
        return AbstractConfig(pop, regs)

    rs = ReachSet()
    codes: dict[int, tuple | None] = {}
    queue: deque[int] = deque()
    for support in _initial_supports(p):
        code = 0
        for q in support:
            code |= 1 << (pop_shift + q)
        if code not in codes:
            codes[code] = None
            queue.append(code)
    while queue:
        code = queue.popleft()
        for src_bit, dst_bit, shift, sym, is_read, keep, desert in ops:
            if not code & src_bit:
                continue
            if is_read:
                if (code >> shift) & sym_mask != sym:
                    continue
                base = code
            else:
                base = (code & ~(sym_mask << shift)) | (sym << shift)
            for succ, move in (((base | dst_bit), keep),
                               ((base & ~src_bit) | dst_bit, desert)):
                if succ == code or succ in codes:
                    continue
                if move.desert and src_bit == dst_bit:
                    continue  # variants coincide on self-loops
                if len(codes) >= space_cap:
                    raise CapExceeded(
                        f"reach set exceeds {space_cap} configurations")
                codes[succ] = (code, move)
                queue.append(succ)
    decoded = {code: decode(code) for code in codes}
    for code, link in codes.items():
        c = decoded[code]
        rs.members.add(c)
        rs.order.append(c)
        rs.parents[c] = None if link is None else (decoded[link[0]], link[1])
    return rs


def _bfs(p: Protocol, window, space_cap: int) -> ReachSet:
    rs = ReachSet()
    queue: deque[AbstractConfig] = deque()
    for support in _initial_supports(p):
        c = initial_configuration(p, support)
        if c not in rs.members:
            rs.members.add(c)
            rs.parents[c] = None
            rs.order.append(c)
            queue.append(c)
    while queue:
        c = queue.popleft()
        for move, succ in abstract_successors(p, c, window):
            if succ not in rs.members:
                if len(rs.members) >= space_cap:
                    raise CapExceeded(
                        f"reach set exceeds {space_cap} configurations")
                rs.members.add(succ)
                rs.parents[succ] = (c, move)
                rs.order.append(succ)
                queue.append(succ)
    return rs


def reach_roundless(p: Protocol, state_cap: int = DEFAULT_STATE_CAP,
                    space_cap: int = DEFAULT_SPACE_CAP) -> ReachSet:
    """Full abstract reach set from every initial configuration."""
    if p.flavor != ROUNDLESS:
        raise ValueError("reach_roundless needs a roundless protocol")
    if p.num_states > state_cap:
        raise CapExceeded(f"|Q| = {p.num_states} exceeds cap {state_cap}")
    if p.num_symbols ** p.register_count > space_cap:
        raise CapExceeded("register valuation space exceeds cap")
    return _bfs_roundless(p, space_cap)


def reach_roundbased_capped(p: Protocol, max_round: int,
                            state_cap: int = DEFAULT_STATE_CAP,
                            space_cap: int = DEFAULT_SPACE_CAP) -> ReachSet:
    """Reach set restricted to moves with effect on rounds <= max_round."""
    if p.flavor != ROUNDBASED:
        raise ValueError("reach_roundbased_capped needs a round-based protocol")
    if p.num_states > state_cap:
        raise CapExceeded(f"|Q| = {p.num_states} exceeds cap {state_cap}")
    return _bfs(p, (0, max_round), space_cap)


def default_round_cap(p: Protocol, psi) -> int:
    """Heuristic oracle round cap: (v+1) * (M+2) + 2 for constraint constant M.

    Deep enough for every desk-scale example; nothing deeper is claimed.
    """
    return (int(p.visibility or 0) + 1) * (max_constant(psi) + 2) + 2


def oracle_prp(p: Protocol, constraint, max_round: int | None = None,
               state_cap: int = DEFAULT_STATE_CAP,
               space_cap: int = DEFAULT_SPACE_CAP) -> Verdict:
    """Decide a presence reachability instance by exhaustive search.

    For round-based protocols the verdict is relative to executions whose
    moves affect rounds <= max_round only (positives are exact; a negative
    means no witness within the cap).
    """
    if p.flavor == ROUNDLESS:
        rs = reach_roundless(p, state_cap, space_cap)
        sat = lambda c: eval_roundless(c, constraint)
        stats = {"members": len(rs.members)}
    else:
        if max_round is None:
            max_round = default_round_cap(p, constraint)
        rs = reach_roundbased_capped(p, max_round, state_cap, space_cap)
        bound = max_round + 1  # increments at max_round-1 touch max_round
        sat = lambda c: eval_roundbased(p, c, constraint, active_bound=bound)
        stats = {"members": len(rs.members), "max_round": max_round}
    for c in rs.order:
        if sat(c):
            wit = rs.witness(c)
            final = replay(p, wit, ABSTRACT)
            if final != c or not sat(final):
                raise AssertionError("oracle witness failed validation")
            return Verdict(POSITIVE, "oracle", wit, stats)
    return Verdict(NEGATIVE, "oracle", None, stats)
