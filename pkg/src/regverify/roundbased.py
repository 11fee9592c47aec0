"""Round-based presence reachability: memoized round-by-round search.

The nondeterministic round-by-round procedure guesses, per round k, a bridge
footprint on rounds [k-v, k] extending the carried footprint, updates the
obligation sets (universal propositions checked every round, existentials
fired at a guessed round, ground literals checked when their round comes),
and stops as soon as the remaining obligations hold on the untouched tail.

Here every guess point is branch-enumerated depth-first: candidate obligation
sets, the populated initial set, bridge footprints (restricted to
interleavings normal-form executions produce), universal literal sets and
existential firing rounds.  Visited (footprint, obligations) signatures are
memoized round-relative, which makes the state space finite; a work budget
caps the search, returning "unknown" rather than ever a wrong answer.
On acceptance the footprint chain is glued into a replay-validated witness.
"""

from __future__ import annotations

import functools
import itertools
import os
from dataclasses import dataclass

from .constraints import (And, ApcCandidate, ClosedLiteral, Not, Or, PopAt,
                          RegAt, Term, decompose_apcs, eval_roundbased,
                          forcing_literal_sets, literal_from_atom,
                          max_constant, tail_eval_prop)
from .errors import RegverifyError, ReplayFailure
from .footprints import (Footprint, LocalConfig, combine_footprints,
                         default_step_cap, empty_footprint, extend_footprint,
                         footprint_configs, packed_layout, project_footprint)
from .model import D0, INC, ROUNDBASED, Protocol
from .semantics import ABSTRACT, Execution, Move, replay
from .verdict import NEGATIVE, POSITIVE, UNKNOWN, Verdict

DEFAULT_BUDGET = 3_000_000


class _BudgetExceeded(RegverifyError):
    pass


def _instantiate(prop, k: int):
    """Close a proposition by substituting round k for its free variable."""
    if isinstance(prop, And):
        return And(tuple(_instantiate(x, k) for x in prop.children))
    if isinstance(prop, Or):
        return Or(tuple(_instantiate(x, k) for x in prop.children))
    if isinstance(prop, Not):
        return Not(_instantiate(prop.child, k))
    if isinstance(prop, PopAt):
        t = prop.term
        return PopAt(prop.state, Term(False, k + t.offset) if t.has_var else t)
    if isinstance(prop, RegAt):
        t = prop.term
        return RegAt(prop.reg, Term(False, k + t.offset) if t.has_var else t,
                     prop.symbol)
    raise TypeError(f"not a proposition: {prop!r}")


@functools.lru_cache(maxsize=None)
def _literal_options_base(prop) -> tuple:
    """Minimal forcing literal sets with rounds as offsets from the bound var.

    The proposition's atoms all carry the variable (constant atoms were
    pre-resolved during decomposition), so options at round k are the base
    options shifted by k.
    """
    inst = _instantiate(prop, 0)
    out = []
    for assign in forcing_literal_sets(inst):
        out.append(frozenset(literal_from_atom(a, v, None)
                             for a, v in assign.items()))
    return tuple(out)


def _literal_options(prop, k: int) -> list[frozenset]:
    """Minimal ground literal sets forcing the proposition at round k."""
    return [frozenset(_shift_term_round(lit, k) for lit in opt)
            for opt in _literal_options_base(prop)]


def _literal_on_stop_tail(lit: ClosedLiteral, pop_next: frozenset,
                          k: int) -> bool:
    """Truth of a pending literal (round > k) if the execution stops at k.

    Round k+1 may already hold processes moved up by deserting increments;
    rounds beyond are empty and registers above round k stay initial.
    """
    if lit.kind == "pop":
        populated = lit.rnd == k + 1 and (lit.state, lit.rnd) in pop_next
        return populated == lit.positive
    return (lit.symbol == D0) == lit.positive  # registers above k hold d0


def _prop_on_stop_tail(p: Protocol, prop, rnd: int, pop_next: frozenset,
                       k: int) -> bool:
    """Truth of a universal proposition instantiated at rnd > k at stop time."""
    inst = _instantiate(prop, rnd)

    def ev(node):
        if isinstance(node, And):
            return all(ev(x) for x in node.children)
        if isinstance(node, Or):
            return any(ev(x) for x in node.children)
        if isinstance(node, Not):
            return not ev(node.child)
        if isinstance(node, PopAt):
            r = node.term.offset
            return r == k + 1 and (node.state, r) in pop_next
        if isinstance(node, RegAt):
            return node.symbol == D0
        raise TypeError(f"not a proposition: {node!r}")

    return ev(inst)


@dataclass(frozen=True)
class _Node:
    k: int
    tau: Footprint            # on [k-v, k-1]
    exist: frozenset          # pending existential propositions
    closed: frozenset         # pending ground literals, rounds >= k


def _shift_term_round(lit: ClosedLiteral, delta: int) -> ClosedLiteral:
    return ClosedLiteral(lit.kind, lit.rnd + delta, state=lit.state,
                         reg=lit.reg, symbol=lit.symbol,
                         positive=lit.positive)


def _shift_footprint(fp: Footprint, delta: int) -> tuple:
    start = (fp.lo + delta, fp.hi + delta,
             frozenset((q, r + delta) for q, r in fp.start.pop),
             frozenset(((r + delta, j), s) for (r, j), s in fp.start.regs))
    steps = tuple((m.trans, m.rnd + delta, m.desert) for m in fp.steps)
    return (start, steps)


def _onestep_branches(universal: frozenset, exist: frozenset,
                      closed: frozenset, k: int):
    """All (remaining existentials, literal additions) choices at round k.

    Universal propositions contribute one forcing literal set each (choice
    branched); each pending existential either fires here with a forcing
    literal set or stays pending.
    """
    uni_choice_lists = []
    for u in sorted(universal, key=repr):
        opts = _literal_options(u, k)
        if not opts:
            return  # this universal cannot hold at round k on any branch
        uni_choice_lists.append(opts)
    ex_list = sorted(exist, key=repr)
    ex_choice_lists = []
    for e in ex_list:
        fire_opts = [(True, lits) for lits in _literal_options(e, k)]
        ex_choice_lists.append(fire_opts + [(False, frozenset())])
    for uni_pick in itertools.product(*uni_choice_lists):
        for ex_pick in itertools.product(*ex_choice_lists):
            additions = frozenset().union(*uni_pick) if uni_pick else \
                frozenset()
            remaining = set(exist)
            for e, (fired, lits) in zip(ex_list, ex_pick):
                if fired:
                    additions = additions | lits
                    remaining.discard(e)
            yield frozenset(remaining), closed | additions


def _mentions_registers(cand: ApcCandidate) -> bool:
    def prop_has_reg(prop) -> bool:
        if isinstance(prop, (And, Or)):
            return any(prop_has_reg(x) for x in prop.children)
        if isinstance(prop, Not):
            return prop_has_reg(prop.child)
        return isinstance(prop, RegAt)

    return (any(lit.kind == "reg" for lit in cand.closed)
            or any(prop_has_reg(x)
                   for x in cand.existential | cand.universal))


def _population_monotone(cand: ApcCandidate) -> bool:
    """Whether every population atom in the obligations occurs positively.

    Then desertion never helps: making every step of a witness keep its
    source leaves the register trajectory untouched and only grows the
    populated sets, so a desert-free witness exists whenever any does, and
    the search may drop deserting moves altogether.
    """
    def positive_only(prop, polarity: bool) -> bool:
        if isinstance(prop, (And, Or)):
            return all(positive_only(x, polarity) for x in prop.children)
        if isinstance(prop, Not):
            return positive_only(prop.child, not polarity)
        if isinstance(prop, PopAt):
            return polarity
        return True  # register atoms survive the flip either way

    if any(lit.kind == "pop" and not lit.positive for lit in cand.closed):
        return False
    return all(positive_only(x, True)
               for x in cand.existential | cand.universal)


def _root_branches(p: Protocol, psi) -> list[tuple]:
    """Independent search roots: obligation candidate x populated initials."""
    candidates = decompose_apcs(psi)
    initial_sets = []
    q0 = sorted(p.initial_states)
    for r in range(1, len(q0) + 1):
        initial_sets.extend(frozenset(c)
                            for c in itertools.combinations(q0, r))
    return [(cand, init_set) for cand in candidates
            for init_set in initial_sets]


def _run_branch(args) -> tuple:
    """One root branch with its own budget; picklable for process pools."""
    p, cand, init_set, v, step_cap, budget = args
    work = {"ticks": 0, "nodes": 0}

    def tick(n: int = 1):
        work["ticks"] += n
        if work["ticks"] > budget:
            raise _BudgetExceeded()

    try:
        hit = _search(p, cand, init_set, v, step_cap, tick, work)
    except _BudgetExceeded:
        return ("unknown", None, work)
    if hit is not None:
        return ("positive", hit, work)
    return ("negative", None, work)


def _validated(p: Protocol, psi, exec_: Execution, work: dict) -> Verdict:
    final = replay(p, exec_, ABSTRACT)
    bound = max_constant(psi) + max(
        [r for _, r in final.pop] + [r for (r, _), _ in final.regs]
        + [0]) + 1
    if not eval_roundbased(p, final, psi, active_bound=bound):
        raise ReplayFailure(
            "internal error: witness does not satisfy the constraint")
    return Verdict(POSITIVE, "rb-search", exec_, dict(work))


def solve_prp_roundbased(p: Protocol, psi, budget: int | None = None,
                         step_cap: int | None = None,
                         parallel: bool = False) -> Verdict:
    """Decide round-based presence reachability.

    Positive verdicts carry a glued, replay-validated witness execution.
    A negative verdict means the memoized search space was exhausted; when
    the work budget runs out first the verdict is "unknown", never wrong.
    Root branches are independent; ``parallel`` fans them over worker
    processes, each with its own budget and memo table.
    """
    if p.flavor != ROUNDBASED:
        raise ValueError("solve_prp_roundbased needs a round-based protocol")
    if budget is None:
        budget = int(os.environ.get("REGVERIFY_BUDGET", DEFAULT_BUDGET))
    if step_cap is None:
        step_cap = default_step_cap(p)
    v = max(p.visibility or 0, 1)
    branches = _root_branches(p, psi)

    if parallel and len(branches) > 1:
        import multiprocessing

        jobs = [(p, cand, init_set, v, step_cap, budget)
                for cand, init_set in branches]
        with multiprocessing.Pool(min(len(jobs), os.cpu_count() or 2)) as pl:
            results = pl.map(_run_branch, jobs)
        work = {"ticks": sum(w["ticks"] for _, _, w in results),
                "nodes": sum(w["nodes"] for _, _, w in results),
                "branches": len(jobs)}
        for answer, hit, _ in results:
            if answer == "positive":
                return _validated(p, psi, hit, work)
        if any(answer == "unknown" for answer, _, _ in results):
            return Verdict(UNKNOWN, "rb-search", None, work)
        return Verdict(NEGATIVE, "rb-search", None, work)

    work = {"ticks": 0, "nodes": 0}

    def tick(n: int = 1):
        work["ticks"] += n
        if work["ticks"] > budget:
            raise _BudgetExceeded()

    exhausted_cleanly = True
    for cand, init_set in branches:
        try:
            hit = _search(p, cand, init_set, v, step_cap, tick, work)
        except _BudgetExceeded:
            exhausted_cleanly = False
            continue
        if hit is not None:
            return _validated(p, psi, hit, dict(work))
    answer = NEGATIVE if exhausted_cleanly else UNKNOWN
    return Verdict(answer, "rb-search", None, dict(work))


def _search(p: Protocol, cand: ApcCandidate, init_set: frozenset,
            v: int, step_cap: int, tick, work) -> Execution | None:
    universal = cand.universal
    # when no obligation mentions a register, final register values are
    # irrelevant: writes that are never read and neither populate nor desert
    # can be stripped from any witness, so schedules carrying them are pruned
    strict_writes = not _mentions_registers(cand)
    # population-monotone obligations never need deserting moves
    no_desert = _population_monotone(cand)
    root = _Node(0, empty_footprint(-v, -1), cand.existential, cand.closed)
    visited: set = set()
    # each stack entry: (node, iterator over (T, child-node-or-accept))
    stack = [(root, _expand(p, root, universal, init_set, v, step_cap, tick,
                            strict_writes, no_desert))]
    chain: list[Footprint] = []
    work["nodes"] += 1
    while stack:
        node, it = stack[-1]
        advanced = False
        for T, sig, child in it:
            if child is None:  # accepted at this round
                chain.append(T)
                return _glue_chain(p, chain, v)
            if sig in visited:
                continue
            visited.add(sig)
            work["nodes"] += 1
            chain.append(T)
            stack.append((child, _expand(p, child, universal, init_set, v,
                                         step_cap, tick, strict_writes,
                                         no_desert)))
            advanced = True
            break
        if not advanced:
            stack.pop()
            if chain:
                chain.pop()
    return None


def _glue_chain(p: Protocol, chain: list[Footprint], v: int) -> Execution:
    """Glue the accepted bridge-footprint chain into one execution."""
    taus = [project_footprint(p, T, k - v + 1, k)
            for k, T in enumerate(chain)]
    bridges = [project_footprint(p, chain[k + 1], k - v + 1, k + 1)
               for k in range(len(chain) - 1)]
    return combine_footprints(p, taus, bridges)


# bridge extensions depend only on the carried footprint's round-relative
# shape (plus the initial set while round 0 is in the window), never on the
# obligations, so their edge lists are shared across rounds, search roots and
# repeated solver calls on one protocol
_EXPAND_CACHE: dict = {"prefix": None, "edges": {}}
_EXPAND_CACHE_LIMIT = 50_000


def _edges_for(p: Protocol, node: _Node, init_set: frozenset, v: int,
               step_cap: int, tick, no_desert: bool):
    """Extension edges for a node's carried footprint, cached by shape.

    Returns (k0, edges): the round the edges were materialized at and, per
    bridge footprint, (moves, visible moves, packed last local configuration,
    unread-write mask, states increments push one round up).  A consumer at
    round k shifts the moves by k - k0.
    """
    k = node.k
    prefix = (p, v, step_cap)
    if _EXPAND_CACHE["prefix"] != prefix \
            or len(_EXPAND_CACHE["edges"]) > _EXPAND_CACHE_LIMIT:
        _EXPAND_CACHE["prefix"] = prefix
        _EXPAND_CACHE["edges"] = {}
    key = (min(k, v), init_set if k == 0 else None, no_desert,
           _shift_footprint(node.tau, -k))
    cached = _EXPAND_CACHE["edges"].get(key)
    if cached is not None:
        tick(len(cached[1]) or 1)
        return cached
    edges = []
    for T, guard, packed, vis in extend_footprint(
            p, node.tau, init_set, k, step_cap, use_guard=True, tick=tick,
            no_desert=no_desert):
        # the None slot lazily holds the round-relative child footprint
        # shape, shared by every later use of this edge
        edges.append([T.steps, vis, packed, guard[2], None])
    value = (k, edges)
    _EXPAND_CACHE["edges"][key] = value
    return value


def _expand(p: Protocol, node: _Node, universal: frozenset,
            init_set: frozenset, v: int, step_cap: int, tick,
            strict_writes: bool = False, no_desert: bool = False):
    """Children of a search node: (bridge footprint, sig, next node or None).

    None as the node signals acceptance with that footprint.  Per-branch
    obligations are computed once per node; per footprint only the current
    round's literal checks and the stop test remain.  With ``strict_writes``
    a footprint whose bottom-round register leaves the window with an unread
    write is dropped, and acceptance requires every write justified.
    """
    k = node.k
    base, nq, rc, sym_bits = packed_layout(p, k)
    sym_mask = (1 << sym_bits) - 1
    pop_row = (k - base) * nq
    reg_row = (k - base) * rc
    exit_mask = 0
    if k - v >= 0:  # register slots of the round about to leave the window
        for j in range(rc):
            exit_mask |= 1 << (j * sym_bits)

    # branch precomputation: (remaining E, literals to check now as packed
    # probes, pending literals with rounds > k, relative pending for memo)
    branches = []
    for remaining_exist, closed2 in _onestep_branches(
            universal, node.exist, node.closed, k):
        now_probes = []
        still_pending = []
        ok = True
        for lit in closed2:
            if lit.rnd < k:
                ok = False  # stale literal; cannot happen, guard anyway
                break
            if lit.rnd == k:
                if lit.kind == "pop":
                    now_probes.append(
                        ("pop", 1 << (pop_row + lit.state), lit.positive))
                else:
                    now_probes.append(
                        ("reg", (reg_row + lit.reg) * sym_bits, lit.symbol,
                         lit.positive))
            else:
                still_pending.append(lit)
        if not ok:
            continue
        pending = frozenset(still_pending)
        rel_pending = frozenset(_shift_term_round(l, -k - 1)
                                for l in pending)
        stoppable = not remaining_exist and all(
            tail_eval_prop(u) for u in universal)
        branches.append((remaining_exist, now_probes, pending, rel_pending,
                         stoppable))
    if not branches:
        return

    start_pop = set(node.tau.start.pop)
    if k == 0:
        start_pop |= {(q, 0) for q in init_set}
    start_abs = LocalConfig(k - v, k, frozenset(start_pop),
                            frozenset(node.tau.start.regs))

    k0, edges = _edges_for(p, node, init_set, v, step_cap, tick, no_desert)
    delta = k - k0
    n_branches = len(branches)
    for edge in edges:
        moves0, vis0, packed, unread_writes, rel_tau2 = edge
        if strict_writes and unread_writes & exit_mask:
            continue  # a write nothing can read anymore; strip-equivalent
        tick(n_branches)
        pop_int, regs_int = packed
        pop_next = None
        T = None
        tau2 = None
        for remaining_exist, now_probes, pending, rel_pending, stoppable \
                in branches:
            ok = True
            for probe in now_probes:
                if probe[0] == "pop":
                    if bool(pop_int & probe[1]) != probe[2]:
                        ok = False
                        break
                else:
                    if (((regs_int >> probe[1]) & sym_mask == probe[2])
                            != probe[3]):
                        ok = False
                        break
            if not ok:
                continue
            if T is None:
                steps = moves0 if delta == 0 else tuple(
                    Move(m.trans, m.rnd + delta, m.desert) for m in moves0)
                T = Footprint(start_abs, steps)
            if stoppable and not (strict_writes and unread_writes):
                if pop_next is None:
                    pop_next = frozenset(
                        (m.trans.dest, k + 1) for m in vis0
                        if m.trans.action.kind == INC and m.rnd == k0
                        and m.desert)
                if _test_stop(p, universal, pending, pop_next, k):
                    yield T, None, None
                    continue
            if tau2 is None:
                vis = vis0 if delta == 0 else tuple(
                    Move(m.trans, m.rnd + delta, m.desert) for m in vis0)
                tau2 = Footprint(start_abs.restrict(k - v + 1, k), vis)
                if rel_tau2 is None:
                    rel_tau2 = _shift_footprint(tau2, -k)
                    edge[4] = rel_tau2
            sig = (rel_tau2, remaining_exist, rel_pending)
            yield T, sig, _Node(k + 1, tau2, remaining_exist, pending)


def _test_stop(p: Protocol, universal: frozenset, pending: frozenset,
               pop_next: frozenset, k: int) -> bool:
    """May the execution stop at round k, leaving later rounds untouched?

    Pending literals and universal propositions are evaluated against the
    actual stopped shape: deserting increments may already populate round
    k+1, everything beyond is empty and registers above round k are initial.
    """
    for lit in pending:
        if not _literal_on_stop_tail(lit, pop_next, k):
            return False
    for u in universal:
        if not _prop_on_stop_tail(p, u, k + 1, pop_next, k):
            return False
        if not tail_eval_prop(u):
            return False
    return True
