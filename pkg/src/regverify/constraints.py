"""Presence-constraint languages: parsing, evaluation, decompositions.

Roundless constraints are Boolean trees over ``pop(q)`` and ``reg(j, a)``
atoms.  Round-based constraints are Boolean trees whose leaves are atomic
presence constraints (APCs): closed propositions, or singly-quantified
propositions ``exists k . prop`` / ``forall k . prop`` where the proposition
is a Boolean tree over ``pop(q, t)`` and ``reg(j, t, a)`` atoms with terms
``m`` or ``k+m``.  Nested quantification is rejected.

Quantifiers range over all naturals.  Evaluation checks an explicit prefix of
rounds and handles the infinite all-empty tail analytically: population atoms
are false there, a register contains the initial symbol and nothing else.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import ConstraintSyntaxError, NotDNF
from .model import D0, Protocol
from .semantics import (AbstractConfig, ConcreteConfig, project, reg_get)

MAX_TERM_CONSTANT = 64  # terms are unary-bounded; keep them desk-sized


# --- AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class Pop:
    state: int


@dataclass(frozen=True)
class Reg:
    reg: int
    symbol: int


@dataclass(frozen=True)
class Term:
    has_var: bool
    offset: int


@dataclass(frozen=True)
class PopAt:
    state: int
    term: Term


@dataclass(frozen=True)
class RegAt:
    reg: int
    term: Term
    symbol: int


@dataclass(frozen=True)
class Not:
    child: object


@dataclass(frozen=True)
class And:
    children: tuple


@dataclass(frozen=True)
class Or:
    children: tuple


@dataclass(frozen=True)
class Exists:
    prop: object


@dataclass(frozen=True)
class Forall:
    prop: object


TRUE = And(())
FALSE = Or(())


# --- parsing -------------------------------------------------------------------

def _tokenize(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        out.append(line.split(";", 1)[0])
    text = " ".join(out)
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _read_sexpr(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise ConstraintSyntaxError("unexpected end of input")
    tok = tokens[pos]
    if tok == "(":
        items = []
        pos += 1
        while pos < len(tokens) and tokens[pos] != ")":
            item, pos = _read_sexpr(tokens, pos)
            items.append(item)
        if pos >= len(tokens):
            raise ConstraintSyntaxError("missing closing parenthesis")
        return items, pos + 1
    if tok == ")":
        raise ConstraintSyntaxError("unexpected ')'")
    return tok, pos + 1


def _parse_sexpr(text: str):
    tokens = _tokenize(text)
    if not tokens:
        raise ConstraintSyntaxError("empty constraint")
    expr, pos = _read_sexpr(tokens, 0)
    if pos != len(tokens):
        raise ConstraintSyntaxError("trailing input after constraint")
    return expr


def parse_roundless_constraint(text: str, p: Protocol):
    return _build_roundless(_parse_sexpr(text), p)


def _build_roundless(e, p: Protocol):
    if e == "true":
        return TRUE
    if e == "false":
        return FALSE
    if not isinstance(e, list) or not e:
        raise ConstraintSyntaxError(f"cannot parse {e!r}")
    head = e[0]
    if head == "and":
        return And(tuple(_build_roundless(x, p) for x in e[1:]))
    if head == "or":
        return Or(tuple(_build_roundless(x, p) for x in e[1:]))
    if head == "not":
        if len(e) != 2:
            raise ConstraintSyntaxError("not takes one argument")
        return Not(_build_roundless(e[1], p))
    if head == "pop":
        if len(e) != 2 or not isinstance(e[1], str):
            raise ConstraintSyntaxError("pop takes one state")
        return Pop(p.state_id(e[1]))
    if head == "reg":
        if len(e) != 3:
            raise ConstraintSyntaxError("reg takes register and symbol")
        j = int(e[1])
        if not 1 <= j <= p.register_count:
            raise ConstraintSyntaxError(f"register {j} out of range")
        return Reg(j - 1, p.symbol_id(e[2]))
    raise ConstraintSyntaxError(f"unknown operator {head!r}")


def parse_round_constraint(text: str, p: Protocol):
    return _build_round(_parse_sexpr(text), p, var=None)


def _build_term(e, var: str | None) -> Term:
    if isinstance(e, str):
        try:
            m = int(e)
        except ValueError:
            raise ConstraintSyntaxError(f"bad term {e!r}")
        if m < 0:
            raise ConstraintSyntaxError("negative term constant")
        if m > MAX_TERM_CONSTANT:
            raise ConstraintSyntaxError(
                f"term constant {m} exceeds cap {MAX_TERM_CONSTANT}")
        return Term(False, m)
    if (isinstance(e, list) and len(e) == 3 and e[0] == "+"
            and isinstance(e[1], str)):
        if var is None or e[1] != var:
            raise ConstraintSyntaxError(
                f"free variable {e[1]!r} not bound by a quantifier")
        m = int(e[2])
        if m < 0:
            raise ConstraintSyntaxError("negative term offset")
        if m > MAX_TERM_CONSTANT:
            raise ConstraintSyntaxError(
                f"term offset {m} exceeds cap {MAX_TERM_CONSTANT}")
        return Term(True, m)
    raise ConstraintSyntaxError(f"bad term {e!r}")


def _build_round(e, p: Protocol, var: str | None):
    if e == "true":
        return TRUE
    if e == "false":
        return FALSE
    if not isinstance(e, list) or not e:
        raise ConstraintSyntaxError(f"cannot parse {e!r}")
    head = e[0]
    if head == "and":
        return And(tuple(_build_round(x, p, var) for x in e[1:]))
    if head == "or":
        return Or(tuple(_build_round(x, p, var) for x in e[1:]))
    if head == "not":
        if len(e) != 2:
            raise ConstraintSyntaxError("not takes one argument")
        return Not(_build_round(e[1], p, var))
    if head in ("exists", "forall"):
        if var is not None:
            raise ConstraintSyntaxError("nested quantifiers are not allowed")
        if len(e) != 3 or not isinstance(e[1], str):
            raise ConstraintSyntaxError(f"{head} takes a variable and a body")
        body = _build_round(e[2], p, var=e[1])
        return Exists(body) if head == "exists" else Forall(body)
    if head == "pop":
        if len(e) != 3 or not isinstance(e[1], str):
            raise ConstraintSyntaxError("pop takes a state and a term")
        return PopAt(p.state_id(e[1]), _build_term(e[2], var))
    if head == "reg":
        if len(e) != 4:
            raise ConstraintSyntaxError("reg takes register, term and symbol")
        j = int(e[1])
        if not 1 <= j <= p.register_count:
            raise ConstraintSyntaxError(f"register {j} out of range")
        return RegAt(j - 1, _build_term(e[2], var), p.symbol_id(e[3]))
    raise ConstraintSyntaxError(f"unknown operator {head!r}")


def format_constraint(p: Protocol, node) -> str:
    if isinstance(node, And):
        if not node.children:
            return "true"
        return "(and " + " ".join(format_constraint(p, c)
                                  for c in node.children) + ")"
    if isinstance(node, Or):
        if not node.children:
            return "false"
        return "(or " + " ".join(format_constraint(p, c)
                                 for c in node.children) + ")"
    if isinstance(node, Not):
        return f"(not {format_constraint(p, node.child)})"
    if isinstance(node, Pop):
        return f"(pop {p.state_names[node.state]})"
    if isinstance(node, Reg):
        return f"(reg {node.reg + 1} {p.symbol_names[node.symbol]})"
    if isinstance(node, PopAt):
        return f"(pop {p.state_names[node.state]} {_format_term(node.term)})"
    if isinstance(node, RegAt):
        return (f"(reg {node.reg + 1} {_format_term(node.term)} "
                f"{p.symbol_names[node.symbol]})")
    if isinstance(node, Exists):
        return f"(exists k {format_constraint(p, node.prop)})"
    if isinstance(node, Forall):
        return f"(forall k {format_constraint(p, node.prop)})"
    raise TypeError(f"not a constraint node: {node!r}")


def _format_term(t: Term) -> str:
    return f"(+ k {t.offset})" if t.has_var else str(t.offset)


# --- evaluation ----------------------------------------------------------------

def eval_roundless(c, phi) -> bool:
    """Standard Boolean evaluation over populated states and register values.

    Accepts abstract or concrete configurations; a concrete configuration
    evaluates exactly as its projection does.
    """
    if isinstance(c, ConcreteConfig):
        c = project(c)
    return _eval_rl(c, phi)


def _eval_rl(c: AbstractConfig, node) -> bool:
    if isinstance(node, And):
        return all(_eval_rl(c, x) for x in node.children)
    if isinstance(node, Or):
        return any(_eval_rl(c, x) for x in node.children)
    if isinstance(node, Not):
        return not _eval_rl(c, node.child)
    if isinstance(node, Pop):
        return node.state in c.pop
    if isinstance(node, Reg):
        return c.regs[node.reg] == node.symbol
    raise TypeError(f"not a roundless constraint node: {node!r}")


def term_value(t: Term, k: int | None) -> int:
    if t.has_var:
        if k is None:
            raise ValueError("free variable outside a quantifier")
        return k + t.offset
    return t.offset


def eval_prop_at(p: Protocol, c: AbstractConfig, prop, k: int | None) -> bool:
    """Evaluate a proposition with the quantified variable bound to ``k``."""
    if isinstance(prop, And):
        return all(eval_prop_at(p, c, x, k) for x in prop.children)
    if isinstance(prop, Or):
        return any(eval_prop_at(p, c, x, k) for x in prop.children)
    if isinstance(prop, Not):
        return not eval_prop_at(p, c, prop.child, k)
    if isinstance(prop, PopAt):
        return (prop.state, term_value(prop.term, k)) in c.pop
    if isinstance(prop, RegAt):
        rnd = term_value(prop.term, k)
        return reg_get(p, c.regs, (rnd, prop.reg)) == prop.symbol
    raise TypeError(f"not a proposition node: {prop!r}")


def tail_eval_prop(prop) -> bool:
    """Evaluate a proposition on the all-empty tail of rounds.

    Populated atoms are false, a register contains the initial symbol and
    nothing else; total for every proposition.  Intended for propositions
    whose atoms all carry the bound variable (constant-round atoms do not
    live on the tail; see _tail_eval_in for mixed propositions).
    """
    if isinstance(prop, And):
        return all(tail_eval_prop(x) for x in prop.children)
    if isinstance(prop, Or):
        return any(tail_eval_prop(x) for x in prop.children)
    if isinstance(prop, Not):
        return not tail_eval_prop(prop.child)
    if isinstance(prop, PopAt):
        return False
    if isinstance(prop, RegAt):
        return prop.symbol == D0
    raise TypeError(f"not a proposition node: {prop!r}")


def _tail_eval_in(p: Protocol, c: AbstractConfig, prop) -> bool:
    """Tail evaluation against a configuration: atoms carrying the bound
    variable reference arbitrarily deep, hence empty, rounds; constant-round
    atoms keep their actual value."""
    if isinstance(prop, And):
        return all(_tail_eval_in(p, c, x) for x in prop.children)
    if isinstance(prop, Or):
        return any(_tail_eval_in(p, c, x) for x in prop.children)
    if isinstance(prop, Not):
        return not _tail_eval_in(p, c, prop.child)
    if isinstance(prop, PopAt):
        if prop.term.has_var:
            return False
        return (prop.state, prop.term.offset) in c.pop
    if isinstance(prop, RegAt):
        if prop.term.has_var:
            return prop.symbol == D0
        return reg_get(p, c.regs, (prop.term.offset, prop.reg)) == prop.symbol
    raise TypeError(f"not a proposition node: {prop!r}")


def max_constant(psi) -> int:
    """Largest integer constant appearing in the constraint's terms."""
    if isinstance(psi, (And, Or)):
        return max((max_constant(x) for x in psi.children), default=0)
    if isinstance(psi, Not):
        return max_constant(psi.child)
    if isinstance(psi, (Exists, Forall)):
        return max_constant(psi.prop)
    if isinstance(psi, (PopAt, RegAt)):
        return psi.term.offset
    return 0


def config_active_bound(p: Protocol, c: AbstractConfig) -> int:
    """Smallest bound beyond which the configuration is all-empty."""
    rounds = [k for _, k in c.pop]
    rounds.extend(k for (k, _), _ in c.regs)
    return max(rounds, default=0)


def eval_roundbased(p: Protocol, c: AbstractConfig, psi,
                    active_bound: int | None = None) -> bool:
    """Evaluate a round-based presence constraint on a configuration.

    ``active_bound`` must dominate every populated or written round of ``c``;
    it defaults to the configuration's own active bound.  Quantifiers range
    over all naturals: rounds up to ``active_bound + M`` are checked
    explicitly and the all-empty tail analytically.
    """
    if active_bound is None:
        active_bound = config_active_bound(p, c)
    horizon = active_bound + max_constant(psi)
    return _eval_rb(p, c, psi, horizon)


def _eval_rb(p: Protocol, c, psi, horizon: int) -> bool:
    if isinstance(psi, And):
        return all(_eval_rb(p, c, x, horizon) for x in psi.children)
    if isinstance(psi, Or):
        return any(_eval_rb(p, c, x, horizon) for x in psi.children)
    if isinstance(psi, Not):
        return not _eval_rb(p, c, psi.child, horizon)
    if isinstance(psi, Exists):
        return (any(eval_prop_at(p, c, psi.prop, k)
                    for k in range(horizon + 1))
                or _tail_eval_in(p, c, psi.prop))
    if isinstance(psi, Forall):
        return (all(eval_prop_at(p, c, psi.prop, k)
                    for k in range(horizon + 1))
                and _tail_eval_in(p, c, psi.prop))
    # closed proposition or bare atom
    return eval_prop_at(p, c, psi, None)


def is_roundless_constraint(node) -> bool:
    if isinstance(node, (And, Or)):
        return all(is_roundless_constraint(x) for x in node.children)
    if isinstance(node, Not):
        return is_roundless_constraint(node.child)
    return isinstance(node, (Pop, Reg))


# --- DNF clauses ----------------------------------------------------------------

@dataclass(frozen=True)
class ClauseDecomposition:
    """One DNF clause, read as final-configuration obligations.

    q_plus    states required populated;
    q_minus   states required empty;
    d_ok      per register, the symbols the clause allows it to hold;
    satisfiable  false when q_plus meets q_minus or some d_ok is empty.
    """

    q_plus: frozenset
    q_minus: frozenset
    d_ok: tuple
    satisfiable: bool

    def eval(self, S: frozenset, regs: tuple) -> bool:
        return (self.q_plus <= S
                and not (self.q_minus & S)
                and all(regs[j] in ok for j, ok in enumerate(self.d_ok)))


def _clause_literals(clause) -> list:
    if isinstance(clause, And):
        out = []
        for x in clause.children:
            out.extend(_clause_literals(x))
        return out
    if isinstance(clause, (Pop, Reg)):
        return [(clause, True)]
    if isinstance(clause, Not) and isinstance(clause.child, (Pop, Reg)):
        return [(clause.child, False)]
    raise NotDNF(f"not a DNF literal/conjunction: {clause!r}")


def dnf_clauses(p: Protocol, phi) -> list[ClauseDecomposition]:
    """Decompose a DNF constraint into per-clause obligations.

    Rejects constraints not syntactically in disjunctive normal form;
    contradictory clauses come back flagged unsatisfiable rather than
    being dropped.
    """
    if isinstance(phi, Or):
        clauses = list(phi.children)
    else:
        clauses = [phi]
    out = []
    for clause in clauses:
        lits = _clause_literals(clause)
        q_plus, q_minus = set(), set()
        d_ok = [set(range(p.num_symbols)) for _ in range(p.register_count)]
        for atom, positive in lits:
            if isinstance(atom, Pop):
                (q_plus if positive else q_minus).add(atom.state)
            else:
                if positive:
                    d_ok[atom.reg] &= {atom.symbol}
                else:
                    d_ok[atom.reg] -= {atom.symbol}
        sat = not (q_plus & q_minus) and all(d_ok)
        out.append(ClauseDecomposition(frozenset(q_plus), frozenset(q_minus),
                                       tuple(frozenset(s) for s in d_ok),
                                       sat))
    return out


def to_dnf(phi, max_clauses: int = 4096):
    """Distribute a roundless constraint into DNF, with a size guard."""
    def nnf(node, neg):
        if isinstance(node, Not):
            return nnf(node.child, not neg)
        if isinstance(node, And):
            kids = tuple(nnf(x, neg) for x in node.children)
            return Or(kids) if neg else And(kids)
        if isinstance(node, Or):
            kids = tuple(nnf(x, neg) for x in node.children)
            return And(kids) if neg else Or(kids)
        return Not(node) if neg else node

    def clauses_of(node) -> list[tuple]:
        if isinstance(node, Or):
            out = []
            for x in node.children:
                out.extend(clauses_of(x))
                if len(out) > max_clauses:
                    raise NotDNF("DNF distribution exceeds the size guard")
            return out
        if isinstance(node, And):
            parts = [clauses_of(x) for x in node.children]
            out = [()]
            for alt in parts:
                out = [c + d for c in out for d in alt]
                if len(out) > max_clauses:
                    raise NotDNF("DNF distribution exceeds the size guard")
            return out
        return [(node,)]

    flat = clauses_of(nnf(phi, False))
    return Or(tuple(And(c) for c in flat))


def cover_constraint(p: Protocol, state: int):
    """COVER as a presence constraint: the state is populated."""
    if p.flavor == "roundless":
        return Pop(state)
    return Exists(PopAt(state, Term(True, 0)))


def target_constraint(p: Protocol, state: int):
    """TARGET as a presence constraint: every other state is empty."""
    others = [q for q in range(p.num_states) if q != state]
    if p.flavor == "roundless":
        return And(tuple(Not(Pop(q)) for q in others))
    return Forall(And(tuple(Not(PopAt(q, Term(True, 0))) for q in others)))


# --- prime implicants ------------------------------------------------------------

def prime_implicants(leaves: list, evaluate) -> list[dict]:
    """Minimal partial truth assignments over ``leaves`` forcing a formula true.

    ``evaluate`` maps a complete assignment (dict leaf -> bool) to a Boolean.
    Candidates are produced by ascending size, ties in leaf declaration order;
    supersets of an already-found implicant are skipped.  An empty result
    means the formula is unsatisfiable.
    """
    n = len(leaves)
    found: list[dict] = []
    for r in range(n + 1):
        for combo in itertools.combinations(range(n), r):
            chosen = [leaves[i] for i in combo]
            for bits in itertools.product((True, False), repeat=r):
                partial = dict(zip(chosen, bits))
                if any(all(l in partial and partial[l] == v
                           for l, v in f.items()) for f in found):
                    continue
                rest = [l for l in leaves if l not in partial]
                ok = True
                for completion in itertools.product((True, False),
                                                    repeat=len(rest)):
                    full = dict(partial)
                    full.update(zip(rest, completion))
                    if not evaluate(full):
                        ok = False
                        break
                if ok:
                    found.append(partial)
    return found


def _eval_with_assignment(node, assign: dict) -> bool:
    if node in assign:  # leaves may themselves be compound closed subtrees
        return assign[node]
    if isinstance(node, And):
        return all(_eval_with_assignment(x, assign) for x in node.children)
    if isinstance(node, Or):
        return any(_eval_with_assignment(x, assign) for x in node.children)
    if isinstance(node, Not):
        return not _eval_with_assignment(node.child, assign)
    raise KeyError(f"unassigned leaf {node!r}")


def _collect_leaves(node, is_leaf, out: list) -> None:
    if is_leaf(node):
        if node not in out:
            out.append(node)
        return
    if isinstance(node, (And, Or)):
        for x in node.children:
            _collect_leaves(x, is_leaf, out)
        return
    if isinstance(node, Not):
        _collect_leaves(node.child, is_leaf, out)
        return
    raise TypeError(f"unexpected node {node!r}")


def prop_atoms(prop) -> list:
    """The distinct atoms of a proposition, in declaration order."""
    out: list = []
    _collect_leaves(prop, lambda n: isinstance(n, (PopAt, RegAt, Pop, Reg)),
                    out)
    return out


def forcing_literal_sets(prop) -> list[dict]:
    """Minimal atom assignments under which the proposition is always true."""
    atoms = prop_atoms(prop)
    return prime_implicants(atoms, lambda a: _eval_with_assignment(prop, a))


# --- closed literals and APC decomposition ----------------------------------------

@dataclass(frozen=True)
class ClosedLiteral:
    """A ground fact about one round: (not) populated / register contents."""

    kind: str          # "pop" or "reg"
    rnd: int
    state: int = -1
    reg: int = -1
    symbol: int = -1
    positive: bool = True

    def holds_in_tail(self) -> bool:
        if self.kind == "pop":
            return not self.positive
        return (self.symbol == D0) == self.positive


def literal_from_atom(atom, value: bool, k: int | None) -> ClosedLiteral:
    if isinstance(atom, PopAt):
        return ClosedLiteral("pop", term_value(atom.term, k),
                             state=atom.state, positive=value)
    if isinstance(atom, RegAt):
        return ClosedLiteral("reg", term_value(atom.term, k), reg=atom.reg,
                             symbol=atom.symbol, positive=value)
    raise TypeError(f"not a round-based atom: {atom!r}")


def is_closed_prop(node) -> bool:
    if isinstance(node, (And, Or)):
        return all(is_closed_prop(x) for x in node.children)
    if isinstance(node, Not):
        return is_closed_prop(node.child)
    if isinstance(node, (PopAt, RegAt)):
        return not node.term.has_var
    return False


@dataclass(frozen=True)
class ApcCandidate:
    """One way to make the whole constraint true.

    closed       ground literals to check at their rounds;
    existential  propositions that must hold at some round;
    universal    propositions that must hold at every round.
    """

    closed: frozenset
    existential: frozenset
    universal: frozenset


def apc_leaves(psi) -> list:
    """Atomic presence constraints: quantifiers and maximal closed subtrees."""
    def is_leaf(node):
        return isinstance(node, (Exists, Forall)) or is_closed_prop(node)

    out: list = []
    _collect_leaves(psi, is_leaf, out)
    return out


def closed_atoms_of(prop) -> list:
    """Constant-round atoms of a (possibly quantified-body) proposition."""
    out: list = []

    def walk(node):
        if isinstance(node, (And, Or)):
            for x in node.children:
                walk(x)
        elif isinstance(node, Not):
            walk(node.child)
        elif isinstance(node, (PopAt, RegAt)):
            if not node.term.has_var and node not in out:
                out.append(node)
        else:
            raise TypeError(f"not a proposition node: {node!r}")

    walk(prop)
    return out


def substitute_atoms(prop, assign: dict):
    """Replace assigned atoms by constant true/false nodes."""
    if isinstance(prop, And):
        return And(tuple(substitute_atoms(x, assign) for x in prop.children))
    if isinstance(prop, Or):
        return Or(tuple(substitute_atoms(x, assign) for x in prop.children))
    if isinstance(prop, Not):
        return Not(substitute_atoms(prop.child, assign))
    if prop in assign:
        return TRUE if assign[prop] else FALSE
    return prop


def _constant_value(prop) -> bool | None:
    """The proposition's truth value when it no longer contains atoms."""
    if prop_atoms(prop):
        return None
    return _eval_with_assignment(prop, {})


def _quantified_entries(apc, value: bool) -> list[tuple[frozenset, str, object]]:
    """Resolve a quantified APC's constant atoms into checked literals.

    Returns choices of (ground literals, "E"/"U"/"none"/"dead", residual
    proposition): each constant-round atom inside the body is guessed a truth
    value, recorded as a literal to check at its round, and replaced in the
    body.  A body that collapses to a constant either discharges the APC or
    kills the branch.
    """
    if isinstance(apc, Exists):
        role = "E" if value else "U"
    else:
        role = "U" if value else "E"
    body = apc.prop if value else Not(apc.prop)
    catoms = closed_atoms_of(body)
    out = []
    for bits in itertools.product((True, False), repeat=len(catoms)):
        assign = dict(zip(catoms, bits))
        lits = frozenset(literal_from_atom(a, v, None)
                         for a, v in assign.items())
        residual = substitute_atoms(body, assign)
        const = _constant_value(residual)
        if const is None:
            out.append((lits, role, residual))
        elif const:
            out.append((lits, "none", None))  # APC discharged by the guess
        else:
            out.append((lits, "dead", None))
    return out


def decompose_apcs(psi) -> list[ApcCandidate]:
    """Enumerate candidate obligation sets making the constraint true.

    Every candidate, when all its members hold of a configuration, makes the
    constraint true regardless of the remaining atomic presence constraints.
    Constant-round atoms are pre-resolved into ground literals everywhere,
    so existential and universal obligations only mention the bound round
    variable.  Minimal candidates come first.  An empty list means no
    configuration can satisfy the constraint.
    """
    leaves = apc_leaves(psi)
    implicants = prime_implicants(
        leaves, lambda a: _eval_with_assignment(psi, a))
    candidates: list[ApcCandidate] = []
    for imp in implicants:
        # each APC occurrence contributes branch options:
        # (literals, extra existential or universal entry or nothing)
        option_lists: list[list[tuple[frozenset, str, object]]] = []
        feasible = True
        for apc, value in imp.items():
            if isinstance(apc, (Exists, Forall)):
                options = [o for o in _quantified_entries(apc, value)
                           if o[1] != "dead"]
            else:
                target = apc if value else Not(apc)
                options = []
                for assign in forcing_literal_sets(target):
                    lits = frozenset(literal_from_atom(a, v, None)
                                     for a, v in assign.items())
                    options.append((lits, "none", None))
            if not options:
                feasible = False
                break
            option_lists.append(options)
        if not feasible:
            continue
        for pick in itertools.product(*option_lists):
            closed: frozenset = frozenset()
            exist, univ = [], []
            for lits, role, residual in pick:
                closed = closed | lits
                if role == "E":
                    exist.append(residual)
                elif role == "U":
                    univ.append(residual)
            cand = ApcCandidate(closed, frozenset(exist), frozenset(univ))
            if cand not in candidates:
                candidates.append(cand)
    return candidates
