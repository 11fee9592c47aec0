"""Protocol domain types, textual format, parsing and validation.

A protocol is either *roundless* (one fixed bank of registers) or
*round-based* (a fresh bank per round, processes carrying private round
numbers).  Both flavors share one ``Protocol`` type with a flavor tag.

States and symbols are interned to dense integer ids at parse time; all
solver-internal sets are over ids.  Registers are 1-indexed in the file
format and 0-indexed internally; conversion happens only at parse/print
boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ProtocolSemanticError, ProtocolSyntaxError

ROUNDLESS = "roundless"
ROUNDBASED = "roundbased"

READ = "read"
WRITE = "write"
INC = "inc"


@dataclass(frozen=True)
class Action:
    """One transition label.

    kind       READ, WRITE or INC.
    reg        0-based register index (READ/WRITE), None for INC.
    symbol     symbol id (READ/WRITE), None for INC.
    depth      round-based READ only: read from round k-depth; None otherwise.
    """

    kind: str
    reg: int | None = None
    symbol: int | None = None
    depth: int | None = None


@dataclass(frozen=True)
class Transition:
    source: int
    action: Action
    dest: int


@dataclass(frozen=True)
class Protocol:
    flavor: str
    state_names: tuple[str, ...]
    initial_states: frozenset[int]
    register_count: int
    symbol_names: tuple[str, ...]  # index 0 is the initial symbol d0
    transitions: tuple[Transition, ...]
    visibility: int | None = None  # round-based only
    state_ids: dict = field(default_factory=dict, compare=False, repr=False)
    symbol_ids: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.state_ids.update({n: i for i, n in enumerate(self.state_names)})
        self.symbol_ids.update({n: i for i, n in enumerate(self.symbol_names)})

    @property
    def num_states(self) -> int:
        return len(self.state_names)

    @property
    def num_symbols(self) -> int:
        return len(self.symbol_names)

    def state_id(self, name: str) -> int:
        if name not in self.state_ids:
            raise ProtocolSemanticError(f"unknown state {name!r}")
        return self.state_ids[name]

    def symbol_id(self, name: str) -> int:
        if name not in self.symbol_ids:
            raise ProtocolSemanticError(f"unknown symbol {name!r}")
        return self.symbol_ids[name]

    def size(self) -> int:
        n = (self.num_states + self.num_symbols + len(self.transitions)
             + self.register_count)
        if self.flavor == ROUNDBASED:
            n += self.visibility
        return n


@dataclass(frozen=True)
class Finding:
    """One structural-validation violation, as data."""

    code: str
    message: str


D0 = 0  # the initial symbol always interns to id 0


def is_uninitialized(p: Protocol) -> bool:
    """True iff no transition reads the initial symbol from any round."""
    return not any(t.action.kind == READ and t.action.symbol == D0
                   for t in p.transitions)


def validate(p: Protocol) -> list[Finding]:
    """Check every structural invariant; one finding per violation."""
    out: list[Finding] = []
    if len(set(p.state_names)) != len(p.state_names):
        out.append(Finding("DuplicateState", "state names are not unique"))
    if len(set(p.symbol_names)) != len(p.symbol_names):
        out.append(Finding("DuplicateSymbol", "symbol names are not unique"))
    if not p.symbol_names:
        out.append(Finding("NoInitialSymbol", "alphabet is empty"))
    if p.register_count < 1:
        out.append(Finding("BadRegisterCount",
                           f"register count {p.register_count} < 1"))
    if p.flavor not in (ROUNDLESS, ROUNDBASED):
        out.append(Finding("BadFlavor", f"unknown flavor {p.flavor!r}"))
    if p.flavor == ROUNDBASED and (p.visibility is None or p.visibility < 0):
        out.append(Finding("BadVisibility",
                           f"visibility {p.visibility!r} must be >= 0"))
    if p.flavor == ROUNDLESS and p.visibility is not None:
        out.append(Finding("BadVisibility",
                           "roundless protocol must not set visibility"))
    for q in p.initial_states:
        if not 0 <= q < p.num_states:
            out.append(Finding("UnknownState", f"initial state id {q}"))
    for i, t in enumerate(p.transitions):
        where = f"transition #{i}"
        for q, role in ((t.source, "source"), (t.dest, "destination")):
            if not 0 <= q < p.num_states:
                out.append(Finding("UnknownState", f"{where}: {role} id {q}"))
        a = t.action
        if a.kind not in (READ, WRITE, INC):
            out.append(Finding("BadAction", f"{where}: kind {a.kind!r}"))
            continue
        if a.kind == INC:
            if p.flavor != ROUNDBASED:
                out.append(Finding("BadAction",
                                   f"{where}: inc in roundless protocol"))
            if a.reg is not None or a.symbol is not None or a.depth is not None:
                out.append(Finding("BadAction", f"{where}: inc carries fields"))
            continue
        if a.reg is None or not 0 <= a.reg < p.register_count:
            out.append(Finding("RegisterOutOfRange",
                               f"{where}: register {a.reg}"))
        if a.symbol is None or not 0 <= a.symbol < p.num_symbols:
            out.append(Finding("UnknownSymbol", f"{where}: symbol {a.symbol}"))
        if a.kind == WRITE:
            if a.symbol == D0:
                out.append(Finding("WriteOfInitialSymbol",
                                   f"{where}: write of initial symbol"))
            if a.depth is not None:
                out.append(Finding("BadAction", f"{where}: write with depth"))
        if a.kind == READ:
            if p.flavor == ROUNDBASED:
                if a.depth is None or not 0 <= a.depth <= (p.visibility or 0):
                    out.append(Finding("DepthOutOfRange",
                                       f"{where}: depth {a.depth}"))
            elif a.depth is not None:
                out.append(Finding("BadAction",
                                   f"{where}: roundless read with depth"))
    return out


# --- textual format ---------------------------------------------------------

_HEADER_KEYS = ("flavor", "states", "initial", "registers", "alphabet",
                "visibility")


def _split_tokens(s: str) -> list[str]:
    return s.split()


def _parse_action(text: str, flavor: str, reg_count: int, visibility: int,
                  symbol_ids: dict, lineno: int) -> Action:
    text = text.strip()
    if text == INC:
        if flavor != ROUNDBASED:
            raise ProtocolSyntaxError("inc is round-based only", lineno)
        return Action(INC)
    for kind in (READ, WRITE):
        if text.startswith(kind + "(") and text.endswith(")"):
            args = [a.strip() for a in text[len(kind) + 1:-1].split(",")]
            break
    else:
        raise ProtocolSyntaxError(f"cannot parse action {text!r}", lineno)

    def reg_of(tok: str) -> int:
        try:
            j = int(tok)
        except ValueError:
            raise ProtocolSyntaxError(f"bad register index {tok!r}", lineno)
        if not 1 <= j <= reg_count:
            raise ProtocolSemanticError(
                f"line {lineno}: register {j} out of range 1..{reg_count}")
        return j - 1

    def sym_of(tok: str) -> int:
        if tok not in symbol_ids:
            raise ProtocolSemanticError(
                f"line {lineno}: unknown symbol {tok!r}")
        return symbol_ids[tok]

    if kind == WRITE:
        if len(args) != 2:
            raise ProtocolSyntaxError("write takes (register, symbol)", lineno)
        sym = sym_of(args[1])
        if sym == D0:
            raise ProtocolSemanticError(
                f"line {lineno}: write of initial symbol {args[1]!r}")
        return Action(WRITE, reg=reg_of(args[0]), symbol=sym)

    if flavor == ROUNDLESS:
        if len(args) != 2:
            raise ProtocolSyntaxError(
                "roundless read takes (register, symbol)", lineno)
        return Action(READ, reg=reg_of(args[0]), symbol=sym_of(args[1]))

    if len(args) != 3:
        raise ProtocolSyntaxError(
            "round-based read takes (-depth, register, symbol)", lineno)
    try:
        signed = int(args[0])
        if signed > 0:
            raise ValueError
        depth = -signed
    except ValueError:
        raise ProtocolSyntaxError(
            f"read depth must be 0 or negative, got {args[0]!r}", lineno)
    if depth < 0 or depth > visibility:
        raise ProtocolSemanticError(
            f"line {lineno}: read depth {depth} out of range 0..{visibility}")
    return Action(READ, reg=reg_of(args[1]), symbol=sym_of(args[2]),
                  depth=depth)


def parse_protocol(text: str) -> Protocol:
    """Parse the line-oriented protocol format (see package README)."""
    header: dict[str, tuple[str, int]] = {}
    trans_lines: list[tuple[str, int]] = []
    in_transitions = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if in_transitions:
            trans_lines.append((line, lineno))
            continue
        if ":" not in line:
            raise ProtocolSyntaxError("expected 'key: value'", lineno)
        key, _, value = line.partition(":")
        key = key.strip()
        if key == "transitions":
            if value.strip():
                raise ProtocolSyntaxError(
                    "transitions header takes no value", lineno)
            in_transitions = True
            continue
        if key not in _HEADER_KEYS:
            raise ProtocolSyntaxError(f"unknown key {key!r}", lineno)
        if key in header:
            raise ProtocolSyntaxError(f"duplicate key {key!r}", lineno)
        header[key] = (value.strip(), lineno)

    for key in ("flavor", "states", "initial", "registers", "alphabet"):
        if key not in header:
            raise ProtocolSyntaxError(f"missing key {key!r}", 0)

    flavor = header["flavor"][0]
    if flavor not in (ROUNDLESS, ROUNDBASED):
        raise ProtocolSyntaxError(f"flavor must be roundless or roundbased, "
                                  f"got {flavor!r}", header["flavor"][1])
    if flavor == ROUNDBASED and "visibility" not in header:
        raise ProtocolSyntaxError("round-based protocol needs visibility", 0)
    if flavor == ROUNDLESS and "visibility" in header:
        raise ProtocolSyntaxError("roundless protocol must not set visibility",
                                  header["visibility"][1])

    state_names = tuple(_split_tokens(header["states"][0]))
    if not state_names:
        raise ProtocolSyntaxError("no states declared", header["states"][1])
    if len(set(state_names)) != len(state_names):
        raise ProtocolSemanticError("duplicate state name in declaration")
    state_ids = {n: i for i, n in enumerate(state_names)}

    symbol_names = tuple(_split_tokens(header["alphabet"][0]))
    if not symbol_names:
        raise ProtocolSyntaxError("empty alphabet", header["alphabet"][1])
    if len(set(symbol_names)) != len(symbol_names):
        raise ProtocolSemanticError("duplicate symbol name in declaration")
    symbol_ids = {n: i for i, n in enumerate(symbol_names)}

    initial = []
    for tok in _split_tokens(header["initial"][0]):
        if tok not in state_ids:
            raise ProtocolSemanticError(
                f"line {header['initial'][1]}: unknown initial state {tok!r}")
        initial.append(state_ids[tok])

    try:
        reg_count = int(header["registers"][0])
    except ValueError:
        raise ProtocolSyntaxError("registers must be an integer",
                                  header["registers"][1])
    if reg_count < 1:
        raise ProtocolSemanticError("register count must be >= 1")

    visibility = None
    if flavor == ROUNDBASED:
        try:
            visibility = int(header["visibility"][0])
        except ValueError:
            raise ProtocolSyntaxError("visibility must be an integer",
                                      header["visibility"][1])
        if visibility < 0:
            raise ProtocolSemanticError("visibility must be >= 0")

    transitions = []
    for line, lineno in trans_lines:
        toks = line.split(None, 1)
        if len(toks) != 2 or " " not in toks[1].strip():
            raise ProtocolSyntaxError("expected 'source action dest'", lineno)
        src_tok = toks[0]
        rest = toks[1].strip()
        act_text, _, dst_tok = rest.rpartition(" ")
        act_text = act_text.strip()
        dst_tok = dst_tok.strip()
        if not act_text:
            raise ProtocolSyntaxError("expected 'source action dest'", lineno)
        for tok, role in ((src_tok, "source"), (dst_tok, "destination")):
            if tok not in state_ids:
                raise ProtocolSemanticError(
                    f"line {lineno}: unknown {role} state {tok!r}")
        action = _parse_action(act_text, flavor, reg_count, visibility or 0,
                               symbol_ids, lineno)
        transitions.append(Transition(state_ids[src_tok], action,
                                      state_ids[dst_tok]))

    return Protocol(flavor=flavor, state_names=state_names,
                    initial_states=frozenset(initial),
                    register_count=reg_count, symbol_names=symbol_names,
                    transitions=tuple(transitions), visibility=visibility)


def format_action(p: Protocol, a: Action) -> str:
    if a.kind == INC:
        return "inc"
    sym = p.symbol_names[a.symbol]
    if a.kind == WRITE:
        return f"write({a.reg + 1}, {sym})"
    if p.flavor == ROUNDBASED:
        return f"read({-a.depth}, {a.reg + 1}, {sym})"
    return f"read({a.reg + 1}, {sym})"


def serialize_protocol(p: Protocol) -> str:
    """Canonical, bit-stable rendering (declaration order throughout)."""
    lines = [f"flavor: {p.flavor}",
             f"states: {' '.join(p.state_names)}",
             "initial: " + " ".join(n for i, n in enumerate(p.state_names)
                                    if i in p.initial_states),
             f"registers: {p.register_count}",
             f"alphabet: {' '.join(p.symbol_names)}"]
    if p.flavor == ROUNDBASED:
        lines.append(f"visibility: {p.visibility}")
    lines.append("transitions:")
    for t in p.transitions:
        lines.append(f"  {p.state_names[t.source]} {format_action(p, t.action)}"
                     f" {p.state_names[t.dest]}")
    return "\n".join(lines) + "\n"
