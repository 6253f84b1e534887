"""Textual protocol descriptions.

Grammar (``//`` starts a line comment; ``role``, ``rec``, ``end`` and ``or``
are reserved words)::

    file     = { decl } ;
    decl     = "role" IDENT ":" ltype ;
    ltype    = "end" | "rec" IDENT "." ltype | IDENT | atom | branches ;
    atom     = IDENT ( "!" | "?" ) IDENT [ "<" IDENT ">" ] ";" ltype ;
    branches = "{" atom "}" { "or" "{" atom "}" } ;

A lone action is written bare (``b!hello<unit>; end``); braces are reserved
for genuine choices between two or more branches.  An omitted payload sort
defaults to ``unit``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import (
    Action,
    Branch,
    Choice,
    Direction,
    End,
    LocalType,
    Machine,
    RecBinder,
    RecVar,
    ROLE_NAME,
    System,
    check_local_type,
    has_errors,
    local_type_to_machine,
    validate_system,
)

KEYWORDS = ("role", "rec", "end", "or")
_PUNCT = "!?:;.<>{}"


@dataclass(frozen=True)
class SourceSpan:
    """1-based position of a source fragment on a single line."""

    line: int
    column: int
    length: int = 1


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str


@dataclass(frozen=True)
class ValidationError:
    span: SourceSpan
    message: str


class DslError(ValueError):
    """Raised by `parse_system`; carries every collected error, in order."""

    def __init__(self, errors):
        self.errors = tuple(errors)
        super().__init__("\n".join(
            f"{e.span.line}:{e.span.column}: {e.message}" for e in self.errors))


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident", a keyword, one of the punctuation marks, or "eof"
    text: str
    line: int
    column: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column, max(1, len(self.text)))


def _lex(text: str) -> tuple[list[_Token], list[ParseError]]:
    tokens: list[_Token] = []
    errors: list[ParseError] = []
    line, col, i = 1, 1, 0
    while i < len(text):
        c = text[i]
        if c == "\n":
            line, col = line + 1, 1
            i += 1
        elif c in " \t\r":
            col += 1
            i += 1
        elif text.startswith("//", i):
            while i < len(text) and text[i] != "\n":
                i += 1
        elif c.isalpha():
            start = i
            while i < len(text) and (text[i].isalnum() or text[i] == "_"):
                i += 1
            word = text[start:i]
            kind = word if word in KEYWORDS else "ident"
            tokens.append(_Token(kind, word, line, col))
            col += i - start
        elif c in _PUNCT:
            tokens.append(_Token(c, c, line, col))
            col += 1
            i += 1
        else:
            errors.append(ParseError(SourceSpan(line, col), f"unexpected character {c!r}"))
            col += 1
            i += 1
    tokens.append(_Token("eof", "", line, col))
    return tokens, errors


def _merge(a: SourceSpan, b: SourceSpan) -> SourceSpan:
    if a.line == b.line and b.column >= a.column:
        return SourceSpan(a.line, a.column, b.column + b.length - a.column)
    return a


class _Unexpected(Exception):
    pass


class _Parser:
    def __init__(self, tokens: list[_Token], errors: list[ParseError]):
        self.tokens = tokens
        self.errors = errors
        self.pos = 0

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def accept(self, kind: str) -> _Token | None:
        if self.peek().kind == kind:
            return self.advance()
        return None

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            found = f"'{tok.text}'" if tok.kind != "eof" else "end of input"
            self.errors.append(ParseError(tok.span, f"expected {what}, found {found}"))
            raise _Unexpected()
        return self.advance()

    def parse_file(self) -> list[tuple[_Token, LocalType]]:
        decls: list[tuple[_Token, LocalType]] = []
        while self.peek().kind != "eof":
            try:
                self.expect("role", "'role'")
                name = self.expect("ident", "role name")
                self.expect(":", "':' after role name")
                decls.append((name, self.parse_ltype()))
            except _Unexpected:
                # resynchronise at the next declaration
                while self.peek().kind not in ("role", "eof"):
                    self.advance()
        return decls

    def parse_ltype(self) -> LocalType:
        tok = self.peek()
        if tok.kind == "end":
            self.advance()
            return End(tok.span)
        if tok.kind == "rec":
            self.advance()
            var = self.expect("ident", "recursion variable")
            self.expect(".", "'.' after recursion variable")
            return RecBinder(var.text, self.parse_ltype(), _merge(tok.span, var.span))
        if tok.kind == "{":
            return self.parse_branches()
        if tok.kind == "ident":
            if self.peek(1).kind in ("!", "?"):
                return Choice((self.parse_atom(),), tok.span)
            self.advance()
            return RecVar(tok.text, tok.span)
        found = f"'{tok.text}'" if tok.kind != "eof" else "end of input"
        self.errors.append(ParseError(
            tok.span, f"expected 'end', 'rec', an action or a choice, found {found}"))
        raise _Unexpected()

    def parse_branches(self) -> Choice:
        opening = self.peek()
        branches = [self.parse_braced_atom()]
        while self.accept("or"):
            branches.append(self.parse_braced_atom())
        if len(branches) < 2:
            self.errors.append(ParseError(
                opening.span,
                "a choice needs at least two branches; write a single action without braces"))
            raise _Unexpected()
        return Choice(tuple(branches), opening.span)

    def parse_braced_atom(self) -> Branch:
        self.expect("{", "'{'")
        branch = self.parse_atom()
        self.expect("}", "'}' closing the branch")
        return branch

    def parse_atom(self) -> Branch:
        peer = self.expect("ident", "peer role")
        mark = self.advance()
        if mark.kind not in ("!", "?"):
            self.errors.append(ParseError(mark.span, "expected '!' or '?' after peer role"))
            raise _Unexpected()
        label = self.expect("ident", "message label")
        last = label
        sort = "unit"
        if self.accept("<"):
            sort_tok = self.expect("ident", "payload sort")
            sort = sort_tok.text
            last = self.expect(">", "'>' closing the payload sort")
        self.expect(";", "';' after the action")
        direction = Direction.SEND if mark.kind == "!" else Direction.RECEIVE
        action = Action(peer.text, direction, label.text, sort)
        return Branch(action, self.parse_ltype(), _merge(peer.span, last.span))


def parse_system(text: str) -> System:
    """Parse a protocol description into a validated `System`.

    Raises `DslError` carrying positioned `ParseError`s for lexical and
    syntactic faults, or positioned `ValidationError`s for well-formedness
    faults (duplicate roles, unbound or unguarded recursion, mixed or
    duplicated branches, self-communication, unknown peers).
    """
    tokens, lex_errors = _lex(text)
    parser = _Parser(tokens, lex_errors)
    decls = parser.parse_file()
    if parser.errors:
        raise DslError(sorted(parser.errors, key=lambda e: (e.span.line, e.span.column)))

    failures: list[ValidationError] = []
    roles: list[str] = []
    seen: set[str] = set()
    for name_tok, _ in decls:
        name = name_tok.text
        if name in seen:
            failures.append(ValidationError(name_tok.span, f"role '{name}' declared twice"))
        elif not ROLE_NAME.match(name):
            failures.append(ValidationError(name_tok.span, f"invalid role name '{name}'"))
        else:
            roles.append(name)
        seen.add(name)
    if not decls:
        failures.append(ValidationError(SourceSpan(1, 1), "input declares no roles"))

    machines: dict[str, Machine] = {}
    for name_tok, lt in decls:
        for issue in check_local_type(lt, subject=name_tok.text, roles=seen):
            failures.append(ValidationError(issue.span or name_tok.span, issue.message))
    if failures:
        raise DslError(failures)
    for name_tok, lt in decls:
        machines[name_tok.text] = local_type_to_machine(lt, name_tok.text)
    system = System(tuple(roles), machines)
    assert not has_errors(validate_system(system))
    return system


# --- rendering --------------------------------------------------------------


def machine_to_local_type(machine: Machine) -> LocalType:
    """Expand a machine back into a local type.

    Each state that a cycle re-enters becomes a ``rec t<id>.`` binder, so
    variable names are stable across renders of the same machine.
    """

    def uses(t: LocalType, var: str) -> bool:
        if isinstance(t, RecVar):
            return t.var == var
        if isinstance(t, Choice):
            return any(uses(b.tail, var) for b in t.branches)
        if isinstance(t, RecBinder):
            return t.var != var and uses(t.body, var)
        return False

    def expand(state: int, path: frozenset[int]) -> LocalType:
        out = machine.outgoing(state)
        if not out:
            return End()
        here = path | {state}
        branches = tuple(
            Branch(a, RecVar(f"t{dst}") if dst in here else expand(dst, here))
            for a, dst in out)
        body = Choice(branches)
        return RecBinder(f"t{state}", body) if uses(body, f"t{state}") else body

    return expand(machine.initial, frozenset())


def render_local_type(lt: LocalType) -> str:
    if isinstance(lt, End):
        return "end"
    if isinstance(lt, RecVar):
        return lt.var
    if isinstance(lt, RecBinder):
        return f"rec {lt.var}. {render_local_type(lt.body)}"
    atoms = [
        f"{b.action.peer}{b.action.direction.value}{b.action.label}"
        f"<{b.action.sort}>; {render_local_type(b.tail)}"
        for b in lt.branches]
    if len(atoms) == 1:
        return atoms[0]
    return " or ".join("{" + a + "}" for a in atoms)


def render_system(system: System) -> str:
    """Canonical text for a system: one declaration per role, in role order.

    Parsing the result yields a system whose machines are isomorphic to the
    originals, and rendering is idempotent on its own output.
    """
    lines = [
        f"role {r}: {render_local_type(machine_to_local_type(system.machines[r]))}"
        for r in system.roles]
    return "\n".join(lines) + "\n"
