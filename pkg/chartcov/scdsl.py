"""Textual `.scd` format for system models: parser, validator and printer.

Grammar::

    model      := chart+
    chart      := "statechart" IDENT "{" "initial" IDENT state* "}"
    state      := "state" IDENT ("{" transition* "}")?
    transition := "on" IDENT guard? emits? "->" IDENT
    guard      := "[" atom ("&&" atom)* "]"
    atom       := IDENT OP literal | "in" "(" IDENT "." IDENT ")"
    emits      := "/" "emit" IDENT args? ("," "emit" IDENT args?)*
    args       := "(" IDENT "=" (literal | "$" IDENT) ("," ...)* ")"
    literal    := "true" | "false" | INTEGER

Line comments start with ``#``. The parser is recursive descent with one
token of lookahead and stops at the first syntax error.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

from chartcov.chartcore import (
    EventTemplate,
    FieldRef,
    Guard,
    InStateAtom,
    PayloadAtom,
    SourceSpan,
    StateChart,
    SystemModel,
    Transition,
    Value,
    model_problems,
)

logger = logging.getLogger(__name__)

KEYWORDS = {'statechart', 'initial', 'state', 'on', 'emit', 'in', 'true', 'false'}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<int>-?[0-9]+)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|<|>)
  | (?P<punct>->|&&|[{}\[\]().,/$=])
""", re.VERBOSE)


class ModelSyntaxError(ValueError):
    """Raised by :func:`load_model` when the source has errors."""

    def __init__(self, diagnostics: List['Diagnostic'], filename: str = '<input>'):
        self.diagnostics = diagnostics
        self.filename = filename
        super().__init__('\n'.join(d.render(filename) for d in diagnostics if d.severity == 'error'))


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    line: int
    column: int
    code: str
    message: str
    span: Optional[SourceSpan] = None

    def render(self, filename: str = '<input>') -> str:
        return f"{filename}:{self.line}:{self.column}: {self.severity}[{self.code}]: {self.message}"


@dataclass(frozen=True)
class ParseResult:
    model: Optional[SystemModel]
    diagnostics: List[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.model is not None


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int

    def describe(self) -> str:
        return 'end of input' if self.kind == 'eof' else repr(self.text)


class _SyntaxFailure(Exception):
    def __init__(self, message: str, start: int, end: int, code: str = 'syntax'):
        super().__init__(message)
        self.message = message
        self.start = start
        self.end = end
        self.code = code


def _position(text: str, offset: int) -> Tuple[int, int]:
    line = text.count('\n', 0, offset) + 1
    column = offset - (text.rfind('\n', 0, offset) + 1) + 1
    return line, column


def _diagnostic(text: str, severity: str, code: str, message: str,
                span: Optional[SourceSpan]) -> Diagnostic:
    line, column = _position(text, span.start) if span else (1, 1)
    return Diagnostic(severity, line, column, code, message, span)


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise _SyntaxFailure(f"unexpected character {text[pos]!r}", pos, pos + 1, 'bad-character')
        kind = match.lastgroup
        if kind == 'ident' and match.group() in KEYWORDS:
            kind = 'keyword'
        if kind not in ('ws', 'comment'):
            tokens.append(Token(kind, match.group(), match.start(), match.end()))
        pos = match.end()
    tokens.append(Token('eof', '', len(text), len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _check(self, kind: str, text: str = None) -> bool:
        token = self.current
        return token.kind == kind and (text is None or token.text == text)

    def _fail(self, *expected: str):
        token = self.current
        raise _SyntaxFailure(
            f"unexpected token {token.describe()}, expected one of: {', '.join(expected)}",
            token.start, token.end)

    def _accept(self, kind: str, text: str = None) -> Optional[Token]:
        if self._check(kind, text):
            token = self.current
            self.index += 1
            return token
        return None

    def _expect(self, kind: str, text: str = None) -> Token:
        token = self._accept(kind, text)
        if token is None:
            self._fail(repr(text) if text else kind.upper())
        return token

    def model(self) -> SystemModel:
        charts = [self.chart()]
        while not self._check('eof'):
            if not self._check('keyword', 'statechart'):
                self._fail("'statechart'", 'end of input')
            charts.append(self.chart())
        return SystemModel(tuple(charts))

    def chart(self) -> StateChart:
        start = self._expect('keyword', 'statechart').start
        name = self._expect('ident').text
        self._expect('punct', '{')
        self._expect('keyword', 'initial')
        initial = self._expect('ident')
        states, spans, transitions = [], [], []
        while self._check('keyword', 'state'):
            state, span, outgoing = self.state()
            states.append(state)
            spans.append(span)
            transitions.extend(outgoing)
        if not self._check('punct', '}'):
            self._fail("'state'", "'}'")
        end = self._expect('punct', '}').end
        return StateChart(
            name=name,
            states=tuple(states),
            initial=initial.text,
            transitions=tuple(transitions),
            span=SourceSpan(start, end),
            state_spans=tuple(spans),
            initial_span=SourceSpan(initial.start, initial.end),
        )

    def state(self):
        self._expect('keyword', 'state')
        name = self._expect('ident')
        transitions = []
        if self._accept('punct', '{'):
            while self._check('keyword', 'on'):
                transitions.append(self.transition(name.text))
            if not self._check('punct', '}'):
                self._fail("'on'", "'}'")
            self._expect('punct', '}')
        return name.text, SourceSpan(name.start, name.end), transitions

    def transition(self, source: str) -> Transition:
        start = self._expect('keyword', 'on').start
        event = self._expect('ident').text
        guard = self.guard() if self._check('punct', '[') else None
        emits = self.emits() if self._check('punct', '/') else ()
        if not self._check('punct', '->'):
            expected = ["'->'"]
            if guard is None and not emits:
                expected[:0] = ["'['", "'/'"]
            elif not emits:
                expected[:0] = ["'/'"]
            else:
                expected[:0] = ["','"]
            self._fail(*expected)
        self._expect('punct', '->')
        target = self._expect('ident')
        return Transition(
            source=source,
            event=event,
            target=target.text,
            guard=guard,
            emits=emits,
            span=SourceSpan(start, target.end),
            target_span=SourceSpan(target.start, target.end),
        )

    def guard(self) -> Guard:
        self._expect('punct', '[')
        atoms = [self.atom()]
        while self._accept('punct', '&&'):
            atoms.append(self.atom())
        if not self._check('punct', ']'):
            self._fail("'&&'", "']'")
        self._expect('punct', ']')
        return Guard(tuple(atoms))

    def atom(self):
        if self._check('keyword', 'in'):
            start = self._expect('keyword', 'in').start
            self._expect('punct', '(')
            chart = self._expect('ident').text
            self._expect('punct', '.')
            state = self._expect('ident').text
            end = self._expect('punct', ')').end
            return InStateAtom(chart, state, SourceSpan(start, end))
        if not self._check('ident'):
            self._fail('IDENT', "'in'")
        name = self._expect('ident')
        op = self._expect('op').text
        value, end = self.literal()
        return PayloadAtom(name.text, op, value, SourceSpan(name.start, end))

    def literal(self) -> Tuple[Value, int]:
        token = self.current
        if self._accept('keyword', 'true'):
            return True, token.end
        if self._accept('keyword', 'false'):
            return False, token.end
        if self._accept('int'):
            try:
                return int(token.text), token.end
            except ValueError:
                raise _SyntaxFailure(f"integer literal of {len(token.text)} characters is too long",
                                     token.start, token.end, 'bad-literal') from None
        self._fail("'true'", "'false'", 'INTEGER')

    def emits(self) -> Tuple[EventTemplate, ...]:
        self._expect('punct', '/')
        templates = [self.emit()]
        while self._accept('punct', ','):
            templates.append(self.emit())
        return tuple(templates)

    def emit(self) -> EventTemplate:
        self._expect('keyword', 'emit')
        name = self._expect('ident').text
        args = []
        if self._accept('punct', '('):
            args.append(self.arg())
            while self._accept('punct', ','):
                args.append(self.arg())
            if not self._check('punct', ')'):
                self._fail("','", "')'")
            self._expect('punct', ')')
        return EventTemplate(name, tuple(args))

    def arg(self) -> Tuple[str, Union[Value, FieldRef]]:
        key = self._expect('ident').text
        self._expect('punct', '=')
        if self._accept('punct', '$'):
            return key, FieldRef(self._expect('ident').text)
        if not (self._check('keyword', 'true') or self._check('keyword', 'false') or self._check('int')):
            self._fail("'true'", "'false'", 'INTEGER', "'$'")
        value, _ = self.literal()
        return key, value


def validate(model: SystemModel, text: str = '') -> List[Diagnostic]:
    """Invariant errors plus warnings for unreachable states and unused emissions.

    `text` is the source the model was parsed from; it turns spans into
    line/column positions.
    """
    diagnostics = [_diagnostic(text, p.severity, p.code, p.message, p.span)
                   for p in model_problems(model)]

    consumed = {t.event for chart in model.charts for t in chart.transitions}
    for chart in model.charts:
        targeted = {t.target for t in chart.transitions if t.target != t.source}
        spans = chart.state_spans or ()
        for index, state in enumerate(chart.states):
            if state != chart.initial and state not in targeted:
                span = spans[index] if index < len(spans) else chart.span
                diagnostics.append(_diagnostic(
                    text, 'warning', 'unreachable-state',
                    f"unreachable state '{state}' in chart '{chart.name}'", span))
        for transition in chart.transitions:
            for template in transition.emits:
                if template.name not in consumed:
                    diagnostics.append(_diagnostic(
                        text, 'warning', 'unconsumed-event',
                        f"event '{template.name}' is emitted but consumed nowhere", transition.span))
    return diagnostics


def parse_model(source: Union[str, bytes]) -> ParseResult:
    """Parse `.scd` text; the model is None when any error diagnostic exists."""
    if isinstance(source, bytes):
        try:
            source = source.decode('utf-8')
        except UnicodeDecodeError as exc:
            prefix = source[:exc.start].decode('utf-8', 'replace')
            line, column = _position(prefix, len(prefix))
            return ParseResult(None, [Diagnostic('error', line, column, 'encoding', 'invalid UTF-8 input',
                                                 SourceSpan(exc.start, exc.end))])
    try:
        model = _Parser(tokenize(source)).model()
    except _SyntaxFailure as failure:
        span = SourceSpan(failure.start, failure.end)
        return ParseResult(None, [_diagnostic(source, 'error', failure.code, failure.message, span)])

    diagnostics = validate(model, source)
    if any(d.severity == 'error' for d in diagnostics):
        return ParseResult(None, diagnostics)
    return ParseResult(model, diagnostics)


def load_model(path: Union[str, Path]) -> SystemModel:
    path = Path(path)
    result = parse_model(path.read_bytes())
    for diagnostic in result.diagnostics:
        if diagnostic.severity == 'warning':
            logger.warning(diagnostic.render(str(path)))
    if not result.ok:
        raise ModelSyntaxError(result.diagnostics, str(path))
    logger.debug("Loaded %s with %d charts", path, len(result.model.charts))
    return result.model


def _literal_text(value: Value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    return str(value)


def _atom_text(atom) -> str:
    if isinstance(atom, InStateAtom):
        return f"in({atom.chart}.{atom.state})"
    return f"{atom.field} {atom.op} {_literal_text(atom.value)}"


def _template_text(template: EventTemplate) -> str:
    if not template.args:
        return f"emit {template.name}"
    args = ', '.join(
        f"{key}=${arg.field}" if isinstance(arg, FieldRef) else f"{key}={_literal_text(arg)}"
        for key, arg in template.args)
    return f"emit {template.name}({args})"


def transition_text(transition: Transition) -> str:
    parts = [f"on {transition.event}"]
    if transition.guard is not None:
        parts.append('[' + ' && '.join(_atom_text(a) for a in transition.guard.atoms) + ']')
    if transition.emits:
        parts.append('/ ' + ', '.join(_template_text(t) for t in transition.emits))
    parts.append(f"-> {transition.target}")
    return ' '.join(parts)


def pretty_print(model: SystemModel) -> str:
    """Canonical text: two-space indentation, one transition per line."""
    blocks = []
    for chart in model.charts:
        lines = [f"statechart {chart.name} {{", f"  initial {chart.initial}"]
        for state in chart.states:
            outgoing = list(chart.outgoing(state))
            if not outgoing:
                lines.append(f"  state {state}")
                continue
            lines.append(f"  state {state} {{")
            lines.extend(f"    {transition_text(t)}" for t in outgoing)
            lines.append("  }")
        lines.append("}")
        blocks.append('\n'.join(lines))
    return '\n\n'.join(blocks) + '\n'
