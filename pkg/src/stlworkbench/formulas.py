"""STL abstract syntax, concrete-syntax parser, and finite-trace monitoring.

Formulas are evaluated over discrete-time traces (one record per second).
A trace record is a flat map from names to values:

* Boolean keys hold nullary atoms (``lampOn``) or rendered ground atoms
  (``itemOnRobot(purpleCube)``).
* Numeric keys hold named signals.  Positional atoms are resolved against
  signals by convention: ``robotAt(x,y)`` reads ``robot_x``/``robot_y`` and
  ``itemAt(item,x,y)`` reads ``<item>_x``/``<item>_y``.

All intervals are closed integer intervals and windows clip at the trace
end: an Always over an empty clipped window is vacuously true, an
Eventually over an empty window is false.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Union

INF = math.inf

# Robustness scale for Boolean environment atoms.
ATOM_RHO = 1.0


class FormulaError(Exception):
    """Base class for formula construction and evaluation failures."""


class FormulaSyntaxError(FormulaError):
    """Raised by the parser; carries the offending position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnresolvedSlotError(FormulaError):
    """A template slot reached the monitor without being instantiated."""


class EvaluationError(FormulaError):
    """A trace record is missing an atom or signal the formula needs."""


@dataclass(frozen=True, slots=True)
class Slot:
    """Named template parameter; ``kind`` is one of intervalBound,
    coordinate, itemName, threshold."""

    name: str
    kind: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed time interval [lo, hi] in whole seconds."""

    lo: int
    hi: Union[int, Slot]

    def __post_init__(self):
        if isinstance(self.lo, bool) or not isinstance(self.lo, int) or self.lo < 0:
            raise ValueError(f"interval lower bound must be a non-negative integer, got {self.lo!r}")
        if not isinstance(self.hi, Slot):
            if isinstance(self.hi, bool) or not isinstance(self.hi, int):
                raise ValueError(f"interval upper bound must be an integer or slot, got {self.hi!r}")
            if self.hi < self.lo:
                raise ValueError(f"malformed interval [{self.lo},{self.hi}]")

    @property
    def is_ground(self):
        return not isinstance(self.hi, Slot)

    def __str__(self):
        return f"[{self.lo},{self.hi}]"


class Trace:
    """Non-empty sequence of flat records indexed 0..len-1."""

    __slots__ = ("records",)

    def __init__(self, records):
        records = list(records)
        if not records:
            raise ValueError("trace must be non-empty")
        self.records = records

    def __len__(self):
        return len(self.records)

    def __getitem__(self, t):
        return self.records[t]

    def __iter__(self) -> Iterator[dict]:
        return iter(self.records)


class Formula:
    """Base class for all formula nodes."""

    __slots__ = ()

    def sat(self, x: Trace, t: int) -> bool:
        raise NotImplementedError

    def rho(self, x: Trace, t: int) -> float:
        raise NotImplementedError

    def children(self):
        return ()

    def walk(self):
        yield self
        for child in self.children():
            yield from child.walk()

    def __str__(self):
        return format_formula(self)

    def __repr__(self):
        return f"{type(self).__name__}({format_formula(self)!r})"


@dataclass(frozen=True, slots=True, repr=False)
class TrueFormula(Formula):
    """The trivially satisfied formula; contributes 0 to formula length."""

    def sat(self, x, t):
        return True

    def rho(self, x, t):
        return INF


TRUE = TrueFormula()


@dataclass(frozen=True, slots=True, repr=False)
class EnvAtom(Formula):
    """Named Boolean world predicate, optionally parameterized.

    Robustness is +1 when the atom holds and -1 otherwise; any sign-sound
    scale works since the value only feeds comparisons and RL rewards.
    """

    name: str
    args: tuple = ()

    def key(self):
        if not self.args:
            return self.name
        return f"{self.name}({','.join(str(a) for a in self.args)})"

    def _lookup(self, rec):
        for a in self.args:
            if isinstance(a, Slot):
                raise UnresolvedSlotError(f"unresolved slot {a.name} in atom {self.name}")
        key = self.key()
        if key in rec:
            return bool(rec[key])
        if self.name == "robotAt" and len(self.args) == 2:
            try:
                return (rec["robot_x"], rec["robot_y"]) == tuple(self.args)
            except KeyError:
                raise EvaluationError("trace record lacks robot_x/robot_y signals") from None
        if self.name == "itemAt" and len(self.args) == 3:
            item = self.args[0]
            try:
                return (rec[f"{item}_x"], rec[f"{item}_y"]) == tuple(self.args[1:])
            except KeyError:
                raise EvaluationError(f"trace record lacks {item}_x/{item}_y signals") from None
        raise EvaluationError(f"unknown atom {key!r} in trace record")

    def sat(self, x, t):
        return self._lookup(x.records[t])

    def rho(self, x, t):
        return ATOM_RHO if self._lookup(x.records[t]) else -ATOM_RHO


@dataclass(frozen=True, slots=True, repr=False)
class SignalAtom(Formula):
    """Numeric comparison atom ``signal ~ c`` with ~ in {<=, >=, =}."""

    signal: str
    op: str
    threshold: float

    def __post_init__(self):
        if self.op not in ("<=", ">=", "="):
            raise ValueError(f"unsupported comparator {self.op!r}")

    def _value(self, rec):
        try:
            return float(rec[self.signal])
        except KeyError:
            raise EvaluationError(f"missing signal {self.signal!r} in trace record") from None

    def sat(self, x, t):
        v = self._value(x.records[t])
        if self.op == "<=":
            return v <= self.threshold
        if self.op == ">=":
            return v >= self.threshold
        return v == self.threshold

    def rho(self, x, t):
        v = self._value(x.records[t])
        if self.op == "<=":
            return self.threshold - v
        if self.op == ">=":
            return v - self.threshold
        return -abs(v - self.threshold)


@dataclass(frozen=True, slots=True, repr=False)
class Not(Formula):
    child: Formula

    def children(self):
        return (self.child,)

    def sat(self, x, t):
        return not self.child.sat(x, t)

    def rho(self, x, t):
        return -self.child.rho(x, t)


@dataclass(frozen=True, slots=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def sat(self, x, t):
        return self.left.sat(x, t) and self.right.sat(x, t)

    def rho(self, x, t):
        return min(self.left.rho(x, t), self.right.rho(x, t))


@dataclass(frozen=True, slots=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def sat(self, x, t):
        return self.left.sat(x, t) or self.right.sat(x, t)

    def rho(self, x, t):
        return max(self.left.rho(x, t), self.right.rho(x, t))


@dataclass(frozen=True, slots=True, repr=False)
class Implies(Formula):
    """Stored as its own node; evaluated as ``!left | right``."""

    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def sat(self, x, t):
        return (not self.left.sat(x, t)) or self.right.sat(x, t)

    def rho(self, x, t):
        return max(-self.left.rho(x, t), self.right.rho(x, t))


def _window(interval, t, n):
    hi = interval.hi
    if isinstance(hi, Slot):
        raise UnresolvedSlotError(f"unresolved interval slot {hi.name}")
    return t + interval.lo, min(t + hi, n - 1)


@dataclass(frozen=True, slots=True, repr=False)
class Eventually(Formula):
    interval: Interval
    child: Formula

    def children(self):
        return (self.child,)

    def sat(self, x, t):
        lo, hi = _window(self.interval, t, len(x.records))
        child = self.child
        for u in range(lo, hi + 1):
            if child.sat(x, u):
                return True
        return False

    def rho(self, x, t):
        lo, hi = _window(self.interval, t, len(x.records))
        best = -INF
        child = self.child
        for u in range(lo, hi + 1):
            r = child.rho(x, u)
            if r > best:
                best = r
        return best


@dataclass(frozen=True, slots=True, repr=False)
class Always(Formula):
    interval: Interval
    child: Formula

    def children(self):
        return (self.child,)

    def sat(self, x, t):
        lo, hi = _window(self.interval, t, len(x.records))
        child = self.child
        for u in range(lo, hi + 1):
            if not child.sat(x, u):
                return False
        return True

    def rho(self, x, t):
        lo, hi = _window(self.interval, t, len(x.records))
        worst = INF
        child = self.child
        for u in range(lo, hi + 1):
            r = child.rho(x, u)
            if r < worst:
                worst = r
        return worst


@dataclass(frozen=True, slots=True, repr=False)
class Until(Formula):
    """left must hold from t up to (excluding) some t' in the window where
    right holds."""

    interval: Interval
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def sat(self, x, t):
        lo, hi = _window(self.interval, t, len(x.records))
        left, right = self.left, self.right
        for tp in range(lo, hi + 1):
            if right.sat(x, tp):
                if all(left.sat(x, u) for u in range(t, tp)):
                    return True
        return False

    def rho(self, x, t):
        lo, hi = _window(self.interval, t, len(x.records))
        left, right = self.left, self.right
        best = -INF
        for tp in range(lo, hi + 1):
            r = right.rho(x, tp)
            for u in range(t, tp):
                lr = left.rho(x, u)
                if lr < r:
                    r = lr
            if r > best:
                best = r
        return best


def satisfies(phi: Formula, x: Trace, t: int = 0) -> bool:
    """Boolean satisfaction of ``phi`` on trace ``x`` at time index ``t``."""
    if not 0 <= t < len(x.records):
        raise ValueError(f"time index {t} out of range for trace of length {len(x.records)}")
    return phi.sat(x, t)


def robustness(phi: Formula, x: Trace, t: int = 0) -> float:
    """Quantitative satisfaction margin; positive implies satisfaction,
    negative implies violation (min/max semantics)."""
    if not 0 <= t < len(x.records):
        raise ValueError(f"time index {t} out of range for trace of length {len(x.records)}")
    return phi.rho(x, t)


def formula_length(phi: Formula) -> int:
    """Node count: atoms plus operators; ``true`` contributes 0."""
    if isinstance(phi, TrueFormula):
        return 0
    if isinstance(phi, (EnvAtom, SignalAtom)):
        return 1
    return 1 + sum(formula_length(c) for c in phi.children())


def format_formula(phi: Formula) -> str:
    """Canonical single-line rendering; fully parenthesized, reparses to a
    structurally equal tree."""
    if isinstance(phi, TrueFormula):
        return "true"
    if isinstance(phi, EnvAtom):
        return phi.key()
    if isinstance(phi, SignalAtom):
        c = phi.threshold
        c_text = str(int(c)) if isinstance(c, float) and c.is_integer() else repr(c)
        return f"{phi.signal} {phi.op} {c_text}"
    if isinstance(phi, Not):
        return f"!({format_formula(phi.child)})"
    if isinstance(phi, And):
        return f"({format_formula(phi.left)} & {format_formula(phi.right)})"
    if isinstance(phi, Or):
        return f"({format_formula(phi.left)} | {format_formula(phi.right)})"
    if isinstance(phi, Implies):
        return f"({format_formula(phi.left)} -> {format_formula(phi.right)})"
    if isinstance(phi, Eventually):
        return f"F{phi.interval}({format_formula(phi.child)})"
    if isinstance(phi, Always):
        return f"G{phi.interval}({format_formula(phi.child)})"
    if isinstance(phi, Until):
        return f"({format_formula(phi.left)} U{phi.interval} {format_formula(phi.right)})"
    raise TypeError(f"not a formula node: {phi!r}")


_SYMBOLS = ("->", "<=", ">=", "(", ")", "[", "]", ",", "!", "&", "|", "=")


def _tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if text.startswith("->", i) or text.startswith("<=", i) or text.startswith(">=", i):
            tokens.append((text[i:i + 2], i))
            i += 2
            continue
        if ch in "()[]!,&|=":
            tokens.append((ch, i))
            i += 1
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            tokens.append((text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append((text[i:j], i))
            i = j
            continue
        raise FormulaSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append((None, n))
    return tokens


class _Parser:
    """Recursive-descent parser for the concrete grammar.

    Accepts both the fully parenthesized canonical output and the relaxed
    form with unparenthesized infix operators (precedence: -> < | < & = U,
    unary tightest; same-precedence chains associate left).
    """

    def __init__(self, text, known_atoms=None):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.known_atoms = known_atoms

    def peek(self):
        return self.tokens[self.pos][0]

    def here(self):
        return self.tokens[self.pos][1]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, symbol):
        tok, at = self.next()
        if tok != symbol:
            raise FormulaSyntaxError(f"expected {symbol!r}, found {tok!r}", at)

    def parse(self):
        phi = self.parse_implies()
        tok, at = self.next()
        if tok is not None:
            raise FormulaSyntaxError(f"trailing input {tok!r}", at)
        return phi

    def parse_implies(self):
        left = self.parse_or()
        if self.peek() == "->":
            self.next()
            return Implies(left, self.parse_implies())
        return left

    def parse_or(self):
        left = self.parse_and()
        while self.peek() == "|":
            self.next()
            left = Or(left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_until()
        while self.peek() == "&":
            self.next()
            left = And(left, self.parse_until())
        return left

    def parse_until(self):
        left = self.parse_unary()
        while self.peek() == "U":
            self.next()
            interval = self.parse_interval()
            left = Until(interval, left, self.parse_unary())
        return left

    def parse_interval(self):
        self.expect("[")
        lo = self.parse_int()
        self.expect(",")
        hi = self.parse_int()
        self.expect("]")
        at = self.here()
        try:
            return Interval(lo, hi)
        except ValueError as exc:
            raise FormulaSyntaxError(str(exc), at) from None

    def parse_int(self):
        tok, at = self.next()
        try:
            return int(tok)
        except (TypeError, ValueError):
            raise FormulaSyntaxError(f"expected integer, found {tok!r}", at) from None

    def parse_unary(self):
        tok = self.peek()
        if tok == "!":
            self.next()
            return Not(self.parse_unary())
        if tok in ("F", "G") and self.tokens[self.pos + 1][0] == "[":
            self.next()
            interval = self.parse_interval()
            self.expect("(")
            child = self.parse_implies()
            self.expect(")")
            return Eventually(interval, child) if tok == "F" else Always(interval, child)
        return self.parse_primary()

    def parse_primary(self):
        tok, at = self.next()
        if tok == "(":
            phi = self.parse_implies()
            self.expect(")")
            return phi
        if tok == "true":
            return TRUE
        if tok is None:
            raise FormulaSyntaxError("unexpected end of input", at)
        if not (tok[0].isalpha() or tok[0] == "_"):
            raise FormulaSyntaxError(f"expected formula, found {tok!r}", at)
        return self.parse_atom(tok, at)

    def parse_atom(self, name, at):
        nxt = self.peek()
        if nxt in ("<=", ">=", "="):
            op, _ = self.next()
            tok, vat = self.next()
            try:
                value = float(tok)
            except (TypeError, ValueError):
                raise FormulaSyntaxError(f"expected number, found {tok!r}", vat) from None
            return SignalAtom(name, op, value)
        args = ()
        if nxt == "(":
            self.next()
            parts = []
            while True:
                tok, aat = self.next()
                if tok is None:
                    raise FormulaSyntaxError("unterminated argument list", aat)
                if tok == ")":
                    break
                if tok == ",":
                    continue
                try:
                    parts.append(int(tok))
                except ValueError:
                    parts.append(tok)
            args = tuple(parts)
        if self.known_atoms is not None and name not in self.known_atoms:
            raise FormulaSyntaxError(f"unknown atom {name!r}", at)
        return EnvAtom(name, args)


def parse_formula(text: str, known_atoms=None) -> Formula:
    """Parse concrete syntax into an AST.

    When ``known_atoms`` is given, environment atom names outside that set
    are rejected.
    """
    if not text or not text.strip():
        raise FormulaSyntaxError("empty formula", 0)
    return _Parser(text, known_atoms).parse()
