"""Intuitionistic propositional formulas.

Formulas are hash-consed: building a node whose structure already exists
returns the existing object, so structural equality is object identity and
iterated substitutions share subterms as a DAG.  ``A^14`` of a formula with
three occurrences of ``x`` has millions of tree nodes but only a few dozen
distinct ones.
"""

from __future__ import annotations

import re
import threading
import weakref
from typing import Iterable, Iterator, Mapping

__all__ = [
    "Formula", "Bottom", "Var", "And", "Or", "Implies",
    "BOT", "TOP", "Not", "Iff", "var",
    "ParseError", "parse", "to_text",
    "substitute", "iterate_formula", "degree", "variables",
    "tree_size", "dag_size", "occurs_only_positively", "subformulas",
]

_lock = threading.Lock()
_table: "weakref.WeakValueDictionary[tuple, Formula]" = weakref.WeakValueDictionary()
_counter = 0


class Formula:
    """Base class of the five formula constructors."""

    __slots__ = ("uid", "_degree", "_vars", "__weakref__")
    kind: str = ""
    precedence = 5

    def __new__(cls, *args):
        key = cls._key(*args)
        node = _table.get(key)
        if node is not None:
            return node
        with _lock:
            node = _table.get(key)
            if node is None:
                global _counter
                node = object.__new__(cls)
                node._init(*args)
                node.uid = _counter
                node._degree = None
                node._vars = None
                _counter += 1
                _table[key] = node
        return node

    @classmethod
    def _key(cls, *args) -> tuple:
        raise NotImplementedError

    def _init(self, *args) -> None:
        pass

    # identity equality is structural equality thanks to interning
    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return self.uid

    def __lt__(self, other: Formula) -> bool:
        return self.uid < other.uid

    def __repr__(self) -> str:
        if dag_size(self) > 200:
            return f"<{type(self).__name__} dag_size={dag_size(self)}>"
        return f"Formula({to_text(self)!r})"

    def __str__(self) -> str:
        return to_text(self)

    @property
    def children(self) -> tuple[Formula, ...]:
        return ()

    # operator sugar, used heavily in tests
    def __and__(self, other: Formula) -> Formula:
        return And(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)

    def __rshift__(self, other: Formula) -> Formula:
        return Implies(self, other)

    def __invert__(self) -> Formula:
        return Implies(self, BOT)


class Bottom(Formula):
    __slots__ = ()
    kind = "bot"

    @classmethod
    def _key(cls):
        return ("bot",)

    def __reduce__(self):
        return (Bottom, ())


class Var(Formula):
    __slots__ = ("name",)
    kind = "var"

    @classmethod
    def _key(cls, name: str):
        if not isinstance(name, str) or not name:
            raise ValueError(f"variable names must be nonempty strings, got {name!r}")
        return ("var", name)

    def _init(self, name: str) -> None:
        self.name = name

    def __reduce__(self):
        return (Var, (self.name,))


class _Binary(Formula):
    __slots__ = ("left", "right")

    @classmethod
    def _key(cls, left: Formula, right: Formula):
        if not (isinstance(left, Formula) and isinstance(right, Formula)):
            raise TypeError("connectives take Formula arguments")
        return (cls.kind, left.uid, right.uid)

    def _init(self, left: Formula, right: Formula) -> None:
        self.left = left
        self.right = right

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)

    def __reduce__(self):
        return (type(self), (self.left, self.right))


class And(_Binary):
    __slots__ = ()
    kind = "and"
    precedence = 3


class Or(_Binary):
    __slots__ = ()
    kind = "or"
    precedence = 2


class Implies(_Binary):
    __slots__ = ()
    kind = "imp"
    precedence = 1


BOT = Bottom()
TOP = Implies(BOT, BOT)


def var(name: str) -> Var:
    return Var(name)


def Not(a: Formula) -> Formula:
    return Implies(a, BOT)


def Iff(a: Formula, b: Formula) -> Formula:
    return And(Implies(a, b), Implies(b, a))


# ---------------------------------------------------------------- traversal

def subformulas(a: Formula) -> list[Formula]:
    """Distinct subformulas of ``a`` in post-order (children first)."""
    seen: set[int] = set()
    out: list[Formula] = []
    stack: list[tuple[Formula, bool]] = [(a, False)]
    while stack:
        node, expanded = stack.pop()
        if node.uid in seen:
            continue
        if expanded or not node.children:
            seen.add(node.uid)
            out.append(node)
            continue
        stack.append((node, True))
        for child in reversed(node.children):
            if child.uid not in seen:
                stack.append((child, False))
    return out


def dag_size(a: Formula) -> int:
    return len(subformulas(a))


def tree_size(a: Formula) -> int:
    """Number of nodes of ``a`` read as a tree (may be astronomically large)."""
    sizes: dict[int, int] = {}
    for node in subformulas(a):
        sizes[node.uid] = 1 + sum(sizes[c.uid] for c in node.children)
    return sizes[a.uid]


def degree(a: Formula) -> int:
    """Implicational degree: nesting depth of implications."""
    if a._degree is None:
        for node in subformulas(a):
            if node._degree is not None:
                continue
            if isinstance(node, Implies):
                node._degree = max(node.left._degree, node.right._degree) + 1
            elif isinstance(node, _Binary):
                node._degree = max(node.left._degree, node.right._degree)
            else:
                node._degree = 0
    return a._degree


def variables(a: Formula) -> frozenset[str]:
    if a._vars is None:
        for node in subformulas(a):
            if node._vars is not None:
                continue
            if isinstance(node, Var):
                node._vars = frozenset((node.name,))
            elif isinstance(node, _Binary):
                node._vars = node.left._vars | node.right._vars
            else:
                node._vars = frozenset()
    return a._vars


def occurs_only_positively(a: Formula, x: str) -> bool:
    """True iff every occurrence of ``x`` in ``a`` is positive.

    Positive means under an even number of implication antecedents, so the
    formula is monotone in ``x``.
    """
    memo: dict[tuple[int, bool], bool] = {}

    def ok(node: Formula, positive: bool) -> bool:
        key = (node.uid, positive)
        if key in memo:
            return memo[key]
        if isinstance(node, Var):
            res = positive or node.name != x
        elif isinstance(node, Implies):
            res = ok(node.left, not positive) and ok(node.right, positive)
        elif isinstance(node, _Binary):
            res = ok(node.left, positive) and ok(node.right, positive)
        else:
            res = True
        memo[key] = res
        return res

    return ok(a, True)


# ------------------------------------------------------------- substitution

def substitute(a: Formula, s: Mapping[str, Formula]) -> Formula:
    """Simultaneous substitution; variables not in ``s`` are fixed."""
    if not s:
        return a
    memo: dict[int, Formula] = {}
    for node in subformulas(a):
        if isinstance(node, Var):
            memo[node.uid] = s.get(node.name, node)
        elif isinstance(node, _Binary):
            memo[node.uid] = type(node)(memo[node.left.uid], memo[node.right.uid])
        else:
            memo[node.uid] = node
    return memo[a.uid]


def iterate_formula(a: Formula, x: str, i: int) -> Formula:
    """``A^i`` with ``A^1 = A`` and ``A^(i+1) = A(A^i / x)``."""
    if i < 1:
        raise ValueError("iteration count must be >= 1")
    current = a
    for _ in range(i - 1):
        current = substitute(a, {x: current})
    return current


def iterates(a: Formula, x: str) -> Iterator[Formula]:
    """Yield ``A^1, A^2, ...`` forever."""
    current = a
    while True:
        yield current
        current = substitute(a, {x: current})


# ----------------------------------------------------------------- printing

def to_text(a: Formula) -> str:
    """ASCII rendering that reparses to the same AST.

    ``A -> _|_`` is printed as ``~A``; ``&`` and ``|`` associate to the
    left and ``->`` to the right.
    """
    memo: dict[int, str] = {}
    for node in subformulas(a):
        memo[node.uid] = _render(node, memo)
    return memo[a.uid]


def _render(node: Formula, memo: dict[int, str]) -> str:
    if isinstance(node, Bottom):
        return "_|_"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Implies) and node.right is BOT:
        inner = memo[node.left.uid]
        if _needs_parens_under_not(node.left):
            inner = f"({inner})"
        return "~" + inner
    left, right = memo[node.left.uid], memo[node.right.uid]
    op = {"and": "&", "or": "|", "imp": "->"}[node.kind]
    prec = node.precedence
    lp, rp = _prec(node.left), _prec(node.right)
    if isinstance(node, Implies):
        # right associative
        if lp <= prec:
            left = f"({left})"
        if rp < prec:
            right = f"({right})"
    else:
        if lp < prec:
            left = f"({left})"
        if rp <= prec:
            right = f"({right})"
    return f"{left} {op} {right}"


def _prec(node: Formula) -> int:
    if isinstance(node, Implies) and node.right is BOT:
        return 4
    return node.precedence


def _needs_parens_under_not(node: Formula) -> bool:
    return isinstance(node, _Binary) and _prec(node) < 4


# ------------------------------------------------------------------ parsing

class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


_TOKEN = re.compile(r"\s*(?:(<->)|(->)|(_\|_)|([a-z][a-zA-Z0-9_]*)|([~&|()]))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        tok = next(g for g in m.groups() if g is not None)
        tokens.append((tok, m.end() - len(tok)))
        pos = m.end()
    tokens.append(("<eof>", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def offset(self) -> int:
        return self.tokens[self.i][1]

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok!r}", self.offset())
        self.i += 1
        return tok

    def iff(self) -> Formula:
        left = self.imp()
        while self.peek() == "<->":
            self.take()
            left = Iff(left, self.imp())
        return left

    def imp(self) -> Formula:
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.imp())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.peek() == "|":
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.unary()
        while self.peek() == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok == "(":
            self.take()
            inner = self.iff()
            self.take(")")
            return inner
        if tok == "_|_":
            self.take()
            return BOT
        if tok == "<eof>":
            raise ParseError("unexpected end of input", self.offset())
        if re.fullmatch(r"[a-z][a-zA-Z0-9_]*", tok):
            self.take()
            return Var(tok)
        raise ParseError(f"unexpected token {tok!r}", self.offset())


def parse(text: str) -> Formula:
    """Parse the ASCII grammar (``~ & | -> <->``, ``_|_`` for falsum).

    ``<->`` binds weakest; ``->`` is right associative.
    """
    p = _Parser(text)
    result = p.iff()
    if p.peek() != "<eof>":
        raise ParseError(f"unexpected token {p.peek()!r}", p.offset())
    return result


def parse_many(texts: Iterable[str]) -> list[Formula]:
    return [parse(t) for t in texts]
