"""Formulas, nested contexts, sequents and hole addressing.

A context is a finite multiset of items, where an item is either a formula
or an agent-annotated context ``(Gamma)^A``.  Contexts keep the order in which
their items were built (that order is what :data:`Path` indices refer to), but
compare and hash as nested multisets.

A context-with-a-hole is represented as a pair ``(surroundings, path)``: the
path lists, level by level, the index of the annotated item to descend into,
and the hole sits at the level reached.  Plugging prepends the filler's items
at that level, so indices inside the filler survive plugging unchanged and
combining two holes is plain path concatenation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Union

Path = tuple  # tuple[int, ...]


class Formula:
    """Base class of the formula AST."""

    __slots__ = ()

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Dia(Formula):
    agent: str
    body: Formula


@dataclass(frozen=True)
class Box(Formula):
    agent: str
    body: Formula


BOT = Bot()
TOP = Top()


@dataclass(frozen=True)
class Ann:
    """An agent-annotated context, read as the diamond of its conjunction."""

    agent: str
    context: "Context"

    def __str__(self) -> str:
        return print_item(self)


Item = Union[Formula, Ann]


@dataclass(frozen=True, eq=False)
class Context:
    items: tuple = ()

    def __post_init__(self):
        if not isinstance(self.items, tuple):
            object.__setattr__(self, "items", tuple(self.items))

    @cached_property
    def key(self) -> tuple:
        return tuple(sorted(item_key(i) for i in self.items))

    def __eq__(self, other):
        if not isinstance(other, Context):
            return NotImplemented
        return len(self.items) == len(other.items) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __iter__(self) -> Iterator[Item]:
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __add__(self, other: "Context") -> "Context":
        return Context(self.items + tuple(other))

    def __str__(self) -> str:
        return print_context(self)

    def __repr__(self) -> str:
        return f"Context({print_context(self)!r})"


EMPTY = Context(())


@dataclass(frozen=True)
class Sequent:
    antecedent: Context
    succedent: Formula

    def __str__(self) -> str:
        return print_sequent(self)


def ctx(*items: Item) -> Context:
    return Context(items)


# ---------------------------------------------------------------------------
# size and canonical form


def size(value) -> int:
    """Weighted operator count; modalities weigh 2, annotations add 1."""
    if isinstance(value, (Bot, Top, Atom)):
        return 0
    if isinstance(value, (And, Or)):
        return 1 + size(value.left) + size(value.right)
    if isinstance(value, (Dia, Box)):
        return 2 + size(value.body)
    if isinstance(value, Ann):
        return 1 + size(value.context)
    if isinstance(value, Context):
        return sum(size(i) for i in value.items)
    if isinstance(value, Sequent):
        return size(value.antecedent) + size(value.succedent)
    raise TypeError(f"no size for {value!r}")


def item_key(item: Item) -> tuple:
    return (size(item), print_item(item))


def canonical(value):
    """Recursively reorder items by (size, printed form)."""
    if isinstance(value, Context):
        items = [canonical(i) for i in value.items]
        items.sort(key=item_key)
        return Context(tuple(items))
    if isinstance(value, Ann):
        return Ann(value.agent, canonical(value.context))
    if isinstance(value, Sequent):
        return Sequent(canonical(value.antecedent), value.succedent)
    return value


# ---------------------------------------------------------------------------
# holes


class PathError(ValueError):
    pass


def level(context: Context, path: Path) -> Context:
    """The context found at the end of ``path``."""
    for step in path:
        try:
            item = context.items[step]
        except (IndexError, TypeError):
            raise PathError(f"no item {step!r} in {context}") from None
        if not isinstance(item, Ann):
            raise PathError(f"item {step} of {context} is not annotated")
        context = item.context
    return context


def valid_path(context: Context, path: Path) -> bool:
    try:
        level(context, path)
    except PathError:
        return False
    return True


def plug(context: Context, path: Path, filler: Context) -> Context:
    """Fill the hole at ``path`` of ``context`` with the items of ``filler``."""
    if not path:
        return Context(tuple(filler) + context.items)
    i = path[0]
    try:
        item = context.items[i]
    except (IndexError, TypeError):
        raise PathError(f"no item {i!r} in {context}") from None
    if not isinstance(item, Ann):
        raise PathError(f"item {i} of {context} is not annotated")
    inner = Ann(item.agent, plug(item.context, path[1:], filler))
    return Context(context.items[:i] + (inner,) + context.items[i + 1:])


def combine(outer: Path, inner: Path) -> Path:
    """Path of the hole of ``outer`` filled by a context-with-a-hole at ``inner``.

    Valid for the surroundings ``plug(outer_ctx, outer, inner_ctx)``.
    """
    return tuple(outer) + tuple(inner)


def remove(context: Context, path: Path, index: int) -> tuple[Context, Item]:
    """Split off the item at ``(path, index)``; returns (surroundings, item)."""
    lvl = level(context, path)
    if not 0 <= index < len(lvl.items):
        raise PathError(f"no item {index} at {list(path)} in {context}")
    item = lvl.items[index]
    rest = Context(lvl.items[:index] + lvl.items[index + 1:])
    return _set_level(context, path, rest), item


def replace(context: Context, path: Path, index: int, new_items: Iterable[Item]) -> Context:
    rest, _ = remove(context, path, index)
    return plug(rest, path, Context(tuple(new_items)))


def item_at(context: Context, path: Path, index: int) -> Item:
    lvl = level(context, path)
    if not 0 <= index < len(lvl.items):
        raise PathError(f"no item {index} at {list(path)} in {context}")
    return lvl.items[index]


def _set_level(context: Context, path: Path, new: Context) -> Context:
    if not path:
        return new
    i = path[0]
    item = context.items[i]
    inner = Ann(item.agent, _set_level(item.context, path[1:], new))
    return Context(context.items[:i] + (inner,) + context.items[i + 1:])


def relocate(path: Path, index, at: Path, removed, added: int, keep: bool = False):
    """Track a position through "remove item ``removed`` at level ``at``, then
    prepend ``added`` items there".

    ``index`` may be None to track a level rather than an item.  With ``keep``
    the removed item is itself the first of the prepended ones.  Returns the
    new ``(path, index)``, or None when the position was inside the removed
    item and it was not kept.
    """
    n = len(at)

    def move(k):
        if removed is not None and k == removed:
            return 0 if keep else None
        if removed is not None and k > removed:
            k -= 1
        return k + added

    path = tuple(path)
    if len(path) > n and path[:n] == tuple(at):
        k = move(path[n])
        if k is None:
            return None
        return path[:n] + (k,) + path[n + 1:], index
    if path == tuple(at) and index is not None:
        k = move(index)
        if k is None:
            return None
        return path, k
    return path, index


def align(src: Context, dst: Context, path: Path, index=None):
    """Translate a position in ``src`` to the matching one in ``dst``.

    ``src`` and ``dst`` must be equal as nested multisets; equal items are
    interchangeable, so any matching is correct.
    """
    if src is dst:
        return tuple(path), index
    out = []
    for step in path:
        j = _match(src.items, dst.items, step)
        out.append(j)
        src, dst = src.items[step].context, dst.items[j].context
    if index is not None:
        index = _match(src.items, dst.items, index)
    return tuple(out), index


def _match(src_items, dst_items, k) -> int:
    target = src_items[k]
    # the occurrence with the same rank among equals; a bijection
    rank = sum(1 for i in src_items[:k] if i == target)
    seen = 0
    for j, item in enumerate(dst_items):
        if item == target:
            if seen == rank:
                return j
            seen += 1
    for j, item in enumerate(dst_items):
        if item == target:
            return j
    raise PathError(f"cannot align {print_item(target)}")


def occurrences(context: Context, path: Path = ()) -> Iterator[tuple[Path, int, Item]]:
    """Every item occurrence at every depth, outermost first."""
    for i, item in enumerate(context.items):
        yield tuple(path), i, item
    for i, item in enumerate(context.items):
        if isinstance(item, Ann):
            yield from occurrences(item.context, tuple(path) + (i,))


def levels(context: Context, path: Path = ()) -> Iterator[tuple[Path, Context]]:
    yield tuple(path), context
    for i, item in enumerate(context.items):
        if isinstance(item, Ann):
            yield from levels(item.context, tuple(path) + (i,))


def context_formula(context: Context) -> Formula:
    """Formula reading of a context: conjunction of items, annotations as diamonds."""
    parts = [item_formula(i) for i in context.items]
    if not parts:
        return TOP
    out = parts[-1]
    for f in reversed(parts[:-1]):
        out = And(f, out)
    return out


def item_formula(item: Item) -> Formula:
    if isinstance(item, Ann):
        return Dia(item.agent, context_formula(item.context))
    return item


def atoms_of(value) -> set[str]:
    if isinstance(value, Atom):
        return {value.name}
    if isinstance(value, (And, Or)):
        return atoms_of(value.left) | atoms_of(value.right)
    if isinstance(value, (Dia, Box)):
        return atoms_of(value.body)
    if isinstance(value, Ann):
        return atoms_of(value.context)
    if isinstance(value, Context):
        return set().union(*(atoms_of(i) for i in value.items)) if value.items else set()
    if isinstance(value, Sequent):
        return atoms_of(value.antecedent) | atoms_of(value.succedent)
    return set()


def agents_of(value) -> set[str]:
    if isinstance(value, (And, Or)):
        return agents_of(value.left) | agents_of(value.right)
    if isinstance(value, (Dia, Box)):
        return {value.agent} | agents_of(value.body)
    if isinstance(value, Ann):
        return {value.agent} | agents_of(value.context)
    if isinstance(value, Context):
        return set().union(*(agents_of(i) for i in value.items)) if value.items else set()
    if isinstance(value, Sequent):
        return agents_of(value.antecedent) | agents_of(value.succedent)
    return set()


def big_and(formulas) -> Formula:
    formulas = list(formulas)
    if not formulas:
        return TOP
    out = formulas[-1]
    for f in reversed(formulas[:-1]):
        out = And(f, out)
    return out


def big_or(formulas) -> Formula:
    formulas = list(formulas)
    if not formulas:
        return BOT
    out = formulas[-1]
    for f in reversed(formulas[:-1]):
        out = Or(f, out)
    return out


# ---------------------------------------------------------------------------
# printing


def print_formula(f: Formula) -> str:
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, Top):
        return "top"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, And):
        left = _wrap(f.left, isinstance(f.left, (And, Or)))
        right = _wrap(f.right, isinstance(f.right, Or))
        return f"{left} & {right}"
    if isinstance(f, Or):
        return f"{_wrap(f.left, isinstance(f.left, Or))} | {print_formula(f.right)}"
    if isinstance(f, Dia):
        return f"<{f.agent}>({print_formula(f.body)})"
    if isinstance(f, Box):
        return f"[{f.agent}]{_wrap(f.body, isinstance(f.body, (And, Or)), space=True)}"
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f: Formula, paren: bool, space: bool = False) -> str:
    text = print_formula(f)
    if paren:
        return f"({text})"
    return f" {text}" if space else text


def print_item(item: Item) -> str:
    if isinstance(item, Ann):
        return f"({print_context(item.context)})^{item.agent}"
    return print_formula(item)


def print_context(context: Context) -> str:
    return ", ".join(text for _, text in context.key)


def print_sequent(s: Sequent) -> str:
    ant = print_context(s.antecedent)
    return f"{ant} |- {print_formula(s.succedent)}" if ant else f"|- {print_formula(s.succedent)}"


def to_text(value) -> str:
    if isinstance(value, Sequent):
        return print_sequent(value)
    if isinstance(value, Context):
        return print_context(value)
    return print_item(value)


# ---------------------------------------------------------------------------
# parsing


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos
        self.text = text


_TOKEN = re.compile(r"""
    \s*(?:
      (?P<turnstile>\|-|⊢)
    | (?P<punct>[<>\[\]()^&|,])
    | (?P<atom>[a-z][a-zA-Z0-9_]*(?:\{[a-zA-Z0-9_,]*\})?)
    | (?P<agent>[A-Z][a-zA-Z0-9]*|[0-9]+)
    )""", re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        value = m.group(kind)
        start = m.start(kind)
        if kind == "turnstile":
            value = "|-"
        if kind == "atom" and value in ("top", "bot"):
            kind = value
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, offset=0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def error(self, message):
        raise ParseError(message, self.peek()[2], self.text)

    def take(self, value=None, kind=None):
        tok = self.peek()
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value if value is not None else kind
            self.error(f"expected {want!r}, found {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def at(self, value):
        tok = self.peek()
        return tok[0] == "punct" and tok[1] == value

    # formula := conj ('|' conj)*      conj := unary ('&' unary)*
    def formula(self) -> Formula:
        parts = [self.conj()]
        while self.at("|"):
            self.take("|")
            parts.append(self.conj())
        return big_or(parts)

    def conj(self) -> Formula:
        parts = [self.unary()]
        while self.at("&"):
            self.take("&")
            parts.append(self.unary())
        return big_and(parts)

    def unary(self) -> Formula:
        kind, value, _ = self.peek()
        if self.at("<"):
            self.take("<")
            agent = self.take(kind="agent")[1]
            self.take(">")
            return Dia(agent, self.unary())
        if self.at("["):
            self.take("[")
            agent = self.take(kind="agent")[1]
            self.take("]")
            return Box(agent, self.unary())
        if self.at("("):
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        if kind == "top":
            self.i += 1
            return TOP
        if kind == "bot":
            self.i += 1
            return BOT
        if kind == "atom":
            self.i += 1
            return Atom(value)
        self.error(f"expected a formula, found {value or 'end of input'!r}")

    def _annotation_ahead(self) -> bool:
        # '(' ... matching ')' followed by '^'
        depth = 0
        j = self.i
        while j < len(self.tokens):
            kind, value, _ = self.tokens[j]
            if kind == "punct" and value == "(":
                depth += 1
            elif kind == "punct" and value == ")":
                depth -= 1
                if depth == 0:
                    nxt = self.tokens[j + 1] if j + 1 < len(self.tokens) else ("eof", "", 0)
                    return nxt[0] == "punct" and nxt[1] == "^"
            elif kind == "eof":
                return False
            j += 1
        return False

    def item(self) -> Item:
        if self.at("(") and self._annotation_ahead():
            self.take("(")
            inner = self.context()
            self.take(")")
            self.take("^")
            agent = self.take(kind="agent")[1]
            return Ann(agent, inner)
        return self.formula()

    def context(self) -> Context:
        kind, value, _ = self.peek()
        if kind in ("eof", "turnstile") or (kind == "punct" and value == ")"):
            return EMPTY
        items = [self.item()]
        while self.at(","):
            self.take(",")
            items.append(self.item())
        return Context(tuple(items))

    def sequent(self) -> Sequent:
        ant = self.context()
        self.take(kind="turnstile")
        return Sequent(ant, self.formula())

    def done(self, value):
        if self.peek()[0] != "eof":
            self.error(f"unexpected {self.peek()[1]!r}")
        return value


def parse(text: str, kind: str = "formula"):
    """Parse ``text`` as a formula, context or sequent."""
    p = _Parser(text)
    if kind == "formula":
        return p.done(p.formula())
    if kind == "sequent":
        return p.done(p.sequent())
    if kind == "context":
        return p.done(p.context())
    raise ValueError(f"unknown kind {kind!r}")


def parse_formula(text: str) -> Formula:
    return parse(text, "formula")


def parse_sequent(text: str) -> Sequent:
    return parse(text, "sequent")


def parse_context(text: str) -> Context:
    return parse(text, "context")
