"""Rules of the nested sequent calculus, derivation checking and enumeration.

Instance data of a node addresses its conclusion's antecedent:

* left rules (AndL, OrL, DiaL, BoxL, Assn, BotL) use ``path``/``index`` for the
  principal item; BoxL additionally uses ``inner`` for the position of the boxed
  formula inside the principal annotated item;
* Id uses ``index`` for the top-level atom;
* DiaR uses ``index`` for the principal top-level annotated item, every other
  top-level item being the parameter;
* Cut uses ``path``/``index`` for the cut formula in its *second* premiss.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace as dc_replace
from functools import cached_property
from typing import Iterable, Optional

from .syntax import (
    And, Ann, Atom, Bot, Box, Context, Dia, EMPTY, Formula, Or, Sequent, Top,
    PathError, align, big_or, canonical, item_at, level, occurrences, parse,
    plug, print_formula, print_sequent, relocate, remove, replace, size,
)

ID, BOTL, TOPR = "Id", "BotL", "TopR"
ANDL, ANDR, ORL, ORR1, ORR2 = "AndL", "AndR", "OrL", "OrR1", "OrR2"
DIAL, DIAR, BOXL, BOXR = "DiaL", "DiaR", "BoxL", "BoxR"
CUT, ASSN = "Cut", "Assn"

RULES = (ID, BOTL, TOPR, ANDL, ANDR, ORL, ORR1, ORR2, DIAL, DIAR, BOXL, BOXR, CUT, ASSN)
LEAF_RULES = (ID, BOTL, TOPR)
LEFT_RULES = (ANDL, ORL, DIAL, BOXL, ASSN)


class RuleError(ValueError):
    """A node does not instantiate the schema it claims."""

    def __init__(self, expected: str, found: str):
        super().__init__(f"expected {expected}; found {found}")
        self.expected = expected
        self.found = found


@dataclass(frozen=True)
class AssumptionRule:
    """Scenario fact: the agent's uncertainty about ``trigger`` implies ``consequent``."""

    agent: str
    trigger: str
    consequent: Formula

    def __post_init__(self):
        if not _atom_disjunction(self.consequent):
            raise ValueError(f"consequent must be a disjunction of atoms: {print_formula(self.consequent)}")

    @property
    def id(self) -> str:
        return f"assn {self.agent} {self.trigger} => {print_formula(self.consequent)}"

    def __str__(self) -> str:
        return self.id


def _atom_disjunction(f) -> bool:
    if isinstance(f, Atom):
        return True
    return isinstance(f, Or) and _atom_disjunction(f.left) and _atom_disjunction(f.right)


def parse_assumption(line: str) -> AssumptionRule:
    """Parse ``assn <agent> <atom> => <atom> | <atom> ...``."""
    words = line.split(None, 3)
    if len(words) < 4 or words[0] != "assn" or not words[3].startswith("=>"):
        raise ValueError(f"malformed assumption line: {line!r}")
    trigger = parse(words[2], "formula")
    if not isinstance(trigger, Atom):
        raise ValueError(f"trigger must be an atom: {words[2]!r}")
    return AssumptionRule(words[1], trigger.name, parse(words[3][2:], "formula"))


def parse_assumptions(text: str) -> list[AssumptionRule]:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(parse_assumption(line))
    return out


def format_assumptions(rules: Iterable[AssumptionRule]) -> str:
    return "".join(r.id + "\n" for r in rules)


def _index_assumptions(assumptions) -> dict:
    if isinstance(assumptions, dict):
        return assumptions
    return {a.id: a for a in assumptions or ()}


@dataclass(frozen=True, eq=False)
class Derivation:
    conclusion: Sequent
    rule: str
    premisses: tuple = ()
    path: tuple = ()
    index: Optional[int] = None
    inner: Optional[int] = None
    assumption: Optional[str] = None

    @cached_property
    def height(self) -> int:
        if not self.premisses:
            return 1
        return 1 + max(p.height for p in self.premisses)

    @cached_property
    def node_count(self) -> int:
        return 1 + sum(p.node_count for p in self.premisses)

    def nodes(self):
        stack = [self]
        while stack:
            d = stack.pop()
            yield d
            stack.extend(reversed(d.premisses))

    def rules_used(self) -> set:
        return {d.rule for d in self.nodes()}

    @property
    def cut_free(self) -> bool:
        return all(d.rule != CUT for d in self.nodes())

    def __str__(self) -> str:
        return render(self)


# ---------------------------------------------------------------------------
# rule schemas


def instance_premisses(rule: str, conclusion: Sequent, path=(), index=None, inner=None,
                       assumption=None, assumptions=None) -> list[Sequent]:
    """Premisses demanded by ``rule`` applied at the given position of ``conclusion``.

    Raises :class:`RuleError` when the conclusion does not fit the schema.
    Cut is not covered; its premisses do not follow from the conclusion.
    """
    ant, succ = conclusion.antecedent, conclusion.succedent
    path = tuple(path)

    def principal():
        try:
            return item_at(ant, path, index)
        except (PathError, TypeError):
            raise RuleError(f"an item at path {list(path)} index {index}",
                            f"no such position in {print_sequent(conclusion)}") from None

    if rule == ID:
        if path:
            raise RuleError("Id atom at top level", f"path {list(path)}")
        p = principal()
        if not isinstance(p, Atom) or p != succ:
            raise RuleError("Gamma, p |- p", f"{_show(p)} |- {print_formula(succ)}")
        return []
    if rule == BOTL:
        p = principal()
        if not isinstance(p, Bot):
            raise RuleError("bot in the antecedent", _show(p))
        return []
    if rule == TOPR:
        if not isinstance(succ, Top):
            raise RuleError("succedent top", print_formula(succ))
        return []
    if rule == ANDL:
        p = principal()
        if not isinstance(p, And):
            raise RuleError("principal conjunction", _show(p))
        return [Sequent(replace(ant, path, index, [p.left, p.right]), succ)]
    if rule == ORL:
        p = principal()
        if not isinstance(p, Or):
            raise RuleError("principal disjunction", _show(p))
        return [Sequent(replace(ant, path, index, [p.left]), succ),
                Sequent(replace(ant, path, index, [p.right]), succ)]
    if rule == DIAL:
        p = principal()
        if not isinstance(p, Dia):
            raise RuleError("principal diamond", _show(p))
        return [Sequent(replace(ant, path, index, [Ann(p.agent, Context((p.body,)))]), succ)]
    if rule == BOXL:
        p = principal()
        if not isinstance(p, Ann):
            raise RuleError("principal annotated item (box m, Gamma)^A", _show(p))
        if inner is None or not 0 <= inner < len(p.context):
            raise RuleError("a boxed formula inside the principal item", f"inner index {inner}")
        b = p.context.items[inner]
        if not isinstance(b, Box) or b.agent != p.agent:
            raise RuleError(f"[{p.agent}] m inside ({'...'})^{p.agent}", _show(b))
        return [Sequent(replace(ant, path, index, [p, b.body]), succ)]
    if rule == ASSN:
        table = _index_assumptions(assumptions)
        rule_ = table.get(assumption)
        if rule_ is None:
            raise RuleError("an assumption from the active set", repr(assumption))
        p = principal()
        if not isinstance(p, Ann) or p.agent != rule_.agent:
            raise RuleError(f"principal item (Gamma, {rule_.trigger})^{rule_.agent}", _show(p))
        if Atom(rule_.trigger) not in p.context.items:
            raise RuleError(f"trigger {rule_.trigger} at the top of the principal item", _show(p))
        return [Sequent(replace(ant, path, index, [p, rule_.consequent]), succ)]
    if rule == ANDR:
        if not isinstance(succ, And):
            raise RuleError("succedent conjunction", print_formula(succ))
        return [Sequent(ant, succ.left), Sequent(ant, succ.right)]
    if rule in (ORR1, ORR2):
        if not isinstance(succ, Or):
            raise RuleError("succedent disjunction", print_formula(succ))
        return [Sequent(ant, succ.left if rule == ORR1 else succ.right)]
    if rule == DIAR:
        if not isinstance(succ, Dia):
            raise RuleError("succedent diamond", print_formula(succ))
        if path:
            raise RuleError("principal item at top level", f"path {list(path)}")
        p = principal()
        if not isinstance(p, Ann) or p.agent != succ.agent:
            raise RuleError(f"principal item (Gamma)^{succ.agent}", _show(p))
        return [Sequent(p.context, succ.body)]
    if rule == BOXR:
        if not isinstance(succ, Box):
            raise RuleError("succedent box", print_formula(succ))
        return [Sequent(Context((Ann(succ.agent, ant),)), succ.body)]
    raise RuleError("a known rule", repr(rule))


def _show(item) -> str:
    from .syntax import print_item
    return print_item(item)


def premisses_of(node: Derivation, assumptions=None) -> list[Sequent]:
    return instance_premisses(node.rule, node.conclusion, node.path, node.index,
                              node.inner, node.assumption, assumptions)


def cut_conclusion(left: Sequent, right: Sequent, path, index) -> Sequent:
    """Conclusion of a cut of ``left`` into position ``(path, index)`` of ``right``."""
    rest, m = remove(right.antecedent, path, index)
    if m != left.succedent:
        raise RuleError(f"cut formula {print_formula(left.succedent)}", _show(m))
    return Sequent(plug(rest, path, left.antecedent), right.succedent)


# ---------------------------------------------------------------------------
# checking


@dataclass
class Rejection:
    node: tuple  # premiss indices from the root
    rule: str
    expected: str
    found: str

    def __str__(self) -> str:
        return f"node {list(self.node)} ({self.rule}): expected {self.expected}; found {self.found}"


def check_node(node: Derivation, assumptions=None, allow_cut=False) -> Optional[tuple[str, str]]:
    """Local check of one node; returns (expected, found) on failure."""
    try:
        if node.rule == CUT:
            if not allow_cut:
                return ("a cut-free derivation", "Cut")
            if len(node.premisses) != 2:
                return ("two premisses", str(len(node.premisses)))
            got = cut_conclusion(node.premisses[0].conclusion, node.premisses[1].conclusion,
                                 node.path, node.index)
            if got != node.conclusion:
                return (print_sequent(got), print_sequent(node.conclusion))
            return None
        want = premisses_of(node, assumptions)
    except (RuleError, PathError) as e:
        expected = getattr(e, "expected", "a valid position")
        found = getattr(e, "found", str(e))
        return (expected, found)
    if len(want) != len(node.premisses):
        return (f"{len(want)} premiss(es)", str(len(node.premisses)))
    for w, p in zip(want, node.premisses):
        if w != p.conclusion:
            return (print_sequent(w), print_sequent(p.conclusion))
    return None


def check(derivation: Derivation, assumptions=None, allow_cut=False) -> list[Rejection]:
    """Check every node; an empty list means the derivation is correct."""
    table = _index_assumptions(assumptions)
    out = []
    stack = [((), derivation)]
    while stack:
        where, node = stack.pop()
        bad = check_node(node, table, allow_cut)
        if bad:
            out.append(Rejection(where, node.rule, *bad))
        for k in range(len(node.premisses) - 1, -1, -1):
            stack.append((where + (k,), node.premisses[k]))
    return out


def is_valid(derivation: Derivation, assumptions=None, allow_cut=False) -> bool:
    return not check(derivation, assumptions, allow_cut)


# ---------------------------------------------------------------------------
# positions across a rule


def premiss_position(node: Derivation, k: int, path, index=None, assumptions=None):
    """Where a position of ``node``'s antecedent lives in premiss ``k``.

    Returns ``(path, index)`` relative to the stored premiss conclusion, or None
    if the rule does not carry that position upward (the principal formula of a
    decomposing rule, or the parameter of DiaR).
    """
    rule = node.rule
    path = tuple(path)
    if rule == ASSN and assumptions is None:
        # the identifier spells out the rule, which is all transport needs
        assumptions = [parse_assumption(node.assumption)]
    if rule in (ANDL, ORL, DIAL):
        added = 2 if rule == ANDL else 1
        pos = relocate(path, index, node.path, node.index, added)
    elif rule in (BOXL, ASSN):
        pos = relocate(path, index, node.path, node.index, 2, keep=True)
    elif rule in (ANDR, ORR1, ORR2):
        pos = (path, index)
    elif rule == BOXR:
        pos = ((0,) + path, index)
    elif rule == DIAR:
        pos = (path[1:], index) if path and path[0] == node.index else None
    else:
        raise ValueError(f"no premiss positions for {rule}")
    if pos is None:
        return None
    expected = premisses_of(node, assumptions)[k].antecedent
    stored = node.premisses[k].conclusion.antecedent
    return align(expected, stored, *pos)


def relabel(node: Derivation, conclusion: Sequent) -> Derivation:
    """Same node with a multiset-equal conclusion; positions are realigned."""
    old = node.conclusion.antecedent
    new = conclusion.antecedent
    if old is new:
        return node if conclusion is node.conclusion else dc_replace(node, conclusion=conclusion)
    if node.rule in (ANDR, ORR1, ORR2, BOXR, TOPR, CUT):
        return dc_replace(node, conclusion=conclusion)
    path, index = align(old, new, node.path, node.index)
    inner = node.inner
    if node.rule == BOXL:
        _, inner = align(old, new, tuple(node.path) + (node.index,), node.inner)
    return dc_replace(node, conclusion=conclusion, path=path, index=index, inner=inner)


def canonicalize(d: Derivation) -> Derivation:
    """Relabel every node so its antecedent is stored in canonical order."""
    prem = tuple(canonicalize(p) for p in d.premisses)
    node = dc_replace(d, premisses=prem)
    return relabel(node, canonical(d.conclusion))


# ---------------------------------------------------------------------------
# backward enumeration


@dataclass(frozen=True)
class Instance:
    rule: str
    premisses: tuple
    path: tuple = ()
    index: Optional[int] = None
    inner: Optional[int] = None
    assumption: Optional[str] = None

    def node(self, conclusion: Sequent, derivations: Iterable[Derivation]) -> Derivation:
        return Derivation(conclusion, self.rule, tuple(derivations), self.path,
                          self.index, self.inner, self.assumption)


def covered(f: Formula, lvl: Context) -> bool:
    """Whether the items at ``lvl`` already contain ``f`` in decomposed form."""
    if f in lvl.items:
        return True
    if isinstance(f, Top):
        return True
    if isinstance(f, And):
        return covered(f.left, lvl) and covered(f.right, lvl)
    if isinstance(f, Or):
        return covered(f.left, lvl) or covered(f.right, lvl)
    if isinstance(f, Dia):
        return any(isinstance(i, Ann) and i.agent == f.agent and covered(f.body, i.context)
                   for i in lvl.items)
    return False


def backward_instances(sequent: Sequent, assumptions=()) -> list[Instance]:
    """Every rule instance whose conclusion is ``sequent`` (Cut excluded).

    BoxL and Assn instances that would only add an item already present at
    that level are left out.
    """
    ant, succ = sequent.antecedent, sequent.succedent
    table = _index_assumptions(assumptions)
    out = []

    def add(rule, **kw):
        prem = instance_premisses(rule, sequent, assumptions=table, **kw)
        out.append(Instance(rule, tuple(prem), **kw))

    for i, item in enumerate(ant.items):
        if isinstance(item, Atom) and item == succ:
            add(ID, index=i)
    if isinstance(succ, Top):
        add(TOPR)
    for path, i, item in occurrences(ant):
        if isinstance(item, Bot):
            add(BOTL, path=path, index=i)
    for path, i, item in occurrences(ant):
        if isinstance(item, And):
            add(ANDL, path=path, index=i)
        elif isinstance(item, Or):
            add(ORL, path=path, index=i)
        elif isinstance(item, Dia):
            add(DIAL, path=path, index=i)
        elif isinstance(item, Ann):
            lvl = level(ant, path)
            for j, b in enumerate(item.context.items):
                if isinstance(b, Box) and b.agent == item.agent and b.body not in lvl.items:
                    add(BOXL, path=path, index=i, inner=j)
            for a in table.values():
                if (a.agent == item.agent and Atom(a.trigger) in item.context.items
                        and a.consequent not in lvl.items):
                    add(ASSN, path=path, index=i, assumption=a.id)
    if isinstance(succ, And):
        add(ANDR)
    if isinstance(succ, Or):
        add(ORR1)
        add(ORR2)
    if isinstance(succ, Dia):
        for i, item in enumerate(ant.items):
            if isinstance(item, Ann) and item.agent == succ.agent:
                add(DIAR, index=i)
    if isinstance(succ, Box):
        add(BOXR)
    return out


# ---------------------------------------------------------------------------
# identity


def derive_identity(context: Context, formula: Formula) -> Derivation:
    """Cut-free derivation of ``context, formula |- formula``."""
    ant = Context(tuple(context) + (formula,))
    i = len(context)
    concl = Sequent(ant, formula)
    f = formula
    if isinstance(f, Atom):
        return Derivation(concl, ID, index=i)
    if isinstance(f, Bot):
        return Derivation(concl, BOTL, path=(), index=i)
    if isinstance(f, Top):
        return Derivation(concl, TOPR)
    if isinstance(f, And):
        (prem,) = instance_premisses(ANDL, concl, (), i)
        left = derive_identity(Context((f.right,) + tuple(context)), f.left)
        right = derive_identity(Context((f.left,) + tuple(context)), f.right)
        andr = Derivation(prem, ANDR, (left, right))
        return Derivation(concl, ANDL, (andr,), (), i)
    if isinstance(f, Or):
        p1, p2 = instance_premisses(ORL, concl, (), i)
        b1 = Derivation(p1, ORR1, (derive_identity(context, f.left),))
        b2 = Derivation(p2, ORR2, (derive_identity(context, f.right),))
        return Derivation(concl, ORL, (b1, b2), (), i)
    if isinstance(f, Dia):
        (prem,) = instance_premisses(DIAL, concl, (), i)
        diar = Derivation(prem, DIAR, (derive_identity(EMPTY, f.body),), index=0)
        return Derivation(concl, DIAL, (diar,), (), i)
    if isinstance(f, Box):
        (prem,) = instance_premisses(BOXR, concl)
        top = derive_identity(Context((prem.antecedent.items[0],)), f.body)
        boxl = Derivation(prem, BOXL, (top,), (), 0, i)
        return Derivation(concl, BOXR, (boxl,))
    raise TypeError(f"not a formula: {formula!r}")


# ---------------------------------------------------------------------------
# serialization


def to_dict(d: Derivation) -> dict:
    d = canonicalize(d)
    return _to_dict(d)


def _to_dict(d: Derivation) -> dict:
    out = {"rule": d.rule, "conclusion": print_sequent(d.conclusion)}
    if d.rule not in (TOPR, ANDR, ORR1, ORR2, BOXR):
        out["path"] = list(d.path)
        out["index"] = d.index
    if d.inner is not None:
        out["inner"] = d.inner
    if d.assumption is not None:
        out["assumption"] = d.assumption
    out["premisses"] = [_to_dict(p) for p in d.premisses]
    return out


def from_dict(data: dict) -> Derivation:
    if data.get("rule") not in RULES:
        raise ValueError(f"unknown rule {data.get('rule')!r}")
    return Derivation(
        conclusion=parse(data["conclusion"], "sequent"),
        rule=data["rule"],
        premisses=tuple(from_dict(p) for p in data.get("premisses", ())),
        path=tuple(data.get("path", ())),
        index=data.get("index"),
        inner=data.get("inner"),
        assumption=data.get("assumption"),
    )


def dumps(d: Derivation, assumptions=(), indent=1) -> str:
    doc = {"proof": to_dict(d)}
    if assumptions:
        doc["assumptions"] = [a.id for a in assumptions]
    return json.dumps(doc, indent=indent, ensure_ascii=False)


def loads(text: str) -> tuple[Derivation, list[AssumptionRule]]:
    doc = json.loads(text)
    if "proof" not in doc:
        return from_dict(doc), []
    return from_dict(doc["proof"]), [parse_assumption(a) for a in doc.get("assumptions", ())]


def render(d: Derivation, indent: str = "  ") -> str:
    """Indented text rendering, conclusion first."""
    lines = []
    stack = [(0, d)]
    while stack:
        depth, node = stack.pop()
        label = node.rule if node.rule != ASSN else f"Assn[{node.assumption}]"
        lines.append(f"{indent * depth}{print_sequent(node.conclusion)}    ({label})")
        for p in reversed(node.premisses):
            stack.append((depth + 1, p))
    return "\n".join(lines)
