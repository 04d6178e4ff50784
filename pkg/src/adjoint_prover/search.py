"""Backward proof search for the tree calculus, optionally with assumption rules.

Strategy, per goal:

1. close by BotL, TopR or Id;
2. prune if the sequent already occurs on the branch;
3. decompose And / Or / Dia items anywhere in the antecedent (invertible);
4. saturate with BoxL and Assn, adding a formula only when the level does
   not already contain it in decomposed form (both rules keep their
   conclusion, so weakening makes them invertible);
5. AndR and BoxR (invertible);
6. backtrack over OrR1 / OrR2 and over DiaR on the top-level items.

Failure is reported as exhausted only when no bound was hit anywhere.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Optional, Union

from .calculus import (
    ANDL, ANDR, ASSN, BOTL, BOXL, BOXR, DIAL, DIAR, ID, ORL, ORR1, ORR2, TOPR,
    AssumptionRule, Derivation, _index_assumptions, covered, instance_premisses,
)
from .syntax import (
    And, Ann, Atom, Bot, Box, Context, Dia, Or, Sequent, Top, level, occurrences, replace,
)


@dataclass
class SearchConfig:
    max_depth: int = 256
    max_boxl_per_branch: int = 64
    loop_check: bool = True
    assumptions: tuple = ()
    max_nodes: int = 200_000
    # debug switch: when off, BoxL drops the boxed formula from its item
    duplicate_boxl: bool = True

    def __post_init__(self):
        if self.max_depth < 1 or self.max_boxl_per_branch < 0 or self.max_nodes < 1:
            raise ValueError("search bounds must be positive")
        self.assumptions = tuple(self.assumptions or ())


@dataclass
class SearchStats:
    nodes: int = 0
    max_depth: int = 0
    loop_prunes: int = 0
    boxl_suppressed: int = 0
    bound_hits: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class Proved:
    derivation: Derivation
    stats: SearchStats = field(default_factory=SearchStats)
    status = "proved"


@dataclass
class NotProvedWithinBounds:
    stats: SearchStats = field(default_factory=SearchStats)
    exhausted: bool = False
    status = "not_proved"


@dataclass
class Refuted:
    countermodel: object
    stats: SearchStats = field(default_factory=SearchStats)
    status = "refuted"


SearchOutcome = Union[Proved, NotProvedWithinBounds, Refuted]


class _Budget(Exception):
    pass


class _Searcher:
    def __init__(self, config: SearchConfig):
        self.config = config
        self.table = _index_assumptions(config.assumptions)
        self.rules = list(self.table.values())
        self.stats = SearchStats()
        self.proofs = {}  # sequent -> derivation
        self.failures = set()  # sequents that fail independently of history

    def run(self, seq: Sequent) -> Optional[Derivation]:
        d, _ = self.search(seq, 0, frozenset(), 0)
        return d

    def node(self, seq, rule, prems, path=(), index=None, inner=None, assumption=None):
        return Derivation(seq, rule, tuple(prems), tuple(path), index, inner, assumption)

    def search(self, seq: Sequent, depth: int, history: frozenset, boxls: int):
        """Return (derivation or None, clean) where clean means the failure is unconditional."""
        st = self.stats
        st.nodes += 1
        st.max_depth = max(st.max_depth, depth)
        if st.nodes > self.config.max_nodes:
            st.bound_hits += 1
            raise _Budget()
        if seq in self.proofs:
            return self._restate(self.proofs[seq], seq), True
        if seq in self.failures:
            return None, True
        d = self._axiom(seq)
        if d is not None:
            return d, True
        if depth >= self.config.max_depth:
            st.bound_hits += 1
            return None, False
        if self.config.loop_check and seq in history:
            st.loop_prunes += 1
            return None, False
        history = history | {seq}
        d, clean = self._expand(seq, depth, history, boxls)
        if d is not None:
            self.proofs[seq] = d
        elif clean:
            self.failures.add(seq)
        return d, clean

    @staticmethod
    def _restate(d: Derivation, seq: Sequent) -> Derivation:
        if d.conclusion.antecedent.items == seq.antecedent.items:
            return d
        from .calculus import relabel
        return relabel(d, seq)

    def _axiom(self, seq: Sequent) -> Optional[Derivation]:
        ant, succ = seq.antecedent, seq.succedent
        for path, i, item in occurrences(ant):
            if isinstance(item, Bot):
                return self.node(seq, BOTL, (), path, i)
        if isinstance(succ, Top):
            return self.node(seq, TOPR, ())
        if isinstance(succ, Atom):
            for i, item in enumerate(ant.items):
                if item == succ:
                    return self.node(seq, ID, (), (), i)
        return None

    def _expand(self, seq, depth, history, boxls):
        ant, succ = seq.antecedent, seq.succedent
        # invertible decompositions of the antecedent
        for path, i, item in occurrences(ant):
            if isinstance(item, (And, Dia, Or)):
                rule = ANDL if isinstance(item, And) else DIAL if isinstance(item, Dia) else ORL
                prems = instance_premisses(rule, seq, path, i)
                return self._all(seq, rule, prems, depth, history, boxls, path=path, index=i)
        # saturation with BoxL and Assn
        for path, i, item in occurrences(ant):
            if not isinstance(item, Ann):
                continue
            lvl = level(ant, path)
            for j, b in enumerate(item.context.items):
                if not (isinstance(b, Box) and b.agent == item.agent):
                    continue
                if covered(b.body, lvl):
                    self.stats.boxl_suppressed += 1
                    continue
                if boxls >= self.config.max_boxl_per_branch:
                    self.stats.bound_hits += 1
                    return None, False
                if self.config.duplicate_boxl:
                    prems = instance_premisses(BOXL, seq, path, i, j)
                else:
                    rest = Context(item.context.items[:j] + item.context.items[j + 1:])
                    prems = [Sequent(replace(ant, path, i, [Ann(item.agent, rest), b.body]), succ)]
                return self._all(seq, BOXL, prems, depth, history, boxls + 1,
                                 path=path, index=i, inner=j)
            for a in self.rules:
                if a.agent != item.agent or Atom(a.trigger) not in item.context.items:
                    continue
                if covered(a.consequent, lvl):
                    continue
                prems = instance_premisses(ASSN, seq, path, i, assumption=a.id,
                                           assumptions=self.table)
                return self._all(seq, ASSN, prems, depth, history, boxls,
                                 path=path, index=i, assumption=a.id)
        # invertible right rules
        if isinstance(succ, And):
            return self._all(seq, ANDR, instance_premisses(ANDR, seq), depth, history, boxls)
        if isinstance(succ, Box):
            return self._all(seq, BOXR, instance_premisses(BOXR, seq), depth, history, boxls)
        # choices
        clean = True
        if isinstance(succ, Or):
            for rule in (ORR1, ORR2):
                d, c = self._all(seq, rule, instance_premisses(rule, seq), depth, history, boxls)
                if d is not None:
                    return d, True
                clean = clean and c
            return None, clean
        if isinstance(succ, Dia):
            tried = set()
            for i, item in enumerate(ant.items):
                if not (isinstance(item, Ann) and item.agent == succ.agent):
                    continue
                if item.context in tried:
                    continue
                tried.add(item.context)
                d, c = self._all(seq, DIAR, instance_premisses(DIAR, seq, (), i),
                                 depth, history, boxls, index=i)
                if d is not None:
                    return d, True
                clean = clean and c
            return None, clean
        return None, True

    def _all(self, seq, rule, prems, depth, history, boxls, **pos):
        subs = []
        for p in prems:
            d, clean = self.search(p, depth + 1, history, boxls)
            if d is None:
                return None, clean
            subs.append(d)
        return self.node(seq, rule, subs, **pos), True


def prove(sequent: Sequent, config: Optional[SearchConfig] = None) -> SearchOutcome:
    config = config or SearchConfig()
    s = _Searcher(config)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20 * config.max_depth + 2000))
    try:
        d = s.run(sequent)
    except _Budget:
        return NotProvedWithinBounds(s.stats, exhausted=False)
    finally:
        sys.setrecursionlimit(old)
    if d is not None:
        return Proved(d, s.stats)
    return NotProvedWithinBounds(s.stats, exhausted=s.stats.bound_hits == 0)


def decide(sequent: Sequent, config: Optional[SearchConfig] = None, max_worlds: int = 3,
           cross_check: bool = False) -> SearchOutcome:
    """Proof search followed by countermodel search.

    With ``cross_check`` the refuter also runs after a proof is found, and
    finding both raises ``AssertionError``.
    """
    from .semantics import find_countermodel
    config = config or SearchConfig()
    outcome = prove(sequent, config)
    if isinstance(outcome, Proved):
        if cross_check:
            cm = find_countermodel(sequent, max_worlds, config.assumptions)
            assert cm is None, "proof and countermodel for the same sequent"
        return outcome
    cm = find_countermodel(sequent, max_worlds, config.assumptions)
    if cm is not None:
        return Refuted(cm, outcome.stats)
    return outcome


def provable(sequent: Sequent, assumptions=(), **kw) -> bool:
    return isinstance(prove(sequent, SearchConfig(assumptions=assumptions, **kw)), Proved)
