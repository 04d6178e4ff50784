"""Muddy children scenarios as assumption rules plus query sequents.

Atoms ``s{...}`` name the exact set of muddy children (``s{}`` for none);
children are agents ``1..n``.  Child ``i`` at state ``b`` considers ``b`` and
``b`` with its own status flipped.  The father's announcement removes the
empty state from every uncertainty; round ``r`` removes the states with
exactly ``r`` muddy children.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

from .calculus import AssumptionRule, format_assumptions
from .syntax import And, Atom, Box, Context, Or, Sequent, big_or

BEFORE, AFTER = "before_father", "after_father"


def atom(state) -> Atom:
    return Atom("s{" + ",".join(str(c) for c in sorted(state)) + "}")


@dataclass(frozen=True)
class MuddyConfig:
    n: int
    k: int
    round: Union[str, int] = BEFORE
    variant: str = "honest"

    def __post_init__(self):
        if self.variant not in ("honest", "liar"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.n < 1:
            raise ValueError("need at least one child")
        if self.variant == "liar":
            if self.k != 0:
                raise ValueError("the liar variant has no muddy child")
            if self.round not in (BEFORE, AFTER):
                raise ValueError("the liar variant stops at the father's announcement")
        else:
            if not 1 <= self.k <= self.n:
                raise ValueError("need 1 <= k <= n")
            if self.round not in (BEFORE, AFTER):
                if not isinstance(self.round, int) or not 1 <= self.round <= self.k - 1:
                    raise ValueError(f"round must be {BEFORE}, {AFTER} or 1..k-1")

    @property
    def stage(self) -> int:
        """-1 before the father, 0 after him, r after round r."""
        if self.round == BEFORE:
            return -1
        if self.round == AFTER:
            return 0
        return int(self.round)

    @property
    def muddy(self) -> frozenset:
        return frozenset(range(1, self.k + 1))

    @property
    def children(self) -> list[int]:
        return list(range(1, self.n + 1))

    @classmethod
    def from_dict(cls, data: dict) -> "MuddyConfig":
        rnd = data.get("round", BEFORE)
        if isinstance(rnd, str) and rnd.isdigit():
            rnd = int(rnd)
        return cls(int(data["n"]), int(data["k"]), rnd, data.get("variant", "honest"))

    @classmethod
    def loads(cls, text: str) -> "MuddyConfig":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "round": self.round, "variant": self.variant}


def possible(config: MuddyConfig, child: int, state: frozenset) -> list[frozenset]:
    """States ``child`` cannot tell apart from ``state`` at the configured stage,
    the state itself first."""
    out = []
    for s in (state, state ^ {child}):
        if config.stage >= 0 and not s:
            continue
        if 1 <= len(s) <= config.stage:
            continue
        out.append(s)
    return out


def build_assumptions(config: MuddyConfig) -> list[AssumptionRule]:
    """Rules for every state reachable from the real one through uncertainties."""
    start = config.muddy
    seen, todo, rules = {start}, [start], []
    while todo:
        state = todo.pop(0)
        for child in config.children:
            opts = possible(config, child, state)
            if not opts:
                continue
            rules.append(AssumptionRule(str(child), atom(state).name, big_or([atom(s) for s in opts])))
            for s in opts:
                if s not in seen:
                    seen.add(s)
                    todo.append(s)
    return rules


@dataclass(frozen=True)
class Query:
    name: str
    sequent: Sequent
    expected: bool  # True: should be provable


def _box(child, f):
    return Box(str(child), f)


def build_queries(config: MuddyConfig) -> list[Query]:
    out = []
    real = config.muddy
    s = atom(real)

    def q(name, goal, expected):
        out.append(Query(name, Sequent(Context((s,)), goal), expected))

    if config.variant == "liar":
        for i in config.children:
            own = atom({i})
            q(f"liar-belief {i}", _box(i, own), config.stage >= 0)
            q(f"liar-uncertainty {i}", _box(i, Or(s, own)), True)
            q(f"liar-truth {i}", _box(i, s), False)
        return out
    knows = config.stage >= config.k - 1
    for i in sorted(real):
        q(f"muddy-uncertainty {i}", _box(i, Or(s, atom(real - {i}))), True)
        q(f"muddy-knows {i}", _box(i, s), knows)
        if knows:
            others = sorted(real - {i}) or [i]
            for j in others:
                q(f"knowledge {i},{j}", And(_box(i, s), _box(i, _box(j, s))), True)
    for w in config.children:
        if w in real:
            continue
        q(f"clean-uncertainty {w}", _box(w, Or(s, atom(real | {w}))), True)
        q(f"clean-control {w}", _box(w, s), False)
    return out


def all_configs(max_n: int = 4, liar: bool = True):
    for n in range(1, max_n + 1):
        for k in range(1, n + 1):
            for rnd in [BEFORE, AFTER] + list(range(1, k)):
                yield MuddyConfig(n, k, rnd)
        if liar:
            for rnd in (BEFORE, AFTER):
                yield MuddyConfig(n, 0, rnd, "liar")


def export_assumptions(config: MuddyConfig) -> str:
    return format_assumptions(build_assumptions(config))
