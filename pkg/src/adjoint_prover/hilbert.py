"""Hilbert-style presentation on single-formula sequents ``m |- m'``.

Axioms are schemas over formula metavariables and one agent metavariable;
a step cites either an axiom (checked by matching) or one of the rules
cut, or, and, dia, box with the indices of earlier steps.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Optional

from .syntax import (
    BOT, TOP, And, Atom, Bot, Box, Context, Dia, Formula, Or, Sequent, Top,
    parse_formula, print_formula,
)


@dataclass(frozen=True)
class Meta(Formula):
    """Formula metavariable inside a schema."""
    name: str


_M, _M1, _M2 = Meta("m"), Meta("m1"), Meta("m2")
_A = "?A"

AXIOMS = {
    "refl": (_M, _M),
    "bot": (BOT, _M),
    "top": (_M, TOP),
    "dist": (And(_M, Or(_M1, _M2)), Or(And(_M, _M1), And(_M, _M2))),
    "or-left": (_M, Or(_M, _M1)),
    "or-right": (_M1, Or(_M, _M1)),
    "and-left": (And(_M, _M1), _M),
    "and-right": (And(_M, _M1), _M1),
    "dia-join": (Dia(_A, Or(_M, _M1)), Or(Dia(_A, _M), Dia(_A, _M1))),
    "dia-bot": (Dia(_A, BOT), BOT),
    "box-meet": (And(Box(_A, _M), Box(_A, _M1)), Box(_A, And(_M, _M1))),
    "box-top": (TOP, Box(_A, TOP)),
    "counit": (Dia(_A, Box(_A, _M)), _M),
    "unit": (_M, Box(_A, Dia(_A, _M))),
}

RULES = ("cut", "or", "and", "dia", "box")


def _metas(f, out=None) -> list:
    out = [] if out is None else out
    if isinstance(f, Meta):
        if f not in out:
            out.append(f)
    elif isinstance(f, (And, Or)):
        _metas(f.left, out)
        _metas(f.right, out)
    elif isinstance(f, (Dia, Box)):
        _metas(f.body, out)
    return out


def _modal(f) -> bool:
    if isinstance(f, (Dia, Box)):
        return True
    if isinstance(f, (And, Or)):
        return _modal(f.left) or _modal(f.right)
    return False


def _subst(f, env: dict):
    if isinstance(f, Meta):
        return env[f.name]
    if isinstance(f, And):
        return And(_subst(f.left, env), _subst(f.right, env))
    if isinstance(f, Or):
        return Or(_subst(f.left, env), _subst(f.right, env))
    if isinstance(f, (Dia, Box)):
        agent = env[f.agent] if f.agent == _A else f.agent
        return type(f)(agent, _subst(f.body, env))
    return f


def _match(pattern, f, env: dict) -> bool:
    if isinstance(pattern, Meta):
        if pattern.name in env:
            return env[pattern.name] == f
        env[pattern.name] = f
        return True
    if type(pattern) is not type(f):
        return False
    if isinstance(pattern, (Top, Bot)):
        return True
    if isinstance(pattern, Atom):
        return pattern == f
    if isinstance(pattern, (And, Or)):
        return _match(pattern.left, f.left, env) and _match(pattern.right, f.right, env)
    if pattern.agent == _A:
        if _A in env and env[_A] != f.agent:
            return False
        env[_A] = f.agent
    elif pattern.agent != f.agent:
        return False
    return _match(pattern.body, f.body, env)


def match_axiom(name: str, lhs: Formula, rhs: Formula) -> Optional[dict]:
    """Metavariable assignment making the axiom ``name`` equal to ``lhs |- rhs``."""
    pl, pr = AXIOMS[name]
    env = {}
    if _match(pl, lhs, env) and _match(pr, rhs, env):
        return env
    return None


def axiom_instances(atoms, agents) -> list[tuple[str, Formula, Formula]]:
    """Every axiom with its metavariables ranging over ``atoms`` and agent over ``agents``."""
    atoms = [Atom(a) if isinstance(a, str) else a for a in atoms]
    agents = list(agents)
    if not atoms or not agents:
        raise ValueError("need at least one atom and one agent")
    out = []
    for name, (lhs, rhs) in AXIOMS.items():
        metas = _metas(rhs, _metas(lhs))
        modal = _modal(lhs) or _modal(rhs)
        for values in itertools.product(atoms, repeat=len(metas)):
            env = {m.name: v for m, v in zip(metas, values)}
            for agent in (agents if modal else agents[:1]):
                env[_A] = agent
                out.append((name, _subst(lhs, env), _subst(rhs, env)))
    return out


def as_sequent(lhs: Formula, rhs: Formula) -> Sequent:
    return Sequent(Context((lhs,)), rhs)


@dataclass(frozen=True)
class HilbertStep:
    conclusion: tuple  # (m, m')
    justification: str  # axiom name or rule name
    premisses: tuple = ()

    def text(self) -> str:
        lhs, rhs = self.conclusion
        return f"{print_formula(lhs)} |- {print_formula(rhs)}"


@dataclass
class HilbertDerivation:
    steps: list = field(default_factory=list)

    @property
    def conclusion(self):
        return self.steps[-1].conclusion if self.steps else None

    def add(self, lhs, rhs, justification, *premisses) -> int:
        self.steps.append(HilbertStep((lhs, rhs), justification, tuple(premisses)))
        return len(self.steps) - 1

    def to_dict(self) -> dict:
        return {"steps": [{"conclusion": s.text(), "rule": s.justification,
                           "premisses": list(s.premisses)} for s in self.steps]}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> "HilbertDerivation":
        steps = []
        for s in data["steps"]:
            lhs, rhs = s["conclusion"].split("|-")
            steps.append(HilbertStep((parse_formula(lhs), parse_formula(rhs)), s["rule"],
                                     tuple(s.get("premisses", ()))))
        return cls(steps)


def _check_step(steps, k: int) -> Optional[str]:
    step = steps[k]
    lhs, rhs = step.conclusion
    why = step.justification
    if any(not isinstance(i, int) or not 0 <= i < k for i in step.premisses):
        return "premisses must be earlier steps"
    prem = [steps[i].conclusion for i in step.premisses]
    if why in AXIOMS:
        if prem:
            return "axioms take no premisses"
        if match_axiom(why, lhs, rhs) is None:
            return f"not an instance of axiom {why}"
        return None
    if why == "cut":
        if len(prem) != 2:
            return "cut needs two premisses"
        (a, b), (c, d) = prem
        if not (a == lhs and b == c and d == rhs):
            return "cut premisses must be m |- m' and m' |- m''"
        return None
    if why == "or":
        if len(prem) != 2 or not isinstance(lhs, Or):
            return "or concludes m | m' |- m'' from two premisses"
        if prem != [(lhs.left, rhs), (lhs.right, rhs)]:
            return "or premisses must be m |- m'' and m' |- m''"
        return None
    if why == "and":
        if len(prem) != 2 or not isinstance(rhs, And):
            return "and concludes m |- m' & m'' from two premisses"
        if prem != [(lhs, rhs.left), (lhs, rhs.right)]:
            return "and premisses must be m |- m' and m |- m''"
        return None
    if why in ("dia", "box"):
        kind = Dia if why == "dia" else Box
        if len(prem) != 1:
            return f"{why} takes one premiss"
        if not (isinstance(lhs, kind) and isinstance(rhs, kind) and lhs.agent == rhs.agent):
            return f"{why} concludes two {why} formulas of one agent"
        if prem[0] != (lhs.body, rhs.body):
            return f"{why} premiss must relate the bodies"
        return None
    return f"unknown justification {why!r}"


def check_hilbert(derivation: HilbertDerivation) -> list[tuple[int, str]]:
    """Rejections as (step index, reason); empty when every step is justified."""
    out = []
    for k in range(len(derivation.steps)):
        bad = _check_step(derivation.steps, k)
        if bad:
            out.append((k, bad))
    return out
