"""Finite models: ordered Kripke structures and finite lattices with adjoint pairs.

Worlds are ``0..n-1``.  Relations are frozensets of pairs; ``(u, v)`` in an
accessibility relation means ``u R v``.  Valuations are downward closed with
respect to the frame order, which is what makes pointwise evaluation agree
with evaluation in the complex algebra of downsets.

Besides the scalar evaluators there is a batch evaluator over every frame of
a given size at once, with relations and sets of worlds packed into bit masks.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Optional

import numpy as np

from .syntax import (
    And, Atom, Bot, Box, Context, Dia, Formula, Or, Sequent, Top,
    agents_of, atoms_of, context_formula, print_formula,
)


class ModelError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Kripke frames and structures


@dataclass(frozen=True)
class KripkeFrame:
    worlds: int
    order: frozenset
    relations: tuple = ()  # ((agent, frozenset of pairs), ...)

    def rel(self, agent: str) -> frozenset:
        for a, r in self.relations:
            if a == agent:
                return r
        return frozenset()

    @property
    def agents(self) -> list[str]:
        return [a for a, _ in self.relations]

    def leq(self, u: int, v: int) -> bool:
        return (u, v) in self.order


def make_frame(worlds: int, order=None, relations=None) -> KripkeFrame:
    """Build a frame; ``order`` defaults to the discrete order and is reflexively closed."""
    base = {(w, w) for w in range(worlds)}
    order = frozenset(base | set(order or ()))
    rels = tuple(sorted((a, frozenset(map(tuple, r))) for a, r in (relations or {}).items()))
    return KripkeFrame(worlds, order, rels)


def frame_violations(frame: KripkeFrame) -> list[str]:
    W = range(frame.worlds)
    le = frame.order
    out = []
    if any((w, w) not in le for w in W):
        out.append("order is not reflexive")
    if any((b, a) in le for (a, b) in le if a != b):
        out.append("order is not antisymmetric")
    if any((a, d) not in le for (a, b) in le for (c, d) in le if b == c):
        out.append("order is not transitive")
    for agent, R in frame.relations:
        # <= . R^-1 . <= within R^-1 and >= . R . >= within R both say:
        # b R c, b <= a, d <= c imply a R d
        for (b, c) in R:
            ups = [a for a in W if (b, a) in le]
            downs = [d for d in W if (d, c) in le]
            if any((a, d) not in R for a in ups for d in downs):
                out.append(f"{agent}: accessibility not closed under the order")
                break
    return sorted(set(out))


@dataclass(frozen=True)
class KripkeStructure:
    frame: KripkeFrame
    valuation: tuple = ()  # ((atom, frozenset of worlds), ...)

    def val(self, atom: str) -> frozenset:
        for a, s in self.valuation:
            if a == atom:
                return s
        raise ModelError(f"no valuation for atom {atom!r}")

    def to_dict(self, witness: Optional[int] = None) -> dict:
        f = self.frame
        out = {
            "worlds": list(range(f.worlds)),
            "order": sorted([u, v] for (u, v) in f.order if u != v),
            "relations": {a: sorted([u, v] for (u, v) in r) for a, r in f.relations},
            "valuation": {a: sorted(s) for a, s in self.valuation},
        }
        if witness is not None:
            out["witness"] = witness
        return out

    def render(self, witness: Optional[int] = None) -> str:
        d = self.to_dict(witness)
        lines = [f"worlds: {', '.join(f'w{w}' for w in d['worlds'])}"]
        if d["order"]:
            lines.append("order: " + ", ".join(f"w{u} <= w{v}" for u, v in d["order"]))
        for a, pairs in d["relations"].items():
            text = ", ".join(f"w{u} R w{v}" for u, v in pairs) or "(empty)"
            lines.append(f"R_{a}: {text}")
        for a, ws in d["valuation"].items():
            lines.append(f"{a}: " + ("{" + ", ".join(f"w{w}" for w in ws) + "}"))
        if witness is not None:
            lines.append(f"fails at: w{witness}")
        return "\n".join(lines)


def make_structure(frame: KripkeFrame, valuation: dict) -> KripkeStructure:
    val = tuple(sorted((a, frozenset(s)) for a, s in valuation.items()))
    s = KripkeStructure(frame, val)
    for a, ws in val:
        if not is_downset(frame, ws):
            raise ModelError(f"valuation of {a} is not downward closed")
    return s


def is_downset(frame: KripkeFrame, worlds: Iterable[int]) -> bool:
    ws = set(worlds)
    return all(u in ws for (u, v) in frame.order if v in ws)


def eval_kripke(structure: KripkeStructure, world: int, formula: Formula) -> bool:
    f = formula
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Atom):
        return world in structure.val(f.name)
    if isinstance(f, And):
        return eval_kripke(structure, world, f.left) and eval_kripke(structure, world, f.right)
    if isinstance(f, Or):
        return eval_kripke(structure, world, f.left) or eval_kripke(structure, world, f.right)
    R = structure.frame.rel(f.agent)
    if isinstance(f, Dia):
        # world R^-1 v, i.e. v R world
        return any(eval_kripke(structure, v, f.body) for (v, w) in R if w == world)
    if isinstance(f, Box):
        return all(eval_kripke(structure, v, f.body) for (w, v) in R if w == world)
    raise TypeError(f"not a formula: {formula!r}")


def sequent_true_kripke(structure: KripkeStructure, sequent: Sequent) -> bool:
    ant = context_formula(sequent.antecedent)
    return all(eval_kripke(structure, w, sequent.succedent)
               for w in range(structure.frame.worlds) if eval_kripke(structure, w, ant))


# ---------------------------------------------------------------------------
# enumeration


@lru_cache(maxsize=None)
def _posets(n: int) -> tuple:
    W = range(n)
    pairs = [(a, b) for a in W for b in W if a != b]
    out = []
    for bits in range(1 << len(pairs)):
        rel = {(a, a) for a in W} | {pairs[i] for i in range(len(pairs)) if bits >> i & 1}
        if any((b, a) in rel for (a, b) in rel if a != b):
            continue
        if any((a, d) not in rel for (a, b) in rel for (c, d) in rel if b == c):
            continue
        out.append(frozenset(rel))
    return tuple(out)


@lru_cache(maxsize=None)
def _relations(order: frozenset, n: int) -> tuple:
    """All accessibility relations compatible with ``order``."""
    W = range(n)
    allp = [(a, b) for a in W for b in W]
    out = []
    for bits in range(1 << len(allp)):
        R = {allp[i] for i in range(len(allp)) if bits >> i & 1}
        # up-closed in the first argument, down-closed in the second
        if all((a, d) in R for (b, c) in R for a in W if (b, a) in order
               for d in W if (d, c) in order):
            out.append(frozenset(R))
    return tuple(out)


@lru_cache(maxsize=None)
def _downsets(order: frozenset, n: int) -> tuple:
    out = []
    for bits in range(1 << n):
        s = {w for w in range(n) if bits >> w & 1}
        if all(u in s for (u, v) in order if v in s):
            out.append(frozenset(s))
    return tuple(out)


def _encode(pairs, n, perm) -> int:
    return sum(1 << (perm[u] * n + perm[v]) for (u, v) in pairs)


@lru_cache(maxsize=None)
def _perm_tables(n: int) -> list:
    """For each world permutation, the image of every packed relation mask."""
    pairs = [(u, v) for u in range(n) for v in range(n)]
    tables = []
    for p in itertools.permutations(range(n)):
        img = [1 << (p[u] * n + p[v]) for (u, v) in pairs]
        t = [0] * (1 << len(pairs))
        for m in range(1, len(t)):
            low = m & -m
            t[m] = t[m ^ low] | img[low.bit_length() - 1]
        tables.append(t)
    return tables


@lru_cache(maxsize=None)
def _frame_codes(n: int, k: int) -> tuple:
    """(order, relations...) of every frame with ``k`` agent slots, one per isomorphism class."""
    tables = _perm_tables(n)
    ident = tuple(range(n))
    seen = set()
    out = []
    for order in _posets(n):
        om = _encode(order, n, ident)
        rels = _relations(order, n)
        masks = [_encode(r, n, ident) for r in rels]
        for combo in itertools.product(range(len(rels)), repeat=k):
            ms = [masks[i] for i in combo]
            key = min((t[om],) + tuple(t[m] for m in ms) for t in tables)
            if key in seen:
                continue
            seen.add(key)
            out.append((order,) + tuple(rels[i] for i in combo))
    return tuple(out)


def enumerate_frames(n: int, agents: Iterable[str]) -> Iterator[KripkeFrame]:
    agents = sorted(agents)
    for code in _frame_codes(n, len(agents)):
        yield KripkeFrame(n, code[0], tuple(zip(agents, code[1:])))


def enumerate_structures(max_worlds: int, agents: Iterable[str], atoms: Iterable[str],
                         min_worlds: int = 1) -> Iterator[KripkeStructure]:
    """Every structure with at most ``max_worlds`` worlds, once per isomorphism class."""
    agents = sorted(agents)
    atoms = sorted(atoms)
    for n in range(min_worlds, max_worlds + 1):
        perms = list(itertools.permutations(range(n)))
        seen = set()
        for order in _posets(n):
            downs = _downsets(order, n)
            for combo in itertools.product(_relations(order, n), repeat=len(agents)):
                for vals in itertools.product(downs, repeat=len(atoms)):
                    key = min(
                        tuple(_encode(x, n, p) for x in (order,) + combo)
                        + tuple(sum(1 << p[w] for w in s) for s in vals)
                        for p in perms)
                    if key in seen:
                        continue
                    seen.add(key)
                    frame = KripkeFrame(n, order, tuple(zip(agents, combo)))
                    yield KripkeStructure(frame, tuple(zip(atoms, vals)))


# ---------------------------------------------------------------------------
# finite lattices with adjoint pairs


@dataclass
class FiniteDLAM:
    carrier: list
    leq: set  # pairs (a, b) meaning a <= b
    dia: dict  # agent -> {element: element}
    box: dict
    _tables: dict = field(default=None, repr=False)

    def le(self, a, b) -> bool:
        return (a, b) in self.leq

    def tables(self) -> dict:
        if self._tables is None:
            self._tables = _lattice_tables(self)
        return self._tables

    def meet(self, a, b):
        return self.tables()["meet"][a, b]

    def join(self, a, b):
        return self.tables()["join"][a, b]

    @property
    def top(self):
        return self.tables()["top"]

    @property
    def bottom(self):
        return self.tables()["bottom"]


def _bound(dlam, candidates, upper: bool):
    # greatest lower / least upper bound among candidates
    for c in candidates:
        if all((d, c) in dlam.leq if upper else (c, d) in dlam.leq for d in candidates):
            return c
    return None


def _lattice_tables(dlam: FiniteDLAM) -> dict:
    C = dlam.carrier
    meet, join = {}, {}
    for a in C:
        for b in C:
            lower = [c for c in C if (c, a) in dlam.leq and (c, b) in dlam.leq]
            upper = [c for c in C if (a, c) in dlam.leq and (b, c) in dlam.leq]
            meet[a, b] = _bound(dlam, lower, upper=True)
            join[a, b] = _bound(dlam, upper, upper=False)
    tops = [c for c in C if all((d, c) in dlam.leq for d in C)]
    bots = [c for c in C if all((c, d) in dlam.leq for d in C)]
    return {"meet": meet, "join": join,
            "top": tops[0] if tops else None, "bottom": bots[0] if bots else None}


@dataclass
class Violation:
    law: str
    detail: str

    def __str__(self) -> str:
        return f"{self.law}: {self.detail}"


def dlam_validate(dlam: FiniteDLAM) -> list[Violation]:
    """Exhaustively check lattice, monotonicity, adjunction and the derived laws."""
    C = dlam.carrier
    le = dlam.le
    out = []

    def bad(law, detail):
        out.append(Violation(law, detail))

    for a in C:
        if not le(a, a):
            bad("partial-order", f"{a!r} not <= itself")
    for a in C:
        for b in C:
            if a != b and le(a, b) and le(b, a):
                bad("partial-order", f"{a!r} and {b!r} are mutually below")
            for c in C:
                if le(a, b) and le(b, c) and not le(a, c):
                    bad("partial-order", f"<= not transitive at {a!r}, {b!r}, {c!r}")
    if out:
        return out
    t = dlam.tables()
    meet, join = t["meet"], t["join"]
    if any(v is None for v in meet.values()) or any(v is None for v in join.values()):
        bad("lattice", "some pair lacks a meet or join")
        return out
    top, bot = t["top"], t["bottom"]
    if top is None or bot is None:
        bad("bounded", "no top or no bottom")
        return out
    for a in C:
        for b in C:
            for c in C:
                if meet[a, join[b, c]] != join[meet[a, b], meet[a, c]]:
                    bad("distributive", f"at {a!r}, {b!r}, {c!r}")
    agents = sorted(set(dlam.dia) | set(dlam.box))
    for A in agents:
        dia, box = dlam.dia.get(A), dlam.box.get(A)
        if dia is None or box is None:
            bad("adjoint-pair", f"agent {A} lacks a diamond or box")
            continue
        for a in C:
            for b in C:
                if le(a, b) and not le(dia[a], dia[b]):
                    bad("dia-monotone", f"{A}: {a!r} <= {b!r}")
                if le(a, b) and not le(box[a], box[b]):
                    bad("box-monotone", f"{A}: {a!r} <= {b!r}")
                if le(dia[a], b) != le(a, box[b]):
                    bad("adjunction", f"{A}: dia({a!r}) <= {b!r} differs from {a!r} <= box({b!r})")
                if dia[join[a, b]] != join[dia[a], dia[b]]:
                    bad("dia-join", f"{A}: dia({a!r} v {b!r}) != dia({a!r}) v dia({b!r})")
                if box[meet[a, b]] != meet[box[a], box[b]]:
                    bad("box-meet", f"{A}: box({a!r} ^ {b!r}) != box({a!r}) ^ box({b!r})")
                if not le(dia[meet[a, b]], meet[dia[a], dia[b]]):
                    bad("dia-meet-sub", f"{A}: at {a!r}, {b!r}")
                if not le(join[box[a], box[b]], box[join[a, b]]):
                    bad("box-join-sup", f"{A}: at {a!r}, {b!r}")
            if not le(dia[box[a]], a):
                bad("counit", f"{A}: dia(box({a!r})) not <= {a!r}")
            if not le(a, box[dia[a]]):
                bad("unit", f"{A}: {a!r} not <= box(dia({a!r}))")
        if dia[bot] != bot:
            bad("dia-bot", f"{A}: dia(bot) = {dia[bot]!r}")
        if box[top] != top:
            bad("box-top", f"{A}: box(top) = {box[top]!r}")
    return out


def complex_algebra(frame: KripkeFrame) -> FiniteDLAM:
    """Downward-closed sets of worlds with the modal operators of the frame."""
    bad = frame_violations(frame)
    if bad:
        raise ModelError("; ".join(bad))
    carrier = list(_downsets(frame.order, frame.worlds))
    leq = {(a, b) for a in carrier for b in carrier if a <= b}
    W = range(frame.worlds)
    dia, box = {}, {}
    for A in frame.agents:
        R = frame.rel(A)
        dia[A] = {Z: frozenset(w for w in W if any((v, w) in R for v in Z)) for Z in carrier}
        box[A] = {Z: frozenset(w for w in W if all(v in Z for (u, v) in R if u == w))
                  for Z in carrier}
    return FiniteDLAM(carrier, leq, dia, box)


def eval_dlam(dlam: FiniteDLAM, interp: dict, formula: Formula):
    f = formula
    if isinstance(f, Top):
        return dlam.top
    if isinstance(f, Bot):
        return dlam.bottom
    if isinstance(f, Atom):
        try:
            return interp[f.name]
        except KeyError:
            raise ModelError(f"no interpretation for atom {f.name!r}") from None
    if isinstance(f, And):
        return dlam.meet(eval_dlam(dlam, interp, f.left), eval_dlam(dlam, interp, f.right))
    if isinstance(f, Or):
        return dlam.join(eval_dlam(dlam, interp, f.left), eval_dlam(dlam, interp, f.right))
    if isinstance(f, Dia):
        return dlam.dia[f.agent][eval_dlam(dlam, interp, f.body)]
    if isinstance(f, Box):
        return dlam.box[f.agent][eval_dlam(dlam, interp, f.body)]
    raise TypeError(f"not a formula: {formula!r}")


def eval_context_dlam(dlam: FiniteDLAM, interp: dict, context: Context):
    from .syntax import Ann
    value = dlam.top
    for item in context.items:
        if isinstance(item, Ann):
            v = dlam.dia[item.agent][eval_context_dlam(dlam, interp, item.context)]
        else:
            v = eval_dlam(dlam, interp, item)
        value = dlam.meet(value, v)
    return value


def sequent_true_dlam(dlam: FiniteDLAM, interp: dict, sequent: Sequent) -> bool:
    return dlam.le(eval_context_dlam(dlam, interp, sequent.antecedent),
                   eval_dlam(dlam, interp, sequent.succedent))


def valuation_interpretation(structure: KripkeStructure) -> dict:
    return {a: s for a, s in structure.valuation}


# ---------------------------------------------------------------------------
# batch evaluation over every frame of a size


def _mask_pairs(pairs, n) -> int:
    return sum(1 << (u * n + v) for (u, v) in pairs)


@lru_cache(maxsize=None)
def _batch_frames(n: int, k: int):
    """Packed frames grouped by order: list of (order, downset masks, rel array)."""
    groups = {}
    for code in _frame_codes(n, k):
        groups.setdefault(code[0], []).append(code[1:])
    out = []
    for order, combos in groups.items():
        downs = np.array([sum(1 << w for w in s) for s in _downsets(order, n)], dtype=np.int64)
        rel = np.zeros((len(combos), k, n, n), dtype=bool)
        for f, combo in enumerate(combos):
            for a, R in enumerate(combo):
                for (u, v) in R:
                    rel[f, a, u, v] = True
        out.append((order, downs, rel, combos))
    return out


def _modal_tables(rel: np.ndarray, n: int):
    """dia[f, a, mask] and box[f, a, mask] for every set of worlds."""
    F, k = rel.shape[:2]
    masks = np.arange(1 << n)
    member = ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)  # (M, n)
    # dia: w in dia(Z) iff exists v in Z with v R w
    dia_bits = np.einsum("mv,favw->famw", member.astype(np.int32), rel.astype(np.int32)) > 0
    # box: w in box(Z) iff every v with w R v is in Z
    outside = (~member).astype(np.int32)
    box_bits = np.einsum("mv,fawv->famw", outside, rel.astype(np.int32)) == 0
    weights = (1 << np.arange(n)).astype(np.int64)
    return (dia_bits * weights).sum(-1), (box_bits * weights).sum(-1)


class Batch:
    """A chunk of structures: frames ``F`` times valuations ``V``."""

    def __init__(self, n, agents, atoms, order, rel, vals, combos):
        self.n = n
        self.agents = agents
        self.atoms = atoms
        self.order = order
        self.rel = rel  # (F, k, n, n)
        self.vals = vals  # (V, len(atoms)) masks
        self.combos = combos
        self._tables = None

    @property
    def tables(self):
        if self._tables is None:
            self._tables = _modal_tables(self.rel, self.n)
        return self._tables

    def structure(self, f: int, v: int) -> KripkeStructure:
        frame = KripkeFrame(self.n, self.order, tuple(zip(self.agents, self.combos[f])))
        val = tuple((a, frozenset(w for w in range(self.n) if int(self.vals[v, i]) >> w & 1))
                    for i, a in enumerate(self.atoms))
        return KripkeStructure(frame, val)

    # algebraic route: sets of worlds as masks, operators as table lookups
    def masks(self, formula: Formula) -> np.ndarray:
        F, V = self.rel.shape[0], self.vals.shape[0]
        full = (1 << self.n) - 1
        f = formula
        if isinstance(f, Top):
            return np.full((F, V), full, dtype=np.int64)
        if isinstance(f, Bot):
            return np.zeros((F, V), dtype=np.int64)
        if isinstance(f, Atom):
            if f.name not in self.atoms:
                return np.zeros((F, V), dtype=np.int64)
            i = self.atoms.index(f.name)
            return np.broadcast_to(self.vals[:, i][None, :], (F, V)).astype(np.int64)
        if isinstance(f, And):
            return self.masks(f.left) & self.masks(f.right)
        if isinstance(f, Or):
            return self.masks(f.left) | self.masks(f.right)
        body = self.masks(f.body)
        if f.agent not in self.agents:
            # agent with empty accessibility
            return np.zeros_like(body) if isinstance(f, Dia) else np.full_like(body, full)
        a = self.agents.index(f.agent)
        dia, box = self.tables
        table = dia[:, a, :] if isinstance(f, Dia) else box[:, a, :]
        return np.take_along_axis(table, body, axis=1)

    # pointwise route: truth per world through the accessibility relations
    def truth(self, formula: Formula) -> np.ndarray:
        F, V, n = self.rel.shape[0], self.vals.shape[0], self.n
        f = formula
        if isinstance(f, Top):
            return np.ones((F, V, n), dtype=bool)
        if isinstance(f, Bot):
            return np.zeros((F, V, n), dtype=bool)
        if isinstance(f, Atom):
            if f.name not in self.atoms:
                return np.zeros((F, V, n), dtype=bool)
            i = self.atoms.index(f.name)
            bits = (self.vals[:, i][:, None] >> np.arange(n)[None, :]) & 1
            return np.broadcast_to(bits.astype(bool)[None], (F, V, n))
        if isinstance(f, And):
            return self.truth(f.left) & self.truth(f.right)
        if isinstance(f, Or):
            return self.truth(f.left) | self.truth(f.right)
        body = self.truth(f.body)
        if f.agent not in self.agents:
            return np.zeros_like(body) if isinstance(f, Dia) else np.ones_like(body)
        R = self.rel[:, self.agents.index(f.agent)].astype(np.int32)  # (F, u, v)
        b = body.astype(np.int32)
        if isinstance(f, Dia):
            # w satisfies it iff some v with v R w satisfies the body
            return np.einsum("fvw,fxv->fxw", R, b) > 0
        # w satisfies it iff every v with w R v satisfies the body
        return np.einsum("fwv,fxv->fxw", R, 1 - b) == 0


def batches(n: int, agents, atoms, chunk: int = 1 << 20) -> Iterator[Batch]:
    """All structures with exactly ``n`` worlds, in chunks of about ``chunk`` models."""
    agents = sorted(agents)
    atoms = sorted(atoms)
    for order, downs, rel, combos in _batch_frames(n, len(agents)):
        D = len(downs)
        nval = D ** len(atoms)
        vstep = max(1, min(nval, chunk))
        for vstart in range(0, nval, vstep):
            idx = np.arange(vstart, min(nval, vstart + vstep))
            cols = []
            rest = idx.copy()
            for _ in atoms:
                cols.append(downs[rest % D])
                rest //= D
            vals = np.stack(cols, axis=1) if cols else np.zeros((len(idx), 0), dtype=np.int64)
            fstep = max(1, chunk // max(1, len(idx)))
            for fstart in range(0, len(combos), fstep):
                sl = slice(fstart, fstart + fstep)
                yield Batch(n, agents, atoms, order, rel[sl], vals, combos[sl])


def _query_signature(sequents, assumptions=()):
    agents, atoms = set(), set()
    for s in sequents:
        agents |= agents_of(s)
        atoms |= atoms_of(s)
    return agents, atoms


def valid_in_all(sequent: Sequent, max_worlds: int = 3, agents=None, atoms=None,
                 route: str = "algebra") -> bool:
    """Truth in every structure up to ``max_worlds`` worlds.

    ``route='algebra'`` evaluates in the complex algebra of each frame under
    every interpretation by downsets; ``route='kripke'`` evaluates pointwise.
    """
    return find_failure(sequent, max_worlds, agents, atoms, route) is None


def find_failure(sequent: Sequent, max_worlds: int = 3, agents=None, atoms=None,
                 route: str = "algebra", assumptions=()):
    sig_agents, sig_atoms = _query_signature([sequent])
    agents = sorted(set(agents) if agents is not None else sig_agents)
    atoms = sorted(set(atoms) if atoms is not None else sig_atoms)
    ant = context_formula(sequent.antecedent)
    for n in range(1, max_worlds + 1):
        for b in batches(n, agents, atoms):
            if route == "algebra":
                bad = b.masks(ant) & ~b.masks(sequent.succedent)
                ok = _assumptions_hold(b, assumptions)
                hits = np.argwhere((bad != 0) & ok)
                if len(hits):
                    f, v = map(int, hits[0])
                    w = (int(bad[f, v]) & -int(bad[f, v])).bit_length() - 1
                    return b.structure(f, v), w
            else:
                bad = b.truth(ant) & ~b.truth(sequent.succedent)
                hits = np.argwhere(bad)
                if len(hits):
                    f, v, w = map(int, hits[0])
                    return b.structure(f, v), w
    return None


def _assumptions_hold(b: Batch, assumptions) -> np.ndarray:
    F, V = b.rel.shape[0], b.vals.shape[0]
    ok = np.ones((F, V), dtype=bool)
    for a in assumptions:
        lhs = b.masks(Dia(a.agent, Atom(a.trigger)))
        rhs = b.masks(a.consequent)
        ok &= (lhs & ~rhs) == 0
    return ok


@dataclass
class Countermodel:
    structure: KripkeStructure
    world: int

    def to_dict(self) -> dict:
        return self.structure.to_dict(self.world)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def render(self) -> str:
        return self.structure.render(self.world)


def find_countermodel(sequent: Sequent, max_worlds: int = 3, assumptions=(),
                      max_atoms: int = 6) -> Optional[Countermodel]:
    """Smallest-first search for a structure and world refuting ``sequent``.

    With assumptions, only structures satisfying every assumption count.
    Agents outside the query get empty accessibility relations, and atoms
    outside the query (plus the consequents of assumptions it triggers) are
    false everywhere; both choices still yield genuine countermodels.
    """
    agents, atoms = _query_signature([sequent])
    assumptions = list(assumptions or ())
    for a in assumptions:
        if a.trigger in atoms and a.agent in agents:
            atoms |= atoms_of(a.consequent)
    if len(atoms) > max_atoms:
        return None
    found = find_failure(sequent, max_worlds, agents, atoms, "algebra", assumptions)
    if found is None:
        return None
    structure, world = found
    if assumptions:
        # atoms fixed to empty still belong in the printed valuation
        extra = {a for r in assumptions for a in atoms_of(r.consequent) | {r.trigger}}
        val = dict(structure.valuation)
        for a in sorted(extra - set(val)):
            val[a] = frozenset()
        structure = KripkeStructure(structure.frame, tuple(sorted(val.items())))
    return Countermodel(structure, world)


def assumptions_hold(structure: KripkeStructure, assumptions) -> bool:
    for a in assumptions:
        for w in range(structure.frame.worlds):
            try:
                lhs = eval_kripke(structure, w, Dia(a.agent, Atom(a.trigger)))
                rhs = eval_kripke(structure, w, a.consequent)
            except ModelError:
                return False
            if lhs and not rhs:
                return False
    return True
