"""Admissible rules as derivation transformers, and cut elimination.

Every public transformer takes cut-free derivations and returns a cut-free
derivation whose conclusion is exactly the sequent the rule promises, with
the antecedent stored in a predictable order:

* ``weaken`` and ``top_weak`` put the new items first at the target level;
* the left inversions put the premiss items first, where the rule would;
* ``contract_item`` drops the second designated copy;
* ``eliminate_cut`` returns the order given by ``cut_conclusion``.

Cut elimination dispatches on the last rule of the first premiss, and on the
second premiss when the first ends in BoxR.  Each dispatch is recorded in the
trace under its case label, and every recursive cut is checked to have
strictly smaller rank (cut formula size, sum of premiss heights).
"""

from __future__ import annotations

import sys
from typing import Optional

from .calculus import (
    ANDL, ANDR, ASSN, BOTL, BOXL, BOXR, CUT, DIAL, DIAR, ID, ORL, ORR1, ORR2, TOPR,
    Derivation, cut_conclusion, derive_identity, parse_assumption, premiss_position, relabel,
)
from .syntax import (
    TOP, And, Ann, Box, Context, Dia, Or, PathError, Sequent, Top,
    align, context_formula, item_at, item_formula, level, plug, relocate, remove, replace, size,
)

CASE_LABELS = (
    ["(i)", "(ii)", "(iii)", "(iv)", "(v)", "(vi)", "(vii)", "(viii)", "(ix)", "(x)", "(xii)"]
    + [f"(xi)({c})" for c in "abcdefghijklmn"]
)


class TransformError(ValueError):
    pass


class CutEliminationError(RuntimeError):
    pass


def _deep(fn):
    """Run a recursive transformer with room on the call stack."""
    def wrapper(*args, **kw):
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 100_000))
        try:
            return fn(*args, **kw)
        except RecursionError:
            raise CutEliminationError("recursion limit reached while transforming") from None
        finally:
            sys.setrecursionlimit(old)
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _require_cut_free(*ds):
    for d in ds:
        if not d.cut_free:
            raise TransformError("input derivation contains Cut")


def _rebuild(node: Derivation, conclusion: Sequent, premisses, move) -> Derivation:
    """Same rule as ``node`` at its principal position mapped through ``move``."""
    rule = node.rule
    if rule in (ANDR, ORR1, ORR2, BOXR, TOPR):
        return Derivation(conclusion, rule, tuple(premisses))
    if rule == DIAR:
        return Derivation(conclusion, rule, tuple(premisses), (), move((), node.index)[1])
    pos = move(node.path, node.index)
    if pos is None:
        raise TransformError(f"principal position of {rule} lost")
    inner = node.inner
    if rule == BOXL:
        inner = move(tuple(node.path) + (node.index,), node.inner)[1]
    return Derivation(conclusion, rule, tuple(premisses), pos[0], pos[1], inner, node.assumption)


def _is_principal(node: Derivation, path, index) -> bool:
    return (node.rule in (ID, BOTL, ANDL, ORL, DIAL, BOXL, ASSN)
            and tuple(node.path) == tuple(path) and node.index == index)


# ---------------------------------------------------------------------------
# weakening, inversion and top elimination share one rewrite


def _rewrite(d: Derivation, path, index, items, on_principal) -> Derivation:
    """Replace the item at ``(path, index)`` by ``items`` (insert when index is None)."""
    path = tuple(path)
    ant, succ = d.conclusion.antecedent, d.conclusion.succedent
    new = Context(tuple(items))
    if index is None:
        concl = Sequent(plug(ant, path, new), succ)
    else:
        concl = Sequent(replace(ant, path, index, new), succ)

    def move(p, i):
        return relocate(p, i, path, index, len(new))

    if d.rule == CUT:
        raise TransformError("input derivation contains Cut")
    if index is not None and _is_principal(d, path, index):
        return on_principal(d, concl)
    if d.rule == DIAR:
        prem = d.premisses[0]
        if path and path[0] == d.index:
            pp = premiss_position(d, 0, path, index)
            prem = _rewrite(prem, pp[0], pp[1], items, on_principal)
        # otherwise the change sits in the parameter
        return _rebuild(d, concl, [prem], move)
    prems = []
    for k, p in enumerate(d.premisses):
        pp = premiss_position(d, k, path, index)
        prems.append(_rewrite(p, pp[0], pp[1], items, on_principal))
    return _rebuild(d, concl, prems, move)


def _never(d, concl):
    raise TransformError(f"designated item is principal for {d.rule}")


@_deep
def weaken(d: Derivation, path, extra) -> Derivation:
    """From a proof of ``D[G] |- m`` build one of ``D[G, extra] |- m``."""
    _require_cut_free(d)
    path = tuple(path)
    level(d.conclusion.antecedent, path)
    return _rewrite(d, path, None, tuple(extra), _never)


def _expect(kind, ok):
    if not ok:
        raise TransformError(f"shape mismatch for {kind}")


def _inverse(rule, pick=0):
    def handler(d, concl):
        if d.rule != rule:
            raise TransformError(f"expected {rule} at the designated item, found {d.rule}")
        return relabel(d.premisses[pick], concl)
    return handler


@_deep
def invert(d: Derivation, which: str, path=(), index=None, side: int = 0):
    """Inverse of one rule.

    ``AndL``/``DiaL`` act on the item at ``(path, index)``; ``OrL`` returns the
    pair of premiss proofs; ``AndR`` returns the proof of conjunct ``side``;
    ``BoxR`` unwraps the antecedent into an annotated item.
    """
    _require_cut_free(d)
    succ = d.conclusion.succedent
    if which in (ANDL, ORL, DIAL):
        try:
            item = item_at(d.conclusion.antecedent, tuple(path), index)
        except (PathError, TypeError):
            raise TransformError(f"no item at {list(path)}:{index}") from None
        if which == ANDL:
            _expect(which, isinstance(item, And))
            return _rewrite(d, path, index, (item.left, item.right), _inverse(ANDL))
        if which == DIAL:
            _expect(which, isinstance(item, Dia))
            new = Ann(item.agent, Context((item.body,)))
            return _rewrite(d, path, index, (new,), _inverse(DIAL))
        _expect(which, isinstance(item, Or))
        return (_rewrite(d, path, index, (item.left,), _inverse(ORL, 0)),
                _rewrite(d, path, index, (item.right,), _inverse(ORL, 1)))
    if which == ANDR:
        _expect(which, isinstance(succ, And))
        return _invert_andr(d, side)
    if which == BOXR:
        _expect(which, isinstance(succ, Box))
        return _invert_boxr(d)
    raise TransformError(f"no inversion for {which!r}")


def _invert_andr(d: Derivation, side: int) -> Derivation:
    succ = d.conclusion.succedent
    goal = succ.left if side == 0 else succ.right
    concl = Sequent(d.conclusion.antecedent, goal)
    if d.rule == ANDR:
        return d.premisses[side]
    if d.rule == BOTL:
        return Derivation(concl, BOTL, (), d.path, d.index)
    if d.rule in (ANDL, ORL, DIAL, BOXL, ASSN):
        prems = [_invert_andr(p, side) for p in d.premisses]
        return Derivation(concl, d.rule, tuple(prems), d.path, d.index, d.inner, d.assumption)
    raise TransformError(f"cannot invert AndR through {d.rule}")


def _invert_boxr(d: Derivation) -> Derivation:
    succ = d.conclusion.succedent
    ant = Context((Ann(succ.agent, d.conclusion.antecedent),))
    concl = Sequent(ant, succ.body)
    if d.rule == BOXR:
        return d.premisses[0]
    if d.rule == BOTL:
        return Derivation(concl, BOTL, (), (0,) + tuple(d.path), d.index)
    if d.rule in (ANDL, ORL, DIAL, BOXL, ASSN):
        prems = [_invert_boxr(p) for p in d.premisses]
        return Derivation(concl, d.rule, tuple(prems), (0,) + tuple(d.path), d.index,
                          d.inner, d.assumption)
    raise TransformError(f"cannot invert BoxR through {d.rule}")


@_deep
def top_weak(d: Derivation, path, index, replacement) -> Derivation:
    """From a proof of ``D[top] |- m`` build one of ``D[replacement] |- m``."""
    _require_cut_free(d)
    item = item_at(d.conclusion.antecedent, tuple(path), index)
    if not isinstance(item, Top):
        raise TransformError("designated item is not top")
    return _rewrite(d, path, index, tuple(replacement), _never)


# ---------------------------------------------------------------------------
# contraction


@_deep
def contract_item(d: Derivation, path, i: int, j: int) -> Derivation:
    """From a proof of ``D[I, I] |- m`` (copies at ``i`` and ``j``) build one of ``D[I] |- m``."""
    _require_cut_free(d)
    path = tuple(path)
    ant = d.conclusion.antecedent
    lvl = level(ant, path)
    if i == j or not (0 <= i < len(lvl) and 0 <= j < len(lvl)) or lvl[i] != lvl[j]:
        raise TransformError("designated items are not two equal copies")
    target = Sequent(remove(ant, path, j)[0], d.conclusion.succedent)
    return relabel(_contract(d, path, i, j), target)


def _contract_equal(d: Derivation, path, item) -> Derivation:
    lvl = level(d.conclusion.antecedent, path)
    hits = [k for k, x in enumerate(lvl.items) if x == item]
    if len(hits) < 2:
        raise TransformError("fewer than two copies to contract")
    return relabel(_contract(d, path, hits[0], hits[1]),
                   Sequent(remove(d.conclusion.antecedent, path, hits[1])[0],
                           d.conclusion.succedent))


def _inside(node_path, path, c) -> bool:
    n = len(path)
    return len(node_path) > n and tuple(node_path[:n]) == tuple(path) and node_path[n] == c


def _contract(d: Derivation, path, i: int, j: int) -> Derivation:
    ant, succ = d.conclusion.antecedent, d.conclusion.succedent
    rule = d.rule
    if rule == CUT:
        raise TransformError("input derivation contains Cut")
    positional = rule in (ID, BOTL, ANDL, ORL, DIAL, BOXL, ASSN)
    if positional and (_is_principal(d, path, j) or _inside(d.path, path, j)):
        i, j = j, i
    if rule == DIAR and not path and d.index == j:
        i, j = j, i
    if rule == BOXL and path == tuple(d.path) + (d.index,) and d.inner == j:
        i, j = j, i
    concl = Sequent(remove(ant, path, j)[0], succ)

    def move(p, k):
        return relocate(p, k, path, j, 0)

    item = level(ant, path)[i]
    principal = positional and _is_principal(d, path, i)
    within = positional and _inside(d.path, path, i)

    if rule in (ID, BOTL, TOPR):
        return _rebuild(d, concl, [], move)
    if rule == DIAR:
        prem = d.premisses[0]
        if path and path[0] == d.index:
            _, pi = premiss_position(d, 0, path, i)
            pp, pj = premiss_position(d, 0, path, j)
            prem = _contract(prem, pp, pi, pj)
        return _rebuild(d, concl, [prem], move)
    if principal:
        return _contract_principal(d, concl, path, i, j, item, move)
    prems = []
    for k, p in enumerate(d.premisses):
        pp, pi = premiss_position(d, k, path, i)
        _, pj = premiss_position(d, k, path, j)
        if within:
            p = _equalize(d, k, p, path, i, j)
        prems.append(_contract(p, pp, pi, pj))
    return _rebuild(d, concl, prems, move)


def _contract_principal(d, concl, path, i, j, item, move):
    rule = d.rule
    if rule in (BOXL, ASSN):
        pp, pi = premiss_position(d, 0, path, i)
        _, pj = premiss_position(d, 0, path, j)
        return _rebuild(d, concl, [_contract(d.premisses[0], pp, pi, pj)], move)
    prems = []
    for k, p in enumerate(d.premisses):
        pp, pj = premiss_position(d, k, path, j)
        if rule == ANDL:
            inv = _rewrite(p, pp, pj, (item.left, item.right), _inverse(ANDL))
            out = _contract_equal(_contract_equal(inv, pp, item.left), pp, item.right)
        elif rule == ORL:
            part = item.left if k == 0 else item.right
            inv = _rewrite(p, pp, pj, (part,), _inverse(ORL, k))
            out = _contract_equal(inv, pp, part)
        else:
            ann = Ann(item.agent, Context((item.body,)))
            inv = _rewrite(p, pp, pj, (ann,), _inverse(DIAL))
            out = _contract_equal(inv, pp, ann)
        prems.append(out)
    return _rebuild(d, concl, prems, move)


def _equalize(d: Derivation, k: int, p: Derivation, path, i: int, j: int) -> Derivation:
    """Apply to copy ``j`` in premiss ``k`` what ``d``'s rule did inside copy ``i``."""
    ant = d.conclusion.antecedent
    lvl = level(ant, path)
    n = len(path)
    rest = tuple(d.path[n + 1:])
    rest_j, idx_j = align(lvl[i].context, lvl[j].context, rest, d.index)
    qpath = tuple(path) + (j,) + rest_j
    rule = d.rule
    if rule == BOTL:
        return p
    principal = item_at(ant, d.path, d.index)
    if rule in (BOXL, ASSN):
        if rule == BOXL:
            new = principal.context.items[d.inner].body
        else:
            new = parse_assumption(d.assumption).consequent
        lp, _ = premiss_position(d, k, qpath, None)
        return _rewrite(p, lp, None, (new,), _never)
    qp, qi = premiss_position(d, k, qpath, idx_j)
    if rule == ANDL:
        return _rewrite(p, qp, qi, (principal.left, principal.right), _inverse(ANDL))
    if rule == ORL:
        part = principal.left if k == 0 else principal.right
        return _rewrite(p, qp, qi, (part,), _inverse(ORL, k))
    if rule == DIAL:
        ann = Ann(principal.agent, Context((principal.body,)))
        return _rewrite(p, qp, qi, (ann,), _inverse(DIAL))
    raise TransformError(f"cannot contract through {rule}")


@_deep
def contract(d: Derivation, path, gamma) -> Derivation:
    """From a proof of ``D[G, G] |- m`` build one of ``D[G] |- m``.

    The earliest occurrence of each item of ``gamma`` is the one dropped.
    """
    _require_cut_free(d)
    path = tuple(path)
    lvl = level(d.conclusion.antecedent, path)
    need = list(gamma) + list(gamma)
    pool = list(lvl.items)
    for x in need:
        if x not in pool:
            raise TransformError("context does not contain the duplicated part")
        pool.remove(x)
    # the earliest copy of each item goes, so weaken-then-contract round-trips
    target = d.conclusion.antecedent
    for x in gamma:
        target = remove(target, path, level(target, path).items.index(x))[0]
    for x in gamma:
        d = _contract_equal(d, path, x)
    return relabel(d, Sequent(target, d.conclusion.succedent))


# ---------------------------------------------------------------------------
# cut elimination


class _Cuts:
    def __init__(self, trace: Optional[list]):
        self.trace = trace if trace is not None else []
        self.calls = 0

    def label(self, text):
        self.trace.append(text)

    def cut(self, d1: Derivation, d2: Derivation, path, index, parent=None) -> Derivation:
        path = tuple(path)
        m = d1.conclusion.succedent
        rank = (size(m), d1.height + d2.height)
        if parent is not None and not rank < parent:
            raise CutEliminationError(f"rank did not descend: {rank} after {parent}")
        self.calls += 1
        concl = cut_conclusion(d1.conclusion, d2.conclusion, path, index)
        gamma = d1.conclusion.antecedent
        r1 = d1.rule
        if r1 == ID:
            self.label("(i)")
            extra = remove(gamma, (), d1.index)[0]
            return relabel(weaken(d2, path, extra), concl)
        if r1 == BOTL:
            self.label("(ii)")
            return Derivation(concl, BOTL, (), path + tuple(d1.path), d1.index)
        if r1 == TOPR:
            self.label("(iii)")
            return relabel(top_weak(d2, path, index, gamma), concl)
        if r1 in (ANDL, ORL, DIAL, BOXL, ASSN):
            self.label({ANDL: "(iv)", ORL: "(v)", DIAL: "(vi)", BOXL: "(vii)", ASSN: "(xii)"}[r1])
            prems = [self.cut(p, d2, path, index, rank) for p in d1.premisses]
            return Derivation(concl, r1, tuple(prems), path + tuple(d1.path), d1.index,
                              d1.inner, d1.assumption)
        if r1 == ANDR:
            self.label("(viii)")
            inv = invert(d2, ANDL, path, index)
            c1 = self.cut(d1.premisses[0], inv, path, 0, rank)
            c2 = self.cut(d1.premisses[1], c1, path, len(gamma), rank)
            return relabel(contract(c2, path, gamma), concl)
        if r1 in (ORR1, ORR2):
            self.label("(ix)")
            inv = invert(d2, ORL, path, index)[0 if r1 == ORR1 else 1]
            return relabel(self.cut(d1.premisses[0], inv, path, 0, rank), concl)
        if r1 == DIAR:
            self.label("(x)")
            inv = invert(d2, DIAL, path, index)
            c = self.cut(d1.premisses[0], inv, path + (0,), 0, rank)
            param = remove(gamma, (), d1.index)[0]
            return relabel(weaken(c, path, param), concl)
        if r1 == BOXR:
            return self.boxr(d1, d2, path, index, concl, rank)
        raise CutEliminationError(f"unexpected rule {r1} in the first premiss")

    def boxr(self, d1, d2, path, index, concl, rank):
        gamma = d1.conclusion.antecedent
        r2 = d2.rule

        def move(p, k):
            return relocate(p, k, path, index, len(gamma))

        if r2 in (ID, BOTL, TOPR):
            self.label({ID: "(xi)(a)", BOTL: "(xi)(b)", TOPR: "(xi)(c)"}[r2])
            return _rebuild(d2, concl, [], move)
        if r2 == BOXL and path == tuple(d2.path) + (d2.index,) and index == d2.inner:
            self.label("(xi)(h)")
            return self.boxl_principal(d1, d2, path, index, concl, rank)
        if r2 in (ANDL, ORL, DIAL, BOXL, ASSN, ANDR, ORR1, ORR2, BOXR):
            if r2 == ASSN:
                lab = "(xi)(n)" if path == tuple(d2.path) + (d2.index,) else "(xi)(m)"
            else:
                lab = {ANDL: "(xi)(d)", ORL: "(xi)(e)", DIAL: "(xi)(f)", BOXL: "(xi)(g)",
                       ANDR: "(xi)(i)", ORR1: "(xi)(j)", ORR2: "(xi)(j)", BOXR: "(xi)(l)"}[r2]
            self.label(lab)
            prems = []
            for k, p in enumerate(d2.premisses):
                pp, pi = premiss_position(d2, k, path, index)
                prems.append(self.cut(d1, p, pp, pi, rank))
            return _rebuild(d2, concl, prems, move)
        if r2 == DIAR:
            self.label("(xi)(k)")
            prem = d2.premisses[0]
            if path and path[0] == d2.index:
                pp, pi = premiss_position(d2, 0, path, index)
                prem = self.cut(d1, prem, pp, pi, rank)
            return _rebuild(d2, concl, [prem], move)
        raise CutEliminationError(f"unexpected rule {r2} in the second premiss")

    def boxl_principal(self, d1, d2, path, index, concl, rank):
        lvl_path = tuple(d2.path)
        item = item_at(d2.conclusion.antecedent, lvl_path, d2.index)
        body = item.context.items[d2.inner].body
        others = Context(item.context.items[:d2.inner] + item.context.items[d2.inner + 1:])
        prem = d2.premisses[0]
        pp, pi = premiss_position(d2, 0, path, index)
        lp = pp[:-1]
        # cut the box inside the kept copy of the item
        s1 = self.cut(d1, prem, pp, pi, rank)
        # cut the unboxed formula with the premiss of BoxR
        lvl = level(s1.conclusion.antecedent, lp)
        k = next(x for x, it in enumerate(lvl.items) if it == body)
        s2 = self.cut(d1.premisses[0], s1, lp, k, rank)
        # the new (G)^A sits first; widen it to (G, G')^A and merge with the kept copy
        s3 = weaken(s2, lp + (0,), others)
        merged = level(s3.conclusion.antecedent, lp)[0]
        s4 = _contract_equal(s3, lp, merged)
        return relabel(s4, concl)


@_deep
def eliminate_cut(d1: Derivation, d2: Derivation, path, index=None,
                  trace: Optional[list] = None) -> Derivation:
    """Cut-free proof of ``D'[G] |- m'`` from proofs of ``G |- m`` and ``D'[m] |- m'``.

    ``(path, index)`` locates the cut occurrence of ``m``; with ``index`` None
    the first occurrence at that level is used.
    """
    _require_cut_free(d1, d2)
    path = tuple(path)
    if index is None:
        lvl = level(d2.conclusion.antecedent, path)
        try:
            index = lvl.items.index(d1.conclusion.succedent)
        except ValueError:
            raise TransformError("cut formula not found at the given level") from None
    out = _Cuts(trace).cut(d1, d2, path, index)
    return relabel(out, cut_conclusion(d1.conclusion, d2.conclusion, path, index))


@_deep
def eliminate_all(d: Derivation, trace: Optional[list] = None) -> Derivation:
    """Remove every Cut node, innermost first."""
    if d.cut_free:
        return d
    prems = tuple(eliminate_all(p, trace) for p in d.premisses)
    if d.rule == CUT:
        out = eliminate_cut(prems[0], prems[1], d.path, d.index, trace)
        return relabel(out, d.conclusion)
    return Derivation(d.conclusion, d.rule, prems, d.path, d.index, d.inner, d.assumption)


# ---------------------------------------------------------------------------
# the K rule


def _find(ctx: Context, item, skip=()) -> int:
    for k, x in enumerate(ctx.items):
        if x == item and k not in skip:
            return k
    raise TransformError("item not found")


def _forward_andl(d: Derivation, path, a: int, b: int) -> Derivation:
    ant = d.conclusion.antecedent
    lvl = level(ant, path)
    f = And(lvl[a], lvl[b])
    rest, _ = remove(ant, path, max(a, b))
    rest, _ = remove(rest, path, min(a, b))
    concl = Sequent(plug(rest, path, Context((f,))), d.conclusion.succedent)
    return Derivation(concl, ANDL, (d,), tuple(path), 0)


def _forward_dial(d: Derivation, path, a: int) -> Derivation:
    ant = d.conclusion.antecedent
    item = level(ant, path)[a]
    (body,) = item.context.items
    concl = Sequent(replace(ant, path, a, [Dia(item.agent, body)]), d.conclusion.succedent)
    return Derivation(concl, DIAL, (d,), tuple(path), 0)


def _fold(d: Derivation, path, order) -> Derivation:
    """Turn the level at ``path`` (a multiset equal to ``order``) into its single formula."""
    path = tuple(path)
    formulas = []
    for g in order:
        if isinstance(g, Ann):
            k = _find(level(d.conclusion.antecedent, path), g)
            d = _fold(d, path + (k,), g.context)
            k = _find(level(d.conclusion.antecedent, path),
                      Ann(g.agent, Context((context_formula(g.context),))))
            d = _forward_dial(d, path, k)
        formulas.append(item_formula(g))
    if not formulas:
        return weaken(d, path, (TOP,))
    cur = formulas[-1]
    for f in reversed(formulas[:-1]):
        lvl = level(d.conclusion.antecedent, path)
        a = _find(lvl, f)
        b = _find(lvl, cur, skip=(a,))
        d = _forward_andl(d, path, a, b)
        cur = And(f, cur)
    return d


def prove_context_formula(total: Context, part) -> Derivation:
    """Cut-free proof of ``total |- F`` where F reads the items ``part`` of ``total`` as a formula."""
    part = list(part)

    def leaf(g):
        if isinstance(g, Ann):
            k = _find(total, g)
            prem = prove_context_formula(g.context, g.context)
            return Derivation(Sequent(total, item_formula(g)), DIAR, (prem,), (), k)
        k = _find(total, g)
        rest = Context(total.items[:k] + total.items[k + 1:])
        return relabel(derive_identity(rest, g), Sequent(total, g))

    def build(k):
        if k == len(part) - 1:
            return leaf(part[k])
        right = build(k + 1)
        left = leaf(part[k])
        goal = And(left.conclusion.succedent, right.conclusion.succedent)
        return Derivation(Sequent(total, goal), ANDR, (left, right))

    if not part:
        return Derivation(Sequent(total, TOP), TOPR)
    return build(0)


@_deep
def derive_K(d: Derivation, path, agent: str, gamma, gamma_prime,
             trace: Optional[list] = None) -> Derivation:
    """From a proof of ``D[G^A, G'^A, (G, G')^A] |- m`` build one of ``D[(G, G')^A] |- m``."""
    _require_cut_free(d)
    path = tuple(path)
    gamma, gamma_prime = Context(tuple(gamma)), Context(tuple(gamma_prime))
    both = Context(gamma.items + gamma_prime.items)
    ant = d.conclusion.antecedent
    lvl = level(ant, path)
    try:
        ia = _find(lvl, Ann(agent, gamma))
        ib = _find(lvl, Ann(agent, gamma_prime), skip=(ia,))
        _find(lvl, Ann(agent, both), skip=(ia, ib))
    except TransformError:
        raise TransformError("expected the items G^A, G'^A and (G, G')^A at the level") from None
    target = Sequent(remove(remove(ant, path, max(ia, ib))[0], path, min(ia, ib))[0],
                     d.conclusion.succedent)
    folded = _fold(d, path + (ia,), gamma)
    folded = _fold(folded, path + (ib,), gamma_prime)
    left_a = prove_context_formula(both, gamma)
    left_b = prove_context_formula(both, gamma_prime)
    c1 = Derivation(cut_conclusion(left_a.conclusion, folded.conclusion, path + (ia,), 0),
                    CUT, (left_a, folded), path + (ia,), 0)
    c2 = Derivation(cut_conclusion(left_b.conclusion, c1.conclusion, path + (ib,), 0),
                    CUT, (left_b, c1), path + (ib,), 0)
    out = eliminate_all(c2, trace)
    whole = Ann(agent, both)
    out = _contract_equal(out, path, whole)
    out = _contract_equal(out, path, whole)
    return relabel(out, target)


def with_cuts(d1: Derivation, d2: Derivation, path, index) -> Derivation:
    """The single Cut node joining ``d1`` into ``d2``."""
    return Derivation(cut_conclusion(d1.conclusion, d2.conclusion, path, index), CUT,
                      (d1, d2), tuple(path), index)
