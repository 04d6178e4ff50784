import random

import pytest

from adjoint_prover.calculus import (
    ANDL, ASSN, BOXL, BOXR, CUT, DIAR, ID, TOPR, Derivation, check, cut_conclusion,
    derive_identity, is_valid,
)
from adjoint_prover.search import Proved, prove
from adjoint_prover.semantics import valid_in_all
from adjoint_prover.syntax import (
    EMPTY, TOP, And, Ann, Atom, Box, Context, Dia, Sequent, ctx, levels, occurrences,
    parse_sequent, plug, remove, replace,
)
from adjoint_prover.transform import (
    CASE_LABELS, CutEliminationError, TransformError, _Cuts, contract, contract_item,
    derive_K, eliminate_all, eliminate_cut, invert, top_weak, weaken, with_cuts,
)

from gen import AGENTS, ASSUMPTIONS, context, formula, proof_of, proof_with_formula, some_proof

p, q, r = Atom("p"), Atom("q"), Atom("r")


def proved(text):
    out = prove(parse_sequent(text))
    assert isinstance(out, Proved)
    return out.derivation


def ok(d, want, rules=()):
    assert check(d, list(rules)) == []
    assert d.cut_free
    assert d.conclusion == want


# -- weakening -------------------------------------------------------------

def test_weaken_id():
    d = weaken(derive_identity(EMPTY, p), (), ctx(q))
    assert d.rule == ID
    ok(d, parse_sequent("q, p |- p"))


def test_weaken_reparameterizes_diar():
    d = proved("(p)^A |- <A>p")
    assert d.rule == DIAR
    w = weaken(d, (), ctx(q))
    assert w.rule == DIAR and w.height == d.height
    ok(w, parse_sequent("q, (p)^A |- <A>p"))


def test_weaken_inside_annotation():
    d = proved("(p)^A |- <A>p")
    w = weaken(d, (0,), ctx(q))
    assert w.rule == DIAR
    ok(w, parse_sequent("(q, p)^A |- <A>p"))
    assert w.premisses[0].conclusion == parse_sequent("q, p |- p")


def test_weaken_bad_path():
    with pytest.raises(Exception):
        weaken(derive_identity(EMPTY, p), (0,), ctx(q))


# -- contraction -----------------------------------------------------------

def test_contract_item_atoms():
    d = derive_identity(ctx(p), p)
    out = contract_item(d, (), 0, 1)
    assert out.rule == ID
    ok(out, parse_sequent("p |- p"))


def test_contract_boxl_principal_copies():
    d = proved("([A]p)^A, ([A]p)^A |- p")
    assert BOXL in d.rules_used()
    ok(contract_item(d, (), 0, 1), parse_sequent("([A]p)^A |- p"))


def test_contract_andl_principal_copies():
    d = derive_identity(ctx(And(p, q)), And(p, q))
    assert d.rule == ANDL
    ok(contract_item(d, (), 0, 1), parse_sequent("p & q |- p & q"))


def test_contract_rejects_unequal_items():
    with pytest.raises(TransformError):
        contract_item(derive_identity(ctx(q), p), (), 0, 1)


def test_contract_context():
    d = weaken(derive_identity(ctx(q), p), (), ctx(q, p))
    ok(contract(d, (), ctx(p, q)), parse_sequent("q, p |- p"))
    d = weaken(proved("(p)^A |- <A>p"), (), ctx(Ann("A", ctx(p))))
    ok(contract(d, (), ctx(Ann("A", ctx(p)))), parse_sequent("(p)^A |- <A>p"))


# -- inversion -------------------------------------------------------------

def test_invert_boxr_returns_subproof():
    d = derive_identity(EMPTY, Box("A", p))
    assert d.rule == BOXR
    inv = invert(d, "BoxR")
    assert inv is d.premisses[0] or inv.conclusion == d.premisses[0].conclusion


def test_invert_dial():
    d = derive_identity(EMPTY, Dia("A", p))
    ok(invert(d, "DiaL", (), 0), parse_sequent("(p)^A |- <A>p"))


def test_invert_andr():
    d = proved("p, q |- p & q")
    ok(invert(d, "AndR", side=0), parse_sequent("p, q |- p"))
    ok(invert(d, "AndR", side=1), parse_sequent("p, q |- q"))


def test_invert_orl_pair():
    d = proved("p | q |- q | p")
    a, b = invert(d, "OrL", (), 0)
    ok(a, parse_sequent("p |- q | p"))
    ok(b, parse_sequent("q |- q | p"))


def test_invert_shape_mismatch():
    with pytest.raises(TransformError):
        invert(derive_identity(EMPTY, p), "BoxR")


# -- top weakening ---------------------------------------------------------

def test_top_weak_examples():
    d = Derivation(parse_sequent("top |- top"), TOPR)
    ok(top_weak(d, (), 0, ctx(p)), parse_sequent("p |- top"))
    d = weaken(derive_identity(EMPTY, p), (), ctx(TOP))
    ok(top_weak(d, (), 0, EMPTY), parse_sequent("p |- p"))


def test_top_weak_requires_top():
    with pytest.raises(TransformError):
        top_weak(derive_identity(ctx(q), p), (), 0, ctx(r))


# -- cut elimination -------------------------------------------------------

def test_cut_with_identity_is_weakening():
    d1 = derive_identity(ctx(q), p)
    d2 = proved("p, (p)^A |- <A>p & p")
    trace = []
    out = eliminate_cut(d1, d2, (), 0, trace)
    assert trace[0] == "(i)"
    ok(out, cut_conclusion(d1.conclusion, d2.conclusion, (), 0))


def test_cut_with_top():
    d1 = Derivation(parse_sequent("q |- top"), TOPR)
    d2 = weaken(derive_identity(EMPTY, p), (), ctx(TOP))
    trace = []
    out = eliminate_cut(d1, d2, (), 0, trace)
    assert trace == ["(iii)"]
    ok(out, parse_sequent("q, p |- p"))


def test_principal_box_cut():
    d1 = proved("q, r |- [A]<A>(q & r)")
    d2 = proved("([A]<A>(q & r))^A |- <A>(q & r)")
    assert d2.rule == BOXL
    trace = []
    out = eliminate_cut(d1, d2, (0,), 0, trace)
    assert trace[:1] == ["(xi)(h)"]
    ok(out, parse_sequent("(q, r)^A |- <A>(q & r)"))


def test_cut_requires_the_formula():
    with pytest.raises(TransformError):
        eliminate_cut(derive_identity(EMPTY, p), derive_identity(EMPTY, q), ())


def test_rank_guard():
    d1 = derive_identity(EMPTY, p)
    with pytest.raises(CutEliminationError):
        _Cuts([]).cut(d1, derive_identity(EMPTY, p), (), 0, parent=(0, 0))


def test_eliminate_all_and_with_cuts():
    d1 = proved("p |- p | q")
    d2 = proved("p | q |- q | p")
    d = with_cuts(d1, d2, (), 0)
    assert d.rule == CUT and is_valid(d, allow_cut=True) and not is_valid(d)
    out = eliminate_all(d)
    ok(out, parse_sequent("p |- q | p"))


def _random_cut(rng, rules=()):
    m = formula(rng, rng.randint(0, 8))
    if rng.random() < 0.4:
        m = Box(rng.choice(AGENTS), formula(rng, rng.randint(0, 6)))
    for _ in range(30):
        g = context(rng, rng.randint(0, 3), 4)
        if rng.random() < 0.3:
            g = Context(g.items + (m,))
        d1 = some_proof(rng, Sequent(g, m), rules)
        if d1 is not None:
            break
    else:
        return None
    d2 = proof_with_formula(rng, m, assumptions=rules)
    occ = [(pp, i) for pp, i, x in occurrences(d2.conclusion.antecedent) if x == m]
    pp, i = rng.choice(occ)
    return d1, d2, pp, i


@pytest.mark.parametrize("seed", range(4))
def test_random_cuts(seed):
    rng = random.Random(seed)
    for _ in range(40):
        case = _random_cut(rng)
        if case is None:
            continue
        d1, d2, pp, i = case
        trace = []
        out = eliminate_cut(d1, d2, pp, i, trace)
        want = cut_conclusion(d1.conclusion, d2.conclusion, pp, i)
        ok(out, want)
        assert out.conclusion.antecedent.items == want.antecedent.items
        assert set(trace) <= set(CASE_LABELS)


def test_random_cuts_with_assumptions():
    rng = random.Random(11)
    rules = list(ASSUMPTIONS)
    seen = set()
    for _ in range(150):
        case = _random_cut(rng, rules)
        if case is None:
            continue
        d1, d2, pp, i = case
        trace = []
        out = eliminate_cut(d1, d2, pp, i, trace)
        ok(out, cut_conclusion(d1.conclusion, d2.conclusion, pp, i), rules)
        seen |= set(trace)
    assert {"(xii)", "(xi)(m)", "(xi)(n)"} <= seen


def test_cut_preserves_validity():
    rng = random.Random(2)
    done = 0
    while done < 15:
        case = _random_cut(rng)
        if case is None:
            continue
        d1, d2, pp, i = case
        out = eliminate_cut(d1, d2, pp, i)
        assert valid_in_all(out.conclusion, 2, agents=AGENTS)
        done += 1


# -- lemma K ---------------------------------------------------------------

def test_k_example():
    items = (Ann("A", ctx(p)), Ann("A", ctx(q)), Ann("A", ctx(p, q)))
    d = weaken(derive_identity(EMPTY, r), (), Context(items))
    ok(derive_K(d, (), "A", ctx(p), ctx(q)), parse_sequent("(p, q)^A, r |- r"))


def test_k_empty_part():
    items = (Ann("A", ctx(p)), Ann("A", EMPTY), Ann("A", ctx(p)))
    d = weaken(proved("(p)^A |- <A>p"), (), Context(items))
    out = derive_K(d, (), "A", ctx(p), EMPTY)
    ok(out, parse_sequent("(p)^A, (p)^A |- <A>p"))


# -- randomized admissibility ---------------------------------------------

@pytest.mark.parametrize("seed", range(3))
def test_admissibility_random(seed):
    rng = random.Random(100 + seed)
    rules = list(ASSUMPTIONS) if seed == 2 else []
    for _ in range(40):
        d = proof_of(rng, assumptions=rules)
        ant, succ = d.conclusion.antecedent, d.conclusion.succedent
        lv = list(levels(ant))
        path, lvl = rng.choice(lv)
        extra = context(rng, rng.randint(0, 2), 4)
        ok(weaken(d, path, extra), Sequent(plug(ant, path, extra), succ), rules)
        if lvl.items:
            g = Context(tuple(rng.sample(lvl.items, rng.randint(1, len(lvl.items)))))
            ok(contract(weaken(d, path, g), path, g), d.conclusion, rules)
        for pp, i, x in occurrences(ant):
            if isinstance(x, And):
                ok(invert(d, "AndL", pp, i), Sequent(replace(ant, pp, i, [x.left, x.right]), succ), rules)
            if isinstance(x, Dia):
                ok(invert(d, "DiaL", pp, i),
                   Sequent(replace(ant, pp, i, [Ann(x.agent, Context((x.body,)))]), succ), rules)
        if isinstance(succ, Box):
            ok(invert(d, "BoxR"), Sequent(Context((Ann(succ.agent, ant),)), succ.body), rules)
        dd = weaken(d, path, [TOP])
        rep = context(rng, rng.randint(0, 2), 3)
        ok(top_weak(dd, path, 0, rep), Sequent(replace(dd.conclusion.antecedent, path, 0, rep), succ), rules)
