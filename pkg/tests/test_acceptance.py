"""End-to-end acceptance criteria, one test each.

Every test records a PASS/FAIL line that is printed at the end of the run
(see conftest.py) and also directly on stdout for ``pytest -s``.
"""
import contextlib
import random
import time

import pytest

import conftest
from adjoint_prover import transform
from adjoint_prover.calculus import BOXL, check, cut_conclusion, derive_identity
from adjoint_prover.hilbert import AXIOMS, as_sequent, axiom_instances
from adjoint_prover.scenarios import all_configs, build_assumptions, build_queries
from adjoint_prover.search import NotProvedWithinBounds, Proved, SearchConfig, prove, provable
from adjoint_prover.semantics import (
    batches, complex_algebra, dlam_validate, enumerate_frames, enumerate_structures,
    find_countermodel, find_failure, sequent_true_dlam, sequent_true_kripke,
    valuation_interpretation,
)
from adjoint_prover.syntax import (
    TOP, And, Ann, Atom, Box, Context, Dia, Sequent, atoms_of, agents_of, levels,
    occurrences, parse_sequent, plug, replace, size, context_formula,
)

import corpus
from gen import ASSUMPTIONS, AGENTS, context, formula, proof_of, proof_with_formula, some_proof

p, q = Atom("p"), Atom("q")


@contextlib.contextmanager
def criterion(num, title):
    """Record the outcome of the enclosed block as a criterion line."""
    info = {"detail": ""}
    start = time.perf_counter()
    ok = False
    try:
        yield info
        ok = True
    finally:
        took = time.perf_counter() - start
        line = f"{title}: {info['detail']} ({took:.1f}s)"
        conftest.ACCEPTANCE[num] = (ok, line)
        print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {line}")


def timed_under(start, limit):
    took = time.perf_counter() - start
    assert took < limit, f"took {took:.1f}s, limit {limit}s"


def test_c01_identity():
    with criterion(1, "identity derivations") as info:
        rng = random.Random(1)
        start = time.perf_counter()
        bad = 0
        for _ in range(1000):
            m = formula(rng, rng.randint(0, 12))
            assert size(m) <= 12
            g = context(rng, rng.randint(0, 3), 5)
            d = derive_identity(g, m)
            if not (d.cut_free and check(d) == [] and d.conclusion == Sequent(Context(g.items + (m,)), m)):
                bad += 1
        timed_under(start, 10)
        info["detail"] = f"1000 pairs, {bad} failures"
        assert bad == 0


DUPLICATION = "<A>[A](p | q) |- (p & <A>[A](p | q)) | (q & <A>[A](p | q))"


def test_c02_duplication():
    with criterion(2, "duplication necessity") as info:
        s = parse_sequent(DUPLICATION)
        out = prove(s)
        assert isinstance(out, Proved) and check(out.derivation) == []
        assert BOXL in out.derivation.rules_used()
        for depth in range(1, 31):
            weak = prove(s, SearchConfig(max_depth=depth, duplicate_boxl=False))
            assert not isinstance(weak, Proved), depth
        info["detail"] = "proved; not provable without duplication at depths 1..30"


def _level_choice(rng, ant):
    return rng.choice(list(levels(ant)))


def test_c03_admissibility():
    with criterion(3, "admissible rules") as info:
        rng = random.Random(3)
        counts = dict(weaken=0, contract=0, invert=0, top_weak=0)
        while min(counts.values()) < 500:
            rules = list(ASSUMPTIONS) if rng.random() < 0.2 else []
            d = proof_of(rng, assumptions=rules)
            ant, succ = d.conclusion.antecedent, d.conclusion.succedent

            def ok(out, want):
                assert out.cut_free and check(out, rules) == [] and out.conclusion == want

            path, lvl = _level_choice(rng, ant)
            extra = context(rng, rng.randint(0, 2), 4)
            ok(transform.weaken(d, path, extra), Sequent(plug(ant, path, extra), succ))
            counts["weaken"] += 1

            g = (Context(tuple(rng.sample(lvl.items, rng.randint(1, len(lvl.items)))))
                 if lvl.items else context(rng, 1, 3))
            # an empty level gets one copy of g first, so the duplicate is genuine
            once = d if lvl.items else transform.weaken(d, path, g)
            ok(transform.contract(transform.weaken(once, path, g), path, g), once.conclusion)
            counts["contract"] += 1

            base = d
            if not any(isinstance(x, (And, Dia)) for _, _, x in occurrences(ant)) \
                    and not isinstance(succ, Box):
                # no inversion applies yet: plant a conjunction first
                base = transform.weaken(d, path, [And(p, q)])
            bant = base.conclusion.antecedent
            for pp, i, x in occurrences(bant):
                if isinstance(x, And):
                    ok(transform.invert(base, "AndL", pp, i),
                       Sequent(replace(bant, pp, i, [x.left, x.right]), succ))
                if isinstance(x, Dia):
                    ok(transform.invert(base, "DiaL", pp, i),
                       Sequent(replace(bant, pp, i, [Ann(x.agent, Context((x.body,)))]), succ))
            if isinstance(succ, Box):
                ok(transform.invert(base, "BoxR"), Sequent(Context((Ann(succ.agent, bant),)), succ.body))
            counts["invert"] += 1

            dd = transform.weaken(d, path, [TOP])
            rep = context(rng, rng.randint(0, 2), 3)
            ok(transform.top_weak(dd, path, 0, rep),
               Sequent(replace(dd.conclusion.antecedent, path, 0, rep), succ))
            counts["top_weak"] += 1
        info["detail"] = ", ".join(f"{k} {v}" for k, v in counts.items())


def _cut_triple(rng, rules):
    while True:
        m = formula(rng, rng.randint(0, 8))
        if rng.random() < 0.4:
            m = Box(rng.choice(AGENTS), formula(rng, rng.randint(0, 6)))
        if size(m) > 8:
            continue
        g = context(rng, rng.randint(0, 3), 4)
        if rng.random() < 0.3:
            g = Context(g.items + (m,))
        d1 = some_proof(rng, Sequent(g, m), rules)
        if d1 is None:
            continue
        d2 = proof_with_formula(rng, m, assumptions=rules)
        occ = [(pp, i) for pp, i, x in occurrences(d2.conclusion.antecedent) if x == m]
        pp, i = rng.choice(occ)
        return d1, d2, pp, i


def test_c04_cut_elimination(monkeypatch):
    ranks = []
    original = transform._Cuts.cut

    def watched(self, d1, d2, path, index, parent=None):
        rank = (size(d1.conclusion.succedent), d1.height + d2.height)
        ranks.append((rank, parent))
        return original(self, d1, d2, path, index, parent)

    monkeypatch.setattr(transform._Cuts, "cut", watched)
    with criterion(4, "cut elimination") as info:
        rng = random.Random(4)
        start = time.perf_counter()
        labels = set()
        gen_time = 0.0
        for k in range(300):
            rules = list(ASSUMPTIONS) if k % 3 == 2 else []
            g0 = time.perf_counter()
            d1, d2, pp, i = _cut_triple(rng, rules)
            gen_time += time.perf_counter() - g0
            trace = []
            out = transform.eliminate_cut(d1, d2, pp, i, trace)
            want = cut_conclusion(d1.conclusion, d2.conclusion, pp, i)
            assert out.cut_free and check(out, rules) == [] and out.conclusion == want
            assert set(trace) <= set(transform.CASE_LABELS), trace
            labels |= set(trace)
        nested = [(r, par) for r, par in ranks if par is not None]
        assert all(r < par for r, par in nested)
        # the limit applies to elimination; building the inputs is search work
        timed_under(start + gen_time, 60)
        info["detail"] = (f"300 triples, {len(ranks)} cut calls, ranks descend, "
                          f"{len(labels)} distinct case labels, generation {gen_time:.1f}s")


def _closed_atoms(s, rules):
    atoms = set(atoms_of(s))
    while True:
        more = {a for r in rules if r.trigger in atoms for a in atoms_of(r.consequent)}
        if more <= atoms:
            return atoms
        atoms |= more


def test_c05_soundness():
    with criterion(5, "soundness of proved corpus") as info:
        checked = violations = 0
        for s, expected, rules in corpus.full():
            out = prove(s, SearchConfig(assumptions=rules))
            if not isinstance(out, Proved):
                continue
            checked += 1
            if not rules:
                for route in ("algebra", "kripke"):
                    if find_failure(s, 3, ["A", "B"], None, route) is not None:
                        violations += 1
                continue
            # structures satisfying the scenario assumptions, other atoms empty
            atoms, agents = _closed_atoms(s, rules), agents_of(s)
            worlds = 3 if len(atoms) + len(agents) <= 5 else 2
            if find_failure(s, worlds, agents, atoms, "algebra", rules) is not None:
                violations += 1
        info["detail"] = f"{checked} proved sequents, {violations} violations"
        assert violations == 0


def test_c06_dlam_laws():
    with criterion(6, "complex algebra laws") as info:
        start = time.perf_counter()
        frames = violations = 0
        for agents in (["A"], ["A", "B"]):
            for n in (1, 2, 3):
                for f in enumerate_frames(n, agents):
                    frames += 1
                    violations += len(dlam_validate(complex_algebra(f)))
        timed_under(start, 300)
        info["detail"] = f"{frames} frames (1 and 2 agents), {violations} violations"
        assert violations == 0


def test_c07_hilbert_bridge():
    with criterion(7, "axiomatic bridge") as info:
        inst = axiom_instances(["p", "q", "r"], ["A", "B"])
        assert {name for name, _, _ in inst} == set(AXIOMS)
        unproved = [name for name, lhs, rhs in inst if not provable(as_sequent(lhs, rhs))]
        assert unproved == []
        rng = random.Random(7)
        mismatches = 0
        for _ in range(200):
            m, n = formula(rng, rng.randint(0, 6)), formula(rng, rng.randint(0, 6))
            assert size(m) <= 6 and size(n) <= 6
            a = provable(as_sequent(Dia("A", m), n))
            b = provable(as_sequent(m, Box("A", n)))
            mismatches += a != b
        info["detail"] = (f"{len(inst)} instances of {len(AXIOMS)} schemas proved; "
                          f"200 adjunction pairs, {mismatches} mismatches")
        assert mismatches == 0


def _sequents(rng, count, atoms, agents):
    return [Sequent(context(rng, rng.randint(0, 3), 4, depth=2, atoms=atoms, agents=agents),
                    formula(rng, rng.randint(0, 6), atoms, agents)) for _ in range(count)]


def test_c08_oracle_agreement():
    with criterion(8, "Kripke and algebra agree") as info:
        rng = random.Random(8)
        atoms, agents = ("p", "q"), ("A",)
        seqs = _sequents(rng, 100, atoms, agents)
        algebras = {}
        structures = disagree = 0
        for s in enumerate_structures(3, agents, atoms):
            structures += 1
            alg = algebras.get(s.frame)
            if alg is None:
                alg = algebras[s.frame] = complex_algebra(s.frame)
            interp = valuation_interpretation(s)
            for seq in seqs:
                disagree += sequent_true_kripke(s, seq) != sequent_true_dlam(alg, interp, seq)
        # two agents: every labelled structure, vectorized on both routes
        seqs2 = _sequents(rng, 100, atoms, ("A", "B"))
        models = 0
        for n in (1, 2, 3):
            for b in batches(n, ["A", "B"], atoms):
                models += b.rel.shape[0] * b.vals.shape[0]
                for seq in seqs2:
                    ant = context_formula(seq.antecedent)
                    alg_ok = (b.masks(ant) & ~b.masks(seq.succedent)) == 0
                    kr_ok = ~(b.truth(ant) & ~b.truth(seq.succedent)).any(axis=2)
                    disagree += int((alg_ok != kr_ok).sum())
        info["detail"] = (f"{structures} structures x 100 sequents (1 agent) and "
                          f"{models} labelled models x 100 (2 agents), {disagree} disagreements")
        assert disagree == 0


def test_c09_muddy_children():
    with criterion(9, "muddy children matrix") as info:
        start = time.perf_counter()
        total = wrong = liar = 0
        for config in all_configs(4):
            rules = build_assumptions(config)
            for query in build_queries(config):
                total += 1
                out = prove(query.sequent, SearchConfig(assumptions=rules))
                got = isinstance(out, Proved)
                if got:
                    assert check(out.derivation, rules) == []
                else:
                    assert isinstance(out, NotProvedWithinBounds) and out.exhausted
                wrong += got != query.expected
                if query.name.startswith("liar-belief") and query.expected:
                    liar += got
        timed_under(start, 120)
        info["detail"] = f"{total} queries, {wrong} wrong, {liar} liar beliefs proved"
        assert wrong == 0 and liar > 0


@pytest.mark.parametrize("text", ["[A]p |- p", "<A>p & <A>q |- <A>(p & q)"])
def test_c10_negative_controls(text):
    s = parse_sequent(text)
    cm = find_countermodel(s, 3)
    out = prove(s)
    proved = any(isinstance(prove(s, SearchConfig(max_depth=d)), Proved) for d in (1, 5, 30))
    ok = cm is not None and cm.structure.frame.worlds <= 3 and not sequent_true_kripke(cm.structure, s) \
        and not isinstance(out, Proved) and out.exhausted and not proved
    prev = conftest.ACCEPTANCE.get(10, (True, "negative controls:"))
    worlds = cm.structure.frame.worlds if cm else None
    conftest.ACCEPTANCE[10] = (prev[0] and ok, f"{prev[1]} [{text}: countermodel {worlds} worlds]")
    print(f"criterion 10: {'PASS' if ok else 'FAIL'}  {text}: countermodel with {worlds} worlds")
    assert ok
