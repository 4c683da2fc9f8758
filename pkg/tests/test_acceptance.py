"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the report lines.
"""
import contextlib
import time

import numpy as np
import pytest

from probarg import (BAF, ConjunctiveQuery, ConstraintSet, RawConstraint,
                     SemanticsFlag, check_sat, compile_semantics,
                     conjunctive_query, entail_all, entropy_distribution,
                     entropy_labelling, factorized_distribution, kl_divergence,
                     labelling_of, maxent_labelling, random_instance,
                     world_lp_entail, world_lp_sat, world_maxent)
from conftest import random_distribution, random_labelling


@contextlib.contextmanager
def report(number, name):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number} {name}: FAIL")
        raise
    print(f"ACCEPTANCE {number} {name}: PASS")


def fig1_baf():
    return BAF(["A", "B", "C", "D"],
               attacks=[("A", "B"), ("B", "A"), ("D", "B")],
               supports=[("C", "A"), ("D", "C")])


def eq(terms, bound):
    return RawConstraint.of(terms, "=", bound)


def test_01_example_one_reproduction():
    with report(1, "attack-graph satisfiability and forced bounds"):
        baf = fig1_baf()
        cs = compile_semantics(baf, {SemanticsFlag.COH, SemanticsFlag.FOU})
        t0 = time.perf_counter()
        res = check_sat(cs, baf)
        bounds = entail_all(cs, baf)
        elapsed = time.perf_counter() - t0
        assert res.satisfiable
        for name, lo, hi in [("B", 0.0, 0.0), ("C", 1.0, 1.0), ("D", 1.0, 1.0)]:
            b = bounds[baf.arg(name)]
            assert abs(b.lower - lo) <= 1e-6 and abs(b.upper - hi) <= 1e-6
        assert elapsed < 0.1, f"took {elapsed:.3f}s"


def test_02_example_two_reproduction():
    with report(2, "partial assignment propagation and unsatisfiability"):
        baf = fig1_baf()
        t0 = time.perf_counter()
        cs = compile_semantics(baf, {SemanticsFlag.COH})
        cs.add_raw(eq([(1.0, "B")], 1.0))
        cs.add_raw(eq([(1.0, "C")], 0.0))
        bounds = entail_all(cs, baf)
        for name in ("A", "D"):
            b = bounds[baf.arg(name)]
            assert abs(b.lower) <= 1e-6 and abs(b.upper) <= 1e-6
        cs.extend(compile_semantics(baf, {SemanticsFlag.FOU}))
        assert not check_sat(cs, baf).satisfiable
        elapsed = time.perf_counter() - t0
        assert elapsed < 0.1, f"took {elapsed:.3f}s"


def test_03_support_coherence_example():
    with report(3, "support coherence forces full acceptance"):
        baf = fig1_baf()
        cs = compile_semantics(baf, {SemanticsFlag.COH, SemanticsFlag.FOU,
                                     SemanticsFlag.SCOH})
        bounds = entail_all(cs, baf)
        expected = {"A": 1.0, "B": 0.0, "C": 1.0, "D": 1.0}
        for name, v in expected.items():
            b = bounds[baf.arg(name)]
            assert abs(b.lower - v) <= 1e-6 and abs(b.upper - v) <= 1e-6


def test_04_maxent_worked_example():
    with report(4, "maximum-entropy labelling, world table and query"):
        baf = BAF(["A", "B"], attacks=[("A", "B")])
        cs = compile_semantics(baf, {SemanticsFlag.COH})
        cs.add_raw(eq([(1.0, "A")], 0.8))
        res = maxent_labelling(cs, baf)
        assert abs(res.labelling["A"] - 0.8) <= 1e-4
        assert abs(res.labelling["B"] - 0.2) <= 1e-4
        table = factorized_distribution(res.labelling).probs
        assert np.allclose(table, [0.16, 0.64, 0.04, 0.16], atol=1e-4)
        q = ConjunctiveQuery.of([("A", True), ("B", True)])
        assert abs(conjunctive_query(res.labelling, q) - 0.16) <= 1e-4


def _corpus_instance(seed):
    n = 2 + seed % 5
    baf, cs = random_instance(n, edge_density=0.25,
                              constraint_count=1 + seed % 3, seed=seed)
    flag_mix = [set(), {SemanticsFlag.COH},
                {SemanticsFlag.COH, SemanticsFlag.SCOH}][seed % 3]
    full = compile_semantics(baf, flag_mix)
    full.extend(cs)
    return baf, full


def test_05_oracle_equivalence_suite():
    with report(5, "labelling LP agrees with world LP on 200+ instances"):
        t0 = time.perf_counter()
        checked = 0
        seed = 0
        while checked < 200:
            baf, cs = _corpus_instance(seed)
            seed += 1
            r_lab = check_sat(cs, baf)
            r_world = world_lp_sat(cs, baf, max_args=8)
            assert r_lab.satisfiable == r_world.satisfiable, f"seed {seed - 1}"
            checked += 1
            if not r_lab.satisfiable:
                continue
            lab = entail_all(cs, baf)
            for a in baf.args:
                world = world_lp_entail(cs, baf, a, max_args=8)
                assert abs(lab[a].lower - world.lower) <= 1e-6, f"seed {seed - 1}"
                assert abs(lab[a].upper - world.upper) <= 1e-6, f"seed {seed - 1}"
        elapsed = time.perf_counter() - t0
        assert elapsed < 60.0, f"took {elapsed:.1f}s"


def test_06_maxent_equivalence_suite():
    with report(6, "world maximum entropy matches factorized labelling"):
        t0 = time.perf_counter()
        done = 0
        seed = 0
        while done < 50:
            n = 2 + seed % 5
            baf, cs = random_instance(n, edge_density=0.2,
                                      constraint_count=1 + seed % 3, seed=1000 + seed)
            flags = [set(), {SemanticsFlag.COH}][seed % 2]
            full = compile_semantics(baf, flags)
            full.extend(cs)
            seed += 1
            if not check_sat(full, baf).satisfiable:
                continue
            res = maxent_labelling(full, baf)
            dist = world_maxent(full, baf, max_args=6)
            kl = kl_divergence(dist, factorized_distribution(res.labelling))
            assert kl <= 1e-5, f"seed {1000 + seed - 1}: KL={kl:.3e}"
            done += 1
        elapsed = time.perf_counter() - t0
        assert elapsed < 120.0, f"took {elapsed:.1f}s"


def test_07_entropy_identities():
    with report(7, "entropy identities over 500+ random labellings"):
        rng = np.random.default_rng(2024)
        for trial in range(500):
            n = 1 + trial % 10
            baf = BAF([f"E{i}" for i in range(n)])
            L = random_labelling(rng, baf)
            P_L = factorized_distribution(L)
            assert abs(entropy_distribution(P_L) - entropy_labelling(L)) <= 1e-9
            P = random_distribution(rng, baf)
            L_P = labelling_of(P)
            gap = entropy_labelling(L_P) - entropy_distribution(P)
            kl = kl_divergence(P, factorized_distribution(L_P))
            assert gap >= -1e-9
            assert abs(gap - kl) <= 1e-9


def _random_positive_chi(rng, baf, exclude):
    names = [a.name for a in baf.args if a.name not in exclude]
    k = int(rng.integers(0, len(names) + 1)) if names else 0
    picked = list(rng.choice(names, size=min(k, len(names)), replace=False)) if k else []
    return picked


def test_08_guarantee_propositions():
    with report(8, "conjunction bounds under coherence and support coherence"):
        rng = np.random.default_rng(77)
        attack_checked = support_checked = combined_checked = 0
        seed = 0
        while attack_checked < 34 or support_checked < 34 or combined_checked < 34:
            seed += 1
            baf, cs = random_instance(4, 0.35, 1, seed=3000 + seed)
            if attack_checked < 34 and baf.attacks:
                full = compile_semantics(baf, {SemanticsFlag.COH})
                full.extend(cs)
                if check_sat(full, baf).satisfiable:
                    L = maxent_labelling(full, baf).labelling
                    for (a, b) in sorted(baf.attacks):
                        if a == b:
                            continue
                        chi = _random_positive_chi(rng, baf, {a.name, b.name})
                        q = ConjunctiveQuery.of([(a, True), (b, True)]
                                                + [(c, True) for c in chi])
                        val = conjunctive_query(L, q)
                        assert val <= min(0.25, 1.0 - L[a]) + 1e-6
                    attack_checked += 1
            if support_checked < 34 and baf.supports:
                full = compile_semantics(baf, {SemanticsFlag.SCOH})
                full.extend(cs)
                if check_sat(full, baf).satisfiable:
                    L = maxent_labelling(full, baf).labelling
                    for (a, b) in sorted(baf.supports):
                        if a == b:
                            continue
                        chi = _random_positive_chi(rng, baf, {a.name, b.name})
                        q = ConjunctiveQuery.of([(a, True), (b, False)]
                                                + [(c, True) for c in chi])
                        val = conjunctive_query(L, q)
                        assert val <= min(0.25, 1.0 - L[a]) + 1e-6
                    support_checked += 1
            if combined_checked < 34:
                # explicit attacker/supporter pattern into a shared target
                base = BAF(["A", "B", "C", "D"],
                           attacks=[("A", "C")], supports=[("B", "C")])
                full = compile_semantics(base, {SemanticsFlag.COH, SemanticsFlag.SCOH})
                crng = np.random.default_rng(4000 + seed)
                k = int(crng.integers(1, 4))
                which = crng.choice(4, size=k, replace=False)
                terms = [(float(crng.uniform(-2, 2)), base.args[i].name) for i in which]
                rel = ["<=", "=", ">="][int(crng.integers(0, 3))]
                full.add_raw(RawConstraint.of(terms, rel, float(crng.uniform(-2, 2))))
                if check_sat(full, base).satisfiable:
                    L = maxent_labelling(full, base).labelling
                    assert L["A"] + L["B"] <= 1.0 + 1e-6
                    chi = _random_positive_chi(rng, base, {"A", "B", "C"})
                    q2 = ConjunctiveQuery.of([("A", True), ("B", False), ("C", True)]
                                             + [(c, True) for c in chi])
                    assert conjunctive_query(L, q2) <= min(0.25, 1.0 - L["A"]) + 1e-6
                    q3 = ConjunctiveQuery.of([("A", False), ("B", True), ("C", False)]
                                             + [(c, True) for c in chi])
                    assert conjunctive_query(L, q3) <= min(0.25, 1.0 - L["B"]) + 1e-6
                    combined_checked += 1
        assert attack_checked + support_checked + combined_checked >= 100


def test_09_scaling_sanity():
    with report(9, "polynomial path scales; world oracle visibly exponential"):
        n = 1000
        names = [f"A{i:04d}" for i in range(n)]
        attacks = [(names[i], names[i + 1]) for i in range(n - 1)]
        baf = BAF(names, attacks)
        cs = compile_semantics(baf, {SemanticsFlag.COH, SemanticsFlag.FOU})
        t0 = time.perf_counter()
        res = check_sat(cs, baf)
        bounds = entail_all(cs, baf)
        elapsed = time.perf_counter() - t0
        assert res.satisfiable
        assert bounds[baf.arg(names[0])].lower == pytest.approx(1.0, abs=1e-6)
        assert bounds[baf.arg(names[1])].upper == pytest.approx(0.0, abs=1e-6)
        assert elapsed < 10.0, f"sat + entail-all took {elapsed:.2f}s"

        m = 16
        small_names = [f"B{i:02d}" for i in range(m)]
        small = BAF(small_names, [(small_names[i], small_names[i + 1])
                                  for i in range(m - 1)])
        scs = compile_semantics(small, {SemanticsFlag.COH, SemanticsFlag.FOU})
        t0 = time.perf_counter()
        check_sat(scs, small)
        labelling_time = time.perf_counter() - t0
        t0 = time.perf_counter()
        world_lp_sat(scs, small, max_args=16)
        world_time = time.perf_counter() - t0
        assert world_time > labelling_time, (
            f"world {world_time:.4f}s should exceed labelling {labelling_time:.4f}s")
