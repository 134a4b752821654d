"""Acceptance criteria, one test per criterion.

Run ``pytest tests/test_acceptance.py`` (or this file directly); the terminal
summary prints one PASS/FAIL line per criterion.
"""

import random
from collections import Counter
from fractions import Fraction
from math import comb

import mpmath
import networkx as nx
import pytest

from netpd import checks
from netpd.fptsolve import solve
from netpd.generate import random_network, random_tree
from netpd.hardness import (
    NapInstance,
    SubsetProductInstance,
    gadget_top_edge,
    log_difference_interval,
    nap_to_max_network_pd,
    subset_product_to_penalty_sum,
)
from netpd.lnbound import grid_cell, ln_interval
from netpd.netmodel import Network, reticulation_number
from netpd.oracle import oracle_profile
from netpd.pdscore import gamma_map, netpd_score, tree_gamma_closed

from oracles import subsets

SEEDS = range(200)


def _instance(seed: int) -> Network:
    leaves = 2 + seed % 9
    ret = min(seed % 5, leaves)
    return random_network(seed, leaves, ret, max_weight=20, p_bits=1 + seed % 3, cost0_fraction=0.3 * (seed % 2))


@pytest.fixture(scope="module")
def solved():
    """(network, k, solution, oracle score) for every instance and every budget."""
    rows = []
    for seed in SEEDS:
        net = _instance(seed)
        n = len(net.label)
        profile = oracle_profile(net, n)
        for k in range(n + 1):
            inst = net.copy()
            inst.k = k
            rows.append((inst, k, solve(inst), profile[k].best_score))
    return rows


@pytest.mark.criterion(1, "FPT solver equals brute force on 200 random networks, all k")
def test_fpt_matches_oracle(solved):
    wrong = [(k, sol.score, best) for _, k, sol, best in solved if sol.score != best]
    assert not wrong
    assert len(solved) == sum(len(_instance(s).label) + 1 for s in SEEDS)


@pytest.mark.criterion(2, "branches explored stay within sum of C(r,i), i <= min(k,r)")
def test_branch_bound(solved):
    for net, k, sol, _ in solved:
        r = reticulation_number(net)
        bound = sum(comb(r, i) for i in range(min(k, r) + 1))
        assert sol.branches_explored <= bound
        assert sol.branches_explored <= 2**r


@pytest.mark.criterion(3, "reduction and branching rules preserve the optimum (exhaustive catalog)")
def test_rule_preservation():
    seen = Counter()
    for tag, net in checks.rule_catalog(8):
        assert len(net.label) <= 8 and reticulation_number(net) <= 2
        for case in checks.rule_cases(net, tag):
            assert case.ok, case.line()
            seen[case.name.split()[0]] += 1
    assert set(seen) == {
        "rr1_contract_degree_two",
        "rr2_drop_zero_probability_leaf",
        "rr3_resolve_trivial_reticulation",
        "rr4_absorb_cost0_subtree",
        "branch_on_reticulation",
    }


@pytest.mark.criterion(4, "tree closed form equals the recursion for every subset of 100 trees")
def test_closed_form_equals_recursion():
    rng = random.Random(4)
    for i in range(100):
        tree = random_tree(rng, 2 + i % 9, 20)
        for v in tree.leaves():
            (u,) = tree.parents[v]
            tree.prob[(u, v)] = Fraction(rng.randint(0, 16), 16)
        for Z in subsets(sorted(tree.labels())):
            gamma = gamma_map(tree, Z)
            for e in tree.edges:
                assert tree_gamma_closed(tree, e, Z) == gamma[e]


@pytest.mark.criterion(5, "gadget top edge carries gamma = q under Z = {l*}")
def test_gadget_identity():
    rng = random.Random(5)
    for _ in range(50):
        d = rng.randint(1, 64)
        q = Fraction(rng.randint(0, d), d)
        tree = Network.empty("rho")
        u = tree.add_node("u")
        tree.add_edge(tree.root, u, 1)
        for lab in ("a", "b"):
            v = tree.add_node(lab)
            tree.add_edge(u, v, 1)
            tree.set_leaf(v, lab)
        net, _ = nap_to_max_network_pd(NapInstance(tree, {"a": q, "b": Fraction(1, 2)}, k=1, D=Fraction(1)))
        assert gamma_map(net, ["a*"])[gadget_top_edge(net, "a")] == q


@pytest.mark.criterion(6, "reduction chain preserves yes/no answers (X3C, Subset Product, NAP)")
def test_reduction_chain():
    answers = Counter()
    for case in checks.reduction_cases(seed=0):
        assert case.ok, case.line()
        answers[(case.name.split()[0], case.detail.split()[0])] += 1
    for kind, yes in (("x3c->subprod", "x3c"), ("subprod->pensum", "subprod"), ("nap->maxnetpd", "nap")):
        assert answers[(kind, f"{yes}=True")] and answers[(kind, f"{yes}=False")]
    assert sum(v for (k, _), v in answers.items() if k == "subprod->pensum") == 50
    assert sum(v for (k, _), v in answers.items() if k == "nap->maxnetpd") == 30


@pytest.mark.criterion(7, "log-difference bound certified on [2,50] x [1,150] plus spot values")
def test_log_difference_bound():
    cases = list(checks.lemma4_cases(50, 150))
    assert len(cases) == 49 * 149
    assert all(c.ok for c in cases)

    lo, hi = log_difference_interval(2, 3, bits=40)
    assert Fraction(720, 10000) < lo and hi < Fraction(722, 10000)

    ln2 = ln_interval(2, 40)
    lam_lo, lam_hi = -ln2.hi + 1 - Fraction(1, 16), -ln2.lo + 1 - Fraction(1, 16)
    assert Fraction(243, 1000) < lam_lo and lam_hi < Fraction(245, 1000)

    log2 = lambda n: n.bit_length() - 1  # exact for powers of two
    control = log2(1) - log2(2) + Fraction(2, 1) - 1
    assert control == 0
    assert not control > Fraction(1, 2**4)


@pytest.mark.criterion(8, "dyadic rounding bounds on 1000 random (v, H) and floor_3(pi) = 25/8")
def test_rounding_bounds():
    assert all(c.ok for c in checks.rounding_cases(1000, seed=8))

    # second opinion from mpmath at generous precision
    rng = random.Random(8)
    mpmath.mp.prec = 300
    for _ in range(200):
        v, H = rng.randint(2, 10**6), rng.randint(4, 64)
        case = checks.rounding_case(v, H)
        fl, ce = (Fraction(s) for s in case.detail.replace("floor=", "").replace("ceil=", "").split())
        x = mpmath.mpf((v - 1).bit_length() + 1) - mpmath.log(v)
        scaled = x * 2**H
        assert fl == Fraction(int(mpmath.floor(scaled)), 2**H)
        assert ce == Fraction(int(mpmath.ceil(scaled)), 2**H)

    assert grid_cell(Fraction(333, 106), Fraction(355, 113), 3, "floor") == Fraction(25, 8)


@pytest.mark.criterion(9, "every emitted Penalty Sum instance satisfies (k+1) 2^-H <= Q^-4")
def test_gap_discipline():
    rng = random.Random(9)
    emitted = []
    for M in range(2, 300):
        for k in range(1, min(M, 12)):
            values = tuple(rng.randint(1, 30) for _ in range(rng.randint(1, 6)))
            emitted.append(subset_product_to_penalty_sum(SubsetProductInstance(values, M, k)))
    for _ in range(50):
        emitted.append(subset_product_to_penalty_sum(checks.random_subset_product(rng)))
    for ps in emitted:
        assert (ps.k + 1) * ps.Q**4 <= 2**ps.H
        assert all((a * 2**ps.H).denominator == 1 for a, _ in ps.items)
        assert (ps.D * 2**ps.H).denominator == 1


def _level_brute(net: Network) -> int:
    g = nx.Graph(list(net.weight))
    cut = {e for e in net.weight if not nx.is_connected(nx.restricted_view(g, [], [e]))}
    h = nx.Graph([e for e in net.weight if e not in cut])
    h.add_nodes_from(net.nodes)
    best = 0
    for comp in nx.connected_components(h):
        r = sum(max(0, sum(u in comp for u in net.parents[v]) - 1) for v in comp)
        best = max(best, r)
    return best


@pytest.mark.criterion(10, "witnesses re-score exactly; gadget images have level 1 and depth 4")
def test_witness_integrity(solved):
    for net, k, sol, _ in solved:
        assert netpd_score(net, sol.witness) == sol.score
        ones = {lab for v, lab in net.label.items() if net.cost[v] == 1}
        assert len(sol.witness & ones) <= k
        assert sol.witness >= set(net.labels()) - ones

    rng = random.Random(10)
    for _ in range(30):
        net, _ = nap_to_max_network_pd(checks.random_nap(rng))
        assert _level_brute(net) == 1
        dist = nx.single_source_shortest_path_length(nx.DiGraph(list(net.weight)), net.root)
        assert {dist[v] for v in net.leaves()} == {4}


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
