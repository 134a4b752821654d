"""Verification sweeps shared by the ``verify`` subcommand and the test-suite.

Each sweep yields :class:`Case` records; a sweep passes when every case does.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations
from math import prod
from typing import Iterable, Iterator

from . import fptsolve as fs
from .hardness import (
    NapInstance,
    SubsetProductInstance,
    X3CInstance,
    certify_log_difference,
    ceil_log2,
    gap_holds,
    nap_to_max_network_pd,
    subset_product_to_penalty_sum,
    x3c_to_subset_product,
)
from .lnbound import dyadic_round, ln_interval
from .netmodel import Network, lowest_reticulation
from .generate import _subdivide, random_network
from .oracle import oracle_nap, oracle_penalty_sum, oracle_profile, oracle_solve, oracle_subset_product, oracle_x3c


@dataclass(frozen=True)
class Case:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}" + (f"  {self.detail}" if self.detail else "")


# ---------------------------------------------------------------------------
# log-difference bound


def lemma4_cases(qmax: int = 50, qpmax: int = 150) -> Iterator[Case]:
    for Q in range(2, qmax + 1):
        yield from lemma4_row(Q, qpmax)


def lemma4_row(Q: int, qpmax: int) -> list[Case]:
    out = []
    for Qp in range(1, qpmax + 1):
        if Qp == Q:
            continue
        c = certify_log_difference(Q, Qp)
        out.append(Case(f"lemma4 Q={Q} Q'={Qp}", c.ok, f"lower={float(c.lower):.6g} > {float(Fraction(1, Q**4)):.3g}"))
    return out


# ---------------------------------------------------------------------------
# dyadic rounding


def rounding_case(v: int, H: int) -> Case:
    """Check ``x - d < floor_H(x) <= x <= ceil_H(x) < x + d`` for ``x = c - ln v``."""
    c = ceil_log2(v) + 1
    lo_r = dyadic_round(c, v, H, "floor")
    hi_r = dyadic_round(c, v, H, "ceil")
    ln = ln_interval(v, H + 64)
    x_lo, x_hi = c - ln.hi, c - ln.lo
    delta = Fraction(1, 1 << H)
    on_grid = all((r * (1 << H)).denominator == 1 for r in (lo_r, hi_r))
    ok = on_grid and x_hi - delta < lo_r <= x_lo and x_hi <= hi_r < x_lo + delta
    return Case(f"rounding v={v} H={H}", ok, f"floor={lo_r} ceil={hi_r}")


def rounding_cases(count: int = 1000, seed: int = 0) -> Iterator[Case]:
    rng = random.Random(seed)
    for _ in range(count):
        yield rounding_case(rng.randint(2, 10**6), rng.randint(4, 64))


# ---------------------------------------------------------------------------
# reduction rules


def _values(state: fs.SolverState, budgets: int) -> list[Fraction]:
    prof = oracle_profile(state.net, budgets)
    return [prof[k].best_score + state.d_offset for k in range(budgets + 1)]


def rule_catalog(max_leaves: int = 8, seeds: int = 3) -> list[tuple[str, Network]]:
    """Fixed grid of small instances: every leaf count, 0-2 reticulations, several cost patterns."""
    out = []
    for leaves in range(2, max_leaves + 1):
        for ret in range(0, min(2, leaves) + 1):
            for seed in range(seeds):
                for frac, bits in ((0.0, 2), (0.5, 1), (0.5, 2)):
                    s = 1000 * leaves + 100 * ret + 10 * seed + int(frac * 2) + bits
                    net = random_network(s, leaves, ret, max_weight=9, p_bits=bits, cost0_fraction=frac)
                    out.append((f"L{leaves} R{ret} s{seed} c{frac} b{bits}", net))
                    if ret:
                        out.append((f"L{leaves} R{ret} s{seed} c{frac} b{bits} chain", _with_chain(net)))
    return out


def _with_chain(net: Network) -> Network:
    """Copy with one extra single-child node just below the lowest reticulation."""
    net = net.copy()
    r = lowest_reticulation(net)
    below = net.edges_below(r)
    _subdivide(net, below[-1], 2)
    return net


def rule_cases(net: Network, tag: str = "") -> list[Case]:
    """Walk the solver's rule schedule and compare oracle optima across every step."""
    budgets = sum(1 for v in net.label if net.cost[v] == 1)
    out: list[Case] = []
    _walk(fs.initial_state(net), budgets, tag, out)
    return out


def _check_rule(name: str, before, after, budgets: int, tag: str, out: list[Case]) -> None:
    vb, va = _values(before, budgets), _values(after, budgets)
    out.append(Case(f"{name} {tag}", vb == va, "" if vb == va else f"{vb} != {va}"))


def _walk(state: fs.SolverState, budgets: int, tag: str, out: list[Case]) -> None:
    while True:
        r = lowest_reticulation(state.net)
        if r is None:
            return
        for rule in (fs.rr1_contract_degree_two, fs.rr2_drop_zero_probability_leaf):
            try:
                new = rule(state, r)
            except fs.RuleNotApplicable:
                continue
            _check_rule(rule.__name__, state, new, budgets, tag, out)
            state = new
        if fs.rr3_applicable(state, r):
            new = fs.rr3_resolve_trivial_reticulation(state, r)
            _check_rule("rr3_resolve_trivial_reticulation", state, new, budgets, tag, out)
            state = new
            continue
        try:
            new = fs.rr4_absorb_cost0_subtree(state, r)
        except fs.RuleNotApplicable:
            pass
        else:
            _check_rule("rr4_absorb_cost0_subtree", state, new, budgets, tag, out)
            state = new
            for rule in (fs.rr2_drop_zero_probability_leaf, fs.rr1_contract_degree_two):
                try:
                    new = rule(state, r)
                except fs.RuleNotApplicable:
                    continue
                _check_rule(rule.__name__, state, new, budgets, tag, out)
                state = new
            if fs.rr3_applicable(state, r):
                new = fs.rr3_resolve_trivial_reticulation(state, r)
                _check_rule("rr3_resolve_trivial_reticulation", state, new, budgets, tag, out)
                state = new
                continue
        break

    if state.net.k < 1:
        net = state.net.copy()
        net.k = 1
        state = replace(state, net=net)
    s0, s1 = fs.branch_on_reticulation(state, r)
    s0, s1 = (fs.rr3_resolve_trivial_reticulation(s, r) for s in (s0, s1))
    v, v0, v1 = _values(state, budgets), _values(s0, budgets), _values(s1, budgets)
    ok = all(v[k] == max(v0[k], v1[k - 1]) for k in range(1, budgets + 1))
    out.append(Case(f"branch_on_reticulation {tag}", ok))
    _walk(s0, budgets, tag, out)
    _walk(s1, budgets, tag, out)


# ---------------------------------------------------------------------------
# reduction-chain equivalences


def x3c_instances(max_n: int = 2, max_sets: int = 6) -> Iterator[X3CInstance]:
    for n in range(1, max_n + 1):
        triples = list(combinations(range(1, 3 * n + 1), 3))
        for size in range(1, max_sets + 1):
            for coll in combinations(triples, size):
                yield X3CInstance(n, coll)


def x3c_case(inst: X3CInstance) -> Case:
    a = oracle_x3c(inst)
    b = oracle_subset_product(x3c_to_subset_product(inst))
    return Case(f"x3c->subprod n={inst.n} C={list(inst.triples)}", a == b, f"x3c={a} subprod={b}")


def random_subset_product(rng: random.Random, max_m: int = 10, max_value: int = 30) -> SubsetProductInstance:
    m = rng.randint(1, max_m)
    values = tuple(rng.randint(1, max_value) for _ in range(m))
    k = rng.randint(1, m)
    if rng.random() < 0.5:
        M = prod(rng.sample(values, k))
        if rng.random() < 0.3:
            M += rng.choice((-1, 1))
    else:
        M = rng.randint(2, max_value**2)
    M = max(M, k + 1, 2)
    return SubsetProductInstance(values, M, k)


def subset_product_case(inst: SubsetProductInstance) -> Case:
    ps = subset_product_to_penalty_sum(inst)
    a = oracle_subset_product(inst)
    _, b = oracle_penalty_sum(ps)
    ok = a == b and gap_holds(ps)
    return Case(f"subprod->pensum v={list(inst.values)} M={inst.M} k={inst.k}", ok, f"subprod={a} pensum={b}")


def random_nap(rng: random.Random, max_leaves: int = 6, q_bits: int = 3) -> NapInstance:
    n = rng.randint(2, max_leaves)
    groups = rng.randint(1, max(1, n // 2))
    sizes = [1] * groups
    for _ in range(n - groups):
        sizes[rng.randrange(groups)] += 1
    tree = Network.empty("rho")
    q = {}
    idx = 0
    for g, size in enumerate(sizes):
        mid = tree.add_node(f"u{g}")
        tree.add_edge(tree.root, mid, rng.randint(1, 5))
        for _ in range(size):
            idx += 1
            leaf = tree.add_node(f"l{idx}")
            tree.add_edge(mid, leaf, rng.randint(1, 5))
            tree.set_leaf(leaf, f"t{idx}")
            q[f"t{idx}"] = Fraction(rng.randint(0, 1 << q_bits), 1 << q_bits)
    k = rng.randint(1, n)
    inst = NapInstance(tree=tree, q=q, k=k, D=Fraction(1))
    best, _ = oracle_nap(inst)
    base = int(best)
    inst.D = Fraction(max(1, rng.choice((base, base + 1, base - 1 if base > 1 else 1))))
    return inst


def nap_case(inst: NapInstance) -> Case:
    net, audit = nap_to_max_network_pd(inst)
    _, a = oracle_nap(inst)
    b = oracle_solve(net).best_score >= net.D
    return Case(f"nap->maxnetpd L={len(inst.q)} k={inst.k} D={inst.D}", a == b, f"nap={a} netpd={b} Q={audit.Q}")


def reduction_cases(seed: int = 0, sp_count: int = 50, nap_count: int = 30, x3c_sets: int = 6) -> Iterator[Case]:
    for inst in x3c_instances(2, x3c_sets):
        yield x3c_case(inst)
    rng = random.Random(seed)
    for _ in range(sp_count):
        yield subset_product_case(random_subset_product(rng))
    for _ in range(nap_count):
        yield nap_case(random_nap(rng))


def summarize(cases: Iterable[Case]) -> tuple[int, int]:
    cases = list(cases)
    return sum(c.ok for c in cases), len(cases)
