"""Brute-force reference solvers.  Deliberately naive; used as ground truth."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, prod
from typing import TYPE_CHECKING

from .netmodel import Network
from .pdscore import netpd_score

if TYPE_CHECKING:
    from .hardness import NapInstance, PenaltySumInstance, SubsetProductInstance, X3CInstance


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    best_score: Fraction
    best_witness: frozenset[str]
    evaluated: int


def _guard(size: int, limit: int, what: str) -> None:
    if size > limit:
        raise InstanceTooLarge(f"{what} = {size} exceeds the oracle limit {limit}")


def oracle_profile(net: Network, max_k: int | None = None) -> dict[int, OracleResult]:
    """Best Network-PD for every budget ``0..max_k`` from a single enumeration.

    Each candidate is a set of cost-1 leaves plus all cost-0 leaves.  Among
    equal scores the lexicographically smallest witness wins.
    """
    ones = sorted(lab for v, lab in net.label.items() if net.cost[v] == 1)
    _guard(len(ones), 25, "number of cost-1 leaves")
    zeros = [lab for v, lab in net.label.items() if net.cost[v] == 0]
    top = len(ones) if max_k is None else min(max_k, len(ones))
    best_by_size = []
    for size in range(top + 1):
        best = None
        for combo in combinations(ones, size):
            witness = sorted(zeros + list(combo))
            score = netpd_score(net, witness)
            if best is None or score > best[0] or (score == best[0] and witness < best[1]):
                best = (score, witness)
        best_by_size.append(best)
    profile = {}
    running = None
    count = 0
    for size, cand in enumerate(best_by_size):
        count += comb(len(ones), size)
        if running is None or cand[0] > running[0] or (cand[0] == running[0] and cand[1] < running[1]):
            running = cand
        profile[size] = OracleResult(running[0], frozenset(running[1]), count)
    if max_k is not None:
        for k in range(top + 1, max_k + 1):
            profile[k] = profile[top]
    return profile


def oracle_solve(net: Network) -> OracleResult:
    """Exhaustive optimum of the instance at its own budget ``net.k``."""
    return oracle_profile(net, net.k)[net.k]


def oracle_penalty_sum(inst: "PenaltySumInstance") -> tuple[Fraction | None, bool]:
    """Best value of sum(a) - Q * prod(b) over index sets of size exactly k."""
    _guard(len(inst.items), 25, "number of items")
    best = None
    for combo in combinations(range(len(inst.items)), inst.k):
        value = sum((inst.items[i][0] for i in combo), Fraction(0)) - inst.Q * prod(
            (inst.items[i][1] for i in combo), start=Fraction(1)
        )
        if best is None or value > best:
            best = value
    return best, best is not None and best >= inst.D


def oracle_subset_product(inst: "SubsetProductInstance") -> bool:
    _guard(len(inst.values), 25, "number of values")
    return any(prod(c) == inst.M for c in combinations(inst.values, inst.k))


def oracle_x3c(inst: "X3CInstance") -> bool:
    _guard(len(inst.triples), 20, "number of triples")
    universe = set(range(1, 3 * inst.n + 1))
    for combo in combinations(inst.triples, inst.n):
        covered = [x for t in combo for x in t]
        if len(covered) == len(set(covered)) and set(covered) == universe:
            return True
    return False


def nap_value(inst: "NapInstance", chosen) -> Fraction:
    """Expected PD of ``chosen`` on the NAP tree, using the closed-form survival product."""
    tree = inst.tree
    by_label = tree.leaf_by_label()
    total = Fraction(0)
    for (u, v), w in tree.weight.items():
        below = tree.descendants(v)
        miss = prod((1 - inst.q[t] for t in chosen if by_label[t] in below), start=Fraction(1))
        total += w * (1 - miss)
    return total


def oracle_nap(inst: "NapInstance") -> tuple[Fraction, bool]:
    labels = sorted(inst.q)
    _guard(len(labels), 20, "number of leaves")
    best = Fraction(0)
    for size in range(min(inst.k, len(labels)) + 1):
        for combo in combinations(labels, size):
            best = max(best, nap_value(inst, combo))
    return best, best >= inst.D
