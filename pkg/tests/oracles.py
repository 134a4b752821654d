"""Independent reference computations used only by the tests."""

from __future__ import annotations

from fractions import Fraction
from itertools import product


def unfolded_gamma(net, taxa):
    """Survival probabilities by unfolding the DAG into a tree and enumerating worlds.

    Each edge copy of the unfolded tree is an independent coin that is open
    with probability p.  A feature born on ``uv`` survives when an open path
    leads from it to a kept leaf.  Exponential in the number of uncertain
    coins, so only for tiny valid networks (where p < 1 only on reticulation
    and leaf edges).
    """
    keep = {v for v, lab in net.label.items() if lab in set(taxa)}

    def unfold(u, v):
        return (net.prob[(u, v)], v, [unfold(v, x) for x in net.children[v]])

    def uncertain(node, out):
        p, _, kids = node
        if 0 < p < 1:
            out.append(node)
        for k in kids:
            uncertain(k, out)
        return out

    def reaches(node, opened):
        p, v, kids = node
        if p == 0 or (p < 1 and id(node) not in opened):
            return False
        if not kids:
            return v in keep
        return any(reaches(k, opened) for k in kids)

    result = {}
    for u, v in net.edges:
        root = unfold(u, v)
        coins = uncertain(root, [])
        total = Fraction(0)
        for world in product((True, False), repeat=len(coins)):
            weight = Fraction(1)
            for ok, (p, _, _) in zip(world, coins):
                weight *= p if ok else 1 - p
            opened = {id(c) for ok, c in zip(world, coins) if ok}
            if reaches(root, opened):
                total += weight
        result[(u, v)] = total
    return result


def subsets(items):
    items = list(items)
    for mask in range(1 << len(items)):
        yield [items[i] for i in range(len(items)) if mask >> i & 1]
