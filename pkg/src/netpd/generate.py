"""Seeded random instances.

All randomness comes from :class:`random.Random` (Mersenne Twister MT19937)
seeded with the given integer, so output is reproducible for a given seed.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .netmodel import Network


def _dyadic(rng: random.Random, bits: int) -> Fraction:
    return Fraction(rng.randint(0, 1 << bits), 1 << bits)


def random_tree(rng: random.Random, leaves: int, max_weight: int) -> Network:
    """Random binary tree: repeatedly split a random leaf into a cherry."""
    if leaves < 2:
        raise ValueError("need at least two leaves")
    net = Network.empty("v0")
    tips = []
    for _ in range(2):
        t = net.add_node(f"v{len(net.children)}")
        net.add_edge(net.root, t, rng.randint(1, max_weight))
        tips.append(t)
    while len(tips) < leaves:
        t = tips.pop(rng.randrange(len(tips)))
        for _ in range(2):
            c = net.add_node(f"v{len(net.children)}")
            net.add_edge(t, c, rng.randint(1, max_weight))
            tips.append(c)
    for i, t in enumerate(sorted(tips), 1):
        net.set_leaf(t, f"x{i}")
    return net


def _subdivide(net: Network, edge: tuple[int, int], w_top: int) -> int:
    u, v = edge
    w, p = net.weight[edge], net.prob[edge]
    s = net.add_node(f"v{len(net.children)}")
    net.remove_edge(u, v)
    net.add_edge(u, s, w_top)
    net.add_edge(s, v, w, p)
    return s


def random_network(
    seed: int,
    leaves: int,
    reticulations: int,
    max_weight: int = 20,
    p_bits: int = 2,
    cost0_fraction: float = 0.0,
) -> Network:
    """Random binary network with the given numbers of leaves and reticulations.

    Each reticulation subdivides two edges ``a->b`` and ``c->d`` into ``a->s->b``
    and ``c->t->d`` and adds ``s->t``, rejecting choices that would close a cycle.
    Reticulation edges get dyadic probabilities with ``p_bits`` bits; a
    ``cost0_fraction`` of the leaves become cost-0 leaves with dyadic p.
    """
    if reticulations < 0 or reticulations > leaves:
        raise ValueError("need 0 <= reticulations <= leaves")
    rng = random.Random(seed)
    net = random_tree(rng, leaves, max_weight)
    added = 0
    while added < reticulations:
        e1, e2 = rng.sample(net.edges, 2)
        if e1[0] in net.descendants(e2[1]):
            continue
        s = _subdivide(net, e1, rng.randint(1, max_weight))
        t = _subdivide(net, e2, rng.randint(1, max_weight))
        net.add_edge(s, t, rng.randint(1, max_weight))
        added += 1
    for t in net.reticulations():
        for u in net.parents[t]:
            net.prob[(u, t)] = _dyadic(rng, p_bits)
    for v in net.leaves():
        if rng.random() < cost0_fraction:
            net.cost[v] = 0
            (u,) = net.parents[v]
            net.prob[(u, v)] = _dyadic(rng, p_bits)
    return net
