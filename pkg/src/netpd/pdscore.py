"""Exact evaluation of survival probabilities and Network-PD scores."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from .netmodel import Edge, Network

GammaMap = dict[Edge, Fraction]


def _leaf_nodes(net: Network, taxa: Iterable[str]) -> set[int]:
    by_label = net.leaf_by_label()
    nodes = set()
    for t in taxa:
        if t not in by_label:
            raise KeyError(f"unknown taxon {t!r}")
        nodes.add(by_label[t])
    return nodes


def gamma_map(net: Network, taxa: Iterable[str]) -> GammaMap:
    """Survival probability of every edge when the taxa in ``taxa`` are kept.

    One pass in reverse topological order.  For an edge ``uv``:

    * ``v`` a leaf: ``p(uv)`` if ``v`` is kept, else 0;
    * ``v`` a reticulation with child ``x``: ``p(uv) * gamma(vx)``;
    * otherwise: ``1 - prod(1 - gamma(vx))`` over the children ``x`` of ``v``.

    Nodes of out-degree one that are not reticulations (present transiently
    during reductions) fall under the last case.
    """
    keep = _leaf_nodes(net, taxa)
    return _gamma_nodes(net, keep)


def _gamma_nodes(net: Network, keep: set[int]) -> GammaMap:
    below: dict[int, Fraction] = {}  # survival prob. of a feature sitting at the node
    gamma: GammaMap = {}
    for v in reversed(net.topological_order()):
        kids = net.children[v]
        if not kids:
            below[v] = Fraction(1) if v in keep else Fraction(0)
            continue
        miss = Fraction(1)
        for x in kids:
            g = gamma[(v, x)] = _edge_gamma(net, v, x, below[x])
            miss *= 1 - g
        below[v] = 1 - miss
    return gamma


def _edge_gamma(net: Network, v: int, x: int, at_x: Fraction) -> Fraction:
    if not net.children[x] or len(net.parents[x]) >= 2:
        return net.prob[(v, x)] * at_x
    return at_x


def netpd_score(net: Network, taxa: Iterable[str]) -> Fraction:
    gamma = gamma_map(net, taxa)
    return sum((net.weight[e] * g for e, g in gamma.items()), Fraction(0))


def tree_gamma_closed(net: Network, edge: Edge, taxa: Iterable[str]) -> Fraction:
    """Closed form ``1 - prod(1 - p(l))`` over kept leaves below a reticulation-free edge."""
    if edge not in net.weight:
        raise KeyError(f"no such edge {edge}")
    below = net.descendants(edge[1])
    if any(len(net.parents[v]) >= 2 for v in below):
        raise ValueError("a reticulation lies below the edge")
    keep = _leaf_nodes(net, taxa)
    miss = Fraction(1)
    for leaf in below & keep:
        (parent,) = net.parents[leaf]
        miss *= 1 - net.prob[(parent, leaf)]
    return 1 - miss


def tree_pd(net: Network, taxa: Iterable[str]) -> Fraction:
    """Classical PD: total weight of edges with a kept leaf below."""
    if net.reticulations():
        raise ValueError("tree_pd needs a tree")
    keep = _leaf_nodes(net, taxa)
    covered: set[int] = set()
    for leaf in keep:
        v = leaf
        while v not in covered and v != net.root:
            covered.add(v)
            (v,) = net.parents[v]
    return sum((net.weight[(net.parents[v][0], v)] for v in covered), Fraction(0))
