"""Exact branch-and-reduce solver for 0/1-cost Max-Network-PD.

The solver repeatedly picks a lowest reticulation ``r``, simplifies the tree
hanging below it with four reduction rules, and otherwise branches on whether
some cost-1 leaf below ``r`` is taken.  Each branch removes ``r``; once no
reticulation is left the remaining tree is solved greedily.

Instead of lowering the target ``D`` the rules accumulate the removed score in
``SolverState.d_offset``; the final score is ``greedy + d_offset``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .netmodel import Network, lowest_reticulation, require_valid
from .pdscore import _gamma_nodes, netpd_score


class RuleNotApplicable(Exception):
    """A rule's precondition does not hold; the state is unchanged."""


@dataclass(frozen=True)
class SolverState:
    net: Network
    d_offset: Fraction = Fraction(0)
    decisions: tuple[str, ...] = ()
    synthetic: frozenset[int] = frozenset()
    depth: int = 0


@dataclass(frozen=True)
class Solution:
    witness: frozenset[str]
    score: Fraction
    branches_explored: int = 1

    def sorted_witness(self) -> list[str]:
        return sorted(self.witness)


def initial_state(net: Network) -> SolverState:
    return SolverState(net=net.copy())


# ---------------------------------------------------------------------------
# helpers


def _below(net: Network, r: int) -> set[int]:
    return net.descendants(r) - {r}


def _only_child(net: Network, r: int) -> int:
    (x,) = net.children[r]
    return x


def _parent(net: Network, v: int) -> int:
    (u,) = net.parents[v]
    return u


def _new_synthetic_leaf(net: Network, parent: int, w, p) -> int:
    leaf = net.add_node(f"_syn{max(net.children) + 1}")
    label = net.name[leaf]
    taken = net.labels()
    while label in taken:
        label = "_" + label
    net.add_edge(parent, leaf, w, p)
    net.set_leaf(leaf, label, cost=0)
    return leaf


def _contract(net: Network, r: int) -> bool:
    """Contract every single-child node below ``r`` in place; report whether any was."""
    changed = False
    while True:
        todo = [v for v in sorted(_below(net, r)) if len(net.children[v]) == 1 and len(net.parents[v]) == 1]
        if not todo:
            return changed
        v = todo[0]
        u, w = _parent(net, v), _only_child(net, v)
        weight = net.weight[(u, v)] + net.weight[(v, w)]
        p = net.prob[(v, w)]
        net.remove_node(v)
        net.add_edge(u, w, weight, p)
        changed = True


def _cost0_below(net: Network, r: int) -> list[int]:
    return [v for v in sorted(_below(net, r)) if v in net.label and net.cost[v] == 0]


def _cost1_below(net: Network, r: int) -> list[int]:
    return [v for v in sorted(_below(net, r)) if v in net.label and net.cost[v] == 1]


# ---------------------------------------------------------------------------
# reduction rules


def rr1_contract_degree_two(state: SolverState, r: int) -> SolverState:
    """Merge ``u -> v -> w`` into ``u -> w`` below ``r`` (weights add, p of ``vw`` kept)."""
    net = state.net.copy()
    if not _contract(net, r):
        raise RuleNotApplicable("no single-child node below r")
    return replace(state, net=net)


def rr2_drop_zero_probability_leaf(state: SolverState, r: int) -> SolverState:
    """Delete leaves below ``r`` (not children of ``r``) whose incoming p is 0."""
    net = state.net.copy()
    removed = False
    while True:
        _contract(net, r)
        doomed = [
            v
            for v in sorted(_below(net, r))
            if not net.children[v] and _parent(net, v) != r and net.prob[(_parent(net, v), v)] == 0
        ]
        if not doomed:
            break
        net.remove_node(doomed[0])
        removed = True
    if not removed:
        raise RuleNotApplicable("no zero-probability leaf below r")
    return replace(state, net=net, synthetic=state.synthetic & set(net.children))


def rr3_applicable(state: SolverState, r: int) -> bool:
    net = state.net
    if r not in net.children or len(net.children[r]) != 1:
        return False
    x = _only_child(net, r)
    return not net.children[x] and net.cost.get(x) == 0


def rr3_resolve_trivial_reticulation(state: SolverState, r: int) -> SolverState:
    """Replace a reticulation whose child is a cost-0 leaf by one leaf per parent."""
    if not rr3_applicable(state, r):
        raise RuleNotApplicable("child of r is not a cost-0 leaf")
    net = state.net.copy()
    x = _only_child(net, r)
    p_rx, w_rx = net.prob[(r, x)], net.weight[(r, x)]
    synthetic = set(state.synthetic)
    for z in sorted(net.parents[r]):
        leaf = _new_synthetic_leaf(net, z, net.weight[(z, r)], net.prob[(z, r)] * p_rx)
        synthetic.add(leaf)
    net.remove_node(x)
    net.remove_node(r)
    synthetic &= set(net.children)
    return replace(state, net=net, d_offset=state.d_offset + p_rx * w_rx, synthetic=frozenset(synthetic))


def _is_absorbed_marker(state: SolverState, x: int, leaf: int) -> bool:
    net = state.net
    return leaf in state.synthetic and net.parents[leaf] == [x] and net.weight[(x, leaf)] == 0


def rr4_absorb_cost0_subtree(state: SolverState, r: int) -> SolverState:
    """Fold the contribution of the cost-0 leaves below ``r`` into ``d_offset``.

    Weights below ``x`` (the child of ``r``) are scaled by ``1 - gamma_Q``,
    the cost-0 leaves get p = 0, and a zero-weight cost-0 leaf carrying
    ``gamma_Q(rx)`` is hung below ``x``.
    """
    net = state.net
    x = _only_child(net, r) if r in net.children and len(net.children[r]) == 1 else None
    if x is None or not net.children[x]:
        raise RuleNotApplicable("child of r is a leaf")
    zero = _cost0_below(net, r)
    if not zero:
        raise RuleNotApplicable("no cost-0 leaf below r")
    if all(_is_absorbed_marker(state, x, v) for v in zero):
        raise RuleNotApplicable("cost-0 leaves below r already absorbed")

    gamma = _gamma_nodes(net, set(zero))
    net = net.copy()
    absorbed = Fraction(0)
    for e in net.edges_below(x):
        g = gamma[e]
        absorbed += g * net.weight[e]
        net.weight[e] *= 1 - g
    for v in zero:
        net.prob[(_parent(net, v), v)] = Fraction(0)
    marker = _new_synthetic_leaf(net, x, 0, gamma[(r, x)])
    return replace(
        state,
        net=net,
        d_offset=state.d_offset + absorbed,
        synthetic=state.synthetic | {marker},
    )


# ---------------------------------------------------------------------------
# branching


def _path_weights(net: Network, r: int) -> dict[int, Fraction]:
    dist = {r: Fraction(0)}
    todo = [r]
    while todo:
        u = todo.pop()
        for w in net.children[u]:
            dist[w] = dist[u] + net.weight[(u, w)]
            todo.append(w)
    return dist


def heaviest_cost1_leaf(state: SolverState, r: int) -> str:
    net = state.net
    leaves = _cost1_below(net, r)
    if not leaves:
        raise RuleNotApplicable("no cost-1 leaf below r")
    dist = _path_weights(net, r)
    best = min(leaves, key=lambda v: (-dist[v], net.label[v]))
    return net.label[best]


def _move_to_root(net: Network, r: int, x: int) -> None:
    w, p = net.weight[(r, x)], net.prob[(r, x)]
    net.remove_edge(r, x)
    net.add_edge(net.root, x, w, p)


def branch_on_reticulation(state: SolverState, r: int) -> tuple[SolverState, SolverState]:
    """Split into "no cost-1 leaf below r is taken" and "the heaviest one is taken".

    The second state has budget ``k - 1``.  In both, the subtree of ``x``
    hangs from the root and ``r`` keeps only a new zero-weight cost-0 leaf.
    """
    net = state.net
    if r not in net.children or len(net.children[r]) != 1:
        raise RuleNotApplicable("r is not a reticulation with a single child")
    x = _only_child(net, r)
    if not net.children[x] and net.cost.get(x) == 0:
        raise RuleNotApplicable("child of r is a cost-0 leaf")
    if net.k < 1:
        raise RuleNotApplicable("budget exhausted")
    zero = _cost0_below(net, r)
    ones = _cost1_below(net, r)
    if not ones:
        raise RuleNotApplicable("no cost-1 leaf below r")
    gamma_rx = _gamma_nodes(net, set(zero))[(r, x)]

    net0 = net.copy()
    for t in ones:
        net0.prob[(_parent(net0, t), t)] = Fraction(0)
    _move_to_root(net0, r, x)
    leaf0 = _new_synthetic_leaf(net0, r, 0, gamma_rx)
    s0 = replace(state, net=net0, synthetic=state.synthetic | {leaf0}, depth=state.depth + 1)

    a_label = heaviest_cost1_leaf(state, r)
    net1 = net.copy()
    a = net1.leaf_by_label()[a_label]
    net1.cost[a] = 0
    _move_to_root(net1, r, x)
    leaf1 = _new_synthetic_leaf(net1, r, 0, 1)
    net1.k -= 1
    s1 = replace(
        state,
        net=net1,
        decisions=state.decisions + (a_label,),
        synthetic=state.synthetic | {leaf1},
        depth=state.depth + 1,
    )
    return s0, s1


# ---------------------------------------------------------------------------
# base cases and driver


def solve_tree_greedy(state: SolverState) -> Solution:
    """Optimal solution of a reticulation-free instance.

    Cost-0 leaves are folded into an offset with weights scaled by
    ``1 - gamma``; the remaining cost-1 leaves are picked greedily by
    marginal PD gain, using a longest-path decomposition of the tree.
    """
    net = state.net
    if net.reticulations():
        raise ValueError("solve_tree_greedy needs a tree")
    zero = {v for v in net.label if net.cost[v] == 0}
    gamma = _gamma_nodes(net, zero)
    offset = state.d_offset + sum((g * net.weight[e] for e, g in gamma.items()), Fraction(0))

    candidates = set()
    for v in net.label:
        if net.cost[v] != 1 or v == net.root:
            continue
        p = net.prob[(_parent(net, v), v)]
        if p == 1:
            candidates.add(v)
        elif p != 0:
            raise ValueError(f"cost-1 leaf {net.label[v]!r} has p={p}")

    height: dict[int, Fraction] = {}
    end: dict[int, int] = {}
    gains: list[tuple[Fraction, str]] = []
    for v in reversed(net.topological_order()):
        if v in candidates:
            height[v], end[v] = Fraction(0), v
            continue
        options = [
            (height[c] + net.weight[(v, c)] * (1 - gamma[(v, c)]), net.label[end[c]], c)
            for c in net.children[v]
            if c in height
        ]
        if not options:
            continue
        options.sort(key=lambda t: (-t[0], t[1]))
        top = options[0]
        height[v], end[v] = top[0], end[top[2]]
        gains.extend((value, lab) for value, lab, _ in options[1:])
    if net.root in height:
        gains.append((height[net.root], net.label[end[net.root]]))

    gains.sort(key=lambda t: (-t[0], t[1]))
    picks = [lab for g, lab in gains[: net.k] if g > 0]
    score = offset + sum((g for g, _ in gains[: len(picks)]), Fraction(0))
    return Solution(witness=frozenset(state.decisions) | frozenset(picks), score=score)


def _solve_k0(state: SolverState) -> Solution:
    net = state.net
    zero = [lab for v, lab in net.label.items() if net.cost[v] == 0]
    return Solution(witness=frozenset(state.decisions), score=state.d_offset + netpd_score(net, zero))


def _try(rule, state: SolverState, r: int) -> SolverState:
    try:
        return rule(state, r)
    except RuleNotApplicable:
        return state


def reduce_round(state: SolverState, r: int) -> SolverState:
    """One round of reductions at ``r``; ``r`` is gone afterwards iff rule 3 fired."""
    state = _try(rr1_contract_degree_two, state, r)
    state = _try(rr2_drop_zero_probability_leaf, state, r)
    if rr3_applicable(state, r):
        return rr3_resolve_trivial_reticulation(state, r)
    try:
        state = rr4_absorb_cost0_subtree(state, r)
    except RuleNotApplicable:
        return state
    state = _try(rr2_drop_zero_probability_leaf, state, r)
    state = _try(rr1_contract_degree_two, state, r)
    if rr3_applicable(state, r):
        return rr3_resolve_trivial_reticulation(state, r)
    return state


def _better(a: Solution, b: Solution) -> Solution:
    if a.score != b.score:
        return a if a.score > b.score else b
    return a if sorted(a.witness) <= sorted(b.witness) else b


def _search(state: SolverState) -> Solution:
    while True:
        if state.net.k == 0:
            return _solve_k0(state)
        r = lowest_reticulation(state.net)
        if r is None:
            return solve_tree_greedy(state)
        state = reduce_round(state, r)
        if r in state.net.children:
            break
    s0, s1 = branch_on_reticulation(state, r)
    sol0 = _search(rr3_resolve_trivial_reticulation(s0, r))
    sol1 = _search(rr3_resolve_trivial_reticulation(s1, r))
    best = _better(sol0, sol1)
    return Solution(best.witness, best.score, sol0.branches_explored + sol1.branches_explored)


def solve(net: Network) -> Solution:
    """Maximum Network-PD over leaf sets whose cost-1 part has size at most ``net.k``.

    The witness contains every cost-0 leaf of ``net``.
    """
    require_valid(net)
    sol = _search(initial_state(net))
    cost0 = frozenset(lab for v, lab in net.label.items() if net.cost[v] == 0)
    return Solution(sol.witness | cost0, sol.score, sol.branches_explored)
