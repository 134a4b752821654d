"""Reduction-chain instance generators and certified numeric checks.

Chain: X3C -> Subset Product -> Penalty Sum, and unit-cost NAP on height-2
trees -> Max-Network-PD on level-1 networks.  Logarithms only ever enter
through :mod:`netpd.lnbound`, so every rounding and bound is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, isqrt, log, prod
from typing import Iterator

from .lnbound import compare_ln, dyadic_round, ln_interval
from .netmodel import (
    Network,
    NpdnSyntaxError,
    _keyvals,
    _statements,
    format_number,
    parse_network,
    parse_number,
    serialize,
)


class ConstructionError(ValueError):
    """Input violates a precondition of a reduction."""


@dataclass(frozen=True)
class X3CInstance:
    n: int
    triples: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        for t in self.triples:
            if len(set(t)) != 3 or not all(1 <= x <= 3 * self.n for x in t):
                raise ValueError(f"bad triple {t} for n={self.n}")


@dataclass(frozen=True)
class SubsetProductInstance:
    values: tuple[int, ...]
    M: int
    k: int

    def __post_init__(self):
        if any(v < 1 for v in self.values):
            raise ValueError("values must be positive")


@dataclass(frozen=True)
class PenaltySumInstance:
    items: tuple[tuple[Fraction, Fraction], ...]
    k: int
    Q: int
    D: Fraction
    H: int | None = None
    A: int | None = None

    def __post_init__(self):
        for a, b in self.items:
            if a < 0 or not 0 < b <= 1:
                raise ValueError(f"bad item ({a}, {b})")


@dataclass
class NapInstance:
    tree: Network
    q: dict[str, Fraction]
    k: int
    D: Fraction = Fraction(0)


@dataclass(frozen=True)
class GadgetAudit:
    d: int
    M: int
    Q: int
    D_prime: Fraction


# ---------------------------------------------------------------------------
# X3C -> Subset Product


def first_primes(n: int) -> list[int]:
    """The first ``n`` primes, sieved up to ``n(ln n + ln ln n)`` (15 for small n)."""
    if n < 1:
        raise ValueError("n must be positive")
    limit = 15 if n < 6 else int(n * (log(n) + log(log(n)))) + 2
    while True:
        sieve = bytearray([1]) * (limit + 1)
        sieve[0:2] = b"\x00\x00"
        for i in range(2, isqrt(limit) + 1):
            if sieve[i]:
                sieve[i * i :: i] = bytearray(len(range(i * i, limit + 1, i)))
        primes = [i for i, flag in enumerate(sieve) if flag]
        if len(primes) >= n:
            return primes[:n]
        limit *= 2


def x3c_to_subset_product(inst: X3CInstance) -> SubsetProductInstance:
    primes = first_primes(3 * inst.n)
    values = tuple(prod(primes[x - 1] for x in t) for t in inst.triples)
    return SubsetProductInstance(values=values, M=prod(primes), k=inst.n)


# ---------------------------------------------------------------------------
# Subset Product -> Penalty Sum


def ceil_log2(q: int) -> int:
    return (q - 1).bit_length()


def ceil_ln(v: int) -> int:
    """Smallest integer ``t >= 0`` with ``ln v <= t``, by scanning ``0..ceil(log2 v)``."""
    for t in range(0, max(ceil_log2(v), 0) + 1):
        if compare_ln(v, t) <= 0:
            return t
    raise AssertionError("ln v exceeded log2 v")


def subset_product_to_penalty_sum(inst: SubsetProductInstance) -> PenaltySumInstance:
    Q, k = inst.M, inst.k
    if Q < 2:
        raise ConstructionError("need M >= 2")
    if k >= Q:
        raise ConstructionError("need k < M; larger k can be assumed away without loss of generality")
    if not inst.values:
        raise ConstructionError("no values")
    H = 5 * ceil_log2(Q)
    A = ceil_ln(max(inst.values)) + 1
    items = tuple((dyadic_round(A, v, H, "ceil"), Fraction(1, v)) for v in inst.values)
    D = dyadic_round(k * A - 1, Q, H, "floor")
    return PenaltySumInstance(items=items, k=k, Q=Q, D=D, H=H, A=A)


def penalty_sum_value(inst: PenaltySumInstance, chosen) -> Fraction:
    chosen = list(chosen)
    if len(chosen) != inst.k or len(set(chosen)) != len(chosen):
        raise ValueError(f"need exactly k={inst.k} distinct indices")
    a = sum((inst.items[i][0] for i in chosen), Fraction(0))
    return a - inst.Q * prod((inst.items[i][1] for i in chosen), start=Fraction(1))


def gap_holds(inst: PenaltySumInstance) -> bool:
    """``(k+1) * 2**-H <= Q**-4``, in integers."""
    assert inst.H is not None
    return (inst.k + 1) * inst.Q**4 <= 1 << inst.H


# ---------------------------------------------------------------------------
# unit-cost NAP -> Max-Network-PD


def _depths(tree: Network) -> dict[int, int]:
    depth = {tree.root: 0}
    for v in tree.topological_order():
        for w in tree.children[v]:
            depth[w] = depth[v] + 1
    return depth


def nap_to_max_network_pd(inst: NapInstance) -> tuple[Network, GadgetAudit]:
    """Replace every leaf by the leaf gadget; returns the network and the chosen constants."""
    tree, k, D = inst.tree, inst.k, Fraction(inst.D)
    if tree.reticulations():
        raise ConstructionError("NAP input must be a tree")
    depth = _depths(tree)
    leaves = tree.leaves()
    if any(depth[v] != 2 for v in leaves):
        raise ConstructionError("tree must have height 2 with every leaf at depth 2")
    if k < 1:
        raise ConstructionError("need k >= 1")
    if k > len(leaves):
        raise ConstructionError("need k <= number of leaves")
    if D <= 0 or D.denominator != 1:
        raise ConstructionError("need a positive integer target D")
    if any(w < 1 or w.denominator != 1 for w in tree.weight.values()):
        raise ConstructionError("tree weights must be positive integers")
    q = {lab: Fraction(inst.q[lab]) for lab in tree.label.values()}
    if any(not 0 <= x <= 1 for x in q.values()):
        raise ConstructionError("success probabilities must lie in [0,1]")

    d = max(x.denominator for x in q.values())
    M = int(sum(tree.weight.values())) + 1
    Q = max(ceil(3 / D), 3 * d**k) + 1

    net = Network.empty(tree.name[tree.root])
    ids = {tree.root: net.root}
    for v in tree.topological_order():
        if v == tree.root:
            continue
        ids[v] = net.add_node(tree.name[v])
        (u,) = tree.parents[v]
        net.add_edge(ids[u], ids[v], k * Q * tree.weight[(u, v)])
    for v in leaves:
        lab, ql, top = tree.label[v], q[tree.label[v]], ids[v]
        nm = tree.name[v]
        v1, v2 = net.add_node(f"{nm}^1"), net.add_node(f"{nm}^2")
        minus, star = net.add_node(f"{nm}^-"), net.add_node(f"{nm}^*")
        net.add_edge(top, v1, 1)
        net.add_edge(top, v2, 1, ql / (2 - ql))
        net.add_edge(v1, v2, 1, ql / 2)
        net.add_edge(v1, minus, 1)
        net.add_edge(v2, star, Q * M * M)
        net.set_leaf(minus, f"{lab}-")
        net.set_leaf(star, f"{lab}*")
    net.k = k
    net.D = k * Q * (M * M + D)
    return net, GadgetAudit(d=d, M=M, Q=Q, D_prime=net.D)


def gadget_top_edge(net: Network, label: str) -> tuple[int, int]:
    """Edge entering the gadget top of the NAP leaf ``label``."""
    star = net.leaf_by_label()[f"{label}*"]
    (v2,) = net.parents[star]
    a, b = net.parents[v2]
    top = a if a in net.parents[b] else b
    (above,) = net.parents[top]
    return above, top


# ---------------------------------------------------------------------------
# log-difference bound


def log_difference_lower(Q: int, Qp: int, bits: int = 24) -> Fraction:
    """Certified lower bound of ``ln Q' - ln Q + Q/Q' - 1``."""
    return ln_interval(Fraction(Qp, Q), bits).lo + Fraction(Q, Qp) - 1


def log_difference_interval(Q: int, Qp: int, bits: int = 24) -> tuple[Fraction, Fraction]:
    ln = ln_interval(Fraction(Qp, Q), bits)
    rest = Fraction(Q, Qp) - 1
    return ln.lo + rest, ln.hi + rest


@dataclass(frozen=True)
class BoundCase:
    Q: int
    Qp: int
    lower: Fraction
    ok: bool


def certify_log_difference(Q: int, Qp: int) -> BoundCase:
    """Refine until the lower bound clears ``Q**-4`` (or precision runs out)."""
    target = Fraction(1, Q**4)
    bits = 24
    lower = log_difference_lower(Q, Qp, bits)
    while lower <= target and bits < 4096:
        bits *= 2
        lower = log_difference_lower(Q, Qp, bits)
    return BoundCase(Q, Qp, lower, lower > target)


def log_difference_cases(qmax: int, qpmax: int) -> Iterator[BoundCase]:
    for Q in range(2, qmax + 1):
        for Qp in range(1, qpmax + 1):
            if Qp != Q:
                yield certify_log_difference(Q, Qp)


def verify_log_difference_bound(qmax: int, qpmax: int) -> bool:
    if qmax < 2:
        raise ValueError("need Qmax >= 2")
    return all(case.ok for case in log_difference_cases(qmax, qpmax))


# ---------------------------------------------------------------------------
# file formats


def _header(text: str, expected: str):
    stmts = list(_statements(text))
    if not stmts or " ".join(stmts[0][1]) != expected:
        raise NpdnSyntaxError(f"missing header {expected!r}", stmts[0][0] if stmts else 1)
    return stmts[1:]


def _int(tok: str, line: int) -> int:
    if not tok.lstrip("-").isdigit():
        raise NpdnSyntaxError(f"expected an integer, got {tok!r}", line)
    return int(tok)


def _single(store: dict, key: str, value, line: int) -> None:
    if key in store:
        raise NpdnSyntaxError(f"{key!r} given twice", line)
    store[key] = value


def parse_x3c(text: str) -> X3CInstance:
    fields: dict = {}
    triples = []
    for line, toks in _header(text, "x3c 1"):
        kw, args = toks[0], toks[1:]
        if kw == "n" and len(args) == 1:
            _single(fields, "n", _int(args[0], line), line)
        elif kw == "set" and len(args) == 3:
            triples.append(tuple(_int(a, line) for a in args))
        else:
            raise NpdnSyntaxError(f"bad statement {' '.join(toks)!r}", line)
    if "n" not in fields:
        raise NpdnSyntaxError("missing `n`")
    try:
        return X3CInstance(fields["n"], tuple(triples))
    except ValueError as exc:
        raise NpdnSyntaxError(str(exc)) from None


def format_x3c(inst: X3CInstance) -> str:
    lines = ["x3c 1", f"n {inst.n}"] + [f"set {a} {b} {c}" for a, b, c in inst.triples]
    return "\n".join(lines) + "\n"


def parse_subset_product(text: str) -> SubsetProductInstance:
    fields: dict = {}
    values = []
    for line, toks in _header(text, "subprod 1"):
        kw, args = toks[0], toks[1:]
        if len(args) != 1:
            raise NpdnSyntaxError(f"bad statement {' '.join(toks)!r}", line)
        if kw == "v":
            values.append(_int(args[0], line))
        elif kw in ("M", "k"):
            _single(fields, kw, _int(args[0], line), line)
        else:
            raise NpdnSyntaxError(f"unknown statement {kw!r}", line)
    if set(fields) != {"M", "k"}:
        raise NpdnSyntaxError("need both `M` and `k`")
    try:
        return SubsetProductInstance(tuple(values), fields["M"], fields["k"])
    except ValueError as exc:
        raise NpdnSyntaxError(str(exc)) from None


def format_subset_product(inst: SubsetProductInstance) -> str:
    lines = ["subprod 1"] + [f"v {v}" for v in inst.values] + [f"M {inst.M}", f"k {inst.k}"]
    return "\n".join(lines) + "\n"


def parse_penalty_sum(text: str) -> PenaltySumInstance:
    fields: dict = {}
    items = []
    for line, toks in _header(text, "pensum 1"):
        kw, args = toks[0], toks[1:]
        if kw == "item":
            kv = _keyvals(args, {"a", "b"}, line)
            if set(kv) != {"a", "b"}:
                raise NpdnSyntaxError("item needs a= and b=", line)
            items.append((parse_number(kv["a"], line), parse_number(kv["b"], line)))
        elif kw in ("k", "Q", "H", "A") and len(args) == 1:
            _single(fields, kw, _int(args[0], line), line)
        elif kw == "D" and len(args) == 1:
            _single(fields, "D", parse_number(args[0], line), line)
        else:
            raise NpdnSyntaxError(f"bad statement {' '.join(toks)!r}", line)
    if not {"k", "Q", "D"} <= set(fields):
        raise NpdnSyntaxError("need `k`, `Q` and `D`")
    try:
        return PenaltySumInstance(tuple(items), fields["k"], fields["Q"], fields["D"], fields.get("H"), fields.get("A"))
    except ValueError as exc:
        raise NpdnSyntaxError(str(exc)) from None


def format_penalty_sum(inst: PenaltySumInstance) -> str:
    lines = ["pensum 1"]
    lines += [f"item a={format_number(a)} b={format_number(b)}" for a, b in inst.items]
    lines += [f"k {inst.k}", f"Q {inst.Q}", f"D {format_number(inst.D)}"]
    if inst.H is not None:
        lines.append(f"H {inst.H}")
    if inst.A is not None:
        lines.append(f"A {inst.A}")
    return "\n".join(lines) + "\n"


def parse_nap(text: str) -> NapInstance:
    """A `.npdn` tree with a ``nap`` header; leaf-edge ``p=`` carries the success probability."""
    tree = parse_network(text, header=("nap", "nap 1"))
    q = {}
    for v, lab in tree.label.items():
        if len(tree.parents[v]) != 1:
            raise NpdnSyntaxError(f"leaf {lab!r} must have one parent")
        e = (tree.parents[v][0], v)
        q[lab] = tree.prob[e]
        tree.prob[e] = Fraction(1)
    return NapInstance(tree=tree, q=q, k=tree.k, D=tree.D)


def format_nap(inst: NapInstance) -> str:
    tree = inst.tree.copy()
    for v, lab in tree.label.items():
        tree.prob[(tree.parents[v][0], v)] = inst.q[lab]
    tree.k, tree.D = inst.k, Fraction(inst.D)
    return serialize(tree, header="nap")
