"""Rooted phylogenetic networks: data model, `.npdn` I/O, validation, structure.

A :class:`Network` stores a rooted DAG whose leaves carry taxon labels, together
with edge weights, inheritance probabilities, leaf costs, a budget ``k`` and a
target ``D``.  All numbers are :class:`fractions.Fraction`.

Networks are treated as values.  The mutating helpers (``add_edge``,
``remove_node`` ...) exist for builders and for the solver, which always
works on a fresh :meth:`Network.copy`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

Edge = tuple[int, int]

ONE = Fraction(1)
ZERO = Fraction(0)


class NpdnSyntaxError(ValueError):
    """Malformed `.npdn` (or related) document."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class InvalidNetworkError(ValueError):
    """Raised when an operation needs a valid network and gets an invalid one."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        lines = "; ".join(f"{v.code} at {v.where}: {v.message}" for v in report.violations)
        super().__init__(f"invalid network: {lines}")


@dataclass
class Network:
    root: int
    children: dict[int, list[int]] = field(default_factory=dict)
    parents: dict[int, list[int]] = field(default_factory=dict)
    weight: dict[Edge, Fraction] = field(default_factory=dict)
    prob: dict[Edge, Fraction] = field(default_factory=dict)
    label: dict[int, str] = field(default_factory=dict)
    cost: dict[int, int] = field(default_factory=dict)
    name: dict[int, str] = field(default_factory=dict)
    k: int = 0
    D: Fraction = ZERO

    # -- construction -----------------------------------------------------

    @classmethod
    def empty(cls, root_name: str = "root") -> "Network":
        net = cls(root=0)
        net.add_node(root_name)
        return net

    def add_node(self, name: str | None = None) -> int:
        node = max(self.children, default=-1) + 1
        self.children[node] = []
        self.parents[node] = []
        self.name[node] = name if name is not None else f"_n{node}"
        return node

    def add_edge(self, u: int, v: int, w=1, p=1) -> None:
        if (u, v) in self.weight:
            raise ValueError(f"duplicate edge {self.name[u]} -> {self.name[v]}")
        self.children[u].append(v)
        self.parents[v].append(u)
        self.weight[(u, v)] = Fraction(w)
        self.prob[(u, v)] = Fraction(p)

    def remove_edge(self, u: int, v: int) -> None:
        self.children[u].remove(v)
        self.parents[v].remove(u)
        del self.weight[(u, v)]
        del self.prob[(u, v)]

    def remove_node(self, v: int) -> None:
        for u in list(self.parents[v]):
            self.remove_edge(u, v)
        for w in list(self.children[v]):
            self.remove_edge(v, w)
        del self.children[v], self.parents[v], self.name[v]
        self.label.pop(v, None)
        self.cost.pop(v, None)

    def set_leaf(self, v: int, label: str, cost: int = 1) -> None:
        self.label[v] = label
        self.cost[v] = cost

    def copy(self) -> "Network":
        return Network(
            root=self.root,
            children={v: list(c) for v, c in self.children.items()},
            parents={v: list(p) for v, p in self.parents.items()},
            weight=dict(self.weight),
            prob=dict(self.prob),
            label=dict(self.label),
            cost=dict(self.cost),
            name=dict(self.name),
            k=self.k,
            D=self.D,
        )

    # -- queries ------------------------------------------------------------

    @property
    def nodes(self) -> list[int]:
        return sorted(self.children)

    @property
    def edges(self) -> list[Edge]:
        return sorted(self.weight)

    def leaves(self) -> list[int]:
        return [v for v in self.nodes if not self.children[v] and v in self.label]

    def is_leaf(self, v: int) -> bool:
        return not self.children[v]

    def is_reticulation(self, v: int) -> bool:
        return len(self.parents[v]) >= 2

    def reticulations(self) -> list[int]:
        return [v for v in self.nodes if len(self.parents[v]) >= 2]

    def leaf_by_label(self) -> dict[str, int]:
        return {lab: v for v, lab in self.label.items()}

    def labels(self) -> set[str]:
        return set(self.label.values())

    def node_by_name(self, name: str) -> int:
        for v, n in self.name.items():
            if n == name:
                return v
        raise KeyError(name)

    def topological_order(self) -> list[int]:
        """Nodes reachable from the root, parents before children."""
        order: list[int] = []
        state: dict[int, int] = {}
        stack: list[tuple[int, Iterator[int]]] = [(self.root, iter(self.children[self.root]))]
        state[self.root] = 1
        while stack:
            v, it = stack[-1]
            for w in it:
                s = state.get(w, 0)
                if s == 1:
                    raise ValueError("network contains a directed cycle")
                if s == 0:
                    state[w] = 1
                    stack.append((w, iter(self.children[w])))
                    break
            else:
                stack.pop()
                state[v] = 2
                order.append(v)
        order.reverse()
        return order

    def descendants(self, v: int) -> set[int]:
        """All nodes reachable from ``v`` including ``v`` itself."""
        seen = {v}
        todo = [v]
        while todo:
            u = todo.pop()
            for w in self.children[u]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return seen

    def edges_below(self, v: int) -> list[Edge]:
        """Edges whose tail is a descendant of ``v`` (``v`` included)."""
        return sorted((a, b) for a in self.descendants(v) for b in self.children[a])

    def structure_key(self):
        """Name-based canonical form; two networks with equal keys are equal."""
        n = self.name
        return (
            n[self.root],
            sorted((n[u], n[v], self.weight[(u, v)], self.prob[(u, v)]) for u, v in self.weight),
            sorted((n[v], lab, self.cost[v]) for v, lab in self.label.items()),
            self.k,
            self.D,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return self.structure_key() == other.structure_key()

    __hash__ = None  # type: ignore[assignment]


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    code: str
    where: str
    message: str


@dataclass
class ValidationReport:
    is_binary: bool
    violations: list[Violation]

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}


def validate(net: Network) -> ValidationReport:
    """Check every network invariant and report all violations found."""
    out: list[Violation] = []

    def bad(code: str, where: str, msg: str) -> None:
        out.append(Violation(code, where, msg))

    nm = net.name
    sources = [v for v in net.nodes if not net.parents[v]]
    if sources != [net.root]:
        bad("root", ",".join(nm[v] for v in sources), "expected exactly one node of indegree 0, the root")
    try:
        reachable = set(net.topological_order())
    except ValueError:
        bad("cycle", nm[net.root], "graph has a directed cycle")
        reachable = net.descendants(net.root)
    for v in net.nodes:
        if v not in reachable:
            bad("unreachable", nm[v], "node not reachable from the root")

    if len(net.children[net.root]) < 2:
        bad("root_outdegree", nm[net.root], "root must have outdegree at least 2")

    labels_seen: dict[str, int] = {}
    for v in net.nodes:
        if v == net.root:
            continue
        indeg, outdeg = len(net.parents[v]), len(net.children[v])
        if outdeg == 0:
            if indeg != 1:
                bad("node_degree", nm[v], "leaf must have indegree 1")
            if v not in net.label:
                bad("leaf_label", nm[v], "leaf has no taxon label")
        elif not ((indeg == 1 and outdeg >= 2) or (indeg >= 2 and outdeg == 1)):
            bad("node_degree", nm[v], f"not a tree node or reticulation (in={indeg}, out={outdeg})")
        if outdeg and v in net.label:
            bad("leaf_label", nm[v], "internal node carries a taxon label")
    for v, lab in net.label.items():
        if lab in labels_seen:
            bad("duplicate_label", nm[v], f"label {lab!r} used twice")
        labels_seen[lab] = v
        if net.cost.get(v) not in (0, 1):
            bad("cost", nm[v], "leaf cost must be 0 or 1")

    for (u, v), w in sorted(net.weight.items()):
        where = f"{nm[u]}->{nm[v]}"
        p = net.prob[(u, v)]
        if w < 0:
            bad("weight", where, "negative weight")
        if not 0 <= p <= 1:
            bad("probability", where, "probability outside [0,1]")
        elif p != 1 and net.children[v] and len(net.parents[v]) < 2:
            bad("probability", where, "p must be 1 on edges that are neither reticulation nor leaf edges")
        if not net.children[v] and net.cost.get(v) == 1 and p != 1:
            bad("cost_convention", where, "cost-1 leaf must have inheritance probability 1")

    indeg = [len(net.parents[v]) for v in net.nodes]
    outdeg = [len(net.children[v]) for v in net.nodes]
    is_binary = max(indeg + outdeg, default=0) <= 2
    return ValidationReport(is_binary=is_binary, violations=out)


def require_valid(net: Network) -> None:
    report = validate(net)
    if not report.is_valid:
        raise InvalidNetworkError(report)


# ---------------------------------------------------------------------------
# structure


def reticulation_number(net: Network) -> int:
    return sum(len(net.parents[v]) - 1 for v in net.reticulations())


def _bridges(net: Network) -> set[Edge]:
    """Cut-arcs: edges that are bridges of the underlying undirected graph."""
    import networkx as nx

    g = nx.Graph()
    g.add_nodes_from(net.nodes)
    g.add_edges_from(net.weight)
    found = set()
    for a, b in nx.bridges(g):
        found.add((a, b) if (a, b) in net.weight else (b, a))
    return found


def blobs(net: Network) -> list[set[int]]:
    """Connected components of the underlying graph after deleting all cut-arcs."""
    bridges = _bridges(net)
    adj: dict[int, list[int]] = {v: [] for v in net.nodes}
    for u, v in net.weight:
        if (u, v) not in bridges:
            adj[u].append(v)
            adj[v].append(u)
    seen: set[int] = set()
    comps = []
    for s in net.nodes:
        if s in seen:
            continue
        comp = {s}
        todo = [s]
        seen.add(s)
        while todo:
            u = todo.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    comp.add(w)
                    todo.append(w)
        comps.append(comp)
    return comps


def level(net: Network) -> int:
    best = 0
    for comp in blobs(net):
        r = 0
        for v in comp:
            inside = sum(1 for u in net.parents[v] if u in comp)
            if inside >= 2:
                r += inside - 1
        best = max(best, r)
    return best


def lowest_reticulation(net: Network) -> int | None:
    """Smallest-id reticulation with no reticulation strictly below it."""
    for r in net.reticulations():
        below = net.descendants(r) - {r}
        if not any(len(net.parents[v]) >= 2 for v in below):
            return r
    return None


def offspring(net: Network, edge: Edge) -> set[str]:
    if edge not in net.weight:
        raise KeyError(f"no such edge {edge}")
    return {net.label[v] for v in net.descendants(edge[1]) if v in net.label}


# ---------------------------------------------------------------------------
# `.npdn` format

_NUM = re.compile(r"-?\d+(?:/\d+)?\Z")


def parse_number(text: str, line: int | None = None) -> Fraction:
    if not _NUM.match(text):
        raise NpdnSyntaxError(f"not an integer or rational: {text!r}", line)
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise NpdnSyntaxError(f"zero denominator in {text!r}", line) from None


def format_number(x: Fraction | int) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _keyvals(tokens: list[str], allowed: set[str], line: int) -> dict[str, str]:
    out = {}
    for tok in tokens:
        key, eq, val = tok.partition("=")
        if not eq or key not in allowed:
            raise NpdnSyntaxError(f"unexpected field {tok!r}", line)
        if key in out:
            raise NpdnSyntaxError(f"field {key!r} given twice", line)
        out[key] = val
    return out


def _statements(text: str) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield lineno, body.split()


def parse_network(text: str, header: Iterable[str] = ("npdn 1",)) -> Network:
    """Parse a `.npdn` document; omitted p and cost default to 1, k and D to 0."""
    stmts = list(_statements(text))
    if not stmts or " ".join(stmts[0][1]) not in set(header):
        line = stmts[0][0] if stmts else 1
        raise NpdnSyntaxError(f"missing header, expected one of {sorted(header)}", line)

    names: dict[str, int] = {}
    root_name = None
    raw_edges: list[tuple[int, str, str, Fraction, Fraction]] = []
    raw_leaves: list[tuple[int, str, str, int]] = []
    k = 0
    D = ZERO
    seen_kw: set[str] = set()
    for lineno, toks in stmts[1:]:
        kw, args = toks[0], toks[1:]
        if kw == "root":
            if len(args) != 1 or root_name is not None:
                raise NpdnSyntaxError("expected a single `root <id>` statement", lineno)
            root_name = args[0]
        elif kw == "edge":
            if len(args) < 3:
                raise NpdnSyntaxError("expected `edge <u> <v> w=<w> [p=<p>]`", lineno)
            kv = _keyvals(args[2:], {"w", "p"}, lineno)
            if "w" not in kv:
                raise NpdnSyntaxError("edge needs w=", lineno)
            w = parse_number(kv["w"], lineno)
            p = parse_number(kv.get("p", "1"), lineno)
            if w < 0:
                raise NpdnSyntaxError("negative weight", lineno)
            if not 0 <= p <= 1:
                raise NpdnSyntaxError("probability outside [0,1]", lineno)
            raw_edges.append((lineno, args[0], args[1], w, p))
        elif kw == "leaf":
            if len(args) < 2:
                raise NpdnSyntaxError("expected `leaf <v> label=<l> [cost=<c>]`", lineno)
            kv = _keyvals(args[1:], {"label", "cost"}, lineno)
            if not kv.get("label"):
                raise NpdnSyntaxError("leaf needs label=", lineno)
            cost = kv.get("cost", "1")
            if cost not in ("0", "1"):
                raise NpdnSyntaxError("cost must be 0 or 1", lineno)
            raw_leaves.append((lineno, args[0], kv["label"], int(cost)))
        elif kw in ("k", "D"):
            if len(args) != 1 or kw in seen_kw:
                raise NpdnSyntaxError(f"expected a single `{kw} <value>` statement", lineno)
            seen_kw.add(kw)
            if kw == "k":
                if not args[0].isdigit():
                    raise NpdnSyntaxError("k must be a nonnegative integer", lineno)
                k = int(args[0])
            else:
                D = parse_number(args[0], lineno)
        else:
            raise NpdnSyntaxError(f"unknown statement {kw!r}", lineno)

    if root_name is None:
        raise NpdnSyntaxError("no root statement")
    net = Network(root=0)
    names[root_name] = net.add_node(root_name)

    def node(name: str) -> int:
        if name not in names:
            names[name] = net.add_node(name)
        return names[name]

    for lineno, u, v, w, p in raw_edges:
        a, b = node(u), node(v)
        if (a, b) in net.weight:
            raise NpdnSyntaxError(f"duplicate edge {u} -> {v}", lineno)
        net.add_edge(a, b, w, p)
    for lineno, v, lab, cost in raw_leaves:
        if v not in names:
            raise NpdnSyntaxError(f"unknown node {v!r}", lineno)
        if names[v] in net.label:
            raise NpdnSyntaxError(f"leaf {v!r} declared twice", lineno)
        net.set_leaf(names[v], lab, cost)
    net.k = k
    net.D = D
    return net


def serialize(net: Network, header: str = "npdn 1") -> str:
    nm = net.name
    lines = [header, f"root {nm[net.root]}"]
    for u, v in net.edges:
        line = f"edge {nm[u]} {nm[v]} w={format_number(net.weight[(u, v)])}"
        if net.prob[(u, v)] != 1:
            line += f" p={format_number(net.prob[(u, v)])}"
        lines.append(line)
    for v in sorted(net.label):
        lines.append(f"leaf {nm[v]} label={net.label[v]} cost={net.cost[v]}")
    lines.append(f"k {net.k}")
    lines.append(f"D {format_number(net.D)}")
    return "\n".join(lines) + "\n"
