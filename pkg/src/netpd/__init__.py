"""Exact Network-PD scoring, an FPT solver for Max-Network-PD, and reduction-chain tooling."""

from .fptsolve import Solution, solve
from .netmodel import Network, parse_network, serialize, validate
from .oracle import oracle_solve
from .pdscore import gamma_map, netpd_score

__all__ = [
    "Network",
    "Solution",
    "gamma_map",
    "netpd_score",
    "oracle_solve",
    "parse_network",
    "serialize",
    "solve",
    "validate",
]
