import random
from fractions import Fraction
from itertools import combinations
from math import prod

import mpmath
import pytest

from netpd import checks
from netpd.hardness import (
    ConstructionError,
    NapInstance,
    PenaltySumInstance,
    SubsetProductInstance,
    X3CInstance,
    ceil_ln,
    first_primes,
    format_nap,
    format_penalty_sum,
    format_subset_product,
    format_x3c,
    gadget_top_edge,
    gap_holds,
    log_difference_interval,
    nap_to_max_network_pd,
    parse_nap,
    parse_penalty_sum,
    parse_subset_product,
    parse_x3c,
    penalty_sum_value,
    subset_product_to_penalty_sum,
    verify_log_difference_bound,
    x3c_to_subset_product,
)
from netpd.lnbound import ln_interval
from netpd.netmodel import Network, NpdnSyntaxError, level
from netpd.oracle import nap_value, oracle_nap, oracle_penalty_sum, oracle_solve, oracle_subset_product, oracle_x3c

mpmath.mp.prec = 300


def mp(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


def test_first_primes():
    assert first_primes(1) == [2]
    assert first_primes(5) == [2, 3, 5, 7, 11]
    assert prod(first_primes(6)) == 30030
    big = first_primes(500)
    assert len(big) == 500 and big[-1] == 3571
    with pytest.raises(ValueError):
        first_primes(0)


def test_x3c_example():
    inst = X3CInstance(2, ((1, 2, 3), (4, 5, 6), (1, 2, 4)))
    sp = x3c_to_subset_product(inst)
    assert sp.values == (30, 1001, 42) and sp.M == 30030 and sp.k == 2
    assert oracle_x3c(inst) and oracle_subset_product(sp)
    single = x3c_to_subset_product(X3CInstance(1, ((1, 2, 3),)))
    assert (single.values, single.M, single.k) == ((30,), 30, 1)


def test_x3c_rejects_bad_triples():
    with pytest.raises(ValueError):
        X3CInstance(1, ((1, 2, 4),))
    with pytest.raises(ValueError):
        X3CInstance(2, ((1, 1, 2),))


def test_ceil_ln():
    for v in range(1, 3000):
        assert ceil_ln(v) == int(mpmath.ceil(mpmath.log(v)))


def test_sp2ps_example():
    ps = subset_product_to_penalty_sum(SubsetProductInstance((2, 3), 6, 2))
    assert (ps.Q, ps.H, ps.A) == (6, 15, 3)
    delta = Fraction(1, 2**15)
    for (a, b), v in zip(ps.items, (2, 3)):
        assert b == Fraction(1, v)
        exact = 3 - mpmath.log(v)
        assert mp(a) - mp(delta) < exact <= mp(a)
    d_exact = 2 * 3 - mpmath.log(6) - 1
    assert mp(ps.D) <= d_exact < mp(ps.D) + mp(delta)
    assert penalty_sum_value(ps, [0, 1]) >= ps.D
    assert oracle_penalty_sum(ps)[1]
    assert gap_holds(ps)


def test_sp2ps_no_instance():
    ps = subset_product_to_penalty_sum(SubsetProductInstance((2, 2), 6, 2))
    assert not oracle_penalty_sum(ps)[1]


def test_sp2ps_preconditions():
    with pytest.raises(ConstructionError, match="without loss of generality"):
        subset_product_to_penalty_sum(SubsetProductInstance((2, 3), 2, 2))
    with pytest.raises(ConstructionError):
        subset_product_to_penalty_sum(SubsetProductInstance((2, 3), 1, 1))


def test_penalty_sum_value():
    inst = PenaltySumInstance(((Fraction(2), Fraction(1, 2)), (Fraction(3), Fraction(1, 3))), k=2, Q=6, D=Fraction(0))
    assert penalty_sum_value(inst, [0, 1]) == 4
    single = PenaltySumInstance(((Fraction(7, 2), Fraction(1, 5)),), k=1, Q=10, D=Fraction(0))
    assert penalty_sum_value(single, [0]) == Fraction(7, 2) - 2
    with pytest.raises(ValueError):
        penalty_sum_value(inst, [0])


def test_rounding_error_per_subset():
    rng = random.Random(5)
    for _ in range(100):
        sp = checks.random_subset_product(rng)
        ps = subset_product_to_penalty_sum(sp)
        S = rng.sample(range(len(sp.values)), sp.k)
        f = penalty_sum_value(ps, S)
        f_star = sum(ps.A - mpmath.log(sp.values[i]) for i in S) - sp.M * mp(prod((Fraction(1, sp.values[i]) for i in S), start=Fraction(1)))
        assert 0 <= mp(f) - f_star < sp.k * mpmath.mpf(2) ** -ps.H


def test_yes_direction():
    rng = random.Random(6)
    for _ in range(40):
        values = tuple(rng.randint(1, 30) for _ in range(rng.randint(2, 8)))
        k = rng.randint(1, len(values))
        S = rng.sample(range(len(values)), k)
        M = max(prod(values[i] for i in S), k + 1)
        if M != prod(values[i] for i in S):
            continue
        ps = subset_product_to_penalty_sum(SubsetProductInstance(values, M, k))
        assert penalty_sum_value(ps, S) >= ps.D


def two_leaf_nap():
    tree = Network.empty("rho")
    u = tree.add_node("u")
    tree.add_edge(tree.root, u, 1)
    for lab in "ab":
        v = tree.add_node(lab)
        tree.add_edge(u, v, 1)
        tree.set_leaf(v, lab)
    return NapInstance(tree, {"a": Fraction(1, 2), "b": Fraction(1, 2)}, k=1, D=Fraction(1))


def test_nap_example_constants():
    inst = two_leaf_nap()
    net, audit = nap_to_max_network_pd(inst)
    assert (audit.d, audit.M, audit.Q, audit.D_prime) == (2, 4, 7, 119)
    n = net.node_by_name
    assert net.weight[(n("rho"), n("u"))] == 7
    assert net.weight[(n("u"), n("a"))] == 7
    assert net.weight[(n("a^2"), n("a^*"))] == 112
    assert net.k == 1 and net.D == 119
    assert all(c == 1 for c in net.cost.values())
    assert oracle_nap(inst)[1] == (oracle_solve(net).best_score >= net.D)


def test_nap_preconditions():
    inst = two_leaf_nap()
    for bad in (dict(k=0), dict(D=Fraction(0)), dict(k=3)):
        with pytest.raises(ConstructionError):
            nap_to_max_network_pd(NapInstance(inst.tree, inst.q, bad.get("k", 1), bad.get("D", Fraction(1))))
    deep = inst.tree.copy()
    a = deep.leaf_by_label()["a"]
    deep.label.pop(a)
    x = deep.add_node("x")
    deep.add_edge(a, x, 1)
    deep.set_leaf(x, "a")
    with pytest.raises(ConstructionError, match="height 2"):
        nap_to_max_network_pd(NapInstance(deep, inst.q, 1, Fraction(1)))


def test_nap_images_structure_and_granularity():
    rng = random.Random(12)
    for _ in range(30):
        inst = checks.random_nap(rng)
        net, _ = nap_to_max_network_pd(inst)
        assert level(net) == 1
        for lab, q in inst.q.items():
            assert net.prob[gadget_top_edge(net, lab)] == 1
        labels = sorted(inst.q)
        for size in range(1, 3):
            for S in combinations(labels, size):
                denom = prod(inst.q[t].denominator for t in S)
                assert (nap_value(inst, S) * denom).denominator == 1


def test_log_difference_spot_values():
    lo, hi = log_difference_interval(2, 3, bits=40)
    assert Fraction(720, 10000) < lo < hi < Fraction(722, 10000)
    assert lo > Fraction(1, 16)
    ln2 = ln_interval(2, 40)
    assert Fraction(243, 1000) < 1 - Fraction(1, 16) - ln2.hi
    assert 1 - Fraction(1, 16) - ln2.lo < Fraction(245, 1000)
    assert verify_log_difference_bound(10, 30)
    with pytest.raises(ValueError):
        verify_log_difference_bound(1, 3)


def test_formats_round_trip():
    x3c = X3CInstance(2, ((1, 2, 3), (4, 5, 6)))
    assert parse_x3c(format_x3c(x3c)) == x3c
    sp = SubsetProductInstance((2, 3, 5), 30, 3)
    assert parse_subset_product(format_subset_product(sp)) == sp
    ps = subset_product_to_penalty_sum(sp)
    assert parse_penalty_sum(format_penalty_sum(ps)) == ps
    nap = two_leaf_nap()
    again = parse_nap(format_nap(nap))
    assert again.q == nap.q and again.k == nap.k and again.D == nap.D
    assert again.tree.structure_key()[:3] == nap.tree.structure_key()[:3]


@pytest.mark.parametrize(
    "parser, text",
    [
        (parse_x3c, "x3c 1\nset 1 2 3\n"),
        (parse_x3c, "x3c 1\nn 1\nset 1 2 9\n"),
        (parse_subset_product, "subprod 1\nv 2\nM 6\n"),
        (parse_subset_product, "subprod 1\nv 0\nM 6\nk 1\n"),
        (parse_penalty_sum, "pensum 1\nitem a=1\nk 1\nQ 2\nD 0\n"),
        (parse_penalty_sum, "subprod 1\n"),
    ],
)
def test_format_errors(parser, text):
    with pytest.raises(NpdnSyntaxError):
        parser(text)
