"""Solver tests: worked examples, HeLP cross-checks, and the
oracle-equivalence property on seeded random systems."""

import random
from fractions import Fraction

import pytest

from torsionunits.chartab import bundled_table
from torsionunits.helpcore import (AffineForm, LinearSystem, PAVector,
                                   PowerChain, build_system)
from torsionunits.intsolve import (INFEASIBLE, Box, SolutionSet, bounds,
                                   enumerate_solutions, oracle_enumerate)


def make_system(labels, eq=(), ge=(), cong=()):
    s = LinearSystem(labels)
    for c, coeffs in eq:
        s.add_eq(AffineForm(c, coeffs))
    for c, coeffs in ge:
        s.add_ge(AffineForm(c, coeffs))
    for c, coeffs, m in cong:
        s.add_cong(AffineForm(c, coeffs), m)
    return s


def test_bounds_simplex():
    s = make_system(["x", "y"], eq=[(-1, {0: 1, 1: 1})],
                    ge=[(0, {0: 1}), (0, {1: 1})])
    b = bounds(s)
    assert b.lower == (0, 0) and b.upper == (1, 1)
    assert not b.capped


def test_bounds_infeasible_is_a_value():
    s = make_system(["x"], ge=[(-1, {0: 1}), (0, {0: -1})])
    assert bounds(s) is INFEASIBLE
    r = enumerate_solutions(s)
    assert r.solutions == () and r.complete


def test_bounds_fallback_caps():
    s = make_system(["x"], ge=[(0, {0: 1})])
    b = bounds(s, fallback=50)
    assert b.capped and b.lower == (0,) and b.upper == (50,)
    r = enumerate_solutions(s, fallback=50)
    assert not r.complete
    assert r.solutions == tuple((k,) for k in range(51))


def test_enumerate_simplex():
    s = make_system(["x", "y"], eq=[(-1, {0: 1, 1: 1})],
                    ge=[(0, {0: 1}), (0, {1: 1})])
    r = enumerate_solutions(s)
    assert r.solutions == ((0, 1), (1, 0))
    assert r.complete


def test_enumerate_congruence_progression():
    s = make_system(["x"], cong=[(0, {0: 2}, 4)])
    r = enumerate_solutions(s, box=Box((0,), (3,)))
    assert r.solutions == ((0,), (2,))
    o = oracle_enumerate(s, Box((0,), (3,)))
    assert set(r.solutions) == set(o.solutions)


def test_enumerate_rejects_bad_cap():
    s = make_system(["x"], ge=[(3, {0: -1}), (0, {0: 1})])
    with pytest.raises(ValueError):
        enumerate_solutions(s, cap=0)


def test_node_cap_truncates_not_raises():
    s = make_system(["x", "y"], ge=[(5, {0: -1}), (0, {0: 1}),
                                    (5, {1: -1}), (0, {1: 1})])
    full = enumerate_solutions(s)
    assert full.complete and len(full.solutions) == 36
    cut = enumerate_solutions(s, cap=7)
    assert not cut.complete
    assert set(cut.solutions) <= set(full.solutions)


def test_solutions_lex_sorted_and_deterministic():
    s = make_system(["x", "y", "z"],
                    eq=[(0, {0: 1, 1: 1, 2: -1})],
                    ge=[(2, {0: -1}), (2, {0: 1}), (2, {1: -1}),
                        (2, {1: 1}), (3, {2: -1}), (3, {2: 1})])
    r1 = enumerate_solutions(s)
    r2 = enumerate_solutions(s)
    assert r1.solutions == r2.solutions
    assert r1.node_count == r2.node_count
    assert list(r1.solutions) == sorted(r1.solutions)


def test_solution_set_container_protocol():
    r = SolutionSet(((0, 1), (1, 0)), True, 7)
    assert (0, 1) in r and [1, 0] in r
    assert (1, 1) not in r
    assert len(r) == 2


def test_oracle_budget():
    s = make_system(["x", "y"])
    with pytest.raises(ValueError, match="scan budget"):
        oracle_enumerate(s, Box((0, 0), (999, 1999)), max_points=10 ** 6)


def test_oracle_infeasible_box():
    s = make_system(["x"])
    assert oracle_enumerate(s, INFEASIBLE).solutions == ()
    assert oracle_enumerate(s, Box((3,), (2,))).solutions == ()


def test_fractional_coefficients_exact():
    # x/2 + y/3 = 1 over a small box; only integer-compatible points
    s = make_system(["x", "y"],
                    eq=[(-1, {0: Fraction(1, 2), 1: Fraction(1, 3)})])
    box = Box((-6, -6), (6, 6))
    r = enumerate_solutions(s, box=box)
    o = oracle_enumerate(s, box)
    assert r.solutions == o.solutions
    assert (2, 0) in r and (0, 3) in r


def test_c6_order6_chain_solves_to_indicator():
    t = bundled_table("C6")
    chain = PowerChain.of(6, {
        2: PAVector.indicator(t, t.class_index("2a")),
        3: PAVector.indicator(t, t.class_index("3a")),
    }, table=t)
    sysc = build_system(t, 6, chain)
    r = enumerate_solutions(sysc)
    assert r.complete
    want = PAVector.indicator(t, t.class_index("6a"))
    idx = [t.class_index(l) for l in sysc.var_labels]
    assert r.solutions == (want.as_tuple(idx),)
    o = oracle_enumerate(sysc, bounds(sysc))
    assert set(o.solutions) == set(r.solutions)


def test_s6_order2_matches_oracle_and_contains_paper_tuple():
    t = bundled_table("S6")
    sysx = build_system(t, 2, PowerChain.of(2, {}, table=t))
    r = enumerate_solutions(sysx)
    assert r.complete
    assert sysx.var_labels == ("2a", "2b", "2c")
    assert (-1, 1, 1) in r
    for name in ("2a", "2b", "2c"):
        ind = PAVector.indicator(t, t.class_index(name))
        assert ind.as_tuple([t.class_index(l) for l in sysx.var_labels]) in r
    o = oracle_enumerate(sysx, bounds(sysx))
    assert set(o.solutions) == set(r.solutions)


def random_boxed_system(rng, max_vars=6, max_rows=12, max_volume=10 ** 6):
    """A random system plus an explicit box of volume <= max_volume."""
    nv = rng.randint(1, max_vars)
    lo, hi = [], []
    vol = 1
    for _ in range(nv):
        w = rng.randint(0, 9)
        while vol * (w + 1) > max_volume:
            w -= 1
        vol *= w + 1
        a = rng.randint(-5, 5)
        lo.append(a)
        hi.append(a + w)
    s = LinearSystem(["v%d" % i for i in range(nv)])
    # half the time make the box midpoint a solution of the eq rows so
    # the tests are not dominated by empty systems
    anchor = [rng.randint(lo[i], hi[i]) for i in range(nv)]
    for _ in range(rng.randint(0, max_rows)):
        kind = rng.choice(["eq", "ge", "ge", "cong"])
        coeffs = {}
        for i in range(nv):
            if rng.random() < 0.6:
                c = rng.randint(-4, 4)
                if c:
                    coeffs[i] = c
        if kind == "eq":
            base = sum(c * anchor[i] for i, c in coeffs.items())
            const = -base if rng.random() < 0.5 else rng.randint(-10, 10)
            s.add_eq(AffineForm(const, coeffs))
        elif kind == "ge":
            const = rng.randint(-10, 10)
            s.add_ge(AffineForm(const, coeffs))
        else:
            m = rng.randint(2, 6)
            s.add_cong(AffineForm(rng.randint(-10, 10), coeffs), m)
    return s, Box(tuple(lo), tuple(hi))


@pytest.mark.parametrize("seed", range(8))
def test_random_systems_match_oracle(seed):
    rng = random.Random(90000 + seed)
    for _ in range(10):
        s, box = random_boxed_system(rng)
        fast = enumerate_solutions(s, box=box)
        slow = oracle_enumerate(s, box)
        assert fast.complete
        assert set(fast.solutions) == set(slow.solutions), s.dump()
        assert fast.solutions == tuple(sorted(fast.solutions))


def test_adding_constraints_never_grows_solutions():
    rng = random.Random(4242)
    for _ in range(25):
        s, box = random_boxed_system(rng, max_rows=6)
        before = set(enumerate_solutions(s, box=box).solutions)
        i = rng.randrange(s.num_vars)
        s.add_ge(AffineForm(rng.randint(0, 4), {i: rng.choice([-1, 1])}))
        after = set(enumerate_solutions(s, box=box).solutions)
        assert after <= before


def test_propagated_box_respects_explicit_rows():
    # propagation must discover two-sided bounds from chained rows
    s = make_system(["x", "y"],
                    ge=[(7, {0: -1}), (0, {0: 1}),
                        (0, {0: 1, 1: -2}), (0, {1: 1})])
    b = bounds(s)
    assert b.lower == (0, 0)
    assert b.upper == (7, 3)
