import random
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sizedlang.oracle.lattice import (
    BAR_MU,
    Complement,
    Compose,
    Const,
    FinUniverse,
    Id,
    Inter,
    ListF,
    SetOperator,
    Union,
    check_identities,
    greatest_fixed_point,
    is_monotone,
    is_monotone_bruteforce,
    iterate_bar_mu,
    iterate_conventional,
    iterate_deflationary,
    iterate_inflationary,
    least_fixed_point,
    random_op,
    run_oracle,
)


def list_op(k):
    u = FinUniverse.lists(k)
    return u, SetOperator.of(ListF(), u)


class TestUniverse:
    def test_labels_distinct(self):
        with pytest.raises(ValueError):
            FinUniverse(("a", "a"))

    def test_too_large(self):
        with pytest.raises(ValueError):
            FinUniverse.of_size(17)

    def test_subset_roundtrip(self):
        u = FinUniverse(("a", "b", "c"))
        assert u.members(u.subset(["a", "c"])) == ["a", "c"]
        assert u.full == 0b111 and u.count == 8


class TestConventional:
    def test_list_chain(self):
        u, f = list_op(2)
        chain = iterate_conventional(f, "mu")
        assert [u.members(x) for x in chain.iterates] == [
            [],
            ["len0"],
            ["len0", "len1"],
            ["len0", "len1", "len2"],
            ["len0", "len1", "len2"],
        ]
        assert chain.closure_index == 3

    def test_const(self):
        u = FinUniverse.of_size(3)
        chain = iterate_conventional(SetOperator.of(Const(0b101), u))
        assert chain.iterates == [0, 0b101, 0b101] and chain.closure_index == 1

    def test_identity(self):
        chain = iterate_conventional(SetOperator.of(Id(), FinUniverse.of_size(3)))
        assert chain.iterates == [0, 0] and chain.closure_index == 0

    def test_cycle_guard(self):
        chain = iterate_conventional(SetOperator.of(Complement(Id()), FinUniverse(("a",))))
        assert not chain.stationary
        with pytest.raises(ValueError):
            chain.limit

    def test_truncated_one_past_stationarity(self):
        _, f = list_op(4)
        chain = iterate_conventional(f)
        assert len(chain.iterates) == chain.closure_index + 2
        assert chain.iterates[-1] == chain.iterates[-2]


class TestOtherSchemes:
    def test_inflationary_complement(self):
        u = FinUniverse(("a",))
        chain = iterate_inflationary(SetOperator.of(Complement(Id()), u))
        assert chain.iterates == [0, 1, 1]

    def test_inflationary_list_is_conventional(self):
        _, f = list_op(3)
        assert iterate_inflationary(f).iterates == iterate_conventional(f).iterates

    def test_deflationary_identity(self):
        u = FinUniverse.of_size(2)
        assert iterate_deflationary(SetOperator.of(Id(), u)).iterates == [u.full, u.full]

    def test_bar_mu_starts_with_empty_list(self):
        u, f = list_op(3)
        chain = iterate_bar_mu(f)
        assert chain.scheme == BAR_MU
        assert u.members(chain.iterates[0]) == ["len0"]

    def test_bar_mu_const(self):
        u = FinUniverse.of_size(2)
        assert iterate_bar_mu(SetOperator.of(Const(2), u)).iterates == [2, 2]

    def test_bar_mu_is_shifted_mu(self):
        _, f = list_op(5)
        bar, mu = iterate_bar_mu(f), iterate_conventional(f)
        assert all(bar.at(a) == mu.at(a + 1) for a in range(10))


class TestListClosure:
    @pytest.mark.parametrize("k", range(1, 9))
    def test_closure_index(self, k):
        u, f = list_op(k)
        chain = iterate_inflationary(f)
        assert chain.closure_index == k + 1
        for a in range(k + 3):
            expected = [f"len{n}" for n in range(min(a, k + 1))]
            assert u.members(chain.at(a)) == expected

    def test_no_heads_only_nil(self):
        u = FinUniverse.lists(3)
        f = SetOperator.of(ListF(False), u)
        assert u.members(iterate_conventional(f).limit) == ["len0"]


class TestMonotonicity:
    def test_examples(self):
        u = FinUniverse.lists(3)
        assert is_monotone(SetOperator.of(ListF(), u))
        assert not is_monotone(SetOperator.of(Complement(Id()), u))
        assert is_monotone(SetOperator.of(Const(5), u))

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 10**9))
    def test_covering_pairs_agree_with_all_pairs(self, n, seed):
        rng = random.Random(seed)
        u = FinUniverse.of_size(n)
        f = SetOperator.random_table(rng, u) if seed % 2 else SetOperator.of(random_op(rng, n), u)
        assert is_monotone(f) == is_monotone_bruteforce(f)

    def test_complement_free_trees_are_monotone(self):
        rng = random.Random(5)
        for _ in range(200):
            f = SetOperator.of(random_op(rng, 4, allow_complement=False), FinUniverse.of_size(4))
            assert f.monotone


class TestFixedPoints:
    def test_list_least_fixed_point(self):
        u, f = list_op(3)
        assert least_fixed_point(f) == u.full

    def test_greatest_of_intersection(self):
        u = FinUniverse.of_size(3)
        f = SetOperator.of(Inter(Id(), Const(0b011)), u)
        assert greatest_fixed_point(f) == 0b011 and least_fixed_point(f) == 0

    def test_matches_fixed_point_enumeration(self):
        rng = random.Random(11)
        u = FinUniverse.of_size(4)
        for _ in range(100):
            f = SetOperator.of(random_op(rng, 4, allow_complement=False), u)
            fixed = [s for s in range(u.count) if f(s) == s]
            assert least_fixed_point(f) == min(fixed, key=lambda s: bin(s).count("1"))
            assert all(least_fixed_point(f) & ~s == 0 for s in fixed)
            assert all(s & ~greatest_fixed_point(f) == 0 for s in fixed)


class TestIdentities:
    def test_list_all_hold(self):
        _, f = list_op(4)
        rep = check_identities(f)
        assert rep.ok and rep.monotone
        assert "bar mu a = mu (a+1)" in [c.name for c in rep.checks]

    def test_complement_skips_monotone_block(self):
        rep = check_identities(SetOperator.of(Complement(Id()), FinUniverse.of_size(3)))
        assert rep.ok and not rep.monotone
        assert [c.name for c in rep.checks] == [
            "inflationary ascending",
            "deflationary descending",
            "inflationary limit is pre-fixed",
            "deflationary limit is post-fixed",
        ]

    def test_failure_names_scheme_and_subset(self):
        u = FinUniverse(("a",))
        f = SetOperator(u, np.array([1, 0], dtype=np.int64), "swap")
        f.__dict__["monotone"] = True  # pretend, so the monotone block runs
        rep = check_identities(f)
        assert not rep.ok
        assert any("conventional" in c.name or "cycled" in c.detail for c in rep.failures)

    def test_random_operators_size_five(self):
        run = run_oracle([5], trials=1000, seed=7, include_named=False)
        assert run.ok, run.summary()

    def test_seeds_reproducible(self):
        a = run_oracle([3], trials=30, seed=2)
        b = run_oracle([3], trials=30, seed=2)
        assert [r.label for r in a.reports] == [r.label for r in b.reports]

    def test_all_sizes_fast(self):
        start = time.perf_counter()
        run = run_oracle(range(1, 7), trials=200, seed=0)
        assert run.ok and len(run.reports) >= 1000
        assert 0 < run.monotone_count < len(run.reports)
        assert time.perf_counter() - start < 30

    def test_compose_union(self):
        u = FinUniverse.of_size(3)
        f = SetOperator.of(Compose(Union(Id(), Const(1)), Inter(Id(), Const(6))), u)
        assert f(0b111) == 0b111 and f(0) == 1
