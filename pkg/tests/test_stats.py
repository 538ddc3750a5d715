import json
import math
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import mannwhitneyu

from oracles import brute_two_sided_p, gaussian_binomial_counts
from rhea.core import SeededRng
from rhea.stats import (
    F1_POINTS,
    UMethod,
    describe,
    exact_p_value,
    f1_aggregate,
    f1_points_for_game,
    mann_whitney,
    midranks,
    u_null_counts,
)

TABLES = json.loads((Path(__file__).parent / "fixtures" / "f1_tables.json").read_text())


def per_game(table):
    agents = list(table)
    return [{a: table[a][g] for a in agents} for g in range(len(table[agents[0]]))]


class TestDescribe:
    def test_values(self):
        s = describe([1.0, 0.0, 1.0, 0.0])
        assert (s.n, s.mean, s.sd) == (4, 0.5, 0.5)

    def test_single(self):
        assert describe([3.0]).sd == 0.0

    def test_empty(self):
        with pytest.raises(ValueError):
            describe([])


class TestF1:
    def test_strict_order(self):
        assert f1_points_for_game({"A": 0.9, "B": 0.7, "C": 0.5, "D": 0.1}) == {"A": 25, "B": 18, "C": 15, "D": 12}

    def test_score_tiebreak(self):
        pts = f1_points_for_game({"A": 0.7, "B": 0.7, "C": 0.2, "D": 0.1}, {"A": 10, "B": 8, "C": 50, "D": 50})
        assert (pts["A"], pts["B"]) == (25, 18)

    def test_chopper(self):
        pts = f1_points_for_game(TABLES["chopper_win_rates"])
        assert pts == {"stat-tree-seeding": 25, "shift-buffer": 18, "vanilla": 15, "stat-tree": 12}
        assert pts["stat-tree"] == TABLES["stochastic"]["stat-tree"][2]

    def test_residual_tie_seeded(self):
        rates = {"A": 0.5, "B": 0.5, "C": 0.5, "D": 0.5}
        a = f1_points_for_game(rates, rng=SeededRng(4))
        assert a == f1_points_for_game(rates, rng=SeededRng(4))
        assert sorted(a.values()) == sorted(F1_POINTS)
        winners = {next(k for k, v in f1_points_for_game(rates, rng=SeededRng(s)).items() if v == 25) for s in range(40)}
        assert winners == set(rates)

    def test_five_agents_use_extended_points(self):
        pts = f1_points_for_game({"A": 0.9, "B": 0.8, "C": 0.7, "D": 0.6, "E": 0.5})
        assert pts["E"] == 10

    @given(st.lists(st.integers(0, 10), min_size=4, max_size=4), st.lists(st.integers(0, 3), min_size=4, max_size=4), st.permutations(range(4)))
    def test_permutation_equivariant(self, wins, scores, perm):
        names = ["a", "b", "c", "d"]
        # distinct keys so no seeded toss is involved
        keys = [(w, s, i) for i, (w, s) in enumerate(zip(wins, scores))]
        rates = {n: k[0] + k[2] / 100 for n, k in zip(names, keys)}
        sc = {n: k[1] for n, k in zip(names, keys)}
        base = f1_points_for_game(rates, sc)
        renamed = [names[p] for p in perm]
        moved = f1_points_for_game({renamed[i]: rates[n] for i, n in enumerate(names)},
                                   {renamed[i]: sc[n] for i, n in enumerate(names)})
        assert all(moved[renamed[i]] == base[n] for i, n in enumerate(names))

    @pytest.mark.parametrize("group", ["stochastic", "deterministic"])
    def test_table_totals(self, group):
        assert f1_aggregate(per_game(TABLES[group])) == TABLES["totals"][group]

    def test_grand_totals(self):
        games = per_game(TABLES["stochastic"]) + per_game(TABLES["deterministic"])
        assert f1_aggregate(games) == TABLES["totals"]["all"]
        assert sorted(TABLES["totals"]["all"].values(), reverse=True) == [412, 382, 315, 291]

    def test_tables_assign_each_value_once(self):
        for group in ("stochastic", "deterministic"):
            for game in per_game(TABLES[group]):
                assert sorted(game.values()) == sorted(F1_POINTS)

    def test_name_mismatch(self):
        with pytest.raises(ValueError):
            f1_aggregate([{"a": 25, "b": 18}, {"a": 25, "c": 18}])


class TestMannWhitney:
    def test_identical_samples(self):
        r = mann_whitney([1, 2, 3, 4], [1, 2, 3, 4])
        assert r.p_value == 1.0 and not r.significant

    def test_all_values_identical(self):
        r = mann_whitney([1.0] * 20, [1.0] * 20)
        assert r.p_value == 1.0 and not r.significant

    def test_fixture_123_vs_456(self):
        r = mann_whitney([1, 2, 3], [4, 5, 6])
        assert r.u == 0 and r.method is UMethod.EXACT
        assert r.p_value == pytest.approx(0.1, abs=1e-12)
        assert r.p_value == 2 / math.comb(6, 3)

    def test_midranks(self):
        assert midranks([3, 1, 3, 2]) == [3.5, 1.0, 3.5, 2.0]

    def test_null_counts_are_gaussian_binomials(self):
        for n in range(1, 13):
            for m in range(1, 13):
                assert list(u_null_counts(n, m)) == gaussian_binomial_counts(n, m)
                assert sum(u_null_counts(n, m)) == math.comb(n + m, n)

    def test_exact_against_brute_force_small(self):
        for n in range(1, 6):
            for m in range(1, 6):
                for u in range(n * m + 1):
                    assert abs(exact_p_value(u, n, m) - brute_two_sided_p(u, n, m)) < 1e-9

    def test_exact_agrees_with_scipy(self, rng):
        for _ in range(100):
            n, m = 1 + rng.randbelow(10), 1 + rng.randbelow(10)
            pool = rng.sample(range(1000), n + m)
            a, b = pool[:n], pool[n:]
            ours = mann_whitney(a, b)
            ref = mannwhitneyu(a, b, alternative="two-sided", method="exact")
            assert ours.u == ref.statistic
            assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-12)

    def test_normal_with_ties_agrees_with_scipy(self, rng):
        for _ in range(100):
            a = [rng.randbelow(6) for _ in range(5 + rng.randbelow(30))]
            b = [rng.randbelow(6) for _ in range(5 + rng.randbelow(30))]
            if len(set(a + b)) == 1:
                continue
            ours = mann_whitney(a, b)
            ref = mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True)
            assert ours.method is UMethod.NORMAL
            assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-12)

    def test_normal_close_to_exact_at_20(self, rng):
        for _ in range(100):
            pool = rng.sample(range(100000), 40)
            a, b = pool[:20], pool[20:]
            approx = mann_whitney(a, b)
            assert approx.method is UMethod.NORMAL
            assert abs(approx.p_value - exact_p_value(approx.u, 20, 20)) < 0.01

    def test_zero_one_samples(self):
        r = mann_whitney([1.0] * 40, [0.0] * 40)
        assert r.significant and r.u == 1600

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mann_whitney([], [1.0])

    @settings(max_examples=200)
    @given(st.lists(st.integers(0, 8), min_size=1, max_size=25), st.lists(st.integers(0, 8), min_size=1, max_size=25))
    def test_u_symmetry(self, a, b):
        ab, ba = mann_whitney(a, b), mann_whitney(b, a)
        assert ab.u + ba.u == len(a) * len(b)
        assert ab.p_value == pytest.approx(ba.p_value, abs=1e-12)
        assert 0.0 <= ab.p_value <= 1.0
