import pytest

from vpe.field import PrimeModulus
from vpe.ops import OpCount
from vpe.params import derive_params
from vpe.poly import Polynomial
from vpe.simulate import ScriptedCoins, bench, bench_lines, binomial_sigma, exact_single_acceptance, simulate


@pytest.mark.parametrize("strategy", ["corrupt-min", "random-consistent"])
@pytest.mark.parametrize("eta, c_eta, degree", [(2, 3, 4), (2, 4, 8), (3, 4, 9), (4, 8, 16)])
def test_rates_within_bound(strategy, eta, c_eta, degree):
    rep = simulate(eta, c_eta, degree, strategy, 300, seed=eta * 10 + c_eta)
    assert 0 <= rep.per_experiment_rate <= 1 and 0 <= rep.full_rate <= 1
    assert rep.per_experiment_rate <= rep.single_bound + 3 * rep.per_experiment_sigma + 1e-9
    assert rep.experiments == 300 * rep.m


def test_honest_simulation_always_accepts():
    rep = simulate(2, 4, 8, "honest", 50, seed=0)
    assert rep.per_experiment_rate == rep.full_rate == 1.0


def test_simulate_validates_trials():
    with pytest.raises(ValueError):
        simulate(2, 4, 4, "corrupt-min", 0, seed=0)


def test_exact_acceptance_matches_closed_form():
    f97 = PrimeModulus(97)
    for eta, c_eta, d in [(2, 4, 4), (2, 3, 8), (3, 5, 9)]:
        prm = derive_params(f97, d, eta, c_eta)
        f = Polynomial.from_ints(list(range(1, d + 1)), f97)
        rate = exact_single_acceptance(f, prm, 5, "corrupt-min")
        assert rate == pytest.approx(prm.tight_single_bound())
        assert rate <= prm.single_bound()


def test_scripted_coins():
    coins = ScriptedCoins([1, 2])
    assert coins.randrange(4) == 1
    with pytest.raises(ValueError):
        coins.randrange(2)


def test_binomial_sigma():
    assert binomial_sigma(0.5, 100) == pytest.approx(0.05)


def test_bench_rows():
    rows = bench([4, 8, 16, 32], 2, 4, seed=1)
    assert all(row.accepted and not row.lazy for row in rows)
    assert all(row.max_values_per_round == 2 for row in rows)
    for a, b in zip(rows, rows[1:]):
        assert 2.8 <= b.init.mul / a.init.mul <= 5.2
    assert len(bench_lines(rows)) == 5


def test_bench_lazy_mode():
    rows = bench([64], 2, 4, seed=1, table_cap=100)
    assert rows[0].lazy and rows[0].accepted
    assert "lazy" in bench_lines(rows)[1]


def test_opcount():
    a = OpCount()
    a.tally(mul=3, add=2)
    b = OpCount(1, 1, 1)
    assert (a + b) == OpCount(4, 3, 1)
    assert (a + b).total == 8
    a.reset()
    assert a.total == 0
