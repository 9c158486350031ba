import csv
import io
import math
from fractions import Fraction

import pytest

from conftest import census_config
from ecsieve.arith import big_omega, factorize, is_prime
from ecsieve.census import (
    ConfigError,
    CensusReport,
    MissingCheckpoints,
    NotCoprime,
    NotSquarefree,
    divisor_count,
    greaves_comparison,
    plot_data,
    report_invariant_violations,
    run_census,
)
from ecsieve.ec_reduction import count_points, discriminant, parse_curve
from ecsieve.gl2 import GaloisImageSpec, density_C
from ecsieve.sieve_theory import SieveParams, weight_G
from oracles import eratosthenes


def test_small_census_example(census_1e3):
    r = census_1e3
    assert len(eratosthenes(1000)) == 168
    assert r.n_good_primes == 167
    assert r.excluded_primes == [37]
    assert r.n_in_A == r.n_good_primes
    assert len(r.p_r_counts) == 16
    assert r.p_r_counts[-1] == r.n_in_A
    assert report_invariant_violations(r) == []


@pytest.mark.parametrize("x", [1000, 20000])
def test_census_recount(x):
    """Every tally recomputed from scratch with the oracles."""
    r = run_census(census_config(x))
    curve = parse_curve("0,0,1,-1,0")
    params = SieveParams().at(x)
    z, DU = math.sqrt(params.D), params.D ** params.U
    orders = [count_points(curve, p) for p in eratosthenes(x) if p != 37]
    n = len(orders)
    assert r.n_good_primes == n
    assert sum(1 for a in orders if is_prime(a)) == r.pi_twin
    assert sum(1 for a in orders if a % 2 == 0) == r.divisor_counts[2]
    assert r.density_observed[3] == Fraction(sum(1 for a in orders if a % 3 == 0), n)
    assert [sum(1 for a in orders if big_omega(a) <= k) for k in range(1, 17)] == r.p_r_counts
    assert sum(1 for a in orders if all(q >= z for q in factorize(a).primes)) == r.empirical_S
    H = math.fsum(weight_G([q for q in factorize(a).primes if q < DU], params) for a in orders)
    assert r.empirical_H == pytest.approx(H, abs=1e-9)
    assert report_invariant_violations(r) == []


def test_divisor_count(census_1e3):
    obs, pred, res = divisor_count(census_1e3, 1)
    assert obs == census_1e3.n_in_A
    assert pred == census_1e3.predictions["X"]
    assert res == obs - pred
    assert density_C(6) == density_C(2) * density_C(3)
    with pytest.raises(NotSquarefree):
        divisor_count(census_1e3, 4)
    with pytest.raises(KeyError):
        divisor_count(census_1e3, 11)


def test_divisor_count_not_coprime():
    config = census_config(1000).__class__(
        parse_curve("0,0,1,-1,0"), GaloisImageSpec.full(2), 1000, ell_probe_set=(3, 5))
    report = run_census(config)
    with pytest.raises(NotCoprime):
        divisor_count(report, 2)
    assert report_invariant_violations(report) == []
    assert report.n_in_A < report.n_good_primes


def test_greaves_comparison(census_1e3):
    H, main, ratio = greaves_comparison(census_1e3)
    assert census_1e3.pi_twin > 0 and ratio > 0
    assert H <= census_1e3.n_in_A
    assert H >= census_1e3.primes_above_DU


def test_config_validation():
    with pytest.raises(ConfigError):
        run_census(census_config(50))
    with pytest.raises(ConfigError):
        run_census(census_config(10**16))
    with pytest.raises(ConfigError):
        run_census(census_config(1000, ell_probe_set=(2, 4)))
    with pytest.raises(ConfigError):
        run_census(census_config(1000, params=SieveParams(V=0.05)))


def test_report_json_round_trip(census_1e3):
    text = census_1e3.to_json()
    back = CensusReport.from_json(text)
    assert back == census_1e3
    assert back.to_json() == text


def test_dump_csv(tmp_path, census_1e3):
    path = tmp_path / "primes.csv"
    run_census(census_config(1000), dump=path)
    rows = list(csv.DictReader(path.open()))
    assert list(rows[0]) == ["p", "ap", "np", "gcd_me", "omega", "big_omega"]
    assert len(rows) == 167
    for row in rows[:40]:
        p, ap, n = int(row["p"]), int(row["ap"]), int(row["np"])
        assert n == p + 1 - ap and ap * ap <= 4 * p
        assert int(row["big_omega"]) == big_omega(n)
    assert discriminant(0, 0, 1, -1, 0) == 37


def test_resume_matches_uninterrupted(tmp_path):
    config = census_config(20000, checkpoint_interval=4096)
    ck = tmp_path / "run.ck"
    dump_a, dump_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_census(config, checkpoint=ck, dump=dump_a, max_blocks=2) is None
    resumed = run_census(config, checkpoint=ck, dump=dump_a)
    straight = run_census(config, dump=dump_b)
    assert resumed.to_json() == straight.to_json()
    assert dump_a.read_bytes() == dump_b.read_bytes()
    assert [s["x"] for s in resumed.series] == [4095, 8191, 12287, 16383, 20000]


def test_checkpoint_of_other_config_rejected(tmp_path):
    ck = tmp_path / "run.ck"
    run_census(census_config(5000), checkpoint=ck, max_blocks=0)
    run_census(census_config(5000, checkpoint_interval=1000), checkpoint=ck, max_blocks=1)
    with pytest.raises(ConfigError):
        run_census(census_config(6000, checkpoint_interval=1000), checkpoint=ck)


def test_workers_match_serial():
    config = census_config(30000, checkpoint_interval=8192)
    assert run_census(config, workers=2).to_json() == run_census(config).to_json()


def test_plot_data(census_1e3):
    text = plot_data(census_1e3)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["x", "pi_twin", "prediction", "ratio"]
    assert len(rows) == 2  # x = 1000 fits in one block
    assert float(rows[1][3]) > 0
    data = census_1e3.to_dict()
    data["series"] = []
    assert plot_data(data) == "x,pi_twin,prediction,ratio\n"
    del data["series"]
    with pytest.raises(MissingCheckpoints):
        plot_data(data)


@pytest.mark.slow
def test_census_1e6_properties(census_1e6):
    r = census_1e6
    assert report_invariant_violations(r) == []
    assert r.n_good_primes == len(eratosthenes(10**6)) - 1
    xs = [s["x"] for s in r.series]
    assert xs == sorted(xs) and xs[-1] == 10**6
    pt = [s["pi_twin"] for s in r.series]
    assert pt == sorted(pt)
    obs, pred, _ = divisor_count(r, 2)
    q = 2 / 3
    assert abs(obs / r.n_good_primes - q) <= 4 * math.sqrt(q * (1 - q) / r.n_good_primes)
    rows = list(csv.reader(io.StringIO(plot_data(r))))[1:]
    assert all(float(row[3]) > 0 for row in rows if int(row[1]) > 0)
