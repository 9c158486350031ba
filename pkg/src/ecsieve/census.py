"""Streaming census of |E(F_p)| over primes p <= x.

Primes are processed in fixed half-open blocks [k W, (k + 1) W) where W is
the checkpoint interval. Each block reduces to a :class:`BlockTally`; tallies
merge in block order, so the final report does not depend on how the run
was split across workers or interrupted and resumed.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Sequence

from .arith import factorize, is_prime, iter_prime_segments, li, li2
from .checkpoint import CheckpointState, config_digest, load_checkpoint, save_checkpoint
from .ec_reduction import CurveModel, count_points
from .gl2 import GaloisImageSpec, density_C, density_C_prime, prob_coprime
from .koblitz import koblitz_constant
from .sieve_theory import (
    J,
    SieveParams,
    check_conditions,
    omega1_probe,
    upper_bound_constant,
    weight_W,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
X_CAP = 10**15
MAX_R = 16
DEFAULT_PROBES = (2, 3, 5, 7)
DEFAULT_INTERVAL = 1 << 16
DEFAULT_CONSTANT_CUTOFF = 10**5
DUMP_HEADER = ("p", "ap", "np", "gcd_me", "omega", "big_omega")
EULER_GAMMA = 0.57721566490153286061


class ConfigError(ValueError):
    pass


class MissingCheckpoints(ValueError):
    pass


class NotCoprime(ValueError):
    pass


class NotSquarefree(ValueError):
    pass


def _default_divisors(probes: Sequence[int], m_e: int) -> tuple[int, ...]:
    usable = [l for l in probes if m_e % l]
    divs = [1]
    for l in usable:
        divs += [d * l for d in divs]
    return tuple(sorted(divs))


@dataclass(frozen=True)
class CensusConfig:
    curve: CurveModel
    image: GaloisImageSpec
    x: int
    params: SieveParams = field(default_factory=SieveParams)
    ell_probe_set: tuple[int, ...] = DEFAULT_PROBES
    checkpoint_interval: int = DEFAULT_INTERVAL
    probe_divisors: tuple[int, ...] | None = None
    constant_cutoff: int = DEFAULT_CONSTANT_CUTOFF

    def __post_init__(self):
        if self.probe_divisors is None:
            object.__setattr__(self, "probe_divisors",
                               _default_divisors(self.ell_probe_set, self.image.m_e))

    def validate(self) -> None:
        if self.x < 100:
            raise ConfigError(f"x must be >= 100, got {self.x}")
        if self.x > X_CAP:
            raise ConfigError(f"x = {self.x} exceeds the 64-bit safety cap {X_CAP}")
        if self.checkpoint_interval < 1:
            raise ConfigError("checkpoint_interval must be positive")
        for l in self.ell_probe_set:
            if not is_prime(l):
                raise ConfigError(f"probe {l} is not prime")
            if self.image.m_e % l == 0:
                raise ConfigError(f"probe prime {l} divides m_e = {self.image.m_e}")
        for d in self.probe_divisors:
            _check_divisor(d, self.image.m_e)
        bad = check_conditions(self.params)
        if bad:
            raise ConfigError(f"inadmissible sieve parameters: {bad}")

    @property
    def D(self) -> float:
        return float(self.x) ** self.params.xi

    def fingerprint(self) -> str:
        """Canonical text identifying everything that affects the tallies."""
        p = self.params
        gens = "" if self.image.generators is None else ";".join(
            f"[{g}]" for g in self.image.generators)
        return "|".join(str(v) for v in (
            self.curve.spec(), self.image.m_e, gens, self.x, repr(p.theta), repr(p.epsilon),
            repr(p.xi), repr(p.U), repr(p.V), p.r, self.ell_probe_set,
            self.checkpoint_interval, self.probe_divisors))


def _check_divisor(d: int, m_e: int) -> None:
    if d < 1 or any(e > 1 for _, e in factorize(d).factors):
        raise NotSquarefree(f"d = {d} is not squarefree")
    if math.gcd(d, m_e) != 1:
        raise NotCoprime(f"d = {d} shares a factor with m_e = {m_e}")


@dataclass
class BlockTally:
    """Additive tallies over one block of primes."""

    hi: int
    n_good_primes: int = 0
    n_in_A: int = 0
    pi_twin: int = 0
    pi_twin_excluded: int = 0
    empirical_S: int = 0
    ub1_extra: int = 0
    primes_above_DU: int = 0
    cond3_count: int = 0
    sixteen_me_violations: int = 0
    max_a: int = 0
    omega_hist: list[int] = field(default_factory=lambda: [0] * (MAX_R + 2))
    divisor_counts: list[int] = field(default_factory=list)
    ell_counts: list[int] = field(default_factory=list)
    excluded_primes: list[int] = field(default_factory=list)
    empirical_H: float = 0.0
    rows: list[tuple[int, ...]] = field(default_factory=list)


def _process_block(config: CensusConfig, lo: int, hi: int, dump: bool) -> BlockTally:
    curve = config.curve
    m_e = config.image.m_e
    params = config.params.at(config.x)
    D = params.D
    z = math.sqrt(D)
    DU = D ** params.U
    DV = D ** params.V
    sixteen = 16 * m_e
    probes = config.ell_probe_set
    divisors = config.probe_divisors
    tally = BlockTally(hi=hi, divisor_counts=[0] * len(divisors), ell_counts=[0] * len(probes))
    hist = tally.omega_hist
    h_terms: list[float] = []
    wcache: dict[int, float] = {}

    for seg in iter_prime_segments(lo, hi):
        for p in seg.tolist():
            if curve.disc % p == 0:
                tally.excluded_primes.append(p)
                continue
            n = count_points(curve, p)
            ap = p + 1 - n
            if ap * ap > 4 * p or 16 * n < p:
                raise AssertionError(f"Hasse/p-over-16 bound broken at p={p}: np={n}")
            tally.n_good_primes += 1
            for i, l in enumerate(probes):
                if n % l == 0:
                    tally.ell_counts[i] += 1
            f = factorize(n)
            g = math.gcd(n, m_e)
            big = f.big_omega
            prime = big == 1
            if dump:
                tally.rows.append((p, ap, n, g, f.little_omega, big))
            if prime and g > 1:
                tally.pi_twin_excluded += 1
                if p > sixteen:
                    tally.sixteen_me_violations += 1
            if prime and (n <= z or g > 1):
                tally.ub1_extra += 1
            if g != 1:
                continue
            tally.n_in_A += 1
            tally.max_a = max(tally.max_a, n)
            hist[min(big, MAX_R + 1)] += 1
            if prime:
                tally.pi_twin += 1
                if n > DU:
                    tally.primes_above_DU += 1
            for i, d in enumerate(divisors):
                if n % d == 0:
                    tally.divisor_counts[i] += 1
            # every prime factor of a is a sieving prime since gcd(a, m_e) = 1
            if all(q >= z for q in f.primes):
                tally.empirical_S += 1
            for q, e in f.factors:
                if e >= 2 and DV <= q < DU:
                    tally.cond3_count += 1
            small = [q for q in f.primes if q < DU]
            if small:
                total = 1.0
                for q in small:
                    w = wcache.get(q)
                    if w is None:
                        w = wcache[q] = weight_W(q, params)
                    total -= 1.0 - w
                h_terms.append(max(0.0, total))
            else:
                h_terms.append(1.0)
    tally.empirical_H = math.fsum(h_terms)
    return tally


def _block_bounds(config: CensusConfig, start: int) -> Iterator[tuple[int, int]]:
    w = config.checkpoint_interval
    end = config.x + 1
    lo = start
    while lo < end:
        hi = min((lo // w + 1) * w, end)
        yield lo, hi
        lo = hi


def _merge(state: CheckpointState, t: BlockTally) -> None:
    state.next_lo = t.hi
    state.n_good_primes += t.n_good_primes
    state.n_in_A += t.n_in_A
    state.pi_twin += t.pi_twin
    state.pi_twin_excluded += t.pi_twin_excluded
    state.empirical_S += t.empirical_S
    state.ub1_extra += t.ub1_extra
    state.primes_above_DU += t.primes_above_DU
    state.cond3_count += t.cond3_count
    state.sixteen_me_violations += t.sixteen_me_violations
    state.max_a = max(state.max_a, t.max_a)
    state.omega_hist = [a + b for a, b in zip(state.omega_hist, t.omega_hist)]
    state.divisor_counts = [a + b for a, b in zip(state.divisor_counts, t.divisor_counts)]
    state.ell_counts = [a + b for a, b in zip(state.ell_counts, t.ell_counts)]
    state.excluded_primes = state.excluded_primes + t.excluded_primes
    state.empirical_H = state.empirical_H + t.empirical_H
    # UB1: every prime order is either sifted (coprime, > D^{1/2}) or in the extra term
    if state.pi_twin + state.pi_twin_excluded > state.empirical_S + state.ub1_extra:
        raise AssertionError(f"sifting inequality broken at x_i = {t.hi - 1}")
    state.series.append((t.hi - 1, state.n_good_primes, state.n_in_A, state.pi_twin,
                         state.pi_twin_excluded, state.empirical_S, state.ub1_extra,
                         state.empirical_H))


def _fresh_state(config: CensusConfig) -> CheckpointState:
    return CheckpointState(
        fingerprint=config_digest(config.fingerprint()), next_lo=2,
        omega_hist=[0] * (MAX_R + 2),
        divisor_counts=[0] * len(config.probe_divisors),
        ell_counts=[0] * len(config.ell_probe_set))


@dataclass
class CensusReport:
    x: int
    n_good_primes: int
    n_in_A: int
    pi_twin: int
    p_r_counts: list[int]
    divisor_counts: dict[int, int]
    empirical_H: float
    empirical_S: int
    density_observed: dict[int, Fraction]
    predictions: dict
    excluded_primes: list[int]
    schema_version: int = SCHEMA_VERSION
    curve: str = ""
    image_mode: str = ""
    m_e: int = 1
    sieve: dict = field(default_factory=dict)
    pi_twin_excluded: int = 0
    ub1_extra: int = 0
    primes_above_DU: int = 0
    cond3_count: int = 0
    max_a: int = 0
    sixteen_me_ok: bool = True
    omega1_sup: float = 0.0
    greaves: dict = field(default_factory=dict)
    series: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["divisor_counts"] = {str(k): v for k, v in self.divisor_counts.items()}
        out["density_observed"] = {str(k): str(v) for k, v in self.density_observed.items()}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "CensusReport":
        data = dict(data)
        data["divisor_counts"] = {int(k): v for k, v in data["divisor_counts"].items()}
        data["density_observed"] = {int(k): Fraction(v) for k, v in data["density_observed"].items()}
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "CensusReport":
        return cls.from_dict(json.loads(text))


def _predictions(config: CensusConfig, n_good: int) -> dict:
    x = config.x
    params = config.params.at(x)
    D = params.D
    image = config.image
    const = koblitz_constant(image, max(config.constant_cutoff, *image.ramified_primes, 2))
    C = const.value
    base = x / math.log(x) ** 2
    pc = prob_coprime(image)
    X = float(pc) * li(x)
    z = math.sqrt(D)
    # V(z) = prod_{l < z, l not | m_e} (1 - |C(l)|/|G(l)|)
    Vz = 1.0
    for l in range(2, int(z) + 1):
        if l < z and is_prime(l) and image.m_e % l:
            Vz *= 1.0 - float(density_C_prime(l))
    twoJ = 2.0 * J(params.xi, params.U, params.V)
    tol = {}
    for l in config.ell_probe_set:
        q = float(density_C_prime(l))
        tol[str(l)] = 4.0 * math.sqrt(q * (1.0 - q) / n_good) if n_good else math.inf
    return {
        "C_E_twin": const.to_dict(),
        "C_E_twin_note": "elementary tail estimate from 1 - E(l) <= 2/l^2",
        "x_over_log2": C * base,
        "li2": C * li2(x),
        "prob_coprime": str(pc),
        "X": X,
        "greaves_2J": twoJ,
        "greaves_main_term": twoJ * C * base,
        "selberg_upper": upper_bound_constant(params.theta, params.epsilon) * C * base,
        "selberg_main_finite": X * Vz * math.exp(EULER_GAMMA),
        "densities": {str(l): str(density_C_prime(l)) for l in config.ell_probe_set},
        "density_tolerance": tol,
        "density_tolerance_note": "4 sigma binomial heuristic, not a theorem",
        "comparison_note": "asymptotic main terms only; finite-x error terms are not certified",
    }


def _build_report(config: CensusConfig, state: CheckpointState) -> CensusReport:
    params = config.params.at(config.x)
    D = params.D
    cumulative, run = [], 0
    for r in range(MAX_R + 1):
        run += state.omega_hist[r]
        if r >= 1:
            cumulative.append(run)
    n_good = state.n_good_primes
    predictions = _predictions(config, n_good)
    main = predictions["greaves_main_term"]
    series = [
        {"x": s[0], "n_good_primes": s[1], "n_in_A": s[2], "pi_twin": s[3],
         "pi_twin_excluded": s[4], "empirical_S": s[5], "ub1_extra": s[6], "empirical_H": s[7]}
        for s in state.series
    ]
    return CensusReport(
        x=config.x,
        n_good_primes=n_good,
        n_in_A=state.n_in_A,
        pi_twin=state.pi_twin,
        p_r_counts=cumulative,
        divisor_counts=dict(zip(config.probe_divisors, state.divisor_counts)),
        empirical_H=state.empirical_H,
        empirical_S=state.empirical_S,
        density_observed={l: Fraction(c, n_good) if n_good else Fraction(0)
                          for l, c in zip(config.ell_probe_set, state.ell_counts)},
        predictions=predictions,
        excluded_primes=list(state.excluded_primes),
        curve=config.curve.spec(),
        image_mode=config.image.label,
        m_e=config.image.m_e,
        sieve={"theta": params.theta, "epsilon": params.epsilon, "xi": params.xi,
               "U": params.U, "V": params.V, "r": params.r, "D": D,
               "D_U": D ** params.U, "D_V": D ** params.V, "z": math.sqrt(D),
               "cond2_ok": state.max_a <= D ** (params.r * params.U + params.V)},
        pi_twin_excluded=state.pi_twin_excluded,
        ub1_extra=state.ub1_extra,
        primes_above_DU=state.primes_above_DU,
        cond3_count=state.cond3_count,
        max_a=state.max_a,
        sixteen_me_ok=state.sixteen_me_violations == 0,
        omega1_sup=omega1_probe(D, config.image.ramified_primes),
        greaves={"empirical_H": state.empirical_H, "main_term": main,
                 "ratio": state.empirical_H / main if main else 0.0},
        series=series,
    )


def run_census(config: CensusConfig, checkpoint: str | Path | None = None,
               dump: str | Path | None = None, workers: int = 1,
               max_blocks: int | None = None) -> CensusReport | None:
    """Run (or resume) a census; returns None if stopped early by ``max_blocks``.

    With ``checkpoint`` set, state is saved after every block and an existing
    non-empty checkpoint for the same configuration is resumed.
    """
    config.validate()
    state = None
    if checkpoint is not None:
        state = load_checkpoint(checkpoint)
        if state is not None and state.fingerprint != config_digest(config.fingerprint()):
            raise ConfigError(f"checkpoint {checkpoint} belongs to a different configuration")
    resumed = state is not None
    if state is None:
        state = _fresh_state(config)

    dump_file = None
    writer = None
    if dump is not None:
        dump_file = open(dump, "a" if resumed else "w", newline="")
        writer = csv.writer(dump_file, lineterminator="\n")
        if not resumed:
            writer.writerow(DUMP_HEADER)

    blocks = list(_block_bounds(config, state.next_lo))
    if max_blocks is not None:
        blocks = blocks[:max_blocks]
    try:
        if workers > 1 and len(blocks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                tallies = pool.map(_process_block, [config] * len(blocks),
                                   [b[0] for b in blocks], [b[1] for b in blocks],
                                   [writer is not None] * len(blocks))
                for t in tallies:
                    _commit(state, t, writer, dump_file, checkpoint)
        else:
            for lo, hi in blocks:
                _commit(state, _process_block(config, lo, hi, writer is not None),
                        writer, dump_file, checkpoint)
    finally:
        if dump_file is not None:
            dump_file.close()

    if state.next_lo <= config.x:
        logger.info("census stopped at %d of %d", state.next_lo - 1, config.x)
        return None
    if state.sixteen_me_violations:
        raise AssertionError("prime group order sharing a factor with m_e found beyond 16 m_e")
    return _build_report(config, state)


def _commit(state, tally, writer, dump_file, checkpoint) -> None:
    _merge(state, tally)
    if writer is not None:
        writer.writerows(tally.rows)
        dump_file.flush()
    if checkpoint is not None:
        save_checkpoint(checkpoint, state)


def divisor_count(report: CensusReport, d: int) -> tuple[int, float, float]:
    """(|A_d|, (w(d)/d) X, residual) for a probed squarefree d coprime to m_e."""
    _check_divisor(d, report.m_e)
    if d not in report.divisor_counts:
        raise KeyError(f"d = {d} was not probed in this census")
    observed = report.divisor_counts[d]
    predicted = float(density_C(d)) * report.predictions["X"]
    return observed, predicted, observed - predicted


def greaves_comparison(report: CensusReport) -> tuple[float, float, float]:
    """(empirical H, main term 2J C x/(log x)^2, their ratio); no pass/fail attached."""
    main = report.predictions["greaves_main_term"]
    H = report.empirical_H
    return H, main, (H / main if main else 0.0)


def report_invariant_violations(report: CensusReport) -> list[str]:
    """Structural checks every finished report must pass."""
    out = []
    pr = report.p_r_counts
    if any(a > b for a, b in zip(pr, pr[1:])):
        out.append("p_r_counts not monotone")
    if pr and pr[0] < report.pi_twin:
        out.append("P_1 count below pi_twin")
    if report.n_in_A > report.n_good_primes:
        out.append("n_in_A exceeds n_good_primes")
    if report.pi_twin + report.pi_twin_excluded > report.empirical_S + report.ub1_extra:
        out.append("sifting inequality (UB1) broken")
    for s in report.series:
        if s["pi_twin"] + s["pi_twin_excluded"] > s["empirical_S"] + s["ub1_extra"]:
            out.append(f"UB1 broken at checkpoint x = {s['x']}")
    if report.empirical_H > report.n_in_A:
        out.append("empirical_H exceeds n_in_A")
    if report.empirical_H < report.primes_above_DU:
        out.append("empirical_H below the count of prime a > D^U")
    if not report.sixteen_me_ok:
        out.append("16 m_e bound broken")
    return out


def plot_data(report: CensusReport | dict) -> str:
    """CSV ``x,pi_twin,prediction,ratio`` from the checkpoint series.

    The prediction is C_E^twin * li2(x_i).
    """
    data = report.to_dict() if isinstance(report, CensusReport) else report
    if "series" not in data:
        raise MissingCheckpoints("report carries no checkpoint series")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("x", "pi_twin", "prediction", "ratio"))
    if not data["series"]:
        return buf.getvalue()
    C = data["predictions"]["C_E_twin"]["value"]
    for s in data["series"]:
        pred = C * li2(s["x"])
        w.writerow((s["x"], s["pi_twin"], repr(pred), repr(s["pi_twin"] / pred if pred > 0 else 0.0)))
    return buf.getvalue()
