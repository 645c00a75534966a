"""Analytic communication-ion budgets for fault-tolerant lattice surgery.

The model: a surgery between two surface-code patches of distance d needs
N_LS = d * N_p * K fresh purified pairs per syndrome extraction cycle, where
K multiplexes purification circuits so at least one succeeds with confidence
P_pair.  Within one cycle of T seconds a device pulsing at R Hz makes
A = floor(T*R) entanglement attempts per communication ion, each succeeding
with probability p_c, so one ion holds a pair with P_onepair = 1-(1-p_c)^A.
The two integer solvers invert the binomial tail over the ion count or the
attempt budget.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources as importlib_resources

from scipy.special import betainc


@dataclass(frozen=True)
class DeviceParams:
    """Hardware and confidence constants of one modular trapped-ion device."""

    pulse_rate_hz: float = 1e6          # R
    p_entangle: float = 2.18e-4         # p_c per attempt
    p_purify: float = 0.819             # p, purification success probability
    pairs_per_circuit: int = 3          # N_p raw pairs consumed per circuit
    p_pair_confidence: float = 0.999    # P_pair
    p_ls_confidence: float = 0.999      # P_LS
    f_ideal: float = 0.99               # pair fidelity target

    def __post_init__(self):
        if self.pulse_rate_hz <= 0:
            raise ValueError("pulse_rate_hz must be positive")
        for name in ("p_entangle", "p_purify", "p_pair_confidence", "p_ls_confidence",
                     "f_ideal"):
            v = getattr(self, name)
            if not (0 < v <= 1):
                raise ValueError(f"{name} must lie in (0,1]")
        if self.pairs_per_circuit < 2:
            raise ValueError("pairs_per_circuit must be at least 2")


@dataclass(frozen=True)
class SurgeryQuery:
    """One solver question: fix the cycle time or fix the ion budget."""

    distance: int
    cycle_time_s: float | None = None
    n_ions: int | None = None
    paper_compat: bool = False

    def __post_init__(self):
        if self.distance < 1:
            raise ValueError("distance must be at least 1")
        if (self.cycle_time_s is None) == (self.n_ions is None):
            raise ValueError("set exactly one of cycle_time_s and n_ions")
        if self.cycle_time_s is not None and self.cycle_time_s <= 0:
            raise ValueError("cycle_time_s must be positive")
        if self.n_ions is not None and self.n_ions < 1:
            raise ValueError("n_ions must be at least 1")


@dataclass(frozen=True)
class EstimateResult:
    """Solver output; `feasible` mirrors the 0.0 cells of infeasible queries."""

    k_multiplex: int
    n_ls: int
    attempts_budget: int
    answer: int
    rate_hz: float
    feasible: bool
    distance: int

    @property
    def full_surgery_rate_hz(self) -> float:
        """Rate of complete d-round surgeries, if cycles must serialize."""
        return self.rate_hz / self.distance


def multiplexing_k(p_purify: float, p_pair_confidence: float) -> int:
    """Smallest K with 1-(1-p)^K >= P_pair, evaluated in log space."""
    if p_purify <= 0:
        raise ValueError("p_purify must be positive for multiplexing to terminate")
    if not (0 < p_pair_confidence < 1):
        raise ValueError("p_pair_confidence must lie in (0,1)")
    if p_purify >= 1:
        return 1
    k = max(1, math.ceil(math.log1p(-p_pair_confidence) / math.log1p(-p_purify)))
    # integer verification against floating-point edge cases
    while -math.expm1(k * math.log1p(-p_purify)) < p_pair_confidence:
        k += 1
    while k > 1 and -math.expm1((k - 1) * math.log1p(-p_purify)) >= p_pair_confidence:
        k -= 1
    return k


def pairs_required(distance: int, pairs_per_circuit: int, k_multiplex: int) -> int:
    """N_LS = d * N_p * K raw-pair demand of one surgery cycle."""
    if min(distance, pairs_per_circuit, k_multiplex) < 1:
        raise ValueError("all factors must be at least 1")
    return distance * pairs_per_circuit * k_multiplex


def p_onepair(p_entangle: float, attempts: int) -> float:
    """1 - (1-p_c)^A, numerically stable for tiny p_c."""
    if attempts < 0:
        raise ValueError("attempts must be nonnegative")
    if attempts == 0 or p_entangle <= 0:
        return 0.0
    if p_entangle >= 1:
        return 1.0
    return -math.expm1(attempts * math.log1p(-p_entangle))


def binomial_tail_geq(n: int, p: float, k: int) -> float:
    """P(X >= k) for X ~ Binomial(n, p), via the regularized incomplete beta."""
    if not (0 <= k <= n + 1):
        raise ValueError("k must lie in 0..n+1")
    if not (0 <= p <= 1):
        raise ValueError("p must lie in [0,1]")
    if k == 0:
        return 1.0
    if k == n + 1:
        return 0.0
    # P(X >= k) = I_p(k, n-k+1)
    return float(betainc(k, n - k + 1, p))


def _threshold(n_ls: int, paper_compat: bool) -> int:
    # the published sweeps use a strict inequality, costing one extra pair
    return n_ls + 1 if paper_compat else n_ls


def _search_min(pred, lo: int) -> int:
    """Smallest integer >= lo satisfying monotone pred, by doubling + bisection."""
    if pred(lo):
        return lo
    hi = max(lo, 1)
    while not pred(hi):
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def min_ions(query: SurgeryQuery, device: DeviceParams) -> EstimateResult:
    """Fewest communication ions that fill the pair demand within one cycle."""
    if query.cycle_time_s is None:
        raise ValueError("min_ions needs a cycle_time_s query")
    k = multiplexing_k(device.p_purify, device.p_pair_confidence)
    n_ls = pairs_required(query.distance, device.pairs_per_circuit, k)
    k_star = _threshold(n_ls, query.paper_compat)
    budget = int(math.floor(query.cycle_time_s * device.pulse_rate_hz))
    p1 = p_onepair(device.p_entangle, budget)
    if p1 <= 0:
        return EstimateResult(k, n_ls, budget, 0, 0.0, False, query.distance)
    target = device.p_ls_confidence
    n = _search_min(lambda m: binomial_tail_geq(m, p1, k_star) >= target, k_star)
    return EstimateResult(k, n_ls, budget, n, device.pulse_rate_hz / max(budget, 1),
                          True, query.distance)


def attempts_required(n_ions: int, p_entangle: float, k_star: int,
                      p_ls: float) -> int:
    """Smallest attempt budget A with P(X >= k_star | n_ions, A) >= p_ls."""
    if not 0 < p_entangle <= 1:
        raise ValueError("p_entangle must be in (0, 1]")
    if k_star < 1:
        return 0
    if k_star > n_ions:
        raise ValueError("infeasible: k_star exceeds n_ions")
    return _search_min(
        lambda a: binomial_tail_geq(n_ions, p_onepair(p_entangle, a),
                                    k_star) >= p_ls, 1)


def min_attempts(query: SurgeryQuery, device: DeviceParams) -> EstimateResult:
    """Fewest per-ion attempts for a fixed ion budget; infeasible if ions < k*."""
    if query.n_ions is None:
        raise ValueError("min_attempts needs an n_ions query")
    k = multiplexing_k(device.p_purify, device.p_pair_confidence)
    n_ls = pairs_required(query.distance, device.pairs_per_circuit, k)
    k_star = _threshold(n_ls, query.paper_compat)
    if query.n_ions < k_star or device.p_entangle <= 0:
        return EstimateResult(k, n_ls, 0, 0, 0.0, False, query.distance)
    a_min = attempts_required(query.n_ions, device.p_entangle, k_star,
                              device.p_ls_confidence)
    return EstimateResult(k, n_ls, a_min, a_min, device.pulse_rate_hz / a_min,
                          True, query.distance)


def max_rate(query: SurgeryQuery, device: DeviceParams) -> EstimateResult:
    """Highest sustainable cycle rate R / A_min for a fixed ion budget."""
    return min_attempts(query, device)


def sweep_coupling(distances, cycle_times_s, p_c_grid, device: DeviceParams,
                   paper_compat: bool = False) -> list:
    """min_ions over the (d, T, p_c) grid; rows (d, T, p_c, min_ions, feasible)."""
    distances = list(distances)
    cycle_times_s = list(cycle_times_s)
    p_c_grid = list(p_c_grid)
    if not (distances and cycle_times_s and p_c_grid):
        raise ValueError("grids must be non-empty")
    rows = []
    for d in distances:
        for t in cycle_times_s:
            q = SurgeryQuery(distance=d, cycle_time_s=t, paper_compat=paper_compat)
            for pc in p_c_grid:
                res = min_ions(q, replace(device, p_entangle=pc))
                rows.append((d, t, pc, res.answer, res.feasible))
    return rows


def load_device(path) -> DeviceParams:
    """Device JSON with short constant names R, p_c, p, N_p, P_pair, P_LS, F_ideal."""
    with open(path) as fh:
        raw = json.load(fh)
    return device_from_dict(raw)


def device_from_dict(raw: dict) -> DeviceParams:
    known = {"R", "p_c", "p", "N_p", "P_pair", "P_LS", "F_ideal"}
    extra = set(raw) - known
    if extra:
        raise ValueError(f"unknown device keys: {sorted(extra)}")
    base = default_device()
    return DeviceParams(
        pulse_rate_hz=float(raw.get("R", base.pulse_rate_hz)),
        p_entangle=float(raw.get("p_c", base.p_entangle)),
        p_purify=float(raw.get("p", base.p_purify)),
        pairs_per_circuit=int(raw.get("N_p", base.pairs_per_circuit)),
        p_pair_confidence=float(raw.get("P_pair", base.p_pair_confidence)),
        p_ls_confidence=float(raw.get("P_LS", base.p_ls_confidence)),
        f_ideal=float(raw.get("F_ideal", base.f_ideal)),
    )


def device_to_dict(device: DeviceParams) -> dict:
    return {"R": device.pulse_rate_hz, "p_c": device.p_entangle,
            "p": device.p_purify, "N_p": device.pairs_per_circuit,
            "P_pair": device.p_pair_confidence, "P_LS": device.p_ls_confidence,
            "F_ideal": device.f_ideal}


def default_device() -> DeviceParams:
    """The packaged reference device constants."""
    ref = importlib_resources.files("ionsurgery").joinpath("data/device_default.json")
    with ref.open() as fh:
        raw = json.load(fh)
    return DeviceParams(
        pulse_rate_hz=float(raw["R"]),
        p_entangle=float(raw["p_c"]),
        p_purify=float(raw["p"]),
        pairs_per_circuit=int(raw["N_p"]),
        p_pair_confidence=float(raw["P_pair"]),
        p_ls_confidence=float(raw["P_LS"]),
        f_ideal=float(raw["F_ideal"]),
    )
