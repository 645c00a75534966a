"""Genetic search for high-yield n->1 purification circuits under noise.

Genomes are measurement-terminal: gates act anywhere, then every ancilla
pair is measured on both sides and accepted on a per-pair coincidence
relation.  Insertions are biased toward bilateral two-qubit gates and
conjugate Clifford pairs (U on A with conj(U) on B leaves phi+ invariant),
which is where useful purification structure lives.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .purify import (
    AcceptRule,
    Measure,
    PurificationCircuit,
    ProtocolOutcome,
    SingleQubitClifford,
    TwoQubitGate,
    simulate,
)
from .quantum import (
    BellDiagonalState,
    CLIFFORD_CONJUGATE_PARTNER,
    DensityMatrix,
    NoiseModel,
    stephenson_pair,
)

SIDES = ("A", "B")
BASES = ("X", "Y", "Z")
RELATIONS = ("coincident", "anticoincident")

MIN_SUCCESS = 0.01  # circuits succeeding less often than this score zero


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 100
    generations: int = 150
    n_pairs: int = 3
    seed: int = 0
    mutation_rate: float = 0.1  # per-site; sites = gates + bases + relations
    crossover_rate: float = 0.7
    max_ops: int = 24
    elite_fraction: float = 0.1

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.n_pairs not in (3, 4, 5):
            raise ValueError("n_pairs must be 3, 4 or 5")
        for r in (self.mutation_rate, self.crossover_rate, self.elite_fraction):
            if not (0 <= r <= 1):
                raise ValueError("rates must lie in [0,1]")
        if self.generations < 1 or self.max_ops < 1:
            raise ValueError("generations and max_ops must be positive")


@dataclass(frozen=True)
class RankedCircuit:
    circuit: PurificationCircuit
    fitness: float
    outcome: ProtocolOutcome


def resolve_input(spec) -> DensityMatrix:
    """Accept 'stephenson', a BellDiagonalState, or a 2-qubit DensityMatrix."""
    if isinstance(spec, str):
        if spec == "stephenson":
            return stephenson_pair(rotated=True)
        raise ValueError(f"unknown input spec {spec!r}")
    if isinstance(spec, BellDiagonalState):
        return spec.to_density_matrix()
    if isinstance(spec, DensityMatrix):
        if spec.num_qubits != 2:
            raise ValueError("input state must be a 2-qubit state")
        return spec
    raise TypeError("input spec must be 'stephenson', BellDiagonalState or DensityMatrix")


def fitness(circuit: PurificationCircuit, inputs, noise: NoiseModel) -> float:
    """Output fidelity, zeroed when the accept rate is below MIN_SUCCESS."""
    out = simulate(circuit, inputs, noise)
    return out.output_fidelity if out.success_probability >= MIN_SUCCESS else 0.0


# ---------------------------------------------------------------------------
# genome

def _record_label(pair: int, side: str, n_pairs: int) -> str:
    # qubit numbering q0..q_{2n-1} with side A first, as in the circuit layout
    return f"c{pair + (0 if side == 'A' else n_pairs)}"


def _genome_to_circuit(g: dict, n_pairs: int) -> PurificationCircuit:
    ops = []
    for item in g["gates"]:
        if item[0] in ("cnot", "cz"):
            ops.append(TwoQubitGate(item[0], item[1], item[2], item[3]))
        else:
            ops.append(SingleQubitClifford(item[2], item[1], item[3]))
    accept = []
    for pair in range(1, n_pairs):
        for side in SIDES:
            ops.append(Measure(pair, side, g["bases"][(pair, side)],
                               _record_label(pair, side, n_pairs)))
        accept.append(AcceptRule(_record_label(pair, "A", n_pairs),
                                 _record_label(pair, "B", n_pairs),
                                 g["relations"][pair]))
    return PurificationCircuit(n_pairs, tuple(ops), tuple(accept))


def _random_motif(rng, n_pairs: int) -> list:
    r = rng.random()
    i = int(rng.integers(n_pairs))
    j = int(rng.integers(n_pairs - 1))
    j = j if j < i else j + 1
    if r < 0.40:
        return [("cnot", "A", i, j), ("cnot", "B", i, j)]
    if r < 0.55:
        return [("cz", "A", i, j), ("cz", "B", i, j)]
    if r < 0.85:
        c = int(rng.integers(24))
        return [("clifford", "A", i, c), ("clifford", "B", i,
                                          CLIFFORD_CONJUGATE_PARTNER[c])]
    side = SIDES[int(rng.integers(2))]
    k = rng.random()
    if k < 0.4:
        return [("cnot", side, i, j)]
    if k < 0.6:
        return [("cz", side, i, j)]
    return [("clifford", side, i, int(rng.integers(24)))]


def _random_genome(rng, n_pairs: int, max_ops: int) -> dict:
    gates = []
    for _ in range(int(rng.integers(1, 6))):
        gates.extend(_random_motif(rng, n_pairs))
    bases = {(p, s): BASES[int(rng.integers(3))]
             for p in range(1, n_pairs) for s in SIDES}
    relations = {p: RELATIONS[int(rng.integers(2))] for p in range(1, n_pairs)}
    return {"gates": gates[:max_ops], "bases": bases, "relations": relations}


def _copy(g: dict) -> dict:
    return {"gates": list(g["gates"]), "bases": dict(g["bases"]),
            "relations": dict(g["relations"])}


def _mutate_once(g: dict, rng, n_pairs: int, max_ops: int) -> None:
    r = rng.random()
    if r < 0.35:  # insert a motif
        pos = int(rng.integers(len(g["gates"]) + 1))
        g["gates"][pos:pos] = _random_motif(rng, n_pairs)
        g["gates"] = g["gates"][:max_ops]
    elif r < 0.55 and g["gates"]:  # delete
        del g["gates"][int(rng.integers(len(g["gates"])))]
    elif r < 0.70 and g["gates"]:  # redraw one gate in place
        g["gates"][int(rng.integers(len(g["gates"])))] = _random_motif(rng, n_pairs)[0]
    elif r < 0.90:  # redraw a measurement basis
        p = int(rng.integers(1, n_pairs))
        s = SIDES[int(rng.integers(2))]
        g["bases"][(p, s)] = BASES[int(rng.integers(3))]
    else:  # toggle an accept relation
        p = int(rng.integers(1, n_pairs))
        g["relations"][p] = RELATIONS[1 - RELATIONS.index(g["relations"][p])]


def _mutate(g: dict, rng, n_pairs: int, max_ops: int, rate: float) -> dict:
    # rate is per-site: one Bernoulli(rate) trial per mutable locus, so the
    # number of events scales with genome length (gates + bases + relations,
    # +1 for the length locus itself)
    g = _copy(g)
    n_sites = len(g["gates"]) + len(g["bases"]) + len(g["relations"]) + 1
    for _ in range(int(rng.binomial(n_sites, rate))):
        _mutate_once(g, rng, n_pairs, max_ops)
    return g


def _crossover(g1: dict, g2: dict, rng, n_pairs: int, max_ops: int) -> dict:
    i = int(rng.integers(len(g1["gates"]) + 1))
    j = int(rng.integers(len(g2["gates"]) + 1))
    gates = (g1["gates"][:i] + g2["gates"][j:])[:max_ops]
    bases = {}
    relations = {}
    for p in range(1, n_pairs):
        relations[p] = (g1 if rng.random() < 0.5 else g2)["relations"][p]
        for s in SIDES:
            bases[(p, s)] = (g1 if rng.random() < 0.5 else g2)["bases"][(p, s)]
    return {"gates": gates, "bases": bases, "relations": relations}


# ---------------------------------------------------------------------------
# search

def search(config: GaConfig, input_spec, noise: NoiseModel,
           archive: bool = False) -> list:
    """Evolve circuits; return RankedCircuits in descending fitness.

    Deterministic for a fixed config (bitwise-identical reruns).  By default
    the final population is returned; archive=True instead ranks every
    distinct circuit evaluated during the whole run, which is the candidate
    pool that downstream benchmarking draws from.
    """
    rho = resolve_input(input_spec)
    rng = np.random.default_rng(config.seed)
    n_pairs, max_ops = config.n_pairs, config.max_ops
    pop = [_random_genome(rng, n_pairs, max_ops)
           for _ in range(config.population_size)]

    cache = {}
    pool = []  # (key, circuit, outcome) in first-evaluation order

    def evaluate(g: dict):
        key = json.dumps([g["gates"],
                          sorted((p, s, b) for (p, s), b in g["bases"].items()),
                          sorted(g["relations"].items())])
        hit = cache.get(key)
        if hit is None:
            circ = _genome_to_circuit(g, n_pairs)
            out = simulate(circ, rho, noise)
            fit = out.output_fidelity if out.success_probability >= MIN_SUCCESS else 0.0
            hit = (fit, out)
            cache[key] = hit
            pool.append((circ, fit, out))
        return hit

    n_elite = max(1, int(round(config.elite_fraction * config.population_size)))
    for _ in range(config.generations):
        scored = sorted(((evaluate(g)[0], i, g) for i, g in enumerate(pop)),
                        key=lambda t: (-t[0], t[1]))
        elites = [_copy(g) for _, _, g in scored[:n_elite]]

        def tournament():
            best = None
            for _ in range(3):
                pick = scored[int(rng.integers(config.population_size))]
                if best is None or (pick[0], -pick[1]) > (best[0], -best[1]):
                    best = pick
            return best[2]

        nxt = elites
        while len(nxt) < config.population_size:
            if rng.random() < config.crossover_rate:
                child = _crossover(tournament(), tournament(), rng, n_pairs, max_ops)
            else:
                child = _copy(tournament())
            nxt.append(_mutate(child, rng, n_pairs, max_ops, config.mutation_rate))
        pop = nxt

    if archive:
        for g in pop:
            evaluate(g)  # make sure the last generation is pooled
        ranked = sorted(pool, key=lambda t: -t[1])
        return [RankedCircuit(c, f, out) for c, f, out in ranked]
    final = sorted(((evaluate(g), i, g) for i, g in enumerate(pop)),
                   key=lambda t: (-t[0][0], t[1]))
    return [RankedCircuit(_genome_to_circuit(g, n_pairs), hit[0], hit[1])
            for hit, _, g in final]


@dataclass(frozen=True)
class BenchmarkRow:
    n_pairs: int
    success_probability: float
    output_fidelity: float


def benchmark_sweep(candidates, noise: NoiseModel) -> list:
    """Re-simulate candidate circuits on rotated measured-pair inputs.

    Returns one BenchmarkRow per candidate, in input order; this is the
    scatter data the candidate-pool quality plots are built from.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("candidate list must be non-empty")
    rho = stephenson_pair(rotated=True)
    rows = []
    for circ in candidates:
        out = simulate(circ, rho, noise)
        rows.append(BenchmarkRow(circ.n_pairs, out.success_probability,
                                 out.output_fidelity))
    return rows
