"""n->1 entanglement-purification circuits and their exact noisy simulation.

A circuit acts on n Bell pairs shared between sides A and B.  Pair i occupies
qubit i on side A and qubit n+i on side B of the joint 2n-qubit state.  All
2^m measurement branches are enumerated exactly; measured qubits are traced
out eagerly so later branches stay small.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .quantum import (
    CNOT,
    CZ,
    BellDiagonalState,
    DensityMatrix,
    NoiseModel,
    _apply_unitary_raw,
    _basis_projectors,
    _depolarize_raw,
    _partial_trace_raw,
    _permute_raw,
    _project_raw,
    clifford_unitary,
    fidelity_to_bell,
    stephenson_pair,
)

SIDES = ("A", "B")
BASES = ("X", "Y", "Z")
RELATIONS = ("coincident", "anticoincident")
MIN_PAIRS = 2
MAX_PAIRS = 5


# ---------------------------------------------------------------------------
# circuit description

@dataclass(frozen=True)
class TwoQubitGate:
    kind: str  # "cnot" | "cz"
    side: str
    control_pair: int
    target_pair: int


@dataclass(frozen=True)
class SingleQubitClifford:
    pair: int
    side: str
    index: int  # canonical Clifford index 0..23


@dataclass(frozen=True)
class Measure:
    pair: int
    side: str
    basis: str  # "X" | "Y" | "Z"
    record_label: str


@dataclass(frozen=True)
class AcceptRule:
    label_i: str
    label_j: str
    relation: str  # "coincident" | "anticoincident"


@dataclass(frozen=True)
class PurificationCircuit:
    """Gate/measurement program over n Bell pairs with an accept predicate."""

    n_pairs: int
    ops: tuple
    accept: tuple
    output_pair: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "accept", tuple(self.accept))
        self._check()

    def _check(self):
        if not (MIN_PAIRS <= self.n_pairs <= MAX_PAIRS):
            raise ValueError(f"n_pairs must be {MIN_PAIRS}..{MAX_PAIRS}")
        if self.output_pair != 0:
            raise ValueError("output_pair is fixed at 0")
        measured = set()
        labels = {}
        for op in self.ops:
            if isinstance(op, TwoQubitGate):
                if op.kind not in ("cnot", "cz"):
                    raise ValueError(f"unknown two-qubit gate {op.kind!r}")
                if op.side not in SIDES:
                    raise ValueError("side must be A or B")
                if op.control_pair == op.target_pair:
                    raise ValueError("control and target pairs must differ")
                for p in (op.control_pair, op.target_pair):
                    if not (0 <= p < self.n_pairs):
                        raise ValueError("pair index out of range")
                    if (p, op.side) in measured:
                        raise ValueError("gate on an already-measured qubit")
            elif isinstance(op, SingleQubitClifford):
                if op.side not in SIDES:
                    raise ValueError("side must be A or B")
                if not (0 <= op.pair < self.n_pairs):
                    raise ValueError("pair index out of range")
                if not (0 <= op.index < 24):
                    raise ValueError("clifford index must be 0..23")
                if (op.pair, op.side) in measured:
                    raise ValueError("gate on an already-measured qubit")
            elif isinstance(op, Measure):
                if op.side not in SIDES:
                    raise ValueError("side must be A or B")
                if op.basis not in BASES:
                    raise ValueError("basis must be X, Y or Z")
                if op.pair == 0:
                    raise ValueError("pair 0 is the output and is never measured")
                if not (0 <= op.pair < self.n_pairs):
                    raise ValueError("pair index out of range")
                if (op.pair, op.side) in measured:
                    raise ValueError("qubit measured twice")
                if op.record_label in labels:
                    raise ValueError(f"duplicate record label {op.record_label!r}")
                measured.add((op.pair, op.side))
                labels[op.record_label] = op
            else:
                raise TypeError(f"unknown instruction {op!r}")
        for rule in self.accept:
            if rule.relation not in RELATIONS:
                raise ValueError("relation must be coincident or anticoincident")
            for lab in (rule.label_i, rule.label_j):
                if lab not in labels:
                    raise ValueError(f"accept references unknown label {lab!r}")

    # -- JSON interchange ---------------------------------------------------

    def to_dict(self) -> dict:
        ops = []
        for op in self.ops:
            if isinstance(op, TwoQubitGate):
                ops.append({"kind": op.kind, "side": op.side,
                            "control_pair": op.control_pair,
                            "target_pair": op.target_pair})
            elif isinstance(op, SingleQubitClifford):
                ops.append({"kind": "clifford", "side": op.side,
                            "pair": op.pair, "index": op.index})
            else:
                ops.append({"kind": "measure", "side": op.side, "pair": op.pair,
                            "basis": op.basis, "record_label": op.record_label})
        accept = [{"label_i": r.label_i, "label_j": r.label_j,
                   "relation": r.relation} for r in self.accept]
        return {"n_pairs": self.n_pairs, "ops": ops, "accept": accept}

    @classmethod
    def from_dict(cls, d: dict) -> "PurificationCircuit":
        ops = []
        for o in d["ops"]:
            kind = o["kind"]
            if kind in ("cnot", "cz"):
                ops.append(TwoQubitGate(kind, o["side"], int(o["control_pair"]),
                                        int(o["target_pair"])))
            elif kind == "clifford":
                ops.append(SingleQubitClifford(int(o["pair"]), o["side"],
                                               int(o["index"])))
            elif kind == "measure":
                ops.append(Measure(int(o["pair"]), o["side"], o["basis"],
                                   str(o["record_label"])))
            else:
                raise ValueError(f"unknown op kind {kind!r}")
        accept = [AcceptRule(a["label_i"], a["label_j"], a["relation"])
                  for a in d.get("accept", [])]
        return cls(int(d["n_pairs"]), tuple(ops), tuple(accept))

    def to_json(self, indent: int = 1) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "PurificationCircuit":
        return cls.from_dict(json.loads(text))


def load_circuit(path) -> PurificationCircuit:
    with open(path) as fh:
        return PurificationCircuit.from_dict(json.load(fh))


def save_circuit(circuit: PurificationCircuit, path) -> None:
    with open(path, "w") as fh:
        fh.write(circuit.to_json())
        fh.write("\n")


@dataclass(frozen=True)
class ProtocolOutcome:
    """Result of simulating a purification protocol."""

    output_fidelity: float
    success_probability: float
    output_state: DensityMatrix


# ---------------------------------------------------------------------------
# simulator

def _as_pair_matrix(state) -> np.ndarray:
    if isinstance(state, BellDiagonalState):
        state = state.to_density_matrix()
    m = state.entries if isinstance(state, DensityMatrix) else np.asarray(state, complex)
    if m.shape != (4, 4):
        raise ValueError("each input must be a 2-qubit state")
    return m


def _resolve_inputs(inputs, n_pairs: int) -> list:
    if isinstance(inputs, (DensityMatrix, BellDiagonalState)):
        return [_as_pair_matrix(inputs)] * n_pairs
    seq = list(inputs)
    if len(seq) != n_pairs:
        raise ValueError(f"need {n_pairs} input states, got {len(seq)}")
    return [_as_pair_matrix(s) for s in seq]


def simulate(circuit: PurificationCircuit, inputs, noise: NoiseModel) -> ProtocolOutcome:
    """Exact noisy run: all measurement branches, closed-form depolarizing.

    `inputs` is one shared 2-qubit DensityMatrix or a length-n_pairs list.
    Depolarizing noise follows every gate on exactly its qubits (p1 single,
    p2 two-qubit); measurement records pass through a p_meas bitflip.
    Returns the accept-conditioned pair-0 marginal next to its fidelity and
    the total success probability.
    """
    n_pairs = circuit.n_pairs
    n = 2 * n_pairs
    mats = _resolve_inputs(inputs, n_pairs)

    state = np.array([[1.0 + 0j]])
    for m in mats:
        state = np.kron(state, m)
    # kron order is A0 B0 A1 B1 ...; relabel to A0..A_{n-1} B0..B_{n-1}
    perm = [2 * i for i in range(n_pairs)] + [2 * i + 1 for i in range(n_pairs)]
    state = _permute_raw(state, perm, n)

    alive = list(range(n))  # qubit id -> position alive.index(id)
    branches = [(state, {})]  # unnormalized: trace == path probability

    for op in circuit.ops:
        m = len(alive)
        if isinstance(op, TwoQubitGate):
            off = 0 if op.side == "A" else n_pairs
            pos = [alive.index(off + op.control_pair), alive.index(off + op.target_pair)]
            u = CNOT if op.kind == "cnot" else CZ
            branches = [(_depolarize_raw(_apply_unitary_raw(s, u, pos, m),
                                         noise.p2, pos, m), rec)
                        for s, rec in branches]
        elif isinstance(op, SingleQubitClifford):
            off = 0 if op.side == "A" else n_pairs
            pos = [alive.index(off + op.pair)]
            u = clifford_unitary(op.index)
            branches = [(_depolarize_raw(_apply_unitary_raw(s, u, pos, m),
                                         noise.p1, pos, m), rec)
                        for s, rec in branches]
        else:  # Measure
            off = 0 if op.side == "A" else n_pairs
            q = off + op.pair
            pos = alive.index(q)
            keep = [i for i in range(m) if i != pos]
            p_up, p_dn = _basis_projectors(op.basis)
            pm = noise.p_meas
            nxt = []
            for s, rec in branches:
                s0 = _partial_trace_raw(_project_raw(s, p_up, pos, m), keep, m)
                s1 = _partial_trace_raw(_project_raw(s, p_dn, pos, m), keep, m)
                # record bitflip mixes which outcome is written down
                b0 = (1 - pm) * s0 + pm * s1
                b1 = (1 - pm) * s1 + pm * s0
                nxt.append((b0, {**rec, op.record_label: 0}))
                nxt.append((b1, {**rec, op.record_label: 1}))
            branches = nxt
            alive.remove(q)

    def accepted(rec: dict) -> bool:
        for rule in circuit.accept:
            same = rec[rule.label_i] == rec[rule.label_j]
            if rule.relation == "coincident" and not same:
                return False
            if rule.relation == "anticoincident" and same:
                return False
        return True

    m = len(alive)
    out_pos = sorted((alive.index(0), alive.index(n_pairs)))
    total = np.zeros((4, 4), dtype=complex)
    p_succ = 0.0
    for s, rec in branches:
        if not accepted(rec):
            continue
        p_succ += float(np.trace(s).real)
        total += _partial_trace_raw(s, out_pos, m)
    if alive.index(0) > alive.index(n_pairs):  # keep A before B in the marginal
        total = _permute_raw(total, [1, 0], 2)

    if p_succ <= 0.0:
        return ProtocolOutcome(0.0, 0.0, DensityMatrix(2, total))
    out = DensityMatrix(2, total / p_succ)
    return ProtocolOutcome(fidelity_to_bell(out, "phi_plus"), p_succ, out)


# ---------------------------------------------------------------------------
# reference circuits

def bbpssw_circuit() -> PurificationCircuit:
    """2->1 bilateral-CNOT protocol: Z-measure pair 1, accept coincident."""
    ops = (
        TwoQubitGate("cnot", "A", 0, 1),
        TwoQubitGate("cnot", "B", 0, 1),
        Measure(1, "A", "Z", "c1"),
        Measure(1, "B", "Z", "c2"),
    )
    return PurificationCircuit(2, ops, (AcceptRule("c1", "c2", "coincident"),))


def dejmps_circuit() -> PurificationCircuit:
    """2->1 protocol with sqrt(X) frame rotations before the bilateral CNOT."""
    from .quantum import CLIFFORD_INDEX

    rxm, rxp = CLIFFORD_INDEX["RXM"], CLIFFORD_INDEX["RXP"]
    ops = (
        SingleQubitClifford(0, "A", rxm),
        SingleQubitClifford(1, "A", rxm),
        SingleQubitClifford(0, "B", rxp),
        SingleQubitClifford(1, "B", rxp),
        TwoQubitGate("cnot", "A", 0, 1),
        TwoQubitGate("cnot", "B", 0, 1),
        Measure(1, "A", "Z", "c1"),
        Measure(1, "B", "Z", "c2"),
    )
    return PurificationCircuit(2, ops, (AcceptRule("c1", "c2", "coincident"),))


# ---------------------------------------------------------------------------
# multi-output entanglement audit

@dataclass(frozen=True)
class EntanglementReport:
    """Pairwise classical correlations between output pairs."""

    pair_qubits: tuple
    mutual_information_bits: dict
    flagged: tuple

    @property
    def empty(self) -> bool:
        return not self.mutual_information_bits


def _diag_distribution(state: np.ndarray) -> np.ndarray:
    d = np.clip(np.diag(state).real, 0.0, None)
    tot = d.sum()
    return d / tot if tot > 0 else d


def marginal_entanglement_check(state: DensityMatrix, pairs=None,
                                threshold: float = 1e-6) -> EntanglementReport:
    """Flag residual correlations between the output pairs of a k>1 protocol.

    `pairs` lists (qubit_A, qubit_B) index tuples; default is consecutive
    blocks (0,1), (2,3), ...  For every two pairs the computational-basis
    mutual information (in bits) of their joint 4-qubit marginal is computed;
    values above `threshold` are flagged.  With fewer than two pairs the
    report is trivially empty.
    """
    n = state.num_qubits
    if pairs is None:
        if n % 2:
            raise ValueError("default pairing needs an even number of qubits")
        pairs = [(2 * i, 2 * i + 1) for i in range(n // 2)]
    pairs = [tuple(int(q) for q in p) for p in pairs]
    for qa, qb in pairs:
        if not (0 <= qa < n and 0 <= qb < n) or qa == qb:
            raise ValueError("invalid pair qubit indices")

    mi = {}
    flagged = []
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            keep = sorted(set(pairs[i]) | set(pairs[j]))
            if len(keep) != 4:
                raise ValueError("pairs must not share qubits")
            red = _partial_trace_raw(state.entries, keep, n)
            # axis order follows sorted `keep`; pair i's qubits may interleave
            # with pair j's, so marginalize by explicit qubit membership
            probs = _diag_distribution(red)
            idx_i = [keep.index(q) for q in pairs[i]]
            idx_j = [keep.index(q) for q in pairs[j]]
            pi = np.zeros(4)
            pj = np.zeros(4)
            pij = np.zeros((4, 4))
            for b in range(16):
                bits = [(b >> (3 - k)) & 1 for k in range(4)]
                vi = bits[idx_i[0]] * 2 + bits[idx_i[1]]
                vj = bits[idx_j[0]] * 2 + bits[idx_j[1]]
                pi[vi] += probs[b]
                pj[vj] += probs[b]
                pij[vi, vj] += probs[b]
            val = 0.0
            for a in range(4):
                for c in range(4):
                    if pij[a, c] > 0 and pi[a] > 0 and pj[c] > 0:
                        val += pij[a, c] * np.log2(pij[a, c] / (pi[a] * pj[c]))
            mi[(i, j)] = max(float(val), 0.0)
            if mi[(i, j)] > threshold:
                flagged.append((i, j))
    return EntanglementReport(tuple(pairs), mi, tuple(flagged))
