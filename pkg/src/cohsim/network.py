"""Beam-splitter networks that chop one coherent state into T equal daughters."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .optics import (
    BeamSplitter,
    CoherentField,
    DomainError,
    GateElement,
    ModeUnitary,
    PhaseShifter,
    apply_gate_rows,
    apply_gates,
)

BALANCED = math.pi / 4


class PlanKind(str, Enum):
    BALANCED_TREE = "BalancedTree"
    GAMMA_CHAIN = "GammaChain"


@dataclass(frozen=True)
class NetworkPlan:
    """Layers of gates applied in order; gates within a layer act on disjoint modes."""

    mode_count: int
    layers: tuple[tuple[GateElement, ...], ...]
    kind: PlanKind

    def __post_init__(self):
        layers = tuple(tuple(layer) for layer in self.layers)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "kind", PlanKind(self.kind))
        T = self.mode_count
        if T < 1:
            raise DomainError("mode_count must be positive")
        for n, layer in enumerate(layers, start=1):
            seen: set[int] = set()
            for gate in layer:
                modes = (gate.p, gate.q) if isinstance(gate, BeamSplitter) else (gate.k,)
                for k in modes:
                    if not 1 <= k <= T:
                        raise DomainError(f"layer {n}: mode {k} outside [1, {T}]")
                    if k in seen:
                        raise DomainError(f"layer {n}: mode {k} used twice")
                    seen.add(k)
        if self.splitter_count != T - 1:
            raise DomainError(f"plan has {self.splitter_count} beam splitters, expected {T - 1}")

    @property
    def gates(self) -> list[GateElement]:
        return [g for layer in self.layers for g in layer]

    @property
    def splitter_count(self) -> int:
        return sum(isinstance(g, BeamSplitter) for g in self.gates)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def to_json(self) -> dict:
        def gate_json(g):
            if isinstance(g, BeamSplitter):
                return {"type": "bs", "p": g.p, "q": g.q, "gamma": g.gamma}
            return {"type": "ps", "k": g.k, "theta": g.theta}

        return {
            "mode_count": self.mode_count,
            "kind": self.kind.value,
            "layers": [[gate_json(g) for g in layer] for layer in self.layers],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NetworkPlan":
        def gate(d):
            if d["type"] == "bs":
                return BeamSplitter(int(d["p"]), int(d["q"]), float(d["gamma"]))
            if d["type"] == "ps":
                return PhaseShifter(int(d["k"]), float(d["theta"]))
            raise DomainError(f"unknown gate type {d['type']!r}")

        layers = tuple(tuple(gate(d) for d in layer) for layer in obj["layers"])
        return cls(int(obj["mode_count"]), layers, PlanKind(obj["kind"]))


def is_power_of_two(T: int) -> bool:
    return T >= 1 and T & (T - 1) == 0


def build_balanced_tree(T: int) -> NetworkPlan:
    """log2(T) layers of 50:50 splitters; layer l pairs mode m with m + 2**(l-1)."""
    if T < 2 or not is_power_of_two(T):
        raise DomainError(f"T={T} is not a power of two >= 2; use build_gamma_chain")
    layers = []
    width = 1
    while width < T:
        layers.append(tuple(BeamSplitter(m, m + width, BALANCED) for m in range(1, width + 1)))
        width *= 2
    return NetworkPlan(T, tuple(layers), PlanKind.BALANCED_TREE)


def chain_angle(T: int, i: int) -> float:
    """Splitter i of the tap-off chain keeps 1/(T-i+1) of the residual power on mode i."""
    remaining = T - i + 1
    if remaining == 2:
        return BALANCED
    return math.acos(1.0 / math.sqrt(remaining))


def build_gamma_chain(T: int) -> NetworkPlan:
    """T-1 tuned splitters on (1,2), (2,3), ...; works for any T >= 2."""
    if T < 2:
        raise DomainError(f"T={T}: a chain needs at least two modes")
    layers = tuple((BeamSplitter(i, i + 1, chain_angle(T, i)),) for i in range(1, T))
    return NetworkPlan(T, layers, PlanKind.GAMMA_CHAIN)


def build_plan(T: int) -> NetworkPlan:
    """Balanced tree when T is a power of two, tuned chain otherwise."""
    if T == 1:
        return NetworkPlan(1, (), PlanKind.GAMMA_CHAIN)
    return build_balanced_tree(T) if is_power_of_two(T) else build_gamma_chain(T)


def effective_unitary(plan: NetworkPlan) -> ModeUnitary:
    """Transfer matrix of the whole plan; later layers multiply on the left."""
    m = np.eye(plan.mode_count, dtype=np.complex128)
    for gate in plan.gates:
        apply_gate_rows(m, gate)
    return ModeUnitary(m)


def run_plan(field: CoherentField, plan: NetworkPlan) -> CoherentField:
    """Push a field through the plan gate by gate without building the T x T matrix."""
    if field.mode_count != plan.mode_count:
        raise DomainError(f"field has {field.mode_count} modes, plan has {plan.mode_count}")
    return apply_gates(field, plan.gates)


def chop(alpha: complex, plan: NetworkPlan) -> CoherentField:
    """Split ``alpha`` (entering mode 1) into T daughters of amplitude alpha/sqrt(T)."""
    if plan.mode_count == 1:
        return CoherentField.single(alpha, 1)
    return run_plan(CoherentField.single(alpha, plan.mode_count), plan)
