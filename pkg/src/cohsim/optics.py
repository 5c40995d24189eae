"""Multimode coherent states and linear-optical mode transformations.

A multimode coherent state is fully described by its vector of complex
amplitudes, so no Fock-space machinery is needed: every passive linear
network acts on that vector by a unitary matrix.

Mode indices are 1-based at the public boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

UNITARITY_TOL = 1e-12


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


def _check_mode(k: int, dim: int) -> None:
    if not 1 <= k <= dim:
        raise DomainError(f"mode index {k} outside [1, {dim}]")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CoherentField:
    """Ordered complex amplitudes, one per optical mode."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(np.atleast_1d(self.amplitudes))
        if amps.ndim != 1 or amps.size == 0:
            raise DomainError("a coherent field needs a non-empty 1-D amplitude vector")
        if not np.all(np.isfinite(amps)):
            raise DomainError("coherent amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def vacuum(cls, mode_count: int) -> "CoherentField":
        return cls(np.zeros(mode_count, dtype=np.complex128))

    @classmethod
    def single(cls, alpha: complex, mode_count: int) -> "CoherentField":
        """``alpha`` in mode 1, vacuum elsewhere."""
        amps = np.zeros(mode_count, dtype=np.complex128)
        amps[0] = alpha
        return cls(amps)

    @property
    def mode_count(self) -> int:
        return self.amplitudes.size

    def __len__(self) -> int:
        return self.mode_count

    def __getitem__(self, k: int) -> complex:
        _check_mode(k, self.mode_count)
        return complex(self.amplitudes[k - 1])

    def total_photon_number(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class ModeUnitary:
    """A T x T unitary, verified on construction.

    ``entries`` is stored row-major as a read-only complex array.
    """

    entries: np.ndarray
    tol: float = field(default=UNITARITY_TOL, repr=False, compare=False)

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DomainError(f"expected a non-empty square matrix, got shape {m.shape}")
        err = unitarity_error(m)
        if err > self.tol:
            raise DomainError(f"matrix is not unitary: max|U^H U - I| = {err:.3e}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "ModeUnitary":
        return cls(np.eye(dim, dtype=np.complex128))

    def dagger(self) -> "ModeUnitary":
        return ModeUnitary(self.entries.conj().T)

    def to_json(self) -> dict:
        flat = self.entries.reshape(-1)
        return {"dim": self.dim, "entries": [[float(z.real), float(z.imag)] for z in flat]}

    @classmethod
    def from_json(cls, obj: dict) -> "ModeUnitary":
        dim = int(obj["dim"])
        pairs = np.asarray(obj["entries"], dtype=float)
        if pairs.shape != (dim * dim, 2):
            raise DomainError(f"expected {dim * dim} [re, im] pairs, got shape {pairs.shape}")
        return cls((pairs[:, 0] + 1j * pairs[:, 1]).reshape(dim, dim))


@dataclass(frozen=True)
class BeamSplitter:
    """Two-mode splitter with transmission ``cos(gamma)`` between modes p and q."""

    p: int
    q: int
    gamma: float

    def __post_init__(self):
        if self.p == self.q:
            raise DomainError("beam splitter needs two distinct modes")
        if min(self.p, self.q) < 1:
            raise DomainError("mode indices are 1-based")
        if not 0.0 <= self.gamma <= math.pi / 2:
            raise DomainError(f"gamma={self.gamma} outside [0, pi/2]")


@dataclass(frozen=True)
class PhaseShifter:
    k: int
    theta: float

    def __post_init__(self):
        if self.k < 1:
            raise DomainError("mode indices are 1-based")
        if not 0.0 <= self.theta < 2 * math.pi:
            raise DomainError(f"theta={self.theta} outside [0, 2pi)")


GateElement = Union[BeamSplitter, PhaseShifter]


def unitarity_error(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def bs_matrix(gamma: float) -> np.ndarray:
    """[[cos g, sin g], [sin g, -cos g]]; gamma = pi/4 is the 50:50 splitter."""
    if not 0.0 <= gamma <= math.pi / 2:
        raise DomainError(f"gamma={gamma} outside [0, pi/2]")
    c, s = math.cos(gamma), math.sin(gamma)
    if gamma == math.pi / 4:
        c = s = math.sqrt(0.5)
    return np.array([[c, s], [s, -c]], dtype=np.complex128)


def embed_two_mode(T: int, p: int, q: int, g: np.ndarray) -> ModeUnitary:
    """Identity on T modes with the (p, q) block replaced by the 2x2 matrix ``g``."""
    if T < 1:
        raise DomainError("T must be positive")
    if p == q:
        raise DomainError("p and q must differ")
    _check_mode(p, T)
    _check_mode(q, T)
    g = np.asarray(g, dtype=np.complex128)
    if g.shape != (2, 2):
        raise DomainError("g must be 2x2")
    m = np.eye(T, dtype=np.complex128)
    i, j = p - 1, q - 1
    m[i, i], m[i, j] = g[0, 0], g[0, 1]
    m[j, i], m[j, j] = g[1, 0], g[1, 1]
    return ModeUnitary(m)


def gate_unitary(gate: GateElement, T: int) -> ModeUnitary:
    if isinstance(gate, BeamSplitter):
        return embed_two_mode(T, gate.p, gate.q, bs_matrix(gate.gamma))
    _check_mode(gate.k, T)
    m = np.eye(T, dtype=np.complex128)
    m[gate.k - 1, gate.k - 1] = np.exp(1j * gate.theta)
    return ModeUnitary(m)


def compose(a: ModeUnitary, b: ModeUnitary) -> ModeUnitary:
    """Matrix product ``a @ b``: ``b`` acts first."""
    if a.dim != b.dim:
        raise DomainError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return ModeUnitary(a.entries @ b.entries)


def apply_unitary(field: CoherentField, u: ModeUnitary) -> CoherentField:
    """Output amplitudes beta_k = sum_j conj(u[j, k]) * alpha_j.

    Here ``u`` is the device matrix of the creation-operator relation
    b_k^dag = sum_j u[k, j] a_j^dag, whose backward form gives the
    conjugated, index-transposed action on coherent amplitudes. For a
    transfer matrix M with beta = M @ alpha use :func:`propagate`.
    """
    if field.mode_count != u.dim:
        raise DomainError(f"field has {field.mode_count} modes, unitary has dim {u.dim}")
    return CoherentField(u.entries.conj().T @ field.amplitudes)


def propagate(field: CoherentField, transfer: ModeUnitary) -> CoherentField:
    """beta = transfer @ alpha, i.e. the matrix acts directly on the amplitude vector."""
    if field.mode_count != transfer.dim:
        raise DomainError(f"field has {field.mode_count} modes, unitary has dim {transfer.dim}")
    return CoherentField(transfer.entries @ field.amplitudes)


def overlap(a: complex, b: complex) -> float:
    """|<a|b>|^2 = exp(-|a - b|^2) for two coherent states."""
    return math.exp(-abs(complex(a) - complex(b)) ** 2)


def expected_photon_number(field: CoherentField, k: int) -> float:
    _check_mode(k, field.mode_count)
    return abs(field.amplitudes[k - 1]) ** 2


def apply_gate_rows(m: np.ndarray, gate: GateElement) -> None:
    """Left-multiply ``m`` in place by ``gate`` embedded in the identity.

    ``m`` may be a matrix (rows are modes) or an amplitude vector.
    """
    if isinstance(gate, BeamSplitter):
        g = bs_matrix(gate.gamma)
        i, j = gate.p - 1, gate.q - 1
        ri, rj = m[i].copy(), m[j].copy()
        m[i] = g[0, 0] * ri + g[0, 1] * rj
        m[j] = g[1, 0] * ri + g[1, 1] * rj
    else:
        m[gate.k - 1] *= np.exp(1j * gate.theta)


def apply_gates(field: CoherentField, gates) -> CoherentField:
    """Send ``field`` through ``gates`` in order, O(1) work per gate."""
    amps = field.amplitudes.copy()
    for gate in gates:
        for k in (gate.p, gate.q) if isinstance(gate, BeamSplitter) else (gate.k,):
            _check_mode(k, field.mode_count)
        apply_gate_rows(amps, gate)
    return CoherentField(amps)
