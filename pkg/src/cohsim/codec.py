"""Images as phase-distributed multimode coherent states, and their retrieval.

Pixel intensities become phases in [0, pi/2]; pixel k lives in optical mode k
(row-major, x fastest). Retrieval interferes every pixel mode with an
auxiliary beam on a 50:50 splitter and reads the photon number of the
difference port.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .network import NetworkPlan, chop
from .optics import CoherentField, DomainError, PhaseShifter, apply_gates

HALF_PI = math.pi / 2
ANGLE_FAULT = 0.1
RATIO_TOL = 1e-9


@dataclass(frozen=True)
class GrayImage:
    """Integer labels in [0, 2**bits - 1]; ``pixels`` has shape (height, width)."""

    pixels: np.ndarray
    bits: int

    def __post_init__(self):
        px = np.array(self.pixels, dtype=np.int64, copy=True)
        if px.ndim != 2 or px.size == 0:
            raise DomainError("pixels must be a non-empty 2-D grid")
        if self.bits < 1:
            raise DomainError("bits per pixel must be positive")
        if px.min() < 0 or px.max() > self.maxval:
            raise DomainError(f"pixel labels must lie in [0, {self.maxval}]")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def maxval(self) -> int:
        return 2**self.bits - 1

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def normalized(self) -> np.ndarray:
        return self.pixels / self.maxval

    def to_phase_image(self) -> "PhaseImage":
        return PhaseImage(self.width, self.height, intensity_to_angle(self.pixels.reshape(-1), self.bits))


@dataclass(frozen=True)
class PhaseImage:
    width: int
    height: int
    thetas: np.ndarray

    def __post_init__(self):
        th = np.array(self.thetas, dtype=float, copy=True).reshape(-1)
        if self.width < 1 or self.height < 1:
            raise DomainError("image dimensions must be positive")
        if th.size != self.width * self.height:
            raise DomainError(f"expected {self.width * self.height} phases, got {th.size}")
        if not np.all((th >= 0.0) & (th <= HALF_PI)):
            raise DomainError("phases must lie in [0, pi/2]")
        th.setflags(write=False)
        object.__setattr__(self, "thetas", th)

    @property
    def size(self) -> int:
        return self.thetas.size

    @property
    def shape(self) -> tuple[int, int]:
        return self.width, self.height

    @classmethod
    def from_normalized(cls, values: np.ndarray) -> "PhaseImage":
        """Continuous values in [0, 1] (shape (height, width)) mapped to theta = v * pi/2."""
        v = np.asarray(values, dtype=float)
        if v.ndim != 2:
            raise DomainError("expected a 2-D array of normalized values")
        return cls(v.shape[1], v.shape[0], np.clip(v, 0.0, 1.0).reshape(-1) * HALF_PI)

    def normalized(self) -> np.ndarray:
        return (self.thetas / HALF_PI).reshape(self.height, self.width)

    def to_json(self) -> dict:
        return {"width": self.width, "height": self.height, "thetas": [float(t) for t in self.thetas]}

    @classmethod
    def from_json(cls, obj: dict) -> "PhaseImage":
        return cls(int(obj["width"]), int(obj["height"]), np.asarray(obj["thetas"], dtype=float))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


@dataclass(frozen=True)
class EncodingParams:
    per_mode_amplitude: float
    bits: int = 1
    auxiliary_phase: float = 0.0
    overlap_target: float = 0.1

    def __post_init__(self):
        if not (self.per_mode_amplitude > 0 and math.isfinite(self.per_mode_amplitude**2)):
            raise DomainError("per-mode amplitude must be positive and finite")
        if not 0.0 < self.overlap_target < 1.0:
            raise DomainError("overlap target must lie in (0, 1)")
        if self.bits < 1:
            raise DomainError("bits per pixel must be positive")

    @classmethod
    def optimal(cls, bits: int, overlap_target: float = 0.1, auxiliary_phase: float = 0.0) -> "EncodingParams":
        return cls(optimal_amplitude(bits, overlap_target), bits, auxiliary_phase, overlap_target)

    @property
    def intensity(self) -> float:
        """Per-mode mean photon number a**2."""
        return self.per_mode_amplitude**2


@dataclass(frozen=True)
class Expectation:
    """Use exact mean photon numbers."""


@dataclass(frozen=True)
class Sampled:
    """Average ``shots`` Poisson photon counts per mode, seeded by ``seed``."""

    seed: int
    shots: int = 1

    def __post_init__(self):
        if self.shots < 1:
            raise DomainError("shots must be >= 1")


EXPECTATION = Expectation()
MeasurementMode = Union[Expectation, Sampled]


@dataclass(frozen=True)
class MeasurementRecord:
    expected_n: float
    shot_noise: float
    sampled_n: Optional[tuple[int, ...]] = None
    rng_seed: Optional[int] = None
    measured_n: float = field(default=0.0)

    @classmethod
    def from_mean(cls, mean: float, **kw) -> "MeasurementRecord":
        mean = max(float(mean), 0.0)
        kw.setdefault("measured_n", mean)
        return cls(mean, math.sqrt(mean), **kw)


def intensity_to_angle(s, bits: int):
    """theta_s = (pi/2) * s / (2**bits - 1); accepts scalars or arrays."""
    if bits < 1:
        raise DomainError("bits per pixel must be positive")
    maxval = 2**bits - 1
    arr = np.asarray(s)
    if np.any(arr < 0) or np.any(arr > maxval):
        raise DomainError(f"label outside [0, {maxval}]")
    theta = HALF_PI * (arr / maxval)
    return float(theta) if np.ndim(theta) == 0 else theta


def angle_to_intensity(theta, bits: int):
    """Nearest label to ``theta``; raises if theta is far outside [0, pi/2]."""
    maxval = 2**bits - 1
    arr = np.asarray(theta, dtype=float)
    if np.any(arr < -ANGLE_FAULT) or np.any(arr > HALF_PI + ANGLE_FAULT):
        raise DomainError("decoded angle far outside [0, pi/2]; upstream decode fault")
    labels = np.clip(np.rint(arr * maxval / HALF_PI), 0, maxval).astype(np.int64)
    return int(labels) if labels.ndim == 0 else labels


def _as_phase_image(img: Union[GrayImage, PhaseImage]) -> PhaseImage:
    return img.to_phase_image() if isinstance(img, GrayImage) else img


def encode_image(
    img: Union[GrayImage, PhaseImage],
    params: EncodingParams,
    plan: Optional[NetworkPlan] = None,
) -> CoherentField:
    """Mode k carries per_mode_amplitude * exp(i theta_k).

    Without a plan the chopped field is written down directly. With one, a
    source of amplitude a*sqrt(T) is chopped through the splitter network
    and then a layer of phase shifters imprints the pixels.
    """
    phases = _as_phase_image(img)
    a = params.per_mode_amplitude
    if plan is None:
        return CoherentField(a * np.exp(1j * phases.thetas))
    if plan.mode_count != phases.size:
        raise DomainError(f"plan has {plan.mode_count} modes, image has {phases.size} pixels")
    chopped = chop(a * math.sqrt(phases.size), plan)
    shifters = [PhaseShifter(k, float(t)) for k, t in enumerate(phases.thetas, start=1)]
    return apply_gates(chopped, shifters)


def point_transform(field: CoherentField, k: int, delta_theta: float) -> CoherentField:
    if not 1 <= k <= field.mode_count:
        raise DomainError(f"mode index {k} outside [1, {field.mode_count}]")
    amps = field.amplitudes.copy()
    amps[k - 1] *= np.exp(1j * delta_theta)
    return CoherentField(amps)


def global_transform(alpha_in: complex, delta_theta: float, plan: NetworkPlan) -> CoherentField:
    """A single phase shifter ahead of the chopper shifts every daughter by delta_theta."""
    return chop(np.exp(1j * delta_theta) * alpha_in, plan)


def interfere_with_auxiliary(pixel_mode: complex, aux_mode: complex) -> tuple[complex, complex]:
    root2 = math.sqrt(2.0)
    a, b = complex(pixel_mode), complex(aux_mode)
    return (a + b) / root2, (a - b) / root2


def expected_pixel_signal(theta_k, params: EncodingParams):
    """Mean photon number at the difference port: a**2 * (1 - cos(theta_k - theta_r))."""
    n = params.intensity * (1.0 - np.cos(np.asarray(theta_k, dtype=float) - params.auxiliary_phase))
    return float(n) if np.ndim(n) == 0 else n


def _mode_rng(seed: int, mode: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, mode])


def sample_counts(mean: float, size: int, seed: int) -> np.ndarray:
    """``size`` Poisson photon counts of the given mean from one seeded stream."""
    if mean < 0:
        raise DomainError("mean photon number must be non-negative")
    return np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF).poisson(mean, size=size)


def sample_pixel_signal(theta_k: float, params: EncodingParams, seed: int) -> int:
    return int(sample_counts(expected_pixel_signal(theta_k, params), 1, seed)[0])


def difference_port_counts(
    field: CoherentField, reference: CoherentField, mode: MeasurementMode = EXPECTATION
) -> tuple[np.ndarray, np.ndarray]:
    """Mix ``field`` and ``reference`` mode by mode on 50:50 splitters.

    Returns (mean photon number, measured photon number) at each difference
    port. Sampled mode k draws ``shots`` Poisson counts from its own
    substream keyed by (seed, k), so results do not depend on evaluation order.
    """
    if field.mode_count != reference.mode_count:
        raise DomainError("fields differ in mode count")
    means = np.abs((field.amplitudes - reference.amplitudes) / math.sqrt(2.0)) ** 2
    if isinstance(mode, Expectation):
        return means, means
    measured = np.array(
        [_mode_rng(mode.seed, k).poisson(m, size=mode.shots).mean() for k, m in enumerate(means, start=1)]
    )
    return means, measured


def measure_difference_ports(
    field: CoherentField, reference: CoherentField, mode: MeasurementMode = EXPECTATION
) -> list[MeasurementRecord]:
    """Per-mode records of :func:`difference_port_counts`, keeping the raw sampled counts."""
    if field.mode_count != reference.mode_count:
        raise DomainError("fields differ in mode count")
    means, _ = difference_port_counts(field, reference, EXPECTATION)
    if isinstance(mode, Expectation):
        return [MeasurementRecord.from_mean(m) for m in means]
    records = []
    for k, m in enumerate(means, start=1):
        counts = _mode_rng(mode.seed, k).poisson(m, size=mode.shots)
        records.append(
            MeasurementRecord.from_mean(
                m, sampled_n=tuple(int(c) for c in counts), rng_seed=mode.seed, measured_n=float(counts.mean())
            )
        )
    return records


def auxiliary_field(params: EncodingParams, mode_count: int) -> CoherentField:
    return CoherentField(np.full(mode_count, params.per_mode_amplitude * np.exp(1j * params.auxiliary_phase)))


def decode_phases(measured_n: np.ndarray, params: EncodingParams) -> np.ndarray:
    """Invert n = a**2 (1 - cos(theta - theta_r)) for theta, clamped to [0, pi/2]."""
    ratio = np.asarray(measured_n, dtype=float) / params.intensity
    if np.any(ratio > 2.0 + RATIO_TOL):
        raise DomainError("measured photon number exceeds 2 a**2; field and params are inconsistent")
    theta = params.auxiliary_phase + np.arccos(np.clip(1.0 - ratio, -1.0, 1.0))
    return np.clip(theta, 0.0, HALF_PI)


def retrieve_image(
    field: CoherentField,
    params: EncodingParams,
    mode: MeasurementMode = EXPECTATION,
    shape: Optional[tuple[int, int]] = None,
) -> tuple[GrayImage, list[MeasurementRecord]]:
    """Recover the label image from a phase-encoded field.

    ``shape`` is (width, height); a single row is assumed when omitted.
    """
    T = field.mode_count
    width, height = shape if shape is not None else (T, 1)
    if width * height != T:
        raise DomainError(f"shape {width}x{height} does not match {T} modes")
    records = measure_difference_ports(field, auxiliary_field(params, T), mode)
    n = np.array([r.measured_n for r in records])
    labels = angle_to_intensity(decode_phases(n, params), params.bits)
    return GrayImage(np.asarray(labels).reshape(height, width), params.bits), records


def optimal_amplitude(bits: int, overlap_target: float = 0.1) -> float:
    """Per-mode amplitude at which adjacent labels overlap by ``overlap_target`` after the splitter.

    Solves exp(-a**2 (1 - cos(pi / (2 (2**bits - 1))))) = overlap_target.
    """
    if bits < 1:
        raise DomainError("bits per pixel must be positive")
    if not 0.0 < overlap_target < 1.0:
        raise DomainError("overlap target must lie in (0, 1)")
    step = HALF_PI / (2**bits - 1)
    return math.sqrt(-math.log(overlap_target) / (1.0 - math.cos(step)))
