"""Noise-distortion experiments: layered-noise IQA tables, sigma sweeps and micro-perturbation ranking."""

from __future__ import annotations

import csv
import io
import json
import math
import string
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .codec import EncodingParams, PhaseImage
from .optics import DomainError
from .pgm import PathLike, read_pgm
from .similarity import (
    ImageDatabase,
    SimilarityReport,
    cosine_similarity,
    cosine_similarity_measured,
    fmt,
    reports_to_csv,
)

SEED_MASK = 0xFFFFFFFFFFFFFFFF


class DegenerateImageWarning(RuntimeWarning):
    """Min-max normalization of a constant image is undefined; pixels were set to 0."""


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    layers: int = 1
    seed: int = 0
    mean: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        if self.layers < 1:
            raise DomainError("layers must be >= 1")


@dataclass(frozen=True)
class SweepSpec:
    sigma_min: float
    sigma_max: float
    steps: int
    seeds: int = 20

    def __post_init__(self):
        if not 0 < self.sigma_min <= self.sigma_max:
            raise DomainError("sweep bounds must be positive and ordered")
        if self.steps < 1 or self.seeds < 1:
            raise DomainError("steps and seeds must be >= 1")

    def grid(self) -> np.ndarray:
        return np.linspace(self.sigma_min, self.sigma_max, self.steps)


@dataclass(frozen=True)
class PerturbationSpec:
    sigma0: float
    delta_sigma: float
    count: int = 10

    def __post_init__(self):
        if not self.delta_sigma > 0:
            raise DomainError("delta_sigma must be positive")
        if self.count < 1:
            raise DomainError("count must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    reference_path: Optional[str] = None
    output_path: Optional[str] = None
    encoding: EncodingParams = field(default_factory=lambda: EncodingParams.optimal(1))
    noise: NoiseSpec = field(default_factory=lambda: NoiseSpec(sigma=0.1, layers=10))
    sweep: Optional[SweepSpec] = None
    perturbation: Optional[PerturbationSpec] = None

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        enc = obj.get("encoding")
        if enc is None:
            encoding = EncodingParams.optimal(1)
        elif "per_mode_amplitude" in enc:
            encoding = EncodingParams(**enc)
        else:
            encoding = EncodingParams.optimal(enc.get("bits", 1), enc.get("overlap_target", 0.1), enc.get("auxiliary_phase", 0.0))
        sweep = obj.get("sweep")
        pert = obj.get("perturbation")
        return cls(
            reference_path=obj.get("reference_path"),
            output_path=obj.get("output_path"),
            encoding=encoding,
            noise=NoiseSpec(**obj["noise"]) if "noise" in obj else NoiseSpec(sigma=0.1, layers=10),
            sweep=SweepSpec(**sweep) if sweep else None,
            perturbation=PerturbationSpec(**pert) if pert else None,
        )

    @classmethod
    def load(cls, path: PathLike) -> "ExperimentConfig":
        return cls.from_json(json.loads(Path(path).read_text()))


def standard_normal(shape, seed: int) -> np.ndarray:
    """Box-Muller normals from PCG64 uniforms.

    z = sqrt(-2 ln(1 - u1)) * cos(2 pi u2), with (u1, u2) the first and second
    halves of one uniform draw of length 2n.
    """
    n = int(np.prod(shape))
    u = np.random.default_rng(seed & SEED_MASK).random(2 * n)
    z = np.sqrt(-2.0 * np.log1p(-u[:n])) * np.cos(2.0 * math.pi * u[n:])
    return z.reshape(shape)


def minmax(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    lo, hi = v.min(), v.max()
    if hi == lo:
        warnings.warn("constant image: min-max undefined, mapping all pixels to 0", DegenerateImageWarning, stacklevel=2)
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def add_gaussian_noise_layer(img: np.ndarray, mean: float, sigma: float, seed: int) -> np.ndarray:
    """Add i.i.d. N(mean, sigma^2) noise per pixel, then min-max back into [0, 1]."""
    x = np.asarray(img, dtype=float)
    if x.size and (x.min() < 0 or x.max() > 1):
        raise DomainError("image values must lie in [0, 1]")
    return minmax(x + mean + sigma * standard_normal(x.shape, seed))


def layer_seed(seed: int, layer: int) -> int:
    return int(np.random.SeedSequence([seed & SEED_MASK, layer]).generate_state(1, np.uint64)[0])


def layer_labels(n: int) -> tuple[str, ...]:
    letters = string.ascii_uppercase
    return tuple(letters[i] if n <= 26 else f"L{i + 1}" for i in range(n))


def layered_images(reference: np.ndarray, spec: NoiseSpec) -> list[np.ndarray]:
    images = []
    current = np.asarray(reference, dtype=float)
    for layer in range(1, spec.layers + 1):
        current = add_gaussian_noise_layer(current, spec.mean, spec.sigma, layer_seed(spec.seed, layer))
        images.append(current)
    return images


def build_layered_database(reference: np.ndarray, spec: NoiseSpec) -> ImageDatabase:
    """Entry m is entry m-1 with one more noise layer; entry 0 (the reference) is not stored."""
    images = layered_images(reference, spec)
    return ImageDatabase(tuple(PhaseImage.from_normalized(im) for im in images), layer_labels(len(images)))


def bundled_reference_path() -> Path:
    return Path(str(resources.files("cohsim") / "data" / "reference64.pgm"))


def load_reference(path: Optional[PathLike] = None) -> np.ndarray:
    """Reference image min-max normalized into [0, 1]."""
    p = Path(path) if path is not None else bundled_reference_path()
    try:
        pixels, _ = read_pgm(p)
    except OSError as exc:
        raise OSError(f"cannot read reference image {p}: {exc.strerror or exc}") from exc
    return minmax(pixels.astype(float))


def iqa_table(
    config: ExperimentConfig, reference: Optional[np.ndarray] = None
) -> tuple[list[SimilarityReport], str]:
    """Rows R-R, R-A, ... with cosine (via simulated photon counting) and MSE, plus CSV text."""
    ref = load_reference(config.reference_path) if reference is None else np.asarray(reference, dtype=float)
    ref_phase = PhaseImage.from_normalized(ref)
    db = build_layered_database(ref, config.noise)
    reports = [cosine_similarity_measured(ref_phase, ref_phase, config.encoding, pair_id=("R", "R"))]
    for label, entry in zip(db.labels, db.entries):
        reports.append(cosine_similarity_measured(ref_phase, entry, config.encoding, pair_id=("R", label)))
    return reports, reports_to_csv(reports)


def is_table_shaped(reports: Sequence[SimilarityReport]) -> bool:
    """Cosine strictly falls and MSE strictly rises down the table."""
    cos = np.array([r.cosine for r in reports])
    err = np.array([r.mse for r in reports])
    return bool(np.all(np.diff(cos) < 0) and np.all(np.diff(err) > 0))


def sweep_seed(seed: int, step: int, rep: int) -> int:
    return int(np.random.SeedSequence([seed & SEED_MASK, step, rep]).generate_state(1, np.uint64)[0])


def sensitivity_sweep(
    config: ExperimentConfig, reference: Optional[np.ndarray] = None
) -> tuple[list[tuple[float, float]], str]:
    """Seed-averaged cosine of one noise layer at each sigma of the sweep grid."""
    if config.sweep is None:
        raise DomainError("config has no sweep")
    ref = load_reference(config.reference_path) if reference is None else np.asarray(reference, dtype=float)
    ref_phase = PhaseImage.from_normalized(ref)
    curve = []
    for step, sigma in enumerate(config.sweep.grid()):
        values = [
            cosine_similarity(
                ref_phase,
                PhaseImage.from_normalized(
                    add_gaussian_noise_layer(ref, config.noise.mean, float(sigma), sweep_seed(config.noise.seed, step, rep))
                ),
            )
            for rep in range(config.sweep.seeds)
        ]
        curve.append((float(sigma), math.fsum(values) / len(values)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sigma", "cosine_similarity"])
    for sigma, c in curve:
        w.writerow([fmt(sigma), fmt(c)])
    return curve, buf.getvalue()


@dataclass(frozen=True)
class PerturbationRow:
    sigma: float
    cosine: float
    rank: int


@dataclass(frozen=True)
class PerturbationResult:
    rows: tuple[PerturbationRow, ...]
    strict: bool
    smallest_strict_delta: Optional[float]

    @property
    def status(self) -> str:
        return "ok" if self.strict else "resolution exceeded"


def perturbed_cosines(
    reference: np.ndarray, noise_field: np.ndarray, sigmas: Sequence[float], mean: float = 0.0
) -> list[float]:
    """Cosine vs reference of minmax(reference + mean + sigma * Z) for one fixed field Z."""
    ref_phase = PhaseImage.from_normalized(reference)
    return [
        cosine_similarity(ref_phase, PhaseImage.from_normalized(minmax(reference + mean + s * noise_field)))
        for s in sigmas
    ]


def _strict(cosines: Sequence[float]) -> bool:
    return all(a > b for a, b in zip(cosines, cosines[1:]))


def perturbation_sigmas(sigma0: float, delta: float, count: int) -> list[float]:
    return [sigma0 + i * delta for i in range(count + 1)]


def smallest_strict_delta(
    reference: np.ndarray,
    noise_field: np.ndarray,
    sigma0: float,
    count: int,
    mean: float = 0.0,
    lo_exp: float = -18.0,
    hi_exp: float = -1.0,
    iterations: int = 30,
) -> Optional[float]:
    """Smallest delta (log-bisected) at which the count+1 cosines still fall strictly."""

    def ok(exp: float) -> bool:
        return _strict(perturbed_cosines(reference, noise_field, perturbation_sigmas(sigma0, 10.0**exp, count), mean))

    if not ok(hi_exp):
        return None
    if ok(lo_exp):
        return 10.0**lo_exp
    lo, hi = lo_exp, hi_exp
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return 10.0**hi


def perturbation_ranking(config: ExperimentConfig, reference: Optional[np.ndarray] = None) -> PerturbationResult:
    """Rank images distorted at sigma0 + i*delta by cosine, sharing one noise field across all i."""
    if config.perturbation is None:
        raise DomainError("config has no perturbation spec")
    spec = config.perturbation
    ref = load_reference(config.reference_path) if reference is None else np.asarray(reference, dtype=float)
    z = standard_normal(ref.shape, config.noise.seed)
    sigmas = perturbation_sigmas(spec.sigma0, spec.delta_sigma, spec.count)
    cosines = perturbed_cosines(ref, z, sigmas, config.noise.mean)
    order = sorted(range(len(cosines)), key=lambda i: (-cosines[i], i))
    ranks = [0] * len(cosines)
    for r, i in enumerate(order, start=1):
        ranks[i] = r
    rows = tuple(PerturbationRow(s, c, r) for s, c, r in zip(sigmas, cosines, ranks))
    strict = _strict(cosines)
    smallest = None if strict else smallest_strict_delta(ref, z, spec.sigma0, spec.count, config.noise.mean)
    return PerturbationResult(rows, strict, smallest)


def perturbation_csv(result: PerturbationResult, sigma0: float, delta: float) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["noise_level", "sigma", "cosine_similarity", "ranking"])
    for i, row in enumerate(result.rows):
        w.writerow([f"{fmt(sigma0)}+{i}*{fmt(delta)}", repr(row.sigma), repr(row.cosine), row.rank])
    return buf.getvalue()


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    from scipy.stats import spearmanr

    return float(spearmanr(x, y).statistic)

