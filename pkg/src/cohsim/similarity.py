"""Cosine-similarity metric, the MSE baseline, and the indexed-database protocol."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .codec import (
    EXPECTATION,
    EncodingParams,
    MeasurementMode,
    PhaseImage,
    difference_port_counts,
    encode_image,
)
from .optics import CoherentField, DomainError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ImageDatabase:
    entries: tuple[PhaseImage, ...]
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise DomainError("an image database needs at least one entry")
        shape = entries[0].shape
        if any(e.shape != shape for e in entries):
            raise DomainError("database entries must share width and height")
        labels = tuple(self.labels) if self.labels is not None else tuple(str(m) for m in range(1, len(entries) + 1))
        if len(labels) != len(entries):
            raise DomainError("one label per entry")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries[0].shape


@dataclass(frozen=True)
class SimilarityReport:
    pair_id: tuple[str, str]
    cosine: float
    mse: float
    measured_total_n: float
    runs_used: int = 1
    index: Optional[int] = None


@dataclass(frozen=True)
class DatabaseRunOutcome:
    detected_index: int
    report: SimilarityReport
    seed: int


@dataclass(frozen=True)
class Exhaustive:
    pass


@dataclass(frozen=True)
class Stochastic:
    max_runs: int
    seed: int


RankStrategy = Union[Exhaustive, Stochastic]


@dataclass(frozen=True)
class Ranking:
    """Reports sorted by descending cosine; ``complete`` is False if some entries were never sampled."""

    reports: tuple[SimilarityReport, ...]
    complete: bool
    runs: int
    missing: tuple[int, ...] = ()

    def order(self) -> list[int]:
        return [r.index for r in self.reports]


def _check_same(a: PhaseImage, b: PhaseImage) -> None:
    if a.shape != b.shape:
        raise DomainError(f"image dimensions differ: {a.shape} vs {b.shape}")


def cosine_similarity(a: PhaseImage, b: PhaseImage) -> float:
    """(1/T) sum_k cos(theta_k - theta'_k)."""
    _check_same(a, b)
    # numpy's contiguous sum is pairwise, which keeps rounding well below 1e-15 * T
    return float(np.sum(np.cos(a.thetas - b.thetas)) / a.size)


def mse(a, b) -> float:
    """Mean squared difference of two normalized images (arrays or PhaseImages)."""
    x = a.normalized() if isinstance(a, PhaseImage) else np.asarray(a, dtype=float)
    y = b.normalized() if isinstance(b, PhaseImage) else np.asarray(b, dtype=float)
    if x.shape != y.shape:
        raise DomainError(f"image dimensions differ: {x.shape} vs {y.shape}")
    return float(np.mean((x - y) ** 2))


def _report_from_fields(
    field: CoherentField,
    reference_field: CoherentField,
    a: PhaseImage,
    b: PhaseImage,
    params: EncodingParams,
    mode: MeasurementMode,
    pair_id: tuple[str, str],
    index: Optional[int] = None,
) -> SimilarityReport:
    _, measured = difference_port_counts(field, reference_field, mode)
    total_n = math.fsum(measured)
    source_intensity = a.size * params.intensity
    return SimilarityReport(
        pair_id=pair_id,
        cosine=1.0 - total_n / source_intensity,
        mse=mse(a, b),
        measured_total_n=total_n,
        index=index,
    )


def cosine_similarity_measured(
    a: PhaseImage,
    b: PhaseImage,
    params: EncodingParams,
    mode: MeasurementMode = EXPECTATION,
    pair_id: tuple[str, str] = ("a", "b"),
) -> SimilarityReport:
    """Similarity read off T difference-port photon counts.

    Both images are encoded at per-mode amplitude a, so the source intensity
    is T * a**2 and cosine = 1 - sum(n_k) / (T * a**2).
    """
    _check_same(a, b)
    return _report_from_fields(encode_image(a, params), encode_image(b, params), a, b, params, mode, pair_id)


def cross_kerr_apply(control_photon_present: bool, target: complex, theta: float) -> complex:
    """Ideal cross-Kerr gate: phase exp(i theta) on the target iff the control holds a photon."""
    return complex(target) * complex(np.exp(1j * theta)) if control_photon_present else complex(target)


def detect_index(M: int, seed: int) -> int:
    """Which of M index-mode detectors clicks for a single photon spread evenly over them."""
    return int(np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF).integers(1, M + 1))


def database_single_run(
    db: ImageDatabase,
    reference: PhaseImage,
    params: EncodingParams,
    seed: int,
    mode: MeasurementMode = EXPECTATION,
) -> DatabaseRunOutcome:
    _check_same(db.entries[0], reference)
    x = detect_index(len(db), seed)
    image = db.entries[x - 1]
    chopped = np.full(image.size, params.per_mode_amplitude, dtype=np.complex128)
    # only the Kerr gates conditioned on detector x fire
    pixel_modes = CoherentField(
        np.array([cross_kerr_apply(True, c, t) for c, t in zip(chopped, image.thetas)], dtype=np.complex128)
    )
    reference_field = encode_image(reference, params)
    report = _report_from_fields(
        pixel_modes, reference_field, image, reference, params, mode, ("R", db.labels[x - 1]), index=x
    )
    return DatabaseRunOutcome(x, report, seed)


def derive_seed(seed: int, n: int) -> int:
    return int(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, n]).generate_state(1, np.uint64)[0])


def _sorted(reports: Sequence[SimilarityReport]) -> tuple[SimilarityReport, ...]:
    return tuple(sorted(reports, key=lambda r: (-r.cosine, r.index)))


def rank_database(
    db: ImageDatabase,
    reference: PhaseImage,
    params: EncodingParams,
    strategy: RankStrategy = Exhaustive(),
) -> Ranking:
    """Order database entries by similarity to ``reference``; ties go to the lower index."""
    _check_same(db.entries[0], reference)
    M = len(db)
    if isinstance(strategy, Exhaustive):
        reports = []
        ref_field = encode_image(reference, params)
        for m, entry in enumerate(db.entries, start=1):
            reports.append(
                _report_from_fields(
                    encode_image(entry, params), ref_field, entry, reference, params, EXPECTATION, ("R", db.labels[m - 1]), m
                )
            )
        return Ranking(_sorted(reports), complete=True, runs=M)

    seen: dict[int, SimilarityReport] = {}
    runs = 0
    while len(seen) < M and runs < strategy.max_runs:
        outcome = database_single_run(db, reference, params, derive_seed(strategy.seed, runs))
        runs += 1
        seen.setdefault(outcome.detected_index, outcome.report)
    reports = [
        SimilarityReport(r.pair_id, r.cosine, r.mse, r.measured_total_n, runs_used=runs, index=r.index)
        for r in seen.values()
    ]
    missing = tuple(m for m in range(1, M + 1) if m not in seen)
    if missing:
        log.warning("stochastic ranking saw %d of %d entries after %d runs", len(seen), M, runs)
    return Ranking(_sorted(reports), complete=not missing, runs=runs, missing=missing)


def fmt(x: float) -> str:
    """Fixed 15-significant-digit formatting used by every report."""
    return format(x, ".15g")


def reports_to_csv(reports: Sequence[SimilarityReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sl_no", "image_pair", "cosine_similarity", "mean_square_error"])
    for n, r in enumerate(reports, start=1):
        w.writerow([n, "-".join(r.pair_id), fmt(r.cosine), fmt(r.mse)])
    return buf.getvalue()


def reports_to_json(reports: Sequence[SimilarityReport]) -> str:
    rows = []
    for r in reports:
        d = asdict(r)
        d["pair_id"] = list(r.pair_id)
        rows.append(d)
    return json.dumps(rows, indent=2)
