"""Command-line driver: ``cohsim <subcommand> ...``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .codec import (
    EXPECTATION,
    EncodingParams,
    PhaseImage,
    Sampled,
    encode_image,
    optimal_amplitude,
    retrieve_image,
)
from .experiments import (
    ExperimentConfig,
    PerturbationSpec,
    SweepSpec,
    iqa_table,
    perturbation_csv,
    perturbation_ranking,
    sensitivity_sweep,
)
from .optics import CoherentField, DomainError
from .pgm import PGMError, read_pgm, write_pgm
from .similarity import (
    Exhaustive,
    ImageDatabase,
    Stochastic,
    cosine_similarity_measured,
    rank_database,
    reports_to_csv,
    reports_to_json,
)


def load_phase_image(path: str) -> PhaseImage:
    pixels, maxval = read_pgm(path)
    return PhaseImage.from_normalized(pixels / maxval)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _params(args) -> EncodingParams:
    bits = getattr(args, "bits", None) or 1
    overlap = getattr(args, "overlap", None) or 0.1
    if getattr(args, "amplitude", None) is not None:
        return EncodingParams(args.amplitude, bits, overlap_target=overlap)
    return EncodingParams.optimal(bits, overlap)


def _mode(args):
    if getattr(args, "mode", "expectation") == "sampled":
        return Sampled(args.seed, args.shots)
    return EXPECTATION


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    noise = cfg.noise
    changes = {k: v for k, v in (("sigma", args.sigma), ("layers", args.layers), ("seed", args.seed), ("mean", args.mean)) if v is not None}
    if changes:
        noise = dataclasses.replace(noise, **changes)
    updates = {"noise": noise}
    if args.reference:
        updates["reference_path"] = args.reference
    if args.amplitude is not None or args.bits is not None:
        updates["encoding"] = _params(args)
    if args.out:
        updates["output_path"] = args.out
    return dataclasses.replace(cfg, **updates)


def cmd_amplitude(args) -> None:
    a = optimal_amplitude(args.bits, args.overlap)
    print(json.dumps({"bits": args.bits, "overlap": args.overlap, "amplitude": a, "amplitude_squared": a * a}))


def cmd_encode(args) -> None:
    image = load_phase_image(args.image)
    params = _params(args)
    field = encode_image(image, params)
    doc = image.to_json()
    doc["per_mode_amplitude"] = params.per_mode_amplitude
    doc["bits"] = params.bits
    doc["amplitudes"] = [[float(z.real), float(z.imag)] for z in field.amplitudes]
    _emit(json.dumps(doc) + "\n", args.out)


def cmd_retrieve(args) -> None:
    doc = json.loads(Path(args.field).read_text())
    pairs = np.asarray(doc["amplitudes"], dtype=float)
    field = CoherentField(pairs[:, 0] + 1j * pairs[:, 1])
    bits = args.bits or int(doc.get("bits", 1))
    amplitude = args.amplitude if args.amplitude is not None else float(doc["per_mode_amplitude"])
    params = EncodingParams(amplitude, bits)
    image, records = retrieve_image(field, params, _mode(args), shape=(int(doc["width"]), int(doc["height"])))
    if not args.out:
        raise DomainError("retrieve needs --out for the PGM image")
    write_pgm(args.out, image.pixels, image.maxval)
    total = sum(r.measured_n for r in records)
    print(json.dumps({"out": args.out, "modes": len(records), "measured_total_n": total}))


def cmd_similarity(args) -> None:
    a, b = load_phase_image(args.a), load_phase_image(args.b)
    report = cosine_similarity_measured(a, b, _params(args), _mode(args), pair_id=(Path(args.a).stem, Path(args.b).stem))
    _emit(reports_to_json([report]) + "\n" if args.json else reports_to_csv([report]), args.out)


def cmd_rank(args) -> None:
    reference = load_phase_image(args.reference)
    entries = [load_phase_image(p) for p in args.database]
    db = ImageDatabase(tuple(entries), tuple(Path(p).stem for p in args.database))
    if args.strategy == "stochastic":
        max_runs = args.max_runs or 50 * len(db) * max(1, int(np.ceil(np.log(max(len(db), 2)))))
        strategy = Stochastic(max_runs, args.seed)
    else:
        strategy = Exhaustive()
    ranking = rank_database(db, reference, _params(args), strategy)
    if not ranking.complete:
        print(f"warning: partial ranking, unobserved entries {list(ranking.missing)}", file=sys.stderr)
    _emit(reports_to_csv(ranking.reports), args.out)


def cmd_iqa(args) -> None:
    cfg = _config(args)
    reports, text = iqa_table(cfg)
    _emit(text, cfg.output_path)
    if args.report:
        Path(args.report).write_text(reports_to_json(reports) + "\n")


def cmd_sweep(args) -> None:
    cfg = _config(args)
    sweep = cfg.sweep or SweepSpec(0.01, 1.0, 20)
    changes = {
        k: v
        for k, v in (("sigma_min", args.sigma_min), ("sigma_max", args.sigma_max), ("steps", args.steps), ("seeds", args.seeds))
        if v is not None
    }
    cfg = dataclasses.replace(cfg, sweep=dataclasses.replace(sweep, **changes))
    _, text = sensitivity_sweep(cfg)
    _emit(text, cfg.output_path)


def cmd_perturb(args) -> None:
    cfg = _config(args)
    spec = cfg.perturbation or PerturbationSpec(0.2, 1e-14, 10)
    changes = {k: v for k, v in (("sigma0", args.sigma0), ("delta_sigma", args.delta), ("count", args.count)) if v is not None}
    spec = dataclasses.replace(spec, **changes)
    cfg = dataclasses.replace(cfg, perturbation=spec)
    result = perturbation_ranking(cfg)
    _emit(perturbation_csv(result, spec.sigma0, spec.delta_sigma), cfg.output_path)
    status = {"status": result.status, "strict": result.strict}
    if not result.strict:
        status["smallest_strict_delta"] = result.smallest_strict_delta
    print(json.dumps(status), file=sys.stderr)


def _encoding_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--amplitude", type=float, help="per-mode coherent amplitude a (default: optimal for --bits)")
    p.add_argument("--bits", type=int, help="bits per pixel (default 1)")
    p.add_argument("--overlap", type=float, help="adjacent-label overlap target (default 0.1)")


def _measure_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["expectation", "sampled"], default="expectation")
    p.add_argument("--shots", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--reference", help="reference PGM (default: bundled 64x64 image)")
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--sigma", type=float)
    p.add_argument("--mean", type=float)
    p.add_argument("--layers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    _encoding_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cohsim", description="Coherent-state image similarity simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("amplitude", help="optimal per-mode amplitude for a bit depth")
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--overlap", type=float, default=0.1)
    p.set_defaults(func=cmd_amplitude)

    p = sub.add_parser("encode", help="encode a PGM image as a coherent field (JSON)")
    p.add_argument("image")
    p.add_argument("--out")
    _encoding_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("retrieve", help="retrieve a PGM image from an encoded field")
    p.add_argument("field")
    p.add_argument("--out")
    p.add_argument("--amplitude", type=float)
    p.add_argument("--bits", type=int)
    _measure_flags(p)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("similarity", help="cosine similarity and MSE of two PGM images")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    _encoding_flags(p)
    _measure_flags(p)
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("rank", help="rank database images against a reference")
    p.add_argument("reference")
    p.add_argument("database", nargs="+")
    p.add_argument("--strategy", choices=["exhaustive", "stochastic"], default="exhaustive")
    p.add_argument("--max-runs", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    _encoding_flags(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("iqa", help="layered-noise quality table (cosine vs MSE)")
    _experiment_flags(p)
    p.add_argument("--report", help="also write a JSON report here")
    p.set_defaults(func=cmd_iqa)

    p = sub.add_parser("sweep", help="seed-averaged cosine over a sigma grid")
    _experiment_flags(p)
    p.add_argument("--sigma-min", type=float)
    p.add_argument("--sigma-max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--seeds", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("perturb", help="ranking under infinitesimal sigma increments")
    _experiment_flags(p)
    p.add_argument("--sigma0", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--count", type=int)
    p.set_defaults(func=cmd_perturb)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (DomainError, PGMError, OSError, ValueError, KeyError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
