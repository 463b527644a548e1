"""Command-line interface for the full pipeline.

Subcommands: phantom-gen, mask-gen, train, reconstruct, evaluate, ablate,
baseline. Every run is deterministic given its flags and seeds. Exit codes:
0 on success, 1 on runtime/I-O failures (one-line diagnostic on stderr),
2 on usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .baselines import grappa_calibrate, grappa_reconstruct, zero_fill_baseline
from .dataset import build_phantom_dataset, load_dataset, save_dataset
from .errors import CalibrationError, DatasetFormatError, ValidationError
from .evaluation import (
    MetricRow,
    ablation_report,
    evaluate,
    format_ablation_reference,
    psnr,
    reconstruct,
    ssim,
)
from .sampling import apply_mask, make_equispaced_mask
from .training import Checkpoint, TrainConfig, fit

_CONFIG_KEYS = {f.name for f in dataclasses.fields(TrainConfig)}


def load_train_config(path) -> TrainConfig:
    """Read a flat key: value config file with TrainConfig field names."""
    raw = yaml.safe_load(Path(path).read_text())
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise DatasetFormatError(f"config file {path} must be a flat mapping")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise DatasetFormatError(
            f"config file {path} has unknown keys: {sorted(unknown)}"
        )
    return TrainConfig.from_dict(raw)


def _parse_scales(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ValidationError(f"bad scale list {text!r}") from exc


def _config_from_args(args) -> TrainConfig:
    config = load_train_config(args.config) if args.config else TrainConfig()
    overrides = {}
    if args.iterations is not None:
        overrides["iterations"] = args.iterations
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.scales is not None:
        overrides["scales"] = _parse_scales(args.scales)
    if args.batch_size is not None:
        overrides["batch_size"] = args.batch_size
    if args.lr0 is not None:
        overrides["lr0"] = args.lr0
    if overrides:
        config = dataclasses.replace(config, **overrides)
    config.validate()
    return config


def cmd_phantom_gen(args) -> int:
    h, w = args.size
    records = build_phantom_dataset(args.count, (h, w), args.coils, args.noise, args.seed)
    save_dataset(args.out, records)
    print(f"wrote {len(records)} records ({args.coils} coils, {h}x{w}) to {args.out}")
    return 0


def cmd_mask_gen(args) -> int:
    mask = make_equispaced_mask(args.width, args.scale, args.acs)
    start, end = mask.acs_range
    header = (
        f"# width={mask.width} scale={mask.scale} acs_fraction={mask.acs_fraction}"
        f" acs_start={start} acs_end={end} n_selected={mask.n_selected}"
    )
    line = ",".join(str(int(v)) for v in mask.line_selector)
    text = header + "\n" + line + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote mask ({mask.n_selected} selected lines) to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_train(args) -> int:
    from .report import plot_loss_curve

    config = _config_from_args(args)
    records = load_dataset(args.data)
    print(f"effective config: {json.dumps(config.to_dict(), sort_keys=True)}")
    checkpoint, losses = fit(records, config, log_every=args.log_every)
    checkpoint.save(args.out)
    out = Path(args.out)
    curve_path = out.with_suffix(".loss.csv")
    with curve_path.open("w") as f:
        f.write("iteration,loss\n")
        for i, loss in enumerate(losses):
            f.write(f"{i},{loss:.8e}\n")
    plot_loss_curve(losses, out.with_suffix(".loss.png"))
    print(f"trained {config.iterations} iterations on {len(records)} records -> {args.out}")
    return 0


def cmd_reconstruct(args) -> int:
    from .report import plot_error_map, save_grayscale_png

    checkpoint = Checkpoint.load(args.ckpt)
    records = load_dataset(args.data)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    indices = range(len(records)) if args.records is None else [
        int(i) for i in args.records.split(",")
    ]
    acs = checkpoint.train_config.acs_fraction
    metrics_path = out_dir / "metrics.csv"
    with metrics_path.open("w") as f:
        f.write("record,scale,ssim,psnr\n")
        for idx in indices:
            rec = records[idx]
            mask = make_equispaced_mask(rec.kspace.shape[2], args.scale, acs)
            k_u = apply_mask(rec.kspace, mask)
            img = reconstruct(checkpoint, k_u, args.scale)
            ref = rec.sos
            vmax = float(max(ref.max(), img.max()))
            save_grayscale_png(img, out_dir / f"recon_{idx:04d}_s{args.scale}.png", vmax=vmax)
            save_grayscale_png(
                np.abs(img - ref), out_dir / f"error_{idx:04d}_s{args.scale}.png", vmax=vmax
            )
            plot_error_map(img, ref, out_dir / f"report_{idx:04d}_s{args.scale}.png")
            s, p = ssim(ref, img), psnr(ref, img)
            print(f"record {idx} scale {args.scale}: ssim={s:.4f} psnr={p:.2f} dB")
            f.write(f"{idx},{args.scale},{s:.6f},{p:.4f}\n")
    print(f"wrote images and metrics to {out_dir}")
    return 0


def cmd_evaluate(args) -> int:
    from .report import plot_metric_rows, write_metric_csv

    checkpoint = Checkpoint.load(args.ckpt)
    records = load_dataset(args.data)
    scales = _parse_scales(args.scales)
    baselines = tuple(b for b in args.baselines.split(",") if b) if args.baselines else ()
    rows = evaluate(checkpoint, records, scales, baselines)
    meta = {
        "train_config": checkpoint.train_config.to_dict(),
        "data": str(args.data),
        "n_records": len(records),
    }
    write_metric_csv(rows, args.out, header_meta=meta)
    plot_metric_rows(rows, Path(args.out).with_suffix(".png"))
    for row in rows:
        print(
            f"{row.method:>9} s={row.scale}: ssim={row.mean_ssim:.4f} "
            f"psnr={row.mean_psnr:.2f} dB (n={row.n_records})"
        )
    print(f"wrote metric table to {args.out}")
    return 0


def cmd_ablate(args) -> int:
    from .report import plot_metric_rows, write_metric_csv

    config = _config_from_args(args)
    records = load_dataset(args.data)
    eval_records = load_dataset(args.eval_data) if args.eval_data else None
    results = ablation_report(records, config, eval_records, verbose=True)
    all_rows = []
    for arm in results:
        all_rows.extend(
            MetricRow(
                method=arm.name,
                scale=r.scale,
                mean_ssim=r.mean_ssim,
                mean_psnr=r.mean_psnr,
                n_records=r.n_records,
            )
            for r in arm.rows
        )
    write_metric_csv(all_rows, args.out, header_meta={"base_config": config.to_dict()})
    plot_metric_rows(all_rows, Path(args.out).with_suffix(".png"))
    print(format_ablation_reference())
    print(f"wrote ablation table to {args.out}")
    return 0


def cmd_baseline(args) -> int:
    records = load_dataset(args.data)
    rows = []
    for idx, rec in enumerate(records):
        mask = make_equispaced_mask(rec.kspace.shape[2], args.scale, args.acs)
        k_u = apply_mask(rec.kspace, mask)
        if args.method == "zerofill":
            img = zero_fill_baseline(k_u)
        else:
            start, end = mask.acs_range
            acs_block = k_u.data[:, :, start:end].transpose(0, 2, 1)
            weights = grappa_calibrate(acs_block, scale=args.scale)
            img = grappa_reconstruct(k_u, mask, weights)
        rows.append((idx, ssim(rec.sos, img), psnr(rec.sos, img)))
    with Path(args.out).open("w") as f:
        f.write("record,scale,method,ssim,psnr\n")
        for idx, s, p in rows:
            f.write(f"{idx},{args.scale},{args.method},{s:.6f},{p:.4f}\n")
    mean_s = float(np.mean([r[1] for r in rows]))
    mean_p = float(np.mean([r[2] for r in rows]))
    print(
        f"{args.method} s={args.scale}: mean ssim={mean_s:.4f} "
        f"mean psnr={mean_p:.2f} dB (n={len(rows)}) -> {args.out}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kspace-inr",
        description="Multi-scale parallel-imaging reconstruction with an implicit neural field",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom-gen", help="simulate a multi-coil phantom dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=8)
    p.add_argument("--size", type=int, nargs=2, default=(64, 64), metavar=("H", "W"))
    p.add_argument("--coils", type=int, default=4)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_phantom_gen)

    p = sub.add_parser("mask-gen", help="emit an equispaced undersampling mask")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--acs", type=float, default=0.08)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_mask_gen)

    p = sub.add_parser("train", help="train the reconstruction model")
    p.add_argument("--data", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--scales", default=None, help="comma separated, e.g. 4,5,6")
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--lr0", type=float, default=None)
    p.add_argument("--log-every", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("reconstruct", help="reconstruct records and write images")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--records", default=None, help="comma separated indices (default all)")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="metric table over scales and baselines")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--scales", default="4,5,6")
    p.add_argument("--baselines", default="", help="comma separated: grappa,zerofill")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="train and compare the five toggle arms")
    p.add_argument("--data", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--eval-data", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--scales", default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--lr0", type=float, default=None)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("baseline", help="run a classical baseline on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=("grappa", "zerofill"), required=True)
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--acs", type=float, default=0.08)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        ValidationError,
        CalibrationError,
        DatasetFormatError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
