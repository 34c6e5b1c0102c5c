"""Command-line interface: super-resolve, evaluate, ablate, gen-synthetic.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
3 pipeline error. Every command that writes an image also writes a JSON
run manifest alongside it (same path plus ``.manifest.json``) recording the
command, the fully resolved configuration, paths, seed, and wall time, so
any output can be reproduced exactly.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

from . import __version__
from .aggregate import AggregationConfig, super_resolve
from .baseline import bicubic_baseline, same_scale_knn
from .errors import ConfigError, GraphSRError, ImageIOError
from .estimator import plan_stages
from .image import BoundaryPolicy, Image, bicubic_resample, load_image, save_image
from .metrics import evaluate
from .synthetic import generate_pair

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_PIPELINE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this tool reserves 2 for I/O
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _config_from_args(args, s: int) -> AggregationConfig:
    return AggregationConfig(
        s=s,
        k=args.k,
        l=args.l,
        d=args.d,
        stride=args.stride,
        h=args.bandwidth,
        weighting=args.weighting,
        adapn=args.adapn == "on",
        boundary=BoundaryPolicy.CLAMP if args.boundary == "clamp"
        else BoundaryPolicy.REFLECT,
    ).validate()


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--scale", type=int, default=2, help="up-scaling factor")
    p.add_argument("--search-scale", type=int, default=None,
                   help="per-stage graph scale; scale 4 with search-scale 2 "
                        "runs two chained x2 stages (default behavior), "
                        "search-scale 4 forces a single x4 stage")
    p.add_argument("--k", type=int, default=5, help="neighbors per query")
    p.add_argument("--d", type=int, default=30, help="search window side")
    p.add_argument("--l", type=int, default=3, help="query patch side")
    p.add_argument("--stride", type=int, default=1, help="query grid stride")
    p.add_argument("--bandwidth", type=float, default=10.0,
                   help="Gaussian weight bandwidth")
    p.add_argument("--weighting", choices=("average", "gaussian"),
                   default="gaussian")
    p.add_argument("--adapn", choices=("on", "off"), default="on",
                   help="adaptive patch normalization")
    p.add_argument("--boundary", choices=("clamp", "reflect"),
                   default="reflect")
    p.add_argument("--workers", type=int, default=1,
                   help="worker threads (output is identical for any count)")
    p.add_argument("--seed", type=int, default=0)


def _manifest(command: str, cfg_dict: dict, inputs: dict, outputs: dict,
              seed: int, wall_time: float) -> dict:
    return {
        "tool": "graphsr",
        "version": __version__,
        "command": command,
        "config": cfg_dict,
        "inputs": inputs,
        "outputs": outputs,
        "seed": seed,
        "wall_time_s": round(wall_time, 3),
    }


def _write_manifest(manifest: dict, out_path) -> None:
    path = Path(str(out_path) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _config_dict(cfg: AggregationConfig, **extra) -> dict:
    d = dataclasses.asdict(cfg)
    d["boundary"] = cfg.boundary.value
    d.update(extra)
    return d


def cmd_sr(args) -> int:
    t0 = time.perf_counter()
    stages = plan_stages(args.scale, args.search_scale)
    img = load_image(args.input)
    cfg = None
    for i, s in enumerate(stages):
        cfg = _config_from_args(args, s)
        if args.dump_graph and i == 0:
            _dump_stage_graph(img, cfg, args.dump_graph)
        img = super_resolve(img, cfg, workers=args.workers)
    save_image(img, args.output)
    manifest = _manifest(
        "sr",
        _config_dict(cfg, scale=args.scale, stages=stages,
                     workers=args.workers),
        {"input": str(args.input)},
        {"output": str(args.output)},
        args.seed,
        time.perf_counter() - t0,
    )
    _write_manifest(manifest, args.output)
    return EXIT_OK


def _dump_stage_graph(img: Image, cfg: AggregationConfig, path) -> None:
    from .graph import build_graph, dump_graph

    down = bicubic_resample(img, 1.0 / cfg.s, cfg.boundary)
    dump_graph(build_graph(img, down, cfg), path)


def cmd_eval(args) -> int:
    sr = load_image(args.sr)
    gt = load_image(args.gt)
    report = evaluate(sr, gt, crop=args.crop)
    print(report.to_json())
    return EXIT_OK


def _ablate_variants(axis: str, raw_values: list[str], base: AggregationConfig,
                     down_side: int):
    """(label, kind, cfg) triples for one sweep axis."""
    variants = []
    if axis == "k":
        for v in raw_values:
            variants.append((f"k={v}", "sr", base.with_(k=int(v))))
    elif axis == "d":
        for v in raw_values:
            if v == "whole":
                d = 2 * down_side  # covers the entire downsampled image
                variants.append(("d=whole", "sr", base.with_(d=d)))
            else:
                variants.append((f"d={v}", "sr", base.with_(d=int(v))))
    elif axis == "weighting":
        for v in raw_values:
            variants.append((f"weighting={v}", "sr", base.with_(weighting=v)))
    elif axis == "adapn":
        for v in raw_values:
            if v not in ("on", "off"):
                raise ConfigError(f"adapn sweep values must be on/off, got {v!r}")
            variants.append((f"adapn={v}", "sr", base.with_(adapn=(v == "on"))))
    elif axis == "baseline":
        for v in raw_values:
            if v not in ("bicubic", "knn"):
                raise ConfigError(
                    f"baseline sweep values must be bicubic/knn, got {v!r}"
                )
            variants.append((f"baseline={v}", v, base))
    else:
        raise ConfigError(
            f"unknown sweep axis {axis!r}; know k, d, weighting, adapn, baseline"
        )
    return variants


def cmd_ablate(args) -> int:
    lr = load_image(args.input)
    gt = load_image(args.gt)
    base = _config_from_args(args, args.scale)
    if args.scale != base.s or args.search_scale not in (None, args.scale):
        raise ConfigError("ablation sweeps run single-stage; give --scale only")
    down_side = max(lr.height // base.s, lr.width // base.s)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("sweep needs at least one value in --values")
    variants = _ablate_variants(args.axis, values, base, down_side)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for label, kind, cfg in variants:
        t0 = time.perf_counter()
        if kind == "bicubic":
            out = bicubic_baseline(lr, cfg.s)
        elif kind == "knn":
            flat = same_scale_knn(lr, cfg, workers=args.workers)
            out = bicubic_baseline(flat, cfg.s)
        else:
            out = super_resolve(lr, cfg, workers=args.workers)
        wall = time.perf_counter() - t0
        report = evaluate(out, gt, crop=args.crop)
        slug = label.replace("=", "_")
        out_path = out_dir / f"{slug}.png"
        save_image(out, out_path)
        _write_manifest(
            _manifest("ablate", _config_dict(cfg, variant=label,
                                             workers=args.workers),
                      {"input": str(args.input), "gt": str(args.gt)},
                      {"output": str(out_path)}, args.seed, wall),
            out_path,
        )
        rows.append((label, report))
    print("variant\tpsnr_db\tssim\tcrop")
    for label, report in rows:
        psnr = "inf" if report.psnr_db == float("inf") else f"{report.psnr_db:.4f}"
        print(f"{label}\t{psnr}\t{report.ssim:.6f}\t{report.crop_border}")
    return EXIT_OK


def cmd_gen_synthetic(args) -> int:
    t0 = time.perf_counter()
    hr, lr = generate_pair(args.seed, args.size, s=args.scale,
                           scheme=args.scheme)
    save_image(hr, args.hr_out)
    save_image(lr, args.lr_out)
    manifest = _manifest(
        "gen-synthetic",
        {"size": args.size, "scale": args.scale, "scheme": args.scheme},
        {},
        {"hr": str(args.hr_out), "lr": str(args.lr_out)},
        args.seed,
        time.perf_counter() - t0,
    )
    _write_manifest(manifest, args.hr_out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graphsr",
                     description="Cross-scale patch-recurrence "
                                 "super-resolution toolbox")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p_sr = sub.add_parser("sr", help="super-resolve an image")
    p_sr.add_argument("input")
    p_sr.add_argument("output")
    _add_config_flags(p_sr)
    p_sr.add_argument("--dump-graph", default=None,
                      help="also write the per-stage patch graph (debug)")
    p_sr.set_defaults(func=cmd_sr)

    p_eval = sub.add_parser("eval", help="PSNR/SSIM of an SR result")
    p_eval.add_argument("sr")
    p_eval.add_argument("gt")
    p_eval.add_argument("--crop", type=int, default=0,
                        help="border pixels excluded from both images")
    p_eval.set_defaults(func=cmd_eval)

    p_ab = sub.add_parser("ablate", help="sweep one configuration axis")
    p_ab.add_argument("input", help="LR input image")
    p_ab.add_argument("gt", help="ground-truth HR image")
    p_ab.add_argument("--axis", required=True,
                      choices=("k", "d", "weighting", "adapn", "baseline"))
    p_ab.add_argument("--values", required=True,
                      help="comma-separated sweep values "
                           "(d accepts 'whole'; baseline: bicubic,knn)")
    p_ab.add_argument("--out-dir", default="ablation_out")
    p_ab.add_argument("--crop", type=int, default=None,
                      help="metric border crop (default: the scale factor)")
    _add_config_flags(p_ab)
    p_ab.set_defaults(func=cmd_ablate)

    p_gen = sub.add_parser("gen-synthetic",
                           help="write a seeded (HR, LR) test pair")
    p_gen.add_argument("hr_out")
    p_gen.add_argument("lr_out")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--size", type=int, default=256)
    p_gen.add_argument("--scale", type=int, default=2)
    p_gen.add_argument("--scheme", default="tiled-multiscale")
    p_gen.set_defaults(func=cmd_gen_synthetic)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "crop", None) is None and hasattr(args, "crop"):
            args.crop = getattr(args, "scale", 1)
        return args.func(args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"graphsr: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ImageIOError as exc:
        print(f"graphsr: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FileNotFoundError as exc:
        print(f"graphsr: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except GraphSRError as exc:
        print(f"graphsr: pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
