"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 validation error.
All outputs are deterministic given the same flags, config, and seed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import assess, fovea, qpexport, sphere
from .config import RunConfig, apply_settings, dump_config, load_config
from .errors import InputError, SjndError, ValidationError
from .jnd2d import CLASS_NAMES, jnd2d_map
from .pipeline import compute_sjnd, stage_stats
from .raster import (LumaPlane, ThresholdMap, YuvSpec, format_number, load_float_map,
                     load_image, save_image, save_map)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VALIDATION = 3


class UsageError(SjndError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 instead of argparse's default 2
        raise UsageError(message)


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise UsageError(f"--size expects WxH, got {text!r}") from None


def _load_plane(args) -> LumaPlane:
    yuv = None
    if getattr(args, "size", None):
        w, h = _parse_size(args.size)
        yuv = YuvSpec(width=w, height=h, frame=getattr(args, "frame", 0))
    return load_image(args.input, yuv_spec=yuv, frame=getattr(args, "frame", 0))


def _config_from(args) -> RunConfig:
    cfg = load_config(getattr(args, "config", None))
    overrides = {}
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        overrides[key.strip()] = val
    if getattr(args, "threads", None) is not None:
        overrides["run.threads"] = str(args.threads)
    if overrides:
        cfg = apply_settings(cfg, overrides)
    cfg.validate()
    return cfg


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def _resolve_saliency(args, cfg: RunConfig, plane: LumaPlane) -> fovea.SaliencyField:
    if getattr(args, "saliency", None):
        return fovea.load_saliency(args.saliency, (plane.height, plane.width), cfg.fovea)
    return fovea.equator_gaussian_prior(plane.width, plane.height, cfg.fovea)


def _load_threshold_map(path, block_size: int) -> ThresholdMap:
    arr = np.asarray(load_float_map(path), dtype=np.float64)
    return ThresholdMap.from_plane_layout(arr, block_size)


def _add_common(p: argparse.ArgumentParser, *, with_input=True):
    if with_input:
        p.add_argument("--input", required=True, help="input image (pgm/png/y4m/yuv)")
        p.add_argument("--size", help="WxH for raw .yuv input")
        p.add_argument("--frame", type=int, default=0, help="frame index for yuv/y4m")
    p.add_argument("--config", help="config file (fallback: $SJND_CONFIG)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config entry (repeatable)")
    p.add_argument("--threads", type=int, help="internal parallelism cap")


# ---------------------------------------------------------------------------
# subcommands

def cmd_jnd2d(args) -> int:
    cfg = _config_from(args)
    plane = _load_plane(args)
    tmap, grid = jnd2d_map(plane, cfg.jnd2d, cfg.threads)
    if args.out_map:
        save_map(tmap, args.out_map, "float-binary")
    if args.out_pgm:
        save_map(tmap, args.out_pgm, "pgm-normalized")
    if args.blocks_csv:
        lines = ["by,bx,mean_luma,entropy,class"]
        for by in range(grid.blocks_y):
            for bx in range(grid.blocks_x):
                lines.append(
                    f"{by},{bx},{format_number(grid.mean_luma[by, bx])},"
                    f"{format_number(grid.entropy[by, bx])},"
                    f"{CLASS_NAMES[grid.block_class[by, bx]]}"
                )
        _write_text(args.blocks_csv, "\n".join(lines) + "\n")
    print(f"jnd2d: {grid.blocks_y}x{grid.blocks_x} blocks, "
          f"mean threshold {tmap.values.mean():.4f}")
    return EXIT_OK


def cmd_sjnd(args) -> int:
    cfg = _config_from(args)
    plane = _load_plane(args)
    saliency = _resolve_saliency(args, cfg, plane) if not args.no_fovea else None
    stages = compute_sjnd(plane, saliency, cfg.jnd2d, cfg.sphere, cfg.fovea,
                          fovea_enabled=not args.no_fovea, threads=cfg.threads)
    if args.out_map:
        save_map(stages.sjnd, args.out_map, "float-binary")
    if args.emit_stages:
        outdir = Path(args.emit_stages)
        outdir.mkdir(parents=True, exist_ok=True)
        save_map(stages.map2d, outdir / "map2d.bin", "float-binary")
        save_map(stages.map_lat, outdir / "map_lat.bin", "float-binary")
        save_map(ThresholdMap(stages.fovea_field, stages.sjnd.block_size),
                 outdir / "alpha_fov.bin", "float-binary")
        save_map(stages.sjnd, outdir / "sjnd.bin", "float-binary")
    if args.stats_csv:
        stats = stage_stats(stages, cfg.stat_bands)
        _write_text(args.stats_csv, "\n".join(stats.csv_rows()) + "\n")
    print(f"sjnd: mean threshold {stages.sjnd.values.mean():.4f}")
    return EXIT_OK


def cmd_inject(args) -> int:
    cfg = _config_from(args)
    plane = _load_plane(args)
    tmap = _load_threshold_map(args.map, cfg.jnd2d.block_size)
    seed = args.seed if args.seed is not None else cfg.inject.seed
    if args.target_ssim is not None:
        res = assess.calibrate_amplitude(plane, tmap, args.target_ssim,
                                         seed=seed, threads=cfg.threads)
        beta = res.beta
    else:
        beta = args.beta if args.beta is not None else cfg.inject.beta
    icfg = assess.InjectionConfig(beta=beta, seed=seed,
                                  clamp_output=cfg.inject.clamp_output)
    out = assess.inject(plane, tmap, icfg, cfg.threads)
    save_image(out, args.out)
    print(f"inject: beta={format_number(beta)} "
          f"psnr={assess.psnr(plane, out):.4f} ssim={assess.ssim(plane, out):.6f}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    ref = load_image(args.reference)
    test = load_image(args.test)
    print(f"psnr={assess.psnr(ref, test):.4f}")
    print(f"ssim={assess.ssim(ref, test):.6f}")
    return EXIT_OK


def cmd_qpmap(args) -> int:
    cfg = _config_from(args)
    overrides = {}
    if args.cu_size is not None:
        overrides["qp.cu_size"] = str(args.cu_size)
    if args.base_qp is not None:
        overrides["qp.base_qp"] = str(args.base_qp)
    if overrides:
        cfg = apply_settings(cfg, overrides)
        cfg.validate()
    tmap = _load_threshold_map(args.map, cfg.jnd2d.block_size)
    qpmap = qpexport.build_qpmap(tmap, cfg.qp)
    qpexport.export_qpmap(qpmap, args.out, args.format)
    print(f"qpmap: {qpmap.qp.shape[0]}x{qpmap.qp.shape[1]} CUs, "
          f"QP range [{qpmap.qp.min()}, {qpmap.qp.max()}]")
    return EXIT_OK


def cmd_viewport(args) -> int:
    cfg = _config_from(args)
    plane = _load_plane(args)
    spec = sphere.ViewportSpec(yaw=args.yaw, pitch=args.pitch, roll=args.roll,
                               fov=args.fov, out_width=args.width,
                               out_height=args.height)
    view = sphere.extract_viewport(plane, spec)
    save_image(view, args.out)
    print(f"viewport: {view.width}x{view.height} at yaw={args.yaw} "
          f"pitch={args.pitch} roll={args.roll}")
    return EXIT_OK


def cmd_curves(args) -> int:
    cfg = _config_from(args)
    out = Path(args.out)
    if args.csf:
        lines = ["f,tau,ct"]
        freqs = [float(f) for f in np.arange(0.0, 32.5, 0.5)]
        taus = [float(t) for t in np.arange(0.0, 62.0, 2.0)]
        for f in freqs:
            for t in taus:
                ct = fovea.csf_threshold(f, t, cfg.fovea)
                lines.append(f"{format_number(f)},{format_number(t)},{format_number(ct)}")
    else:
        j_values = [float(tok) for tok in args.j_values.split(",")]
        xs = np.geomspace(1.0, cfg.sphere.x_max, args.x_points)
        lines = ["jnd2d,x,jnd_lat"]
        for j in j_values:
            for x in xs:
                val = sphere.jnd_lat(j, float(x), cfg.sphere.curve_mode)
                lines.append(f"{format_number(j)},{format_number(float(x))},"
                             f"{format_number(float(val))}")
    _write_text(out, "\n".join(lines) + "\n")
    print(f"curves: wrote {len(lines) - 1} rows to {out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config_from(args)
    plane = _load_plane(args)
    saliency = _resolve_saliency(args, cfg, plane)
    stages = compute_sjnd(plane, saliency, cfg.jnd2d, cfg.sphere, cfg.fovea,
                          threads=cfg.threads)
    available = {"jnd2d": stages.map2d, "jndlat": stages.map_lat,
                 "sjnd": stages.sjnd}
    names = [m.strip() for m in args.models.split(",") if m.strip()]
    unknown = [m for m in names if m not in available]
    if unknown:
        raise UsageError(f"unknown model(s) {unknown}; choose from {sorted(available)}")
    maps = {name: available[name] for name in names}
    rows = assess.compare_models(plane, maps, args.target_ssim, args.seed,
                                 cfg.threads)
    text = assess.report_csv(rows)
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="sjnd360",
                     description="Spherical JND maps, noise injection, and QP export "
                                 "for equirectangular 360 images")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("jnd2d",
                       help="planar threshold map and block classification")
    _add_common(p)
    p.add_argument("--out-map", help="float-binary threshold map output")
    p.add_argument("--out-pgm", help="normalized PGM visualization output")
    p.add_argument("--blocks-csv", help="per-block mean/entropy/class CSV")
    p.set_defaults(func=cmd_jnd2d)

    p = sub.add_parser("sjnd",
                       help="full spherical threshold map (needs ERP input)")
    _add_common(p)
    sal = p.add_mutually_exclusive_group()
    sal.add_argument("--saliency", help="saliency map file (pgm/png/float-binary)")
    sal.add_argument("--saliency-prior", choices=[fovea.EQUATOR_PRIOR],
                     help="use the built-in analytic prior (also the default)")
    p.add_argument("--no-fovea", action="store_true",
                   help="ablation: skip the foveation weighting stage")
    p.add_argument("--out-map", help="float-binary SJND map output")
    p.add_argument("--emit-stages", metavar="DIR",
                   help="write all intermediate stage maps into DIR")
    p.add_argument("--stats-csv", help="per-stage and per-band statistics CSV")
    p.set_defaults(func=cmd_sjnd)

    p = sub.add_parser("inject",
                       help="add threshold-shaped noise to an image")
    _add_common(p)
    p.add_argument("--map", required=True, help="float-binary threshold map")
    amp = p.add_mutually_exclusive_group()
    amp.add_argument("--beta", type=float, help="noise amplitude scale")
    amp.add_argument("--target-ssim", type=float,
                     help="calibrate the amplitude to this SSIM instead")
    p.add_argument("--seed", type=int, help="sign-field seed")
    p.add_argument("--out", required=True, help="output image (pgm/png)")
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("metrics",
                       help="print PSNR and SSIM between two images")
    p.add_argument("--reference", required=True)
    p.add_argument("--test", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("qpmap",
                       help="per-CU perceptual QP map from a threshold map")
    _add_common(p, with_input=False)
    p.add_argument("--map", required=True, help="float-binary threshold map")
    p.add_argument("--cu-size", type=int)
    p.add_argument("--base-qp", type=int)
    p.add_argument("--format", choices=["csv", "dqp-text"], default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_qpmap)

    p = sub.add_parser("viewport",
                       help="extract a rectilinear viewport from an ERP frame")
    _add_common(p)
    p.add_argument("--yaw", type=float, default=0.0)
    p.add_argument("--pitch", type=float, default=0.0)
    p.add_argument("--roll", type=float, default=0.0)
    p.add_argument("--fov", type=float, default=120.0)
    p.add_argument("--width", type=int, default=960)
    p.add_argument("--height", type=int, default=960)
    p.add_argument("--out", required=True, help="output image (pgm/png)")
    p.set_defaults(func=cmd_viewport)

    p = sub.add_parser("curves",
                       help="emit latitude curve cluster (or CSF grid) as CSV")
    _add_common(p, with_input=False)
    p.add_argument("--out", required=True)
    p.add_argument("--csf", action="store_true",
                   help="emit the eccentricity CSF grid instead")
    p.add_argument("--j-values", default="13,14,15,16,17,18,19",
                   help="comma-separated planar threshold values")
    p.add_argument("--x-points", type=int, default=25,
                   help="density-ratio samples per curve")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("compare",
                       help="equal-SSIM PSNR report across model maps")
    _add_common(p)
    p.add_argument("--models", default="jnd2d,sjnd",
                   help="comma-separated: jnd2d, jndlat, sjnd")
    p.add_argument("--target-ssim", type=float, default=0.975)
    p.add_argument("--seed", type=int, default=0)
    sal = p.add_mutually_exclusive_group()
    sal.add_argument("--saliency", help="saliency map file")
    sal.add_argument("--saliency-prior", choices=[fovea.EQUATOR_PRIOR])
    p.add_argument("--out", help="report CSV path (default: stdout)")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entry() -> None:
    sys.exit(main(sys.argv[1:]))
