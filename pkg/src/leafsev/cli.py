"""Command-line front end: batch analysis with JSON reports, and fixture synthesis."""
from __future__ import annotations

import argparse
import glob
import json
import logging
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import imaging
from .config import ConfigError, PipelineConfig, load_config
from .pipeline import LeafAnalysis, analyze
from .synth import BACKGROUND_KINDS, InfeasibleSpec, SynthSpec, generate

log = logging.getLogger("leafsev")

SCHEMA_VERSION = 1
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}
WITH_SEVERITY = ("ok", "degenerate_channel")
# files this tool writes; directory scans skip them
ARTIFACT_SUFFIXES = (".mask", ".overlay", ".leaf", ".damage", ".salience", ".threshold", ".edges",
                     ".fused", ".final")


@dataclass(frozen=True)
class RunOptions:
    out_dir: Path
    config: PipelineConfig = PipelineConfig()
    debug_dir: Path | None = None
    parallel: int = 1
    timings: bool = True


def _r(x: float, nd: int = 6) -> float:
    # fixed precision keeps reports byte-stable across platforms
    return float(round(float(x), nd))


def write_json(path: Path, obj) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def resolve_inputs(specs) -> list[Path]:
    """Expand files, directories (non-recursive) and glob patterns.

    Explicit paths that do not exist are kept, so they surface as io_error
    reports instead of vanishing from the batch.
    """
    seen: dict[Path, None] = {}
    for spec in specs:
        p = Path(spec)
        if p.is_dir():
            for child in sorted(p.iterdir()):
                if (child.suffix.lower() in IMAGE_SUFFIXES and child.is_file()
                        and Path(child.stem).suffix not in ARTIFACT_SUFFIXES):
                    seen[child] = None
        elif glob.has_magic(str(spec)):
            for match in sorted(glob.glob(str(spec))):
                if Path(match).is_file():
                    seen[Path(match)] = None
        else:
            seen[p] = None
    return list(seen)


def overlay_image(img: np.ndarray, leaf: np.ndarray, damage: np.ndarray, opacity: float) -> np.ndarray:
    """Tint damage red over the original and trace the leaf outline in blue."""
    rgb = img if img.ndim == 3 else np.repeat(img[..., None], 3, axis=2)
    out = rgb.astype(np.float64)
    red = np.array([255.0, 0.0, 0.0])
    out[damage] = (1 - opacity) * out[damage] + opacity * red
    outline = leaf & ~ndimage.binary_erosion(leaf, border_value=0)
    out[outline] = (0.0, 0.0, 255.0)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def build_report(path, img: np.ndarray | None, analysis: LeafAnalysis | None,
                 status: str, error: str | None = None, timings: bool = True) -> dict:
    report: dict = {"schema_version": SCHEMA_VERSION, "input_path": str(path), "status": status}
    if error:
        report["error"] = error
    if img is not None:
        report["image"] = {"width": int(img.shape[1]), "height": int(img.shape[0]),
                           "channels": 1 if img.ndim == 2 else 3}
    if analysis is None:
        return report
    g = analysis.gamma
    report["gamma"] = {"i_avg": _r(g.i_avg), "r": _r(g.r), "gamma_raw": _r(g.gamma_raw),
                       "gamma_applied": _r(g.gamma_clamped)}
    if analysis.severity is not None and status in WITH_SEVERITY:
        sev = analysis.severity
        report["leaf_pixels"] = sev.leaf_pixels
        report["damaged_pixels"] = sev.damaged_pixels
        report["severity_percent"] = _r(sev.severity_percent, 2)
        if analysis.fcm is not None:
            report["fcm"] = {
                "centers": [_r(c) for c in analysis.fcm.centers],
                "iterations": analysis.fcm.iterations,
                "converged": bool(analysis.fcm.converged),
                "homogeneous": bool(analysis.damage.homogeneous),
            }
    if timings:
        report["timings_ms"] = {k: _r(v, 3) for k, v in analysis.timings_ms.items()}
    return report


def _dump_debug(debug_dir: Path, stem: str, analysis: LeafAnalysis) -> None:
    debug_dir.mkdir(parents=True, exist_ok=True)
    st = analysis.stages
    if st is None:
        return
    sal = st.salience
    span = sal.max() - sal.min()
    norm = np.zeros(sal.shape) if span == 0 else (sal - sal.min()) / span * 255.0
    imaging.save_image(debug_dir / f"{stem}.salience.png", np.rint(norm).astype(np.uint8))
    for name in ("threshold", "edges", "fused", "final"):
        mask = getattr(st, name)
        if mask is not None:
            imaging.save_image(debug_dir / f"{stem}.{name}.png", mask)


def run_pipeline(path, opts: RunOptions) -> dict:
    """Analyze one image file, write its artifacts and return the report."""
    path = Path(path)
    stem = path.stem
    opts.out_dir.mkdir(parents=True, exist_ok=True)
    report_path = opts.out_dir / f"{stem}.report.json"
    try:
        img = imaging.load_image(path)
    except Exception as exc:  # any decode failure is this image's problem only
        report = build_report(path, None, None, "io_error", f"{type(exc).__name__}: {exc}")
        write_json(report_path, report)
        return report
    analysis = analyze(img, opts.config)
    if opts.debug_dir is not None:
        _dump_debug(opts.debug_dir, stem, analysis)
    error = "no leaf found in the image" if analysis.status == "no_foreground" else None
    report = build_report(path, img, analysis, analysis.status, error, opts.timings)
    if analysis.leaf is not None:
        leaf = analysis.leaf.mask
        imaging.save_image(opts.out_dir / f"{stem}.mask.png", leaf)
        imaging.save_image(opts.out_dir / f"{stem}.overlay.png",
                           overlay_image(img, leaf, analysis.damage.mask, opts.config.overlay_opacity))
    write_json(report_path, report)
    return report


def summarize(reports: list[dict]) -> dict:
    statuses: dict[str, int] = {}
    for r in reports:
        statuses[r["status"]] = statuses.get(r["status"], 0) + 1
    sev = [r["severity_percent"] for r in reports if r["status"] in WITH_SEVERITY]
    return {
        "schema_version": SCHEMA_VERSION,
        "count_total": len(reports),
        "count_ok": len(sev),
        "count_failed": len(reports) - len(sev),
        "statuses": dict(sorted(statuses.items())),
        "severity_mean": _r(statistics.fmean(sev), 2) if sev else None,
        "severity_std": _r(statistics.stdev(sev), 2) if len(sev) > 1 else (0.0 if sev else None),
        "inputs": [r["input_path"] for r in reports],
    }


def run_batch(inputs, opts: RunOptions) -> tuple[int, dict]:
    """Process every input and write ``summary.json``; returns (exit code, summary)."""
    paths = resolve_inputs(inputs)
    if not paths:
        raise ConfigError("no input images matched")
    opts.out_dir.mkdir(parents=True, exist_ok=True)
    if opts.parallel > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=min(opts.parallel, len(paths))) as pool:
            reports = list(pool.map(run_pipeline, paths, [opts] * len(paths)))
    else:
        reports = [run_pipeline(p, opts) for p in paths]
    summary = summarize(reports)
    write_json(opts.out_dir / "summary.json", summary)
    return (0 if summary["count_ok"] else 2), summary


def _analyze_cmd(args) -> int:
    overrides = {
        "gamma.override": args.gamma,
        "fcm.m": args.fcm_m,
        "damage.cluster": args.damage_cluster,
        "background.disk_radius": args.disk_radius,
        "background.a_exponent": args.a_exponent,
    }
    overrides = {k: str(v) for k, v in overrides.items() if v is not None}
    try:
        if args.parallel < 1:
            raise ConfigError("--parallel must be >= 1")
        cfg = load_config(args.config, overrides)
        opts = RunOptions(Path(args.out), cfg, Path(args.debug_dir) if args.debug_dir else None,
                          args.parallel, not args.no_timings)
        code, summary = run_batch(args.inputs, opts)
    except ConfigError as exc:
        log.error("%s", exc)
        return 1
    log.info("%d/%d images analyzed; mean severity %s%%", summary["count_ok"], summary["count_total"],
             summary["severity_mean"])
    return code


def _synth_cmd(args) -> int:
    try:
        spec = SynthSpec(width=args.size, height=args.size, damage_fraction=args.p, seed=args.seed,
                         background=args.bg, brightness=args.brightness)
        leaf = generate(spec)
    except InfeasibleSpec as exc:
        log.error("%s", exc)
        return 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = args.stem or f"synth-p{args.p:g}-s{args.seed}"
    imaging.save_image(out / f"{stem}.png", leaf.image)
    imaging.save_image(out / f"{stem}.leaf.png", leaf.leaf)
    imaging.save_image(out / f"{stem}.damage.png", leaf.damage)
    write_json(out / f"{stem}.truth.json", {
        "schema_version": SCHEMA_VERSION,
        "leaf_pixels": leaf.leaf_pixels,
        "damaged_pixels": leaf.damaged_pixels,
        "damage_fraction": _r(leaf.damage_fraction),
        "severity_percent": _r(100 * leaf.damage_fraction, 2),
        "spec": {"p": args.p, "seed": args.seed, "background": args.bg,
                 "brightness": args.brightness, "size": args.size},
    })
    log.info("wrote %s", out / f"{stem}.png")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leafsev", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="estimate infection severity for images")
    a.add_argument("inputs", nargs="+", help="image files, directories or glob patterns")
    a.add_argument("--out", default="leafsev-out", help="output directory")
    a.add_argument("--config", help="flat key = value config file (default: $LEAFSEV_CONFIG)")
    a.add_argument("--gamma", type=float, help="fixed gamma instead of the automatic choice")
    a.add_argument("--fcm-m", type=float, help="FCM fuzzifier")
    a.add_argument("--damage-cluster", choices=["higher_v", "lower_v"])
    a.add_argument("--disk-radius", type=int)
    a.add_argument("--a-exponent", type=int, choices=[2, 4])
    a.add_argument("--debug-dir", help="write per-stage masks here")
    a.add_argument("--parallel", type=int, default=1, help="worker processes")
    a.add_argument("--no-timings", action="store_true", help="omit stage timings from reports")
    a.set_defaults(func=_analyze_cmd)

    s = sub.add_parser("synth", help="render a synthetic leaf with truth masks")
    s.add_argument("--p", type=float, default=0.25, help="damage fraction")
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--bg", choices=BACKGROUND_KINDS, default="two-tone")
    s.add_argument("--brightness", type=float, default=1.0)
    s.add_argument("--size", type=int, default=512)
    s.add_argument("--stem", help="output file stem")
    s.add_argument("--out", default=".", help="output directory")
    s.set_defaults(func=_synth_cmd)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
