"""Command-line interface.

Every capability is a subcommand with file-based, reproducible outputs;
CSV is the contract for all chart data.  Exit codes: 0 success, 1 domain
or numeric errors (including out-of-range flag values), 2 usage and I/O
errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import blur, discomfort, estimator, fisher, geometry, harness, imageio, vrf
from .errors import (
    DomainError,
    EstimationError,
    FitError,
    ManifestError,
    QuadratureError,
    ShapeError,
)


def _check(value, name, *, positive=False, non_negative=False):
    """Numeric flag validation; domain problems exit with code 1."""
    if value is None:
        return None
    if not math.isfinite(value):
        raise DomainError(f"--{name} must be finite, got {value!r}")
    if positive and value <= 0:
        raise DomainError(f"--{name} must be positive, got {value!r}")
    if non_negative and value < 0:
        raise DomainError(f"--{name} must be non-negative, got {value!r}")
    return value


def _add_common(p):
    p.add_argument("--config", help="key=value config file "
                   "(receptors_per_degree, c, k, gamma, s_g)")
    p.add_argument("--convention", choices=sorted(geometry.CONVENTIONS),
                   help="spread convention (default: fourier-pair, or config c/k)")
    p.add_argument("--sg", type=float, default=None,
                   help="neural spread in arcmin (default 2.5)")


def _resolve_common(args):
    cfg = geometry.load_config(args.config) if args.config else {}
    if args.convention:
        conv = geometry.convention_by_name(args.convention)
    else:
        conv = geometry.convention_from_config(cfg)
    sg = _check(args.sg, "sg", positive=True)
    if sg is None:
        sg = cfg.get("s_g", 2.5)
    rpd = cfg.get("receptors_per_degree", 60.0)
    gamma = cfg.get("gamma")
    return conv, sg, rpd, gamma


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="blurfisher",
        description="Blur discomfort prediction, blur equivalence and "
                    "IQA-database evaluation tools.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vntf-curve", help="radial frequency response of the filter")
    _add_common(p)
    p.add_argument("--points", type=int, default=512)
    p.add_argument("--rho-max-cpd", type=float, default=30.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("visual-map", help="complex gradient map of an image")
    _add_common(p)
    p.add_argument("--image", required=True)
    p.add_argument("--out-color", help="false-color PNG output")
    p.add_argument("--out-vmap", help="raw complex map output")
    p.add_argument("--taper", type=float, default=0.0,
                   help="cosine border taper width in arcmin")
    p.add_argument("--no-linearize", action="store_true",
                   help="treat input samples as already linear")

    p = sub.add_parser("pfi-map", help="positional information field of an image")
    _add_common(p)
    p.add_argument("--image", required=True)
    p.add_argument("--window-std", type=float, default=8.0,
                   help="detail window standard deviation, arcmin")
    p.add_argument("--noise-var", type=float, default=1.0)
    p.add_argument("--out-csv")
    p.add_argument("--out-png", help="grayscale heatmap of the information field")

    p = sub.add_parser("equiv", help="equivalent isotropic Gaussian spread")
    eq = p.add_subparsers(dest="equiv_kind", required=True)

    pd = eq.add_parser("disc", help="out-of-focus (disc) blur")
    _add_common(pd)
    pd.add_argument("--radius", type=float, help="disc radius, arcmin")
    pd.add_argument("--curve", help="emit a CSV curve instead of one value")
    pd.add_argument("--rmin", type=float, default=2.0)
    pd.add_argument("--rmax", type=float, default=10.0)
    pd.add_argument("--steps", type=int, default=33)

    pa = eq.add_parser("astig", help="astigmatic Gaussian blur")
    _add_common(pa)
    pa.add_argument("--sh", type=float, required=True)
    pa.add_argument("--sv", type=float, required=True)

    pg = eq.add_parser("generic", help="product cascade of OTF stages")
    _add_common(pg)
    pg.add_argument("--stages", required=True,
                    help="comma list, e.g. 'gauss=1.5,disc=3,astig=4:1'")

    p = sub.add_parser("discomfort", help="discomfort charts and values")
    dc = p.add_subparsers(dest="discomfort_kind", required=True)

    pc = dc.add_parser("chart-diopter", help="discomfort vs defocus chart")
    _add_common(pc)
    pc.add_argument("--pupils", default="2,3,4,5,6",
                    help="comma list of pupil diameters, mm")
    pc.add_argument("--dmax", type=float, default=2.0)
    pc.add_argument("--step", type=float, default=0.01)
    pc.add_argument("--out", required=True)

    pp = dc.add_parser("dipper", help="blur increment threshold curve")
    pp.add_argument("--deps", type=float, default=0.05,
                    help="discomfort increment")
    pp.add_argument("--ximin", type=float, default=0.05)
    pp.add_argument("--ximax", type=float, default=10.0)
    pp.add_argument("--points", type=int, default=400)
    pp.add_argument("--out", required=True)

    p = sub.add_parser("sbdi", help="scaled blur discomfort index")
    _add_common(p)
    p.add_argument("--sb", type=float, required=True)
    p.add_argument("--a", type=float, default=100.0)
    p.add_argument("--gamma", type=float, default=None)

    p = sub.add_parser("estimate-blur", help="Gaussian blur between two images")
    p.add_argument("--ref", required=True)
    p.add_argument("--blurred", required=True)
    p.add_argument("--reg", type=float, default=1e-3)

    p = sub.add_parser("eval", help="fit rating manifests and write reports")
    _add_common(p)
    p.add_argument("--manifest", action="append", required=True,
                   help="manifest CSV (repeatable)")
    p.add_argument("--images-root", help="directory for relative image paths")
    p.add_argument("--reg", type=float, default=1e-3)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("synth-natural", help="random natural-spectrum image")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--raw", help="also dump float32 samples (.npy)")

    return ap


def _parse_stages(text):
    stages = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        kind, _, value = part.partition("=")
        kind = kind.strip().lower()
        try:
            if kind in ("gauss", "gaussian"):
                stages.append(blur.IsotropicGaussian(float(value)))
            elif kind == "disc":
                stages.append(blur.Disc(float(value)))
            elif kind == "astig":
                h, _, v = value.partition(":")
                stages.append(blur.AstigmaticGaussian(float(h), float(v)))
            else:
                raise DomainError(f"unknown OTF stage {kind!r}")
        except ValueError:
            raise DomainError(f"bad OTF stage value in {part!r}") from None
    if not stages:
        raise DomainError("no OTF stages given")
    return blur.ProductOtf(*stages) if len(stages) > 1 else stages[0]


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.9g}" if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def _cmd_vntf_curve(args):
    conv, sg, rpd, _ = _resolve_common(args)
    rho_max = _check(args.rho_max_cpd, "rho-max-cpd", positive=True) / 60.0
    rho = np.linspace(0.0, rho_max, max(args.points, 2))
    mag = 2.0 * np.pi * rho * np.exp(-conv.exponent_constant * sg ** 2 * rho ** 2)
    peak = mag.max()
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(np.where(mag > 0, mag / peak, np.nan))
    rows = [(float(r * 60.0), float(m / peak), float(d))
            for r, m, d in zip(rho, mag, db)]
    _write_csv(args.out, ["rho_cpd", "magnitude_norm", "magnitude_db"], rows)
    peak_cpd = vrf.vntf_peak_frequency(sg, conv) * 60.0
    print(f"peak response at {peak_cpd:.3f} cycles/degree")
    return 0


def _cmd_visual_map(args):
    conv, sg, rpd, _ = _resolve_common(args)
    taper = _check(args.taper, "taper", non_negative=True)
    image = imageio.read_luminance(args.image, rpd, linearize=not args.no_linearize)
    kernel = vrf.make_psf(sg, image.geometry, conv)
    vmap = vrf.visual_map(image, kernel, taper_arcmin=taper)
    if args.out_color:
        imageio.write_png_rgb(args.out_color, vrf.render_false_color(vmap))
    if args.out_vmap:
        imageio.write_visual_map(args.out_vmap, vmap)
    if not (args.out_color or args.out_vmap):
        print("nothing to do: give --out-color and/or --out-vmap", file=sys.stderr)
        return 2
    return 0


def _cmd_pfi_map(args):
    conv, sg, rpd, _ = _resolve_common(args)
    wstd = _check(args.window_std, "window-std", positive=True)
    nvar = _check(args.noise_var, "noise-var", positive=True)
    image = imageio.read_luminance(args.image, rpd)
    kernel = vrf.make_psf(sg, image.geometry, conv)
    vmap = vrf.visual_map(image, kernel)
    window = fisher.DetailWindow.gaussian(wstd, image.geometry.pixel_pitch)
    field = fisher.pfi_and_emin(fisher.detail_energy_map(vmap, window), nvar)
    if args.out_csv:
        fisher.pfi_field_to_csv(field, args.out_csv)
    if args.out_png:
        imageio.write_png_gray(args.out_png, field.psi)
    if not (args.out_csv or args.out_png):
        print("nothing to do: give --out-csv and/or --out-png", file=sys.stderr)
        return 2
    return 0


def _cmd_equiv(args):
    conv, sg, _, _ = _resolve_common(args)
    if args.equiv_kind == "disc":
        if args.curve:
            rmin = _check(args.rmin, "rmin", positive=True)
            rmax = _check(args.rmax, "rmax", positive=True)
            if rmax <= rmin:
                raise DomainError("--rmax must exceed --rmin")
            radii = np.linspace(rmin, rmax, max(args.steps, 2))
            rows = blur.disc_equivalence_curve(radii, sg, conv)
            _write_csv(args.curve, ["R_arcmin", "sB_arcmin", "ratio"], rows)
        elif args.radius is not None:
            radius = _check(args.radius, "radius", non_negative=True)
            print(f"{blur.equiv_spread_disc(radius, sg, conv):.3f}")
        else:
            print("give --radius or --curve", file=sys.stderr)
            return 2
    elif args.equiv_kind == "astig":
        sh = _check(args.sh, "sh", non_negative=True)
        sv = _check(args.sv, "sv", non_negative=True)
        print(f"{blur.equiv_spread_astig(sh, sv, sg):.3f}")
    else:
        otf = _parse_stages(args.stages)
        print(f"{blur.equiv_spread_generic(otf, sg, conv):.3f}")
    return 0


def _cmd_discomfort(args):
    if args.discomfort_kind == "chart-diopter":
        _, sg, _, _ = _resolve_common(args)
        dmax = _check(args.dmax, "dmax", positive=True)
        step = _check(args.step, "step", positive=True)
        try:
            pupils = [float(p) for p in args.pupils.split(",") if p.strip()]
        except ValueError:
            raise DomainError(f"bad pupil list {args.pupils!r}") from None
        if not pupils or any(not math.isfinite(p) or p <= 0 for p in pupils):
            raise DomainError("pupil diameters must be positive")
        rows = discomfort.diopter_chart(pupils, dmax, step, sg)
        _write_csv(args.out, ["diopters", "pupil_mm", "discomfort_centesimal"], rows)
    else:
        deps = _check(args.deps, "deps", positive=True)
        ximin = _check(args.ximin, "ximin", positive=True)
        ximax = _check(args.ximax, "ximax", positive=True)
        rows = discomfort.dipper_curve(deps, ximin, ximax, args.points)
        _write_csv(args.out, ["xi", "delta_xi"], rows)
    return 0


def _cmd_sbdi(args):
    _, sg, _, gamma_cfg = _resolve_common(args)
    sb = _check(args.sb, "sb", non_negative=True)
    gain = _check(args.a, "a", positive=True)
    gamma = _check(args.gamma, "gamma", positive=True)
    if gamma is None:
        gamma = gamma_cfg if gamma_cfg is not None else 1.0
    params = discomfort.DiscomfortParams(gain=gain, gamma=gamma, neural_spread=sg)
    print(f"{discomfort.sbdi(sb, params):.4f}")
    return 0


def _cmd_estimate_blur(args):
    reg = _check(args.reg, "reg", positive=True)
    ref = imageio.read_luminance(args.ref)
    blurred = imageio.read_luminance(args.blurred)
    result = estimator.estimate_blur_sigma(ref, blurred, reg=reg)
    print(json.dumps({"sigma_px": result.sigma_px, "residual": result.residual,
                      "n_bins_used": result.n_bins_used}, sort_keys=True))
    return 0


def _cmd_eval(args):
    conv, sg, rpd, _ = _resolve_common(args)
    reg = _check(args.reg, "reg", positive=True)
    manifest = harness.RatingManifest.from_csvs(args.manifest)
    options = harness.EvalOptions(images_root=args.images_root, reg=reg,
                                  receptors_per_degree=rpd)
    report = harness.run_evaluation(manifest, sg, conv, options)
    harness.write_report(report, args.out_dir)
    for name, rep in report.datasets.items():
        if rep.fit is not None:
            print(f"{name}: plcc={rep.fit.plcc:.4f} rmse={rep.fit.rmse:.3f} "
                  f"gamma={rep.fit.gamma:.3f} n={rep.fit.n}")
        else:
            print(f"{name}: FAILED ({rep.error})")
    if report.pooled_plcc is not None:
        print(f"ALL: plcc={report.pooled_plcc:.4f} rmse={report.pooled_rmse:.3f} "
              f"n={report.pooled_n}")
    return 1 if report.any_failed else 0


def _cmd_synth_natural(args):
    beta = _check(args.beta, "beta", positive=True)
    image = fisher.synth_natural_image(beta, args.size, args.seed)
    imageio.write_png_gray(args.out, image.samples, bits=16)
    if args.raw:
        np.save(args.raw, image.samples.astype(np.float32))
    return 0


_HANDLERS = {
    "vntf-curve": _cmd_vntf_curve,
    "visual-map": _cmd_visual_map,
    "pfi-map": _cmd_pfi_map,
    "equiv": _cmd_equiv,
    "discomfort": _cmd_discomfort,
    "sbdi": _cmd_sbdi,
    "estimate-blur": _cmd_estimate_blur,
    "eval": _cmd_eval,
    "synth-natural": _cmd_synth_natural,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except (DomainError, ShapeError, QuadratureError, EstimationError,
            FitError, ManifestError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
