"""Command line interface.

Tasks: ess-spectrum, fredholm, crosscheck, verify-algebra, verify-fourier.
Configs are JSON files describing the group, the kernel and the numerical
options; artifacts (manifest, CSV, SVG, provenance) are deterministic so
runs can be diffed.

Exit codes: 0 success, 1 configuration or usage error, 2 inconclusive
Fredholm verdict, 3 residual validation failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from .errors import ConfigError, CoronaSpectraError

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS")


def entry() -> None:
    """Console entry point: applies the thread cap before the numerical
    stack is imported, then dispatches."""
    cap = os.environ.get("CORONA_SPECTRA_THREADS")
    if cap:
        if not cap.isdigit() or int(cap) < 1:
            print(f"error: CORONA_SPECTRA_THREADS={cap!r} is not a positive "
                  "integer", file=sys.stderr)
            raise SystemExit(1)
        for var in _THREAD_VARS:
            os.environ.setdefault(var, cap)
    raise SystemExit(main(sys.argv[1:]))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corona-spectra",
        description="essential spectra and Fredholm certificates of band "
                    "operators with symbolic coefficients")
    sub = parser.add_subparsers(dest="task", required=True)

    def add_common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True,
                           help="JSON file with group, kernel and options")
        p.add_argument("--out", default=None,
                       help="directory for artifacts (created if missing)")
        p.add_argument("--dual-grid", type=int, default=None,
                       help="torus samples per dimension for symbol ranges")
        p.add_argument("--bloch-grid", type=int, default=None,
                       help="quasi-momentum samples per dimension")
        p.add_argument("--cluster-points", type=int, default=None,
                       help="probes across a dense oscillation cluster")
        p.add_argument("--timestamp", action="store_true",
                       help="include a wall-clock timestamp in the manifest "
                            "(omitted by default so artifacts are "
                            "deterministic)")

    p_ess = sub.add_parser("ess-spectrum",
                           help="essential spectrum via limit kernels")
    add_common(p_ess)
    p_ess.add_argument("--svg", action="store_true",
                       help="also write a spectrum.svg plot")
    p_ess.set_defaults(func=run_ess_spectrum)

    p_fred = sub.add_parser("fredholm", help="three-state Fredholm certificate")
    add_common(p_fred)
    p_fred.add_argument("--point", type=float, nargs="+", default=[0.0],
                        help="test point z (one or two floats: re [im])")
    p_fred.set_defaults(func=run_fredholm)

    p_cross = sub.add_parser("crosscheck",
                             help="finite truncation against the essential "
                                  "spectrum")
    add_common(p_cross)
    p_cross.add_argument("--window", type=int, required=True,
                         help="truncation half-width")
    p_cross.add_argument("--tolerance", type=float, default=1e-3,
                         help="containment tolerance for outlier reporting")
    p_cross.set_defaults(func=run_crosscheck)

    for name, runner in (("verify-algebra", run_verify_algebra),
                         ("verify-fourier", run_verify_fourier)):
        p_v = sub.add_parser(name, help=f"randomized {name.split('-')[1]} "
                                        "identity residuals")
        p_v.add_argument("--group", default="zn:1",
                         help="zn:<dim>, a catalog name (S3, D4, Q8, Z<m>), "
                              "or a JSON file with a group description")
        p_v.add_argument("--seed", type=int, default=0)
        p_v.add_argument("--trials", type=int, default=6)
        p_v.add_argument("--tol", type=float, default=1e-10,
                         help="residual threshold for the pass verdict")
        p_v.set_defaults(func=runner)
    return parser


def main(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except CoronaSpectraError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


# ---------------------------------------------------------------------------
# config handling


def load_config(path: str):
    from . import groups, kernels, spectra
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object", "/")
    if "group" not in data:
        raise ConfigError("missing group description", "/group")
    try:
        g = groups.group_from_json(data["group"])
    except CoronaSpectraError as exc:
        raise ConfigError(str(exc), "/group")
    if "kernel" not in data:
        raise ConfigError("missing kernel terms", "/kernel")
    if not isinstance(data["kernel"], list) or not data["kernel"]:
        raise ConfigError("kernel has no terms", "/kernel")
    for i, entry_ in enumerate(data["kernel"]):
        if not isinstance(entry_, dict) or "coeff" not in entry_ \
                or "profile" not in entry_:
            raise ConfigError("kernel term needs 'coeff' and 'profile'",
                              f"/kernel/{i}")
    try:
        phi = kernels.kernel_from_json(data["kernel"], g)
    except (CoronaSpectraError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad kernel data: {exc}", "/kernel")
    if not phi.terms:
        raise ConfigError("kernel has no terms after canonicalization "
                          "(all coefficients or profiles vanish)", "/kernel")
    opts = spectra.SpectralOptions()
    extra = data.get("options", {})
    if not isinstance(extra, dict):
        raise ConfigError("options must be an object", "/options")
    for key, value in extra.items():
        if not hasattr(opts, key):
            raise ConfigError(f"unknown option {key!r}", f"/options/{key}")
        kind = type(getattr(opts, key))
        try:
            setattr(opts, key, kind(value))
        except (TypeError, ValueError):
            raise ConfigError(f"option {key!r} expects {kind.__name__}",
                              f"/options/{key}")
    digest = hashlib.sha256(raw.encode("utf-8")).hexdigest()
    return g, phi, opts, digest, data


def _apply_cli_options(opts, args) -> None:
    if getattr(args, "dual_grid", None):
        opts.dual_grid = args.dual_grid
    if getattr(args, "bloch_grid", None):
        opts.bloch_grid = args.bloch_grid
    if getattr(args, "cluster_points", None):
        opts.cluster_points = args.cluster_points


def _manifest(task: str, digest: str, opts, extra: dict, stamp: bool) -> dict:
    import numpy
    import scipy
    from . import __version__
    man = {
        "task": task,
        "package": "corona-spectra",
        "version": __version__,
        "python": sys.version.split()[0],
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "config_sha256": digest,
        "options": {k: getattr(opts, k) for k in vars(opts)},
        "timestamp": None,
    }
    if stamp:
        import datetime
        man["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    man.update(extra)
    return man


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: str, header, rows) -> None:
    import csv
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _ensure_out(args):
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    return args.out


# ---------------------------------------------------------------------------
# tasks


def run_ess_spectrum(args) -> int:
    from . import spectra
    from .sets import set_to_json, set_to_rows
    g, phi, opts, digest, _ = load_config(args.config)
    _apply_cli_options(opts, args)
    result = spectra.essential_spectrum(phi, opts)
    s = result.spectrum
    print(f"essential spectrum: {len(s.intervals)} interval(s), "
          f"{s.points.size} point(s), {len(s.circles)} circle(s)")
    for iv in s.intervals:
        print(f"  interval [{iv.lo:.12g}, {iv.hi:.12g}]")
    if s.points.size and s.points.size <= 16:
        for p in sorted(s.points, key=lambda z: (z.real, z.imag)):
            print(f"  point {p.real:.12g}{p.imag:+.12g}j")
    print(f"resolution: {s.resolution:.6g}")
    print(f"quasi-orbits: {result.family_size} probed, "
          f"{result.unique_kernels} distinct limit kernels")
    out = _ensure_out(args)
    if out:
        _write_json(os.path.join(out, "manifest.json"),
                    _manifest("ess-spectrum", digest, opts,
                              {"family_size": result.family_size,
                               "unique_kernels": result.unique_kernels,
                               "coverage_gap": result.coverage_gap},
                              args.timestamp))
        _write_csv(os.path.join(out, "spectrum.csv"),
                   ("re", "im", "tag", "resolution"), set_to_rows(s))
        _write_json(os.path.join(out, "provenance.json"),
                    {"spectrum": set_to_json(s),
                     "quasi_orbits": result.provenance})
        if args.svg:
            with open(os.path.join(out, "spectrum.svg"), "w",
                      encoding="utf-8") as fh:
                fh.write(render_svg(s))
        print(f"artifacts written to {out}")
    return 0


def run_fredholm(args) -> int:
    from . import spectra
    g, phi, opts, digest, _ = load_config(args.config)
    _apply_cli_options(opts, args)
    if len(args.point) > 2:
        raise ConfigError("--point takes one or two floats")
    z = complex(args.point[0], args.point[1] if len(args.point) == 2 else 0.0)
    cert = spectra.is_fredholm(phi, z, opts)
    verdict = {True: "FREDHOLM", False: "NOT_FREDHOLM", None: "INCONCLUSIVE"}
    print(f"verdict: {verdict[cert.verdict]}")
    print(cert.message)
    out = _ensure_out(args)
    if out:
        _write_json(os.path.join(out, "manifest.json"),
                    _manifest("fredholm", digest, opts,
                              {"point": [z.real, z.imag]}, args.timestamp))
        _write_json(os.path.join(out, "certificate.json"), {
            "verdict": verdict[cert.verdict],
            "point": [z.real, z.imag],
            "distance": cert.distance,
            "depth": cert.depth,
            "resolution": cert.resolution,
            "message": cert.message,
            "witnesses": cert.witnesses,
        })
        print(f"artifacts written to {out}")
    return 2 if cert.verdict is None else 0


def run_crosscheck(args) -> int:
    from . import spectra
    g, phi, opts, digest, _ = load_config(args.config)
    _apply_cli_options(opts, args)
    ess = spectra.essential_spectrum(phi, opts)
    report = spectra.truncation_crosscheck(phi, args.window, ess=ess, opts=opts,
                                           tolerance=args.tolerance)
    print(f"truncation half-width {report.n_half} ({report.size} sites), "
          f"{'hermitian' if report.hermitian else 'non-self-adjoint'}")
    print(f"max distance to essential spectrum: {report.max_distance:.6g}")
    print(f"fraction within tolerance {report.tolerance:g}: "
          f"{report.contained_fraction:.4f}")
    for o in report.outliers:
        print(f"  outlier {o['eigenvalue'][0]:.9g}{o['eigenvalue'][1]:+.9g}j "
              f"at distance {o['distance']:.3g}")
    print(f"note: {report.caveat}")
    if report.advisory:
        print(f"advisory: {report.advisory['note']}")
    out = _ensure_out(args)
    if out:
        _write_json(os.path.join(out, "manifest.json"),
                    _manifest("crosscheck", digest, opts,
                              {"window": args.window,
                               "tolerance": args.tolerance}, args.timestamp))
        _write_json(os.path.join(out, "crosscheck.json"), {
            "n_half": report.n_half,
            "size": report.size,
            "hermitian": report.hermitian,
            "max_distance": report.max_distance,
            "mean_distance": report.mean_distance,
            "contained_fraction": report.contained_fraction,
            "tolerance": report.tolerance,
            "outliers": report.outliers,
            "caveat": report.caveat,
            "advisory": report.advisory,
        })
        from .sets import distance_to_point
        rows = [("%.12g" % ev.real, "%.12g" % ev.imag,
                 "%.12g" % distance_to_point(ess.spectrum, complex(ev)))
                for ev in report.eigenvalues]
        _write_csv(os.path.join(out, "eigenvalues.csv"),
                   ("re", "im", "distance"), rows)
        print(f"artifacts written to {out}")
    return 0


def _group_from_arg(spec: str):
    from . import groups
    if spec.startswith("zn:"):
        return groups.zn(int(spec.split(":", 1)[1]))
    if os.path.exists(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return groups.group_from_json(data.get("group", data))
    try:
        return groups.catalog_group(spec)
    except CoronaSpectraError as exc:
        raise ConfigError(f"unknown group {spec!r}: {exc}")


def _run_verify(args, residual_fn, label: str) -> int:
    g = _group_from_arg(args.group)
    residuals = residual_fn(g, seed=args.seed, trials=args.trials)
    worst = max(residuals.values())
    for name, value in sorted(residuals.items()):
        print(f"{label}.{name}: {value:.3e}")
    if worst <= args.tol:
        print(f"PASS (max residual {worst:.3e} <= {args.tol:g})")
        return 0
    print(f"FAIL (max residual {worst:.3e} > {args.tol:g})")
    return 3


def run_verify_algebra(args) -> int:
    from . import validate
    return _run_verify(args, validate.star_identity_residuals, "algebra")


def run_verify_fourier(args) -> int:
    from . import validate
    return _run_verify(args, validate.fourier_residuals, "fourier")


# ---------------------------------------------------------------------------
# SVG rendering (hand rolled, deterministic)


def render_svg(s, width: int = 640, height: int = 200) -> str:
    """Minimal standalone SVG of a spectral set: real sets on a number
    line, complex sets as a scatter over the plane."""
    res = [p.real for p in s.points] or []
    for iv in s.intervals:
        res += [iv.lo, iv.hi]
    for c in s.circles:
        res += [c.center.real - c.radius, c.center.real + c.radius]
    lo, hi = (min(res), max(res)) if res else (-1.0, 1.0)
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def sx(v: float) -> float:
        return 40 + (v - lo) / (hi - lo) * (width - 80)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    if s.is_real():
        y = height / 2
        parts.append(f'<line x1="40" y1="{y:.1f}" x2="{width - 40}" '
                     f'y2="{y:.1f}" stroke="#999" stroke-width="1"/>')
        for tick in (lo + pad, hi - pad):
            parts.append(f'<text x="{sx(tick):.1f}" y="{y + 28:.1f}" '
                         f'font-size="11" text-anchor="middle" fill="#333">'
                         f'{tick:.6g}</text>')
        for iv in s.intervals:
            parts.append(f'<line x1="{sx(iv.lo):.2f}" y1="{y:.1f}" '
                         f'x2="{sx(iv.hi):.2f}" y2="{y:.1f}" '
                         f'stroke="#1f6feb" stroke-width="8" '
                         f'stroke-linecap="round"/>')
        for p in sorted(s.points, key=lambda z: z.real):
            parts.append(f'<circle cx="{sx(p.real):.2f}" cy="{y:.1f}" r="3.5" '
                         f'fill="#d62728"/>')
    else:
        ims = [p.imag for p in s.points] or [0.0]
        for c in s.circles:
            ims += [c.center.imag - c.radius, c.center.imag + c.radius]
        ilo, ihi = min(ims), max(ims)
        if ihi <= ilo:
            ilo, ihi = ilo - 1.0, ihi + 1.0
        ipad = 0.05 * (ihi - ilo)
        ilo, ihi = ilo - ipad, ihi + ipad

        def sy(v: float) -> float:
            return height - 30 - (v - ilo) / (ihi - ilo) * (height - 60)

        parts.append(f'<line x1="40" y1="{sy(0):.1f}" x2="{width - 40}" '
                     f'y2="{sy(0):.1f}" stroke="#ccc" stroke-width="1"/>')
        for p in sorted(s.points, key=lambda z: (z.real, z.imag)):
            parts.append(f'<circle cx="{sx(p.real):.2f}" cy="{sy(p.imag):.2f}" '
                         f'r="2" fill="#1f6feb"/>')
        for c in s.circles:
            rx = sx(c.center.real + c.radius) - sx(c.center.real)
            ry = abs(sy(c.center.imag + c.radius) - sy(c.center.imag))
            parts.append(f'<ellipse cx="{sx(c.center.real):.2f}" '
                         f'cy="{sy(c.center.imag):.2f}" rx="{rx:.2f}" '
                         f'ry="{ry:.2f}" fill="none" stroke="#d62728" '
                         f'stroke-width="1.5"/>')
        for iv in s.intervals:
            parts.append(f'<line x1="{sx(iv.lo):.2f}" y1="{sy(0):.1f}" '
                         f'x2="{sx(iv.hi):.2f}" y2="{sy(0):.1f}" '
                         f'stroke="#1f6feb" stroke-width="6" '
                         f'stroke-linecap="round"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


if __name__ == "__main__":
    entry()
