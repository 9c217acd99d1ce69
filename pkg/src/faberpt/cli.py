"""Command-line interface: ``faberpt forward | invert | recon | shapes``.

Exit codes: 0 success, 2 input error, 3 data inconsistency, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as fio
from .errors import DataInconsistencyError, FaberPTError, InputError
from .gpt import compute_gpt_table
from .inversion import add_noise, equivalent_ellipse_from_table, exact_recover, reference_shape
from .layerpot import Contrast, TransmissionSolver, single_layer
from .optim import ReconOptions, reconstruct
from .polynomials import Polynomial2D
from .shapes import BUILTIN, load_shape

log = logging.getLogger("faberpt")


def _sigma0(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid conductivity {text!r}") from None


def _noise(text: str) -> float:
    v = float(text)
    if not 0 <= v < 1:
        raise argparse.ArgumentTypeError("noise must lie in [0, 1)")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _mesh_n(text: str) -> int:
    v = int(text)
    if v < 32 or v % 2:
        raise argparse.ArgumentTypeError("mesh size must be even and >= 32")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="faberpt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"faberpt {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, shape_required=False):
        sp.add_argument("--shape", required=shape_required,
                        help="built-in name, path to a shape JSON, or inline JSON")
        sp.add_argument("--sigma0", type=_sigma0, help="inclusion conductivity (inf or 0 allowed where defined)")
        sp.add_argument("--order", type=_positive, default=6, help="tensor / recovery order")
        sp.add_argument("--mesh-n", type=_mesh_n, default=256, help="boundary nodes")
        sp.add_argument("--noise", type=_noise, default=0.0, help="relative multiplicative noise level")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out-dir", default=".", help="directory for output files")
        sp.add_argument("--svg", action="store_true", help="also write an SVG figure")

    fw = sub.add_parser("forward", help="compute polarization tensors of a shape")
    common(fw, shape_required=True)
    fw.add_argument("--field", type=int, default=0, metavar="G",
                    help="sample the exterior field for H = x1 on a G x G grid")
    fw.add_argument("--no-real", action="store_true", help="skip the real tensors M")

    inv = sub.add_parser("invert", help="recover a shape from a tensor table")
    common(inv)
    inv.add_argument("--gpt", required=True, help="GPT table JSON")
    inv.add_argument("--init", choices=["ellipse", "reference"],
                     help="initializer; default is exact recovery for extreme data, else reference")

    rc = sub.add_parser("recon", help="reconstruct by tensor matching")
    common(rc)
    rc.add_argument("--gpt", required=True, help="GPT table JSON")
    rc.add_argument("--init", choices=["ellipse", "reference"], default="reference")
    rc.add_argument("--max-iter", type=int, default=100)

    sub.add_parser("shapes", help="list built-in shapes")
    return p


# --- helpers ----------------------------------------------------------------


def _parse_shape(text: str):
    if text in BUILTIN:
        return load_shape(text)
    if text.lstrip().startswith("{"):
        try:
            return load_shape(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"inline shape JSON is invalid: {exc}") from exc
    path = Path(text)
    if path.suffix == ".json" or path.exists():
        return load_shape(fio.read_json(path))
    raise InputError(f"unknown shape {text!r}; use a built-in name ({', '.join(BUILTIN)}), "
                     "a JSON file or inline JSON")


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("out_dir", "verbose")}
    if cfg.get("gpt"):
        # identify the input by content so runs are reproducible from any location
        cfg["gpt"] = hashlib.sha256(Path(cfg["gpt"]).read_bytes()).hexdigest()[:16]
    return cfg


def _metadata(args) -> dict:
    return {"command": args.command, "config_hash": fio.config_hash(_config(args)),
            "config": _config(args), "version": __version__}


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_table(args):
    table = fio.read_table(args.gpt)
    if args.noise:
        table = add_noise(table, args.noise, args.seed)
    return table


def _resolve_sigma0(args, table) -> float:
    sigma0 = args.sigma0 if args.sigma0 is not None else table.sigma0
    if sigma0 is None:
        sigma0 = Contrast.from_lambda(table.lam).sigma0
    c = Contrast.from_sigma0(sigma0)
    if np.sign(c.lam) != np.sign(table.lam):
        raise DataInconsistencyError(
            f"sigma0 = {sigma0} implies lambda = {c.lam:.6g}, but the table has lambda = {table.lam:.6g}")
    return float(c.sigma0)


def _truth_points(args, n=512):
    if not args.shape:
        return None
    return _parse_shape(args.shape).mesh(n).points


def _inside(points: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Winding-number test against the closed polygon ``points``."""
    d = points[None, :] - z[:, None]
    ang = np.angle(np.roll(d, -1, axis=1) / d)
    return np.abs(ang.sum(axis=1)) > np.pi


# --- commands ---------------------------------------------------------------


def cmd_forward(args) -> int:
    if args.sigma0 is None:
        raise InputError("forward needs --sigma0")
    shape = _parse_shape(args.shape)
    contrast = Contrast.from_sigma0(args.sigma0)
    mesh = shape.mesh(args.mesh_n)
    table = compute_gpt_table(mesh, contrast, args.order, real=not args.no_real)
    if args.noise:
        table = add_noise(table, args.noise, args.seed)
    meta = _metadata(args)
    out = _out_dir(args)
    fio.write_table(out / "gpt.json", table, meta)
    (out / "mesh.csv").write_text(fio.mesh_csv(mesh, f"config_hash={meta['config_hash']}"))
    written = ["gpt.json", "mesh.csv"]
    if args.field:
        g = args.field
        r = 2 * np.max(np.abs(mesh.points - mesh.points.mean()))
        xs = np.linspace(-r, r, g) + mesh.points.mean().real
        ys = np.linspace(-r, r, g) + mesh.points.mean().imag
        z = (xs[None, :] + 1j * ys[:, None]).ravel()
        dist = np.min(np.abs(z[:, None] - mesh.points[None, :]), axis=1)
        z = z[(dist > 2 * mesh.spacing) & ~_inside(mesh.points, z)]
        H = Polynomial2D.monomial((1, 0))
        phi = TransmissionSolver(mesh, contrast).density(H)
        u = H.value(z) + single_layer(mesh, phi, z)
        (out / "field.csv").write_text(fio.field_csv(z, u, f"config_hash={meta['config_hash']}"))
        written.append("field.csv")
    if args.svg:
        (out / "shape.svg").write_text(fio.svg_overlay(mesh.points, metadata=meta, title=args.shape))
        written.append("shape.svg")
    print(json.dumps({"lambda": table.lam, "order": table.order, "N2_11": table.N2[0, 0].real,
                      "files": written}))
    return 0


def cmd_invert(args) -> int:
    table = _load_table(args)
    sigma0 = _resolve_sigma0(args, table)
    N = min(args.order, table.order)
    meta = _metadata(args)
    out = _out_dir(args)
    extreme = abs(table.lam) == 0.5
    method = args.init or ("exact" if extreme else "reference")
    result: dict = {"method": method, "lambda": table.lam, "sigma0": sigma0, "metadata": meta}
    if method == "ellipse":
        ell = equivalent_ellipse_from_table(table, sigma0)
        psi = ell.to_map()
        result["ellipse"] = ell.to_json()
    else:
        rec = exact_recover(table, N) if method == "exact" else reference_shape(table, sigma0, N)
        result["diagnostics"] = rec.diagnostics()
        psi = rec.map
        if rec.fallback is not None:
            result["fallback"] = rec.fallback.to_json()
    shape = psi.to_json()
    shape["metadata"] = meta
    result["shape"] = psi.to_json()
    fio.write_json(out / "shape.json", shape)
    fio.write_json(out / "invert.json", result)
    if args.svg:
        pts = psi.curve().evaluate(np.linspace(0, 2 * np.pi, 512, endpoint=False))
        (out / "invert.svg").write_text(fio.svg_overlay(pts, _truth_points(args), metadata=meta))
    print(json.dumps({"method": method, "gamma": psi.gamma,
                      "simple": result.get("diagnostics", {}).get("simple_curve", True)}))
    return 0


def cmd_recon(args) -> int:
    table = _load_table(args)
    sigma0 = _resolve_sigma0(args, table)
    if args.max_iter < 0:
        raise InputError("--max-iter must be >= 0")
    K = min(args.order, table.order)
    opts = ReconOptions(max_iter=args.max_iter, n=args.mesh_n)
    state = reconstruct(table, sigma0, K, init=args.init, opts=opts)
    meta = _metadata(args)
    out = _out_dir(args)
    pts = state.mesh.points
    (out / "recon_curve.csv").write_text(fio.curve_csv(pts, f"config_hash={meta['config_hash']}"))
    records = [{**r, "config_hash": meta["config_hash"]} for r in state.log]
    (out / "recon_log.jsonl").write_text(fio.run_log_jsonl(records))
    summary = {"iterations": state.iteration, "final_cost": state.cost, "initial_cost": state.costs[0],
               "flags": sorted(state.flags), "init": state.init, "metadata": meta}
    fio.write_json(out / "recon.json", summary)
    if args.svg:
        (out / "recon.svg").write_text(fio.svg_overlay(pts, _truth_points(args), metadata=meta))
    print(json.dumps({"iterations": state.iteration, "final_cost": state.cost,
                      "flags": sorted(state.flags)}))
    return 0


def cmd_shapes(args) -> int:
    for name, spec in BUILTIN.items():
        kind = spec.get("kind", spec["type"])
        print(f"{name}\t{kind}")
    return 0


COMMANDS = {"forward": cmd_forward, "invert": cmd_invert, "recon": cmd_recon, "shapes": cmd_shapes}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except FaberPTError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
