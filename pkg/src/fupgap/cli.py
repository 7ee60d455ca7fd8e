"""Command-line front end.

Artifacts go to ``--output PREFIX`` when given, otherwise into the directory
named by ``FUPGAP_OUTPUT_DIR`` (as ``<command>.*``), otherwise to stdout.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from . import io as fio
from .additive_energy import energy_exponent, energy_result
from .errors import FupgapError, ResourceError, ValidationError
from .fractal_sets import (
    CantorSpec,
    IntervalCover,
    build_three_funnel,
    cover_count,
    fit_line,
    gen_cantor,
    schottky_limit_set,
    to_circle,
)
from .fup_estimator import fup_exponent
from .gap_constants import ConstantsConfig, beta_E_of_C, beta_gap, beta_jn, beta_std, constants_suite, gap_report
from .multiscale_tree import discretize, prune_triples
from .regularity import ad_constant, snap_to_lattice

OUTPUT_ENV = "FUPGAP_OUTPUT_DIR"


# --- configuration ----------------------------------------------------------


@dataclass
class Source:
    kind: str  # cantor | schottky | file
    cantor: CantorSpec | None = None
    lengths: tuple | None = None
    path: str | None = None

    def describe(self) -> dict:
        if self.kind == "cantor":
            return {"kind": "cantor", "base": self.cantor.base, "digits": _digits_text(self.cantor), "depth": self.cantor.depth}
        if self.kind == "schottky":
            return {"kind": "schottky", "lengths": list(self.lengths)}
        return {"kind": "file", "path": self.path}


@dataclass
class ExperimentConfig:
    command: str
    source: Source | None = None
    scales: list = field(default_factory=list)
    seed: int = 42
    output: str | None = None
    constants: ConstantsConfig = field(default_factory=ConstantsConfig)


def _digits_text(spec: CantorSpec) -> str:
    return "alt" if spec.digits == "alternating" else "".join(str(d) for d in spec.digits)


def parse_scales(text: str, default_ratio: float) -> list[float]:
    """``start:stop[:ratio]`` as a strictly decreasing geometric list from the larger end."""
    parts = text.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise ValidationError(f"cannot parse scale range {text!r}; use start:stop[:ratio]") from None
    if len(vals) not in (2, 3):
        raise ValidationError(f"cannot parse scale range {text!r}; use start:stop[:ratio]")
    lo, hi = sorted(vals[:2])
    ratio = vals[2] if len(vals) == 3 else default_ratio
    if not lo > 0:
        raise ValidationError("scales must be positive")
    if not 0 < ratio < 1:
        raise ValidationError("scale ratio must lie in (0, 1)")
    out, s = [], hi
    while s >= lo * (1 - 1e-9):
        out.append(s)
        s *= ratio
    if len(out) < 2:
        raise ValidationError("scale range contains fewer than two scales")
    return out


def parse_lengths(text: str) -> tuple:
    try:
        ls = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ValidationError(f"cannot parse boundary lengths {text!r}") from None
    if len(ls) != 3 or min(ls) <= 0:
        raise ValidationError("need three positive boundary lengths, e.g. 2,2,2")
    return ls


def source_from_args(args) -> Source:
    given = [k for k in ("cantor", "schottky", "file") if getattr(args, k, None)]
    if len(given) != 1:
        raise ValidationError("give exactly one of --cantor, --schottky, --file")
    if args.cantor:
        return Source("cantor", cantor=CantorSpec.parse(args.cantor, args.depth))
    if args.schottky:
        return Source("schottky", lengths=parse_lengths(args.schottky))
    return Source("file", path=args.file)


def load_cover(src: Source, alpha: float | None = None, circle: bool = False) -> IntervalCover:
    if src.kind == "cantor":
        cov = gen_cantor(src.cantor)
        return to_circle(cov) if circle else cov
    if src.kind == "schottky":
        grp = build_three_funnel(*src.lengths)
        return schottky_limit_set(grp, alpha if alpha else 1e-3)
    try:
        cov = fio.cover_from_csv(Path(src.path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read {src.path}: {exc.strerror}") from None
    if circle and cov.ambient == "unit_interval":
        cov = to_circle(cov)
    return cov


def _nonempty(cov: IntervalCover) -> IntervalCover:
    if len(cov) == 0:
        raise ValidationError("the source set is empty")
    return cov


def _family(src: Source, scales: list[float]) -> dict:
    """A cover resolved at each scale (Cantor depth or Schottky arc length)."""
    if src.kind == "cantor":
        b = src.cantor.base
        out = {}
        for a in scales:
            d = max(1, int(round(-math.log(a) / math.log(b))))
            out[float(b) ** -d] = gen_cantor(CantorSpec(b, src.cantor.digits, d))
        return out
    if src.kind == "schottky":
        grp = build_three_funnel(*src.lengths)
        return {a: schottky_limit_set(grp, a) for a in scales}
    cov = load_cover(src)
    return {a: cov for a in scales if a >= cov.resolution}


# --- output -----------------------------------------------------------------


class Sink:
    def __init__(self, command: str, output: str | None):
        if output:
            self.prefix = Path(output)
        elif os.environ.get(OUTPUT_ENV):
            self.prefix = Path(os.environ[OUTPUT_ENV]) / command
        else:
            self.prefix = None
        self.written: list[Path] = []

    def emit(self, suffix: str, text: str) -> None:
        if self.prefix is None:
            sys.stdout.write(text)
        else:
            self.written.append(fio.write(f"{self.prefix}{suffix}", text))


def say(msg: str) -> None:
    print(msg, file=sys.stderr)


# --- pipelines --------------------------------------------------------------


def dimension_fit(src: Source, scales: list[float]):
    fam = _family(src, scales)
    alphas = sorted(fam, reverse=True)
    counts = [cover_count(fam[a], a) for a in alphas]
    if len(alphas) < 3:
        raise ValidationError("need at least 3 usable scales")
    return alphas, counts, fit_line(np.log(1 / np.array(alphas)), np.log(np.array(counts, dtype=float)))


def energy_sweep(cov: IntervalCover, scales: list[float], tol: int = 1):
    res = [energy_result(snap_to_lattice(cov, a), tol) for a in sorted(scales, reverse=True)]
    fit = energy_exponent(res, drop_coarsest=min(2, len(res) - 3)) if len(res) >= 4 else None
    return res, fit


def default_radii(cov: IntervalCover) -> np.ndarray:
    lo = 16 * cov.resolution
    hi = 0.25 * (cov.hi[-1] - cov.lo[0])
    if lo >= hi:
        raise ValidationError("set too coarse for a regularity scan")
    return np.geomspace(lo, hi, 6)


def cmd_generate(args, sink: Sink) -> dict:
    src = source_from_args(args)
    cov = _nonempty(load_cover(src, args.alpha, args.circle))
    sink.emit(".csv", fio.cover_to_csv(cov))
    if src.kind == "schottky" and sink.prefix is not None:
        sink.emit(".schottky.txt", fio.schottky_to_text(build_three_funnel(*src.lengths)))
    return {"intervals": len(cov)}


def cmd_dimension(args, sink: Sink) -> dict:
    src = source_from_args(args)
    ratio = 1.0 / src.cantor.base if src.kind == "cantor" else 0.5
    alphas, counts, fit = dimension_fit(src, parse_scales(args.scales, ratio))
    sink.emit(".csv", fio.csv_text(["alpha", "count"], zip(alphas, counts), [f"slope={fio.fmt(fit.slope)}"]))
    return {"delta": fit.slope, "max_residual": fit.max_residual}


def cmd_regularity(args, sink: Sink) -> dict:
    src = source_from_args(args)
    cov = _nonempty(load_cover(src, args.alpha))
    delta = args.delta if args.delta is not None else _known_delta(src, cov)
    radii = parse_scales(args.radii, 0.5) if args.radii else default_radii(cov)
    rep = ad_constant(cov, delta, radii, seed=args.seed)
    sink.emit(".json", fio.json_text(rep.to_json()))
    return {"constant": rep.constant}


def cmd_tree(args, sink: Sink) -> dict:
    src = source_from_args(args)
    cov = _nonempty(load_cover(src))
    if cov.ambient != "unit_interval":
        raise ValidationError("trees are built for subsets of [0, 1]")
    T = discretize(cov, args.M, args.N)
    sink.emit(".tree.txt", fio.tree_to_text(T))
    info = {"vertices": len(T), "leaves": T.n_leaves}
    if args.prune:
        TT = prune_triples(T, cov)
        sink.emit(".triples.txt", fio.triples_to_text(TT))
        info["pruned_leaves"] = TT.n_leaves
    return info


def cmd_energy(args, sink: Sink) -> dict:
    src = source_from_args(args)
    cov = _nonempty(load_cover(src, args.alpha))
    ratio = 1.0 / src.cantor.base if src.kind == "cantor" else 0.5
    res, fit = energy_sweep(cov, parse_scales(args.scales, ratio), args.tol)
    comments = [f"slope={fio.fmt(fit.slope)}"] if fit else []
    sink.emit(
        ".csv",
        fio.csv_text(["alpha", "count", "energy_def15", "energy_def62", "method"], [r.to_row() for r in res], comments),
    )
    return {"slope": fit.slope if fit else float("nan")}


def cmd_fup(args, sink: Sink) -> dict:
    src = source_from_args(args)
    hs = parse_scales(args.h, 0.5)
    cov = _nonempty(load_cover(src, alpha=0.25 * min(hs), circle=True))
    delta = args.delta if args.delta is not None else (src.cantor.dimension if src.kind == "cantor" else None)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sweep = fup_exponent(cov, hs, args.rho, args.C1, delta=delta)
    for w in caught:
        say(f"warning: {w.message}")
    sink.emit(
        ".csv",
        fio.csv_text(
            ["h", "norm", "tb1_bound", "tb2_bound", "masked_size"],
            sweep.rows,
            [f"beta_empirical={fio.fmt(sweep.beta)}, label=empirical (fixed chi and C1)"],
        ),
    )
    return {"beta": sweep.beta}


def cmd_gap(args, sink: Sink) -> dict:
    cfg = _constants(args)
    if args.beta_e is None and args.C is None:
        raise ValidationError("give --beta-e or --C")
    rep = gap_report(args.n, args.delta, args.beta_e, args.C, cfg)
    doc = rep.to_json()
    if args.C is not None:
        doc["constants"] = constants_suite(args.delta, args.C, args.M, cfg=cfg).to_json(args.log_form)
        doc["beta_E_formula"] = beta_E_of_C(args.delta, args.C, cfg).to_json(args.log_form)
    if sink.prefix is not None:
        sink.emit(".json", fio.json_text(doc))
    print(f"β={fio.fmt(rep.beta_formula)}")
    print(f"β_std={fio.fmt(rep.beta_std)}")
    print(f"β_jn={fio.fmt(rep.beta_jn)}")
    return {}


def _known_delta(src: Source, cov: IntervalCover) -> float:
    if src.kind == "cantor":
        return src.cantor.dimension
    raise ValidationError("pass --delta for this source (or use full-report to measure it)")


def _constants(args) -> ConstantsConfig:
    kw = {k: getattr(args, k) for k in ("K_thm4", "K_thm61", "K5", "K1", "K3") if getattr(args, k, None) is not None}
    return ConstantsConfig(**kw)


def full_report(src: Source, scales: list[float], cfg: ConstantsConfig = ConstantsConfig(), seed: int = 42,
                log_form: bool = False) -> dict:
    """Measured exponents next to the formula constants they feed."""
    fam = _family(src, scales)
    finest = fam[min(fam)]
    _nonempty(finest)
    alphas, counts, dim = dimension_fit(src, scales)
    delta = float(np.clip(dim.slope, 1e-6, 1 - 1e-6))
    reg = ad_constant(finest, delta, default_radii(finest), seed=seed)
    C = max(reg.constant, 1.0)
    res, efit = energy_sweep(finest, [a for a in alphas if a >= 2 * finest.resolution] or alphas)
    doc = {
        "source": src.describe(),
        "scales": [float(a) for a in alphas],
        "seed": seed,
        "delta": {"value": dim.slope, "kind": "measured", "fit": dim.to_json()},
        "regularity": {"value": C, "kind": "measured", **reg.to_json()},
        "energy": {
            "rows": [list(r.to_row()) for r in res],
            "slope": efit.slope if efit else None,
            "kind": "measured",
        },
        "beta_E_formula": {"value": beta_E_of_C(delta, C, cfg).to_json(log_form), "kind": "formula"},
        "constants": {"kind": "formula", **constants_suite(delta, C, 3, cfg=cfg).to_json(log_form)},
        "beta_std": {"value": beta_std(2, delta), "kind": "formula"},
        "beta_jn": {"value": beta_jn(2, delta), "kind": "formula"},
        "config_note": cfg.note,
    }
    if efit is not None:
        bE = float(np.clip(efit.slope - delta, 0.0, delta))
        doc["beta_E_measured"] = {"value": bE, "kind": "measured", "from": "energy slope minus delta"}
        if delta < 1:
            doc["beta_gap_measured"] = {"value": beta_gap(2, delta, bE), "kind": "measured"}
    return doc


def cmd_full_report(args, sink: Sink) -> dict:
    src = source_from_args(args)
    ratio = 1.0 / src.cantor.base if src.kind == "cantor" else 0.5
    doc = full_report(src, parse_scales(args.scales, ratio), _constants(args), args.seed, args.log_form)
    sink.emit(".json", fio.json_text(doc))
    return {"delta": doc["delta"]["value"]}


# --- argument parsing -------------------------------------------------------


def _add_source(p, depth: int = 8):
    p.add_argument("--cantor", metavar="BASE:DIGITS", help="digit set, e.g. 3:02 or 4:alt")
    p.add_argument("--depth", type=int, default=depth, help="Cantor depth (default %(default)s)")
    p.add_argument("--schottky", metavar="L1,L2,L3", help="three-funnel boundary lengths")
    p.add_argument("--file", metavar="CSV", help="cover CSV written by 'generate'")
    p.add_argument("--alpha", type=float, default=None, help="arc resolution for Schottky limit sets")


def _add_constants(p):
    for k in ("K_thm4", "K_thm61", "K5", "K1", "K3"):
        p.add_argument(f"--{k}", type=float, default=None, help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    common.add_argument("--output", "-o", default=None, help="artifact path prefix")
    common.add_argument("--log-form", action="store_true", help="emit huge constants as (sign, log)")

    ap = argparse.ArgumentParser(prog="fupgap", description="Regular fractal sets, additive energy and FUP norms.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write a set cover")
    _add_source(p)
    p.add_argument("--circle", action="store_true", help="place a subset of [0, 1] on the circle")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("dimension", parents=[common], help="box-counting dimension fit")
    _add_source(p)
    p.add_argument("--scales", required=True, metavar="START:STOP[:RATIO]")
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("regularity", parents=[common], help="empirical regularity constants")
    _add_source(p)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--radii", default=None, metavar="START:STOP[:RATIO]")
    p.set_defaults(func=cmd_regularity)

    p = sub.add_parser("tree", parents=[common], help="multiscale tree and pruned triples")
    _add_source(p, depth=6)
    p.add_argument("--M", type=int, default=3)
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--prune", action="store_true")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("energy", parents=[common], help="additive energy sweep")
    _add_source(p)
    p.add_argument("--scales", required=True, metavar="START:STOP[:RATIO]")
    p.add_argument("--tol", type=int, default=1, help="window in lattice units")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("fup", parents=[common], help="restricted operator norms over h")
    _add_source(p)
    p.add_argument("--h", required=True, metavar="START:STOP[:RATIO]")
    p.add_argument("--rho", type=float, default=0.9)
    p.add_argument("--C1", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=None)
    p.set_defaults(func=cmd_fup)

    p = sub.add_parser("gap", parents=[common], help="closed-form gap exponents")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--beta-e", dest="beta_e", type=float, default=None)
    p.add_argument("--C", type=float, default=None, help="regularity constant")
    p.add_argument("--M", type=int, default=3)
    _add_constants(p)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("full-report", parents=[common], help="all measured and formula quantities")
    _add_source(p)
    p.add_argument("--scales", required=True, metavar="START:STOP[:RATIO]")
    _add_constants(p)
    p.set_defaults(func=cmd_full_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads is not None:
            _kernels.set_threads(args.threads)
        sink = Sink(args.command, args.output)
        info = args.func(args, sink)
    except ResourceError as exc:
        say(f"error: {exc}")
        return 3
    except (ValidationError, ValueError) as exc:
        say(f"error: {exc}")
        return 2
    except FupgapError as exc:
        say(f"error: {exc}")
        return exc.exit_code
    for p in sink.written:
        say(f"wrote {p}")
    for k, v in (info or {}).items():
        say(f"{k}: {fio.fmt(v)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
