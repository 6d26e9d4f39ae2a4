"""Command-line batch driver: verify suites, classify Weyl data, list charts.

Subcommands:

* ``verify``   -- run a verification suite on a named chart and emit a
  JSON report (identity residuals, complex/equivalence checks).
* ``classify`` -- algebraic classification of a Weyl tensor given either
  five Newman-Penrose scalars or a chart and point.
* ``charts``   -- list the built-in metric charts.

Reports are deterministic for a fixed seed (timing fields aside) and
follow a versioned schema.  Exit codes: 0 all checks pass, 1 some check
failed, 2 configuration or precondition error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .errors import StructuralError, NumericError, BudgetError
from . import conformal as cf
from . import homology as hm
from . import nullframes as nf
from .geometry import builtin_charts, get_chart, sample_points, curvature_pack
from .projective import (ProjectiveChart, projective_suite,
                         build_onesol_proj_complex)

SCHEMA = 1
SUITES = ("identities", "onesol", "nosol", "proj", "bgg-flat", "np")

CONFIG_DEFAULTS = {
    "chart": "s2xs2",
    "suite": "identities",
    "points": 3,
    "trials": 2,
    "order": None,            # per-suite default when omitted
    "tol": 1e-7,
    "seed": 0,
    "metric_order": None,     # per-suite default when omitted
}


class ConfigError(Exception):
    """Invalid configuration; maps to exit code 2."""


# -- config handling ----------------------------------------------------------


def _load_config(args) -> dict:
    cfg = dict(CONFIG_DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in cfg:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            cfg[key] = val
    if cfg["tol"] <= 0:
        raise ConfigError("tolerance must be positive")
    if cfg["points"] < 1:
        raise ConfigError("need at least one sample point")
    if cfg["order"] is not None and cfg["order"] < 4:
        raise ConfigError("jet order must be at least 4")
    if cfg["suite"] not in SUITES:
        raise ConfigError(f"unknown suite {cfg['suite']!r}; pick from {SUITES}")
    return cfg


def _resolve_chart(name):
    try:
        return get_chart(name)
    except StructuralError as exc:
        raise ConfigError(str(exc))


def _emit(report: dict, out_path=None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=_jsonable)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"not JSON serializable: {type(obj)}")


# -- verify -------------------------------------------------------------------


def _rows_from_mapping(identities: dict, tol: float):
    rows = []
    for name, residual in sorted(identities.items()):
        if isinstance(residual, str):
            rows.append({"id": name, "residual": None, "passed": None,
                         "note": residual})
        else:
            rows.append({"id": name, "residual": residual,
                         "passed": bool(residual <= tol)})
    return rows


def _rows_from_report(rep) -> list:
    return [{"id": it["identity"], "residual": it["residual"],
             "passed": bool(it["passed"])} for it in rep.items]


def _suite_identities(chart, cfg):
    order = cfg["order"] or 4
    mo = cfg["metric_order"] or max(order + 4, 8)
    rep = cf.identity_suite(chart, order=order, seed=cfg["seed"],
                            tol=cfg["tol"], trials=cfg["trials"],
                            metric_order=mo)
    rows = _rows_from_mapping(rep["identities"], cfg["tol"])
    return rows, {"max_residual": rep["max_residual"]}


def _suite_complex(chart, cfg, builder):
    mo = cfg["metric_order"] or hm.VERIFY_METRIC_ORDER
    order = cfg["order"] or hm.VERIFY_ORDER
    spec, eq = builder(chart, metric_order=mo, seed=cfg["seed"])
    rng = np.random.default_rng(cfg["seed"])
    points = sample_points(spec.ctx.chart, cfg["points"], rng)
    r1 = hm.check_complex(spec, points=points, trials=cfg["trials"],
                          tol=cfg["tol"], order=order, seed=cfg["seed"])
    r2 = hm.check_equivalence(eq, points=points, trials=cfg["trials"],
                              tol=cfg["tol"], order=order, seed=cfg["seed"])
    rows = _rows_from_report(r1) + _rows_from_report(r2)
    return rows, {"complex": spec.name,
                  "max_residual": max(r1.max_residual, r2.max_residual)}


def _suite_proj(chart, cfg):
    pchart = ProjectiveChart.from_metric(chart)
    order = cfg["order"] or 4
    mo = cfg["metric_order"] or max(order + 4, 8)
    rep = projective_suite(pchart, order=order, seed=cfg["seed"],
                           tol=cfg["tol"], trials=cfg["trials"],
                           metric_order=mo)
    rows = _rows_from_mapping(rep["identities"], cfg["tol"])
    summary = {"max_residual": rep["max_residual"]}
    try:
        def builder(_, metric_order, seed):
            return build_onesol_proj_complex(pchart, metric_order=metric_order,
                                             seed=seed)
        crows, csum = _suite_complex(chart, cfg, builder)
        rows += crows
        summary["complex"] = csum["complex"]
        summary["max_residual"] = max(summary["max_residual"],
                                      csum["max_residual"])
    except StructuralError as exc:
        rows.append({"id": "onesol-complex", "residual": None,
                     "passed": None, "note": str(exc)})
    return rows, summary


def _suite_bgg(chart, cfg):
    mo = cfg["metric_order"] or hm.VERIFY_METRIC_ORDER
    order = cfg["order"] or min(hm.VERIFY_ORDER, 5)
    spec = hm.build_bgg_complex(chart, metric_order=mo)
    rep = hm.check_complex(spec, trials=cfg["trials"], tol=cfg["tol"],
                           order=order, seed=cfg["seed"])
    return _rows_from_report(rep), {"complex": spec.name,
                                    "max_residual": rep.max_residual}


def _suite_np(cfg):
    """Pointwise frame-algebra checks, driven by seeded random scalars."""
    rng = np.random.default_rng(cfg["seed"])
    frame = nf.canonical_frame()
    tol = cfg["tol"]
    rows = []

    def record(name, residual):
        rows.append({"id": name, "residual": float(residual),
                     "passed": bool(residual <= tol)})

    rt, quad = 0.0, 0.0
    for _ in range(max(cfg["trials"] * 50, 100)):
        psi = nf.NPScalars.from_sequence(
            rng.normal(size=5) + 1j * rng.normal(size=5))
        W = nf.reconstruct_weyl(psi, frame)
        back = nf.np_scalars(W, frame)
        scale = max(1.0, psi.max_abs())
        rt = max(rt, max(abs(a - b) for a, b in
                         zip(psi.as_tuple(), back.as_tuple())) / scale)
        quad = max(quad, abs(nf.quadratic_invariant(W, frame)
                             - nf.np_quadratic(psi)) / max(1.0, scale ** 2))
    record("np-round-trip", rt)
    record("np-quadratic", quad)

    basis = nf.hook_basis(frame)
    B = np.stack([b.reshape(-1) for b in basis], axis=1)
    sing = np.linalg.svd(B, compute_uv=False)
    record("hook-independence", 0.0 if sing[-1] > 1e-8 else 1.0)

    w3 = nf.reconstruct_weyl(nf.NPScalars.from_sequence([0, 0, 0, 1, 0]), frame)
    record("type3-rank", 0.0 if nf.genericity_rank(w3, frame) == 4 else 1.0)
    record("type3-invariants", max(
        abs(nf.quadratic_invariant(w3, frame)),
        abs(nf.cubic_invariants(w3, frame)["trace"])))
    w4 = nf.reconstruct_weyl(nf.NPScalars.from_sequence([0, 0, 0, 0, 1]), frame)
    record("typeN-not-generic", 0.0 if nf.genericity_rank(w4, frame) < 4 else 1.0)
    worst = max(r["residual"] for r in rows)
    return rows, {"max_residual": worst}


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    t0 = time.perf_counter()
    suite = cfg["suite"]
    try:
        if suite == "np":
            rows, summary = _suite_np(cfg)
        else:
            chart = _resolve_chart(cfg["chart"])
            if suite == "identities":
                rows, summary = _suite_identities(chart, cfg)
            elif suite == "onesol":
                rows, summary = _suite_complex(chart, cfg,
                                               hm.build_onesol_complex)
            elif suite == "nosol":
                rows, summary = _suite_complex(chart, cfg,
                                               hm.build_nosol_complex)
            elif suite == "proj":
                rows, summary = _suite_proj(chart, cfg)
            else:
                rows, summary = _suite_bgg(chart, cfg)
    except (StructuralError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    checked = [r for r in rows if r["passed"] is not None]
    passed = bool(checked) and all(r["passed"] for r in checked)
    report = {
        "schema": SCHEMA,
        "command": "verify",
        "config": cfg,
        "suite": suite,
        "rows": rows,
        "summary": summary,
        "passed": passed,
        "timing": {"seconds": time.perf_counter() - t0},
    }
    _emit(report, args.out)
    return 0 if passed else 1


# -- classify -----------------------------------------------------------------


def _parse_psi(text: str) -> nf.NPScalars:
    parts = text.split(",")
    if len(parts) != 5:
        raise ConfigError("--psi needs 5 comma-separated complex values")
    vals = []
    for p in parts:
        try:
            vals.append(complex(p.strip().replace("i", "j")))
        except ValueError:
            raise ConfigError(f"cannot parse complex value {p!r}")
    return nf.NPScalars(*vals)


def cmd_classify(args) -> int:
    t0 = time.perf_counter()
    frame = nf.canonical_frame()
    if args.psi is not None:
        psi = _parse_psi(args.psi)
        W = nf.reconstruct_weyl(psi, frame)
        source = {"psi": [str(v) for v in psi.as_tuple()]}
    elif args.chart is not None:
        chart = _resolve_chart(args.chart)
        if chart.dim != 4:
            raise ConfigError("classification needs a 4-dimensional chart")
        rng = np.random.default_rng(args.seed or 0)
        if args.point is not None:
            point = np.array([float(x) for x in args.point.split(",")])
        else:
            point = sample_points(chart, 1, rng)[0]
        pack = curvature_pack(chart, point, metric_order=4)
        g0 = pack.g.values
        diag = np.sign(np.diag(g0))
        e = np.diag(1.0 / np.sqrt(np.abs(np.diag(g0))))
        if not (diag[0] > 0 and np.all(diag[1:] < 0)):
            raise ConfigError(
                "chart metric is not diagonal (+,-,-,-) at the point; "
                "supply --psi instead")
        frame = nf.frame_from_orthonormal(e, g0)
        W = pack.W.values
        source = {"chart": chart.name, "point": [float(x) for x in point]}
        psi = nf.np_scalars(W, frame)
    else:
        raise ConfigError("classify needs either --psi or --chart")

    quad = nf.quadratic_invariant(W, frame)
    cubic = nf.cubic_invariants(W, frame)
    rank = nf.genericity_rank(W, frame)
    route = ("preferred-V" if abs(quad) > 1e-10 * (1 + np.abs(W).max()) ** 2
             else ("least-squares" if rank == 4 else "not-generic"))
    report = {
        "schema": SCHEMA,
        "command": "classify",
        "source": source,
        "petrov": nf.petrov_classify(psi, tol=args.tol),
        "psi": [{"re": v.real, "im": v.imag} for v in psi.as_tuple()],
        "quadratic_invariant": quad,
        "cubic_trace": cubic["trace"],
        "genericity_rank": rank,
        "inversion_route": route,
        "timing": {"seconds": time.perf_counter() - t0},
    }
    _emit(report, args.out)
    return 0


# -- charts -------------------------------------------------------------------


def cmd_charts(args) -> int:
    rows = [{"name": c.name, "dim": c.dim, "signature": list(c.signature),
             "generic_hint": bool(c.generic_hint)} for c in builtin_charts()]
    _emit({"schema": SCHEMA, "command": "charts", "charts": rows}, args.out)
    return 0


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="c2e",
        description="Numerical verification of conformal-to-Einstein "
                    "compatibility complexes.")
    sub = p.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("--config", help="JSON config file (flags override)")
    pv.add_argument("--chart", help="built-in chart name")
    pv.add_argument("--suite", choices=SUITES)
    pv.add_argument("--points", type=int)
    pv.add_argument("--trials", type=int)
    pv.add_argument("--order", type=int)
    pv.add_argument("--metric-order", type=int, dest="metric_order")
    pv.add_argument("--tol", type=float)
    pv.add_argument("--seed", type=int)
    pv.add_argument("--out", help="write the JSON report to this path")
    pv.set_defaults(fn=cmd_verify)

    pc = sub.add_parser("classify", help="classify algebraic Weyl data")
    pc.add_argument("--psi", help="5 complex scalars, e.g. 0,0,1,0,0 or 1+2j")
    pc.add_argument("--chart", help="evaluate the Weyl tensor of this chart")
    pc.add_argument("--point", help="comma-separated coordinates")
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--tol", type=float, default=1e-10)
    pc.add_argument("--out")
    pc.set_defaults(fn=cmd_classify)

    pl = sub.add_parser("charts", help="list built-in charts")
    pl.add_argument("--out")
    pl.set_defaults(fn=cmd_charts)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
