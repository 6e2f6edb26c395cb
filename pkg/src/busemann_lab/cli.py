"""Command-line front end: ``busemann-lab {eval, scan-tube, probe, report}``.

Configuration is a flat JSON document (``--config``); command-line flags
override file values. Every JSON output embeds the resolved configuration.

Exit codes: 0 ok, 2 usage, 3 solver cap reached, 4 I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .envelope import EnvelopeConfig, envelope_bracket
from .experiments import (
    GridConfig, TubeSpec, classify, direction_constancy_probe, gap_scan, probe_dist_tube_to_S,
    probe_min_W, segment_affinity_probe, verdict_counts,
)
from .linalg import MinorsPoint, mat2
from .objective import Kind, ObjectiveSpec, eval_w
from .subgradient import SearchBudget
from .touching import phi_tau_closed

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_IO = 0, 2, 3, 4

CSV_HEADER = ["t", "eta11", "eta12", "eta21", "eta22", "xprime", "phi_tau",
              "phi_w_lower", "phi_w_upper", "cap", "verdict"]

# Flat config keys routed to EnvelopeConfig.
_ENVELOPE_KEYS = ("cap", "grad_box", "restarts", "tol_cut", "max_cut_iters",
                  "oracle_samples", "audit_samples")

# Scans use fewer polishing restarts than the library default; extra restarts
# did not move the upper bounds on tube points.
SCAN_RESTARTS = 4


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    objective: ObjectiveSpec = ObjectiveSpec()
    tube: TubeSpec = TubeSpec()
    budget: SearchBudget = SearchBudget()
    envelope: EnvelopeConfig = EnvelopeConfig(restarts=SCAN_RESTARTS)
    grid: GridConfig = GridConfig()
    seed: int = 0
    output_path: str = "scan_tube.csv"

    @classmethod
    def from_flat(cls, d: dict) -> RunConfig:
        """Build from a flat mapping; unknown keys are a usage error."""
        known = {"kind", "y", "epsilon", "t_range", "subgradient_budget", "n_t", "n_eta",
                 "seed", "output", *_ENVELOPE_KEYS}
        unknown = sorted(set(d) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        try:
            y = float(d.get("y", 1.0))
            objective = ObjectiveSpec(Kind(d.get("kind", Kind.COUNTEREXAMPLE.value)), y)
            tube = TubeSpec(y, float(d.get("epsilon", 0.1)), float(d.get("t_range", 10.0)))
            budget = SearchBudget.from_dict(d.get("subgradient_budget", {}))
            env = {k: d[k] for k in _ENVELOPE_KEYS if k in d}
            seed = int(d.get("seed", 0))
            envelope = EnvelopeConfig.from_dict({"restarts": SCAN_RESTARTS, **env, "seed": seed})
            grid = GridConfig(int(d.get("n_t", 21)), int(d.get("n_eta", 16)))
        except (TypeError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
        if not 0 <= seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        return cls(objective, tube, budget, envelope, grid, seed, str(d.get("output", "scan_tube.csv")))

    def to_dict(self) -> dict:
        return {
            "objective": self.objective.to_dict(),
            "tube": self.tube.to_dict(),
            "subgradient_budget": self.budget.to_dict(),
            "envelope": self.envelope.to_dict(),
            "grid": {"n_t": self.grid.n_t, "n_eta": self.grid.n_eta},
            "seed": self.seed,
            "output_path": self.output_path,
        }


def _add_common(p: argparse.ArgumentParser, objective_flag: str = "--kind") -> None:
    p.add_argument("--config", help="flat JSON config file")
    p.add_argument(objective_flag, dest="kind", choices=[k.value for k in Kind],
                   help="objective kind")
    p.add_argument("--y", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--t-range", dest="t_range", type=float)
    p.add_argument("--cap", type=float)
    p.add_argument("--grad-box", dest="grad_box", type=float)
    p.add_argument("--restarts", type=int)
    p.add_argument("--tol-cut", dest="tol_cut", type=float)
    p.add_argument("--max-cut-iters", dest="max_cut_iters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="busemann-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate W, phi_tau or a phi_W bracket at one point")
    _add_common(p)
    p.add_argument("--what", choices=["w", "phitau", "phiw"], required=True)
    p.add_argument("--point", type=float, nargs="+", required=True,
                   help="X_hat entries (4), then X'; extra values are ignored")

    p = sub.add_parser("scan-tube", help="bracket phi_W against phi_tau on a tube grid")
    _add_common(p)
    p.add_argument("--n-t", dest="n_t", type=int)
    p.add_argument("--n-eta", dest="n_eta", type=int)

    p = sub.add_parser("probe", help="run one probe and write its report")
    _add_common(p, objective_flag="--objective")
    p.add_argument("--kind", dest="probe_kind", choices=["min-w", "dist", "segment", "direction"],
                   required=True)
    p.add_argument("--point", type=float, nargs="+",
                   help="segment endpoint X or direction base Y (5 values)")
    p.add_argument("--source", type=float, nargs=4, help="segment source matrix (4 values)")
    p.add_argument("--direction", type=float, nargs=5, help="unit direction e (5 values)")
    p.add_argument("--trange", type=float, default=10.0)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--samples", type=int, default=20_000)

    p = sub.add_parser("report", help="summarise a scan-tube CSV")
    p.add_argument("input", help="CSV written by scan-tube")
    p.add_argument("--epsilon", type=float, default=None,
                   help="tube radius for re-deriving verdicts (default: from the sibling JSON)")
    return parser


def _resolve(args) -> RunConfig:
    flat: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                flat = json.load(fh)
        except OSError as exc:
            raise IOError(str(exc)) from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(flat, dict):
            raise UsageError("config must be a flat JSON object")
    for key in ("kind", "y", "epsilon", "t_range", "seed", "n_t", "n_eta", *_ENVELOPE_KEYS):
        val = getattr(args, key, None)
        if val is not None:
            flat[key] = val
    if getattr(args, "output", None) is not None:
        flat["output"] = args.output
    return RunConfig.from_flat(flat)


def _emit(doc: dict, path: str | None = None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def _point(values, need: int) -> MinorsPoint | np.ndarray:
    if values is None or len(values) < need:
        raise UsageError(f"--point needs at least {need} values")
    m = mat2(*values[:4])
    return m if need == 4 else MinorsPoint(m, float(values[4]))


def cmd_eval(args, cfg: RunConfig) -> int:
    doc = {"what": args.what, "config": cfg.to_dict(), "seed": cfg.seed}
    code = EXIT_OK
    if args.what == "w":
        doc["value"] = float(eval_w(cfg.objective, _point(args.point, 4)))
    elif args.what == "phitau":
        if cfg.objective.kind is not Kind.COUNTEREXAMPLE:
            raise UsageError("phitau is defined for the counterexample objective")
        doc["value"] = phi_tau_closed(_point(args.point, 5), cfg.objective.y)
    else:
        br = envelope_bracket(cfg.objective, _point(args.point, 5), cfg.envelope)
        doc["value"] = br.to_dict()
        if "iteration_cap_reached" in br.flags:
            code = EXIT_CAP
    _emit(doc)
    return code


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def scan_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([_fmt(r.t), *(_fmt(v) for v in np.ravel(r.eta)), _fmt(r.X.last),
                    _fmt(r.phi_tau), _fmt(r.phi_w_lower), _fmt(r.phi_w_upper), _fmt(r.cap),
                    r.verdict.value])
    return buf.getvalue()


def _check_writable(path: Path) -> None:
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir() or (path.exists() and path.is_dir()):
        raise IOError(f"cannot write to {path}")
    try:
        with open(path, "a", encoding="utf-8"):
            pass
    except OSError as exc:
        raise IOError(str(exc)) from exc


def cmd_scan_tube(args, cfg: RunConfig) -> int:
    out = Path(cfg.output_path)
    summary_path = out.with_suffix(".json")
    _check_writable(out)
    _check_writable(summary_path)
    records = gap_scan(cfg.tube, cfg.grid, cfg.envelope, cfg.seed)
    min_w = probe_min_W(ObjectiveSpec(Kind.COUNTEREXAMPLE, cfg.tube.y), cap=cfg.envelope.cap,
                        seed=cfg.seed)
    dist = probe_dist_tube_to_S(cfg.tube, seed=cfg.seed)
    counts = verdict_counts(records)
    summary = {
        "min_W": min_w.value,
        "min_W_witness": np.asarray(min_w.witness).tolist(),
        "dist_tube_to_S": dist.value,
        "dist_tube_to_S_witness": np.asarray(dist.witness).tolist(),
        "n_gap_certified": counts["gap_certified"],
        "n_gap_refuted_at_cap": counts["gap_refuted_at_cap"],
        "n_inconclusive": counts["inconclusive"],
        "n_rows": len(records),
        "n_flagged": sum(1 for r in records if r.flags),
        "config": cfg.to_dict(),
        "seed": cfg.seed,
    }
    # single writer, after all tasks have finished
    try:
        out.write_text(scan_csv(records), encoding="utf-8")
        summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IOError(str(exc)) from exc
    print(json.dumps(summary, indent=2, sort_keys=True))
    capped = any("iteration_cap_reached" in r.flags for r in records)
    return EXIT_CAP if capped else EXIT_OK


def cmd_probe(args, cfg: RunConfig) -> int:
    kind = args.probe_kind
    if kind == "min-w":
        cap = args.cap if args.cap is not None else 1e4
        rep = probe_min_W(ObjectiveSpec(Kind.COUNTEREXAMPLE, cfg.objective.y), args.samples, cap,
                          cfg.seed)
    elif kind == "dist":
        rep = probe_dist_tube_to_S(cfg.tube, args.samples, seed=cfg.seed)
    elif kind == "segment":
        if args.source is None:
            raise UsageError("segment probe needs --source")
        if args.k < 3:
            raise UsageError("segment probe needs --k >= 3")
        rep = segment_affinity_probe(cfg.objective, _point(args.point, 5), mat2(*args.source),
                                     args.k, cfg.envelope)
    else:
        if args.direction is None:
            raise UsageError("direction probe needs --direction")
        e = MinorsPoint.from_vec(args.direction)
        if abs(e.norm() - 1.0) > 1e-9:
            raise UsageError("--direction must be a unit vector")
        rep = direction_constancy_probe(cfg.objective, _point(args.point, 5), e, args.trange,
                                        args.k, cfg.envelope)
    doc = {**rep.to_dict(), "config": cfg.to_dict(), "seed": cfg.seed}
    _emit(doc, args.output)
    return EXIT_OK


def cmd_report(args) -> int:
    path = Path(args.input)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        sibling = path.with_suffix(".json")
        meta = json.loads(sibling.read_text(encoding="utf-8")) if sibling.exists() else {}
    except OSError as exc:
        raise IOError(str(exc)) from exc
    epsilon = args.epsilon
    if epsilon is None:
        epsilon = meta.get("config", {}).get("tube", {}).get("epsilon", TubeSpec().epsilon)
    counts = {"gap_certified": 0, "gap_refuted_at_cap": 0, "inconclusive": 0}
    mismatches = 0
    max_gap = -np.inf
    try:
        for r in rows:
            tau, lo, up = float(r["phi_tau"]), float(r["phi_w_lower"]), float(r["phi_w_upper"])
            counts[r["verdict"]] += 1
            mismatches += classify(tau, lo, up, epsilon).value != r["verdict"]
            max_gap = max(max_gap, up - tau)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"malformed scan CSV: {exc}") from exc
    print(json.dumps({
        "rows": len(rows),
        "epsilon": epsilon,
        "verdicts": counts,
        "verdict_mismatches": mismatches,
        "max_upper_minus_phi_tau": max_gap if rows else None,
    }, indent=2, sort_keys=True))
    return EXIT_OK if mismatches == 0 else EXIT_USAGE


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "report":
            return cmd_report(args)
        cfg = _resolve(args)
        handler = {"eval": cmd_eval, "scan-tube": cmd_scan_tube, "probe": cmd_probe}[args.command]
        return handler(args, cfg)
    except UsageError as exc:
        print(f"busemann-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        print(f"busemann-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"busemann-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
