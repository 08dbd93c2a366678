"""Batch front door: check inputs, run constructions, verify artifacts.

Subcommands: check, construct, verify, demo, export.  Exit codes follow
a scripting contract: 0 on success, 2 on domain failure (bad sequences,
failed verification), 3 on unreadable or malformed files.  The env var
CARPENTER_LOG={error|info|debug} controls stderr logging.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .carpenter import MAX_CHAINS, ConstructionResult, construct_dispatch
from .errors import CarpenterError, FormatError, ValidationError
from .operators import (
    DiagonalOracle,
    EntryOracle,
    dirichlet_target,
    neumann_model,
    sample_function,
    sine_in_cosine_coeffs,
)
from .sequences import (
    SequenceSpec,
    TailRegime,
    check_weak_majorization,
    validate_regime,
    values_of,
)
from .serialization import (
    fmt,
    load_config,
    load_result,
    write_artifacts,
    write_csv_rows,
    write_report,
)
from .verify import DIAG_TOL, GRAM_TOL, verify_construction

EXIT_OK = 0
EXIT_FAIL = 2
EXIT_FORMAT = 3

DEMOS = ("neumann-dirichlet", "sine-cosine-table")

log = logging.getLogger("carpenter")


@dataclass(frozen=True)
class RunConfig:
    """One resolved run: sequences, window, knobs, tolerances, seed."""

    label: str = "run"
    lam: SequenceSpec | tuple[float, ...] | None = None
    d: SequenceSpec | tuple[float, ...] | None = None
    window: int | None = None
    steps: int | None = None
    regime: str | None = None
    alpha: float | None = None
    zero_tol: float | None = None
    guard: int | None = None
    max_chains: int = MAX_CHAINS
    tol_gram: float = GRAM_TOL
    tol_diag: float = DIAG_TOL
    seed: int = 0
    demo: str | None = None
    grid: int = 256

    def __post_init__(self) -> None:
        if self.window is not None and self.window < 1:
            raise ValidationError(f"window must be positive, got {self.window}")
        if self.steps is not None and self.window is not None:
            if self.window < self.steps + 1:
                raise ValidationError(
                    f"window must be at least steps + 1; got window "
                    f"{self.window}, steps {self.steps}"
                )
        if self.demo is not None and self.demo not in DEMOS:
            raise ValidationError(
                f"unknown demo {self.demo!r}; available: {', '.join(DEMOS)}"
            )

    def echo(self) -> dict:
        """Config as written into the artifact directory."""
        out: dict = {
            "label": self.label,
            "window": self.window,
            "steps": self.steps,
            "seed": self.seed,
            "tolerances": {"gram": self.tol_gram, "diag": self.tol_diag},
        }
        for key in ("regime", "alpha", "zero_tol", "guard", "demo"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.max_chains != MAX_CHAINS:
            out["max_chains"] = self.max_chains
        if isinstance(self.lam, SequenceSpec):
            out["lam"] = self.lam.to_json_dict()
        elif self.lam is not None:
            out["lam"] = list(self.lam)
        if isinstance(self.d, SequenceSpec):
            out["d"] = self.d.to_json_dict()
        elif self.d is not None:
            out["d"] = list(self.d)
        return out


def _sequence_from(doc, key: str):
    value = doc.get(key)
    if value is None:
        return None
    if isinstance(value, list):
        try:
            return tuple(float(x) for x in value)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"config {key!r}: {exc}") from exc
    if isinstance(value, dict):
        try:
            return SequenceSpec.from_json_dict(value)
        except CarpenterError:
            raise
        except (TypeError, ValueError) as exc:
            raise FormatError(f"config {key!r}: {exc}") from exc
    raise FormatError(f"config {key!r} must be an array or an object")


def _opt(doc: Mapping, key: str, kind, where: str):
    value = doc.get(key)
    if value is None:
        return None
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: bad {key!r}: {exc}") from exc


def config_from_mapping(doc: Mapping, label: str = "run") -> RunConfig:
    """Build a RunConfig from parsed JSON; FormatError on bad shapes."""
    if not isinstance(doc, Mapping):
        raise FormatError("config must be a JSON object")
    where = "config"
    tolerances = doc.get("tolerances", {})
    if not isinstance(tolerances, Mapping):
        raise FormatError("config 'tolerances' must be an object")
    demo = doc.get("demo")
    if demo is not None and not isinstance(demo, str):
        raise FormatError("config 'demo' must be a string")
    regime = doc.get("regime")
    if regime is not None and not isinstance(regime, str):
        raise FormatError("config 'regime' must be a string")
    return RunConfig(
        label=str(doc.get("label", label)),
        lam=_sequence_from(doc, "lam"),
        d=_sequence_from(doc, "d"),
        window=_opt(doc, "window", int, where),
        steps=_opt(doc, "steps", int, where),
        regime=regime,
        alpha=_opt(doc, "alpha", float, where),
        zero_tol=_opt(doc, "zero_tol", float, where),
        guard=_opt(doc, "guard", int, where),
        max_chains=_opt(doc, "max_chains", int, where) or MAX_CHAINS,
        tol_gram=_opt(tolerances, "gram", float, where) or GRAM_TOL,
        tol_diag=_opt(tolerances, "diag", float, where) or DIAG_TOL,
        seed=_opt(doc, "seed", int, where) or 0,
        demo=demo,
        grid=_opt(doc, "grid", int, where) or 256,
    )


def _load_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge a config file (if any) with command line overrides."""
    if getattr(args, "config", None):
        path = Path(args.config)
        doc = load_config(path)
        cfg = config_from_mapping(doc, label=path.stem)
    else:
        cfg = RunConfig()
    updates: dict = {}
    for attr, flag in (
        ("window", "window"),
        ("steps", "steps"),
        ("seed", "seed"),
        ("grid", "grid"),
        ("tol_gram", "tol_gram"),
        ("tol_diag", "tol_diag"),
        ("demo", "demo"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            updates[attr] = value
    if updates:
        cfg = dataclasses.replace(cfg, **updates)
    if cfg.demo == "neumann-dirichlet":
        if cfg.window is None:
            cfg = dataclasses.replace(cfg, window=64)
        if cfg.steps is None:
            cfg = dataclasses.replace(cfg, steps=40)
    return cfg


def _demo_inputs(cfg: RunConfig) -> tuple[EntryOracle | None, object, object]:
    """Materialize the run's oracle and sequences."""
    if cfg.demo == "neumann-dirichlet":
        window = cfg.window or 64
        oracle, lam = neumann_model(window)
        return oracle, lam, dirichlet_target(window)
    if cfg.demo is not None:
        raise ValidationError(f"demo {cfg.demo!r} does not define a construction")
    if cfg.lam is None or cfg.d is None:
        raise ValidationError("config must supply both 'lam' and 'd' (or a demo)")
    return None, cfg.lam, cfg.d


def _resolved_window(cfg: RunConfig, lam, d) -> int:
    if cfg.window is not None:
        return cfg.window
    return min(len(values_of(lam)), len(values_of(d)))


def cmd_check(args: argparse.Namespace) -> int:
    """Majorization and regime validation; writes profile and verdict."""
    cfg = _load_run_config(args)
    _, lam, d = _demo_inputs(cfg)
    window = _resolved_window(cfg, lam, d)
    lv = values_of(lam)[:window]
    dv = values_of(d)[:window]
    verdict = check_weak_majorization(lv, dv, window)
    regime_problems: list[str] = []
    try:
        lam_spec = lam if isinstance(lam, SequenceSpec) else SequenceSpec(lv)
        d_spec = d if isinstance(d, SequenceSpec) else SequenceSpec(
            dv, regime=TailRegime(cfg.regime) if cfg.regime else TailRegime.EXPLICIT,
            alpha=cfg.alpha,
        )
        regime_problems = list(
            validate_regime(lam_spec, d_spec, window, zero_tol=cfg.zero_tol)
        )
    except CarpenterError as exc:
        regime_problems = [str(exc)]
    ok = verdict.ok and not regime_problems
    doc = {
        "ok": ok,
        "window": window,
        "first_violation_index": verdict.first_violation_index,
        "detail": verdict.detail,
        "regime_problems": regime_problems,
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        deltas = []
        total = 0.0
        for k in range(window):
            total += dv[k] - lv[k]
            deltas.append((k + 1, fmt(lv[k]), fmt(dv[k]), fmt(total)))
        write_csv_rows(
            out / "delta_profile.csv",
            ("index", "eigenvalue", "target", "surplus"),
            deltas,
        )
        with open(out / "verdict.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, sort_keys=True, indent=2)
            fh.write("\n")
    print(json.dumps(doc, sort_keys=True))
    return EXIT_OK if ok else EXIT_FAIL


def _run_construction(cfg: RunConfig) -> tuple[EntryOracle | None, ConstructionResult]:
    oracle, lam, d = _demo_inputs(cfg)
    result = construct_dispatch(
        oracle,
        lam,
        d,
        cfg.window,
        steps=cfg.steps,
        regime=cfg.regime,
        alpha=cfg.alpha,
        zero_tol=cfg.zero_tol,
        guard=cfg.guard,
        max_chains=cfg.max_chains,
    )
    return oracle, result


def _summarize(result: ConstructionResult, report) -> str:
    return (
        f"route={result.route} window={result.window} "
        f"constructed={len(result.constructed)} residuals={len(result.residuals)} "
        f"gram={report.gram_max_dev:.3e} diag={report.diag_max_dev:.3e} "
        f"ledger={report.ledger_dev:.3e} pass={report.passed}"
    )


def cmd_construct(args: argparse.Namespace) -> int:
    """Run the dispatcher, write artifacts, verify them, summarize."""
    cfg = _load_run_config(args)
    oracle, result = _run_construction(cfg)
    log.info("route %s over window %d", result.route, result.window)
    report = verify_construction(
        oracle, result, tol_gram=cfg.tol_gram, tol_diag=cfg.tol_diag
    )
    out = Path(args.out)
    write_artifacts(result, out, config=cfg.echo())
    write_report(report, out)
    if getattr(args, "figures", False):
        from .figures import render_report_figures

        render_report_figures(result, report, out, samples=_demo_samples(cfg, result))
    print(_summarize(result, report))
    for note in result.notes:
        log.info("note: %s", note)
    return EXIT_OK if report.passed else EXIT_FAIL


def _demo_samples(cfg: RunConfig, result: ConstructionResult):
    if cfg.demo != "neumann-dirichlet":
        return None
    samples = []
    for slot in sorted(result.constructed)[:8]:
        vec = result.constructed[slot]
        xs, values = sample_function(vec, "neumann", cfg.grid)
        samples.append((vec.id, xs, values))
    return samples


def cmd_verify(args: argparse.Namespace) -> int:
    """Re-audit an artifact directory; exit 2 when anything fails."""
    root = Path(args.artifacts)
    if not (root / "report.json").exists():
        raise FormatError(f"no report.json in {root}; not a finished run")
    result = load_result(root)
    oracle = DiagonalOracle(result.lam)
    report = verify_construction(
        oracle,
        result,
        tol_gram=args.tol_gram if args.tol_gram is not None else GRAM_TOL,
        tol_diag=args.tol_diag if args.tol_diag is not None else DIAG_TOL,
    )
    write_report(report, root)
    print(_summarize(result, report))
    for problem in report.problems:
        log.error("problem: %s", problem)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_demo(args: argparse.Namespace) -> int:
    """Run a named demo and write its tables next to the artifacts."""
    cfg = _load_run_config(args)
    if cfg.demo is None:
        raise ValidationError("demo requires --demo NAME")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.demo == "sine-cosine-table":
        rows = []
        for j in range(1, 17):
            for k in range(0, 17):
                rows.append((j, k, fmt(sine_in_cosine_coeffs(j, k))))
        write_csv_rows(out / "sine_cosine_table.csv", ("j", "k", "coefficient"), rows)
        print(f"table=sine-cosine rows={len(rows)}")
        return EXIT_OK
    oracle, result = _run_construction(cfg)
    report = verify_construction(
        oracle, result, tol_gram=cfg.tol_gram, tol_diag=cfg.tol_diag
    )
    write_artifacts(result, out, config=cfg.echo())
    write_report(report, out)
    samples = _demo_samples(cfg, result) or []
    for vector_id, xs, values in samples:
        write_csv_rows(
            out / f"function_{vector_id.replace('.', '_')}.csv",
            ("x", f"value_{vector_id}_neumann"),
            [(fmt(x), fmt(v)) for x, v in zip(xs, values)],
        )
    if getattr(args, "figures", False):
        from .figures import render_report_figures

        render_report_figures(result, report, out, samples=samples)
    print(_summarize(result, report))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_export(args: argparse.Namespace) -> int:
    """Bundle an artifact directory into one portable JSON document."""
    root = Path(args.artifacts)
    result = load_result(root)
    report_path = root / "report.json"
    report_doc = None
    if report_path.exists():
        try:
            report_doc = json.loads(report_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise FormatError(f"report.json unreadable: {exc}") from exc
    bundle = {
        "version": 1,
        "route": result.route,
        "window": result.window,
        "lam": list(result.lam),
        "targets": list(result.targets),
        "params": result.params,
        "notes": list(result.notes),
        "untouched": list(result.untouched),
        "ops": [op.to_json_dict() for op in result.ops],
        "transforms": list(result.transforms_applied),
        "achieved": [[slot, result.achieved[slot]] for slot in sorted(result.achieved)],
        "vectors": {
            vec.id: {str(i): c for i, c in sorted(vec.coeffs.items())}
            for vec in result.all_vectors().values()
        },
        "residuals": [
            {
                "chain_id": res.chain_id,
                "slot": res.slot,
                "value": res.value,
                "vector_id": res.vector.id,
            }
            for res in sorted(result.residuals, key=lambda r: r.slot)
        ],
        "moves": {
            cid: [
                {
                    "step": m.step,
                    "left_id": m.left_id,
                    "right_id": m.right_id,
                    "alpha": m.alpha,
                    "sign": m.sign,
                    "beta": m.beta,
                    "target": m.target,
                    "achieved": m.achieved,
                    "renormalized": m.renormalized,
                }
                for m in result.logs[cid].moves
            ]
            for cid in sorted(result.logs)
        },
        "report": report_doc,
    }
    target = Path(args.out)
    if target.parent and not target.parent.exists():
        target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(bundle, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"exported {target}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carpenter",
        description="Constructive diagonals for operators with discrete spectrum.",
    )
    parser.add_argument(
        "--log",
        choices=("error", "info", "debug"),
        default=None,
        help="stderr log level (overrides CARPENTER_LOG)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, demo: bool = False) -> None:
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--window", type=int, default=None)
        p.add_argument("--steps", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        if demo:
            p.add_argument("--demo", choices=DEMOS, default=None)
            p.add_argument("--grid", type=int, default=None)

    p = sub.add_parser("check", help="validate majorization and regime")
    common(p, demo=True)
    p.add_argument("--out", default=None, help="directory for profile artifacts")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("construct", help="run a construction and verify it")
    common(p, demo=True)
    p.add_argument("--out", required=True, help="artifact directory")
    p.add_argument("--tol-gram", dest="tol_gram", type=float, default=None)
    p.add_argument("--tol-diag", dest="tol_diag", type=float, default=None)
    p.add_argument("--figures", action="store_true", help="also render PNG figures")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="re-audit an artifact directory")
    p.add_argument("artifacts", help="directory written by construct")
    p.add_argument("--tol-gram", dest="tol_gram", type=float, default=None)
    p.add_argument("--tol-diag", dest="tol_diag", type=float, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("demo", help="run a named demo")
    common(p, demo=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--tol-gram", dest="tol_gram", type=float, default=None)
    p.add_argument("--tol-diag", dest="tol_diag", type=float, default=None)
    p.add_argument("--figures", action="store_true", help="also render PNG figures")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("export", help="bundle artifacts into one JSON file")
    p.add_argument("artifacts", help="directory written by construct")
    p.add_argument("--out", required=True, help="bundle file path")
    p.set_defaults(func=cmd_export)
    return parser


def _configure_logging(flag: str | None) -> None:
    level_name = flag or os.environ.get("CARPENTER_LOG", "error")
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        level_name.lower(), logging.ERROR
    )
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s"
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.log)
    try:
        return args.func(args)
    except FormatError as exc:
        log.error("%s", exc)
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except CarpenterError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
