"""Deterministic artifact directories for construction results.

A result persists as a directory of CSV and JSON files.  Floats are
written as their shortest round-trip decimal and JSON keys are sorted,
so identical runs produce byte-identical directories.  The loader
rebuilds a full ConstructionResult and raises FormatError on anything
missing or malformed.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Mapping, Sequence

from .carpenter import ChainState, ConstructionResult, Operation, Residual
from .errors import FormatError
from .moves import FrameVector, MoveLog, PairMove
from .verify import VerificationReport

ARTIFACT_VERSION = 1

MOVES_HEADER = (
    "step",
    "left_id",
    "right_id",
    "alpha",
    "sign",
    "beta",
    "target",
    "achieved",
    "renormalized",
)
VECTORS_HEADER = ("vector_id", "frame_index", "coefficient")
RESIDUALS_HEADER = ("chain_id", "slot", "value", "vector_id")
DEFECTS_HEADER = ("frame_index", "defect", "closed_form_defect")


def fmt(value: float) -> str:
    """Shortest decimal that parses back to the same float."""
    return repr(float(value))


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _read_json(path: Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise FormatError(f"cannot read {path.name}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path.name} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FormatError(f"{path.name}: expected a JSON object")
    return data


def write_csv_rows(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read_csv(path: Path, header: Sequence[str]) -> list[list[str]]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            got = next(reader, None)
            if got != list(header):
                raise FormatError(
                    f"{path.name}: expected header {','.join(header)}"
                )
            return [row for row in reader if row]
    except OSError as exc:
        raise FormatError(f"cannot read {path.name}: {exc}") from exc


def write_artifacts(
    result: ConstructionResult,
    outdir: str | Path,
    *,
    config: Mapping | None = None,
) -> list[Path]:
    """Write the full artifact directory; returns the paths written."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    seq = {
        "version": ARTIFACT_VERSION,
        "route": result.route,
        "window": result.window,
        "lam": [float(x) for x in result.lam],
        "targets": [float(x) for x in result.targets],
        "params": result.params,
        "notes": list(result.notes),
        "untouched": list(result.untouched),
    }
    if config is not None:
        seq["config"] = dict(config)
    path = out / "sequences.json"
    _write_json(path, seq)
    written.append(path)

    ops = {
        "version": ARTIFACT_VERSION,
        "ops": [op.to_json_dict() for op in result.ops],
        "constructed": [
            [slot, result.constructed[slot].id] for slot in sorted(result.constructed)
        ],
        "achieved": [
            [slot, result.achieved[slot]] for slot in sorted(result.achieved)
        ],
        "chain_states": {
            cid: {
                "selected_indices": list(state.selected_indices),
                "x_values": [float(x) for x in state.x_values],
                "pending_id": state.pending.id,
            }
            for cid, state in sorted(result.chain_states.items())
        },
    }
    path = out / "ops.json"
    _write_json(path, ops)
    written.append(path)

    path = out / "transforms.json"
    _write_json(
        path,
        {"version": ARTIFACT_VERSION, "transforms": list(result.transforms_applied)},
    )
    written.append(path)

    rows = []
    for slot in sorted(result.constructed):
        vec = result.constructed[slot]
        for idx in sorted(vec.coeffs):
            rows.append((vec.id, idx, fmt(vec.coeffs[idx])))
    for res in sorted(result.residuals, key=lambda r: r.slot):
        for idx in sorted(res.vector.coeffs):
            rows.append((res.vector.id, idx, fmt(res.vector.coeffs[idx])))
    path = out / "vectors.csv"
    write_csv_rows(path, VECTORS_HEADER, rows)
    written.append(path)

    path = out / "residuals.csv"
    write_csv_rows(
        path,
        RESIDUALS_HEADER,
        [
            (res.chain_id, res.slot, fmt(res.value), res.vector.id)
            for res in sorted(result.residuals, key=lambda r: r.slot)
        ],
    )
    written.append(path)

    for cid in sorted(result.logs):
        log = result.logs[cid]
        path = out / f"moves_chain_{cid}.csv"
        write_csv_rows(
            path,
            MOVES_HEADER,
            [
                (
                    m.step,
                    m.left_id,
                    m.right_id,
                    fmt(m.alpha),
                    fmt(m.sign),
                    fmt(m.beta),
                    fmt(m.target),
                    fmt(m.achieved),
                    int(m.renormalized),
                )
                for m in log.moves
            ],
        )
        written.append(path)
    return written


def write_report(report: VerificationReport, outdir: str | Path) -> list[Path]:
    """Write report.json and defect_table.csv for a verification report."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "report.json"
    _write_json(path, report.to_json_dict())
    written = [path]
    rows = [
        (
            row.frame_index,
            fmt(row.defect),
            "" if row.closed_form is None else fmt(row.closed_form),
        )
        for row in report.defect_table
    ]
    path = out / "defect_table.csv"
    write_csv_rows(path, DEFECTS_HEADER, rows)
    written.append(path)
    return written


def _parse_float(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise FormatError(f"{where}: bad float {text!r}") from exc


def _parse_int(text, where: str) -> int:
    try:
        return int(text)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: bad integer {text!r}") from exc


def _load_vectors(path: Path) -> dict[str, FrameVector]:
    vectors: dict[str, dict[int, float]] = {}
    order: list[str] = []
    for row in _read_csv(path, VECTORS_HEADER):
        if len(row) != 3:
            raise FormatError(f"{path.name}: expected 3 columns, got {len(row)}")
        vid, idx_s, coeff_s = row
        idx = _parse_int(idx_s, path.name)
        coeff = _parse_float(coeff_s, path.name)
        if vid not in vectors:
            vectors[vid] = {}
            order.append(vid)
        if idx in vectors[vid]:
            raise FormatError(f"{path.name}: duplicate entry for {vid!r} at {idx}")
        vectors[vid][idx] = coeff
    return {vid: FrameVector(vectors[vid], vid) for vid in order}


def _load_moves(path: Path, chain_id: str, feed: list[int], start: int | None) -> MoveLog:
    moves = []
    for row in _read_csv(path, MOVES_HEADER):
        if len(row) != len(MOVES_HEADER):
            raise FormatError(
                f"{path.name}: expected {len(MOVES_HEADER)} columns, got {len(row)}"
            )
        moves.append(
            PairMove(
                step=_parse_int(row[0], path.name),
                left_id=row[1],
                right_id=row[2],
                alpha=_parse_float(row[3], path.name),
                sign=_parse_float(row[4], path.name),
                beta=_parse_float(row[5], path.name),
                target=_parse_float(row[6], path.name),
                achieved=_parse_float(row[7], path.name),
                renormalized=bool(_parse_int(row[8], path.name)),
            )
        )
    return MoveLog(chain_id=chain_id, moves=moves, feed=feed, start_index=start)


def load_result(dirpath: str | Path) -> ConstructionResult:
    """Rebuild a ConstructionResult from an artifact directory."""
    root = Path(dirpath)
    if not root.is_dir():
        raise FormatError(f"not an artifact directory: {root}")
    seq = _read_json(root / "sequences.json")
    opsdoc = _read_json(root / "ops.json")
    transforms = _read_json(root / "transforms.json")
    try:
        route = str(seq["route"])
        window = int(seq["window"])
        lam = tuple(float(x) for x in seq["lam"])
        targets = tuple(float(x) for x in seq["targets"])
        params = dict(seq.get("params", {}))
        notes = tuple(str(n) for n in seq.get("notes", ()))
        untouched = tuple(int(s) for s in seq.get("untouched", ()))
        ops = tuple(Operation.from_json_dict(o) for o in opsdoc["ops"])
        constructed_ids = [(int(s), str(v)) for s, v in opsdoc["constructed"]]
        achieved = {int(s): float(v) for s, v in opsdoc["achieved"]}
        states_doc = opsdoc.get("chain_states", {})
        transform_records = tuple(dict(t) for t in transforms["transforms"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"artifact metadata malformed: {exc}") from exc

    vectors = _load_vectors(root / "vectors.csv")

    def vector(vid: str, where: str) -> FrameVector:
        vec = vectors.get(vid)
        if vec is None:
            raise FormatError(f"{where}: vector {vid!r} not in vectors.csv")
        return vec

    constructed = {
        slot: vector(vid, "ops.json constructed") for slot, vid in constructed_ids
    }
    residuals = []
    for row in _read_csv(root / "residuals.csv", RESIDUALS_HEADER):
        if len(row) != 4:
            raise FormatError(f"residuals.csv: expected 4 columns, got {len(row)}")
        cid, slot_s, value_s, vid = row
        residuals.append(
            Residual(
                cid,
                _parse_int(slot_s, "residuals.csv"),
                _parse_float(value_s, "residuals.csv"),
                vector(vid, "residuals.csv"),
            )
        )
    logs: dict[str, MoveLog] = {}
    for op in ops:
        path = root / f"moves_chain_{op.chain_id}.csv"
        if not path.exists():
            raise FormatError(f"missing move log {path.name}")
        if op.kind == "chain":
            feed = list(op.slots[1:])
            start = op.slots[0]
        else:
            feed = []
            start = None
        logs[op.chain_id] = _load_moves(path, op.chain_id, feed, start)
    chain_states = {}
    for cid, doc in states_doc.items():
        try:
            chain_states[cid] = ChainState(
                chain_id=cid,
                selected_indices=tuple(int(i) for i in doc["selected_indices"]),
                x_values=tuple(float(x) for x in doc["x_values"]),
                pending=vector(str(doc["pending_id"]), "ops.json chain_states"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"chain state {cid!r} malformed: {exc}") from exc
    try:
        return ConstructionResult(
            route=route,
            window=window,
            lam=lam,
            targets=targets,
            constructed=constructed,
            achieved=achieved,
            residuals=tuple(residuals),
            untouched=untouched,
            logs=logs,
            transforms_applied=transform_records,
            ops=ops,
            chain_states=chain_states,
            params=params,
            notes=notes,
        )
    except Exception as exc:
        raise FormatError(f"artifact directory inconsistent: {exc}") from exc


def load_config(path: str | Path) -> dict:
    """Read a run configuration file; FormatError on malformed JSON."""
    doc = _read_json(Path(path))
    return doc


def sampled_function_csv(
    path: str | Path, vector_id: str, flavor: str, samples: Sequence[tuple[float, float]]
) -> Path:
    """Write one sampled function as x,value rows with an identifying header."""
    target = Path(path)
    with open(target, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", f"value_{vector_id}_{flavor}"])
        for x, value in samples:
            writer.writerow([fmt(x), fmt(value)])
    return target
