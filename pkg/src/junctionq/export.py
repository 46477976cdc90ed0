"""Writers for result tables, JSON summaries and chain exports."""

from __future__ import annotations

import csv
import json
import logging
from collections.abc import Iterable, Mapping, Sequence
from enum import Enum
from pathlib import Path
from typing import Any, Union

from pydantic import BaseModel

from junctionq.ctmc import CtmcModel
from junctionq.models import CapacityResult, PhaseTypeSpec

logger = logging.getLogger(__name__)

Row = Mapping[str, Any]


def format_value(value: Any) -> str:
    """Render a cell: 6 significant digits for floats, empty for None."""
    if value is None:
        return ""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def flatten(row: Union[BaseModel, Row]) -> dict[str, Any]:
    """Flatten one level of nested mappings into ``key_subkey`` columns."""
    data = row.model_dump() if isinstance(row, BaseModel) else dict(row)
    flat: dict[str, Any] = {}
    for key, value in data.items():
        if isinstance(value, Mapping):
            for sub, inner in value.items():
                flat[f"{key}_{sub}"] = inner
        else:
            flat[key] = value
    return flat


def write_csv(
    path: Union[str, Path],
    rows: Iterable[Union[BaseModel, Row]],
    config_hash: str,
    exclude: Sequence[str] = (),
) -> Path:
    """Write rows as UTF-8 CSV with a header and a leading ``config_hash`` column.

    Columns are the union of the rows' keys in first-seen order.

    Example:
        >>> write_csv("out/sweep.csv", rows, analyzer.config_hash)
        PosixPath('out/sweep.csv')
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    flat = [flatten(row) for row in rows]
    columns: list[str] = []
    for row in flat:
        for key in row:
            if key not in columns and key not in exclude:
                columns.append(key)
    with target.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["config_hash", *columns])
        for row in flat:
            writer.writerow([config_hash, *(format_value(row.get(c)) for c in columns)])
    logger.debug("Wrote %d rows to %s", len(flat), target)
    return target


def write_json(path: Union[str, Path], payload: Any, config_hash: str) -> Path:
    """Write ``payload`` (models, lists of models or plain data) as indented JSON."""

    def encode(value: Any) -> Any:
        if isinstance(value, BaseModel):
            return value.model_dump(mode="json")
        if isinstance(value, (list, tuple)):
            return [encode(v) for v in value]
        if isinstance(value, Mapping):
            return {str(k): encode(v) for k, v in value.items()}
        return value

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    document = {"config_hash": config_hash, "result": encode(payload)}
    target.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return target


def trace_rows(result: CapacityResult, timings: bool = False) -> list[dict[str, Any]]:
    """One row per capacity evaluation; wall time only when ``timings`` is set."""
    rows = []
    for evaluation in result.evaluations:
        row = flatten(evaluation)
        if not timings:
            row.pop("wall_time", None)
        rows.append(
            {
                "p_main": result.p_main,
                "setting": result.setting,
                "scaling": result.scaling,
                **row,
            }
        )
    return rows


def _rate(value: float) -> str:
    return repr(float(value))


def _rate_expression(
    spec: PhaseTypeSpec, var: str, prefix: str, first: int, last: int
) -> list[str]:
    """Guard and rate name for advancing phases ``first..last`` of one segment."""
    if first > last:
        return []
    name = f"{prefix}_a" if first <= spec.k_star else f"{prefix}_b"
    return [f"{var}>={first} & {var}<={last}", name]


def prism_model(model: CtmcModel) -> str:
    """PRISM-language description of the chain with one reward structure per route.

    Each modeled route becomes a module over ``q``, ``s``, ``pa`` and ``ps``.
    Arrival and service phases advance at their segment's rate; a completed
    arrival starts service, joins the queue or is lost at ``m`` waiting trains.

    Example:
        >>> text = prism_model(model)
        >>> text.splitlines()[0]
        'ctmc'
    """
    lines = [
        "ctmc",
        "",
        f"const int m = {model.m};",
        f"const double M = {_rate(model.choice_rate)};",
    ]
    names = model.route_names
    for r, process in enumerate(model.processes):
        for kind, spec in (("arr", process.arrival), ("srv", process.service)):
            lines.append(f"const int {kind}_k_{names[r]} = {spec.k};")
            lines.append(f"const double {kind}_{names[r]}_a = {_rate(spec.rate_a)};")
            lines.append(f"const double {kind}_{names[r]}_b = {_rate(spec.rate_b)};")
    lines.append("")
    for r, name in enumerate(names):
        idle = " & ".join(f"s_{names[j]}=0" for j in [r, *model.conflicts.neighbours(r)])
        lines.append(f"formula free_{name} = {idle};")

    for r, process in enumerate(model.processes):
        name = names[r]
        q, s, pa, ps = (f"{v}_{name}" for v in ("q", "s", "pa", "ps"))
        arrival, service = process.arrival, process.service
        ka, ks = f"arr_k_{name}", f"srv_k_{name}"
        free = f"free_{name}"
        last_arrival = f"arr_{name}_{'a' if arrival.k <= arrival.k_star else 'b'}"
        last_service = f"srv_{name}_{'a' if service.k <= service.k_star else 'b'}"
        lines += [
            "",
            f"module route_{name}",
            f"  {q} : [0..m] init 0;",
            f"  {s} : [0..1] init 0;",
            f"  {pa} : [1..{ka}] init 1;",
            f"  {ps} : [1..{ks}] init 1;",
        ]
        for spec, var, prefix, extra in (
            (arrival, pa, f"arr_{name}", ""),
            (service, ps, f"srv_{name}", f"{s}=1 & "),
        ):
            for first, last in ((1, min(spec.k_star, spec.k - 1)), (spec.k_star + 1, spec.k - 1)):
                parts = _rate_expression(spec, var, prefix, first, last)
                if parts:
                    guard, rate = parts
                    lines.append(f"  [] {extra}{guard} -> {rate} : ({var}'={var}+1);")
        lines += [
            f"  [] {pa}={ka} & {free} -> {last_arrival} : ({s}'=1) & ({pa}'=1) & ({ps}'=1);",
            f"  [] {pa}={ka} & !{free} & {q}<m -> {last_arrival} : ({q}'={q}+1) & ({pa}'=1);",
        ]
        if arrival.k > 1:
            lines.append(f"  [] {pa}={ka} & !{free} & {q}=m -> {last_arrival} : ({pa}'=1);")
        lines += [
            f"  [] {s}=1 & {ps}={ks} -> {last_service} : ({s}'=0) & ({ps}'=1);",
            f"  [] {free} & {q}>0 -> M : ({q}'={q}-1) & ({s}'=1) & ({ps}'=1);",
            "endmodule",
        ]

    for name in names:
        lines += ["", f'rewards "queue_{name}"', f"  true : q_{name};", "endrewards"]
    return "\n".join(lines) + "\n"


def write_edge_list(path: Union[str, Path], model: CtmcModel) -> Path:
    """Write the chain's transitions as ``src dst rate`` lines."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8") as handle:
        for src, dst, rate in zip(model.src, model.dst, model.rate):
            handle.write(f"{int(src)} {int(dst)} {_rate(rate)}\n")
    return target


def write_state_table(path: Union[str, Path], model: CtmcModel, config_hash: str) -> Path:
    """Write one CSV row per state index with its per-route components."""
    states = model.space.as_array()
    columns = [f"{name}_{c}" for name in model.route_names for c in ("q", "s", "pa", "ps")]
    rows = (
        {"index": i, **dict(zip(columns, (int(v) for v in states[i].ravel())))}
        for i in range(model.n_states)
    )
    return write_csv(path, rows, config_hash)
