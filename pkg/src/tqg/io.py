"""Deterministic file formats: CSV and JSON writers plus matching readers.

CSV floats carry 17 significant digits, rows end with a bare newline, and the
decimal separator is always '.'; JSON objects are written with sorted keys.
Identical inputs therefore produce byte-identical files, and every emitted
file can be read back by the functions here.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .lemmas import LatticeSumTable, LemmaReport, SplitSummary
from .norms import RadiusFit
from .spectral import SpectralField, SpectralGrid, from_modes
from .tracker import MonitorReport, RadiusTrace

__all__ = [
    "fmt",
    "write_csv",
    "read_csv",
    "write_json",
    "read_json",
    "field_to_entries",
    "field_to_json",
    "field_from_json",
    "write_norm_trace",
    "write_trace_csv",
    "read_trace_csv",
    "write_trajectory_csv",
    "monitor_report_dict",
    "lemma_report_dict",
    "lattice_table_rows",
    "radius_fit_dict",
]


def fmt(x: float) -> str:
    """Render a float with 17 significant digits (lossless round trip)."""
    return f"{float(x):.17g}"


def write_csv(path, header: list[str], rows, preamble: list[str] | None = None) -> None:
    lines = []
    if preamble:
        lines.extend(preamble)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(x) if isinstance(x, (int, float, np.floating)) else str(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_csv(path) -> tuple[list[str], list[str], list[list[float]]]:
    """Read a CSV written by write_csv: (preamble lines, header, float rows)."""
    preamble: list[str] = []
    header: list[str] = []
    rows: list[list[float]] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        if line.startswith("#"):
            preamble.append(line)
            continue
        if not header:
            header = line.split(",")
            continue
        rows.append([float(tok) for tok in line.split(",")])
    return preamble, header, rows


def write_json(path, obj) -> None:
    Path(path).write_text(
        json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8", newline="\n"
    )


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


# -- fields -----------------------------------------------------------------

def field_to_entries(field: SpectralField) -> list[list[float]]:
    """Nonzero modes as [k1, k2, re, im] sorted lexicographically by (k1, k2)."""
    g = field.grid
    entries = []
    nz = np.argwhere(field.coeffs != 0)
    for i, j in nz:
        c = field.coeffs[i, j]
        entries.append([int(g.k1d[i]), int(g.k1d[j]), float(c.real), float(c.imag)])
    entries.sort(key=lambda e: (e[0], e[1]))
    return entries


def field_to_json(field: SpectralField) -> dict:
    return {
        "n": field.grid.n,
        "is_real": bool(field.is_real),
        "entries": field_to_entries(field),
    }


def field_from_json(obj: dict, grid: SpectralGrid | None = None) -> SpectralField:
    from .spectral import make_grid

    n = int(obj["n"])
    if grid is None:
        grid = make_grid(n)
    elif grid.n != n:
        raise ValueError(f"field was written for N={n}, expected N={grid.n}")
    entries = [((int(e[0]), int(e[1])), complex(e[2], e[3])) for e in obj["entries"]]
    field = from_modes(grid, entries, enforce_real=False)
    if obj.get("is_real"):
        from .spectral import reality_defect

        defect = reality_defect(field)
        scale = max(field.max_abs(), 1e-300)
        if defect > 1e-12 * scale:
            raise ValueError(
                f"field marked is_real but conjugate symmetry fails (defect {defect:.3e})"
            )
        field = dataclasses.replace(field, is_real=True)
    return field


# -- traces and reports -------------------------------------------------------

def write_norm_trace(path, s_values, norms, name: str = "norm") -> None:
    write_csv(path, ["s", name], zip(s_values, norms))


def write_trace_csv(path, trace: RadiusTrace) -> None:
    """Radius trace as CSV with a comment line naming c, theta and D."""
    preamble = [f"# c={fmt(trace.c)} theta={fmt(trace.theta)} D_data={fmt(trace.d_data)}"]
    header = ["s", "Theta", "phi", "G"]
    cols = [trace.s, trace.theta_vals, trace.phi_vals, trace.g_vals]
    if trace.gamma_vals is not None:
        header.append("Gamma")
        cols.append(trace.gamma_vals)
    write_csv(path, header, zip(*cols), preamble=preamble)


def read_trace_csv(path) -> dict:
    preamble, header, rows = read_csv(path)
    meta = {}
    if preamble:
        for token in preamble[0].lstrip("# ").split():
            key, _, val = token.partition("=")
            meta[key] = float(val)
    data = np.array(rows) if rows else np.zeros((0, len(header)))
    return {"meta": meta, "header": header, "columns": {h: data[:, i] for i, h in enumerate(header)}}


def write_trajectory_csv(path, rows) -> None:
    """Per-snapshot norms: (s, ||b||_H4, ||q||_H3, G, phi)."""
    write_csv(path, ["s", "b_h4", "q_h3", "G", "phi"], rows)


def monitor_report_dict(report: MonitorReport) -> dict:
    return {
        "run_id": report.run_id,
        "violations": [
            {"s": v.s, "kind": v.kind, "lhs": v.lhs, "rhs": v.rhs}
            for v in report.violations
        ],
    }


def lemma_report_dict(report: LemmaReport) -> dict:
    return {
        "lemma_id": report.lemma_id,
        "trials": report.trials,
        "max_ratio": report.max_ratio,
        "fitted_constant": report.fitted_constant,
        "violations": report.violations,
        "slack": report.slack,
        "parameters": report.parameters,
    }


def split_summary_dict(summary: SplitSummary) -> dict:
    return {
        "trials": summary.trials,
        "max_split_err": summary.max_split_err,
        "i1_constant": summary.i1_constant,
        "i2_constant": summary.i2_constant,
        "i1_peak": summary.i1_peak,
        "i2_peak": summary.i2_peak,
        "parameters": summary.parameters,
    }


def lattice_table_rows(table: LatticeSumTable):
    for row in table.rows:
        yield (
            row.radius,
            row.partial_sum,
            row.tail_estimate if row.tail_estimate is not None else float("nan"),
        )


def radius_fit_dict(fit: RadiusFit) -> dict:
    return {"phi_est": fit.phi_est, "p_est": fit.p_est, "residual": fit.residual}
