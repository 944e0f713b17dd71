"""Render simulator sweep CSVs as figure panels.

Input files follow the sweep engine's wire schema: a header row naming the
swept parameter column(s) plus ``fidelity`` (the time-series panel uses
``gt,fidelity``). One invocation renders one panel:

    nvfiber-render --figure 3c --csv fig3c.csv --out fig3c.svg

1-D sweeps and the time series become fidelity curves; panel 7 becomes a
2-D map over the two decay rates, and its minimum cell value is printed.
Rendering never modifies its inputs; a SHA-256 of the plotted numbers is
embedded in the image metadata so re-renders of identical data can be
verified byte-independently.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


class SchemaError(ValueError):
    """CSV input does not match the figure's expected column schema."""


#: per-panel schema and axis semantics (labels follow the source captions)
FIGURE_SPECS: dict[str, dict] = {
    "3a": {"columns": ("pulses.omega_m", "fidelity"), "xlabel": r"$\Omega_m/g$",
           "kind": "line"},
    "3b": {"columns": ("pulses.t1", "fidelity"), "xlabel": r"$gt_1$", "kind": "line"},
    "3c": {"columns": ("pulses.tp", "fidelity"), "xlabel": r"$gt_p$", "kind": "line"},
    "4": {"columns": ("system.nu", "fidelity"), "xlabel": r"$\nu/g$", "kind": "line"},
    "5": {"columns": ("system.delta", "fidelity"), "xlabel": r"$\Delta/g$",
          "kind": "line"},
    "6": {"columns": ("gt", "fidelity"), "xlabel": r"$gt$", "kind": "line"},
    "7": {"columns": ("system.kappa", "system.gamma", "fidelity"),
          "xlabel": r"$\kappa/g$", "ylabel": r"$\gamma/g$", "kind": "heatmap"},
}

YLABEL = "Fidelity"


@dataclass(frozen=True)
class FigureJob:
    figure_id: str
    csv_path: str | Path
    out_path: str | Path


@dataclass(frozen=True)
class RenderResult:
    path: Path
    data_hash: str
    xlabel: str
    ylabel: str
    min_value: float
    max_value: float
    n_rows: int


def _read_table(job: FigureJob, spec: dict) -> np.ndarray:
    path = Path(job.csv_path)
    if not path.exists():
        raise SchemaError(f"CSV not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaError(f"{path}: empty file (expected header "
                              f"{','.join(spec['columns'])})") from None
        if header != spec["columns"]:
            raise SchemaError(
                f"{path}: columns {','.join(header)} do not match the "
                f"figure {job.figure_id} schema {','.join(spec['columns'])}"
            )
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise SchemaError(f"{path}:{lineno}: expected {len(header)} fields, "
                                  f"got {len(record)}")
            try:
                rows.append([float(x) for x in record])
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    finite = np.all(np.isfinite(data), axis=1)
    if not np.all(finite):
        dropped = int(np.sum(~finite))
        print(f"warning: dropping {dropped} non-finite row(s) from {path}",
              file=sys.stderr)
        data = data[finite]
    if data.shape[0] == 0:
        raise SchemaError(f"{path}: no finite data rows")
    return data


def _data_hash(data: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(data, dtype=float).tobytes()).hexdigest()


def _heatmap_grid(data: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    grid = np.full((len(ys), len(xs)), np.nan)
    for x, y, value in data:
        grid[np.searchsorted(ys, y), np.searchsorted(xs, x)] = value
    if np.any(np.isnan(grid)):
        raise SchemaError("2-D sweep rows do not form a complete rectangular grid")
    return xs, ys, grid


def render(job: FigureJob) -> RenderResult:
    """Render one panel; returns the output path and plotted-data digest."""
    key = str(job.figure_id).lower()
    if key not in FIGURE_SPECS:
        raise SchemaError(f"unknown figure id {job.figure_id!r}; "
                          f"known: {', '.join(FIGURE_SPECS)}")
    spec = FIGURE_SPECS[key]
    data = _read_table(job, spec)
    digest = _data_hash(data)

    out = Path(job.out_path)
    if out.suffix == "":
        out = out.with_suffix(".svg")
    out.parent.mkdir(parents=True, exist_ok=True)

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    try:
        if spec["kind"] == "heatmap":
            xs, ys, grid = _heatmap_grid(data)
            mesh = ax.pcolormesh(xs, ys, grid, shading="nearest", cmap="viridis")
            fig.colorbar(mesh, ax=ax, label=YLABEL)
            ax.set_xlabel(spec["xlabel"])
            ax.set_ylabel(spec["ylabel"])
            ylabel = spec["ylabel"]
            min_value = float(np.min(grid))
            max_value = float(np.max(grid))
            print(f"figure {key}: minimum cell fidelity = {min_value:.6f}")
        else:
            ax.plot(data[:, 0], data[:, 1], marker="o", markersize=3.5, lw=1.2)
            ax.set_xlabel(spec["xlabel"])
            ax.set_ylabel(YLABEL)
            ax.set_ylim(min(0.0, float(np.min(data[:, 1]))), 1.02)
            ax.grid(alpha=0.3)
            ylabel = YLABEL
            min_value = float(np.min(data[:, 1]))
            max_value = float(np.max(data[:, 1]))
        fig.tight_layout()
        metadata = {"Description": f"nvfiber-data-sha256={digest}"}
        if out.suffix.lower() == ".png":
            metadata = {"nvfiber-data-sha256": digest}
        fig.savefig(out, metadata=metadata)
    finally:
        plt.close(fig)

    return RenderResult(
        path=out,
        data_hash=digest,
        xlabel=spec["xlabel"],
        ylabel=ylabel,
        min_value=min_value,
        max_value=max_value,
        n_rows=int(data.shape[0]),
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nvfiber-render",
        description="Render one simulator figure panel from a sweep CSV.",
    )
    parser.add_argument("--figure", required=True, metavar="ID",
                        help="one of " + " ".join(FIGURE_SPECS))
    parser.add_argument("--csv", required=True, help="input CSV path")
    parser.add_argument("--out", required=True, help="output image path "
                        "(.svg default, .png/.pdf by extension)")
    args = parser.parse_args(argv)
    try:
        result = render(FigureJob(args.figure, args.csv, args.out))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {result.path} ({result.n_rows} rows, "
          f"data sha256 {result.data_hash[:12]}...)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
