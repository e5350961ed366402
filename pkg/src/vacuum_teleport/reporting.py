"""CSV and SVG emission for fringe and visibility data."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Sequence
from typing import TextIO

from .protocol import PAIRS, FringeRecord, VisibilityPoint, pair_label, parse_pair

FRINGE_HEADER = ("phi_rad", "mirror_um", "pair", "p_joint", "p_conditional", "counts")
VISIBILITY_HEADER = ("alpha_sq", "pair", "visibility", "degenerate")


def fmt_float(x: float) -> str:
    return f"{x + 0.0:.17g}"


def write_fringe_csv(records: Iterable[FringeRecord], stream: TextIO) -> None:
    """One row per (phase, pair); ``counts`` is empty for analytic records."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(FRINGE_HEADER)
    for rec in records:
        for pair in PAIRS:
            writer.writerow(
                (
                    fmt_float(rec.phi),
                    fmt_float(rec.mirror_um),
                    pair_label(pair),
                    fmt_float(rec.joint[pair]),
                    fmt_float(rec.conditional[pair]),
                    "" if rec.counts is None else str(rec.counts[pair]),
                )
            )


def fringe_csv_text(records: Iterable[FringeRecord]) -> str:
    buf = io.StringIO()
    write_fringe_csv(records, buf)
    return buf.getvalue()


def read_fringe_csv(stream: TextIO) -> list[FringeRecord]:
    reader = csv.DictReader(stream)
    if tuple(reader.fieldnames or ()) != FRINGE_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}; expected {','.join(FRINGE_HEADER)}")
    by_phase: dict[str, FringeRecord] = {}
    for row in reader:
        pair = parse_pair(row["pair"])
        rec = by_phase.get(row["phi_rad"])
        if rec is None:
            rec = FringeRecord(float(row["phi_rad"]), float(row["mirror_um"]), {}, {}, None)
            by_phase[row["phi_rad"]] = rec
        rec.joint[pair] = float(row["p_joint"])
        rec.conditional[pair] = float(row["p_conditional"])
        if row["counts"]:
            if rec.counts is None:
                rec.counts = {}
            rec.counts[pair] = int(row["counts"])
    return list(by_phase.values())


def write_visibility_csv(
    curves: Sequence[tuple[tuple[str, str], Sequence[VisibilityPoint]]], stream: TextIO
) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(VISIBILITY_HEADER)
    for pair, points in curves:
        for pt in points:
            writer.writerow(
                (fmt_float(pt.alpha_sq), pair_label(pair), fmt_float(pt.visibility), int(pt.degenerate))
            )


def _save_svg(fig, path: str) -> None:
    import matplotlib

    with matplotlib.rc_context({"svg.hashsalt": "vacuum-teleport", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})


def plot_fringes_svg(records: Sequence[FringeRecord], path: str, normalization: str = "conditional") -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    phases = [r.phi for r in records]
    counts = all(r.counts is not None for r in records)
    for pair in PAIRS:
        ys = [r.counts[pair] if counts else r.value(pair, normalization) for r in records]
        ax.plot(phases, ys, marker="o", ms=3, label=pair_label(pair))
    ax.set_xlabel("phase (rad)")
    ax.set_ylabel("coincidence counts" if counts else f"{normalization} probability")
    ax.legend()
    fig.tight_layout()
    _save_svg(fig, path)
    plt.close(fig)


def plot_visibility_svg(
    curves: Sequence[tuple[tuple[str, str], Sequence[VisibilityPoint]]], path: str
) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for pair, points in curves:
        ax.plot([p.alpha_sq for p in points], [p.visibility for p in points], label=pair_label(pair))
    ax.set_xlabel("alpha^2")
    ax.set_ylabel("visibility")
    ax.set_ylim(0, 1.05)
    ax.legend()
    fig.tight_layout()
    _save_svg(fig, path)
    plt.close(fig)
