"""Deterministic text reports, iteration traces, and boundary CSV files.

Reports are key-value text with a fixed field order and floats printed
with 17 significant digits, so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv

import numpy as np

__all__ = [
    "format_value",
    "write_report",
    "read_report",
    "write_trace",
    "write_boundary_csv",
]


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (complex, np.complexfloating)):
        re = format(float(v.real), ".17g")
        im = format(float(v.imag), ".17g")
        sign = "+" if v.imag >= 0 else "-"
        return f"{re} {sign} {im.lstrip('-')}i"
    return str(v)


def write_report(path, fields: dict) -> None:
    """Write ``key = value`` lines in the order of the mapping."""
    with open(path, "w", encoding="ascii") as fh:
        for key, value in fields.items():
            fh.write(f"{key} = {format_value(value)}\n")


def _parse_value(text: str):
    text = text.strip()
    if text in ("true", "false"):
        return text == "true"
    if text.endswith("i") and (" + " in text or " - " in text):
        re_part, sign, im_part = text.rpartition(" + ") if " + " in text else text.rpartition(" - ")
        im = float(im_part[:-1])
        return complex(float(re_part), im if sign.strip() == "+" else -im)
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_report(path) -> dict:
    out = {}
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            if "=" not in line:
                continue
            key, _, value = line.partition("=")
            out[key.strip()] = _parse_value(value)
    return out


def write_trace(path, rows) -> None:
    """Per-outer-iteration trace CSV: k, eps, phi, inner_eigs, h_last."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "eps", "phi", "inner_eigs", "h_last"])
        for row in rows:
            writer.writerow(
                [
                    row.k,
                    format_value(float(row.eps)),
                    format_value(float(row.phi)),
                    row.inner_eigs,
                    format_value(float(row.h_last)),
                ]
            )


def write_boundary_csv(path, points) -> None:
    """Boundary points as plot-ready CSV rows (re, im, normal_re, normal_im)."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["re", "im", "normal_re", "normal_im"])
        for p in points:
            writer.writerow(
                [
                    format_value(float(p.lam.real)),
                    format_value(float(p.lam.imag)),
                    format_value(float(p.normal.real)),
                    format_value(float(p.normal.imag)),
                ]
            )
