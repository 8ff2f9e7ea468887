"""CSV writers with byte-stable, shortest round-trip numeric formatting."""

from __future__ import annotations

import numpy as np

from .decompose import DecompositionReport
from .region import Boundary, RegionMask
from .surfaces import ValueSurface

__all__ = [
    "format_number",
    "write_surface_csv",
    "write_boundary_csv",
    "write_report_csv",
    "write_estimates_csv",
]


def format_number(v) -> str:
    """Shortest decimal string that round-trips to the same float."""
    return repr(float(v))


def write_surface_csv(path, surface: ValueSurface, mask: RegionMask | None = None) -> None:
    """Header t,x,value,reward,in_surrender_region; maturity slice carries 0
    in the region column (regions are defined before maturity only)."""
    tn, xn = surface.tnodes, surface.xnodes
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,x,value,reward,in_surrender_region\n")
        for n in range(tn.size):
            for i in range(xn.size):
                flag = (
                    int(mask.in_surrender[n, i])
                    if mask is not None and n < tn.size - 1
                    else 0
                )
                fh.write(
                    f"{format_number(tn[n])},{format_number(xn[i])},"
                    f"{format_number(surface.values[n, i])},"
                    f"{format_number(surface.obstacle[n, i])},{flag}\n"
                )


def write_boundary_csv(path, boundary: Boundary) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,b_t,empty_flag\n")
        for n, b in enumerate(boundary.values):
            empty = not np.isfinite(b)
            fh.write(
                f"{format_number(boundary.tnodes[n])},{format_number(b)},{int(empty)}\n"
            )


def write_report_csv(path, report: DecompositionReport, surface: ValueSurface) -> None:
    tn, xn = report.tnodes, report.xnodes
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,x,v,h,e,f,res_he,res_phif\n")
        for n in range(tn.size):
            for i in range(xn.size):
                fh.write(
                    ",".join(
                        format_number(v)
                        for v in (
                            tn[n],
                            xn[i],
                            surface.values[n, i],
                            report.h[n, i],
                            report.e[n, i],
                            report.f[n, i],
                            report.res_he[n, i],
                            report.res_phif[n, i],
                        )
                    )
                    + "\n"
                )


def write_estimates_csv(path, rows) -> None:
    """rows: iterable of (quantity, estimate, std_error, npaths, seed)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("quantity,estimate,std_error,npaths,seed\n")
        for name, est, se, npaths, seed in rows:
            fh.write(
                f"{name},{format_number(est)},{format_number(se)},{int(npaths)},{int(seed)}\n"
            )
