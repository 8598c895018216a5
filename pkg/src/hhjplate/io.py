"""CSV convergence tables, SVG mesh snapshots and run summaries."""
from __future__ import annotations

import csv
import os

import numpy as np

from .mesh import BoundaryLabel

CSV_COLUMNS = ("loop", "N", "dof_sigma", "dof_u", "moment_L2", "u_2h", "u_H1", "ustar_H1",
               "pih_closeness", "rh_error", "kh_error", "E_h", "e_h", "eta", "zeta", "eff_eta",
               "eff_zeta", "osc")

# CSV column -> ErrorReport attribute
_REPORT_FIELDS = {"eta": "eta_total", "zeta": "zeta_total", "osc": "oscillation"}

LABEL_COLORS = {
    BoundaryLabel.CLAMPED: "#1f4e9c",
    BoundaryLabel.SIMPLY_SUPPORTED: "#2a9d3a",
    BoundaryLabel.FREE: "#d62728",
}


def fmt(value):
    """Six significant digits in scientific notation; blank for missing values."""
    if value is None:
        return ""
    return f"{float(value):.5e}"


def record_row(rec):
    row = {"loop": str(rec.loop), "N": str(rec.N), "dof_sigma": str(rec.dof_sigma),
           "dof_u": str(rec.dof_u)}
    for col in CSV_COLUMNS[4:]:
        row[col] = fmt(getattr(rec.report, _REPORT_FIELDS.get(col, col)))
    return row


def write_convergence_csv(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for rec in records:
            w.writerow(record_row(rec))


def read_convergence_csv(path):
    """Rows as dicts of floats (None for blanks); loop and N as ints."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = {}
            for k, v in row.items():
                if k in ("loop", "N", "dof_sigma", "dof_u"):
                    parsed[k] = int(v)
                else:
                    parsed[k] = float(v) if v != "" else None
            out.append(parsed)
    return out


def write_mesh_svg(mesh, path, width=600):
    """One polygon per triangle; boundary edges stroked by their label."""
    if not path:
        raise ValueError("an output path is required")
    x0, y0, x1, y1 = mesh.bounding_box()
    w, h = x1 - x0, y1 - y0
    stroke = 0.002 * max(w, h)
    px_h = width * h / w if w > 0 else width
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{px_h:.0f}" '
             f'viewBox="{x0:.12g} {y0:.12g} {w:.12g} {h:.12g}">',
             # flip y about the box centre so the mesh reads with y up
             f'<g transform="matrix(1 0 0 -1 0 {y0 + y1:.12g})">']
    V = mesh.vertices
    for tri in mesh.triangles:
        pts = " ".join(f"{V[i, 0]:.12g},{V[i, 1]:.12g}" for i in tri)
        lines.append(f'<polygon points="{pts}" fill="#f4f4f4" stroke="#555" '
                     f'stroke-width="{stroke:.3g}"/>')
    for (a, b), lab in zip(*mesh.boundary_edges_labeled()):
        color = LABEL_COLORS.get(BoundaryLabel(int(lab)), "#000")
        lines.append(f'<line x1="{V[a, 0]:.12g}" y1="{V[a, 1]:.12g}" x2="{V[b, 0]:.12g}" '
                     f'y2="{V[b, 1]:.12g}" stroke="{color}" stroke-width="{3 * stroke:.3g}"/>')
    lines += ["</g>", "</svg>"]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_summary(records, path, quantities, skip=0, header=()):
    """Fitted orders of each available quantity in both conventions."""
    from .adaptivity import fit_order
    out = list(header)
    out.append(f"loops: {len(records)}, final N: {records[-1].N if records else 0}")
    out.append(f"orders fitted on loops >= {skip}")
    out.append(f"{'quantity':<16}{'vs_h':>10}{'vs_N':>10}")
    for q in quantities:
        try:
            ph = fit_order(records, q, "vs_h", skip)
            pn = fit_order(records, q, "vs_N", skip)
        except ValueError:
            continue
        out.append(f"{q:<16}{ph:>10.3f}{pn:>10.3f}")
    text = "\n".join(out) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
    return text


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory {path!r} is not writable")
    return path


def table1_rows(records):
    """(N, sigma error, Pi_h closeness, K_h error, R_h error) per record."""
    return np.array([[r.N, r.report.moment_L2, r.report.pih_closeness, r.report.kh_error,
                      r.report.rh_error] for r in records], dtype=float)
