"""File formats: FCM documents, matrix CSV, summaries, reports, heatmaps.

The FCM document is versioned JSON holding the node list plus edges in either
dense (list of rows) or sparse (list of weight triples) form; the two are
interconvertible and both validate the FCM invariants on load. Heatmaps are
rasterized directly so identical inputs give identical image bytes.
"""

import csv
import json
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .core import Fcm
from .encoder import LatentSummary
from .errors import ContractError
from .evaluate import ReconstructionReport

SCHEMA_VERSION = 1


def fcm_to_document(fcm: Fcm, metadata=None, sparse: bool = False) -> dict:
    if sparse:
        edges = [
            {"source": int(i), "target": int(j), "weight": float(fcm.edges[i, j])}
            for i in range(fcm.n)
            for j in range(fcm.n)
            if fcm.edges[i, j] != 0.0
        ]
    else:
        edges = [[float(w) for w in row] for row in fcm.edges]
    return {
        "schema_version": SCHEMA_VERSION,
        "nodes": [{"id": i, "label": lab} for i, lab in enumerate(fcm.labels)],
        "edges": edges,
        "allow_self_loops": fcm.allow_self_loops,
        "metadata": dict(metadata or {}),
    }


def fcm_from_document(doc: dict) -> Fcm:
    if not isinstance(doc, dict):
        raise ContractError("FCM document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ContractError(f"unsupported schema_version {version!r}")
    nodes = doc.get("nodes")
    if not isinstance(nodes, list) or not nodes:
        raise ContractError("document field 'nodes' must be a non-empty list")
    labels = []
    for k, node in enumerate(nodes):
        if not isinstance(node, dict) or "label" not in node:
            raise ContractError(f"nodes[{k}] must be an object with a 'label'")
        if node.get("id") != k:
            raise ContractError(f"nodes[{k}] has id {node.get('id')!r}, expected {k}")
        labels.append(str(node["label"]))
    n = len(labels)
    edges_field = doc.get("edges")
    matrix = np.zeros((n, n))
    if isinstance(edges_field, list) and edges_field and isinstance(edges_field[0], dict):
        for k, triple in enumerate(edges_field):
            try:
                i = int(triple["source"])
                j = int(triple["target"])
                w = float(triple["weight"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ContractError(f"edges[{k}] is not a valid weight triple: {exc}")
            if not (0 <= i < n and 0 <= j < n):
                raise ContractError(
                    f"edges[{k}] references node {i if not 0 <= i < n else j}, "
                    f"but there are only {n} nodes"
                )
            if abs(w) > 1.0:
                raise ContractError(
                    f"edges[{k}] (source={i} {labels[i]!r}, target={j} "
                    f"{labels[j]!r}) has weight {w} outside [-1, 1]"
                )
            matrix[i, j] = w
    elif isinstance(edges_field, list):
        if len(edges_field) != n:
            raise ContractError(f"dense 'edges' must have {n} rows")
        for i, row in enumerate(edges_field):
            if not isinstance(row, list) or len(row) != n:
                raise ContractError(f"edges[{i}] must be a list of {n} numbers")
            for j, w in enumerate(row):
                try:
                    w = float(w)
                except (TypeError, ValueError):
                    raise ContractError(f"edges[{i}][{j}] is not a number: {w!r}")
                if abs(w) > 1.0:
                    raise ContractError(
                        f"edges[{i}][{j}] ({labels[i]!r} -> {labels[j]!r}) has "
                        f"weight {w} outside [-1, 1]"
                    )
                matrix[i, j] = w
    else:
        raise ContractError("document field 'edges' must be a dense matrix or triples")
    return Fcm(labels, matrix, allow_self_loops=bool(doc.get("allow_self_loops", False)))


def save_fcm(fcm: Fcm, path, metadata=None, sparse: bool = False):
    doc = fcm_to_document(fcm, metadata=metadata, sparse=sparse)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_fcm(path) -> Fcm:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ContractError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}")
    return fcm_from_document(doc)


def save_matrix_csv(matrix, path):
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for row in matrix:
            writer.writerow([repr(float(w)) for w in row])


def load_matrix(path) -> np.ndarray:
    """A bare matrix from CSV, or the dense edges of an FCM document."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with open(path, encoding="utf-8", newline="") as fh:
            rows = [
                [float(cell) for cell in row] for row in csv.reader(fh) if row
            ]
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ContractError(f"{path}: CSV must hold a square matrix")
        return np.array(rows)
    return np.asarray(load_fcm(path).edges)


def save_summary(summary: LatentSummary, path):
    """Summary text as UTF-8 plus a .meta.json sidecar with its provenance."""
    path = Path(path)
    path.write_text(summary.text, encoding="utf-8")
    meta = {
        "stage": summary.stage,
        "provenance": summary.provenance,
        "fingerprint": summary.fingerprint,
        "word_count": summary.word_count,
    }
    path.with_suffix(path.suffix + ".meta.json").write_text(
        json.dumps(meta, indent=2) + "\n", encoding="utf-8"
    )


def load_summary(path) -> LatentSummary:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    meta_path = path.with_suffix(path.suffix + ".meta.json")
    stage, provenance, fingerprint = "I", "deterministic", None
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        stage = meta.get("stage", "I")
        provenance = meta.get("provenance", "deterministic")
        fingerprint = meta.get("fingerprint")
    return LatentSummary(
        text=text, stage=stage, provenance=provenance, fingerprint=fingerprint
    )


def _cell_color(value: float, vmax: float):
    """Brightness monotone in |value|; negative weights use the red channel."""
    v = min(abs(value) / vmax, 1.0) if vmax > 0 else 0.0
    level = int(round(40 + 215 * v)) if v > 0 else 0
    if value < 0:
        return (level, 0, 0)
    return (level, level, max(0, level - 30))


def render_heatmap(matrix, path, cell_size: int = 24, vmax=None, labels=None):
    """Deterministic PNG of an edge (or difference) matrix.

    Entries must lie in [-2, 2] so difference matrices are renderable. Cell
    luminance rises with magnitude; negative entries render red. Optional
    ``labels`` adds row labels on the left and column indices on top.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ContractError("heatmap expects a square matrix")
    if np.any(np.abs(matrix) > 2.0):
        raise ContractError("heatmap entries must lie in [-2, 2]")
    n = matrix.shape[0]
    if labels is not None and len(labels) != n:
        raise ContractError(f"expected {n} labels, got {len(labels)}")
    if vmax is None:
        vmax = max(1.0, float(np.abs(matrix).max()))

    left = top = 0
    font = None
    if labels is not None:
        font = ImageFont.load_default()
        left = 8 + 6 * max(len(str(lab)) for lab in labels)
        top = 14
    image = Image.new("RGB", (left + n * cell_size, top + n * cell_size), (0, 0, 0))
    draw = ImageDraw.Draw(image)
    for i in range(n):
        for j in range(n):
            x0 = left + j * cell_size
            y0 = top + i * cell_size
            draw.rectangle(
                [x0, y0, x0 + cell_size - 1, y0 + cell_size - 1],
                fill=_cell_color(float(matrix[i, j]), vmax),
            )
    if labels is not None:
        for i, lab in enumerate(labels):
            draw.text(
                (2, top + i * cell_size + cell_size // 2 - 5),
                str(lab),
                fill=(180, 180, 180),
                font=font,
            )
        for j in range(n):
            draw.text(
                (left + j * cell_size + 2, 2),
                str(j + 1),
                fill=(180, 180, 180),
                font=font,
            )
    image.save(path, format="PNG")


def _alignment_payload(report: ReconstructionReport) -> dict:
    return {
        "pairs": [
            {
                "target_index": p.target_index,
                "target_label": report.target_labels[p.target_index],
                "recon_index": p.recon_index,
                "recon_label": report.recon_labels[p.recon_index],
                "similarity": round(p.similarity, 6),
                "flipped": p.flipped,
            }
            for p in report.alignment.pairs
        ],
        "unmatched_target": list(report.alignment.unmatched_target),
        "unmatched_recon": list(report.alignment.unmatched_recon),
    }


def export_report(report: ReconstructionReport, path, style: str = "structured"):
    """Write a reconstruction report as JSON or as a plain-text norm table."""
    if style == "structured":
        payload = {
            "alignment": _alignment_payload(report),
            "norms": {"raw": report.norms_raw, "adjusted": report.norms_adjusted},
            "strong_edge_preservation": report.strong_edge_preservation,
            "matrices": {
                "target": [[float(w) for w in row] for row in report.target_matrix],
                "reconstructed": [
                    [float(w) for w in row] for row in report.recon_matrix
                ],
                "adjusted": [
                    [float(w) for w in row] for row in report.adjusted_matrix
                ],
            },
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    elif style == "human-table":
        export_norms_table(
            {"raw": report.norms_raw, "adjusted": report.norms_adjusted}, path
        )
    else:
        raise ContractError(f"unknown report style {style!r}")


def export_norms_table(columns: dict, path):
    """Plain-text table: one row per norm, one column per pipeline variant."""
    if not columns:
        raise ContractError("norm table needs at least one column")
    names = list(columns)
    width = max(12, max(len(name) for name in names) + 2)
    lines = ["metric".ljust(8) + "".join(name.ljust(width) for name in names)]
    for metric in ("l1", "l2", "l_inf"):
        row = metric.ljust(8)
        for name in names:
            row += f"{columns[name][metric]:.4f}".ljust(width)
        lines.append(row)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
