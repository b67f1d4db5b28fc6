"""Independent test oracles.

These deliberately avoid the implementation paths they check: polygon area
comes from rasterization (even-odd ray casting on a supersampled grid),
metric recounts are written from the formula definitions.
"""

from __future__ import annotations

import numpy as np


def rasterized_area(polygon, samples_per_pixel: int = 10) -> float:
    """Even-odd rasterized area on a grid with samples_per_pixel per axis."""
    xs = np.array([p[0] for p in polygon], dtype=float)
    ys = np.array([p[1] for p in polygon], dtype=float)
    h = 1.0 / samples_per_pixel
    gx = np.arange(xs.min() + h / 2.0, xs.max(), h)
    gy = np.arange(ys.min() + h / 2.0, ys.max(), h)
    if len(gx) == 0 or len(gy) == 0:
        return 0.0
    X, Y = np.meshgrid(gx, gy)
    inside = np.zeros(X.shape, dtype=bool)
    n = len(polygon)
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(n):
            xi, yi = xs[i], ys[i]
            xj, yj = xs[(i + 1) % n], ys[(i + 1) % n]
            crosses = (yi > Y) != (yj > Y)
            xcross = (xj - xi) * (Y - yi) / (yj - yi) + xi
            inside ^= crosses & (X < xcross)
    return float(inside.sum()) * h * h


def recount_metrics(reports, labels) -> dict:
    """Brute-force per-image recount, straight from the definitions."""
    tp = fp = tn = fn = failed = 0
    for report in reports:
        truth = labels[report.image_id]
        if report.predicted == "abnormal" and truth == "abnormal":
            tp += 1
        elif report.predicted == "abnormal" and truth == "normal":
            fp += 1
        elif report.predicted == "normal" and truth == "normal":
            tn += 1
        elif report.predicted == "normal" and truth == "abnormal":
            fn += 1
        else:
            failed += 1
    total = tp + fp + tn + fn + failed
    accuracy = (tp + tn) / total if total else 1.0
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return {
        "tp": tp,
        "fp": fp,
        "tn": tn,
        "fn": fn,
        "failed": failed,
        "accuracy": accuracy,
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }
