"""Rel.Dis.-thresholded boundary matching and F1 reporting.

A prediction matches a ground-truth boundary when their time difference,
divided by the video duration, is at most the threshold. Matches are
one-to-one and of maximum cardinality. Each video is scored against every
rater and keeps the best F1 per threshold; corpus numbers average videos.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

THRESHOLDS = tuple(round(0.05 * i, 2) for i in range(1, 11))


def rel_dis(pred_s, gt_s, instance_len_s):
    if instance_len_s <= 0:
        raise ConfigError("instance length must be positive")
    return abs(pred_s - gt_s) / instance_len_s


def max_matching(adj, n_right):
    """Maximum bipartite matching size by augmenting paths (Kuhn's algorithm).

    ``adj[i]`` lists the right vertices adjacent to left vertex ``i``.
    """
    match_right = [-1] * n_right

    def augment(u, seen):
        for v in adj[u]:
            if seen[v]:
                continue
            seen[v] = True
            if match_right[v] < 0 or augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    return sum(augment(u, [False] * n_right) for u in range(len(adj)))


def match_boundaries(preds, gts, thr, instance_len_s=1.0):
    # small epsilon keeps boundary-equal distances (e.g. 0.05 vs 0.0500000001) on the inclusive side
    tol = thr + 1e-9
    adj = [[j for j, g in enumerate(gts) if rel_dis(p, g, instance_len_s) <= tol] for p in preds]
    return max_matching(adj, len(gts))


def prf(n_match, n_pred, n_gt):
    if n_pred == 0 and n_gt == 0:
        return 1.0, 1.0, 1.0
    p = n_match / n_pred if n_pred else 0.0
    r = n_match / n_gt if n_gt else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


@dataclass
class VideoScore:
    video_id: str
    precision: list
    recall: list
    f1: list
    best_rater: list


@dataclass
class EvalReport:
    thresholds: tuple
    precision: list
    recall: list
    f1: list
    videos: list = field(default_factory=list)

    @property
    def avg_f1(self):
        return float(np.mean(self.f1))

    def f1_at(self, thr):
        return self.f1[_threshold_index(self.thresholds, thr)]

    def table(self):
        head = ["Rel.Dis."] + [f"{t:.2f}" for t in self.thresholds] + ["avg"]
        rows = [
            ["precision"] + [f"{v:.3f}" for v in self.precision] + [f"{np.mean(self.precision):.3f}"],
            ["recall"] + [f"{v:.3f}" for v in self.recall] + [f"{np.mean(self.recall):.3f}"],
            ["F1"] + [f"{v:.3f}" for v in self.f1] + [f"{self.avg_f1:.3f}"],
        ]
        widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]
        lines = [" | ".join(c.rjust(w) for c, w in zip(r, widths)) for r in [head] + rows]
        lines.insert(1, "-+-".join("-" * w for w in widths))
        return "\n".join(lines)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric"] + [f"{t:.2f}" for t in self.thresholds] + ["avg"])
        for name, vals in (("precision", self.precision), ("recall", self.recall), ("f1", self.f1)):
            w.writerow([name] + [f"{v:.6f}" for v in vals] + [f"{np.mean(vals):.6f}"])
        return buf.getvalue()


def _threshold_index(thresholds, thr):
    for i, t in enumerate(thresholds):
        if abs(t - thr) < 1e-9:
            return i
    raise KeyError(thr)


def video_score(preds, annotation, thresholds=THRESHOLDS) -> VideoScore:
    raters = annotation.raters or [[]]
    duration = annotation.duration_s
    ps, rs, fs, best = [], [], [], []
    for thr in thresholds:
        per_rater = [
            prf(match_boundaries(preds, gts, thr, duration), len(preds), len(gts)) for gts in raters
        ]
        # best F1; ties keep the lowest rater index
        k = max(range(len(per_rater)), key=lambda i: (per_rater[i][2], -i))
        p, r, f = per_rater[k]
        ps.append(p)
        rs.append(r)
        fs.append(f)
        best.append(k)
    return VideoScore(annotation.video_id, ps, rs, fs, best)


def aggregate(scores, thresholds=THRESHOLDS) -> EvalReport:
    """Mean over videos, reduced in video-id order."""
    scores = sorted(scores, key=lambda s: s.video_id)
    if not scores:
        zeros = [0.0] * len(thresholds)
        return EvalReport(tuple(thresholds), zeros, list(zeros), list(zeros), [])

    def mean(attr):
        return [float(np.mean([getattr(s, attr)[i] for s in scores])) for i in range(len(thresholds))]

    return EvalReport(tuple(thresholds), mean("precision"), mean("recall"), mean("f1"), scores)


def f1_report(predictions, annotations, thresholds=THRESHOLDS) -> EvalReport:
    """``predictions`` maps video_id -> boundary list (seconds); videos
    without a prediction entry count as predicting nothing."""
    if not isinstance(annotations, (list, tuple)):
        annotations = [annotations]
        if not isinstance(predictions, dict):
            predictions = {annotations[0].video_id: predictions}
    return aggregate(
        [video_score(sorted(predictions.get(a.video_id, [])), a, thresholds) for a in annotations],
        thresholds,
    )
