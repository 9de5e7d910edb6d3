"""Soft labels, rater selection, BCE loss and finite-difference micro-training."""
from __future__ import annotations

import numpy as np

from . import kernels, temporal
from . import model as model_mod
from .annotations import BoundaryAnnotation  # noqa: F401  (re-exported)
from .errors import ConfigError
from .evaluation import match_boundaries, prf
from .params import subtree

PARAM_BUDGET = 2000
NORM_FLOOR = 1e-6
DEFAULT_TRAINABLE = ("classifier.conv",)


def soft_labels(boundary_frames, length, alpha=1.0, clamp_max=1.0):
    """Sum of Gaussians exp(-(l - i)^2 / (2 alpha^2)) over boundaries l, clamped."""
    if alpha <= 0:
        raise ConfigError("alpha must be positive")
    idx = np.arange(length, dtype=np.float64)
    out = np.zeros(length)
    for b in boundary_frames:
        if not 0 <= b < length:
            raise IndexError(f"boundary frame {b} outside [0, {length})")
        out += np.exp(-((b - idx) ** 2) / (2.0 * alpha * alpha))
    return np.minimum(out, clamp_max)


def rater_consistency(ann, thr=0.05):
    """Mean F1 of each rater, used as predictions, against every other rater."""
    n = len(ann.raters)
    scores = []
    for i in range(n):
        f1s = []
        for j in range(n):
            if i == j:
                continue
            preds, gts = ann.raters[i], ann.raters[j]
            m = match_boundaries(preds, gts, thr, ann.duration_s)
            f1s.append(prf(m, len(preds), len(gts))[2])
        scores.append(float(np.mean(f1s)) if f1s else 1.0)
    return scores


def select_raters(ann, top_n=2):
    n = len(ann.raters)
    if not 1 <= top_n <= n:
        raise ConfigError(f"top_n={top_n} outside [1, {n}]")
    scores = rater_consistency(ann)
    order = sorted(range(n), key=lambda i: (-scores[i], i))
    return sorted(order[:top_n])


def nearest_entries(boundaries_s, frame_indices, fps):
    """Timeline entry nearest to each timestamp (ties go to the earlier entry)."""
    frames = np.asarray(frame_indices, dtype=np.float64)
    return [int(np.argmin(np.abs(frames - t * fps))) for t in boundaries_s]


def timeline_labels(ann, frame_indices, top_n=2, alpha=1.0):
    if not ann.raters:
        return np.zeros(len(frame_indices))
    picked = select_raters(ann, min(top_n, len(ann.raters)))
    union = sorted({e for i in picked for e in nearest_entries(ann.raters[i], frame_indices, ann.fps)})
    return soft_labels(union, len(frame_indices), alpha)


def build_dataset(items, cfg, top_n=2, alpha=1.0):
    """(GopStream, BoundaryAnnotation) pairs -> (GopStream, soft labels) pairs."""
    return [(s, timeline_labels(a, model_mod.timeline_frame_indices(s, cfg), top_n, alpha)) for s, a in items]


def bce_loss(scores, labels, eps=1e-7):
    s = np.clip(np.asarray(scores, dtype=np.float64), eps, 1.0 - eps)
    y = np.asarray(labels, dtype=np.float64)
    if s.shape != y.shape:
        raise ConfigError("scores and labels differ in length")
    return float(np.mean(-(y * np.log(s) + (1.0 - y) * np.log(1.0 - s))))


def _stage(name):
    if name.startswith(("backbone_", "scam_")):
        return 0
    if name.startswith("lstm."):
        return 1
    if name.startswith("fcn.conv"):
        return 2 + int(name.split(".")[1][4:])
    if name.startswith("classifier."):
        return 6
    raise ConfigError(f"unknown parameter {name}")


class Objective:
    """Mean per-video BCE of the detector over a fixed dataset.

    Forward intermediates are cached so that a probe on one parameter only
    recomputes what lies downstream of it. Perturbing one weight of an FCN
    conv only moves one output channel of that layer, by the shifted input
    channel times the step; that channel is patched instead of re-running the
    convolution.
    """

    def __init__(self, cfg, streams, labels, threads=1):
        self.cfg = cfg
        self.streams = list(streams)
        self.labels = [np.asarray(y, dtype=np.float64) for y in labels]
        self.threads = threads
        self.lengths = [len(y) for y in self.labels]
        # items are laid end to end with one zero column between neighbors
        starts = np.cumsum([0] + [n + 1 for n in self.lengths[:-1]])
        self.starts = starts
        total = int(starts[-1] + self.lengths[-1]) if self.lengths else 0
        self.pos = np.concatenate([s + np.arange(n) for s, n in zip(starts, self.lengths)]).astype(int)
        self.mask = np.zeros(total, dtype=bool)
        self.mask[self.pos] = True
        self.target = np.concatenate(self.labels)
        self.weight = np.concatenate([np.full(n, 1.0 / (n * len(self.lengths))) for n in self.lengths])
        self.total = total
        self.cache = {}

    def _features(self, params):
        return [model_mod.extract_timeline(params, s, self.cfg, self.threads).vectors for s in self.streams]

    def _sims(self, params, vectors):
        return np.concatenate([model_mod.similarity_maps(params, v, self.cfg) for v in vectors])

    def _loss(self, params, desc):
        p = subtree(params, "classifier")
        x = np.zeros((desc.shape[1], self.total))
        x[:, self.pos] = temporal.standardize(p, desc).T
        h = np.maximum(temporal.conv1d(x, p["conv0.weight"], p["conv0.bias"]), 0.0)
        h[:, ~self.mask] = 0.0
        logits = temporal.conv1d(h, p["conv1.weight"], p["conv1.bias"])[0, self.pos]
        s = np.clip(0.5 * (1.0 + np.tanh(0.5 * logits)), 1e-7, 1.0 - 1e-7)
        y = self.target
        return float(np.sum(self.weight * -(y * np.log(s) + (1.0 - y) * np.log(1.0 - s))))

    def _fcn_from(self, params, j, h, store=False):
        """Run FCN layers j..3 starting from input ``h``; return descriptors."""
        p = subtree(params, "fcn")
        for i in range(j, 4):
            z = kernels.conv2d(np.ascontiguousarray(h), p[f"conv{i}.weight"], p[f"conv{i}.bias"], 1)
            if store:
                self.cache[f"in{i}"] = h
                self.cache[f"pre{i}"] = z
            h = np.maximum(z, 0.0)
        return h.mean(axis=(2, 3))

    def forward(self, params, start=0):
        """Full evaluation from ``start``, refreshing the caches."""
        c = self.cache
        if start <= 0 or "vectors" not in c:
            c["vectors"] = self._features(params)
        if start <= 1 or "sims" not in c:
            c["sims"] = self._sims(params, c["vectors"])
        c["desc"] = self._fcn_from(params, 0, c["sims"], store=True)
        return self._loss(params, c["desc"])

    def probe(self, params, name, idx, delta):
        """Loss with ``params[name][idx] += delta``; caches are left untouched."""
        stage = _stage(name)
        arr = params[name]
        old = arr[idx]
        arr[idx] = old + delta
        step = arr[idx] - old  # the perturbation actually representable
        try:
            if stage <= 1:
                vectors = self._features(params) if stage == 0 else self.cache["vectors"]
                return self._loss(params, self._fcn_from(params, 0, self._sims(params, vectors)))
            if stage == 6:
                return self._loss(params, self.cache["desc"])
            j = stage - 2
            co = idx[0]
            z = self.cache[f"pre{j}"].copy()
            if name.endswith(".bias"):
                z[:, co] += step
            else:
                _, ci, ky, kx = idx
                xin = self.cache[f"in{j}"]
                size = xin.shape[2]
                xp = np.pad(xin[:, ci], ((0, 0), (1, 1), (1, 1)))
                z[:, co] += step * xp[:, ky:ky + size, kx:kx + size]
            h = np.maximum(z, 0.0)
            if j == 3:
                return self._loss(params, h.mean(axis=(2, 3)))
            return self._loss(params, self._fcn_from(params, j + 1, h))
        finally:
            arr[idx] = old


def trainable_names(params, prefixes=DEFAULT_TRAINABLE):
    return [n for n in params if any(n.startswith(p) for p in prefixes)]


def fd_gradient(objective, params, names, h=1e-4):
    grads = {}
    for name in names:
        g = np.empty_like(params[name])
        for idx in np.ndindex(g.shape):
            lp = objective.probe(params, name, idx, h)
            lm = objective.probe(params, name, idx, -h)
            g[idx] = (lp - lm) / (2.0 * h)
        grads[name] = g
    return grads


def fit_standardization(params, dataset, cfg, threads=1, floor=NORM_FLOOR):
    """Copy of ``params`` whose classifier input standardization holds the
    per-channel mean and 1/std of the descriptors over ``dataset``.

    Frozen random feature stages emit small, nearly constant descriptors;
    without this the classifier weights and biases need step sizes orders of
    magnitude apart and a single fixed lr cannot serve both.
    """
    params = {k: v.copy() for k, v in params.items()}
    obj = Objective(cfg, [s for s, _ in dataset], [y for _, y in dataset], threads)
    params["classifier.norm_shift"][:] = 0.0
    params["classifier.norm_gain"][:] = 1.0
    obj.forward(params, 0)
    desc = obj.cache["desc"]
    params["classifier.norm_shift"][:] = desc.mean(axis=0)
    params["classifier.norm_gain"][:] = 1.0 / np.maximum(desc.std(axis=0), floor)
    return params


def micro_train(params, dataset, cfg, steps=200, lr=1.0, trainable=DEFAULT_TRAINABLE,
                h=1e-4, budget=PARAM_BUDGET, threads=1, callback=None):
    """Plain gradient descent with central finite-difference gradients.

    ``dataset`` is a list of (GopStream, per-entry soft labels). Returns the
    updated parameters (a copy) and the loss trace, whose entry ``i`` is the
    loss after ``i`` updates.
    """
    params = {k: v.copy() for k, v in params.items()}
    names = trainable_names(params, trainable)
    n_params = sum(params[n].size for n in names)
    if n_params > budget:
        raise ConfigError(f"{n_params} trainable parameters exceed the budget of {budget}")
    if not names:
        raise ConfigError("no trainable parameters selected")
    earliest = min(_stage(n) for n in names)
    obj = Objective(cfg, [s for s, _ in dataset], [y for _, y in dataset], threads)
    loss = obj.forward(params, 0)
    trace = [loss]
    for step in range(steps):
        grads = fd_gradient(obj, params, names, h)
        for n in names:
            params[n] -= lr * grads[n]
        loss = obj.forward(params, earliest)
        trace.append(loss)
        if callback is not None:
            callback(step + 1, loss)
    return params, trace


def loss_csv(trace):
    lines = ["step,loss"] + [f"{i},{v!r}" for i, v in enumerate(trace)]
    return "\n".join(lines) + "\n"
