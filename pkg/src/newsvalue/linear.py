"""Linear classifiers trained by stochastic (sub)gradient descent on hinge
loss. Shared by the numeric-impact classifier (one-vs-rest, constant rate)
and the news-value SVM (binary, 1/(lambda*t) schedule).

Training is single-threaded and fully determined by (data, config, seed);
the bias enters as a regularized constant feature so the weight-decay
trick keeps every step O(nnz).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ModelNotFitted, SchemaMismatch

BIAS_KEY = "__bias__"

FORMAT = "linear-model/1"

FeatureRow = Sequence[tuple[str, float]]


@dataclass(frozen=True)
class SGDConfig:
    epochs: int = 100
    seed: int = 0
    l2: float = 1e-4
    learning_rate: float | None = None  # None -> 1/(l2 * t) schedule
    class_weight: str | None = None     # None | "balanced"


@dataclass
class LinearModel:
    """Per-class weight maps plus bias and training metadata."""

    kind: str
    classes: tuple[str, ...]
    weights: dict[str, dict[str, float]]
    bias: dict[str, float]
    train_meta: dict = field(default_factory=dict)

    def decision(self, features: dict[str, float]) -> dict[str, float]:
        if not self.classes:
            raise ModelNotFitted("model has no classes")
        scores = {}
        for cls in self.classes:
            w = self.weights.get(cls)
            if w is None:
                raise ModelNotFitted(f"no weights for class {cls!r}")
            scores[cls] = sum(
                w[f] * v for f, v in features.items() if f in w
            ) + self.bias.get(cls, 0.0)
        return scores

    def predict(self, features: dict[str, float]) -> str:
        """Argmax class; ties break by the fixed class order."""
        scores = self.decision(features)
        best = self.classes[0]
        best_score = scores[best]
        for cls in self.classes[1:]:
            if scores[cls] > best_score:
                best, best_score = cls, scores[cls]
        return best

    def save(self, path) -> None:
        payload = {
            "format": FORMAT,
            "kind": self.kind,
            "classes": list(self.classes),
            "weights": self.weights,
            "bias": self.bias,
            "train_meta": self.train_meta,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path, expect_kind: str | None = None) -> "LinearModel":
        with open(path, encoding="utf-8") as fh:
            try:
                payload = json.load(fh)
            except ValueError as exc:
                raise SchemaMismatch(f"unreadable model file: {exc}") from None
        if not isinstance(payload, dict) or payload.get("format") != FORMAT:
            raise SchemaMismatch(
                f"expected model format {FORMAT!r}, got {payload.get('format')!r}"
                if isinstance(payload, dict)
                else "model file is not an object"
            )
        if expect_kind is not None and payload.get("kind") != expect_kind:
            raise SchemaMismatch(
                f"expected a {expect_kind!r} model, got {payload.get('kind')!r}"
            )
        return cls(
            kind=payload["kind"],
            classes=tuple(payload["classes"]),
            weights={c: dict(w) for c, w in payload["weights"].items()},
            bias=dict(payload["bias"]),
            train_meta=dict(payload.get("train_meta", {})),
        )


def _objective(
    rows: list[tuple[FeatureRow, int, float]],
    v: dict[str, float],
    scale: float,
    l2: float,
) -> float:
    """Regularized hinge objective at the current effective weights."""
    sq_norm = scale * scale * sum(x * x for x in v.values())
    hinge = 0.0
    for x, y, c in rows:
        margin = y * scale * sum(v.get(f, 0.0) * val for f, val in x)
        hinge += c * max(0.0, 1.0 - margin)
    return 0.5 * l2 * sq_norm + hinge / len(rows)


def train_binary_hinge(
    rows: list[tuple[FeatureRow, int]], cfg: SGDConfig
) -> tuple[dict[str, float], float, float, float]:
    """Train one binary hinge classifier over (+1/-1)-labeled sparse rows.

    Rows must already include the bias as a constant feature or accept a
    zero bias; this function appends BIAS_KEY itself. Returns
    (weights, bias, objective_first_epoch, objective_last_epoch).
    """
    n = len(rows)
    if n == 0:
        raise ModelNotFitted("no training rows")
    if cfg.class_weight == "balanced":
        n_pos = sum(1 for _, y in rows if y > 0)
        n_neg = n - n_pos
        pos_w = n / (2.0 * n_pos) if n_pos else 0.0
        neg_w = n / (2.0 * n_neg) if n_neg else 0.0
    else:
        pos_w = neg_w = 1.0
    prepared = [
        (tuple(x) + ((BIAS_KEY, 1.0),), y, pos_w if y > 0 else neg_w)
        for x, y in rows
    ]

    v: dict[str, float] = {}
    scale = 1.0
    rng = random.Random(cfg.seed)
    order = list(range(n))
    l2 = cfg.l2
    t = 0
    obj_first = obj_last = 0.0
    for epoch in range(cfg.epochs):
        rng.shuffle(order)
        for i in order:
            t += 1
            if cfg.learning_rate is None:
                eta = 1.0 / (l2 * t)
                decay = 1.0 - 1.0 / t  # algebraically eta*l2 == 1/t; exact at t=1
            else:
                eta = cfg.learning_rate
                decay = 1.0 - eta * l2
            x, y, c = prepared[i]
            margin = y * scale * sum(v.get(f, 0.0) * val for f, val in x)
            if decay <= 0.0:
                v.clear()
                scale = 1.0
            else:
                scale *= decay
            if margin < 1.0:
                g = eta * c * y / scale
                for f, val in x:
                    v[f] = v.get(f, 0.0) + g * val
        if epoch == 0:
            obj_first = _objective(prepared, v, scale, l2)
        if epoch == cfg.epochs - 1:
            obj_last = _objective(prepared, v, scale, l2)

    weights = {f: scale * w for f, w in v.items() if scale * w != 0.0}
    bias = weights.pop(BIAS_KEY, 0.0)
    return weights, bias, obj_first, obj_last


def train_one_vs_rest(
    rows: list[tuple[FeatureRow, str]],
    classes: Sequence[str],
    cfg: SGDConfig,
    kind: str,
) -> LinearModel:
    """One binary hinge classifier per class, deterministic per seed."""
    weights: dict[str, dict[str, float]] = {}
    bias: dict[str, float] = {}
    obj_first: dict[str, float] = {}
    obj_last: dict[str, float] = {}
    for idx, cls in enumerate(classes):
        binary = [(x, 1 if label == cls else -1) for x, label in rows]
        sub_cfg = SGDConfig(
            epochs=cfg.epochs,
            seed=cfg.seed * 31 + idx,
            l2=cfg.l2,
            learning_rate=cfg.learning_rate,
            class_weight=cfg.class_weight,
        )
        w, b, first, last = train_binary_hinge(binary, sub_cfg)
        weights[cls] = w
        bias[cls] = b
        obj_first[cls] = first
        obj_last[cls] = last
    meta = {
        "epochs": cfg.epochs,
        "learning_rate": cfg.learning_rate,
        "l2": cfg.l2,
        "seed": cfg.seed,
        "class_weight": cfg.class_weight,
        "objective_first": obj_first,
        "objective_last": obj_last,
        "n_rows": len(rows),
    }
    return LinearModel(kind=kind, classes=tuple(classes), weights=weights, bias=bias, train_meta=meta)
