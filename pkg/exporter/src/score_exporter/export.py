"""Train a query model and export every artifact the pruning toolkit ingests.

File formats mirror the toolkit's readers exactly (UTF-8, LF, exact headers):

    manifest.csv      sample_id,class_id            training inventory
    telemetry.jsonl   {"id","epoch","p_target","correct"} per epoch and sample
    embeddings.csv    sample_id,e0,e1,...           penultimate features
    grand_scores.csv  sample_id,score,method        gradient-norm scores
    probs.jsonl       {"id","probs","label"}        final output distributions
    class_stats.csv   class_id,size,recall          train sizes + val recalls
    predictions.csv   sample_id,true_class,pred_class   held-out eval rows
    bundle.json       paths + run config, written atomically last

Telemetry streams: each epoch appends its records as soon as it finishes, so
an interrupted run still leaves parseable prefixes.  A diverged run removes
its partial files instead.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from . import datasets
from .errors import TrainingDiverged
from .model import QueryModel

TELEMETRY = "telemetry.jsonl"
EMBEDDINGS = "embeddings.csv"
GRAND = "grand_scores.csv"
CLASS_STATS = "class_stats.csv"
MANIFEST = "manifest.csv"
PROBS = "probs.jsonl"
PREDICTIONS = "predictions.csv"
BUNDLE = "bundle.json"


@dataclass(frozen=True)
class ExportBundle:
    telemetry: str
    embeddings: str
    grand_scores: str
    class_stats: str
    manifest: str
    probs: str
    predictions: str
    bundle: str
    final_train_accuracy: float


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _atomic_write(path: str, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def export_run(
    dataset_spec: str,
    epochs: int,
    seed: int,
    out_dir: str,
    arch: str = "linear",
    hidden: int = 32,
    lr: float = 0.5,
    batch_size: int = 32,
    val_fraction: float = 0.5,
    data_seed: int | None = None,
) -> ExportBundle:
    """Train, log, and export; returns the bundle of written paths.

    The generated test split is divided into a validation part (``val_fraction``,
    used for the per-class recalls) and an evaluation part (exported as
    prediction rows).  ``seed`` drives initialization and shuffling;
    ``data_seed`` (defaulting to ``seed``) pins the dataset draw, so repeated
    training runs over one dataset vary only ``seed``.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if not 0.0 < val_fraction < 1.0:
        raise ValueError("val_fraction must lie in (0, 1)")
    if data_seed is None:
        data_seed = seed

    (x_train, y_train), (x_test, y_test) = datasets.load(dataset_spec, data_seed)
    n_classes = int(y_train.max()) + 1
    n_val = max(1, int(round(val_fraction * len(x_test))))
    order = np.random.Generator(np.random.PCG64(data_seed + 1)).permutation(len(x_test))
    val_idx, eval_idx = order[:n_val], order[n_val:]
    if len(eval_idx) == 0:
        raise ValueError("val_fraction leaves no evaluation rows")

    os.makedirs(out_dir, exist_ok=True)
    paths = {
        name: os.path.join(out_dir, name)
        for name in (TELEMETRY, EMBEDDINGS, GRAND, CLASS_STATS, MANIFEST, PROBS, PREDICTIONS, BUNDLE)
    }

    model = QueryModel(x_train.shape[1], n_classes, arch=arch, hidden=hidden, seed=seed)
    written: list[str] = []
    try:
        # streaming telemetry: append one epoch as soon as it completes
        with open(paths[TELEMETRY], "w", encoding="utf-8", newline="\n") as handle:
            written.append(paths[TELEMETRY])
            for epoch in range(epochs):
                model.train_epoch(x_train, y_train, lr=lr, batch_size=batch_size)
                p_target, correct = model.telemetry(x_train, y_train)
                for sid in range(len(x_train)):
                    handle.write(
                        json.dumps(
                            {
                                "id": sid,
                                "epoch": epoch,
                                "p_target": float(_fmt(p_target[sid])),
                                "correct": bool(correct[sid]),
                            }
                        )
                        + "\n"
                    )
                handle.flush()

        rows = ["sample_id,class_id"] + [f"{sid},{int(y_train[sid])}" for sid in range(len(y_train))]
        _atomic_write(paths[MANIFEST], "\n".join(rows) + "\n")
        written.append(paths[MANIFEST])

        feats = model.penultimate(x_train)
        header = "sample_id," + ",".join(f"e{i}" for i in range(feats.shape[1]))
        rows = [header] + [
            f"{sid}," + ",".join(_fmt(v) for v in feats[sid]) for sid in range(len(feats))
        ]
        _atomic_write(paths[EMBEDDINGS], "\n".join(rows) + "\n")
        written.append(paths[EMBEDDINGS])

        norms = model.gradient_norms(x_train, y_train)
        rows = ["sample_id,score,method"] + [
            f"{sid},{_fmt(norms[sid])},grand" for sid in range(len(norms))
        ]
        _atomic_write(paths[GRAND], "\n".join(rows) + "\n")
        written.append(paths[GRAND])

        probs = model.probabilities(x_train)
        lines = [
            json.dumps(
                {
                    "id": sid,
                    "probs": [float(_fmt(v)) for v in probs[sid]],
                    "label": int(y_train[sid]),
                }
            )
            for sid in range(len(probs))
        ]
        _atomic_write(paths[PROBS], "\n".join(lines) + "\n")
        written.append(paths[PROBS])

        val_pred = model.probabilities(x_test[val_idx]).argmax(axis=1)
        recalls = {}
        sizes = {}
        for cls in range(n_classes):
            sizes[cls] = int(np.sum(y_train == cls))
            mask = y_test[val_idx] == cls
            recalls[cls] = float(np.mean(val_pred[mask] == cls)) if mask.any() else 0.0
        rows = ["class_id,size,recall"] + [
            f"{cls},{sizes[cls]},{_fmt(recalls[cls])}" for cls in range(n_classes)
        ]
        _atomic_write(paths[CLASS_STATS], "\n".join(rows) + "\n")
        written.append(paths[CLASS_STATS])

        eval_pred = model.probabilities(x_test[eval_idx]).argmax(axis=1)
        rows = ["sample_id,true_class,pred_class"] + [
            f"{sid},{int(y_test[i])},{int(eval_pred[j])}"
            for j, (sid, i) in enumerate(zip(range(len(eval_idx)), eval_idx))
        ]
        _atomic_write(paths[PREDICTIONS], "\n".join(rows) + "\n")
        written.append(paths[PREDICTIONS])

        _, final_correct = model.telemetry(x_train, y_train)
        bundle_data = {
            "dataset": dataset_spec,
            "epochs": epochs,
            "seed": seed,
            "data_seed": data_seed,
            "arch": arch,
            "val_fraction": val_fraction,
            "files": {name: paths[name] for name in paths if name != BUNDLE},
            "final_train_accuracy": float(_fmt(final_correct.mean())),
        }
        _atomic_write(paths[BUNDLE], json.dumps(bundle_data, indent=2) + "\n")
    except TrainingDiverged:
        for path in written:
            if os.path.exists(path):
                os.unlink(path)
        raise

    return ExportBundle(
        telemetry=paths[TELEMETRY],
        embeddings=paths[EMBEDDINGS],
        grand_scores=paths[GRAND],
        class_stats=paths[CLASS_STATS],
        manifest=paths[MANIFEST],
        probs=paths[PROBS],
        predictions=paths[PREDICTIONS],
        bundle=paths[BUNDLE],
        final_train_accuracy=float(final_correct.mean()),
    )
