"""Self-describing model files.

Layout: the magic line ``FAMGRAPH-MODEL``, a format-version line, then one
UTF-8 JSON document (sorted keys) holding kind, hyper-parameters, fitted
state, schema version and schema digest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..exceptions import SchemaMismatchError
from .forest import RandomForestClassifier
from .knn import KNNClassifier
from .svm import NuSVMClassifier

MAGIC = b"FAMGRAPH-MODEL\n"
FORMAT_VERSION = 1

ESTIMATORS = {
    RandomForestClassifier.kind: RandomForestClassifier,
    KNNClassifier.kind: KNNClassifier,
    NuSVMClassifier.kind: NuSVMClassifier,
}


@dataclass
class TrainedModel:
    """A fitted estimator bound to the feature schema it was trained on."""

    estimator: object
    schema_version: str
    schema_digest: str
    feature_names: tuple[str, ...]
    rng_seed: int | None = None

    @property
    def kind(self) -> str:
        return self.estimator.kind

    def check_schema(self, schema_version: str, schema_digest: str | None = None) -> None:
        if schema_version != self.schema_version or (
                schema_digest is not None and schema_digest != self.schema_digest):
            raise SchemaMismatchError(
                f"model trained on schema {self.schema_version!r}, got {schema_version!r}")

    def predict(self, X):
        return self.estimator.predict(np.asarray(X, dtype=float))

    def to_bytes(self) -> bytes:
        est = getattr(self.estimator, "best_estimator_", self.estimator)
        doc = {
            "kind": est.kind,
            "params": est.get_params(),
            "state": est.get_state(),
            "schema_version": self.schema_version,
            "schema_digest": self.schema_digest,
            "feature_names": list(self.feature_names),
            "rng_seed": self.rng_seed,
        }
        body = json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)
        return MAGIC + f"{FORMAT_VERSION}\n".encode() + body.encode("utf-8")

    @classmethod
    def from_bytes(cls, data: bytes) -> "TrainedModel":
        if not data.startswith(MAGIC):
            raise ValueError("not a famgraph model file (bad magic header)")
        rest = data[len(MAGIC):]
        version_line, _, body = rest.partition(b"\n")
        if int(version_line) != FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {version_line.decode()!r}")
        doc = json.loads(body.decode("utf-8"))
        est = ESTIMATORS[doc["kind"]](**doc["params"]).set_state(doc["state"])
        return cls(est, doc["schema_version"], doc["schema_digest"],
                   tuple(doc["feature_names"]), doc["rng_seed"])

    def save(self, path: str | Path) -> None:
        from ..interchange import atomic_write_bytes
        atomic_write_bytes(path, self.to_bytes())

    @classmethod
    def load(cls, path: str | Path) -> "TrainedModel":
        return cls.from_bytes(Path(path).read_bytes())
