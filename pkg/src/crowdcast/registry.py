"""Versioned on-disk model registry.

Layout: ``<root>/<zone_id>/v0001/model.json`` plus ``meta.json``; the active
version per zone is a one-line ``ACTIVE`` pointer replaced atomically.
Versions are immutable once written. Model artifacts round-trip bit-exactly
(floats serialize via their shortest repr), so a reloaded model predicts
identically.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .boosting import TreeEnsemble
from .errors import ConfigError, ValidationError
from .linreg import LinearModel

@dataclass
class ModelBundle:
    """Ordered per-step models for the direct multi-step strategy."""

    models: list["Model"]

    def __post_init__(self):
        if not self.models:
            raise ValidationError("bundle needs at least one model")

    @property
    def column_names(self) -> list[str]:
        return self.models[0].column_names

    def predict_row(self, row) -> float:
        return self.models[0].predict_row(row)

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": "model_bundle.v1",
                "models": [json.loads(m.to_json()) for m in self.models],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "ModelBundle":
        doc = json.loads(text)
        if doc.get("schema") != "model_bundle.v1":
            raise ValidationError(f"not a model bundle: {doc.get('schema')!r}")
        return cls(models=[_load_model(json.dumps(m)) for m in doc["models"]])


Model = LinearModel | TreeEnsemble | ModelBundle


def _load_model(text: str) -> Model:
    schema = json.loads(text).get("schema")
    if schema == "linear_model.v1":
        return LinearModel.from_json(text)
    if schema == "tree_ensemble.v1":
        return TreeEnsemble.from_json(text)
    if schema == "model_bundle.v1":
        return ModelBundle.from_json(text)
    raise ValidationError(f"unknown model schema {schema!r}")


@dataclass(frozen=True)
class ModelRecord:
    zone_id: str
    version: str
    meta: dict[str, Any]

    @property
    def kind(self) -> str:
        return self.meta.get("kind", "unknown")


class ModelRegistry:
    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _zone_dir(self, zone_id: str) -> Path:
        if not zone_id or "/" in zone_id or zone_id.startswith("."):
            raise ValidationError(f"bad zone_id {zone_id!r}")
        return self.root / zone_id

    def zones(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir() if p.is_dir())

    def versions(self, zone_id: str) -> list[str]:
        zdir = self._zone_dir(zone_id)
        if not zdir.is_dir():
            return []
        return sorted(p.name for p in zdir.iterdir() if p.is_dir() and p.name.startswith("v"))

    def publish(self, zone_id: str, model: Model, meta: dict[str, Any],
                activate: bool = True, extras: dict[str, str] | None = None) -> str:
        """Write a new immutable version and (by default) point ACTIVE at it.

        ``extras`` are additional text artifacts stored beside the model,
        e.g. the feature-selection report.
        """
        zdir = self._zone_dir(zone_id)
        zdir.mkdir(parents=True, exist_ok=True)
        existing = self.versions(zone_id)
        n = int(existing[-1][1:]) + 1 if existing else 1
        version = f"v{n:04d}"
        vdir = zdir / version
        vdir.mkdir()
        (vdir / "model.json").write_text(model.to_json())
        (vdir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
        for name, text in (extras or {}).items():
            if "/" in name or name.startswith("."):
                raise ValidationError(f"bad extra artifact name {name!r}")
            (vdir / name).write_text(text)
        if activate:
            self.activate(zone_id, version)
        return version

    def activate(self, zone_id: str, version: str) -> None:
        zdir = self._zone_dir(zone_id)
        if not (zdir / version / "model.json").is_file():
            raise ConfigError(f"no version {version} for zone {zone_id}")
        tmp = zdir / "ACTIVE.tmp"
        tmp.write_text(version + "\n")
        os.replace(tmp, zdir / "ACTIVE")  # atomic pointer swap

    def active_version(self, zone_id: str) -> str | None:
        pointer = self._zone_dir(zone_id) / "ACTIVE"
        if not pointer.is_file():
            return None
        return pointer.read_text().strip() or None

    def load(self, zone_id: str, version: str | None = None) -> tuple[Model, ModelRecord]:
        version = version or self.active_version(zone_id)
        if version is None:
            raise ConfigError(f"no active model for zone {zone_id}")
        vdir = self._zone_dir(zone_id) / version
        if not (vdir / "model.json").is_file():
            raise ConfigError(f"no version {version} for zone {zone_id}")
        model = _load_model((vdir / "model.json").read_text())
        meta = json.loads((vdir / "meta.json").read_text())
        return model, ModelRecord(zone_id, version, meta)

    def records(self) -> list[ModelRecord]:
        out = []
        for zone_id in self.zones():
            for version in self.versions(zone_id):
                meta = json.loads((self._zone_dir(zone_id) / version / "meta.json").read_text())
                out.append(ModelRecord(zone_id, version, meta))
        return out

    def state_fingerprint(self) -> str:
        """Order-stable digest of every file in the registry (audit helper)."""
        import hashlib

        h = hashlib.sha256()
        for path in sorted(self.root.rglob("*")):
            if path.is_file():
                h.update(str(path.relative_to(self.root)).encode())
                h.update(path.read_bytes())
        return h.hexdigest()
