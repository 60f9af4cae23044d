from __future__ import annotations
from dataclasses import dataclass
from pathlib import Path
from typing import Optional
import json
import logging
import platform

import numpy as np
import scipy

import core
from config.experiment import ExperimentConfig
from utils.constants import EBN0_CONVENTION, MANIFEST_SUFFIX, SNR_CONVENTION
from utils.exceptions import LabError

logger = logging.getLogger(__name__)


class ManifestServiceError(LabError):
    pass


@dataclass(frozen=True)
class ManifestResult:
    manifest_path: Path
    rows_count: int


def manifest_path_for(csv_path: Path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.name + MANIFEST_SUFFIX)


class ManifestService:
    """Sidecar `<csv>.manifest.json` next to every result file. No timestamps, so reruns are byte-identical."""

    def build(self, cfg: ExperimentConfig, *, rows_count: int) -> dict:
        return {
            "version": core.__version__,
            "packages": {"numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()},
            "mode": cfg.mode.value,
            "seed": cfg.seed,
            "config": cfg.model_dump(mode="json"),
            "num_subcarriers": cfg.num_subcarriers,
            "conventions": {"ebn0": EBN0_CONVENTION, "snr": SNR_CONVENTION},
            "rows": rows_count,
        }

    def write_manifest(self, csv_path: Path, cfg: ExperimentConfig, *, rows_count: int) -> ManifestResult:
        path = manifest_path_for(csv_path)
        payload = self.build(cfg, rows_count=rows_count)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as e:
            logger.error(f"Failed to write manifest: {e}")
            raise ManifestServiceError("Failed to write manifest", context={"manifest_path": str(path)}) from e

        logger.info("Manifest written", extra={"manifest": str(path), "rows": rows_count})
        return ManifestResult(manifest_path=path, rows_count=rows_count)

    def read_manifest(self, csv_path: Path) -> dict:
        path = manifest_path_for(csv_path)
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ManifestServiceError("Cannot read manifest", context={"manifest_path": str(path)}) from e


__all__ = ["ManifestResult", "ManifestService", "ManifestServiceError", "manifest_path_for"]
