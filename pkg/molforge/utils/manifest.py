"""
Run manifests: what a command was asked to do and with which inputs
"""
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import numpy as np
import torch

from molforge import __version__
from molforge.data import PathLike

MANIFEST_FILE = "manifest.json"


def file_sha256(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as file:
        for chunk in iter(lambda: file.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def package_versions() -> Dict[str, str]:
    return {"molforge": __version__, "torch": torch.__version__, "numpy": np.__version__}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _jsonable(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, (Path, torch.device)):
        return str(value)
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


# pylint: disable=too-many-instance-attributes
@dataclass
class Manifest:
    """
    Everything needed to rerun a command.

    :param command: subcommand name
    :param config: effective configuration after merging defaults, file and flags
    :param seed: global seed
    :param threads: torch thread count
    :param inputs: sha256 of every input file by path
    :param outputs: sha256 of every written artifact by name
    """

    command: str
    config: Dict[str, Any]
    seed: Optional[int] = None
    threads: Optional[int] = None
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    versions: Dict[str, str] = field(default_factory=package_versions)
    started: str = field(default_factory=_now)
    finished: Optional[str] = None

    def add_input(self, path: PathLike) -> str:
        self.inputs[str(path)] = file_sha256(path)
        return self.inputs[str(path)]

    def write(self, out_dir: PathLike) -> Path:
        """
        Stamp the finish time and write ``manifest.json``.

        :param out_dir: run or output directory
        """
        self.finished = _now()
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / MANIFEST_FILE
        with open(path, "w", encoding="utf-8") as file:
            json.dump(_jsonable(asdict(self)), file, indent=2, sort_keys=True)
        logging.getLogger("molforge").info("manifest written to %s", path)
        return path

    @classmethod
    def load(cls, path: PathLike) -> "Manifest":
        with open(path, encoding="utf-8") as file:
            return cls(**json.load(file))
