"""Run manifest: config hash, output checksums, stage timings.

Every file a command writes is registered with a content checksum, so a
rerun with identical inputs can be verified byte for byte and no stale file
can sneak into a results directory unnoticed.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MissingInput

MANIFEST_NAME = "manifest.json"


def config_hash(obj) -> str:
    """Stable sha256 of any json-serialisable configuration object."""
    def default(o):
        if dataclasses.is_dataclass(o) and not isinstance(o, type):
            return dataclasses.asdict(o)
        if hasattr(o, "tolist"):
            return o.tolist()
        return repr(o)
    blob = json.dumps(obj, sort_keys=True, default=default).encode()
    return hashlib.sha256(blob).hexdigest()


def file_checksum(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    config_hash: str
    seed: int = 0
    scenarios: list = field(default_factory=list)
    outputs: dict = field(default_factory=dict)      # relpath -> sha256
    timings: dict = field(default_factory=dict)      # stage -> seconds
    particle_counts: dict = field(default_factory=dict)

    def add_file(self, root, relpath) -> None:
        self.outputs[str(relpath)] = file_checksum(Path(root) / relpath)

    def save(self, root) -> Path:
        path = Path(root) / MANIFEST_NAME
        with open(path, "w") as fh:
            json.dump(dataclasses.asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path

    @classmethod
    def load(cls, root) -> "RunManifest":
        path = Path(root) / MANIFEST_NAME
        if not path.exists():
            raise MissingInput(f"no {MANIFEST_NAME} in {root}")
        with open(path) as fh:
            data = json.load(fh)
        return cls(**data)

    def verify_complete(self, root) -> list:
        """Relative paths present in the directory but absent from the manifest."""
        root = Path(root)
        missing = []
        for path in sorted(root.rglob("*")):
            if path.is_dir() or path.name == MANIFEST_NAME:
                continue
            rel = str(path.relative_to(root))
            if rel not in self.outputs:
                missing.append(rel)
        return missing
