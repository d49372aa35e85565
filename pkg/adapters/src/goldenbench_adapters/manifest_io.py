"""Line-delimited corpus manifests, as written for the goldenbench toolkit.

One JSON object per line; `kind` is "utt" or "spk".  Lines starting with
"#" are comments (used here for provenance) and blank lines are ignored
by the consumer, so both are preserved verbatim on rewrite.  All writes
go through a temp file in the target directory followed by an atomic
rename.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class ManifestDoc:
    """Ordered manifest entries: raw comment/blank strings or record dicts."""

    entries: list[str | dict] = field(default_factory=list)

    def utterances(self) -> list[dict]:
        return [e for e in self.entries if isinstance(e, dict) and e.get("kind") == "utt"]

    def speakers(self) -> list[dict]:
        return [e for e in self.entries if isinstance(e, dict) and e.get("kind") == "spk"]

    def add_comment(self, text: str) -> None:
        self.entries.append(f"# {text}")

    def append(self, record: dict) -> None:
        self.entries.append(record)


def load_manifest(path: str | Path) -> ManifestDoc:
    doc = ManifestDoc()
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            doc.entries.append(raw)
        else:
            doc.entries.append(json.loads(stripped))
    return doc


def dump_manifest(doc: ManifestDoc) -> str:
    lines = []
    for entry in doc.entries:
        if isinstance(entry, str):
            lines.append(entry)
        else:
            lines.append(json.dumps(entry, sort_keys=True))
    return "\n".join(lines) + "\n"


def save_manifest(doc: ManifestDoc, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(dump_manifest(doc))
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
