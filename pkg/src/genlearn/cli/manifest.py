"""
Run artifacts: every file a command produces is first written under a temporary name and renamed
into place only when the whole command succeeded, then recorded with its checksum in
manifest.json.
"""
import hashlib
import json
import os
import tempfile
from typing import Dict, Iterable, List, Optional

import numpy as np

from genlearn.io.model_file import SCHEMAS, dumps_record
from genlearn.utils.config import ExperimentConfig

MANIFEST_SCHEMA = "genlearn.manifest/1"
METRICS_SCHEMA = "genlearn.metrics/1"


def file_sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _plain(value):
    """
    Converts numpy scalars (and NaN) into JSON-friendly values.
    """
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return None if not np.isfinite(value) else float(value)
    return value


def metrics_lines(rows: Iterable[dict]) -> str:
    """
    One JSON object per line, keys sorted; non-finite values become null.
    """
    return "".join(json.dumps({k: _plain(v) for k, v in row.items()}, sort_keys=True) + "\n" for row in rows)


class StagedOutputs:

    """
    Collects the output files of one command. Files are written to temporary paths inside the
    output directory; 'commit' renames them into place and 'discard' removes them.
    """

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self._staged: Dict[str, str] = {}

    def path(self, name: str) -> str:
        """
        Returns the temporary path to write the output 'name' to (a file name relative to out_dir,
        or an absolute path).
        """
        final = name if os.path.isabs(name) else os.path.join(self.out_dir, name)
        directory = os.path.dirname(final) or "."
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".genlearn-", dir=directory)
        os.close(fd)
        self._staged[final] = tmp
        return tmp

    def write_text(self, name: str, text: str) -> None:
        with open(self.path(name), "w", newline="\n") as f:
            f.write(text)

    @property
    def finals(self) -> List[str]:
        return sorted(self._staged)

    def staged_checksums(self) -> Dict[str, str]:
        return {os.path.basename(final): file_sha256(tmp) for final, tmp in sorted(self._staged.items())}

    def commit(self) -> None:
        for final, tmp in self._staged.items():
            os.replace(tmp, final)
        self._staged.clear()

    def discard(self) -> None:
        for tmp in self._staged.values():
            if os.path.exists(tmp):
                os.remove(tmp)
        self._staged.clear()

    def __enter__(self) -> "StagedOutputs":
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        if exc_type is None:
            self.commit()
        else:
            self.discard()
        return False


class RunManifest:

    """
    What reproduces a run: the command line, the config snapshot, the schema versions in use and
    the checksums of the inputs and outputs.
    """

    def __init__(self, argv: List[str], cfg: Optional[ExperimentConfig], inputs: List[str]):
        self.argv = list(argv)
        self.cfg = cfg
        self.inputs = {os.path.basename(p): file_sha256(p) for p in inputs}

    def to_dict(self, outputs: Dict[str, str]) -> dict:
        config = None
        if self.cfg is not None:
            # the output directory depends on where the run happens, not on what it computes
            config = {k: v for k, v in self.cfg.to_dict().items() if k != "out_dir"}
        return {"schema": MANIFEST_SCHEMA,
                "command": self.argv,
                "config": config,
                "schemas": {"models": SCHEMAS, "metrics": METRICS_SCHEMA},
                "inputs": self.inputs,
                "outputs": outputs}

    def stage(self, outputs: StagedOutputs, name: str = "manifest.json") -> None:
        """
        Adds manifest.json (with the checksums of everything staged so far) to the outputs.
        """
        outputs.write_text(name, dumps_record(self.to_dict(outputs.staged_checksums())))
