"""
Run manifests.

Every subcommand records the parameters it resolved so the run can be
repeated with ``lowzero replay``. Timing lives only in the manifest, never in
the result files.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

from lowzero.utils.file_utils import read_file, write_file
from lowzero.utils.logging_utils import get_logger

logger = get_logger(__name__)

MANIFEST_DIR = Path(".lowzero") / "manifests"


@dataclass
class RunManifest:
    """
    Record of one CLI invocation.

    Attributes:
        subcommand: CLI subcommand name
        params: Every parameter the subcommand received, after defaults
        resolved: Values derived from config and environment (quadrature, seed, threads)
        version: lowzero version that produced the run
        duration: Wall-clock seconds
    """

    subcommand: str
    params: Dict[str, Any]
    version: str
    duration: float = 0.0
    resolved: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2, default=str) + "\n"

    def write(self, path: Union[str, Path]) -> Path:
        written = write_file(path, self.to_json())
        logger.info(f"Manifest written to {written}")
        return written

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunManifest":
        """
        Load a manifest written by :meth:`write`.

        Raises:
            ValueError: If the file is not a manifest
        """
        try:
            data = json.loads(read_file(path))
        except json.JSONDecodeError as e:
            raise ValueError(f"{path} is not valid JSON: {e}") from None
        if (
            not isinstance(data, dict)
            or "subcommand" not in data
            or "params" not in data
        ):
            raise ValueError(f"{path} is not a lowzero manifest")
        return cls(
            subcommand=data["subcommand"],
            params=dict(data["params"]),
            version=str(data.get("version", "")),
            duration=float(data.get("duration", 0.0)),
            resolved=dict(data.get("resolved", {})),
        )


def manifest_path(
    subcommand: str, output: Optional[str] = None, explicit: Optional[str] = None
) -> Path:
    """
    Where a run's manifest goes.

    ``explicit`` wins; otherwise the manifest sits next to ``output`` as
    ``<output>.manifest.json``; otherwise under ``.lowzero/manifests``.
    """
    if explicit:
        return Path(explicit)
    if output:
        return Path(f"{output}.manifest.json")
    return MANIFEST_DIR / f"{subcommand}.json"
