"""
File utilities for lowzero.
"""

from pathlib import Path
from typing import Union

from lowzero.utils.logging_utils import get_logger

logger = get_logger(__name__)


def ensure_directory(path: Union[str, Path]) -> Path:
    """
    Ensure a directory exists, creating it if necessary.

    Args:
        path: Directory path

    Returns:
        Path object for the directory
    """
    path_obj = Path(path)
    path_obj.mkdir(parents=True, exist_ok=True)
    return path_obj


def write_file(path: Union[str, Path], content: str) -> Path:
    """
    Write text to a file, creating parent directories as needed.

    Newlines are written verbatim so CSV and JSON outputs are byte-stable
    across platforms.

    Args:
        path: Destination file
        content: Text to write

    Returns:
        Path object for the written file
    """
    path_obj = Path(path)
    if path_obj.parent and str(path_obj.parent) not in ("", "."):
        ensure_directory(path_obj.parent)
    with open(path_obj, "w", encoding="utf-8", newline="") as f:
        f.write(content)
    logger.debug(f"Wrote {len(content)} characters to {path_obj}")
    return path_obj


def read_file(path: Union[str, Path]) -> str:
    """
    Read a UTF-8 text file.

    Args:
        path: File to read

    Returns:
        File contents
    """
    with open(path, "r", encoding="utf-8") as f:
        return f.read()
