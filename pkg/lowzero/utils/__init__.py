"""
Utility functions for lowzero.
"""

from lowzero.utils.file_utils import ensure_directory, read_file, write_file
from lowzero.utils.logging_utils import get_logger, setup_logger
from lowzero.utils.parallel import map_ordered

__all__ = [
    "ensure_directory",
    "get_logger",
    "map_ordered",
    "read_file",
    "setup_logger",
    "write_file",
]
