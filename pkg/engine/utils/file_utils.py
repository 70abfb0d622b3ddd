"""File system utilities shared across modules."""

from pathlib import Path
from typing import List


def scan_directory(path: Path, pattern: str = "*.csv") -> List[Path]:
    """Scan directory recursively for files matching pattern.

    Args:
        path: Directory to scan
        pattern: Glob pattern for matching files

    Returns:
        Sorted list of matching file paths (empty if the directory is missing)
    """
    path = Path(path)
    if not path.exists():
        return []
    return sorted(path.rglob(pattern))
