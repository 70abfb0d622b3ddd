"""Create output folder structures for pipeline runs."""

from pathlib import Path
from typing import Union

STAGE_FOLDERS = ("cohort", "topics", "features", "shards", "models", "metrics", "interpret", "report")


def create_run_folder(workdir: Path) -> Path:
    """Create the run folder and its per-stage subfolders.

    Args:
        workdir: Run folder

    Returns:
        Path to the run folder
    """
    folder = Path(workdir)
    for name in STAGE_FOLDERS:
        (folder / name).mkdir(parents=True, exist_ok=True)
    return folder


def write_file(folder: Path, filename: str, content: Union[bytes, str]) -> Path:
    """Write bytes or UTF-8 text to file in folder.

    Args:
        folder: Folder path
        filename: File name
        content: File content

    Returns:
        Path to written file
    """
    folder = Path(folder)
    folder.mkdir(parents=True, exist_ok=True)
    filepath = folder / filename
    if isinstance(content, str):
        content = content.encode("utf-8")
    filepath.write_bytes(content)
    return filepath
