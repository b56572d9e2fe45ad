"""Provide output helpers."""
import logging
import os
import shutil
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np
from pathvalidate import sanitize_filename

from .errors import ValidationError

logger = logging.getLogger(__name__)


def safe_name(name: str) -> str:
    """Return name usable as a file name.

    Raise ValidationError if nothing usable is left.
    """
    cleaned = sanitize_filename(name.replace(" ", "_"))
    if not cleaned:
        raise ValidationError("{!r} is not a usable file name".format(name))
    return str(cleaned)


@contextmanager
def atomic_output_dir(target: Path) -> Iterator[Path]:
    """Yield a temporary sibling directory that replaces target on success.

    On any exception the temporary directory is removed and target is left
    untouched.
    """
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    staging = target.parent / ".{}.tmp-{}".format(target.name, os.getpid())
    if staging.exists():
        shutil.rmtree(staging)
    staging.mkdir()
    try:
        yield staging
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    if target.exists():
        shutil.rmtree(target)
    staging.rename(target)
    logger.info("wrote %s", target)


def write_csv(path: Path, columns: Mapping[str, np.ndarray]) -> None:
    """Write equal-length columns as a UTF-8 CSV with a header row."""
    names = list(columns)
    table = np.column_stack([np.asarray(columns[name], dtype=float) for name in names])
    with open(path, "w", encoding="utf-8", newline="\n") as stream:
        stream.write(",".join(names) + "\n")
        np.savetxt(stream, table, fmt="%.17g", delimiter=",")
