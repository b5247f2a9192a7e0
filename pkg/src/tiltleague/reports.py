"""Atomic file output and plain-text summary blocks.

Declared output paths must never hold partial data: everything is written
to a temporary file in the destination directory first and moved into place
with ``os.replace``, which is atomic on POSIX filesystems.
"""

from __future__ import annotations

import csv
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."),
                               prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_csv(path: str | Path, header: Sequence[str],
                     rows: Iterable[Sequence]) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."),
                               prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def summary_block(title: str, items: Sequence[tuple[str, object]]) -> str:
    """Aligned key/value block for terminal output."""
    width = max(len(k) for k, _ in items) if items else 0
    lines = [title, "-" * len(title)]
    for key, val in items:
        if isinstance(val, float):
            val = f"{val:.10g}"
        lines.append(f"{key.ljust(width)}  {val}")
    return "\n".join(lines)
