"""Atomic file writing helpers shared by every stage that produces artifacts."""

from __future__ import annotations

import json
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator

logger = logging.getLogger(__name__)


@contextmanager
def atomic_path(path: str | Path) -> Iterator[Path]:
    """Yield a temporary sibling path and move it over ``path`` on success.

    The temporary file keeps the target suffix so format drivers that sniff
    extensions (GDAL, Pillow) still pick the right writer.

    Args:
        path: Final destination of the artifact

    Yields:
        Temporary path the caller writes to
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(f".{target.stem}.tmp{target.suffix}")
    try:
        yield tmp
        tmp.replace(target)
    except Exception:
        tmp.unlink(missing_ok=True)
        raise
    logger.debug("Wrote %s", target)


def write_text(path: str | Path, text: str) -> Path:
    """Atomically write UTF-8 text to ``path``."""
    target = Path(path)
    try:
        with atomic_path(target) as tmp:
            tmp.write_text(text, encoding="utf-8")
    except OSError as e:
        raise OSError(f"Failed to write {target}: {e}") from e
    return target


def write_json(path: str | Path, payload: Any) -> Path:
    """Atomically write ``payload`` as indented, key-sorted JSON."""
    return write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path: str | Path) -> Any:
    """Read a JSON document, adding the path to any decoding error."""
    source = Path(path)
    try:
        return json.loads(source.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ValueError(f"Failed to read JSON from {source}: {e}") from e
