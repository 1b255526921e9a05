"""
tmdyn Helpers - report serialization, artifact files and phase timing.
"""

import hashlib
import json
import os
import tempfile
import time
from pathlib import Path


# ============================================================
# Report serialization
# ============================================================

def canonical_json(data) -> str:
    """Deterministic JSON: sorted keys, fixed separators."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)


def content_hash(text: str, length: int = 12) -> str:
    """Hex prefix of the SHA-256 of text; fingerprints slices and recognizers."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:length]


# ============================================================
# Artifact files
# ============================================================

def atomic_write(filepath: str | Path, content: str, encoding: str = "utf-8") -> Path:
    """Write content next to filepath, then rename over it.

    Readers of a DOT or JSON artifact never see a half-written file.
    """
    target = Path(filepath)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding=encoding) as handle:
            handle.write(content)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return target


# ============================================================
# Phase timing
# ============================================================

def format_duration(seconds: float) -> str:
    if seconds < 1:
        return f"{round(seconds * 1000)}ms"
    if seconds < 60:
        return f"{seconds:.1f}s"
    minutes, rest = divmod(int(seconds), 60)
    return f"{minutes}m {rest}s"


class Timer:
    """Wall-clock timer for one command phase (context manager)."""

    def __init__(self, label: str = ""):
        self.label = label
        self.elapsed = 0.0
        self._started: float | None = None

    def __enter__(self) -> "Timer":
        self._started = time.perf_counter()
        return self

    def __exit__(self, *exc_info) -> None:
        self.elapsed = time.perf_counter() - self._started

    @property
    def elapsed_ms(self) -> float:
        return self.elapsed * 1000

    def __str__(self) -> str:
        text = format_duration(self.elapsed)
        return f"{self.label}: {text}" if self.label else text
