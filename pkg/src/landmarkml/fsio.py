"""Atomic file output: write to a temp file, fsync, rename into place.

Commands never leave partial outputs behind; a crash mid-write leaves at
most a ``.tmp-*`` file next to the target.
"""

import os
import tempfile


def write_text_atomic(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
