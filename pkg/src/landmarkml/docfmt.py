"""Flat key=value report documents.

All human-readable reports (metric reports, train summaries, landmark
reports, run configs) use one `key=value` pair per line, in insertion
order. Floats are written with repr(), which round-trips float64 exactly,
so a parsed document reproduces the original values bit-for-bit.
"""

from .errors import ParseError


def format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(float(v))  # plain-float repr even for numpy scalars
    return str(v)


def dumps(pairs):
    """Serialize an ordered mapping (or iterable of pairs) to document text."""
    items = pairs.items() if hasattr(pairs, "items") else pairs
    lines = []
    for key, value in items:
        key = str(key)
        if "=" in key or "\n" in key or not key:
            raise ValueError(f"invalid document key: {key!r}")
        lines.append(f"{key}={format_value(value)}")
    return "\n".join(lines) + "\n"


def loads(text):
    """Parse document text back into a dict of strings.

    Values stay strings; callers coerce with float()/int() as needed.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {raw!r}", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ParseError("empty key", line=lineno)
        if key in out:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        out[key] = value.strip()
    return out


def parse_bool(s):
    if s in ("true", "1", "on", "yes"):
        return True
    if s in ("false", "0", "off", "no"):
        return False
    raise ParseError(f"expected a boolean, got {s!r}")
