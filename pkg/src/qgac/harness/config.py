"""Key-value configuration files.

One ``key = value`` per line; ``#`` starts a comment. Keys use the long
option names without dashes (``metrics_convention`` or ``metrics-convention``).
List values are comma separated.
"""

from __future__ import annotations

from pathlib import Path

KNOWN_KEYS = {
    "quality",
    "qualities",
    "subsampling",
    "checkpoint",
    "seed",
    "threads",
    "metrics_convention",
    "encoder",
    "output",
    "inputs",
    "steps",
    "patch_size",
    "patches_per_image",
}


def parse_config(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{n}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KNOWN_KEYS:
            raise ValueError(f"{source}:{n}: unknown key {key!r}")
        out[key] = value
    return out


def load_config(path) -> dict[str, str]:
    p = Path(path)
    return parse_config(p.read_text(encoding="utf-8"), str(p))


def int_list(value: str) -> tuple[int, ...]:
    return tuple(int(v) for v in value.replace(" ", "").split(",") if v)
