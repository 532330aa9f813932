"""Two-column ``(s, v)`` text format for radial functions and profiles.

The first line is a header::

    # LogRadialFunction N=2 left=zero right=plateau

followed by one ``s v`` pair per line at 17 significant digits, which makes
the round trip bit-exact.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .radial import LogRadialFunction, PiecewiseLinear

FLOAT_FMT = ".17g"


def fmt(x: float) -> str:
    return format(float(x), FLOAT_FMT)


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(f: PiecewiseLinear, kind: str | None = None) -> str:
    from .concentration import Profile

    if kind is None:
        kind = "Profile" if isinstance(f, Profile) else (
            "LogRadialFunction" if isinstance(f, LogRadialFunction) else "PiecewiseLinear")
    header = f"# {kind}"
    if isinstance(f, LogRadialFunction):
        header += f" N={f.dim.N}"
    header += " left=zero right=plateau"
    lines = [header]
    lines += [f"{fmt(s)} {fmt(v)}" for s, v in zip(f.breakpoints, f.values)]
    return "\n".join(lines) + "\n"


def loads(text: str):
    from .concentration import Profile

    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing header line")
    tokens = lines[0].lstrip("#").split()
    kind = tokens[0]
    meta = dict(tok.split("=", 1) for tok in tokens[1:] if "=" in tok)
    if meta.get("left", "zero") != "zero" or meta.get("right", "plateau") != "plateau":
        raise ValueError(f"unsupported extension rules in header: {lines[0]!r}")
    data = np.array([[float(x) for x in ln.split()] for ln in lines[1:]])
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("expected two numeric columns")
    s, v = data[:, 0], data[:, 1]
    if kind == "LogRadialFunction":
        if "N" not in meta:
            raise ValueError("LogRadialFunction header needs N=")
        return LogRadialFunction(int(meta["N"]), s, v)
    if kind == "Profile":
        return Profile(s, v)
    if kind == "PiecewiseLinear":
        return PiecewiseLinear(s, v)
    raise ValueError(f"unknown kind {kind!r}")


def save(f: PiecewiseLinear, path: str | os.PathLike) -> None:
    atomic_write_text(path, dumps(f))


def load(path: str | os.PathLike):
    return loads(Path(path).read_text())
