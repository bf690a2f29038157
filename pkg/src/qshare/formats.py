"""State files, CSV tables and atomic output.

A state file is JSON in one of two shapes::

    {"n_parties": 3, "local_dim": 2, "amplitudes": [[re, im], ...]}
    {"family": "ghz", "params": {"theta": 0.785398}}

Amplitudes follow the package basis order (party 1 most significant).
"""
import csv
import io
import json
import os
import tempfile

from .errors import QShareError
from .states import PureState, StateSpec


def parse_state_document(doc) -> PureState:
    if not isinstance(doc, dict):
        raise QShareError("state document must be a JSON object")
    if "family" in doc:
        params = doc.get("params", {})
        if not isinstance(params, dict):
            raise QShareError("field 'params' must be an object")
        return StateSpec(str(doc["family"]), params).build()
    for name in ("n_parties", "amplitudes"):
        if name not in doc:
            raise QShareError(f"state document is missing field {name!r}")
    return StateSpec("amplitudes", doc).build()


def load_state_file(path) -> PureState:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise QShareError(f"cannot read state file {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise QShareError(f"state file {path!r} is not valid JSON: {exc.msg}") from None
    return parse_state_document(doc)


def state_document(state: PureState) -> dict:
    return {
        "n_parties": state.n_parties,
        "local_dim": state.local_dim,
        "amplitudes": [[float(z.real), float(z.imag)] for z in state.amplitudes],
    }


def csv_text(columns, rows, manifest=None) -> str:
    """Comma-separated text with LF endings; floats keep full round-trip precision.

    ``manifest`` becomes a leading ``#`` comment line.
    """
    buf = io.StringIO()
    if manifest:
        buf.write(f"# {manifest}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def table_text(columns, rows) -> str:
    """Aligned human table, numbers rounded to 6 significant digits."""
    cells = [[f"{v:.6g}" if isinstance(v, float) else str(v) for v in row] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def json_text(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_atomic(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qshare-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
