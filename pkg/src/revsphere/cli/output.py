"""CSV and JSON writers with stable formatting."""

import json
import logging
import math
import sys

from importlib import metadata
from pathlib import Path
from typing import Any

import pandas as pd


logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
FLOAT_FORMAT = '%.17g'


def tool_version() -> str:
    try:
        return metadata.version('revsphere')
    except metadata.PackageNotFoundError:
        return '0+unknown'


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding='utf-8')
    logger.info(f'Wrote {out}')


def write_csv(
    frame: pd.DataFrame,
    out: Path | None,
    summary: dict[str, Any] | None = None,
) -> None:
    """One header row, 17 significant digits, summary as trailing '# key: value' lines."""
    text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    for key, value in sorted((summary or {}).items()):
        text += f'# {key}: {json.dumps(value, sort_keys=True)}\n'
    _emit(text, out)


def _finite(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(item) for item in value]
    return value


def write_json(payload: dict[str, Any], out: Path | None, command: str) -> None:
    """Sorted keys, schema_version and tool version added; non-finite floats become null."""
    document = {
        'schema_version': SCHEMA_VERSION,
        'tool': 'revsphere',
        'version': tool_version(),
        'command': command,
        **_finite(payload),
    }
    _emit(json.dumps(document, sort_keys=True, indent=2, allow_nan=False) + '\n', out)


def frame_columns(frame: pd.DataFrame) -> dict[str, list]:
    """Columns as JSON-safe lists (NaN becomes null)."""
    cleaned = frame.astype(object).where(frame.notna(), None)
    return {name: cleaned[name].tolist() for name in frame.columns}
