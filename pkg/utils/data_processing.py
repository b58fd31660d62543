"""
Result files written by the CLI.

Each CSV starts with '#' metadata lines (tool, version, anchor, config hash
and free notes) followed by the table. Floats use a fixed format so the
same config reproduces the same bytes.
"""
import io
import json
import logging
import os
from importlib import metadata

import pandas as pd

from utils.errors import ConfigError

logger = logging.getLogger(__name__)

TOOL_NAME = "he3-array-toolkit"
FLOAT_FORMAT = "%.10g"


def tool_version():
    try:
        return metadata.version(TOOL_NAME)
    except metadata.PackageNotFoundError:
        return "0.1.0"


def _metadata_lines(anchor, config_hash, notes):
    header = {"tool": TOOL_NAME, "version": tool_version(), "anchor": anchor or "", "config_hash": config_hash or ""}
    header.update({key: notes[key] for key in sorted(notes or {})})
    return [f"# {key}: {_format_note(value)}" for key, value in header.items()]


def _format_note(value):
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(value, sort_keys=True, default=str)
    return str(value).replace("\n", " ")


def format_result(frame, anchor="", config_hash="", notes=None):
    """
    Render a result table with its metadata header

    Args:
        frame (DataFrame): Result rows in output order
        anchor (str): Figure or table the rows reproduce
        config_hash (str): RunConfig hash
        notes (dict): Extra key-value metadata

    Returns:
        str: File contents
    """
    buffer = io.StringIO()
    buffer.write("\n".join(_metadata_lines(anchor, config_hash, notes)) + "\n")
    frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return buffer.getvalue()


def save_result(frame, file_path, anchor="", config_hash="", notes=None):
    """
    Write a result table to CSV

    Returns:
        str: The written path
    """
    try:
        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(file_path, "w", encoding="utf-8", newline="") as f:
            f.write(format_result(frame, anchor, config_hash, notes))
    except OSError as e:
        raise ConfigError(f"cannot write {file_path}: {e.strerror}") from e
    logger.info("Wrote %d rows to %s", len(frame), file_path)
    return file_path


def load_result(file_path):
    """
    Read a result CSV back

    Returns:
        tuple: (DataFrame, dict of metadata)
    """
    if not os.path.exists(file_path):
        raise ConfigError(f"result file not found: {file_path}")
    meta = {}
    with open(file_path, encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(":")
            meta[key.strip()] = value.strip()
    return pd.read_csv(file_path, comment="#"), meta
