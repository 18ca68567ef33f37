import hashlib
import json
import logging
import math
from contextlib import contextmanager
from pathlib import Path
from time import time
from typing import Any, Dict, List

import numpy as np
import pandas as pd


@contextmanager
def performance_monitor(endpoint_name: str):
    start_time = time()
    try:
        yield
    finally:
        execution_time = time() - start_time
        logging.info(f"{endpoint_name} executed in {execution_time:.2f} seconds")


def complex_to_dict(value: complex) -> Dict[str, float]:
    return {"re": float(value.real), "im": float(value.imag)}


def jsonable(value: Any) -> Any:
    """
    Convert numpy scalars/arrays, complex numbers and tuples into plain JSON
    values. Non-finite floats become strings so the output stays valid JSON.
    """
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (complex, np.complexfloating)):
        return complex_to_dict(complex(value))
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return str(value)
        return value
    if isinstance(value, Path):
        return str(value)
    return value


def write_json_file(path: Path, payload: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        json.dump(jsonable(payload), handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def rows_to_csv(path: Path, rows: List[Dict[str, Any]], columns: List[str]) -> Path:
    """
    Write rows with a fixed column order. Floats are printed with 17
    significant digits so the file is byte-identical across runs.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(rows, columns=columns)
    frame.to_csv(
        path,
        index=False,
        float_format="%.17g",
        lineterminator="\n",
        encoding="utf-8",
    )
    return path


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
