from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional

from cuid2 import cuid_wrapper
from pydantic import BaseModel, Field

from pipeline_steps.util import sha256_file, write_json_file

__version__ = "0.1.0"

MANIFEST_NAME = "manifest.json"

run_id_generator: Callable[[], str] = cuid_wrapper()


class EmittedFile(BaseModel):
    path: str
    sha256: str


class RunManifest(BaseModel):
    """Record of one command run: resolved config, emitted files and outcome."""

    run_id: str = Field(default_factory=lambda: run_id_generator())
    command: str
    config: Dict[str, Any]
    version: str = __version__
    started_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    duration_seconds: float = 0.0
    files: List[EmittedFile] = []
    status: Literal["ok", "partial"] = "ok"
    exit_code: int = 0
    error: Optional[str] = None

    def record(self, path: Path, root: Path) -> EmittedFile:
        entry = EmittedFile(path=path.relative_to(root).as_posix(), sha256=sha256_file(path))
        self.files.append(entry)
        return entry

    def write(self, out_dir: Path) -> Path:
        return write_json_file(out_dir / MANIFEST_NAME, self.model_dump(mode="json"))
