import json
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from mistura import __version__


class RunManifest(BaseModel):
    """Everything needed to reproduce one CLI run and find its outputs."""

    command: str
    config: Dict[str, Any] = Field(default_factory=dict, description="Full option echo")
    seed: Optional[int] = None
    version: str = __version__
    argv: List[str] = Field(default_factory=lambda: list(sys.argv))
    started_at: str = Field(default_factory=lambda: datetime.now().isoformat())
    seconds: float = 0.0
    outputs: List[str] = Field(default_factory=list)

    @field_validator("outputs")
    def validate_outputs(cls, value):
        """Validate no output is listed twice."""
        if len(set(value)) != len(value):
            raise ValueError("An output file may appear only once in a manifest")
        return value

    def manifest_path(self, out: Path) -> Path:
        return Path(f"{Path(out)}.manifest.json")

    def write(self, out: Path) -> Path:
        """Write ``<out>.manifest.json`` and return its path."""
        path = self.manifest_path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2))
        return path

    def to_dict(self) -> dict:
        return self.model_dump()

    @classmethod
    def from_dict(cls, data: dict) -> "RunManifest":
        return cls(**data)

    @classmethod
    def read(cls, path: Path) -> "RunManifest":
        return cls.from_dict(json.loads(Path(path).read_text()))
