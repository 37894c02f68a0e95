import json
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, List, Optional, Union

from pydantic import BaseModel, Field

from app.config import RunConfig
from app.flow.flow_factory import FlowFactory, FlowType
from app.flow.matching import MatchingFlow


class CommandResult(BaseModel):
    """Represents the result of a command execution."""

    output: Any = Field(default=None)
    error: Optional[str] = Field(default=None)
    files: List[Path] = Field(default_factory=list)
    exit_code: int = Field(default=0)

    def __bool__(self):
        return self.exit_code == 0

    def __str__(self):
        return f"Error: {self.error}" if self.error else str(self.output)


class CommandFailure(CommandResult):
    """A CommandResult that represents a failure."""

    exit_code: int = 1


class BaseCommand(ABC, BaseModel):
    name: str
    description: str

    async def __call__(self, config: RunConfig) -> CommandResult:
        """Execute the command against a run configuration."""
        return await self.execute(config)

    @abstractmethod
    async def execute(self, config: RunConfig) -> CommandResult:
        """Execute the command against a run configuration."""

    @staticmethod
    def build_flow(config: RunConfig) -> MatchingFlow:
        return FlowFactory.create_flow(FlowType.MATCHING, config)


def write_json(path: Union[str, Path], payload: Any) -> Path:
    """Indented, key-sorted JSON; floats use the shortest round-trip repr."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path
