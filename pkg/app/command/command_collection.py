"""Collection of the command-line commands."""

from typing import Dict, Iterator, List

from app.command.base import BaseCommand, CommandFailure, CommandResult
from app.config import RunConfig
from app.exceptions import ConfigError, DensityMatchError
from app.logger import logger


class CommandCollection:
    """A collection of defined commands."""

    def __init__(self, *commands: BaseCommand):
        self.commands = commands
        self.command_map: Dict[str, BaseCommand] = {c.name: c for c in commands}

    def __iter__(self) -> Iterator[BaseCommand]:
        return iter(self.commands)

    @property
    def names(self) -> List[str]:
        return [command.name for command in self.commands]

    async def execute(self, *, name: str, config: RunConfig) -> CommandResult:
        command = self.command_map.get(name)
        if not command:
            return CommandFailure(error=f"Command {name} is invalid", exit_code=2)
        try:
            return await command(config)
        except ConfigError as e:
            logger.error(e.message)
            return CommandFailure(error=e.message, exit_code=2)
        except DensityMatchError as e:
            logger.exception(f"{name} failed: {e}")
            return CommandFailure(error=str(e))
