from app.command.base import BaseCommand, CommandFailure, CommandResult
from app.command.command_collection import CommandCollection
from app.command.match import MatchCommand
from app.command.pdf import PdfCommand
from app.command.verify import VerifyCommand


__all__ = [
    "BaseCommand",
    "CommandCollection",
    "CommandFailure",
    "CommandResult",
    "MatchCommand",
    "PdfCommand",
    "VerifyCommand",
]
