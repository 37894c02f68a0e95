import os
import sys
from datetime import datetime
from typing import Dict, Optional

from loguru import logger as _logger

from app.config import PROJECT_ROOT

# set to any value to keep runs (and the test suite) from writing under logs/
NO_LOGFILE_ENV = "DENSITYMATCH_NO_LOGFILE"

_sink_ids: Dict[str, int] = {}


def define_log_level(
    print_level: str = "INFO",
    logfile_level: str = "DEBUG",
    name: Optional[str] = "densitymatch",
):
    """Route logs to stderr at print_level and to a timestamped file under logs/."""
    stamp = datetime.now().strftime("%Y%m%d%H%M%S")
    log_name = f"{name}_{stamp}" if name else stamp

    _logger.remove()
    _sink_ids.clear()
    _sink_ids["stderr"] = _logger.add(sys.stderr, level=print_level)
    if not os.getenv(NO_LOGFILE_ENV):
        _sink_ids["file"] = _logger.add(
            PROJECT_ROOT / "logs" / f"{log_name}.log", level=logfile_level
        )
    return _logger


def set_print_level(print_level: str):
    """Change the stderr level; the log file sink is left as it is."""
    sink_id = _sink_ids.pop("stderr", None)
    if sink_id is not None:
        try:
            _logger.remove(sink_id)
        except ValueError:
            # removed elsewhere
            pass
    _sink_ids["stderr"] = _logger.add(sys.stderr, level=print_level)
    return _logger


logger = define_log_level()
