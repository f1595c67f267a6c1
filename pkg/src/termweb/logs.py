"""
Logging setup for termweb programs.

Library modules only create ``logging.getLogger(__name__)`` loggers; programs
(the CLI, CGI scripts, daemons) call ``setup_logging`` once.
"""

import logging
import sys
from pathlib import Path
from typing import Optional, Union

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(level: Union[int, str] = "WARNING", log_file: Optional[str] = None) -> logging.Logger:
    """
    Send termweb log records to standard error and, optionally, a file.

    Args:
        level: Logging level name or number
        log_file: Path of a log file to append to

    Returns:
        The configured ``termweb`` logger
    """
    root = logging.getLogger("termweb")
    root.setLevel(level.upper() if isinstance(level, str) else level)
    formatter = logging.Formatter(LOG_FORMAT)

    # Repeated calls replace handlers instead of stacking them
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()

    # stderr keeps stdout clean for CGI replies and fetched bodies
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(formatter)
    root.addHandler(stream_handler)

    if log_file:
        file_handler = logging.FileHandler(Path(log_file), mode="a", encoding="utf-8")
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)

    root.propagate = False
    return root
