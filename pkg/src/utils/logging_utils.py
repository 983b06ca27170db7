import logging
from datetime import datetime
from pathlib import Path

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(log_dir="logs", level="INFO"):
    """Configure logging for the app: a dated log file plus the console."""
    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)  # parents=True creates parent directories if they don't exist

    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            raise ValueError(f"Invalid log level '{level}'")

    logging.basicConfig(
        level=level,
        format=LOG_FORMAT,
        handlers=[
            logging.FileHandler(log_dir / f"session_{datetime.now().strftime('%Y%m%d')}.log"),
            logging.StreamHandler()  # logs to both file and console(stream)
        ],
        force=True,
    )
