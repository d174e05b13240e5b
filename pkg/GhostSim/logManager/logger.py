import logging
import logging.handlers
import sys
from typing import Dict, Optional


def _get_log_format():
    """Return the log format for the logger."""
    return logging.Formatter('%(asctime)s - %(name)s - %(lineno)d - %(levelname)s - %(message)s')


class Logger:
    loggers: Dict[str, logging.Logger] = {}
    logLevel = logging.INFO
    logFile: Optional[str] = None

    def configure_logger(self, level: str, log_file: Optional[str] = None) -> None:
        """
        Configure the logging level (and optional run log file) for all loggers.

        Args:
            level (str): Level name such as "DEBUG" or "INFO".
            log_file (str, optional): Path of a rotating log file. No file is written when None.
        """
        self.logLevel = getattr(logging, level.upper(), logging.INFO)
        self.logFile = log_file

        for loggerName in self.loggers:
            for handler in list(self.loggers[loggerName].handlers):
                handler.close()
            self.loggers[loggerName].handlers.clear()
            self._setup_logger(loggerName)

    def _setup_logger(self, name: str) -> logging.Logger:
        """Set up a logger with the given name."""
        logger = logging.getLogger(name)

        # INFO and below to stdout
        stdout_handler = logging.StreamHandler(sys.stdout)
        stdout_handler.setFormatter(_get_log_format())
        stdout_handler.setLevel(self.logLevel)
        stdout_handler.addFilter(lambda record: record.levelno <= logging.INFO)
        logger.addHandler(stdout_handler)

        # warnings and errors to stderr
        stderr_handler = logging.StreamHandler(sys.stderr)
        stderr_handler.setFormatter(_get_log_format())
        stderr_handler.setLevel(logging.WARNING)
        logger.addHandler(stderr_handler)

        if self.logFile:
            file_handler = logging.handlers.RotatingFileHandler(
                filename=self.logFile, maxBytes=10000000, backupCount=7, encoding="utf-8")
            file_handler.setFormatter(_get_log_format())
            file_handler.setLevel(logging.DEBUG)
            logger.addHandler(file_handler)

        logger.setLevel(logging.DEBUG)
        logger.propagate = False
        return logger

    def get_logger(self, name: str) -> logging.Logger:
        """Get a logger by name, creating it if necessary."""
        if name not in self.loggers:
            self.loggers[name] = self._setup_logger(name)
        return self.loggers[name]

    def get_level_name(self) -> str:
        """Get the name of the current logging level."""
        return logging.getLevelName(self.logLevel)
