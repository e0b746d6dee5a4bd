# app/utils/logger.py

import logging

from colorama import Fore, Style, init

from app.config import settings

init(autoreset=True)

COLORS = {
    logging.DEBUG: Fore.WHITE,
    logging.INFO: Fore.CYAN,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.MAGENTA,
}

RESET = Style.RESET_ALL


class ColoredModuleFormatter(logging.Formatter):
    """Prefixes every line with the emitting module (relative to app/)."""

    def format(self, record: logging.LogRecord) -> str:
        filename = record.pathname
        app_idx = filename.rfind("app/")
        if app_idx != -1:
            filename = "/" + filename[app_idx:]

        level_color = COLORS.get(record.levelno, Fore.WHITE)
        colored_filename = f"{Style.BRIGHT}{Fore.MAGENTA}{filename}:{record.lineno}{RESET}"
        colored_msg = f"{level_color}{record.getMessage()}{RESET}"
        return f"{record.levelname:<8} {colored_filename} {colored_msg}"


def build_logger(name: str = "backtrack", level: str = settings.LOG_LEVEL) -> logging.Logger:
    built = logging.getLogger(name)
    built.setLevel(level)
    if not built.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(ColoredModuleFormatter())
        built.addHandler(handler)
        built.propagate = False
    return built


logger = build_logger()
