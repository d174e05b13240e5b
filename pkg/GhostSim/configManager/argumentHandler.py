import argparse
import os
import logManager
from os import getenv
from typing import Any, Dict, List, Optional, Union
from functions.errors import ExportError

logging = logManager.logger.get_logger(__name__)

# the command line spells the Monte Carlo method "mc"
METHOD_ALIASES = {"mc": "montecarlo", "analytic": "analytic", "both": "both"}
LOG_FILE_NAME = "ghostsim.log"


def get_environment_variable(var: str, boolean: bool = False) -> Union[str, bool, None]:
    """
    Retrieve the value of an environment variable.

    Args:
        var (str): The name of the environment variable.
        boolean (bool): If True, interpret the value as a boolean.

    Returns:
        str or bool: The value of the environment variable, or False if boolean is True and the value is not "true".
    """
    value = getenv(var)
    if boolean and value:
        value = value.lower() == "true"
    return value


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed {text} is not an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ghostsim", description="Lensless ghost imaging and HBT simulator")
    ap.add_argument("--debug", action="store_true", help="Enables debug output")
    commands = ap.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a scenario file (or a bundled preset) and write its results")
    run.add_argument("scenario", help="Scenario file path, or preset:<name>")
    run.add_argument("--seed", type=_seed, help="Override the master seed")
    run.add_argument("--method", choices=sorted(METHOD_ALIASES), help="Override the computation method")
    run.add_argument("--out", help="Output directory (overrides the scenario's output key)")
    run.add_argument("--threads", type=_positive_int, help="Worker threads for Monte Carlo blocks")
    run.add_argument("--no-svg", action="store_true", help="Skip the profile.svg plot")
    run.add_argument("--debug", action="store_true", default=argparse.SUPPRESS, help="Enables debug output")

    presets = commands.add_parser("presets", help="List the bundled presets or print one")
    presets.add_argument("action", choices=["list", "dump"])
    presets.add_argument("name", nargs="?", help="Preset to dump")

    validate = commands.add_parser("validate", help="Parse a scenario and print its normalized form")
    validate.add_argument("scenario", help="Scenario file path, or preset:<name>")
    return ap


def process_arguments(args: Dict[str, Any], out_dir: Optional[str] = None) -> None:
    """
    Configure logging from the parsed arguments.

    Args:
        args (dict): A dictionary of arguments.
        out_dir (str): when given, a log file is kept in this directory as well.
    """
    log_level = "DEBUG" if args["DEBUG"] else "INFO"
    log_file = None
    if out_dir:
        try:
            os.makedirs(out_dir, exist_ok=True)
        except OSError as err:
            raise ExportError(err.strerror or str(err), path=out_dir) from err
        log_file = os.path.join(out_dir, LOG_FILE_NAME)
    logManager.logger.configure_logger(log_level, log_file)
    logging.debug(f"Debug logging {'enabled' if args['DEBUG'] else 'disabled'}!")


def parse_arguments(argv: Optional[List[str]] = None) -> Dict[str, Any]:
    """
    Parse command-line arguments and environment variables.

    Args:
        argv (list): arguments without the program name; sys.argv when None.

    Returns:
        dict: the parsed arguments and their values.
    """
    argumentDict: Dict[str, Any] = {
        "COMMAND": None, "SCENARIO": None, "SEED": None, "METHOD": None, "OUT": None,
        "THREADS": None, "DEBUG": False, "SVG": True, "PRESET_ACTION": None, "PRESET_NAME": None,
    }
    args = build_parser().parse_args(argv)

    argumentDict["COMMAND"] = args.command
    argumentDict["DEBUG"] = bool(getattr(args, "debug", False) or get_environment_variable("DEBUG", True))
    if args.command in ("run", "validate"):
        argumentDict["SCENARIO"] = args.scenario
    if args.command == "run":
        argumentDict["SEED"] = args.seed
        argumentDict["METHOD"] = METHOD_ALIASES[args.method] if args.method else None
        argumentDict["OUT"] = args.out
        argumentDict["SVG"] = not args.no_svg
        threads = args.threads or get_environment_variable("GHOSTSIM_THREADS")
        if threads:
            try:
                argumentDict["THREADS"] = _positive_int(str(threads))
            except (ValueError, argparse.ArgumentTypeError):
                logging.warning(f"ignoring GHOSTSIM_THREADS={threads!r}: not a positive integer")
    if args.command == "presets":
        argumentDict["PRESET_ACTION"] = args.action
        argumentDict["PRESET_NAME"] = args.name
    return argumentDict
