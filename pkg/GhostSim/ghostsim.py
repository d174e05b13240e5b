#!/usr/bin/env python
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import logManager
from typing import Any, Dict, List, Optional
from configManager import argumentHandler, runtimeConfigHandler
from configManager.scenarioHandler import ScenarioConfig, dump_scenario, list_presets, load_preset, load_scenario
from functions.errors import GhostSimError, ScenarioError
from services.exporter import export_results
from services.scenarioRunner import run_scenario

logging = logManager.logger.get_logger(__name__)

PRESET_PREFIX = "preset:"


def load(reference: str) -> ScenarioConfig:
    """A scenario file path, or preset:<name> for a bundled preset."""
    if reference.startswith(PRESET_PREFIX):
        return load_preset(reference[len(PRESET_PREFIX):])
    return load_scenario(reference)


def run(args: Dict[str, Any]) -> int:
    cfg = load(args["SCENARIO"]).with_overrides(seed=args["SEED"], method=args["METHOD"], threads=args["THREADS"],
                                                output=args["OUT"])
    argumentHandler.process_arguments(args, cfg.output)
    result, report = run_scenario(cfg)
    export_results(result, report, cfg.output, svg=args["SVG"], scenario_text=dump_scenario(cfg))
    return 0


def presets(args: Dict[str, Any]) -> int:
    if args["PRESET_ACTION"] == "list":
        for name in list_presets():
            print(name)
        return 0
    if not args["PRESET_NAME"]:
        raise ScenarioError("presets dump needs a preset name")
    print(dump_scenario(load_preset(args["PRESET_NAME"])), end="")
    return 0


def validate(args: Dict[str, Any]) -> int:
    print(dump_scenario(load(args["SCENARIO"])), end="")
    return 0


COMMANDS = {"run": run, "presets": presets, "validate": validate}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Command line entry point.

    Returns:
        int: 0 on success, 2 for scenario errors, 3 for numerical errors, 4 for I/O errors.
    """
    runtimeConfig = runtimeConfigHandler.Config()
    try:
        runtimeConfig.populate(argv)
    except SystemExit as exc:
        # argparse already printed the usage message
        return exc.code if isinstance(exc.code, int) else ScenarioError.exit_code
    args = runtimeConfig.arg
    argumentHandler.process_arguments(args)
    try:
        return COMMANDS[args["COMMAND"]](args)
    except GhostSimError as err:
        logging.error(f"{type(err).__name__}: {err}")
        return err.exit_code


if __name__ == '__main__':
    sys.exit(main())
