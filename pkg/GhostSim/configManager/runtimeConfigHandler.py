from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional
from configManager.argumentHandler import parse_arguments


@dataclass
class Config:
    arg: Dict[str, Any] = field(default_factory=dict)

    def populate(self, argv: Optional[List[str]] = None) -> None:
        """
        Populate the configuration with parsed arguments.

        Args:
            argv (list): command line without the program name; sys.argv when None.
        """
        self.arg.clear()
        self.arg.update(parse_arguments(argv))
