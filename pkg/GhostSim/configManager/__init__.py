from configManager import units
from configManager import scenarioHandler
from configManager import argumentHandler
from configManager import runtimeConfigHandler
