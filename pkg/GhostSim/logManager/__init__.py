from logManager.logger import Logger

logger = Logger()
