"""Main entry point for the chart coverage toolkit."""
import logging
import sys

from chartcov import cli, config

# Configure logging
logging.basicConfig(
    level=config.LOG_LEVEL,
    format=config.LOG_FORMAT
)
logger = logging.getLogger(__name__)


if __name__ == '__main__':
    try:
        sys.exit(cli.main())
    except KeyboardInterrupt:
        logger.info("Stopped by user")
        sys.exit(130)
