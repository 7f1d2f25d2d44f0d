from django.apps import AppConfig
import logging

logger = logging.getLogger(__name__)


class PantsOrbitsConfig(AppConfig):
    name = 'pants_orbits'
    verbose_name = 'Pants Orbits'

    def ready(self):
        """
        Validate the numerical defaults once settings are loaded
        """
        from .config import RunConfig
        from .exceptions import ConfigurationError
        try:
            RunConfig.from_settings()
        except ConfigurationError as e:
            logger.error(f"Invalid PANTS_* settings: {e}")
            raise
