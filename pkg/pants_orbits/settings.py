"""
Django settings for the pants_orbits project.

The project has no web surface: Django provides configuration, logging,
management commands and the test runner for the numerics in pants_orbits
and orbits.

Numerical defaults are read from the environment (a .env file is honoured)
and can be overridden per run by a key-value config file or command flags,
see pants_orbits.config.
"""

from pathlib import Path
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'pants-orbits-local-only')

DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'pants_orbits.apps.PantsOrbitsConfig',
    'orbits.apps.OrbitsConfig',
]

# No models live in this project; tests run on SimpleTestCase.
DATABASES = {}

USE_TZ = True
TIME_ZONE = 'UTC'


# Numerical defaults
PANTS_TOL = float(os.getenv('PANTS_TOL', '1e-10'))
PANTS_BISECTION_TOL = float(os.getenv('PANTS_BISECTION_TOL', '1e-10'))
PANTS_COLLISION_GUARD = float(os.getenv('PANTS_COLLISION_GUARD', '1e-6'))
PANTS_METRIC_GUARD = float(os.getenv('PANTS_METRIC_GUARD', '1e-3'))
PANTS_CHART_GUARD = float(os.getenv('PANTS_CHART_GUARD', '0.05'))
PANTS_CHART_EXIT = float(os.getenv('PANTS_CHART_EXIT', '0.06'))
PANTS_SAMPLE_STEP = float(os.getenv('PANTS_SAMPLE_STEP', '0.01'))

# Shooting defaults
PANTS_D0 = float(os.getenv('PANTS_D0', '5'))
PANTS_HORIZON = float(os.getenv('PANTS_HORIZON', '40'))
PANTS_HORIZON_DEPTH = float(os.getenv('PANTS_HORIZON_DEPTH', '8'))
PANTS_TAIL_DEPTH = float(os.getenv('PANTS_TAIL_DEPTH', '1'))
PANTS_GRID = int(os.getenv('PANTS_GRID', '720'))
PANTS_BISECTION_STEPS = int(os.getenv('PANTS_BISECTION_STEPS', '60'))
PANTS_EPS = float(os.getenv('PANTS_EPS', '1e-2'))
PANTS_EPS_MAX = float(os.getenv('PANTS_EPS_MAX', '0.05'))
PANTS_WINDING_HORIZON = float(os.getenv('PANTS_WINDING_HORIZON', '400'))

# Runs
PANTS_WORKERS = int(os.getenv('PANTS_WORKERS', '1'))
PANTS_SEED = int(os.getenv('PANTS_SEED', '20240607'))
PANTS_OUTPUT_DIR = Path(os.getenv('PANTS_OUTPUT_DIR', BASE_DIR / 'output'))
PANTS_LIBRARY_NAME = os.getenv('PANTS_LIBRARY_NAME', 'orbit_library.json')

PANTS_LOG_LEVEL = os.getenv('PANTS_LOG_LEVEL', 'INFO')
LOG_DIR = BASE_DIR / 'logs'
LOG_DIR.mkdir(exist_ok=True)

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': PANTS_LOG_LEVEL,
            'class': 'logging.FileHandler',
            'filename': LOG_DIR / 'pants.log',
            'formatter': 'plain',
        },
        'console': {
            'level': PANTS_LOG_LEVEL,
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'pants_orbits': {
            'handlers': ['file', 'console'],
            'level': PANTS_LOG_LEVEL,
            'propagate': True,
        },
    },
}

# Orbit finder logging
LOGGING['loggers']['orbits'] = {
    'handlers': ['file', 'console'],
    'level': PANTS_LOG_LEVEL,
    'propagate': True,
}
