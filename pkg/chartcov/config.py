"""Configuration module for the chart coverage toolkit."""
import os
from dotenv import load_dotenv

load_dotenv()

# Logging
LOG_LEVEL = os.getenv('CHARTCOV_LOG_LEVEL', 'INFO').upper()
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Chart semantics
MICROSTEP_LIMIT = int(os.getenv('CHARTCOV_MICROSTEP_LIMIT', '1024'))
if MICROSTEP_LIMIT <= 0:
    raise ValueError("CHARTCOV_MICROSTEP_LIMIT must be positive")

# Files
REFERENCE_MODEL_PATH = os.getenv('CHARTCOV_REFERENCE_MODEL', 'assets/intersection.scd')
CATALOG_PATH = os.getenv('CHARTCOV_CATALOG_PATH', 'scenario_catalog.db')

# Report rendering
SVG_WIDTH = int(os.getenv('CHARTCOV_SVG_WIDTH', '960'))
SVG_HEIGHT = int(os.getenv('CHARTCOV_SVG_HEIGHT', '480'))

# Coupon collector estimation
CCP_CURVE_MAX_EXPONENT = 16
CCP_MAX_DRAWS = int(os.getenv('CHARTCOV_CCP_MAX_DRAWS', str(2 ** 24)))

# Scenario generation defaults
DEFAULT_P_VRU = float(os.getenv('CHARTCOV_P_VRU', '0.5'))
DEFAULT_P_DETECT = float(os.getenv('CHARTCOV_P_DETECT', '0.90'))
DEFAULT_P_LOCATE = float(os.getenv('CHARTCOV_P_LOCATE', '0.75'))
DEFAULT_P_TX = float(os.getenv('CHARTCOV_P_TX', '0.90'))
DEFAULT_P_JAYWALK = float(os.getenv('CHARTCOV_P_JAYWALK', '0.10'))

# Seconds spent in each light state per nominal cycle (31 s in total).
# Yellow is visited twice per cycle; its duration is split over both visits.
PHASE_DURATIONS = {
    'Red': 10.0,
    'RedToYellow': 2.0,
    'Yellow': 3.0,
    'YellowToGreen': 2.0,
    'Green': 10.0,
    'GreenToYellow': 2.0,
    'YellowToRed': 2.0,
}

# Scenario timing (seconds)
DEFAULT_TICK = 0.1
DEFAULT_DETECT_TIME = 1.0
DEFAULT_LOCATE_TIME = 2.0
DEFAULT_APPROACH_TIME = 5.0
DEFAULT_RESPONSE_LATENCY = 0.2
DEFAULT_TIMEOUT = 0.5
