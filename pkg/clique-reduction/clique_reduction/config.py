"""
Configuration settings for clique-reduction.
This module centralizes configuration options so the CLI, the experiment harness
and the tests read the same values.
"""
import os
import logging
from dotenv import load_dotenv

# Load environment variables from .env file
# Try the current directory, then the project directory, then the repository root
load_dotenv()  # Try current directory
_project_env = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), '.env')
if os.path.exists(_project_env):
    load_dotenv(_project_env)
_root_env = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))), '.env')
if os.path.exists(_root_env):
    load_dotenv(_root_env)

# Calculate project paths (these remain constant)
PROJECT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
LOGS_DIR = os.getenv("CLIQUE_LOGS_DIR", os.path.join(PROJECT_DIR, "logs"))

# Default settings (will be overridden by environment variables if present)
DEFAULT_SETTINGS = {
    "log_level": logging.INFO,       # Default to INFO level
    "logs_dir": LOGS_DIR,            # Where the CLI writes its log file
    "workers": min(4, os.cpu_count() or 1),  # Worker processes for trial fan-out
    "default_trials": 20,            # Trials per n at desk scale
    "scan_grid_points": 30,          # Grid size of Betti-vanishing scans
    "scan_cutoff": 0.05,             # Probability below which a scan reports its threshold
    "record_wallclock": False,       # Measure wall-clock per trial (breaks byte-identical CSVs)
}

# Read settings from environment variables
def _get_env_log_level():
    """Get log level from environment variable"""
    log_level_str = os.getenv("LOGGING_LEVEL")
    if log_level_str:
        level = logging.getLevelName(log_level_str.upper())
        if isinstance(level, int):
            return level
        print(f"Warning: Invalid LOGGING_LEVEL in .env: {log_level_str}")
    return DEFAULT_SETTINGS["log_level"]

def _get_env_int(name, default, minimum=None):
    """Get integer value from environment variable"""
    val_str = os.getenv(name)
    if val_str:
        try:
            value = int(val_str)
        except ValueError:
            print(f"Warning: Invalid {name} in .env (should be integer): {val_str}")
            return default
        if minimum is not None and value < minimum:
            print(f"Warning: Invalid {name} in .env (should be >= {minimum}): {val_str}")
            return default
        return value
    return default

def _get_env_float(name, default):
    """Get float value from environment variable"""
    val_str = os.getenv(name)
    if val_str:
        try:
            return float(val_str)
        except ValueError:
            print(f"Warning: Invalid {name} in .env (should be a number): {val_str}")
    return default

def _get_env_bool(name, default):
    """Get boolean value from environment variable"""
    val_str = os.getenv(name)
    if val_str:
        lowered = val_str.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        print(f"Warning: Invalid {name} in .env (should be true/false): {val_str}")
    return default

# Override defaults with environment variables if present
env_settings = {
    "log_level": _get_env_log_level(),
    "logs_dir": LOGS_DIR,
    "workers": _get_env_int("CLIQUE_WORKERS", DEFAULT_SETTINGS["workers"], minimum=1),
    "default_trials": _get_env_int("CLIQUE_DEFAULT_TRIALS", DEFAULT_SETTINGS["default_trials"], minimum=1),
    "scan_grid_points": _get_env_int("CLIQUE_SCAN_GRID_POINTS", DEFAULT_SETTINGS["scan_grid_points"], minimum=2),
    "scan_cutoff": _get_env_float("CLIQUE_SCAN_CUTOFF", DEFAULT_SETTINGS["scan_cutoff"]),
    "record_wallclock": _get_env_bool("CLIQUE_RECORD_WALLCLOCK", DEFAULT_SETTINGS["record_wallclock"]),
}

# Initialize settings with defaults, then override with environment values
SETTINGS = DEFAULT_SETTINGS.copy()
for key, value in env_settings.items():
    if value is not None:  # Only update if the environment actually had this variable
        SETTINGS[key] = value

def update_settings(**kwargs):
    """
    Update configuration settings.

    Args:
        **kwargs: Settings to update (key-value pairs)

    Returns:
        The updated settings dictionary
    """
    SETTINGS.update(kwargs)

    # Apply log level change immediately
    if "log_level" in kwargs:
        logging.getLogger("clique-reduction").setLevel(kwargs["log_level"])

    return SETTINGS

def get_setting(key, default=None):
    """
    Get a configuration setting.

    Args:
        key: Setting name
        default: Default value if setting not found

    Returns:
        Setting value or default
    """
    return SETTINGS.get(key, default)

def describe_settings():
    """Render the current settings as ``key: value`` lines, log levels by name."""
    lines = []
    for key, value in SETTINGS.items():
        if key == "log_level":
            value = logging.getLevelName(value)
        changed = env_settings.get(key) != DEFAULT_SETTINGS.get(key)
        lines.append(f"{key}: {value}" + ("  (from environment variable)" if changed else ""))
    return lines
