"""windcurve: automated day-ahead wind-power forecasting for individual
turbines using power-curve ensembles, with shutdown detection/handling,
baseline forecasters, a backtesting harness, and a synthetic data generator.
"""

from importlib import resources

__version__ = "0.1.0"


def fixture_library_path():
    """Path to the bundled curve library CSV (28 synthetic OEM curves)."""
    return resources.files("windcurve").joinpath("data/curve_library.csv")


def preset_path(name: str):
    """Path to a bundled synthetic-turbine preset (``turbine1`` or ``turbine2``)."""
    return resources.files("windcurve").joinpath(f"presets/{name}.json")
