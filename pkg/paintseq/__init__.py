"""
Paint shop vehicle sequencing
Settings factory, mirroring the application factory pattern
"""

from types import MappingProxyType

from config import config

__version__ = '1.0.0'


def create_settings(config_name='default', **overrides):
    """
    Settings factory function

    Args:
        config_name (str): Configuration to use ('development', 'production', 'testing')
        **overrides: Upper-case keys replacing configured values

    Returns:
        Read-only mapping of configuration values
    """
    config_class = config[config_name]
    values = {
        key: getattr(config_class, key)
        for key in dir(config_class)
        if key.isupper()
    }
    for key, value in overrides.items():
        if value is not None:
            values[key.upper()] = value
    return MappingProxyType(values)
