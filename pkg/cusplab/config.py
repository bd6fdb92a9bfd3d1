"""
Simple sectioned key-value config system
"""
import configparser
import os

from cusplab.errors import ParameterError

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'default.cfg')


class Config(object):
    """
    Loads flat sections ('lattice', 'ellipticity', 'solver', ...) from a UTF-8
    key-value file into the `sections` dictionary of this instance.
    """

    SECTIONS = ('lattice', 'ellipticity', 'cusp', 'barrier', 'solver', 'corpus', 'experiments', 'output')

    def __init__(self):
        self.sections = dict((name, dict()) for name in Config.SECTIONS)
        self.path = None

    def load_file(self, config_file):
        if not os.path.exists(config_file):
            self.set_defaults()
            return

        parser = configparser.ConfigParser(inline_comment_prefixes=('#',))
        with open(config_file, encoding='utf-8') as f:
            parser.read_file(f)

        for section in parser.sections():
            if section not in self.sections:
                raise ParameterError("Unknown section [{}] in the config {}".format(section, config_file))
            self.sections[section].update(parser.items(section))

        self.path = config_file
        self.set_defaults()

    def set_defaults(self):
        # Shipped defaults first, environment override on top
        parser = configparser.ConfigParser(inline_comment_prefixes=('#',))
        with open(DEFAULT_CONFIG_PATH, encoding='utf-8') as f:
            parser.read_file(f)
        for section in parser.sections():
            for key, value in parser.items(section):
                self.sections[section].setdefault(key, value)

        if 'CUSPLAB_GRID' in os.environ:
            self.sections['lattice']['grid'] = os.environ['CUSPLAB_GRID']
        if 'CUSPLAB_SEED' in os.environ:
            self.sections['corpus']['seed'] = os.environ['CUSPLAB_SEED']
        if 'CUSPLAB_OUT' in os.environ:
            self.sections['output']['out'] = os.environ['CUSPLAB_OUT']

    def set(self, section, name, value):
        self.sections[section][name] = str(value)

    def get(self, section, name, default=None):
        value = self.sections.get(section, {}).get(name)
        if value is None or value == '':
            return default
        return value

    def get_int(self, section, name, default=None):
        value = self.get(section, name)
        return default if value is None else int(value)

    def get_float(self, section, name, default=None):
        value = self.get(section, name)
        return default if value is None else float(value)

    def get_bool(self, section, name, default=False):
        value = self.get(section, name)
        if value is None:
            return default
        return str(value).strip().lower() in ('1', 'true', 'yes', 'on')

    def get_floats(self, section, name):
        value = self.get(section, name)
        if value is None:
            return []
        return [float(token) for token in value.replace(',', ' ').split()]


class DefaultConfig(Config):
    """A config with set_defaults already called"""
    def __init__(self):
        super().__init__()
        self.set_defaults()


def load_file(config_file):
    """
    Given a config path (or the name 'default') returns the loaded configuration,
    falling back to the shipped defaults when the file does not exist
    """
    config = DefaultConfig()
    if config_file in (None, 'default'):
        return config
    config.load_file(config_file)
    return config
