import pytest

from cusplab.config import DefaultConfig, load_file
from cusplab.errors import ParameterError


def test_defaults():
    config = DefaultConfig()
    assert config.get_int('lattice', 'grid') == 289
    assert config.get_int('lattice', 'dim') == 2
    assert config.get_float('ellipticity', 'lambda_max') == 4.0
    assert config.get_float('cusp', 'threshold') is None
    assert config.get_floats('experiments', 'gamma_sweep') == []
    assert config.get_bool('output', 'plots') is False


def test_load_file_overrides_only_given_keys(tmp_path):
    path = tmp_path / 'small.cfg'
    path.write_text('[lattice]\ngrid = 65  # coarse\n\n[experiments]\ngamma_sweep = 0.01, 0.1\n')
    config = load_file(str(path))
    assert config.path == str(path)
    assert config.get_int('lattice', 'grid') == 65
    assert config.get_float('lattice', 'half_width') == 2.25
    assert config.get_floats('experiments', 'gamma_sweep') == [0.01, 0.1]


def test_unknown_section_is_rejected(tmp_path):
    path = tmp_path / 'bad.cfg'
    path.write_text('[network]\nport = 6379\n')
    with pytest.raises(ParameterError):
        load_file(str(path))


def test_missing_file_falls_back_to_defaults(tmp_path):
    config = load_file(str(tmp_path / 'absent.cfg'))
    assert config.get_int('corpus', 'seed') == 7


def test_environment_wins_over_file(tmp_path, monkeypatch):
    path = tmp_path / 'small.cfg'
    path.write_text('[lattice]\ngrid = 65\n')
    monkeypatch.setenv('CUSPLAB_GRID', '33')
    monkeypatch.setenv('CUSPLAB_SEED', '11')
    config = load_file(str(path))
    assert config.get_int('lattice', 'grid') == 33
    assert config.get_int('corpus', 'seed') == 11


def test_set_and_bool():
    config = DefaultConfig()
    config.set('output', 'plots', 'yes')
    config.set('lattice', 'grid', 129)
    assert config.get_bool('output', 'plots')
    assert config.get_int('lattice', 'grid') == 129
