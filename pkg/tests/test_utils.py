import importlib
import json
import logging
import sys

import pytest

import gkit
from gkit import logging_setup, utils
from gkit.errors import ConfigurationError


def test_load_config(tmp_path, monkeypatch):
    # Fake module directory to local tmp
    monkeypatch.setattr(utils, '__file__', tmp_path / 'fakefile.py')

    config_path = tmp_path / 'config.json'
    assert not config_path.exists()

    config = utils.load_config()

    # Check file created
    assert config_path.exists()
    assert isinstance(config, dict)
    assert config == utils.DEFAULTS
    assert json.loads(config_path.read_text()) == utils.DEFAULTS


def test_load_config_merges_defaults(tmp_path, monkeypatch):
    monkeypatch.setattr(utils, '__file__', tmp_path / 'fakefile.py')
    (tmp_path / 'config.json').write_text(json.dumps({'orbit_tol': 1e-10}))

    config = utils.load_config()
    assert config['orbit_tol'] == 1e-10
    assert config['newton_tol'] == utils.DEFAULTS['newton_tol']


def test_load_config_rejects_unknown_keys(tmp_path, monkeypatch):
    monkeypatch.setattr(utils, '__file__', tmp_path / 'fakefile.py')
    (tmp_path / 'config.json').write_text(json.dumps({'app_width': 800}))

    with pytest.raises(ConfigurationError, match='app_width'):
        utils.load_config()


def test_load_config_rejects_malformed_file(tmp_path, monkeypatch):
    monkeypatch.setattr(utils, '__file__', tmp_path / 'fakefile.py')
    (tmp_path / 'config.json').write_text('{"orbit_tol": ')

    with pytest.raises(ConfigurationError):
        utils.load_config()


@pytest.mark.parametrize(
    'name,value',
    [
        ('newton_tol', 1e-15),
        ('ode_tol', 0.0),
        ('orbit_tol', float('nan')),
    ]
)
def test_check_tolerance_floor(name: str, value: float):
    with pytest.raises(ConfigurationError):
        utils.check_tolerance(name, value)


def test_check_tolerance_accepts_floor():
    assert utils.check_tolerance('newton_tol', utils.TOLERANCE_FLOOR) == utils.TOLERANCE_FLOOR


def test_thread_count_prefers_environment(monkeypatch):
    monkeypatch.setenv('GARLAND_KIT_THREADS', '4')
    assert utils.thread_count({'threads': 2}) == 4


def test_thread_count_from_config(monkeypatch):
    monkeypatch.delenv('GARLAND_KIT_THREADS', raising=False)
    assert utils.thread_count({'threads': 3}) == 3
    assert utils.thread_count({'threads': 0}) == 1


def test_thread_count_rejects_garbage(monkeypatch):
    monkeypatch.setenv('GARLAND_KIT_THREADS', 'many')
    with pytest.raises(ConfigurationError):
        utils.thread_count()


def test_make_rng_is_reproducible():
    assert utils.make_rng(5).uniform() == utils.make_rng(5).uniform()


@pytest.mark.parametrize(
    'rgba,expected',
    [
        ([255, 0, 0, 255], '#ff0000'),
        ([0, 255, 0, 200], '#00ff00'),
        ([0, 0, 255, 123], '#0000ff'),
    ]
)
def test_rgba_hex(rgba: list, expected: str):
    assert utils.rgba_hex(rgba) == expected


def test_sha256_file(tmp_path):
    path = tmp_path / 'data.txt'
    path.write_bytes(b'abc')
    assert utils.sha256_file(path) == (
        'ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad')


def test_normalize_path_uses_forward_slashes(tmp_path):
    assert '\\' not in utils.normalize_path(tmp_path / 'a' / 'b.json')


def test_set_level():
    root = logging.getLogger()
    before = root.level
    try:
        logging_setup.set_level('debug')
        assert root.level == logging.DEBUG
    finally:
        root.setLevel(before)


def test_set_level_rejects_unknown_name():
    with pytest.raises(ConfigurationError):
        logging_setup.set_level('chatty')


# --- Package metadata ---

def test_package_keeps_its_module_name():
    assert gkit.__name__ == 'gkit'
    assert gkit.__title__ == 'Garland Kit'


def test_submodule_imports_through_package(monkeypatch):
    # Force a cold `from gkit import palette`
    monkeypatch.delitem(sys.modules, 'gkit.palette', raising=False)
    monkeypatch.delattr(gkit, 'palette', raising=False)

    assert not hasattr(gkit, 'palette')
    from gkit import palette
    assert palette.__name__ == 'gkit.palette'
    assert importlib.import_module('gkit.utils') is utils
