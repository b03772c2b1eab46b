import hashlib
import json
import logging
import os
from pathlib import Path

import numpy as np

from gkit.errors import ConfigurationError

TOLERANCE_FLOOR = 1e-14

DEFAULTS = {
    'validity_radius': 0.5,
    'newton_tol': 1e-12,
    'newton_max_iter': 50,
    'dedup_radius': 1e-7,
    'angle_tol': 1e-9,
    'ode_tol': 1e-10,
    'degeneracy_tol': 1e-10,
    'dropout_tol': 1e-15,
    'kind_rel_tol': 1e-9,
    'conservative_tol': 1e-9,
    'orbit_tol': 1e-8,
    'boundary_fraction': 0.05,
    'threads': 1,
}

# Keys that are tolerances and therefore subject to the hard floor
TOLERANCE_KEYS = ('newton_tol', 'ode_tol', 'orbit_tol', 'angle_tol')


def load_config() -> dict:
    """ Load the config file, creates a new default one if it doesn't exist """

    config_file = os.path.join(os.path.dirname(__file__), 'config.json')

    try:
        with open(config_file, encoding='utf-8', mode='r') as json_data:
            config = json.load(json_data)

    except FileNotFoundError:
        config = dict(DEFAULTS)
        try:
            with open(config_file, encoding='utf-8', mode='w') as json_data:
                json.dump(config, json_data, indent=4)
            logging.info('Default config file created')
        except OSError as e:
            logging.warning(f'Could not write default config: {e}')

    except json.JSONDecodeError as e:
        raise ConfigurationError(f'Malformed config file {config_file}: {e}')

    unknown = sorted(set(config) - set(DEFAULTS))
    if unknown:
        raise ConfigurationError(f'Unknown config keys: {", ".join(unknown)}')

    return {**DEFAULTS, **config}


def check_tolerance(name: str, value: float) -> float:
    """ Reject tolerance overrides below the hard floor. """
    value = float(value)
    if not value >= TOLERANCE_FLOOR:
        raise ConfigurationError(
            f'{name}={value:g} is below the tolerance floor {TOLERANCE_FLOOR:g}')
    return value


def thread_count(config: dict | None = None) -> int:
    """ Worker count: GARLAND_KIT_THREADS wins over the config file. """
    env = os.getenv('GARLAND_KIT_THREADS')
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigurationError(
                f'GARLAND_KIT_THREADS must be an integer, got {env!r}')
    else:
        n = int((config or DEFAULTS).get('threads', 1))
    return max(1, n)


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def rgba_hex(rgba: list[int]) -> str:
    """ Matplotlib accepts #RRGGBB; alpha is passed separately """
    r, g, b, a = rgba
    return f'#{r:02x}{g:02x}{b:02x}'


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, mode='rb') as fh:
        for chunk in iter(lambda: fh.read(65536), b''):
            digest.update(chunk)
    return digest.hexdigest()


def normalize_path(path: str | Path) -> str:
    """ Return a consistent, forward-slash path string. """
    try:
        return Path(path).resolve().as_posix()
    except Exception:
        return str(path).replace('\\', '/')
