from __future__ import annotations

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any

import numpy as np

import gkit
from gkit.errors import SchemaError
from gkit.utils import normalize_path, sha256_file
from garland.flows.flow_core import FlowParams
from garland.normal_form.resonance_core import ResonanceSpec
from garland.series.series_core import TruncatedSeries

SCHEMA = gkit.__schema__

# Allowed top-level fields per input document
DOCUMENT_FIELDS = {
    'map': {'schema', 'p', 'q', 'symmetric', 'map', 'params'},
    'params': {'schema', 'params', 'initial_conditions', 't_end'},
}


def _clean(value: Any) -> Any:
    """ JSON-safe copy: numpy scalars unwrapped, non-finite floats to None. """
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class ArtifactIOManager:
    """Reads input documents and writes run artifacts plus their manifest."""

    def __init__(self, output_dir: str | Path) -> None:
        self.output_dir = Path(output_dir)
        self.artifacts: list[Path] = []

    # --- Input documents -----------------------------------------------------

    @staticmethod
    def read_document(path: str | Path, kind: str) -> dict:
        try:
            with open(path, encoding='utf-8', mode='r') as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            raise SchemaError(f'Input file {normalize_path(path)} not found')
        except json.JSONDecodeError as e:
            raise SchemaError(f'Input is not valid JSON: {e}')

        if not isinstance(doc, dict):
            raise SchemaError('Input document must be a JSON object')
        if doc.get('schema') != SCHEMA:
            raise SchemaError(f'Expected "schema": "{SCHEMA}"', '/schema')
        unknown = set(doc) - DOCUMENT_FIELDS[kind]
        if unknown:
            key = sorted(unknown)[0]
            raise SchemaError(f'Unknown field {key!r}', f'/{key}')
        return doc

    @staticmethod
    def parse_map(doc: dict) -> tuple[TruncatedSeries, ResonanceSpec]:
        if 'map' not in doc:
            raise SchemaError('Missing field', '/map')
        return (TruncatedSeries.from_json(doc['map'], '/map'),
                ResonanceSpec.from_json(doc))

    @staticmethod
    def parse_params(doc: dict) -> FlowParams:
        if 'params' not in doc:
            raise SchemaError('Missing field', '/params')
        return FlowParams.from_json(doc['params'], '/params')

    @staticmethod
    def parse_initial_conditions(doc: dict) -> list[complex]:
        out = []
        for i, pair in enumerate(doc.get('initial_conditions', [])):
            try:
                x, y = pair
                out.append(complex(float(x), float(y)))
            except (TypeError, ValueError):
                raise SchemaError('Expected [x, y]', f'/initial_conditions/{i}')
        return out

    # --- Artifacts -----------------------------------------------------------

    def _target(self, name: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / name
        self.artifacts.append(path)
        return path

    def write_json(self, name: str, payload: dict) -> Path:
        path = self._target(name)
        with open(path, encoding='utf-8', mode='w') as fh:
            json.dump(_clean(payload), fh, indent=2, allow_nan=False)
            fh.write('\n')
        logging.info(f'Wrote {normalize_path(path)}')
        return path

    def write_csv(self, name: str, columns: list[str], rows: list[dict]) -> Path:
        path = self._target(name)
        with open(path, encoding='utf-8', mode='w', newline='') as fh:
            writer = csv.DictWriter(fh, fieldnames=columns, lineterminator='\n')
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _clean(row.get(k)) for k in columns})
        logging.info(f'Wrote {normalize_path(path)} ({len(rows)} rows)')
        return path

    def register(self, path: Path) -> Path:
        """ Track a file written by another component (e.g. the renderer). """
        self.artifacts.append(path)
        return path

    def write_manifest(self, config: dict, wall_time: float) -> Path:
        checksums = {p.name: sha256_file(p) for p in self.artifacts if p.exists()}
        path = self.output_dir / 'manifest.json'
        self.output_dir.mkdir(parents=True, exist_ok=True)
        with open(path, encoding='utf-8', mode='w') as fh:
            json.dump(_clean({
                'tool': gkit.__title__,
                'version': gkit.__version__,
                'schema': SCHEMA,
                'config': config,
                'wall_time_s': wall_time,
                'artifacts': checksums,
            }), fh, indent=2)
            fh.write('\n')
        return path
