""" SVG renderings of the CSV/JSON artifacts. Convenience only; nothing reads them back. """
import logging
from pathlib import Path

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Patch  # noqa: E402

from gkit.palette import (CURVE_COLORS, KIND_COLORS, REGION_COLORS,  # noqa: E402
                          TRAJECTORY_COLOR)
from gkit.utils import normalize_path, rgba_hex  # noqa: E402
from garland.atlas.atlas_core import AtlasDocument  # noqa: E402
from garland.equilibria.equilibria_core import Garland  # noqa: E402
from garland.flows.flow_core import Trajectory  # noqa: E402
from garland.maps.orbit_core import MapGarland  # noqa: E402

# Fixed hash salt and no date keep SVG output byte-stable between runs
plt.rcParams['svg.hashsalt'] = 'garland-kit'
plt.rcParams['svg.fonttype'] = 'none'

REGION_ORDER = ['I', 'II', 'III', 'IV']


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    logging.info(f'Rendered {normalize_path(path)}')
    return path


def _color(table: dict, key: str) -> str:
    return rgba_hex(table.get(key, [0, 0, 0, 255]))


def _square_axes(title: str):
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.set_aspect('equal')
    ax.set_xlabel('x')
    ax.set_ylabel('y')
    ax.set_title(title)
    return fig, ax


def _draw_points(ax, zs, kinds) -> None:
    for kind in sorted(set(kinds)):
        pts = np.array([z for z, k in zip(zs, kinds) if k == kind], dtype=complex)
        ax.scatter(pts.real, pts.imag, s=28, color=_color(KIND_COLORS, kind),
                   label=kind, zorder=3)


# --- Flow pictures ---

def render_garland(garland: Garland, path: Path,
                   trajectories: list[Trajectory] | None = None) -> Path:
    fig, ax = _square_axes(f'Garland {garland.label.value}')
    for traj in trajectories or []:
        ax.plot(traj.x, traj.y, lw=0.6, color=rgba_hex(TRAJECTORY_COLOR), zorder=1)
    ax.scatter([0.0], [0.0], s=12, color='black', zorder=3)
    _draw_points(ax, [e.z for e in garland.equilibria],
                 [e.kind.value for e in garland.equilibria])
    if garland.equilibria:
        ax.legend(loc='upper right', fontsize='small')
    return _save(fig, path)


def render_portrait(trajectories: list[Trajectory], path: Path,
                    garland: Garland | None = None) -> Path:
    if garland is not None:
        return render_garland(garland, path, trajectories)
    fig, ax = _square_axes('Phase portrait')
    for traj in trajectories:
        ax.plot(traj.x, traj.y, lw=0.6, color=rgba_hex(TRAJECTORY_COLOR))
    return _save(fig, path)


# --- Atlas ---

def render_atlas(atlas: AtlasDocument, path: Path) -> Path:
    mu1_min, mu1_max, mu2_min, mu2_max = atlas.window
    n = atlas.resolution
    # regions are stored mu1-major, so reshape gives [mu1, mu2]
    codes = np.array([REGION_ORDER.index(r.id.value) for r in atlas.regions])
    grid = codes.reshape(n, n).T

    colors = [rgba_hex(REGION_COLORS[k]) for k in REGION_ORDER]
    cmap = matplotlib.colors.ListedColormap(colors)
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.imshow(grid, origin='lower', cmap=cmap, vmin=-0.5, vmax=3.5,
              extent=(mu1_min, mu1_max, mu2_min, mu2_max), aspect='auto',
              interpolation='nearest')

    for curve in atlas.curves:
        if not curve.samples:
            continue
        xs, ys = zip(*curve.samples)
        name = curve.name.value
        if name in CURVE_COLORS:
            ax.plot(xs, ys, lw=1.2, color=_color(CURVE_COLORS, name),
                    ls='-' if curve.analytic else '--')
        else:
            ax.scatter(xs, ys, s=4, color='black', marker='x')

    ax.set_xlim(mu1_min, mu1_max)
    ax.set_ylim(mu2_min, mu2_max)
    ax.set_xlabel('mu1')
    ax.set_ylabel('mu2')
    ax.set_title(f'Atlas q={atlas.params.q}')
    ax.legend(handles=[Patch(color=c, label=k) for k, c in zip(REGION_ORDER, colors)],
              loc='upper right', fontsize='small')
    return _save(fig, path)


# --- Maps ---

def render_orbits(garland: MapGarland, path: Path) -> Path:
    fig, ax = _square_axes(f'Period orbits {garland.label.value}')
    ax.scatter([0.0], [0.0], s=12, color='black', zorder=3)
    zs = [z for o in garland.orbits for z in o.points]
    kinds = [o.kind.value for o in garland.orbits for _ in o.points]
    _draw_points(ax, zs, kinds)
    if zs:
        ax.legend(loc='upper right', fontsize='small')
    return _save(fig, path)
