""" Colour tables for the SVG renderer, RGBA like the editor palettes. """

REGION_COLORS = {
    # --- Bifurcation regions ---
    'I': [230, 230, 230, 255],
    'II': [99, 155, 255, 255],
    'III': [255, 185, 90, 255],
    'IV': [120, 220, 80, 255],
}

KIND_COLORS = {
    # --- Flow equilibria ---
    'Saddle': [206, 28, 36, 255],
    'Center': [0, 121, 241, 255],
    'StableFocus': [0, 163, 104, 255],
    'UnstableFocus': [255, 140, 0, 255],
    'Degenerate': [128, 128, 128, 255],

    # --- Map periodic orbits ---
    'SaddleMap': [206, 28, 36, 255],
    'Elliptic': [0, 121, 241, 255],
    'SinkMap': [0, 163, 104, 255],
    'SourceMap': [255, 140, 0, 255],
    'NonConsSaddle': [118, 66, 138, 255],
}

CURVE_COLORS = {
    'L_pf': [33, 33, 33, 255],
    'L_pq': [64, 64, 64, 255],
    'L_pf_reversible': [233, 0, 120, 255],
}

TRAJECTORY_COLOR = [80, 80, 200, 255]
