"""Artifact files: field snapshots, diagnostics CSV, JSON summaries.

Field snapshot format (text, versioned):

    # shearmhd-field-snapshot v1
    # {"Nx": ..., "Ny": ..., "Ly": ..., "t": ..., "components": [...], ...}
    component,k,eta_index,re,im
    v1,0,1,1.0e-3,0.0
    ...

Rows carry only nonzero coefficients; k and eta_index are the signed integer
mode numbers (eta = eta_index / Ly).  Every artifact written by the runner
embeds the full experiment config and its sha256 so outputs are traceable to
their inputs.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .spectral import Grid
from .unknowns import MHDState

SNAPSHOT_MAGIC = "# shearmhd-field-snapshot v1"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def write_json(path: str, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(path: str, colnames, rows, header: dict | None = None):
    with open(path, "w") as fh:
        if header:
            for key, val in header.items():
                fh.write(f"# {key}: {canonical_json(val) if isinstance(val, (dict, list)) else val}\n")
        fh.write(",".join(colnames) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_state_snapshot(path: str, state: MHDState, extra: dict | None = None):
    g = state.grid
    header = {"Nx": g.Nx, "Ny": g.Ny, "Ly": g.Ly, "t": state.t,
              "components": ["v1", "v2", "b1", "b2"]}
    if extra:
        header.update(extra)
    kvals = np.fft.fftfreq(g.Nx, 1.0 / g.Nx).astype(int)
    nvals = np.fft.fftfreq(g.Ny, 1.0 / g.Ny).astype(int)
    with open(path, "w") as fh:
        fh.write(SNAPSHOT_MAGIC + "\n")
        fh.write("# " + canonical_json(header) + "\n")
        fh.write("component,k,eta_index,re,im\n")
        for name, table in zip(header["components"],
                               [state.v[0], state.v[1], state.b[0], state.b[1]]):
            idx = np.argwhere(table != 0)
            for i, j in idx:
                c = table[i, j]
                fh.write(f"{name},{kvals[i]},{nvals[j]},"
                         f"{format(c.real, '.17g')},{format(c.imag, '.17g')}\n")


def read_state_snapshot(path: str) -> MHDState:
    with open(path) as fh:
        magic = fh.readline().strip()
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"not a shearmhd snapshot: {path}")
        header = json.loads(fh.readline().lstrip("# ").strip())
        cols = fh.readline().strip().split(",")
        if cols != ["component", "k", "eta_index", "re", "im"]:
            raise ValueError("unexpected snapshot column layout")
        grid = Grid(header["Nx"], header["Ny"], header["Ly"])
        tables = {name: grid.zeros() for name in header["components"]}
        for line in fh:
            name, k, n, re, im = line.strip().split(",")
            i = int(k) % grid.Nx
            j = int(n) % grid.Ny
            tables[name][i, j] = float(re) + 1j * float(im)
    v = np.stack([tables["v1"], tables["v2"]])
    b = np.stack([tables["b1"], tables["b2"]])
    return MHDState(grid, v, b, float(header["t"]))


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def export_physical_csv(path: str, state: MHDState, extra: dict | None = None):
    """Physical-space samples of all components for plotting."""
    from .spectral import to_physical
    g = state.grid
    header = {"Nx": g.Nx, "Ny": g.Ny, "Ly": g.Ly, "t": state.t}
    if extra:
        header.update(extra)
    fields = {name: to_physical(g, tab).real
              for name, tab in zip(["v1", "v2", "b1", "b2"],
                                   [state.v[0], state.v[1], state.b[0], state.b[1]])}
    rows = []
    for i in range(g.Nx):
        for j in range(g.Ny):
            x = 2 * np.pi * i / g.Nx
            y = 2 * np.pi * g.Ly * j / g.Ny
            rows.append([x, y] + [fields[n][i, j] for n in ("v1", "v2", "b1", "b2")])
    write_csv(path, ["x", "y", "v1", "v2", "b1", "b2"], rows, header)
