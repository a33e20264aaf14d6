"""File formats: coefficient JSON, grid CSV, pair manifests and deterministic JSON."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .spectral import Basis, ConjugateSymmetryError, GridField, ProblemParams, SpectralError, SpectralField


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialise non-finite value {x}")
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits; stable for identical input."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def coefficients_to_dict(f: SpectralField) -> dict:
    """Nonzero modes only; conjugate partners are written explicitly."""
    p = f.params
    modes = []
    for i, n in zip(*np.nonzero(f.coeffs)):
        c = f.coeffs[i, n]
        modes.append({"k": int(i) - p.K, "n": int(n), "re": float(c.real), "im": float(c.imag)})
    return {"omega": p.omega, "mu": p.mu, "K": p.K, "N": p.N, "basis": f.basis.value, "coeffs": modes}


def coefficients_from_dict(d: dict, params: ProblemParams | None = None) -> SpectralField:
    """Parse a coefficient object. Missing conjugate partners are completed; conflicts raise.

    If ``params`` is given it is used for the field; the file's ``omega``,
    ``K`` and ``N`` must agree with it (``mu`` plays no role in a forcing).
    """
    try:
        omega, mu, K, N = float(d["omega"]), float(d["mu"]), int(d["K"]), int(d["N"])
        basis = Basis(d["basis"])
        entries = d["coeffs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SpectralError(f"malformed coefficient file: {exc}") from exc
    if params is None:
        params = ProblemParams(omega=omega, mu=mu, K=K, N=N)
    elif (omega, K, N) != (params.omega, params.K, params.N):
        raise SpectralError("coefficient file does not match the problem parameters")
    modes = {}
    for e in entries:
        key = (int(e["k"]), int(e["n"]))
        val = complex(float(e["re"]), float(e["im"]))
        if key in modes and modes[key] != val:
            raise ConjugateSymmetryError(f"mode {key} listed twice with different values")
        modes[key] = val
    for (k, n), val in modes.items():
        if k == 0 and abs(val.imag) > 1e-14 * max(abs(val), 1.0):
            raise ConjugateSymmetryError(f"mode (0, {n}) must be real")
    # conjugate completion happens inside from_modes; it also detects conflicts
    return SpectralField.from_modes(params, basis, modes)


def write_coefficients(path, f: SpectralField) -> None:
    write_json(path, coefficients_to_dict(f))


def read_coefficients(path, params: ProblemParams | None = None) -> SpectralField:
    return coefficients_from_dict(json.loads(Path(path).read_text()), params)


def write_grid_csv(path, g: GridField) -> None:
    x, t = g.x, g.t
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "t", "value"])
        for i in range(g.nx):
            for j in range(g.nt):
                w.writerow([_fmt_float(float(x[i])), _fmt_float(float(t[j])), _fmt_float(float(g.values[i, j]))])


def read_grid_csv(path, params: ProblemParams) -> GridField:
    """Read a CSV written row-major in ``x`` then ``t`` on the standard uniform grid."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3:
        raise SpectralError("grid CSV must have columns x,t,value")
    xs = np.unique(data[:, 0])
    ts = np.unique(data[:, 1])
    nx, nt = len(xs), len(ts)
    if nx * nt != len(data):
        raise SpectralError("grid CSV is not a full tensor grid")
    values = data[:, 2].reshape(nx, nt)
    g = GridField(params, values)
    if not (np.allclose(data[:, 0].reshape(nx, nt), g.x[:, None]) and np.allclose(data[:, 1].reshape(nx, nt), g.t[None, :])):
        raise SpectralError("grid CSV coordinates are not the uniform grid for this period")
    return g


def write_pair(directory, name: str, first: SpectralField, second: SpectralField, labels=("u", "z")) -> Path:
    """Write two coefficient files plus a manifest naming them."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {}
    for label, f in zip(labels, (first, second)):
        fname = f"{name}_{label}.json"
        write_coefficients(directory / fname, f)
        files[label] = fname
    manifest = directory / f"{name}_manifest.json"
    write_json(manifest, {"kind": "pair", "components": files})
    return manifest


def read_pair(manifest, params: ProblemParams | None = None) -> dict:
    manifest = Path(manifest)
    d = json.loads(manifest.read_text())
    return {label: read_coefficients(manifest.parent / fname, params) for label, fname in d["components"].items()}
