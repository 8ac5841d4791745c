"""Checkpoints (npz, exact), field CSV dumps and JSON reports."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .analysis import director_kappa, eigenvalues
from .fields import Field3
from .mesh import NodeClass, build_mesh
from .optimizer import Branch, ObstacleSpec

SCHEMA_VERSION = 1


def save_checkpoint(path, u: Field3, mu: float, obs: ObstacleSpec) -> None:
    np.savez(path, schema_version=SCHEMA_VERSION, n=u.mesh.n, mu=float(mu),
             branch=obs.branch.value, bound=float(obs.bound), values=u.values)


def load_checkpoint(path):
    """Returns (Field3, mu, ObstacleSpec); values round-trip bit for bit."""
    with np.load(path, allow_pickle=False) as d:
        mesh = build_mesh(int(d["n"]))
        br = Branch(str(d["branch"]))
        obs = ObstacleSpec.none() if br is Branch.NONE else ObstacleSpec(br, float(d["bound"]))
        return Field3(mesh, np.array(d["values"])), float(d["mu"]), obs


def _fmt(x: float) -> str:
    return repr(float(x))


def write_field_csv(path, u: Field3) -> None:
    """One row per in-domain node: rho, z, u, eigenvalues, kappa (nan where undefined)."""
    m = u.mesh
    R, Z = m.coords()
    inside = m.node_class != NodeClass.OUTSIDE
    V = u.values[inside]
    ev = eigenvalues(V)
    kap = director_kappa(V, check=False)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["# schema_version", SCHEMA_VERSION])
        w.writerow(["rho", "z", "u1", "u2", "u3", "lambda1", "lambda2", "lambda3", "kappa_rho", "kappa_z"])
        cols = np.column_stack([R[inside], Z[inside], V, ev.l1, ev.l2, ev.l3, kap])
        for row in cols:
            w.writerow([_fmt(x) for x in row])


def write_json(path, payload: dict) -> None:
    data = {"schema_version": SCHEMA_VERSION, **payload}
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True, default=_default) + "\n")


def _default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Branch):
        return o.value
    raise TypeError(f"not serializable: {type(o)}")
