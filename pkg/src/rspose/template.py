"""Elimination template of the five-quadric solver.

The reduced distortion system reads ``(q A + lam B + C) [b1, b2, b3, 1] = 0``
with ``5 x 4`` matrices ``A, B, C``. Its solutions are the points where this
pencil drops rank, i.e. the common zeros of the five ``4 x 4`` minors, which
are bivariate quartics in ``(q, lam)``. Generically the quartic parts of the
minors span all quartic monomials, so every quartic monomial reduces onto the
ten monomials of degree <= 3, which form the quotient basis.

The minors are recovered by interpolating the homogeneous quartic
``det(q A + lam B + h C)`` at fixed nodes on the unit sphere. The nodes and
the inverse interpolation matrix are computed once by :func:`generate` and
shipped as JSON; :func:`load` reads them back.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import numpy as np

VERSION = 1
TEMPLATE_FILE = "r7pfr_template.json"

# exponents of (q, lam)
BASIS = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)]
QUARTICS = [(4, 0), (3, 1), (2, 2), (1, 3), (0, 4)]


def homogeneous_quartics():
    """Exponents ``(a, b, c)`` of ``q^a lam^b h^c`` with ``a + b + c = 4``."""
    return [(a, b, 4 - a - b) for a in range(4, -1, -1) for b in range(4 - a, -1, -1)]


def _vandermonde(nodes, exps):
    e = np.array(exps)
    return np.prod(nodes[:, None, :] ** e[None, :, :], axis=2)


def generate(seed=20200823, n_trials=4000):
    """Search well-conditioned interpolation nodes and build the template."""
    exps = homogeneous_quartics()
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_trials):
        nodes = rng.standard_normal((len(exps), 3))
        nodes /= np.linalg.norm(nodes, axis=1, keepdims=True)
        cond = np.linalg.cond(_vandermonde(nodes, exps))
        if best is None or cond < best[0]:
            best = (cond, nodes)
    cond, nodes = best
    inv = np.linalg.inv(_vandermonde(nodes, exps))
    return {
        "version": VERSION,
        "kind": "pencil-minors-action-matrix",
        "unknowns": ["b1", "b2", "b3", "q", "lam"],
        "reduced_monomials": [
            "b1*q", "b1*lam", "b1", "b2*q", "b2*lam", "b2",
            "b3*q", "b3*lam", "b3", "q", "lam", "1",
        ],
        "action_variable": "lam",
        "basis": [list(m) for m in BASIS],
        "quartics": [list(m) for m in QUARTICS],
        "homogeneous_monomials": [list(m) for m in exps],
        "minor_rows": [[i for i in range(5) if i != k] for k in range(5)],
        "template_shape": [5, 15],
        "action_matrix_size": 10,
        "interpolation_condition": float(cond),
        "nodes": nodes.tolist(),
        "interpolation_inverse": inv.tolist(),
    }


def write(path, template=None):
    template = generate() if template is None else template
    with open(path, "w") as fh:
        json.dump(template, fh, indent=1)


@lru_cache(maxsize=1)
def load():
    """The shipped template with arrays converted to numpy."""
    text = resources.files("rspose.data").joinpath(TEMPLATE_FILE).read_text()
    t = json.loads(text)
    if t["version"] != VERSION:
        raise ValueError(f"template version {t['version']} != {VERSION}")
    t["nodes"] = np.array(t["nodes"])
    t["interpolation_inverse"] = np.array(t["interpolation_inverse"])
    t["minor_rows"] = np.array(t["minor_rows"])
    return t


def monomial_index(exps):
    return {tuple(m): i for i, m in enumerate(exps)}


def action_structure():
    """For each basis monomial, where ``lam * monomial`` lives.

    Returns a list of ``("basis", j)`` or ``("quartic", j)`` entries.
    """
    b = monomial_index(BASIS)
    qd = monomial_index(QUARTICS)
    out = []
    for (i, k) in BASIS:
        m = (i, k + 1)
        out.append(("basis", b[m]) if m in b else ("quartic", qd[m]))
    return out


if __name__ == "__main__":  # pragma: no cover
    import sys

    write(sys.argv[1] if len(sys.argv) > 1 else TEMPLATE_FILE)
