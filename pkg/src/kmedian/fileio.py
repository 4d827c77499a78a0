"""Reading and writing instances: matrix, coordinate, and pmed files."""

from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np

from .instance import Instance, KMedianError, validate

FORMATS = ("matrix", "coord", "pmed")


class ParseError(KMedianError):
    """Malformed instance file."""


class MetricWarning(UserWarning):
    """Advisory: the loaded instance violates a metric axiom."""


def _tokens(text: str, skip: int) -> list[str]:
    toks: list[str] = []
    for line in text.splitlines()[skip:]:
        toks.extend(line.split())
    return toks


def _check_metric(inst: Instance, strict: bool) -> None:
    report = validate(inst)
    if report.ok:
        return
    msg = "; ".join(report.lines())
    if strict:
        raise ParseError(f"instance is not metric: {msg}")
    warnings.warn(f"instance violates metric axioms: {msg}", MetricWarning)


def _read_matrix(text: str, name: str) -> Instance:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "KMEDIAN 1":
        raise ParseError("matrix file must start with 'KMEDIAN 1'")
    try:
        n_fac, n_cli, k = map(int, lines[1].split())
    except (IndexError, ValueError):
        raise ParseError("matrix header needs 'nF nC k' on line 2") from None
    n = n_fac + n_cli
    toks = _tokens(text, 2)
    if len(toks) != n * n:
        raise ParseError(f"expected {n * n} distances, found {len(toks)}")
    try:
        D = np.array([float(t) for t in toks]).reshape(n, n)
    except ValueError:
        raise ParseError("distances must be real numbers") from None
    return Instance.from_blocks(k, n_fac, n_cli, D, name=name)


def _write_matrix(inst: Instance) -> str:
    rows = np.concatenate([inst._fac_rows, inst._cli_rows])
    D = inst.dist[np.ix_(rows, rows)]
    out = ["KMEDIAN 1", f"{inst.n_facilities} {inst.n_clients} {inst.k}"]
    for row in D:
        out.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(out) + "\n"


def _read_coord(text: str, name: str) -> Instance:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "KMEDIAN-COORD 1":
        raise ParseError("coord file must start with 'KMEDIAN-COORD 1'")
    try:
        n_fac, n_cli, k, dim = map(int, lines[1].split())
    except (IndexError, ValueError):
        raise ParseError("coord header needs 'nF nC k dim' on line 2") from None
    if dim not in (1, 2, 3):
        raise ParseError(f"dim must be 1, 2 or 3, got {dim}")
    n = n_fac + n_cli
    toks = _tokens(text, 2)
    if len(toks) != n * dim:
        raise ParseError(f"expected {n} points of dimension {dim}")
    try:
        pts = np.array([float(t) for t in toks]).reshape(n, dim)
    except ValueError:
        raise ParseError("coordinates must be real numbers") from None
    diff = pts[:, None, :] - pts[None, :, :]
    D = np.sqrt((diff * diff).sum(axis=-1))
    inst = Instance.from_blocks(k, n_fac, n_cli, D, name=name)
    inst.meta["coords"] = pts
    return inst


def _write_coord(inst: Instance) -> str:
    pts = inst.meta.get("coords")
    if pts is None:
        raise KMedianError("instance carries no coordinates; use the matrix format")
    pts = np.asarray(pts)
    out = ["KMEDIAN-COORD 1",
           f"{inst.n_facilities} {inst.n_clients} {inst.k} {pts.shape[1]}"]
    for row in pts:
        out.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(out) + "\n"


def _read_pmed(text: str, name: str) -> Instance:
    """OR-Library p-median format: 'n m p' then m weighted edges.

    Vertices serve as both facilities and clients. The metric is the
    shortest-path closure, computed over exact 64-bit integer weights; a
    disconnected graph is rejected.
    """
    toks = text.split()
    if len(toks) < 3:
        raise ParseError("pmed file needs a 'n m p' header")
    try:
        n, m, p = int(toks[0]), int(toks[1]), int(toks[2])
    except ValueError:
        raise ParseError("pmed header values must be integers") from None
    if len(toks) != 3 + 3 * m:
        raise ParseError(f"expected {m} edges, found {(len(toks) - 3) // 3}")
    if not 1 <= p <= n:
        raise ParseError(f"p={p} out of range for n={n}")
    INF = np.int64(2) ** 60
    D = np.full((n, n), INF, dtype=np.int64)
    np.fill_diagonal(D, 0)
    for e in range(m):
        try:
            u, v, w = (int(toks[3 + 3 * e]), int(toks[4 + 3 * e]),
                       int(toks[5 + 3 * e]))
        except ValueError:
            raise ParseError("edge weights must be integers") from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise ParseError(f"edge endpoint out of range: {u} {v}")
        if w < 0:
            raise ParseError("edge weights must be nonnegative")
        if w < D[u - 1, v - 1]:
            D[u - 1, v - 1] = w
            D[v - 1, u - 1] = w
    for r in range(n):  # integer min-plus closure
        np.minimum(D, D[:, r:r + 1] + D[r:r + 1, :], out=D)
    unreachable = np.flatnonzero(D[0] >= INF)
    if unreachable.size:
        comp = {int(i) + 1 for i in unreachable}
        raise ParseError(
            f"graph is disconnected: component {sorted(comp)} "
            "is unreachable from vertex 1")
    ids = [f"v{i}" for i in range(1, n + 1)]
    return Instance.from_shared_points(p, ids, D.astype(np.float64), name=name)


def read_instance(path: str | Path, fmt: str, strict: bool = False) -> Instance:
    """Load an instance; metric violations warn, or fail under ``strict``."""
    if fmt not in FORMATS:
        raise KMedianError(f"unknown format {fmt!r}; choose from {FORMATS}")
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    name = path.stem
    if fmt == "matrix":
        inst = _read_matrix(text, name)
    elif fmt == "coord":
        inst = _read_coord(text, name)
    else:
        inst = _read_pmed(text, name)
    _check_metric(inst, strict)
    return inst


def write_instance(path: str | Path, inst: Instance, fmt: str) -> None:
    """Write an instance; reading a matrix file back reproduces the matrix."""
    if fmt == "matrix":
        text = _write_matrix(inst)
    elif fmt == "coord":
        text = _write_coord(inst)
    elif fmt == "pmed":
        raise KMedianError("pmed is a read-only format")
    else:
        raise KMedianError(f"unknown format {fmt!r}; choose from {FORMATS}")
    Path(path).write_text(text)
