"""Probabilistic magnetic Laplacian on a gasket graph: dense oracle side.

The operator has 1 on the diagonal and -omega_xy/deg(x) off it; it is
self-adjoint in the degree measure, so eigenvalues come from the Hermitian
symmetrization T = W^{1/2} L W^{-1/2}.  This module is the brute-force path
everything else is checked against: dense spectra with multiplicity
clustering, the Schur complement onto the previous level (inverted cell by
cell through the 3x3 adjugate, never globally), log-determinants, and the
exact integer spanning-tree count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .decimation import cell_cubic_d, zeros_of_D
from .gasket import GasketGraph, build_gasket
from .gauge import Connection

SPECTRUM_DIM_CAP = 4000
ZERO_EIG_TOL = 1e-9


@dataclass(frozen=True)
class MagneticOperator:
    dimension: int
    entries: np.ndarray = field(repr=False)
    weights: list[int]
    graph: GasketGraph = field(repr=False)
    conn: Connection = field(repr=False)

    def symmetrized(self) -> np.ndarray:
        w = np.sqrt(np.asarray(self.weights, dtype=float))
        return self.entries * np.outer(w, 1.0 / w)


@dataclass(frozen=True)
class Spectrum:
    pairs: list[tuple[float, int]]

    def to_json(self) -> str:
        return json.dumps(
            [{"eigenvalue": ev, "multiplicity": m} for ev, m in self.pairs], indent=1
        )

    def to_csv(self) -> str:
        lines = ["eigenvalue,multiplicity"]
        lines += [f"{ev!r},{m}" for ev, m in self.pairs]
        return "\n".join(lines) + "\n"

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.pairs)


def assemble(graph: GasketGraph, conn: Connection) -> MagneticOperator:
    if conn.graph is not graph:
        raise ValueError("connection was built on a different graph")
    n = len(graph.vertices)
    deg = graph.degrees
    L = np.eye(n, dtype=complex)
    for x, y in graph.edges:
        L[x, y] = -conn.omega(x, y) / deg[x]
        L[y, x] = -conn.omega(y, x) / deg[y]
    L.setflags(write=False)
    return MagneticOperator(n, L, deg, graph, conn)


def eigenvalues(op: MagneticOperator) -> np.ndarray:
    """Raw sorted eigenvalues of the Hermitian symmetrization."""
    try:
        return np.linalg.eigvalsh(op.symmetrized())
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed to converge: {exc}") from exc


def spectrum(
    op: MagneticOperator,
    cluster_tol: float = 1e-6,
    max_dim: int = SPECTRUM_DIM_CAP,
) -> Spectrum:
    if op.dimension > max_dim:
        raise ValueError(f"dimension {op.dimension} exceeds the configured cap {max_dim}")
    evs = eigenvalues(op)
    pairs: list[tuple[float, int]] = []
    start = 0
    for i in range(1, len(evs) + 1):
        if i == len(evs) or evs[i] - evs[i - 1] >= cluster_tol:
            pairs.append((float(np.mean(evs[start:i])), i - start))
            start = i
    return Spectrum(pairs)


def _cell_groups(graph: GasketGraph) -> list[tuple[tuple[int, int, int], tuple[int, int, int]]]:
    """Per upright cell of the previous level: (corner ids, midpoint ids) in G_N."""
    reduced = build_gasket(graph.level - 1)
    rcoord = dict(reduced.vertices)
    groups = []
    for cell in reduced.upright_cells():
        p, q, r = cell.vertices
        cp, cq, cr = rcoord[p], rcoord[q], rcoord[r]
        fid = lambda c: graph.coord_to_id[(2 * c[0], 2 * c[1])]
        mid = lambda u, v: graph.coord_to_id[(u[0] + v[0], u[1] + v[1])]
        groups.append(
            ((fid(cp), fid(cq), fid(cr)), (mid(cp, cq), mid(cq, cr), mid(cr, cp)))
        )
    return groups


def schur_complement(op: MagneticOperator, lam: float, tol: float = 1e-9) -> np.ndarray:
    """Eliminate the midpoint block at spectral parameter lam.

    Returns the matrix (A - lam I) - B (D - lam I)^{-1} C indexed by
    prev_level_ids in ascending order.  The midpoint block is block-diagonal
    over the side-2 upright triangles; each 3x3 block is inverted by its
    adjugate, whose determinant is the cell cubic D(beta, lam).
    """
    graph = op.graph
    if graph.level == 0:
        raise ValueError("level 0 has no previous level to reduce to")
    hole = next(c for c in graph.downright_cells() if c.side == 1)
    beta = op.conn.holonomy(list(hole.vertices))
    dval = cell_cubic_d(beta, lam)
    if abs(dval) <= tol:
        root = min((r for r, _ in zeros_of_D(beta)), key=lambda r: abs(r - lam))
        raise ValueError(
            f"lambda = {lam} is within {tol} of the midpoint-block root {root} "
            f"(D(beta={beta}, lambda) = {dval})"
        )

    ids = sorted(graph.prev_level_ids)
    pos = {v: k for k, v in enumerate(ids)}
    deg = graph.degrees
    omega = op.conn.omega
    c = 1 - lam

    S = np.zeros((len(ids), len(ids)), dtype=complex)
    np.fill_diagonal(S, c)
    for corners, mids in _cell_groups(graph):
        # adjugate of the 3x3 midpoint block (1-lam) I - (1/4) Omega
        adj = np.empty((3, 3), dtype=complex)
        for i in range(3):
            adj[i, i] = c * c - 1 / 16
            for j in range(3):
                if i == j:
                    continue
                k = 3 - i - j
                adj[i, j] = (c / 4) * omega(mids[i], mids[j]) + (1 / 16) * omega(
                    mids[i], mids[k]
                ) * omega(mids[k], mids[j])
        det = (
            c**3
            - (3 / 16) * c
            - (
                omega(mids[0], mids[1]) * omega(mids[1], mids[2]) * omega(mids[2], mids[0])
                + omega(mids[0], mids[2]) * omega(mids[2], mids[1]) * omega(mids[1], mids[0])
            )
            / 64
        )
        B = np.zeros((3, 3), dtype=complex)  # corners x mids
        C = np.zeros((3, 3), dtype=complex)  # mids x corners
        for a in range(3):
            for m in range(3):
                pair = (corners[a], mids[m])
                if pair in op.conn.phase:
                    B[a, m] = -omega(corners[a], mids[m]) / deg[corners[a]]
                    C[m, a] = -omega(mids[m], corners[a]) / 4
        block = B @ (adj / det) @ C
        rows = [pos[v] for v in corners]
        for a in range(3):
            for b in range(3):
                S[rows[a], rows[b]] -= block[a, b]
    return S


def log_determinant(op: MagneticOperator, drop_zero: bool = False) -> tuple[float, int]:
    evs = eigenvalues(op)
    if evs[0] < -ZERO_EIG_TOL:
        raise ValueError(f"negative eigenvalue {evs[0]}: operator should be PSD")
    zero_count = int(np.sum(np.abs(evs) < ZERO_EIG_TOL))
    if drop_zero:
        kept = evs[np.abs(evs) >= ZERO_EIG_TOL]
    else:
        kept = evs
        if zero_count:
            raise ValueError(
                f"{zero_count} eigenvalue(s) within {ZERO_EIG_TOL} of zero; "
                "pass drop_zero to take the pseudo-determinant"
            )
    return float(np.sum(np.log(kept))), zero_count


def kirchhoff_tree_count(graph: GasketGraph) -> int:
    """Exact number of spanning trees via an integer Laplacian cofactor."""
    if graph.level > 3:
        raise ValueError("exact tree count supported for level <= 3")
    n = len(graph.vertices)
    deg = graph.degrees
    lap = [[0] * n for _ in range(n)]
    for i in range(n):
        lap[i][i] = deg[i]
    for a, b in graph.edges:
        lap[a][b] -= 1
        lap[b][a] -= 1
    minor = [row[1:] for row in lap[1:]]
    return _bareiss_det(minor)


def _bareiss_det(m: list[list[int]]) -> int:
    """Fraction-free Gaussian elimination; exact over Python integers."""
    n = len(m)
    if n == 0:
        return 1
    m = [row[:] for row in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[-1][-1]


def matrix_csv(op: MagneticOperator) -> str:
    lines = ["row,col,re,im"]
    for (r, c) in zip(*np.nonzero(op.entries)):
        v = op.entries[r, c]
        lines.append(f"{r},{c},{float(v.real)!r},{float(v.imag)!r}")
    return "\n".join(lines) + "\n"
