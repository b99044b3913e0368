"""Dirichlet-to-Neumann matrices on finite metric graphs, their compressions
to boundary partitions, and the truncation-limit procedure for families.

The map sends boundary values F to the mu-normalized boundary flux of the
harmonic extension: (Lam F)(v) = mu(v)^{-1} * sum over incident edges of the
oriented derivative at v.  Columns are assembled from indicator solves
against one shared factorization; the dense Schur complement
L_BB - L_BI L_II^{-1} L_IB is kept only as a test oracle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .families import TreeFamilySpec, build_kary_tree, ROOT
from .graph import MetricGraph
from .harmonic import HarmonicSolver, assemble_laplacian, dirichlet_energy, vertex_flux
from .measures import _level_prefixes, exit_measure_limit
from .partition import Partition


@dataclass
class DtNMatrix:
    basis: tuple          # ordered boundary vertices or cell labels
    matrix: np.ndarray
    weights: np.ndarray   # positive mu weights, same order as basis

    @property
    def mu_total(self) -> float:
        return float(self.weights.sum())

    def symmetry_error(self) -> float:
        M = self.weights[:, None] * self.matrix
        return float(np.max(np.abs(M - M.T))) if len(self.basis) else 0.0

    def kernel_error(self) -> float:
        return float(np.max(np.abs(self.matrix @ np.ones(len(self.basis)))))

    def min_eigenvalue(self) -> float:
        # symmetrize as D^(1/2) Lam D^(-1/2) to keep the spectrum real
        s = np.sqrt(self.weights)
        M = (s[:, None] * self.matrix) / s[None, :]
        return float(np.min(np.linalg.eigvalsh((M + M.T) / 2.0)))

    def check_invariants(self, sym_tol=1e-10, kernel_tol=1e-10, eig_tol=1e-10) -> dict:
        report = {
            "symmetry_error": self.symmetry_error(),
            "kernel_error": self.kernel_error(),
            "min_eigenvalue": self.min_eigenvalue(),
        }
        report["ok"] = (report["symmetry_error"] < sym_tol
                        and report["kernel_error"] < kernel_tol
                        and report["min_eigenvalue"] >= -eig_tol)
        return report


def _check_weights(keys, mu):
    w = np.array([float(mu[k]) for k in keys])
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("all mu weights must be positive and finite")
    return w


def dtn_matrix(g: MetricGraph, mu: dict | None = None) -> DtNMatrix:
    """Full DtN matrix on the boundary vertices (one solve per column)."""
    bverts = sorted(g.boundary)
    if len(bverts) < 2:
        raise ValueError("need at least 2 boundary vertices")
    if mu is None:
        mu = {v: 1.0 for v in bverts}
    if set(mu) != set(bverts):
        raise ValueError("mu must cover exactly the boundary vertices")
    w = _check_weights(bverts, mu)
    solver = HarmonicSolver(g)
    n = len(bverts)
    Lam = np.zeros((n, n))
    for j, vj in enumerate(bverts):
        f = solver.solve({v: (1.0 if v == vj else 0.0) for v in bverts})
        Lam[:, j] = [vertex_flux(f, v) for v in bverts]
    Lam /= w[:, None]
    return DtNMatrix(tuple(bverts), Lam, w)


def schur_complement_dtn(g: MetricGraph, mu: dict | None = None) -> DtNMatrix:
    """Dense Schur-complement oracle: D_mu^{-1} (L_BB - L_BI L_II^{-1} L_IB)."""
    bverts = sorted(g.boundary)
    if mu is None:
        mu = {v: 1.0 for v in bverts}
    w = _check_weights(bverts, mu)
    lap = assemble_laplacian(g)
    L = lap.matrix.toarray()
    bb, ii = lap.boundary_idx, lap.interior_idx
    L_BB = L[np.ix_(bb, bb)]
    if len(ii):
        L_BI = L[np.ix_(bb, ii)]
        L_II = L[np.ix_(ii, ii)]
        S = L_BB - L_BI @ np.linalg.solve(L_II, L_BI.T)
    else:
        S = L_BB
    return DtNMatrix(tuple(bverts), S / w[:, None], w)


def inner_product_mu(F, G, weights) -> float:
    """Normalized weighted boundary inner product: (1/mu(bdry)) sum F G mu."""
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    w = np.asarray(weights, dtype=float)
    return float(np.sum(F * G * w) / np.sum(w))


def compressed_dtn(g: MetricGraph, cells: Partition, cell_weights,
                   assignment: dict | None = None) -> DtNMatrix:
    """DtN compressed to functions constant on the cells of a boundary
    partition: apply the map to each cell indicator and sum fluxes per cell,
    scaled by 1/mu(cell)."""
    if assignment is None:
        assignment = cells.cell_of()
    missing = [v for v in g.boundary if v not in assignment]
    if missing:
        raise ValueError(f"boundary vertices without a cell: {missing[:5]}")
    nc = len(cells)
    counts = np.zeros(nc, dtype=int)
    for v in g.boundary:
        counts[assignment[v]] += 1
    if np.any(counts == 0):
        raise ValueError("every cell must contain at least one boundary vertex")
    w = np.asarray(cell_weights, dtype=float)
    if w.shape != (nc,) or np.any(w <= 0):
        raise ValueError("cell weights must be positive, one per cell")
    solver = HarmonicSolver(g)
    Lam = np.zeros((nc, nc))
    for m in range(nc):
        bc = {v: (1.0 if assignment[v] == m else 0.0) for v in g.boundary}
        f = solver.solve(bc)
        for v in g.boundary:
            Lam[assignment[v], m] += vertex_flux(f, v)
    Lam /= w[:, None]
    return DtNMatrix(cells.labels, Lam, w)


def compression_oracle(full: DtNMatrix, cells: Partition, assignment: dict,
                       cell_weights) -> np.ndarray:
    """Explicit P Lam P with the mu-orthogonal projection onto cell-constant
    functions, expressed in the cell indicator basis.  Test oracle for
    compressed_dtn."""
    nb = len(full.basis)
    nc = len(cells)
    A = np.zeros((nb, nc))  # indicator columns
    for i, v in enumerate(full.basis):
        A[i, assignment[v]] = 1.0
    w = full.weights
    cw = np.asarray(cell_weights, dtype=float)
    # projection of Lam 1_E onto cell space, in cell coordinates:
    # row n = (1/mu(E_n)) sum_{v in E_n} mu(v) (Lam 1_Em)(v)
    return (A.T @ (w[:, None] * (full.matrix @ A))) / cw[:, None]


@dataclass
class DtNLimitResult:
    dtn: DtNMatrix
    trace: list        # (depth, max-norm change) pairs
    converged: bool


def compressed_dtn_limit(spec: TreeFamilySpec, level: int, depths, tol: float,
                         cell_weights=None, w_source=ROOT) -> DtNLimitResult:
    """Compressed DtN maps on successive truncations, leaves assigned to
    level-`level` prefix cells, stopping when the max-norm change of the
    matrix drops below tol.

    cell_weights defaults to the exit measure from the family root, computed
    over the same depth schedule (positive on every cell).
    """
    depths = list(depths)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if any(b <= a for a, b in zip(depths, depths[1:])) or not depths:
        raise ValueError("depth schedule must be nonempty and strictly increasing")
    if cell_weights is None:
        cell_weights = exit_measure_limit(spec, level, depths, tol, w=w_source).masses
    prefixes = None
    prev = None
    trace = []
    result = None
    for d in depths:
        g, _ = build_kary_tree(spec.at_depth(d))
        if prefixes is None:
            prefixes = _level_prefixes(spec, level)
        cells = Partition(tuple((p,) for p in prefixes))
        cell_index = {p: i for i, p in enumerate(prefixes)}
        assignment = {leaf: cell_index[leaf[:level]] for leaf in g.boundary}
        result = compressed_dtn(g, cells, cell_weights, assignment)
        if prev is not None:
            change = float(np.max(np.abs(result.matrix - prev)))
            trace.append((d, change))
            if change < tol:
                return DtNLimitResult(result, trace, True)
        prev = result.matrix
    return DtNLimitResult(result, trace, False)


def quadratic_form_check(g: MetricGraph, mu: dict, F: dict):
    """Two independent evaluations of the energy form: mu(bdry) <Lam F, F>_mu
    via boundary fluxes, and the Dirichlet energy of the harmonic extension."""
    bverts = sorted(g.boundary)
    solver = HarmonicSolver(g)
    f = solver.solve({v: float(F[v]) for v in bverts})
    flux_form = sum(vertex_flux(f, v) * f.values[v] for v in bverts)
    return flux_form, dirichlet_energy(f)
