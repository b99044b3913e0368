"""Generalized Haar orthonormal basis on a nested cell partition under a
positive cell measure, with analysis/synthesis transforms and the
multiresolution operator whose eigenvalues are the reciprocal jump values.

Construction: per parent cell with children E(1..M), modified Gram-Schmidt
on [1_parent, 1_E(1), ..., 1_E(M-1)] in the L2(mu) inner product; the
parent indicator reproduces the coarser space, the remaining M-1 functions
are the new details.  Details of different parents have disjoint support,
so orthonormality is global.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import CellMeasure
from .partition import CellTree

_NORM_FLOOR = 1e-14


@dataclass
class HaarBasis:
    tree: CellTree
    weights: np.ndarray    # mu masses of the finest-level cells
    functions: np.ndarray  # rows = basis functions as values on finest cells
    levels: np.ndarray     # birth level per function (0 = the constant)

    def __len__(self):
        return self.functions.shape[0]

    def dot(self, F, G) -> float:
        return float(np.sum(np.asarray(F) * np.asarray(G) * self.weights))

    def gram_matrix(self) -> np.ndarray:
        W = self.functions * self.weights[None, :]
        return self.functions @ W.T


def _cell_indicators(tree: CellTree, level: int) -> np.ndarray:
    """Indicator vectors of level cells over the finest-level cells."""
    finest = tree.levels[tree.finest]
    cell_of_point = tree.levels[level].cell_of()
    out = np.zeros((tree.ncells(level), tree.ncells(tree.finest)))
    for fi, fcell in enumerate(finest.cells):
        out[cell_of_point[fcell[0]], fi] = 1.0
    return out


def build_haar_basis(tree: CellTree, mu: CellMeasure) -> HaarBasis:
    if mu.tree is not tree:
        raise ValueError("measure was built on a different cell tree")
    if not mu.is_positive():
        raise ValueError("mu must be strictly positive on every cell")
    K = tree.ncells(tree.finest)
    w = mu.level_slice(tree.finest)
    total = mu.total()

    funcs = [np.ones(K) / np.sqrt(total)]
    levels = [0]

    def dot(a, b):
        return float(np.sum(a * b * w))

    for level in range(tree.finest):
        ind_child = _cell_indicators(tree, level + 1)
        ind_parent = _cell_indicators(tree, level)
        for parent, kids in sorted(tree.children_map(level).items()):
            if len(kids) == 1:
                continue
            vectors = [ind_parent[parent]] + [ind_child[k] for k in kids[:-1]]
            ortho = []
            for vec in vectors:
                v = vec.copy()
                for _ in range(2):  # one re-orthogonalization pass
                    for q in ortho:
                        v -= dot(v, q) * q
                nrm = np.sqrt(dot(v, v))
                if nrm < _NORM_FLOOR:
                    raise ValueError("zero-mass cell encountered during Gram-Schmidt")
                ortho.append(v / nrm)
            for q in ortho[1:]:
                nz = np.nonzero(np.abs(q) > 1e-12)[0]
                if len(nz) and q[nz[0]] < 0:
                    q = -q
                funcs.append(q)
                levels.append(level + 1)
    return HaarBasis(tree, w, np.array(funcs), np.array(levels))


def analyze(basis: HaarBasis, F) -> np.ndarray:
    """Coefficients <F, chi_k>_mu of a function given on the finest cells."""
    F = np.asarray(F, dtype=float)
    if F.shape != basis.weights.shape:
        raise ValueError("function must be given on the finest-level cells")
    return basis.functions @ (F * basis.weights)


def synthesize(basis: HaarBasis, coeffs) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (len(basis),):
        raise ValueError("coefficient count does not match the basis")
    return basis.functions.T @ coeffs


def multiresolution_eigenvalues(basis: HaarBasis) -> np.ndarray:
    """Eigenvalue per basis function: 0 for the constant, 1/alpha(n) for
    every detail born at canonical level n.  The level-to-eigenvalue
    bookkeeping is one consistent reading of the multiplicity convention."""
    jumps = basis.tree.jumps
    if basis.levels.max(initial=0) > len(jumps):
        raise ValueError("jump list is shorter than the basis levels")
    lam = np.zeros(len(basis))
    for k, lev in enumerate(basis.levels):
        if lev > 0:
            lam[k] = 1.0 / jumps[lev - 1][0]
    return lam


def multiresolution_operator(basis: HaarBasis, F) -> np.ndarray:
    """Apply the operator with eigenpairs (1/alpha(n), detail functions):
    symmetric and PSD in L2(mu) by construction."""
    return synthesize(basis, multiresolution_eigenvalues(basis) * analyze(basis, F))
