"""Brute-force Gaussian moment oracle.

Computes exact expectations of products of Hermite polynomials of jointly
Gaussian variables by enumerating pairings (Isserlis/Wick).  Each Hermite
factor H_q contributes q half-edges at its vertex; a pairing contributes
the product of covariances over its edges, and pairings with an edge
inside a single Hermite factor contribute nothing (the diagram rule).

Intentionally small and obviously correct: this module certifies the fast
chaos-calculus code on tiny lattices and is capped so the enumeration
stays around a million pairings.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._errors import ModelError
from .covariance import CompositeCovariance, eval_composite

MAX_TOTAL_DEGREE = 16
MAX_ORACLE_POINTS = 4


@dataclass(frozen=True)
class WickProblem:
    """Covariance matrix plus a Hermite monomial prod_j H_{q_j}(B_{k_j})."""

    covariance: np.ndarray            # m x m, symmetric, unit diagonal
    monomial: tuple                   # ((point index, hermite order), ...)

    def __post_init__(self):
        cov = np.asarray(self.covariance, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ModelError("covariance must be a square matrix")
        if not np.allclose(cov, cov.T, atol=1e-12):
            raise ModelError("covariance must be symmetric")
        if not np.allclose(np.diag(cov), 1.0, atol=1e-12):
            raise ModelError("covariance must have unit diagonal")
        object.__setattr__(self, "covariance", cov)
        mono = tuple((int(k), int(q)) for k, q in self.monomial)
        if any(q < 0 for _, q in mono) or any(
            not 0 <= k < cov.shape[0] for k, _ in mono
        ):
            raise ModelError("monomial entries must be (valid point index, order >= 0)")
        object.__setattr__(self, "monomial", mono)

    @property
    def total_degree(self) -> int:
        return sum(q for _, q in self.monomial)


def wick_moment(problem: WickProblem) -> float:
    """Exact E[prod_j H_{q_j}(B_{k_j})] by pairing enumeration."""
    if problem.total_degree > MAX_TOTAL_DEGREE:
        raise ModelError(
            f"total degree {problem.total_degree} exceeds the "
            f"enumeration cap {MAX_TOTAL_DEGREE}"
        )
    if problem.total_degree % 2 == 1:
        return 0.0
    cov = problem.covariance
    # half-edge list: vertex id per half-edge; vertices are Hermite factors
    vertex_point = []
    halfedge_vertex = []
    for v, (point, order) in enumerate(problem.monomial):
        vertex_point.append(point)
        halfedge_vertex.extend([v] * order)

    n = len(halfedge_vertex)
    if n == 0:
        return 1.0

    def match(remaining, acc):
        if not remaining:
            return acc
        first, rest = remaining[0], remaining[1:]
        v1 = halfedge_vertex[first]
        total = 0.0
        for i, other in enumerate(rest):
            v2 = halfedge_vertex[other]
            if v1 == v2:
                continue  # no pairing inside one Hermite factor
            rho = cov[vertex_point[v1], vertex_point[v2]]
            if rho != 0.0:
                total += match(rest[:i] + rest[i + 1 :], acc * rho)
        return total

    return match(tuple(range(n)), 1.0)


def _lattice_points(lattice) -> np.ndarray:
    """All lattice points as integer coordinate rows, axis-major order."""
    axes = [np.arange(n) for n in lattice.all_sizes]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def lattice_covariance_matrix(cov: CompositeCovariance, lattice) -> np.ndarray:
    """Dense covariance matrix over all lattice points (small lattices)."""
    pts = _lattice_points(lattice)
    n = len(pts)
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            out[i, j] = out[j, i] = eval_composite(cov, pts[i] - pts[j])
    return out


def oracle_functional_moment(cov, lattice, q: int, order: int) -> float:
    """Exact E[Y[q]^order] on a tiny lattice, order in {2, 4}.

    Y[q] = sum over lattice points of H_q(B), expanded into a sum of
    wick_moment calls over all point tuples.
    """
    if order not in (2, 4):
        raise ModelError("moment order must be 2 or 4")
    n = lattice.n_total
    if n > MAX_ORACLE_POINTS:
        raise ModelError(f"oracle lattices are capped at {MAX_ORACLE_POINTS} points")
    if order == 4 and q > 3:
        raise ModelError("fourth moments are capped at q <= 3")
    matrix = lattice_covariance_matrix(cov, lattice)
    total = 0.0
    idx = range(n)
    if order == 2:
        for i in idx:
            for j in idx:
                total += wick_moment(WickProblem(matrix, ((i, q), (j, q))))
    else:
        for i in idx:
            for j in idx:
                for k in idx:
                    for l in idx:
                        total += wick_moment(
                            WickProblem(matrix, ((i, q), (j, q), (k, q), (l, q)))
                        )
    return total
