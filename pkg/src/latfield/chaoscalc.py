"""Exact chaos-calculus diagnostics on rectangular lattices.

Everything here is a deterministic function of (covariance, lattice, q):
the variance of the Hermite functional Y[q] = sum_t H_q(B_t), squared
contraction norms of its kernel, the fourth cumulant of the normalized
functional, the total-variation bound against the Gaussian, the additive
variance decomposition, gamma quotients, and the rank-reduction ratio.

The workhorse identity: pair sums over a rectangular window of sizes n_j
collapse to lag sums, sum_z W(z) C(z)^q with weight W(z) = prod_j (n_j -
|z_j|).  Contraction norms collapse to traces of Hadamard-power matrix
products: with A = M^(.r) and B = M^(.(q-r)) elementwise,
||f (x)_r f||^2 = trace((A B)^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import matmul_toeplitz, toeplitz

from ._errors import ModelError, NumericalError
from .covariance import (
    ADDITIVE,
    SEPARABLE,
    CompositeCovariance,
    FactorCovariance,
    _lag_values,
    composite_values,
)
from .fieldsim import DENSE_LIMIT, LatticeSpec, dense_covariance_matrix
from .hermite import PURE, hermite_rank, phi_second_moment

MAX_CHAOS_ORDER = 30
#: largest per-factor point count for the exact q=3 clique sum (cost n^4)
CLIQUE_LIMIT = 256
#: 1-D factors at least this large route through the FFT Toeplitz matmul
_TOEPLITZ_MIN = 512
#: factorized results self-check against the direct lag sum below this size
_VAR_CHECK_LAGS = 20_000
_DIRECT_LAG_LIMIT = 2**24


def _check_q(q: int):
    if q < 1:
        raise ModelError("chaos order q must be >= 1")
    if q > MAX_CHAOS_ORDER:
        raise ModelError(
            f"q = {q} exceeds the overflow guard (q <= {MAX_CHAOS_ORDER})"
        )


def _check_blocks(cov: CompositeCovariance, lattice: LatticeSpec):
    if lattice.block_dims != cov.blocks:
        raise ModelError(
            f"lattice block dims {lattice.block_dims} do not match "
            f"covariance blocks {cov.blocks}"
        )


def _lag_grid(sizes):
    """All window lags (rows) with their pair weights prod_j (n_j - |z_j|)."""
    axes = [np.arange(-(n - 1), n) for n in sizes]
    mesh = np.meshgrid(*axes, indexing="ij")
    lags = np.stack([m.ravel() for m in mesh], axis=-1).astype(float)
    weights = None
    for n, ax in zip(sizes, axes):
        wa = (n - np.abs(ax)).astype(float)
        weights = wa if weights is None else np.multiply.outer(weights, wa)
    return lags, weights.ravel()


def _factor_pair_sum(factor: FactorCovariance, sizes, k: int) -> float:
    """S(k) = sum_z W(z) K(z)^k over the lag window of one block."""
    lags, weights = _lag_grid(sizes)
    vals = _lag_values(factor, lags)
    return float(np.sum(weights * vals**k))


def _direct_pair_sum(cov: CompositeCovariance, lattice: LatticeSpec, q: int) -> float:
    sizes = lattice.all_sizes
    count = math.prod(2 * n - 1 for n in sizes)
    if count > _DIRECT_LAG_LIMIT:
        raise ModelError(
            f"direct lag sum over {count} lags is too large; "
            "use a factorized structure or a smaller window"
        )
    lags, weights = _lag_grid(sizes)
    vals = composite_values(cov, lags)
    return float(np.sum(weights * vals**q))


# ---------------------------------------------------------------------------
# variances


def variance_hermite(cov: CompositeCovariance, lattice: LatticeSpec, q: int) -> float:
    """Var(Y[q]) = q! sum over lattice pairs of C^q, exactly."""
    _check_q(q)
    _check_blocks(cov, lattice)
    if cov.structure == SEPARABLE:
        value = float(math.factorial(q))
        for factor, sizes in zip(cov.factors, lattice.blocks):
            value *= _factor_pair_sum(factor, sizes, q)
        if math.prod(2 * n - 1 for n in lattice.all_sizes) <= _VAR_CHECK_LAGS:
            direct = math.factorial(q) * _direct_pair_sum(cov, lattice, q)
            if abs(value - direct) > 1e-9 * max(abs(direct), 1.0):
                raise NumericalError(
                    f"factorized variance {value!r} disagrees with the "
                    f"direct lag sum {direct!r}"
                )
        return value
    return math.factorial(q) * _direct_pair_sum(cov, lattice, q)


@dataclass(frozen=True)
class PhiVariance:
    """Var of the phi functional through its chaos decomposition.

    ``tail_bound`` caps what the truncation at qmax dropped, via |C| <= 1:
    each missing chaos contributes at most q! a_q^2 N_tot^2, and the
    missing Parseval mass sum_{q > qmax} q! a_q^2 is E[phi^2] minus the
    retained mass.  None when phi was not supplied.
    """

    value: float
    rank: int
    qmax: int
    tail_bound: Optional[float] = None


def variance_phi(cov, lattice, coefficients, phi=None) -> PhiVariance:
    """Var(Y) = sum_q a_q^2 Var(Y[q]) over the retained chaoses."""
    coeffs = np.asarray(coefficients, dtype=float)
    rank = hermite_rank(coeffs)
    qmax = len(coeffs) - 1
    value = 0.0
    for q in range(rank, qmax + 1):
        if coeffs[q] != 0.0:
            value += coeffs[q] ** 2 * variance_hermite(cov, lattice, q)
    tail = None
    if phi is not None:
        if phi.kind == PURE:
            tail = 0.0
        else:
            retained = sum(
                math.factorial(q) * coeffs[q] ** 2 for q in range(qmax + 1)
            )
            gap = max(0.0, phi_second_moment(phi) - retained)
            tail = gap * float(lattice.n_total) ** 2
    return PhiVariance(value=value, rank=rank, qmax=qmax, tail_bound=tail)


# ---------------------------------------------------------------------------
# contraction norms


def _factor_matrix(factor: FactorCovariance, sizes) -> np.ndarray:
    if len(sizes) == 1:
        col = _lag_values(factor, np.arange(sizes[0], dtype=float)[:, None])
        return toeplitz(col)
    comp = CompositeCovariance(SEPARABLE, (factor,))
    return dense_covariance_matrix(comp, LatticeSpec((tuple(sizes),)))


def _trace_abab(a_mat: np.ndarray, b_mat: np.ndarray) -> float:
    ab = a_mat @ b_mat
    return float(np.einsum("ij,ji->", ab, ab))


def _factor_contraction(factor, sizes, q, r) -> float:
    n = int(math.prod(sizes))
    if n > DENSE_LIMIT:
        raise ModelError(
            f"contraction norms are capped at {DENSE_LIMIT} points per factor "
            f"({n} requested)"
        )
    if len(sizes) == 1 and n >= _TOEPLITZ_MIN:
        col = _lag_values(factor, np.arange(n, dtype=float)[:, None])
        acol = col**r
        ab = matmul_toeplitz((acol, acol), toeplitz(col ** (q - r)))
        return float(np.einsum("ij,ji->", ab, ab))
    m = _factor_matrix(factor, sizes)
    return _trace_abab(m**r, m ** (q - r))


def contraction_norm(cov: CompositeCovariance, lattice: LatticeSpec,
                     q: int, r: int) -> float:
    """||f (x)_r f||^2 for the kernel of Y[q]; factorizes over blocks."""
    _check_q(q)
    if not 1 <= r <= q - 1:
        raise ModelError("contraction order r must satisfy 1 <= r <= q-1")
    _check_blocks(cov, lattice)
    if cov.structure == SEPARABLE:
        out = 1.0
        for factor, sizes in zip(cov.factors, lattice.blocks):
            out *= _factor_contraction(factor, sizes, q, r)
        return out
    matrix = dense_covariance_matrix(cov, lattice)
    return _trace_abab(matrix**r, matrix ** (q - r))


# ---------------------------------------------------------------------------
# fourth cumulant and the TV bound


def _clique_sum(matrix: np.ndarray) -> float:
    """Sum over point 4-tuples of the product of all six pair covariances."""
    total = 0.0
    for u in range(len(matrix)):
        dm = matrix[:, u, None] * matrix  # diag(M[:, u]) @ M
        total += float(np.einsum("ij,ji->", dm @ dm, dm))
    return total


def _clique_total(cov, lattice) -> Optional[float]:
    if cov.structure == SEPARABLE:
        if any(math.prod(sizes) > CLIQUE_LIMIT for sizes in lattice.blocks):
            return None
        out = 1.0
        for factor, sizes in zip(cov.factors, lattice.blocks):
            out *= _clique_sum(_factor_matrix(factor, sizes))
        return out
    if lattice.n_total > CLIQUE_LIMIT:
        return None
    return _clique_sum(dense_covariance_matrix(cov, lattice))


def fourth_cumulant(cov: CompositeCovariance, lattice: LatticeSpec, q: int):
    """kappa_4 of Y[q]/sqrt(Var); returns (value, exact flag).

    q = 1 is Gaussian (0, exact).  q = 2 and q = 3 use the exact
    fourth-moment identities; the q = 3 one needs the 4-clique sum, which
    is replaced by its contraction-norm majorant (flag cleared) past
    CLIQUE_LIMIT points.  q >= 4 always reports the upper bound
    sum_r q!^2 binom(q,r)^2 (1 + binom(2q-2r, q-r)) ||f (x)_r f||^2 / Var^2.
    """
    _check_q(q)
    if q == 1:
        return 0.0, True
    var = variance_hermite(cov, lattice, q)
    p1 = contraction_norm(cov, lattice, q, 1)
    if q == 2:
        return 48.0 * p1 / var**2, True
    if q == 3:
        u1 = _clique_total(cov, lattice)
        if u1 is not None:
            return (1944.0 * p1 + 1296.0 * u1) / var**2, True
        return 3240.0 * p1 / var**2, False  # clique sum <= p1
    total = 0.0
    for r in range(1, q):
        pr = p1 if r == 1 else contraction_norm(cov, lattice, q, r)
        total += (
            math.factorial(q) ** 2
            * math.comb(q, r) ** 2
            * (1 + math.comb(2 * q - 2 * r, q - r))
            * pr
        )
    return total / var**2, False


def cq_constant(q: int) -> float:
    """The constant in front of the product-of-cumulants TV bound."""
    if q < 2:
        raise ModelError("the TV constant needs q >= 2")
    s = sum(
        r * math.factorial(r) ** 2 * math.comb(q, r) ** 4
        * math.factorial(2 * q - 2 * r)
        for r in range(1, q)
    )
    return math.sqrt(4.0 * s / q)


def tv_bound(cov: CompositeCovariance, lattice: LatticeSpec, q: int) -> float:
    """d_TV(normalized Y[q], N) <= c_q prod_i sqrt(kappa_4 of factor i).

    Separable covariances only; the per-factor cumulants are computed on
    the factor's own block window.  Clamped at 1 (it is a TV distance).
    """
    if cov.structure != SEPARABLE:
        raise ModelError("the TV bound applies to separable covariances only")
    if q < 2:
        raise ModelError("the TV bound needs q >= 2")
    _check_blocks(cov, lattice)
    prod = 1.0
    for factor, sizes in zip(cov.factors, lattice.blocks):
        sub = CompositeCovariance(SEPARABLE, (factor,))
        k4, _ = fourth_cumulant(sub, LatticeSpec((tuple(sizes),)), q)
        prod *= math.sqrt(max(k4, 0.0))
    return min(1.0, cq_constant(q) * prod)


# ---------------------------------------------------------------------------
# additive decomposition, gamma quotients, rank reduction


@dataclass(frozen=True)
class AdditiveVariance:
    """Var(Y[q]) split as sum_k binom(q,k)^2 V1(k) V2(q-k)."""

    terms: dict
    total: float


def _block_moment(factor, sizes, weight, k: int) -> float:
    """V(k) = k! sum over block pairs of (w K)^k; V(0) = volume^2."""
    if k == 0:
        return float(math.prod(sizes)) ** 2
    return math.factorial(k) * weight**k * _factor_pair_sum(factor, sizes, k)


def additive_variance(cov: CompositeCovariance, lattice: LatticeSpec,
                      q: int) -> AdditiveVariance:
    if cov.structure != ADDITIVE:
        raise ModelError("additive_variance requires an additive covariance")
    _check_q(q)
    _check_blocks(cov, lattice)
    (f1, f2), (w1, w2) = cov.factors, cov.weights
    v1 = [_block_moment(f1, lattice.blocks[0], w1, k) for k in range(q + 1)]
    v2 = [_block_moment(f2, lattice.blocks[1], w2, k) for k in range(q + 1)]
    terms = {k: math.comb(q, k) ** 2 * v1[k] * v2[q - k] for k in range(q + 1)}
    total = float(sum(terms.values()))
    if all(math.prod(sizes) <= 16 for sizes in lattice.blocks):
        direct = math.factorial(q) * _direct_pair_sum(cov, lattice, q)
        if abs(total - direct) > 1e-12 * max(abs(direct), 1.0):
            raise NumericalError(
                f"additive decomposition total {total!r} disagrees with the "
                f"direct lag sum {direct!r}"
            )
    return AdditiveVariance(terms=terms, total=total)


@dataclass(frozen=True)
class GammaQuotient:
    """Pair-sum growth quotient of one block: (sum_pairs K^q) / volume^2.

    ``surrogate`` is the cheaper asymptotic stand-in, the plain lag sum
    over the window box divided by the volume.
    """

    exact: float
    surrogate: float


def gamma_quotient(factor: FactorCovariance, sizes, q: int,
                   weight: float = 1.0) -> GammaQuotient:
    _check_q(q)
    sizes = tuple(int(n) for n in sizes)
    vol = float(math.prod(sizes))
    exact = weight**q * _factor_pair_sum(factor, sizes, q) / vol**2
    lags, _ = _lag_grid(sizes)
    plain = float(np.sum(_lag_values(factor, lags) ** q))
    return GammaQuotient(exact=exact, surrogate=weight**q * plain / vol)


def reduction_ratio(cov, lattice, coefficients, phi=None) -> float:
    """Var(Y) over the leading-chaos part a_R^2 Var(Y[R]); always >= 1."""
    coeffs = np.asarray(coefficients, dtype=float)
    rank = hermite_rank(coeffs)
    leading = coeffs[rank] ** 2 * variance_hermite(cov, lattice, rank)
    return variance_phi(cov, lattice, coeffs, phi=phi).value / leading


# ---------------------------------------------------------------------------
# the combined report


@dataclass(frozen=True)
class ChaosReport:
    q: int
    variance: float
    contraction_norms: dict
    fourth_cumulant: float
    fourth_exact: bool
    tv_bound: Optional[float]
    notes: tuple


def chaos_report(cov: CompositeCovariance, lattice: LatticeSpec,
                 q: int) -> ChaosReport:
    """All diagnostics for one chaos order, ready for serialization."""
    variance = variance_hermite(cov, lattice, q)
    norms = {r: contraction_norm(cov, lattice, q, r) for r in range(1, q)}
    k4, exact = fourth_cumulant(cov, lattice, q)
    notes = []
    if not exact:
        notes.append("fourth cumulant is an upper bound, not the exact value")
    tv = None
    if cov.structure == SEPARABLE and q >= 2:
        tv = tv_bound(cov, lattice, q)
        notes.append("tv bound from per-factor fourth cumulants, clamped at 1")
    return ChaosReport(
        q=q,
        variance=variance,
        contraction_norms=norms,
        fourth_cumulant=k4,
        fourth_exact=exact,
        tv_bound=tv,
        notes=tuple(notes),
    )
