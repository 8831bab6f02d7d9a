"""Spectral quantities of T-product tensors.

Every quantity is read off the transform slices: a Hermitian tensor has ``p``
Hermitian transform slices and ``mp`` real eigenvalues in total.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Tuple, Union

import numpy as np

from .tensor import DenseTensor3, ShapeError, conj_transpose, from_slices, to_slices

HERMITIAN_TOL = 1e-10
LOEWNER_TOL = 1e-10


class NotHermitianError(ValueError):
    """Raised when a Hermitian tensor is required."""


class DomainError(ValueError):
    """Raised when a spectrum leaves the domain of a scalar function."""


@dataclass(frozen=True, eq=False)
class HermitianSpectrum:
    """Per-slice spectra of a Hermitian tensor.

    ``values[k]`` holds the eigenvalues of transform slice ``k`` in descending
    order, ``vectors[k]`` the matching orthonormal eigenvectors as columns.
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def all_values(self) -> np.ndarray:
        """All ``mp`` eigenvalues, sorted descending."""
        return np.sort(self.values.ravel())[::-1]

    def reconstruct_slices(self) -> np.ndarray:
        v = self.vectors
        return (v * self.values[:, None, :]) @ np.conj(np.swapaxes(v, -1, -2))


@dataclass(frozen=True, eq=False)
class TSvd:
    """``a = u * s * v^H`` with slice-wise unitary ``u``, ``v``.

    ``singular_values[k]`` lists the singular values of transform slice ``k``
    in descending order; they are the diagonals of the transform slices of ``s``.
    """

    u: DenseTensor3
    s: DenseTensor3
    v: DenseTensor3
    singular_values: np.ndarray

    def reconstruct(self) -> DenseTensor3:
        return self.u @ self.s @ self.v.H


class EigentupleCondition(NamedTuple):
    holds: bool
    slack: float


# --- array-level helpers (stacked transform slices, shape (..., p, m, n)) --

def hermitian_part(slices: np.ndarray) -> np.ndarray:
    return 0.5 * (slices + np.conj(np.swapaxes(slices, -1, -2)))


def slice_eigvalsh(slices: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of each (assumed Hermitian) slice."""
    return np.linalg.eigvalsh(hermitian_part(slices))


def slice_singular_values(slices: np.ndarray) -> np.ndarray:
    """Descending singular values of each slice."""
    return np.linalg.svd(slices, compute_uv=False)


# --- predicates ----------------------------------------------------------

def _require_square(a: DenseTensor3):
    if not a.is_square:
        raise ShapeError(f"expected a square tensor, got {a.shape}")


def is_hermitian(a: DenseTensor3, tol: float = HERMITIAN_TOL) -> bool:
    _require_square(a)
    diff = np.linalg.norm((a.data - conj_transpose(a).data).ravel())
    return bool(diff <= tol * max(1.0, a.frobenius()))


def _require_hermitian(a: DenseTensor3, what: str = "tensor"):
    if not is_hermitian(a):
        raise NotHermitianError(f"{what} of shape {a.shape} is not Hermitian")


# --- eigen- and singular values --------------------------------------------

def eig_hermitian(a: DenseTensor3) -> HermitianSpectrum:
    _require_hermitian(a)
    w, v = np.linalg.eigh(hermitian_part(to_slices(a.data)))
    # eigh is ascending; flip to descending (ties keep eigh's order reversed)
    return HermitianSpectrum(values=w[:, ::-1].copy(), vectors=v[:, :, ::-1].copy())


def _extreme_slice_values(a: DenseTensor3) -> np.ndarray:
    _require_hermitian(a)
    return slice_eigvalsh(to_slices(a.data))


def lambda_max(a: DenseTensor3) -> float:
    return float(_extreme_slice_values(a)[:, -1].max())


def lambda_min(a: DenseTensor3) -> float:
    return float(_extreme_slice_values(a)[:, 0].min())


def d_max(a: DenseTensor3) -> np.ndarray:
    """Eigentuple of per-slice largest eigenvalues (length ``p``)."""
    return _extreme_slice_values(a)[:, -1].copy()


def d_min(a: DenseTensor3) -> np.ndarray:
    return _extreme_slice_values(a)[:, 0].copy()


def spectral_norm(a: DenseTensor3) -> float:
    """Largest singular value over all transform slices."""
    return float(slice_singular_values(to_slices(a.data))[:, 0].max())


def vec_norm(a: DenseTensor3) -> np.ndarray:
    """Per-slice largest singular values, i.e. ``d_max(sqrt(a^H * a))``."""
    return slice_singular_values(to_slices(a.data))[:, 0].copy()


def t_svd(a: DenseTensor3) -> TSvd:
    slices = to_slices(a.data)
    p = a.p
    u, s, vh = np.linalg.svd(slices)
    if a.is_real():
        # conjugate-symmetric factors give real u, s, v for real input
        for k in {0, p // 2} if p % 2 == 0 else {0}:
            uk, sk, vhk = np.linalg.svd(slices[k].real)
            u[k], s[k], vh[k] = uk, sk, vhk
        for k in range(p // 2 + 1, p):
            u[k] = np.conj(u[p - k])
            s[k] = s[p - k]
            vh[k] = np.conj(vh[p - k])
    m, n = a.m, a.n
    s_slices = np.zeros((p, m, n), dtype=complex)
    r = min(m, n)
    s_slices[:, np.arange(r), np.arange(r)] = s
    v = np.conj(np.swapaxes(vh, -1, -2))
    return TSvd(
        u=DenseTensor3._wrap(from_slices(u)),
        s=DenseTensor3._wrap(from_slices(s_slices)),
        v=DenseTensor3._wrap(from_slices(v)),
        singular_values=s,
    )


# --- functional calculus ---------------------------------------------------

_NAMED = {
    # name: (function, lower bound, upper bound, lower bound excluded)
    "exp": (np.exp, -math.inf, math.inf, False),
    "log": (np.log, 0.0, math.inf, True),
    "sqrt": (np.sqrt, 0.0, math.inf, False),
    "cosh": (np.cosh, -math.inf, math.inf, False),
    "square": (np.square, -math.inf, math.inf, False),
    "identity": (lambda x: x, -math.inf, math.inf, False),
}

ScalarFunction = Union[str, Callable[[np.ndarray], np.ndarray]]


def _check_domain(values: np.ndarray, lo: float, hi: float, open_lo: bool, name: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(values))))
    slack = 1e-12 * scale
    bad_lo = values <= lo if open_lo else values < lo - slack
    bad = bad_lo | (values > hi + slack)
    if np.any(bad):
        k, r = np.argwhere(bad)[0]
        raise DomainError(
            f"{name}: eigenvalue {values[k, r]:.6g} of transform slice {k} lies outside "
            f"{'(' if open_lo else '['}{lo}, {hi}]"
        )
    return np.clip(values, lo, hi)


def tensor_function(
    a: DenseTensor3,
    f: ScalarFunction,
    domain: Optional[Tuple[float, float]] = None,
) -> DenseTensor3:
    """Apply ``f`` to a Hermitian tensor through its per-slice eigenvalues.

    ``f`` is a name (``exp``, ``log``, ``sqrt``, ``cosh``, ``square``,
    ``identity``) or a vectorized callable; ``domain`` is a closed interval
    the spectrum must lie in (names carry their own).
    """
    _require_hermitian(a)
    if isinstance(f, str):
        if f not in _NAMED:
            raise ValueError(f"unknown function {f!r}; choose from {sorted(_NAMED)}")
        func, lo, hi, open_lo = _NAMED[f]
        name = f
    else:
        func, name, open_lo = f, getattr(f, "__name__", "f"), False
        lo, hi = domain if domain is not None else (-math.inf, math.inf)
    w, v = np.linalg.eigh(hermitian_part(to_slices(a.data)))
    w = _check_domain(w, lo, hi, open_lo, name)
    fw = np.asarray(func(w), dtype=complex)
    out = (v * fw[:, None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    return DenseTensor3._wrap(from_slices(out))


def texp(a: DenseTensor3) -> DenseTensor3:
    return tensor_function(a, "exp")


def tlog(a: DenseTensor3) -> DenseTensor3:
    return tensor_function(a, "log")


def tsqrt(a: DenseTensor3) -> DenseTensor3:
    return tensor_function(a, "sqrt")


def tpower(a: DenseTensor3, k: int) -> DenseTensor3:
    """Integer power through the functional calculus (equals repeated T-products)."""
    return tensor_function(a, lambda x: x ** k)


# --- Loewner order -----------------------------------------------------------

def loewner_slack(a: DenseTensor3, b: DenseTensor3) -> Tuple[float, float]:
    """Return ``(lambda_min(b - a), max(1, ||b - a||))``."""
    if a.data.shape != b.data.shape:
        raise ShapeError(f"Loewner comparison needs equal shapes, got {a.shape} and {b.shape}")
    _require_hermitian(a, "left operand")
    _require_hermitian(b, "right operand")
    w = slice_eigvalsh(to_slices(b.data - a.data))
    return float(w[:, 0].min()), max(1.0, float(np.abs(w).max()))


def loewner_leq(a: DenseTensor3, b: DenseTensor3, tol: float = LOEWNER_TOL) -> bool:
    """``a <= b`` in the Loewner order, i.e. ``b - a`` is TPSD up to ``tol``."""
    slack, scale = loewner_slack(a, b)
    return slack >= -tol * scale


def is_tpsd(a: DenseTensor3, tol: float = LOEWNER_TOL) -> bool:
    return lambda_min(a) >= -tol


def is_tpd(a: DenseTensor3, tol: float = LOEWNER_TOL) -> bool:
    return lambda_min(a) > tol


def check_eigentuple_condition(y: DenseTensor3) -> EigentupleCondition:
    """Test ``lambda_max(e^Y)^p / p + 1 - 1/p <= Tr(e^Y)``.

    ``slack`` is the right side minus the left side.
    """
    w = _extreme_slice_values(y)
    p = y.p
    lam = float(np.exp(w.max()))
    tr = float(np.exp(w).sum())
    lhs = lam ** p / p + 1.0 - 1.0 / p
    slack = tr - lhs
    return EigentupleCondition(holds=bool(slack >= -1e-12 * max(1.0, abs(lhs))), slack=slack)
