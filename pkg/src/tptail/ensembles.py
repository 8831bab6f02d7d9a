"""Random Hermitian T-product tensor ensembles with known hypothesis parameters.

Samplers work in the transform domain: a batch of ``size`` draws of a sum of
``n_sum`` summands is an array of shape ``(size, n_sum, p, m, n)`` holding the
transform slices of each summand.  Everything a bound needs (``sigma2``,
``T``, the expectation extremes) is computed exactly from the construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .bounds import hadamard_sigma2, series_sigma2
from .spectral import HERMITIAN_TOL, NotHermitianError, is_hermitian, slice_eigvalsh
from .tensor import DenseTensor3, ShapeError, from_slices, tensor_sum, to_slices

HYPOTHESIS_TOL = 1e-10
LAWS = ("uniform", "point", "bernoulli")


class HypothesisError(ValueError):
    """A sample violates an almost-sure hypothesis; ``witness`` is the offending tensor."""

    def __init__(self, message: str, witness: Optional[DenseTensor3] = None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a chunking rule for reproducible parallel streams.

    Trials are cut into chunks of ``chunk_size``; chunk ``c`` always draws
    from the stream spawned with key ``c``, whichever worker runs it.
    """

    master_seed: int
    chunk_size: int = 2000

    def __post_init__(self):
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be positive")

    def chunks(self, trials: int) -> List[Tuple[int, int]]:
        """``(chunk index, chunk length)`` pairs covering ``trials``."""
        out = []
        start, c = 0, 0
        while start < trials:
            length = min(self.chunk_size, trials - start)
            out.append((c, length))
            start += length
            c += 1
        return out

    def rng(self, chunk: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.master_seed, spawn_key=(chunk,)))


# --- small constructors ----------------------------------------------------

def random_hermitian(m: int, p: int, rng: np.random.Generator, complex: bool = False,
                     scale: float = 1.0) -> DenseTensor3:
    """``(X + X^H) / 2`` for a Gaussian ``m x m x p`` tensor ``X``."""
    x = rng.standard_normal((m, m, p))
    if complex:
        x = x + 1j * rng.standard_normal((m, m, p))
    x = DenseTensor3(scale * x)
    return (x + x.H) * 0.5


def random_unitary_slices(p: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary matrices, one per slice, shape ``(p, m, m)``."""
    z = (rng.standard_normal((p, m, m)) + 1j * rng.standard_normal((p, m, m))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


def rademacher(rng: np.random.Generator, shape) -> np.ndarray:
    return 2.0 * rng.integers(0, 2, size=shape) - 1.0


def _stack_hat(tensors: Sequence[DenseTensor3]) -> np.ndarray:
    return np.stack([to_slices(t.data) for t in tensors])


def _check_hermitian_list(tensors: Sequence[DenseTensor3], what: str):
    shape = tensors[0].data.shape
    for i, a in enumerate(tensors):
        if a.data.shape != shape:
            raise ShapeError(f"{what} {i} has shape {a.shape}, expected {tensors[0].shape}")
        if not a.is_square or not is_hermitian(a):
            raise NotHermitianError(f"{what} {i} of shape {a.shape} is not Hermitian")


def _psd_violation(slices: np.ndarray, tol: float = HYPOTHESIS_TOL) -> Optional[Tuple[int, ...]]:
    """Index of the first slice (batched) with an eigenvalue below ``-tol * scale``."""
    w = slice_eigvalsh(slices)
    scale = np.maximum(1.0, np.abs(w).max(axis=-1))
    bad = w[..., 0] < -tol * scale
    if np.any(bad):
        return tuple(np.argwhere(bad)[0])
    return None


# --- base class --------------------------------------------------------------

class Ensemble:
    """A random sum ``sum_i X_i`` of ``n_sum`` tensors of shape ``m x n x p``."""

    kind: str = "abstract"
    m: int
    n: int
    p: int
    n_sum: int

    @property
    def hermitian(self) -> bool:
        return True

    def sample_summands_hat(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def sample_hat(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Transform slices of ``size`` independent sums, shape ``(size, p, m, n)``."""
        return self.sample_summands_hat(rng, size).sum(axis=1)

    def sample(self, rng: np.random.Generator) -> DenseTensor3:
        return DenseTensor3._wrap(from_slices(self.sample_hat(rng, 1)[0]))

    def sample_summands(self, rng: np.random.Generator) -> List[DenseTensor3]:
        hat = self.sample_summands_hat(rng, 1)[0]
        return [DenseTensor3._wrap(from_slices(s)) for s in hat]

    def check_hypotheses(self, summands_hat: np.ndarray) -> None:
        """Raise :class:`HypothesisError` if any summand breaks an a.s. condition."""

    def _witness(self, summands_hat: np.ndarray, index: Tuple[int, ...]) -> DenseTensor3:
        return DenseTensor3._wrap(from_slices(summands_hat[index[0], index[1]]))


# --- Gaussian / Rademacher series ------------------------------------------

class SeriesEnsemble(Ensemble):
    """``sum_i alpha_i A_i`` with standard normal or Rademacher ``alpha_i``.

    Square coefficients must be Hermitian unless ``rectangular`` is set, in
    which case ``sigma2`` is the larger of the two Gram-sum norms.
    """

    kind = "series"

    def __init__(self, coefficients: Sequence[DenseTensor3], variable_kind: str = "gaussian",
                 rectangular: bool = False):
        coefficients = list(coefficients)
        if not coefficients:
            raise ValueError("need at least one coefficient tensor")
        if variable_kind not in ("gaussian", "rademacher"):
            raise ValueError(f"variable_kind must be 'gaussian' or 'rademacher', got {variable_kind!r}")
        rectangular = rectangular or not coefficients[0].is_square
        if not rectangular:
            _check_hermitian_list(coefficients, "coefficient")
        self.coefficients = coefficients
        self.variable_kind = variable_kind
        self.rectangular = rectangular
        self.m, self.n, self.p = coefficients[0].m, coefficients[0].n, coefficients[0].p
        self.n_sum = len(coefficients)
        self.sigma2 = series_sigma2(coefficients, rectangular=rectangular)
        self._hat = _stack_hat(coefficients)

    @property
    def hermitian(self) -> bool:
        return not self.rectangular

    def draw_variables(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.variable_kind == "gaussian":
            return rng.standard_normal((size, self.n_sum))
        return rademacher(rng, (size, self.n_sum))

    def sample_summands_hat(self, rng, size):
        alpha = self.draw_variables(rng, size)
        return alpha[:, :, None, None, None] * self._hat[None]

    def sample_hat(self, rng, size):
        alpha = self.draw_variables(rng, size)
        return np.einsum("ti,ipmn->tpmn", alpha, self._hat)


def sample_series(spec: SeriesEnsemble, rng: np.random.Generator) -> DenseTensor3:
    return spec.sample(rng)


class HadamardGaussianEnsemble(Ensemble):
    """``X o A`` with i.i.d. standard normal entries ``x_ijk``."""

    kind = "hadamard"

    def __init__(self, a: DenseTensor3, sigma2_mode: str = "all-slices"):
        self.a = a
        self.m, self.n, self.p = a.m, a.n, a.p
        self.n_sum = 1
        self.sigma2_mode = sigma2_mode
        self.sigma2 = hadamard_sigma2(a, mode=sigma2_mode)

    @property
    def hermitian(self) -> bool:
        return False

    def sample_spatial(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.standard_normal((size,) + self.a.data.shape) * self.a.data[None]

    def sample_summands_hat(self, rng, size):
        x = self.sample_spatial(rng, size)
        return np.moveaxis(np.fft.fft(x, axis=-1), -1, -3)[:, None]


def sample_hadamard_gaussian(a: DenseTensor3, rng: np.random.Generator) -> DenseTensor3:
    return DenseTensor3(HadamardGaussianEnsemble(a).sample_spatial(rng, 1)[0])


# --- bounded TPSD summands -------------------------------------------------

def law_raw_moment(law: str, k: int, q: float = 0.5) -> float:
    """``E u^k`` for the unit eigenvalue law."""
    if k == 0:
        return 1.0
    if law == "uniform":
        return 1.0 / (k + 1)
    if law == "point":
        return 1.0
    if law == "bernoulli":
        return q
    raise ValueError(f"unknown eigenvalue law {law!r}; choose from {LAWS}")


def law_central_moment(law: str, k: int, q: float = 0.5) -> float:
    """``E (u - E u)^k`` by binomial expansion of the raw moments."""
    mu = law_raw_moment(law, 1, q)
    return sum(math.comb(k, j) * law_raw_moment(law, j, q) * (-mu) ** (k - j) for j in range(k + 1))


def _draw_law(law: str, q: float, rng: np.random.Generator, shape) -> np.ndarray:
    if law == "uniform":
        return rng.random(shape)
    if law == "point":
        return np.ones(shape)
    if law == "bernoulli":
        return (rng.random(shape) < q).astype(float)
    raise ValueError(f"unknown eigenvalue law {law!r}; choose from {LAWS}")


class BoundedTpsdEnsemble(Ensemble):
    """Independent TPSD summands with eigenvalues in ``[0, T]``.

    Summand ``i`` has transform slices ``Q_ik diag(T s_ik u_ik) Q_ik^H`` with
    fixed Haar bases ``Q_ik`` and fixed scales ``s_ik`` in ``[scale_low, 1]``
    (both drawn once from ``basis_seed``) and random ``u`` from ``law``.
    """

    kind = "bounded-tpsd"

    def __init__(self, m: int, p: int, n_sum: int, T: float = 1.0, law: str = "uniform",
                 q: float = 0.5, scale_low: float = 1.0, basis_seed: int = 0):
        if m < 1 or p < 1 or n_sum < 1:
            raise ValueError("m, p, n_sum must be positive")
        if T < 0:
            raise ValueError(f"T must be nonnegative, got {T}")
        if law not in LAWS:
            raise ValueError(f"unknown eigenvalue law {law!r}; choose from {LAWS}")
        if not 0.0 <= q <= 1.0 or not 0.0 < scale_low <= 1.0:
            raise ValueError("need q in [0, 1] and scale_low in (0, 1]")
        self.m = self.n = m
        self.p, self.n_sum = p, n_sum
        self.T, self.law, self.q = float(T), law, float(q)
        self.scale_low, self.basis_seed = float(scale_low), basis_seed
        brng = np.random.default_rng(basis_seed)
        self.bases = np.stack([random_unitary_slices(p, m, brng) for _ in range(n_sum)])
        self.scales = brng.uniform(scale_low, 1.0, size=(n_sum, p, m))
        self.eig_scale = self.T * self.scales

    def _assemble(self, eigenvalues: np.ndarray) -> np.ndarray:
        q = self.bases
        return (q * eigenvalues[..., None, :]) @ np.conj(np.swapaxes(q, -1, -2))

    def summand_expectations_hat(self) -> np.ndarray:
        """Exact ``E X_i`` transform slices, shape ``(n_sum, p, m, m)``."""
        return self._assemble(self.eig_scale * law_raw_moment(self.law, 1, self.q))

    def _mean_extremes(self) -> Tuple[float, float]:
        w = slice_eigvalsh(self.summand_expectations_hat().sum(axis=0))
        return float(w[:, -1].max()), float(w[:, 0].min())

    @property
    def mu_max(self) -> float:
        return self._mean_extremes()[0]

    @property
    def mu_min(self) -> float:
        return self._mean_extremes()[1]

    @property
    def mu_bar_max(self) -> float:
        return self.mu_max / self.n_sum

    @property
    def mu_bar_min(self) -> float:
        return self.mu_min / self.n_sum

    def expectation(self) -> DenseTensor3:
        return DenseTensor3._wrap(from_slices(self.summand_expectations_hat().sum(axis=0)))

    def draw_eigenvalues(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = _draw_law(self.law, self.q, rng, (size, self.n_sum, self.p, self.m))
        return self.eig_scale[None] * u

    def sample_summands_hat(self, rng, size):
        return self._assemble(self.draw_eigenvalues(rng, size))

    def check_hypotheses(self, summands_hat):
        w = slice_eigvalsh(summands_hat)
        tol = HYPOTHESIS_TOL * max(1.0, self.T)
        low = w[..., 0].min(axis=-1)
        high = w[..., -1].max(axis=-1)
        for bad, what in ((low < -tol, "not TPSD"), (high > self.T + tol, f"lambda_max exceeds T = {self.T}")):
            if np.any(bad):
                idx = tuple(np.argwhere(bad)[0])
                raise HypothesisError(f"sample {idx[0]}, summand {idx[1]}: {what}",
                                      self._witness(summands_hat, idx))


def sample_bounded_tpsd(spec: BoundedTpsdEnsemble, rng: np.random.Generator) -> DenseTensor3:
    return spec.sample(rng)


class CenteredBoundedEnsemble(BoundedTpsdEnsemble):
    """``X_i = Y_i - E Y_i`` for bounded TPSD ``Y_i``.

    Each ``X_i`` is centered with ``lambda_max(X_i) <= T`` and ``||X_i|| <= T``.
    The same summands satisfy the subexponential moment hypothesis with
    ``A_i^2 = E X_i^2`` and scale ``T / 3``: the centered eigenvalues ``c``
    obey ``|c| <= T`` so ``E c^k <= T^(k-2) E c^2 <= k!/2 (T/3)^(k-2) E c^2``
    because ``3^(k-2) <= k!/2`` for every ``k >= 2``.
    """

    kind = "centered-bounded"

    @property
    def T_subexp(self) -> float:
        return self.T / 3.0

    def centered_moment_hat(self, k: int) -> np.ndarray:
        """Exact ``E X_i^k`` transform slices, shape ``(n_sum, p, m, m)``."""
        return self._assemble(self.eig_scale ** k * law_central_moment(self.law, k, self.q))

    @property
    def sigma2(self) -> float:
        w = slice_eigvalsh(self.centered_moment_hat(2).sum(axis=0))
        return float(np.abs(w).max())

    def sample_summands_hat(self, rng, size):
        u = _draw_law(self.law, self.q, rng, (size, self.n_sum, self.p, self.m))
        centered = self.eig_scale[None] * (u - law_raw_moment(self.law, 1, self.q))
        return self._assemble(centered)

    def moment_slack(self, k_max: int = 6) -> float:
        """Smallest eigenvalue of ``k!/2 T_sub^(k-2) A_i^2 - E X_i^k`` over ``i`` and ``2 <= k <= k_max``.

        Both sides share the eigenbasis of ``X_i`` so the comparison is
        entrywise on the centered eigenvalue moments.
        """
        a2 = self.eig_scale ** 2 * law_central_moment(self.law, 2, self.q)
        worst = math.inf
        for k in range(2, k_max + 1):
            rhs = math.factorial(k) / 2 * self.T_subexp ** (k - 2) * a2
            lhs = self.eig_scale ** k * law_central_moment(self.law, k, self.q)
            worst = min(worst, float((rhs - lhs).min()))
        return worst

    def check_hypotheses(self, summands_hat):
        w = slice_eigvalsh(summands_hat)
        tol = HYPOTHESIS_TOL * max(1.0, self.T)
        high = w[..., -1].max(axis=-1)
        norm = np.abs(w).max(axis=(-1, -2))
        for bad, what in ((high > self.T + tol, f"lambda_max exceeds T = {self.T}"),
                          (norm > self.T + tol, f"norm exceeds T = {self.T}")):
            if np.any(bad):
                idx = tuple(np.argwhere(bad)[0])
                raise HypothesisError(f"sample {idx[0]}, summand {idx[1]}: {what}",
                                      self._witness(summands_hat, idx))


# --- martingale differences ------------------------------------------------

class MartingaleEnsemble(Ensemble):
    """Adapted differences ``X_i = eps_i h_i c_i A_i``.

    ``eps_i`` is a fresh Rademacher sign, ``h_i`` the sign of the trace of the
    running sum and ``c_i`` equals 1 when that trace is nonnegative and
    ``damping`` otherwise.  ``h_i`` and ``c_i`` depend on the past only, so
    each difference is conditionally centered and ``X_i^2 = c_i^2 A_i^2 <= A_i^2``.
    """

    kind = "martingale"

    def __init__(self, caps: Sequence[DenseTensor3], damping: float = 1.0):
        caps = list(caps)
        if not caps:
            raise ValueError("need at least one difference cap")
        _check_hermitian_list(caps, "cap")
        if not 0.0 < damping <= 1.0:
            raise ValueError(f"damping must lie in (0, 1], got {damping}")
        self.caps = caps
        self.damping = float(damping)
        self.m = self.n = caps[0].m
        self.p = caps[0].p
        self.n_sum = len(caps)
        self._hat = _stack_hat(caps)
        self._cap_sq = self._hat @ self._hat
        self.sigma2 = series_sigma2(caps)

    def sample_summands_hat(self, rng, size):
        out = np.empty((size, self.n_sum, self.p, self.m, self.m), dtype=complex)
        running = np.zeros((size, self.p, self.m, self.m), dtype=complex)
        for i in range(self.n_sum):
            tr = np.trace(running, axis1=-2, axis2=-1).sum(axis=-1).real
            positive = tr >= 0
            h = np.where(positive, 1.0, -1.0)
            c = np.where(positive, 1.0, self.damping)
            eps = rademacher(rng, size)
            out[:, i] = (eps * h * c)[:, None, None, None] * self._hat[i]
            running += out[:, i]
        return out

    def check_hypotheses(self, summands_hat):
        gap = self._cap_sq[None] - summands_hat @ summands_hat
        idx = _psd_violation(gap)
        if idx is not None:
            raise HypothesisError(f"sample {idx[0]}, step {idx[1]}: X_i^2 is not dominated by A_i^2",
                                  self._witness(summands_hat, idx))


def sample_martingale_path(spec: MartingaleEnsemble, rng: np.random.Generator) -> List[DenseTensor3]:
    """Partial sums ``X_0 = 0, X_1, ..., X_n`` of one martingale path."""
    diffs = spec.sample_summands_hat(rng, 1)[0]
    partial = np.concatenate([np.zeros((1,) + diffs.shape[1:], dtype=complex), np.cumsum(diffs, axis=0)])
    return [DenseTensor3._wrap(from_slices(s)) for s in partial]


# --- bounded differences ----------------------------------------------------

class McDiarmidEnsemble(Ensemble):
    """``F(x) = sum_i x_i B_i`` over independent Rademacher inputs.

    Flipping input ``i`` changes ``F`` by ``2 x_i B_i`` whose square is
    ``A_i^2`` with ``A_i = 2 B_i``; ``E F = 0``.
    """

    kind = "mcdiarmid"

    def __init__(self, caps: Sequence[DenseTensor3]):
        caps = list(caps)
        if not caps:
            raise ValueError("need at least one cap")
        _check_hermitian_list(caps, "cap")
        self.caps = caps
        self.m = self.n = caps[0].m
        self.p = caps[0].p
        self.n_sum = len(caps)
        self._hat = _stack_hat(caps)
        self.difference_caps = [b * 2.0 for b in caps]
        self.sigma2 = series_sigma2(self.difference_caps)

    def draw_inputs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rademacher(rng, (size, self.n_sum))

    def evaluate_hat(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("ti,ipmn->tpmn", np.atleast_2d(x), self._hat)

    def sample_summands_hat(self, rng, size):
        x = self.draw_inputs(rng, size)
        return x[:, :, None, None, None] * self._hat[None]

    def sample_hat(self, rng, size):
        return self.evaluate_hat(self.draw_inputs(rng, size))

    def check_hypotheses(self, summands_hat):
        # flipping input i moves F by twice the i-th summand
        diff = 2.0 * summands_hat
        a = 2.0 * self._hat
        idx = _psd_violation(a @ a - diff @ diff)
        if idx is not None:
            raise HypothesisError(f"sample {idx[0]}, input {idx[1]}: bounded difference violated",
                                  self._witness(summands_hat, idx))


def sample_mcdiarmid_function(caps: Sequence[DenseTensor3],
                              rng: np.random.Generator) -> Tuple[np.ndarray, DenseTensor3]:
    ens = McDiarmidEnsemble(caps)
    x = ens.draw_inputs(rng, 1)
    return x[0], DenseTensor3._wrap(from_slices(ens.evaluate_hat(x)[0]))


# --- finite-support random tensors -----------------------------------------

@dataclass(frozen=True, eq=False)
class FiniteSupportTensorRV:
    """A random tensor taking ``atoms[a]`` with probability ``probs[a]``."""

    atoms: Tuple[DenseTensor3, ...]
    probs: np.ndarray = field(default=None)

    def __post_init__(self):
        atoms = tuple(self.atoms)
        if not atoms:
            raise ValueError("need at least one atom")
        probs = np.full(len(atoms), 1.0 / len(atoms)) if self.probs is None else np.asarray(self.probs, float)
        if probs.shape != (len(atoms),):
            raise ValueError(f"{len(atoms)} atoms but {probs.size} probabilities")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        shape = atoms[0].data.shape
        for i, a in enumerate(atoms):
            if a.data.shape != shape:
                raise ShapeError(f"atom {i} has shape {a.shape}, expected {atoms[0].shape}")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    @property
    def shape(self):
        return self.atoms[0].shape

    def mean(self) -> DenseTensor3:
        return exact_expectation(self)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return all(is_hermitian(a, tol) for a in self.atoms)

    def centered(self) -> "FiniteSupportTensorRV":
        mu = self.mean()
        return FiniteSupportTensorRV(tuple(a - mu for a in self.atoms), self.probs)

    def scaled(self, c: float) -> "FiniteSupportTensorRV":
        return FiniteSupportTensorRV(tuple(a * c for a in self.atoms), self.probs)

    @classmethod
    def symmetric(cls, x: DenseTensor3) -> "FiniteSupportTensorRV":
        """The two-point law ``+x`` or ``-x`` with equal probability."""
        return cls((x, -x), np.array([0.5, 0.5]))


def exact_expectation(rv: FiniteSupportTensorRV,
                      f: Optional[Callable[[DenseTensor3], DenseTensor3]] = None) -> DenseTensor3:
    """``E f(X) = sum_a p_a f(atom_a)``; ``f`` defaults to the identity."""
    values = rv.atoms if f is None else [f(a) for a in rv.atoms]
    return tensor_sum(v * float(w) for v, w in zip(values, rv.probs))


def random_finite_support(m: int, p: int, n_atoms: int, rng: np.random.Generator,
                          complex: bool = False, scale: float = 1.0) -> FiniteSupportTensorRV:
    atoms = tuple(random_hermitian(m, p, rng, complex=complex, scale=scale) for _ in range(n_atoms))
    return FiniteSupportTensorRV(atoms, rng.dirichlet(np.ones(n_atoms)))
