"""Dense third-order tensors and the T-product.

A tensor of shape ``m x n x p`` is stored as a complex ``numpy`` array with
the tube (third) index last.  The T-product is circular convolution of tubes
combined with matrix multiplication of frontal slices; it is computed by
transforming every tube with an unnormalized DFT, multiplying the ``p``
transform slices as ordinary matrices and transforming back.
"""
from __future__ import annotations

from dataclasses import dataclass
from os import PathLike
from typing import Iterable, Union

import numpy as np

Number = Union[int, float, complex]


class ShapeError(ValueError):
    """Raised when tensor shapes are incompatible for an operation."""


@dataclass(frozen=True)
class TensorShape:
    m: int
    n: int
    p: int

    def __post_init__(self):
        for name in ("m", "n", "p"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")

    def __iter__(self):
        return iter((self.m, self.n, self.p))

    def __str__(self):
        return f"{self.m}x{self.n}x{self.p}"


class DenseTensor3:
    """Immutable complex ``m x n x p`` tensor.

    ``a @ b`` is the T-product, ``a.H`` the conjugate T-transpose.  Addition,
    subtraction and scalar multiplication act entrywise.
    """

    __slots__ = ("_data",)

    def __init__(self, entries):
        data = np.array(entries, dtype=complex)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or 0 in data.shape:
            raise ShapeError(f"expected a non-empty 3-d array, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("tensor entries must be finite")
        data.setflags(write=False)
        self._data = data

    @classmethod
    def _wrap(cls, data: np.ndarray) -> "DenseTensor3":
        # internal constructor for arrays already known to be valid
        obj = cls.__new__(cls)
        data = np.ascontiguousarray(data, dtype=complex)
        data.setflags(write=False)
        obj._data = data
        return obj

    @property
    def data(self) -> np.ndarray:
        """Read-only view of the entries, indexed ``[i, j, k]`` (0-based)."""
        return self._data

    @property
    def shape(self) -> TensorShape:
        return TensorShape(*self._data.shape)

    @property
    def m(self) -> int:
        return self._data.shape[0]

    @property
    def n(self) -> int:
        return self._data.shape[1]

    @property
    def p(self) -> int:
        return self._data.shape[2]

    @property
    def is_square(self) -> bool:
        return self.m == self.n

    @property
    def H(self) -> "DenseTensor3":
        return conj_transpose(self)

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self._data.imag) <= tol))

    def frobenius(self) -> float:
        return float(np.linalg.norm(self._data.ravel()))

    def transform(self) -> "TransformedTensor":
        return dft_along_tubes(self)

    def __matmul__(self, other: "DenseTensor3") -> "DenseTensor3":
        return t_product(self, other)

    def _check_same(self, other: "DenseTensor3", op: str):
        if self._data.shape != other._data.shape:
            raise ShapeError(f"cannot {op} tensors of shapes {self.shape} and {other.shape}")

    def __add__(self, other):
        if not isinstance(other, DenseTensor3):
            return NotImplemented
        self._check_same(other, "add")
        return DenseTensor3._wrap(self._data + other._data)

    def __sub__(self, other):
        if not isinstance(other, DenseTensor3):
            return NotImplemented
        self._check_same(other, "subtract")
        return DenseTensor3._wrap(self._data - other._data)

    def __neg__(self):
        return DenseTensor3._wrap(-self._data)

    def __mul__(self, scalar):
        if isinstance(scalar, DenseTensor3):
            return NotImplemented
        return DenseTensor3._wrap(self._data * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return DenseTensor3._wrap(self._data / complex(scalar))

    def __eq__(self, other):
        if not isinstance(other, DenseTensor3):
            return NotImplemented
        return self._data.shape == other._data.shape and bool(np.array_equal(self._data, other._data))

    __hash__ = None

    def allclose(self, other: "DenseTensor3", rtol: float = 1e-10, atol: float = 1e-12) -> bool:
        if self._data.shape != other._data.shape:
            return False
        return bool(np.allclose(self._data, other._data, rtol=rtol, atol=atol))

    def __repr__(self):
        return f"DenseTensor3(shape={self.shape})"


@dataclass(frozen=True, eq=False)
class TransformedTensor:
    """A tensor after the DFT along tubes.

    ``slices`` has shape ``(p, m, n)``: ``slices[k]`` is transform slice ``k``.
    """

    slices: np.ndarray

    def __post_init__(self):
        s = np.array(self.slices, dtype=complex)
        if s.ndim != 3:
            raise ShapeError(f"slices must have shape (p, m, n), got {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "slices", s)

    @property
    def m(self) -> int:
        return self.slices.shape[1]

    @property
    def n(self) -> int:
        return self.slices.shape[2]

    @property
    def p(self) -> int:
        return self.slices.shape[0]

    def inverse(self) -> DenseTensor3:
        return inverse_dft(self)


def as_tensor(value) -> DenseTensor3:
    if isinstance(value, DenseTensor3):
        return value
    return DenseTensor3(value)


def to_slices(data: np.ndarray) -> np.ndarray:
    """DFT along the last axis of ``(..., m, n, p)`` -> ``(..., p, m, n)``."""
    return np.moveaxis(np.fft.fft(data, axis=-1), -1, -3)


def from_slices(slices: np.ndarray) -> np.ndarray:
    """Inverse of :func:`to_slices`."""
    return np.fft.ifft(np.moveaxis(slices, -3, -1), axis=-1)


def dft_along_tubes(t: DenseTensor3) -> TransformedTensor:
    return TransformedTensor(to_slices(t.data))


def inverse_dft(tt: TransformedTensor) -> DenseTensor3:
    return DenseTensor3._wrap(from_slices(tt.slices))


def t_product(a: DenseTensor3, b: DenseTensor3) -> DenseTensor3:
    """T-product ``a * b`` of an ``m x n x p`` and an ``n x q x p`` tensor."""
    if a.n != b.m or a.p != b.p:
        raise ShapeError(f"T-product needs a: m x n x p and b: n x q x p, got {a.shape} and {b.shape}")
    return DenseTensor3._wrap(from_slices(to_slices(a.data) @ to_slices(b.data)))


def conj_transpose(a: DenseTensor3) -> DenseTensor3:
    """Conjugate T-transpose: conjugate-transpose each frontal slice and
    reverse the order of slices ``2..p``."""
    d = np.conj(np.swapaxes(a.data, 0, 1))
    idx = (-np.arange(a.p)) % a.p
    return DenseTensor3._wrap(d[:, :, idx])


def zeros(m: int, n: int, p: int) -> DenseTensor3:
    TensorShape(m, n, p)
    return DenseTensor3._wrap(np.zeros((m, n, p), dtype=complex))


def ones(m: int, n: int, p: int) -> DenseTensor3:
    TensorShape(m, n, p)
    return DenseTensor3._wrap(np.ones((m, n, p), dtype=complex))


def identity(m: int, p: int) -> DenseTensor3:
    TensorShape(m, m, p)
    d = np.zeros((m, m, p), dtype=complex)
    d[:, :, 0] = np.eye(m)
    return DenseTensor3._wrap(d)


def fdiag(values: Iterable[float], p: int) -> DenseTensor3:
    """Tensor whose first frontal slice is ``diag(values)``; other slices zero."""
    v = np.asarray(list(values), dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("fdiag needs a non-empty 1-d sequence of values")
    TensorShape(v.size, v.size, p)
    d = np.zeros((v.size, v.size, p), dtype=complex)
    d[:, :, 0] = np.diag(v)
    return DenseTensor3._wrap(d)


def basis_tensor(i: int, j: int, k: int, shape) -> DenseTensor3:
    """Unit tensor with a single one at 1-based position ``(i, j, k)``."""
    m, n, p = TensorShape(*shape)
    if not (1 <= i <= m and 1 <= j <= n and 1 <= k <= p):
        raise IndexError(f"index ({i}, {j}, {k}) outside shape {m}x{n}x{p}")
    d = np.zeros((m, n, p), dtype=complex)
    d[i - 1, j - 1, k - 1] = 1.0
    return DenseTensor3._wrap(d)


def dilation(c: DenseTensor3) -> DenseTensor3:
    """Hermitian dilation ``[[O, c], [c^H, O]]`` of an ``m x n x p`` tensor."""
    m, n, p = c.shape
    d = np.zeros((m + n, m + n, p), dtype=complex)
    d[:m, m:, :] = c.data
    d[m:, :m, :] = conj_transpose(c).data
    return DenseTensor3._wrap(d)


def hadamard(a: DenseTensor3, b: DenseTensor3) -> DenseTensor3:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"Hadamard product needs equal shapes, got {a.shape} and {b.shape}")
    return DenseTensor3._wrap(a.data * b.data)


def trace(a: DenseTensor3) -> complex:
    """Sum of the traces of all ``p`` transform slices, i.e. ``p * tr(A_1)``."""
    if not a.is_square:
        raise ShapeError(f"trace needs a square tensor, got {a.shape}")
    return complex(a.p * np.trace(a.data[:, :, 0]))


def tensor_sum(tensors: Iterable[DenseTensor3]) -> DenseTensor3:
    tensors = list(tensors)
    if not tensors:
        raise ValueError("cannot sum an empty sequence of tensors")
    out = tensors[0].data.copy()
    for t in tensors[1:]:
        if t.data.shape != out.shape:
            raise ShapeError(f"cannot add tensors of shapes {tensors[0].shape} and {t.shape}")
        out += t.data
    return DenseTensor3._wrap(out)


# --- literal file format -------------------------------------------------
#
#   m n p
#   i j k re im      (m*n*p lines, 1-based indices)


def format_tensor(t: DenseTensor3) -> str:
    lines = [f"{t.m} {t.n} {t.p}"]
    for i in range(t.m):
        for j in range(t.n):
            for k in range(t.p):
                z = t.data[i, j, k]
                lines.append(f"{i + 1} {j + 1} {k + 1} {float(z.real)!r} {float(z.imag)!r}")
    return "\n".join(lines) + "\n"


def parse_tensor(text: str) -> DenseTensor3:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ValueError("empty tensor literal")
    try:
        m, n, p = (int(x) for x in rows[0])
    except ValueError as exc:
        raise ValueError(f"bad header line {' '.join(rows[0])!r}; expected 'm n p'") from exc
    shape = TensorShape(m, n, p)
    if len(rows) - 1 != m * n * p:
        raise ValueError(f"expected {m * n * p} entry lines for shape {shape}, found {len(rows) - 1}")
    data = np.zeros((m, n, p), dtype=complex)
    seen = np.zeros((m, n, p), dtype=bool)
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 5:
            raise ValueError(f"line {lineno}: expected 'i j k re im'")
        i, j, k = (int(x) for x in row[:3])
        if not (1 <= i <= m and 1 <= j <= n and 1 <= k <= p):
            raise ValueError(f"line {lineno}: index ({i}, {j}, {k}) outside shape {shape}")
        if seen[i - 1, j - 1, k - 1]:
            raise ValueError(f"line {lineno}: duplicate entry ({i}, {j}, {k})")
        seen[i - 1, j - 1, k - 1] = True
        data[i - 1, j - 1, k - 1] = complex(float(row[3]), float(row[4]))
    return DenseTensor3(data)


def save_tensor(t: DenseTensor3, path: Union[str, PathLike]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_tensor(t))


def load_tensor(path: Union[str, PathLike]) -> DenseTensor3:
    with open(path, encoding="utf-8") as fh:
        return parse_tensor(fh.read())
