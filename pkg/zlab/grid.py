#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

import logging
import math
from functools import cached_property
from typing import Callable, Tuple, Union

import numpy as np

from . import exceptions
from .constants import DEFAULT_L, MEMORY_BUDGET

logger = logging.getLogger(__name__)

_REPS = ("physical", "spectral")

_HEADER = np.dtype(
    [("magic", "S4"), ("d", "<u4"), ("n", "<u4"), ("L", "<f8"), ("rep", "<u1")]
)
_MAGIC = b"ZLF1"


class Grid:
    """Periodic box of side L in d dimensions sampled with n points per axis.

    Coordinates are stored in FFT order (minimum image convention), so the
    origin sits at index 0 and |x| is the periodic distance to it.
    """

    def __init__(self, d: int, n: int, L: float = DEFAULT_L):
        if d not in (1, 2, 3, 4):
            raise exceptions.InvalidGrid(f"Dimension must be 1-4, found {d}")

        if n < 4 or n & (n - 1):
            raise exceptions.InvalidGrid(f"n must be a power of two >= 4, found {n}")

        if not math.isfinite(L) or L <= 0:
            raise exceptions.InvalidGrid(f"L must be positive, found {L}")

        self.d = int(d)
        self.n = int(n)
        self.L = float(L)

        if self.nbytes > MEMORY_BUDGET:
            raise exceptions.MemoryBudgetExceeded(
                f"{self} needs {self.nbytes} bytes per field (budget {MEMORY_BUDGET})"
            )

    def __repr__(self):
        return f"<Grid d={self.d} n={self.n} L={self.L:.6g}>"

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented

        return (self.d, self.n, self.L) == (other.d, other.n, other.L)

    def __hash__(self):
        return hash((self.d, self.n, self.L))

    def __getstate__(self):
        return {"d": self.d, "n": self.n, "L": self.L}

    def __setstate__(self, state):
        self.__dict__.update(state)

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    @property
    def nbytes(self) -> int:
        return self.size * 16

    @property
    def spacing(self) -> float:
        return self.L / self.n

    @property
    def cell(self) -> float:
        "Volume element of the discrete quadrature."
        return self.spacing**self.d

    @property
    def volume(self) -> float:
        return self.L**self.d

    @property
    def kappa(self) -> float:
        "Fundamental wavenumber 2π/L."
        return 2 * math.pi / self.L

    @property
    def lattice_max(self) -> float:
        "Largest |k| over the grid, in units of the fundamental wavenumber."
        return math.sqrt(self.d) * self.n / 2

    @cached_property
    def axis(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, d=1.0 / self.n) * self.spacing

    @cached_property
    def coords(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.d), indexing="ij", sparse=True))

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(sum(x**2 for x in self.coords)) * np.ones(self.shape)

    @cached_property
    def lattice(self) -> Tuple[np.ndarray, ...]:
        "Integer wavenumber indices per axis (sparse, broadcastable)."
        freqs = np.fft.fftfreq(self.n, d=1.0 / self.n)
        return tuple(np.meshgrid(*([freqs] * self.d), indexing="ij", sparse=True))

    @cached_property
    def wavenumbers(self) -> Tuple[np.ndarray, ...]:
        return tuple(self.kappa * k for k in self.lattice)

    @cached_property
    def ksq(self) -> np.ndarray:
        return sum(xi**2 for xi in self.wavenumbers) * np.ones(self.shape)

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(self.ksq)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        mask = np.ones(self.shape, dtype=bool)
        for k in self.lattice:
            mask = mask & (np.abs(k) <= self.n / 3)

        return mask

    def field(self, data=None, rep: str = "physical") -> "Field":
        if data is None:
            data = np.zeros(self.shape, dtype=np.complex128)

        return Field(self, data, rep)

    def sample(self, func: Callable) -> "Field":
        "Evaluate func(*coords) on the grid."
        return Field(self, np.broadcast_to(func(*self.coords), self.shape).copy())


class Field:
    "Complex scalar function on a grid, in physical or spectral representation."

    __array_priority__ = 100

    def __init__(self, grid: Grid, data, rep: str = "physical"):
        if rep not in _REPS:
            raise exceptions.InvalidRepresentation(f"Unknown representation: {rep}")

        data = np.asarray(data, dtype=np.complex128)
        if data.shape != grid.shape:
            raise exceptions.GridMismatch(
                f"Data shape {data.shape} does not match {grid}"
            )

        self.grid = grid
        self.data = data
        self.rep = rep

    def __repr__(self):
        return f"<Field {self.rep} on {self.grid}>"

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    def copy(self) -> "Field":
        return Field(self.grid, self.data.copy(), self.rep)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))

    def physical(self) -> "Field":
        if self.rep == "physical":
            return self

        return fft_inverse(self)

    def spectral(self) -> "Field":
        if self.rep == "spectral":
            return self

        return fft_forward(self)

    @property
    def values(self) -> np.ndarray:
        "Physical values (no copy when already physical)."
        return self.physical().data

    @property
    def coefficients(self) -> np.ndarray:
        return self.spectral().data

    def _check_grid(self, other: "Field"):
        if other.grid != self.grid:
            raise exceptions.GridMismatch(f"{self.grid} != {other.grid}")

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.cell * np.sum(np.abs(self.data) ** 2)))

    def hs_norm(self, s: float = 1.0) -> float:
        "Inhomogeneous Sobolev norm ‖⟨∇⟩^s f‖."
        weight = (1.0 + self.grid.ksq) ** s
        coeffs = self.coefficients
        return float(np.sqrt(self.grid.cell * np.sum(weight * np.abs(coeffs) ** 2)))

    def h1_norm(self) -> float:
        return self.hs_norm(1.0)

    def grad_norm(self) -> float:
        "Homogeneous ‖∇f‖."
        coeffs = self.coefficients
        return float(
            np.sqrt(self.grid.cell * np.sum(self.grid.ksq * np.abs(coeffs) ** 2))
        )

    def lp_norm(self, p: float) -> float:
        values = np.abs(self.values)
        if math.isinf(p):
            return float(values.max())

        return float((self.grid.cell * np.sum(values**p)) ** (1.0 / p))

    def real(self) -> "Field":
        return Field(self.grid, self.values.real.astype(np.complex128))

    def conj(self) -> "Field":
        return Field(self.grid, np.conj(self.values))

    def _operand(self, other):
        if isinstance(other, Field):
            self._check_grid(other)
            return other.values

        return other

    def __add__(self, other):
        if isinstance(other, Field) and other.rep == self.rep:
            self._check_grid(other)
            return Field(self.grid, self.data + other.data, self.rep)

        return Field(self.grid, self.values + self._operand(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Field) and other.rep == self.rep:
            self._check_grid(other)
            return Field(self.grid, self.data - other.data, self.rep)

        return Field(self.grid, self.values - self._operand(other))

    def __neg__(self):
        return Field(self.grid, -self.data, self.rep)

    def __mul__(self, other):
        if np.isscalar(other):
            return Field(self.grid, self.data * other, self.rep)

        return Field(self.grid, self.values * self._operand(other))

    __rmul__ = __mul__


def fft_forward(field: Field) -> Field:
    """Physical to spectral representation (unitary DFT).

    :raises exceptions.NonFiniteField
    :raises exceptions.InvalidRepresentation
    """
    if field.rep != "physical":
        raise exceptions.InvalidRepresentation("Field is already spectral")

    if not field.is_finite():
        raise exceptions.NonFiniteField("Non-finite values in physical data")

    return Field(field.grid, np.fft.fftn(field.data, norm="ortho"), "spectral")


def fft_inverse(field: Field) -> Field:
    """Spectral to physical representation (unitary DFT).

    :raises exceptions.NonFiniteField
    :raises exceptions.InvalidRepresentation
    """
    if field.rep != "spectral":
        raise exceptions.InvalidRepresentation("Field is already physical")

    if not field.is_finite():
        raise exceptions.NonFiniteField("Non-finite values in spectral data")

    return Field(field.grid, np.fft.ifftn(field.data, norm="ortho"), "physical")


def field_to_bytes(field: Field) -> bytes:
    header = np.array(
        [(_MAGIC, field.grid.d, field.grid.n, field.grid.L, _REPS.index(field.rep))],
        dtype=_HEADER,
    )
    return header.tobytes() + field.data.astype("<c16").tobytes(order="C")


def field_from_bytes(content: bytes) -> Field:
    """Inverse of field_to_bytes.

    :raises exceptions.InvalidFieldFile
    """
    if len(content) < _HEADER.itemsize:
        raise exceptions.InvalidFieldFile("Truncated header")

    header = np.frombuffer(content[: _HEADER.itemsize], dtype=_HEADER)[0]
    if header["magic"] != _MAGIC or header["rep"] >= len(_REPS):
        raise exceptions.InvalidFieldFile("Not a field container")

    try:
        grid = Grid(int(header["d"]), int(header["n"]), float(header["L"]))
    except exceptions.InvalidGrid as error:
        raise exceptions.InvalidFieldFile(f"Bad header: {error}") from None

    body = content[_HEADER.itemsize :]
    if len(body) != grid.size * 16:
        raise exceptions.InvalidFieldFile(
            f"Expected {grid.size * 16} data bytes, found {len(body)}"
        )

    data = np.frombuffer(body, dtype="<c16").reshape(grid.shape)
    return Field(grid, data.astype(np.complex128), _REPS[int(header["rep"])])


def save_field(field: Field, path: str):
    with open(path, "wb") as f:
        f.write(field_to_bytes(field))

    logger.debug("Saved %s: %s", field, path)


def load_field(path: str) -> Field:
    with open(path, "rb") as f:
        return field_from_bytes(f.read())


SymbolLike = Union[np.ndarray, Callable, float, complex]
