#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

import math

import numpy as np
import pytest

from zlab import exceptions
from zlab.grid import (
    Field,
    Grid,
    field_from_bytes,
    field_to_bytes,
    fft_forward,
    fft_inverse,
    load_field,
    save_field,
)


@pytest.mark.parametrize("d, n, L", [(5, 8, 1.0), (2, 12, 1.0), (2, 2, 1.0), (2, 8, 0)])
def test_invalid_grid(d, n, L):
    with pytest.raises(exceptions.InvalidGrid):
        Grid(d, n, L)


def test_memory_budget():
    with pytest.raises(exceptions.MemoryBudgetExceeded):
        Grid(4, 1024)


def test_grid_geometry(grid2):
    assert grid2.shape == (32, 32)
    assert grid2.kappa == pytest.approx(1 / 8)
    assert grid2.radius[0, 0] == 0
    assert grid2.radius.max() <= math.sqrt(2) * grid2.L / 2 + 1e-12
    assert np.all(np.abs(grid2.lattice[0]) <= 16)


def test_delta_has_constant_spectrum(grid2):
    delta = grid2.field()
    delta.data[0, 0] = 1.0
    spectrum = fft_forward(delta).data
    assert np.allclose(spectrum, 1 / 32, atol=1e-15)


def test_round_trip_and_parseval(field2):
    spectral = field2.spectral()
    back = spectral.physical()
    assert np.max(np.abs(back.data - field2.data)) <= 1e-12 * np.max(
        np.abs(field2.data)
    )
    assert spectral.l2_norm() == pytest.approx(field2.l2_norm(), rel=1e-12)


def test_non_finite_rejected(grid2):
    field = grid2.field()
    field.data[3, 4] = np.nan
    with pytest.raises(exceptions.NonFiniteField):
        fft_forward(field)


def test_representation_checks(field2):
    with pytest.raises(exceptions.InvalidRepresentation):
        fft_inverse(field2)

    with pytest.raises(exceptions.InvalidRepresentation):
        fft_forward(field2.spectral())

    with pytest.raises(exceptions.InvalidRepresentation):
        Field(field2.grid, field2.data, "momentum")


def test_grid_mismatch(field2):
    other = Grid(2, 16, field2.grid.L).field()
    with pytest.raises(exceptions.GridMismatch):
        field2 + other

    with pytest.raises(exceptions.GridMismatch):
        Field(field2.grid, np.zeros(7))


def test_norms_of_constant(grid2):
    one = Field(grid2, np.ones(grid2.shape))
    assert one.l2_norm() == pytest.approx(grid2.L)
    assert one.lp_norm(4) == pytest.approx(math.sqrt(grid2.L))
    assert one.lp_norm(np.inf) == 1
    assert one.grad_norm() == pytest.approx(0, abs=1e-12)
    assert one.h1_norm() == pytest.approx(one.l2_norm(), rel=1e-12)


def test_container_round_trip(field2, tmp_path):
    spectral = field2.spectral()
    restored = field_from_bytes(field_to_bytes(spectral))
    assert restored.grid == spectral.grid
    assert restored.rep == "spectral"
    assert np.array_equal(restored.data, spectral.data)

    path = str(tmp_path / "field.bin")
    save_field(field2, path)
    assert np.array_equal(load_field(path).data, field2.data)


@pytest.mark.parametrize("cut", [3, 30, -8])
def test_container_rejects_damage(field2, cut):
    content = field_to_bytes(field2)
    with pytest.raises(exceptions.InvalidFieldFile):
        field_from_bytes(content[:cut])


def test_container_rejects_magic(field2):
    content = bytearray(field_to_bytes(field2))
    content[0:4] = b"ABCD"
    with pytest.raises(exceptions.InvalidFieldFile):
        field_from_bytes(bytes(content))
