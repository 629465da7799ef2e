#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL


class ZlabException(Exception):
    'Base class for "public" exceptions.'

    @property
    def exit_code(self) -> int:
        """Process exit code used by the command line interface.

        :rtype: int
        """
        return 2


class ZlabUnwantedException(ZlabException):
    "Base class for exceptions that require attention."

    @property
    def exit_code(self) -> int:
        return 3


class InvalidConfig(ZlabException):
    pass


class InvalidGrid(InvalidConfig):
    pass


class MemoryBudgetExceeded(InvalidGrid):
    pass


class InvalidNoiseModel(InvalidConfig):
    pass


class InvalidNormSpec(InvalidConfig):
    pass


class InvalidPath(InvalidConfig):
    pass


class GridMismatch(ZlabException):
    pass


class InvalidRepresentation(ZlabException):
    pass


class FrameMismatch(ZlabException):
    pass


class OffMeshTime(ZlabException):
    pass


class InvalidProjector(ZlabException):
    pass


class BlockTooShort(ZlabException):
    pass


class InvalidFieldFile(ZlabException):
    pass


class NonFiniteField(ZlabUnwantedException):
    pass


class NumericalAbort(ZlabUnwantedException):
    pass
