# -*- coding: utf-8 -*-
"""Error classes shared by the library and the command line.

Each class carries the process exit code the CLI reports for it.
Modules declare narrower subclasses next to the code that raises them.
"""


class WalkfieldError(RuntimeError):
    exit_code = 1


class ConfigError(WalkfieldError):
    exit_code = 2


class DataError(WalkfieldError):
    exit_code = 3


class NumericalError(WalkfieldError):
    exit_code = 4
