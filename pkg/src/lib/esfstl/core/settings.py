# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT
import json
import logging

import esfstl
from esfstl.core.errors import ParameterError

__all__ = ["Settings"]


class Settings:
    """Numerical and execution settings shared by the whole package

    The "esfstl" package holds an instance of this class which is shared by all
    subpackages and modules. It is instantiated with working defaults, so
    calling "configure" is only needed to change them.

    Typical use would not be creating your own instance of this class, but instead
    calling the "configure" method on the existing, shared esfstl.settings object.
    The "configure" method takes the same parameters as the class "__init__".


    Parameters
    ----------
    config_path : str, optional
        Path to a JSON settings file. Keys are any of the keyword parameters
        below; explicit keyword arguments win over values from the file.
    workers : int
        Number of worker processes used for replicate runs.
        Default is 1 (run in the calling process).
    chunk_size : int
        Replicates per unit of work. Accumulators are merged chunk by chunk
        in index order, so this, not the worker count, fixes the result.
        Default is 1000.
    cancellation_digits : float
        Decimal digits of cancellation tolerated in an alternating sum before
        a PrecisionLossError is raised.
        Default is 12.
    absolute_tolerance : float
        Probability-scale floor and the absolute tolerance of adaptive
        quadrature. An alternating sum whose rounding-error bound exceeds it
        fails the guard; cancellation is measured against it when the true
        value is tiny.
        Default is 1e-12.
    precision_fallback : bool
        If True, every guarded series that trips the guard is recomputed in
        extended precision with mpmath instead of raising. Series for samples
        of at most 100 are always recomputed.
        Default is False.
    max_proposals : int
        Rejection samplers give up after this many proposals, counted over
        the whole run, bring no acceptance.
        Default is 100000000.
    log_level : str or int
        Specify the package's default log level.
        Default is "WARNING"
    """

    logger = logging.getLogger(__name__).getChild(__qualname__)

    _keys = (
        "workers",
        "chunk_size",
        "cancellation_digits",
        "absolute_tolerance",
        "precision_fallback",
        "max_proposals",
        "log_level",
    )

    @staticmethod
    def parse_config_file(config_path):
        try:
            with open(config_path, "r") as config_file:
                config_info = json.load(config_file)
        except Exception as e:
            raise ParameterError(f"Unable to read settings file: {config_path}: {e}") from None

        if not isinstance(config_info, dict):
            raise ParameterError(f"Settings file must hold a JSON object: {config_path}")

        unknown = sorted(set(config_info) - set(Settings._keys))
        if unknown:
            raise ParameterError(f"Unknown keys in settings file {config_path}: {', '.join(unknown)}")

        return config_info

    def __init__(self, config_path=None, workers=1, chunk_size=1000, cancellation_digits=12.0,
                 absolute_tolerance=1e-12, precision_fallback=False, max_proposals=100_000_000,
                 log_level='WARNING'):
        self.log_level = log_level
        self._workers = 1
        self._chunk_size = 1000
        self._precision_fallback = False
        self.cancellation_digits = None
        self.absolute_tolerance = None
        self.max_proposals = None

        self.configure(config_path=config_path, workers=workers, chunk_size=chunk_size,
                       cancellation_digits=cancellation_digits, absolute_tolerance=absolute_tolerance,
                       precision_fallback=precision_fallback, max_proposals=max_proposals,
                       log_level=log_level)

    @property
    def version(self):
        return esfstl.__version__

    @property
    def current_config(self):
        return {key: getattr(self, key) for key in self._keys}

    @property
    def log_level(self):
        return self._log_level

    @log_level.setter
    def log_level(self, level):
        if isinstance(level, str):
            level = level.upper()
        self._log_level = level
        logging.getLogger("esfstl").setLevel(self.log_level)

    @property
    def workers(self):
        return self._workers

    @workers.setter
    def workers(self, count):
        if int(count) < 1:
            raise ParameterError(f"workers must be at least 1, got {count}")
        self._workers = int(count)

    @property
    def chunk_size(self):
        return self._chunk_size

    @chunk_size.setter
    def chunk_size(self, size):
        if int(size) < 1:
            raise ParameterError(f"chunk_size must be at least 1, got {size}")
        self._chunk_size = int(size)

    @property
    def precision_fallback(self):
        return self._precision_fallback

    @precision_fallback.setter
    def precision_fallback(self, is_enabled):
        self._precision_fallback = bool(is_enabled)
        if is_enabled:
            self.logger.warning("Precision fallback is enabled. Guarded series are recomputed in extended precision.")

    def configure(self, config_path=None, workers=None, chunk_size=None, cancellation_digits=None,
                  absolute_tolerance=None, precision_fallback=None, max_proposals=None, log_level=None):
        options = {}
        if config_path:
            options.update(self.parse_config_file(config_path))

        explicit = {
            "workers": workers,
            "chunk_size": chunk_size,
            "cancellation_digits": cancellation_digits,
            "absolute_tolerance": absolute_tolerance,
            "precision_fallback": precision_fallback,
            "max_proposals": max_proposals,
            "log_level": log_level,
        }
        options.update({key: value for key, value in explicit.items() if value is not None})

        for key, value in options.items():
            if key in ("cancellation_digits", "absolute_tolerance") and float(value) <= 0:
                raise ParameterError(f"{key} must be positive, got {value}")
            if key == "max_proposals" and int(value) < 1:
                raise ParameterError(f"max_proposals must be at least 1, got {value}")
            setattr(self, key, value)
