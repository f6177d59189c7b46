# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT

import numpy as np
import pytest

import esfstl

HAMMER = (21, 23, 853, 188, 75, 1, 68, 31, 67, 217)


@pytest.fixture(autouse=True)
def restore_settings():
    saved = dict(esfstl.settings.current_config)
    yield esfstl.settings
    esfstl.settings.configure(**saved)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def within_se(value, target, se, factor=5.0):
    """True when value is within factor standard errors of target"""
    return abs(value - target) <= factor * se
