# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT

from esfstl.utilities import (
    datasets,
    reports,
    streams,
)
