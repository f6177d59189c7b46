# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT

from esfstl.coalescent import (
    exact,
    genealogy,
    stats,
    rejection,
    importance,
)
