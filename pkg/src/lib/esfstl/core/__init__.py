# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT

from .errors import *
from .settings import *
