# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT
"""Haplotype count files and bundled datasets."""
from dataclasses import dataclass
import logging
import re

from esfstl.coalescent.stats import FrequencySpectrum
from esfstl.core.errors import DataError

logger = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"

# Y-chromosome haplotype frequencies, input order kept for per-haplotype output
HAMMER_COUNTS = (21, 23, 853, 188, 75, 1, 68, 31, 67, 217)


@dataclass(frozen=True)
class HaplotypeConfig:
    """Haplotype counts; a haplotype's label is its position in ``counts``

    Parameters
    ----------
    counts : tuple of int
    source : str
        Where the counts came from.
    """

    counts: tuple
    source: str = ""

    @property
    def n(self):
        return sum(self.counts)

    @property
    def k(self):
        return len(self.counts)

    def spectrum(self):
        return FrequencySpectrum.from_counts(self.counts)


def builtin_datasets():
    return {
        "hammer": HAMMER_COUNTS,
        "tbl1y": tuple(FrequencySpectrum.tbl1y().counts()),
    }


def parse_counts(text, source="<text>"):
    """Parse whitespace-separated positive integers; '#' starts a comment

    Raises
    ------
    DataError
        Naming the line and column of a bad token, a nonpositive count, or
        a file with no counts.
    """
    counts = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0]
        for match in re.finditer(r"\S+", content):
            token, column = match.group(), match.start() + 1
            try:
                value = int(token)
            except ValueError:
                raise DataError(f"{source}:{line_number}:{column}: '{token}' is not an integer count") from None
            if value < 1:
                raise DataError(f"{source}:{line_number}:{column}: haplotype count {value} is not positive")
            counts.append(value)
    if not counts:
        raise DataError(f"{source}: no haplotype counts found")
    return HaplotypeConfig(tuple(counts), source)


def parse_dataset(path):
    """Read a haplotype count file, or a bundled dataset named "builtin:<name>"

    Parameters
    ----------
    path : str

    Returns
    -------
    HaplotypeConfig
    """
    if path.startswith(BUILTIN_PREFIX):
        name = path[len(BUILTIN_PREFIX):]
        datasets = builtin_datasets()
        if name not in datasets:
            raise DataError(f"Unknown bundled dataset '{name}'. Acceptable values: {', '.join(datasets)}")
        return HaplotypeConfig(datasets[name], path)

    try:
        with open(path, "r") as dataset_file:
            text = dataset_file.read()
    except OSError as e:
        raise DataError(f"Unable to read dataset {path}: {e.strerror}") from None

    config = parse_counts(text, path)
    logger.info("read %d haplotypes, n=%d, from %s", config.k, config.n, path)
    return config
