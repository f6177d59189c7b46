# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT
"""Command line front end: esf_stl configfile k m theta replicates seed [options]"""
import argparse
import logging
import math
import sys
import time

import numpy as np

import esfstl
from esfstl.coalescent import exact, genealogy, importance, rejection, stats
from esfstl.core.errors import DataError, EsfError, ParameterError
from esfstl.utilities import datasets, reports, streams

logger = logging.getLogger(__name__)

MODES = ["is", "reject3", "reject4", "exact", "stats"]

# grid used by the rejection modes when no -t is given
DEFAULT_GRID = (0.1, 0.5, 1.0, 1.5)

# largest sample for which the exact recursion over configurations is run
EXACT_SAMPLE_LIMIT = 20

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _time_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a comma separated list of times") from None
    if not values or any(v < 0 or math.isnan(v) for v in values):
        raise argparse.ArgumentTypeError(f"times must be nonnegative, got '{text}'")
    return values


def build_parser():
    parser = argparse.ArgumentParser(
        prog="esf_stl",
        description="Ancestral lines, segregating sites and haplotype histories of a sample",
    )
    parser.add_argument("configfile", help="haplotype count file, or builtin:hammer / builtin:tbl1y")
    parser.add_argument("k", type=int, help="number of haplotypes in the file")
    parser.add_argument("m", type=int, help="number of segregating sites")
    parser.add_argument("theta", type=float, help="scaled mutation rate")
    parser.add_argument("replicates", type=int, help="paths (is) or accepted draws (reject3, reject4)")
    parser.add_argument("seed", type=int, help="unsigned 64-bit master seed")
    parser.add_argument("-g", "--growth", type=float, metavar="BETA",
                        help="exponential growth rate (default: constant size)")
    parser.add_argument("-a", "--age-info", action="store_true", help="report allele ages")
    parser.add_argument("-t", "--time", dest="times", type=_time_list, action="append", default=[],
                        metavar="TIME[,TIME...]", help="report the configuration at these times (repeatable)")
    parser.add_argument("--mode", choices=MODES, default="is", help="default: is")
    parser.add_argument("--format", choices=reports.valid_formats, default="text", help="default: text")
    parser.add_argument("--output", help="report file (text, json) or file prefix (csv)")
    parser.add_argument("--prior", help="theta prior for the rejection modes, e.g. uniform:0,10 "
                                        "(default: fixed at theta)")
    parser.add_argument("--workers", type=int, help="worker processes")
    parser.add_argument("--chunk-size", type=int, help="replicates per unit of work")
    parser.add_argument("--config", help="JSON settings file")
    parser.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, default=None,
                        help="handler level for package logging")
    parser.add_argument("--pi", type=float, help="mean pairwise differences (stats mode)")
    parser.add_argument("--timing", action="store_true", help="add wall time to the report")
    return parser


def _replay_command(argv):
    """The argument vector minus --workers, which never changes the result"""
    replay = []
    skip = False
    for arg in argv:
        if skip:
            skip = False
            continue
        if arg == "--workers":
            skip = True
            continue
        if arg.startswith("--workers="):
            continue
        replay.append(arg)
    return replay


def _time_model(args):
    if args.growth is None or args.growth == 0:
        return genealogy.TimeModel.constant()
    return genealogy.TimeModel.exp_growth(args.growth)


def _grid(args, default=()):
    times = sorted({t for group in args.times for t in group})
    return tuple(times) if times else tuple(default)


def _estimate_rows(names, estimate):
    means = np.atleast_1d(estimate.mean)
    errors = np.atleast_1d(estimate.std_error)
    return [[name, float(m), float(e)] for name, m, e in zip(names, means, errors)]


def run_importance(args, config, bundle):
    sample = importance.ObservedSample(config.counts, args.m)
    time_model = _time_model(args)
    grid = _grid(args)
    sampler = importance.ImportanceSampler(sample, args.theta, time_model, grid)
    result = sampler.run(args.replicates, args.seed)

    likelihood = result.likelihood
    bundle.add_estimate("likelihood", likelihood.unordered, likelihood.unordered_std_error, "unordered p(n;s)")
    bundle.add_estimate("log likelihood", likelihood.log_unordered, likelihood.relative_error, "SE is relative")
    bundle.add_estimate("age-labelled likelihood", likelihood.mean, likelihood.std_error)
    bundle.add_estimate("effective sample size", likelihood.effective_sample_size)
    if time_model.is_constant:
        bundle.add_estimate("ESF probability", math.exp(exact.esf_log_probability(config.counts, args.theta)),
                            note="exact")
    bundle.add_estimate("TMRCA", result.tmrca.mean, result.tmrca.std_error)

    ranks = range(1, sample.s + 1)
    bundle.add_table(reports.Table("mutation_times", "Mean mutation times", ["rank", "time", "se"],
                                   _estimate_rows(ranks, result.mutation_times)))
    losses = _estimate_rows(range(1, sample.k), result.loss_times)
    losses.append(["TMRCA", float(result.tmrca.mean), float(result.tmrca.std_error)])
    bundle.add_table(reports.Table("loss_times", "Mean haplotype loss times", ["rank", "time", "se"], losses))
    bundle.add_table(reports.Table("coalescence_times", "Mean coalescence times", ["rank", "time", "se"],
                                   _estimate_rows(range(1, sample.n), result.coalescence_times), in_text=False))

    if args.age_info:
        ages = reports.Table("allele_ages", "Mean allele ages", ["haplotype", "count", "age", "se"])
        for label, (count, age, se) in enumerate(zip(sample.counts, np.atleast_1d(result.allele_ages.mean),
                                                     np.atleast_1d(result.allele_ages.std_error)), start=1):
            ages.rows.append([label, count, float(age), float(se)])
        bundle.add_table(ages)
        groups = reports.Table("group_ages", "Mean age by multiplicity", ["count", "haplotypes", "age"])
        spectrum = config.spectrum()
        for count, age in result.group_mean_ages().items():
            groups.rows.append([count, spectrum.count(count), age])
        bundle.add_table(groups)

    if grid:
        summary = reports.Table("config_at_time", "Ancestral configuration",
                                ["t", "K", "K_se", "S", "S_se", "A", "A_se"])
        counts = reports.Table("counts_at_time", "Mean haplotype counts",
                               ["t"] + [str(label) for label in range(1, sample.k + 1)])
        lines = reports.Table("lines_at_time", "Distribution of ancestral lines", ["t", "lines", "probability", "se"])
        for snapshot in result.configs:
            summary.rows.append([snapshot.time, snapshot.haplotypes.mean, snapshot.haplotypes.std_error,
                                 snapshot.segregating_sites.mean, snapshot.segregating_sites.std_error,
                                 snapshot.lines.mean, snapshot.lines.std_error])
            counts.rows.append([snapshot.time] + [float(c) for c in np.atleast_1d(snapshot.counts.mean)])
            distribution = np.atleast_1d(snapshot.line_distribution.mean)
            errors = np.atleast_1d(snapshot.line_distribution.std_error)
            for a in np.flatnonzero(distribution > 0):
                lines.rows.append([snapshot.time, int(a), float(distribution[a]), float(errors[a])])
        bundle.add_table(summary)
        bundle.add_table(counts)
        bundle.add_table(lines)


def run_rejection(args, config, bundle):
    prior = rejection.ThetaPrior.parse(args.prior) if args.prior else rejection.ThetaPrior.fixed(args.theta)
    grid = _grid(args, DEFAULT_GRID)
    runner = rejection.run_algorithm4 if args.mode == "reject4" else rejection.run_algorithm3
    result = runner(config.n, args.m, prior, _time_model(args), grid, args.replicates, args.seed)
    summary = result.summary()
    bundle.metadata["prior"] = prior.describe()

    bundle.add_estimate("acceptance rate", summary.acceptance_rate)
    bundle.add_estimate("proposals", summary.proposals)
    bundle.add_estimate("theta", summary.theta_mean, summary.theta_se, "posterior mean")
    bundle.add_estimate("TMRCA", summary.tmrca_mean, summary.tmrca_se, "given S_n = s")

    columns = ["t", "A", "A_se"] + (["S", "S_se"] if summary.standing_mean is not None else [])
    table = reports.Table("grid", "Posterior means given S_n = s", columns)
    lines = reports.Table("lines_at_time", "Distribution of ancestral lines", ["t", "lines", "probability", "se"])
    for index, t in enumerate(grid):
        row = [t, float(summary.ancestors_mean[index]), float(summary.ancestors_se[index])]
        if summary.standing_mean is not None:
            row += [float(summary.standing_mean[index]), float(summary.standing_se[index])]
        table.rows.append(row)
        distribution = result.ancestor_distribution(index)
        for a in np.flatnonzero(distribution > 0):
            p = float(distribution[a])
            lines.rows.append([t, int(a), p, math.sqrt(p * (1 - p) / result.replicates)])
    bundle.add_table(table)
    bundle.add_table(lines)


def run_exact(args, config, bundle):
    if not _time_model(args).is_constant:
        raise ParameterError("exact laws are only available for a constant population size")
    n, s, theta = config.n, args.m, args.theta
    bundle.add_estimate("P(S_n = s)", exact.seg_sites_pmf(n, theta, s))
    bundle.add_estimate("ESF probability", math.exp(exact.esf_log_probability(config.counts, theta)))
    if n <= EXACT_SAMPLE_LIMIT:
        bundle.add_estimate("likelihood", exact.unordered_sample_probability(config.counts, s, theta),
                            note="unordered p(n;s)")
        bundle.add_estimate("age-labelled likelihood", exact.sample_probability(config.counts, s, theta))
    else:
        logger.info("skipping the exact sample probability for n=%d > %d", n, EXACT_SAMPLE_LIMIT)

    grid = _grid(args)
    if grid:
        table = reports.Table("grid", "Mean ancestral lines", ["t", "E[A_n(t)]", "E[A_n(t) | S_n = s]"])
        for t in grid:
            unconditional = exact.ancestors_falling_moment(exact.LineageLawParams(n, 0.0, t), 1)
            table.rows.append([t, unconditional, exact.cond_mean_ancestors(n, theta, t, s)])
        bundle.add_table(table)


def run_stats(args, config, bundle):
    summary = stats.summarize(config.spectrum(), args.m, args.pi, args.theta)
    bundle.add_estimate("Watterson theta", summary.watterson)
    bundle.add_estimate("Ewens theta", summary.ewens, note="maximum likelihood")
    bundle.add_estimate("E[alpha_1]", summary.expected_singletons, note=f"exact, at theta={summary.theta:g}")
    for name, (observed, mean, tail) in (("singletons", summary.singleton_test),
                                         ("singletons+doubletons", summary.low_frequency_test)):
        bundle.add_estimate(f"{name} observed", observed)
        bundle.add_estimate(f"{name} Poisson mean", mean, note=f"Poisson limit, at theta={summary.theta:g}")
        bundle.add_estimate(f"{name} P(Z >= observed)", tail)
    if summary.tajimas_d is not None:
        bundle.add_estimate("Tajima's D", summary.tajimas_d)


RUNNERS = {
    "is": run_importance,
    "reject3": run_rejection,
    "reject4": run_rejection,
    "exact": run_exact,
    "stats": run_stats,
}


def _attach_handler(level):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    if level:
        handler.setLevel(level)
    esfstl.logger.addHandler(handler)
    return handler


def run_cli(argv=None, stdout=None):
    """Run one esf_stl invocation

    Returns
    -------
    int
        0 on success, 2 for usage errors, 3 for data errors, 4 when a
        numerical guard trips and 1 for any other package error.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code

    handler = _attach_handler(args.log_level)
    started = time.perf_counter()
    try:
        esfstl.settings.configure(config_path=args.config, workers=args.workers, chunk_size=args.chunk_size,
                                  log_level=args.log_level)
        if args.replicates < 1:
            raise ParameterError(f"replicates must be at least 1, got {args.replicates}")
        if not 0 <= args.seed < streams.SEED_LIMIT:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {args.seed}")
        if args.theta <= 0:
            raise ParameterError(f"theta must be positive, got {args.theta}")
        if args.m < 0:
            raise ParameterError(f"the number of segregating sites must be nonnegative, got {args.m}")

        config = datasets.parse_dataset(args.configfile)
        if args.k != config.k:
            raise DataError(f"{args.configfile} holds {config.k} haplotypes but k={args.k} was given")

        bundle = reports.ReportBundle()
        bundle.metadata.update({
            "mode": args.mode,
            "model": _time_model(args).describe(),
            "theta": args.theta,
            "n": config.n,
            "k": config.k,
            "s": args.m,
            "replicates": args.replicates,
            "seed": args.seed,
            "chunk size": esfstl.settings.chunk_size,
            "version": esfstl.__version__,
            "command": _replay_command(argv),
        })
        RUNNERS[args.mode](args, config, bundle)
        if args.timing:
            bundle.metadata["wall time"] = time.perf_counter() - started

        rendered = reports.emit_report(bundle, args.format, args.output)
        if args.format != "csv" and not args.output:
            stdout.write(rendered)
    except EsfError as e:
        logger.debug("run failed", exc_info=True)
        sys.stderr.write(f"esf_stl: error: {e}\n")
        return e.exit_code
    finally:
        esfstl.logger.removeHandler(handler)
    return 0


def main():
    sys.exit(run_cli())
