# -*- coding: UTF-8 -*-
#!/usr/bin/env python

import argparse
import os
import re
import sys
from collections import OrderedDict

from PyQt5.QtCore import QSettings

from tailfit.conf import SETTINGS_FILE, THREADS_ENV, __description__, __title__
from tailfit.defaults import (
    CATEGORIES, CATEGORY_MIME, FAMILIES, GRID_POINTS, KMIN_HI_KB, KMIN_LO_KB, LOG_BASE,
    MIN_TAIL_COUNT, SEED, THREADS,
)
from tailfit.distributions import ExponentialModel, LogNormalModel, PowerLawModel
from tailfit.errors import (
    ConvergenceError, DomainError, EmptySelectionError, FeasibilityError, IngestionError,
    NoFitError, TailFitError,
)
from tailfit.fitting import ccdf_rows, compare_models, kmin_grid, loglog_quadratic, model_ccdf_rows
from tailfit.graphstats import (
    accumulate_hosts, fit_indegree_slope, parse_host_manifest, rank_correlation, slope_report,
)
from tailfit.helpers import Logger
from tailfit.histogram import SizeHistogram, truncate
from tailfit.ingestion import ManifestReader, accumulate, scan_filesystem, write_manifest
from tailfit.maxent import (
    MaxEntModel, MomentTargets, shannon_entropy, solve_lagrange, synthesize_corpus,
    verify_stationarity,
)
from tailfit.utils import OutputWriter
from tailfit.version import __version__

logger = Logger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FIT = 3

GB = 2 ** 30
HIST_CSV = re.compile(r"^hist_(.+)\.csv$")


def load_settings(path):
    """Typed values from an INI settings file; missing keys are absent."""
    values = {}
    if not path or not os.path.isfile(path):
        return values
    settings = QSettings(path, QSettings.IniFormat)
    for key, name, kind in (
            ("threads", "threads", int),
            ("seed", "seed", int),
            ("kminLoKb", "kmin_lo", int),
            ("kminHiKb", "kmin_hi", int),
            ("gridPoints", "grid_points", int),
            ("capGb", "cap_gb", float),
            ("minTailCount", "min_tail_count", int)):
        if settings.contains(key):
            values[name] = settings.value(key, None, type=kind)
    logger.debug("Settings from {}: {}".format(path, values))
    return values


class RunConfig(object):
    """
    Everything one subcommand run needs. Values come from the command line,
    then TAILFIT_THREADS (threads only), then the settings file, then the
    package defaults.
    """

    def __init__(self, subcommand, inputs=(), category=None, kmin_lo=KMIN_LO_KB, kmin_hi=KMIN_HI_KB,
                 cap_gb=10.0, seed=SEED, out=".", family="all", by="category", threads=THREADS,
                 grid_points=GRID_POINTS, min_tail_count=MIN_TAIL_COUNT):
        self.subcommand = subcommand
        self.inputs = list(inputs)
        self.category = category
        self.kmin_lo = kmin_lo
        self.kmin_hi = kmin_hi
        self.cap_gb = cap_gb
        self.seed = seed
        self.out = out
        self.family = family
        self.by = by
        self.threads = threads
        self.grid_points = grid_points
        self.min_tail_count = min_tail_count
        self.validate()

    def __repr__(self):
        return "<RunConfig {} {}>".format(self.subcommand, dict(self.as_dict()))

    @classmethod
    def from_args(cls, args, environ=None):
        environ = os.environ if environ is None else environ
        settings = load_settings(args.settings if args.settings is not None else SETTINGS_FILE)
        values = {}
        for name in ("seed", "kmin_lo", "kmin_hi", "cap_gb", "grid_points", "min_tail_count"):
            flag = getattr(args, name, None)
            if flag is not None:
                values[name] = flag
            elif name in settings:
                values[name] = settings[name]
        if args.threads is not None:
            values["threads"] = args.threads
        elif environ.get(THREADS_ENV):
            try:
                values["threads"] = int(environ[THREADS_ENV])
            except ValueError:
                raise DomainError("{} must be an integer, got {!r}".format(THREADS_ENV, environ[THREADS_ENV]))
        elif "threads" in settings:
            values["threads"] = settings["threads"]
        return cls(
            args.command,
            inputs=getattr(args, "input", None) or (),
            category=getattr(args, "category", None),
            out=args.out,
            family=getattr(args, "family", "all"),
            by=getattr(args, "by", "category"),
            **values
        )

    def validate(self):
        if not 0 < self.kmin_lo <= self.kmin_hi:
            raise DomainError("k_min grid bounds must satisfy 0 < lo <= hi, got {} and {}".format(
                self.kmin_lo, self.kmin_hi))
        if not self.cap_gb > 0:
            raise DomainError("size cap must be positive, got {} GB".format(self.cap_gb))
        if self.threads < 1:
            raise DomainError("need at least one thread, got {}".format(self.threads))
        if self.grid_points < 1:
            raise DomainError("need at least one grid point")
        if self.min_tail_count < 1:
            raise DomainError("minimum tail count must be >= 1")
        if self.family != "all" and self.family not in FAMILIES:
            raise DomainError("unknown family {!r}".format(self.family))

    @property
    def families(self):
        return list(FAMILIES) if self.family == "all" else [self.family]

    @property
    def cap_bytes(self):
        return int(self.cap_gb * GB)

    def grid(self):
        return kmin_grid(self.kmin_lo, self.kmin_hi, self.grid_points)

    def as_dict(self):
        """The settings that shape results; threads and paths are left out."""
        return OrderedDict([
            ("kmin_lo_kb", self.kmin_lo),
            ("kmin_hi_kb", self.kmin_hi),
            ("grid_points", self.grid_points),
            ("cap_gb", self.cap_gb),
            ("min_tail_count", self.min_tail_count),
            ("families", self.families),
            ("by", self.by),
        ])


def _file_label(label):
    return label.replace("/", "_")


class InputStats(object):

    def __init__(self):
        self.readers = []
        self.skipped = []

    def as_dict(self):
        return OrderedDict([
            ("accepted", sum(r.accepted for r in self.readers)),
            ("malformed", sum(r.malformed for r in self.readers)),
            ("skipped_paths", len(self.skipped)),
        ])


def iter_records(paths, stats, record_type=None):
    """Records from directories (walked) and manifests (plain or gzip), in argument order."""
    for path in paths:
        if os.path.isdir(path):
            if record_type is not None:
                raise IngestionError("{} is a directory, expected a host manifest".format(path))
            for record in scan_filesystem(path, skipped=stats.skipped):
                yield record
            continue
        try:
            stream = open(path, "rb")
        except OSError as e:
            raise IngestionError("cannot open {}: {}".format(path, e))
        with stream:
            if record_type is None:
                reader = ManifestReader(stream, name=path)
            else:
                reader = parse_host_manifest(stream, name=path)
            stats.readers.append(reader)
            for record in reader:
                yield record


def _select(histograms, category):
    if category is None:
        return histograms
    if category not in histograms:
        raise EmptySelectionError(category, list(histograms))
    return OrderedDict([(category, histograms[category])])


def cmd_hist(config, writer):
    stats = InputStats()
    corpus = accumulate(iter_records(config.inputs, stats), config.by, config.threads)
    histograms = _select(corpus.histograms(), config.category)
    summaries = [s for s in corpus.summaries() if s.category in histograms]
    for label, hist in histograms.items():
        writer.write_csv("hist_{}.csv".format(_file_label(label)), ["k", "count"], hist.rows())
    header = ["category", "file_count", "share_percent", "files_per_host", "mean_kb", "median_kb", "median_mode"]
    writer.write_csv("summary.csv", header, [list(s.as_dict().values()) for s in summaries])
    report = OrderedDict()
    report["version"] = __version__
    report["records"] = corpus.records
    report["hosts"] = corpus.hosts
    report["input"] = stats.as_dict()
    report["categories"] = [s.as_dict() for s in summaries]
    writer.write_json("summary.json", report)
    for s in summaries:
        print("{:<24} {:>10} files {:6.2f}%  {}".format(s.category, s.file_count, s.share, s.triple()))
    return EXIT_OK


def load_histograms(config):
    """Histograms per label from hist_<label>.csv files and record inputs, merged."""
    stats = InputStats()
    histograms = OrderedDict()
    record_paths = []
    for path in config.inputs:
        match = HIST_CSV.match(os.path.basename(path))
        if match and os.path.isfile(path):
            with open(path, "r", newline="") as f:
                hist = SizeHistogram.from_csv(f)
            label = match.group(1)
            histograms[label] = histograms[label] + hist if label in histograms else hist
        else:
            record_paths.append(path)
    if record_paths:
        corpus = accumulate(iter_records(record_paths, stats), config.by, config.threads)
        for label, hist in corpus.histograms().items():
            histograms[label] = histograms[label] + hist if label in histograms else hist
    ordered = OrderedDict()
    for label in [c for c in CATEGORIES if c in histograms] + sorted(set(histograms) - set(CATEGORIES)):
        ordered[label] = histograms[label]
    return ordered, stats


def cmd_fit(config, writer):
    histograms, stats = load_histograms(config)
    histograms = _select(histograms, config.category)
    if not histograms:
        raise EmptySelectionError(config.category or "any", [])
    grid = config.grid()
    report = OrderedDict()
    report["version"] = __version__
    report["config"] = config.as_dict()
    report["input"] = stats.as_dict()
    categories = OrderedDict()
    failed = []
    for label, hist in histograms.items():
        hist = truncate(hist, config.cap_bytes)
        comparison = compare_models(hist, grid, config.families, config.min_tail_count, config.threads)
        entry = OrderedDict()
        entry["total"] = hist.total
        entry.update(comparison.as_dict())
        try:
            entry["loglog_quadratic"] = loglog_quadratic(hist)
        except TailFitError as e:
            entry["loglog_quadratic"] = OrderedDict([("error", str(e))])
        categories[label] = entry
        name = _file_label(label)
        writer.write_csv("ccdf_{}.csv".format(name), ["k", "ccdf"], ccdf_rows(hist))
        for family, fit in comparison.fits.items():
            writer.write_csv("ccdf_{}_{}.csv".format(name, family), ["k", "ccdf"], model_ccdf_rows(fit, hist))
        if comparison.selected is None:
            failed.append(label)
            for family, error in comparison.failures.items():
                sys.stderr.write("{} {}: {}\n".format(label, family, error))
            continue
        best = comparison.selected
        ratio = comparison.rss_ratio
        print("{:<24} {:<12} k_min={:<7} rss={:.4g} ratio={} {}".format(
            label, best.family, best.k_min, best.rss,
            "n/a" if ratio is None else "{:.3g}".format(ratio),
            " ".join("{}={:.4f}".format(k, v) for k, v in best.params.items())))
    report["categories"] = categories
    writer.write_json("fit_report.json", report)
    if failed:
        logger.error("No family could be fitted for {}".format(", ".join(failed)))
        return EXIT_FIT
    return EXIT_OK


def build_synth_model(args):
    model = args.model
    if model == "powerlaw":
        return PowerLawModel(_required(args, "alpha"), args.kmin)
    if model == "lognormal":
        return LogNormalModel(_required(args, "mu"), _required(args, "sigma"), args.kmin)
    if model == "exponential":
        return ExponentialModel(_required(args, "lam"), args.kmin)
    return MaxEntModel(args.lambda_s, args.lambda_1, args.lambda_2, args.kmin, args.kmax)


def _required(args, name):
    value = getattr(args, name)
    if value is None:
        raise DomainError("--{} is required for the {} model".format(name, args.model))
    return value


def cmd_synth(config, writer, args):
    model = build_synth_model(args)
    if args.count < 0:
        raise DomainError("--count must be >= 0, got {}".format(args.count))
    name = "manifest.jsonl.gz" if args.gzip else "manifest.jsonl"
    records = synthesize_corpus(model, args.count, config.seed, args.synth_category, args.hosts)
    with writer.open_binary(name, compress=args.gzip) as stream:
        count = write_manifest(records, stream)
    logger.info("Synthesized {} records from {!r} with seed {}".format(count, model, config.seed))
    print("{} records -> {}".format(count, writer.path(name)))
    return EXIT_OK


def cmd_graph(config, writer, args):
    stats = InputStats()
    hosts = accumulate_hosts(iter_records(config.inputs, stats, record_type="host"), args.log_base, config.threads)
    indegree = hosts.indegree
    joint = hosts.joint
    writer.write_csv("indegree.csv", ["k", "count"], indegree.histogram.rows())
    writer.write_csv("joint.csv", joint.csv_header(), joint.csv_rows())
    report = OrderedDict()
    report["version"] = __version__
    report["input"] = stats.as_dict()
    report["hosts"] = joint.total
    report["rank_correlation"] = rank_correlation(joint)
    code = EXIT_OK
    try:
        fit = fit_indegree_slope(indegree, min_count=config.min_tail_count, threads=config.threads)
    except NoFitError as e:
        report["slope"] = OrderedDict([("error", str(e))])
        sys.stderr.write("in-degree: {}\n".format(e))
        code = EXIT_FIT
    else:
        report["slope"] = slope_report(fit, indegree.zero_degree)
        print("in-degree slope {:.4f} (k_min={}, {} hosts)".format(report["slope"]["slope"], fit.k_min, joint.total))
    writer.write_json("graph_report.json", report)
    return code


def cmd_maxent_solve(config, writer, args):
    if args.support_hi is None:
        raise DomainError("--support-hi is required")
    support = (args.support_lo, args.support_hi)
    targets = MomentTargets(args.e_s, args.e_log, args.e_log2)
    model = solve_lagrange(targets, support)
    check = verify_stationarity(model, support, trials=args.trials, seed=config.seed)
    report = OrderedDict()
    report["version"] = __version__
    report["support"] = list(support)
    report["targets"] = targets.as_dict()
    report["multipliers"] = model.params()
    report["moments"] = model.moments()
    report["entropy"] = shannon_entropy(model.pmf_range(*support))
    report["stationarity"] = check._asdict()
    writer.write_json("maxent.json", report)
    print("lambda_s={lambda_s:.10g} lambda_1={lambda_1:.10g} lambda_2={lambda_2:.10g}".format(**model.params()))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging, repeatable")
    common.add_argument("--log-file", metavar="PATH", help="also log everything to PATH")
    common.add_argument("--settings", metavar="PATH", help="INI settings file (default {})".format(SETTINGS_FILE))
    common.add_argument("--threads", type=int, help="worker threads (env {})".format(THREADS_ENV))
    common.add_argument("--seed", type=int, help="random seed (default {})".format(SEED))
    common.add_argument("--out", metavar="DIR", default=".", help="output directory")

    inputs = argparse.ArgumentParser(add_help=False)
    inputs.add_argument("--input", metavar="PATH", action="append", default=[],
                        help="directory, manifest or (fit) hist_<category>.csv; repeatable")
    inputs.add_argument("--category", metavar="NAME", help="only this category")
    inputs.add_argument("--by", choices=["category", "type"], default="category",
                        help="group by MIME category or full MIME type")

    fitting = argparse.ArgumentParser(add_help=False)
    fitting.add_argument("--kmin-lo", type=int, metavar="KB", help="smallest k_min (default {})".format(KMIN_LO_KB))
    fitting.add_argument("--kmin-hi", type=int, metavar="KB", help="largest k_min (default {})".format(KMIN_HI_KB))
    fitting.add_argument("--grid-points", type=int, help="k_min candidates (default {})".format(GRID_POINTS))
    fitting.add_argument("--cap-gb", type=float, metavar="N", help="drop sizes above N GB (default 10)")
    fitting.add_argument("--min-tail-count", type=int, help="least counts at or above k_min")
    fitting.add_argument("--family", choices=FAMILIES + ["all"], default="all")

    parser = argparse.ArgumentParser(prog=__title__, description=__description__)
    parser.add_argument("--version", action="version", version="%(prog)s {}".format(__version__))
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    sub.add_parser("hist", parents=[common, inputs], help="per-category size histograms and summary")
    sub.add_parser("fit", parents=[common, inputs, fitting], help="fit and compare tail models")

    synth = sub.add_parser("synth", parents=[common], help="write a synthetic manifest")
    synth.add_argument("--model", choices=FAMILIES + ["maxent"], default="powerlaw")
    synth.add_argument("--alpha", type=float)
    synth.add_argument("--mu", type=float)
    synth.add_argument("--sigma", type=float)
    synth.add_argument("--lam", type=float)
    synth.add_argument("--lambda-s", type=float, default=0.0)
    synth.add_argument("--lambda-1", type=float, default=0.0)
    synth.add_argument("--lambda-2", type=float, default=0.0)
    synth.add_argument("--kmin", type=int, default=1)
    synth.add_argument("--kmax", type=int)
    synth.add_argument("-n", "--count", type=int, default=1000)
    synth.add_argument("--hosts", type=int, default=1)
    synth.add_argument("--category", dest="synth_category", choices=sorted(CATEGORY_MIME), default="application")
    synth.add_argument("--gzip", action="store_true", help="write manifest.jsonl.gz")

    graph = sub.add_parser("graph", parents=[common], help="in-degree slope and joint histogram")
    graph.add_argument("--input", metavar="PATH", action="append", default=[], help="host manifest; repeatable")
    graph.add_argument("--log-base", type=float, default=LOG_BASE)
    graph.add_argument("--min-tail-count", type=int)

    solve = sub.add_parser("maxent-solve", parents=[common], help="multipliers from target moments")
    solve.add_argument("--support-lo", type=int, default=1)
    solve.add_argument("--support-hi", type=int)
    solve.add_argument("--e-s", type=float, help="target E[k]")
    solve.add_argument("--e-log", type=float, help="target E[ln k]")
    solve.add_argument("--e-log2", type=float, help="target E[ln^2 k]")
    solve.add_argument("--trials", type=int, default=100)
    return parser


def run(args):
    config = RunConfig.from_args(args)
    writer = OutputWriter(config.out)
    logger.debug("Running {!r}".format(config))
    try:
        if args.command == "hist":
            return cmd_hist(config, writer)
        if args.command == "fit":
            return cmd_fit(config, writer)
        if args.command == "synth":
            return cmd_synth(config, writer, args)
        if args.command == "graph":
            return cmd_graph(config, writer, args)
        return cmd_maxent_solve(config, writer, args)
    except (DomainError, FeasibilityError, IngestionError, OSError):
        writer.remove_partial()
        raise


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = Logger.configure(args.verbose, args.log_file)
    try:
        return run(args)
    except (EmptySelectionError, NoFitError, ConvergenceError) as e:
        sys.stderr.write("{}: {}\n".format(__title__, e))
        return EXIT_FIT
    except (TailFitError, OSError) as e:
        sys.stderr.write("{}: {}\n".format(__title__, e))
        return EXIT_INPUT
    finally:
        if handler is not None:
            Logger.release(handler)
