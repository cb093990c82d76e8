"""Command line front end.

Exit codes: 0 = H0 accepted (or command succeeded), 2 = H0 rejected / a FIPS
test failed, 1 = error. Errors are printed to stderr as a one-line JSON object
``{"error": <code>, "message": <text>}``.
"""

import argparse
import csv
import datetime
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__, _rng, fips, image_io
from .config import read_rho_ratio, write_rho_ratio
from .entropy import entropies_from_counts, entropy_moments, sample_mean_moments
from .errors import BlockEntropyError, UsageError
from .fetch import fetch, sha256_file
from .random_image import estimate_rho_ratio, gen_true_random
from .sampler import BlockSpec, tile_histograms
from .shuffle import ShuffleKey, ShuffleMode, shuffle, unshuffle
from .ztest import TestConfig, critical_value, run_test, type1_upper_bound

REPORT_SCHEMA = "blockentropy.report/1"
CSV_COLUMNS = ["image", "M", "N", "L", "K", "alpha", "seed", "h_bar", "z", "h_c", "decision", "gamma"]

EXIT_ACCEPT = 0
EXIT_ERROR = 1
EXIT_REJECT = 2

TABLE_SIZES = (2, 4, 8, 16, 32)
TABLE_LEVELS = (2, 256)
TABLE_K = tuple(k * k for k in range(6, 21))
TABLE_ALPHA = (0.05, 0.01, 0.001)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _block(text):
    try:
        rows, _, cols = text.lower().partition("x")
        return BlockSpec(int(rows), int(cols or rows))
    except (ValueError, BlockEntropyError):
        raise argparse.ArgumentTypeError(f"expected a block size like 16x16, got {text!r}") from None


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = (
        datetime.datetime.fromtimestamp(int(epoch), datetime.timezone.utc)
        if epoch
        else datetime.datetime.now(datetime.timezone.utc)
    )
    return now.isoformat(timespec="seconds")


def _dump_json(obj, out):
    out.write(json.dumps(obj, indent=2, allow_nan=False) + "\n")


# -- tables --------------------------------------------------------------------


def format_table(kind, sizes=TABLE_SIZES, levels=TABLE_LEVELS, ks=TABLE_K, alphas=TABLE_ALPHA,
                 block=BlockSpec(16, 16), table_levels=256, rho_ratio=1.6, fmt="text"):
    """Render one of the reference tables as text (space separated) or CSV."""
    rows = []
    if kind == "moments":
        header = ["size"]
        for L in levels:
            header += [f"L={L}:mu_H", f"L={L}:sigma_H"]
        for s in sizes:
            row = [f"{s}-by-{s}"]
            for L in levels:
                m = entropy_moments(s * s, L)
                row += [f"{m.mu_h:.10f}", f"{m.sigma_h:.10f}"]
            rows.append(row)
    elif kind in ("critical", "gamma"):
        header = ["alpha"] + [f"K={k}" for k in ks]
        for a in alphas:
            row = [f"{a:g}"]
            for k in ks:
                if kind == "critical":
                    row.append(f"{critical_value(sample_mean_moments(block.pixels, table_levels, k), a):.10f}")
                else:
                    row.append(f"{type1_upper_bound(k, a, rho_ratio):.5f}")
            rows.append(row)
    else:
        raise UsageError(f"unknown table {kind!r}; choose moments, critical or gamma")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    return "# " + " ".join(header) + "\n" + "".join(" ".join(r) + "\n" for r in rows)


def cmd_tables(args, out):
    out.write(
        format_table(
            args.kind,
            sizes=args.sizes,
            levels=args.levels,
            ks=args.k,
            alphas=args.alpha,
            block=args.block,
            table_levels=args.table_levels,
            rho_ratio=read_rho_ratio(args.config) if args.rho_ratio is None else args.rho_ratio,
            fmt=args.format,
        )
    )
    return EXIT_ACCEPT


# -- test ----------------------------------------------------------------------


def image_seed(master_seed, digest):
    """Per-image block-sampling seed from the master seed and the file's sha256."""
    return _rng.derive_seed(master_seed, _rng.SWEEP, int(digest[:16], 16))


def _load_for_levels(path, levels, channel):
    # A binary test reads {0, maxval} images as {0, 1}; other level counts
    # must match the file.
    return image_io.load(path, levels_override=2 if levels == 2 else None, channel=channel)


def _test_one(job):
    path, cfg_fields, channel = job
    digest = sha256_file(path)
    config = TestConfig(**dict(cfg_fields, seed=image_seed(cfg_fields["seed"], digest)))
    image = _load_for_levels(path, config.levels, channel)
    report = run_test(image, config, image_id=path)
    return digest, report


def _result_dict(path, digest, report):
    return {
        "image": path,
        "sha256": digest,
        "sample_seed": report.config.seed,
        "h_bar": report.h_bar,
        "z": report.z,
        "h_c": report.h_c,
        "mu": report.mu,
        "sigma": report.sigma,
        "decision": report.decision.value,
        "gamma_bound": report.gamma_bound,
        "positions": [list(p) for p in report.positions],
        "block_entropies": list(report.block_entropies),
    }


def _csv_row(path, master_seed, report):
    c = report.config
    return [path, c.spec.rows, c.spec.cols, c.levels, c.k, repr(c.alpha), master_seed,
            repr(report.h_bar), repr(report.z), repr(report.h_c), report.decision.value,
            repr(report.gamma_bound)]


def write_tile_grid(image, spec, path):
    """CSV of the entropy of every aligned tile, for external heatmap plotting."""
    hists = tile_histograms(image, spec)
    tr, tc = hists.shape[:2]
    ent = entropies_from_counts(hists.reshape(tr * tc, -1)).reshape(tr, tc)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tile_row", "tile_col", "row", "col", "entropy"])
        for i in range(tr):
            for j in range(tc):
                w.writerow([i, j, i * spec.rows, j * spec.cols, repr(float(ent[i, j]))])


def cmd_test(args, out):
    rho = read_rho_ratio(args.config) if args.rho_ratio is None else args.rho_ratio
    spec = args.block if args.block else BlockSpec(args.rows, args.cols)
    cfg_fields = dict(spec=spec, levels=args.levels, k=args.k, alpha=args.alpha,
                      seed=_rng.check_seed(args.seed), rho_ratio=rho)
    TestConfig(**cfg_fields)
    if args.tile_grid and len(args.images) != 1:
        raise UsageError("--tile-grid needs exactly one image")
    jobs = [(p, cfg_fields, args.channel) for p in args.images]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_test_one, jobs))
    else:
        results = [_test_one(j) for j in jobs]

    if args.tile_grid:
        write_tile_grid(_load_for_levels(args.images[0], args.levels, args.channel), spec, args.tile_grid)

    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for path, (_, report) in zip(args.images, results):
            w.writerow(_csv_row(path, args.seed, report))
    else:
        manifest = {
            "command": "test",
            "tool_version": __version__,
            "config": {
                "block_rows": spec.rows,
                "block_cols": spec.cols,
                "levels": args.levels,
                "k": args.k,
                "alpha": args.alpha,
                "seed": args.seed,
                "rho_ratio": rho,
                "channel": args.channel,
            },
            "inputs": [{"path": p, "sha256": d} for p, (d, _) in zip(args.images, results)],
            "timestamp": _timestamp(),
        }
        _dump_json(
            {
                "schema": REPORT_SCHEMA,
                "manifest": manifest,
                "results": [_result_dict(p, d, r) for p, (d, r) in zip(args.images, results)],
            },
            out,
        )
    return EXIT_REJECT if any(r.rejected for _, r in results) else EXIT_ACCEPT


# -- summary -------------------------------------------------------------------


def summarize(rows):
    """Rejection count against the expected counts ``T*alpha`` and ``T*gamma``."""
    if not rows:
        raise UsageError("no runs to summarise")
    t = len(rows)
    rejections = sum(r["decision"] == "NotIdeallyEncrypted" for r in rows)
    alphas = {float(r["alpha"]) for r in rows}
    gammas = {float(r["gamma"]) for r in rows}
    if len(alphas) != 1 or len(gammas) != 1:
        raise UsageError("runs mix different alpha or K settings; summarise them separately")
    alpha, gamma = alphas.pop(), gammas.pop()
    return {
        "images": t,
        "rejections": rejections,
        "expected_rejections_alpha": t * alpha,
        "expected_rejections_gamma": t * gamma,
        "consistent_with_ideal_clt": rejections <= t * alpha,
        "consistent_with_ideal_bet": rejections <= t * gamma,
    }


def cmd_summary(args, out):
    rows = []
    for path in args.csv:
        with open(path, newline="") as fh:
            rows.extend(csv.DictReader(fh))
    _dump_json(summarize(rows), out)
    return EXIT_ACCEPT


# -- fips ----------------------------------------------------------------------


def cmd_fips(args, out):
    thr = fips.load_thresholds(args.config) if args.config else fips.PRESETS[args.preset]
    image = image_io.load(args.image, levels_override=2, channel=args.channel)
    seq = fips.extract_bits(image, args.roi.rows, args.roi.cols, args.seed)
    report = fips.run_all(seq, thr)
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["image", "seed", "ones", "monobit", "poker_x", "poker", "runs", "long_runs", "long_run", "all"])
        w.writerow([args.image, args.seed, report.ones, report.monobit_pass, repr(report.poker_x),
                    report.poker_pass, report.runs_pass, report.long_runs, report.long_run_pass, report.all_pass])
    else:
        _dump_json(
            {
                "schema": "blockentropy.fips/1",
                "manifest": {
                    "command": "fips",
                    "tool_version": __version__,
                    "config": {"preset": None if args.config else args.preset, "config_file": args.config,
                               "seed": args.seed, "roi": [args.roi.rows, args.roi.cols]},
                    "inputs": [{"path": args.image, "sha256": sha256_file(args.image)}],
                    "timestamp": _timestamp(),
                },
                "source": seq.source,
                "results": report.as_dict(),
            },
            out,
        )
    return EXIT_ACCEPT if report.all_pass else EXIT_REJECT


# -- shuffle / random ------------------------------------------------------------


def cmd_shuffle(args, out):
    image = image_io.load(args.image, channel=args.channel)
    key = ShuffleKey(_rng.check_seed(args.seed), ShuffleMode(args.mode), args.block)
    result = unshuffle(image, key) if args.inverse else shuffle(image, key)
    image_io.save(result, args.output, args.out_format)
    if not args.report:
        return EXIT_ACCEPT
    levels = args.levels or result.levels
    test_image = image_io.load(args.output, levels_override=2 if levels == 2 else None)
    config = TestConfig(spec=args.test_block, levels=levels, k=args.k, alpha=args.alpha,
                        seed=args.seed, rho_ratio=read_rho_ratio(args.config))
    report = run_test(test_image, config, image_id=args.output)
    _dump_json(
        {
            "schema": REPORT_SCHEMA,
            "manifest": {
                "command": "shuffle",
                "tool_version": __version__,
                "config": {"mode": key.mode.value, "shuffle_block": [key.block.rows, key.block.cols],
                           "inverse": args.inverse, "seed": args.seed,
                           "block_rows": config.spec.rows, "block_cols": config.spec.cols,
                           "levels": levels, "k": args.k, "alpha": args.alpha},
                "inputs": [{"path": args.image, "sha256": sha256_file(args.image)}],
                "timestamp": _timestamp(),
            },
            "results": [_result_dict(args.output, sha256_file(args.output), report)],
        },
        out,
    )
    return EXIT_REJECT if report.rejected else EXIT_ACCEPT


def cmd_random(args, out):
    image = gen_true_random(args.rows, args.cols, args.levels, _rng.check_seed(args.seed))
    image_io.save(image, args.output, args.out_format)
    return EXIT_ACCEPT


# -- mc-rho / fetch --------------------------------------------------------------


def cmd_mc_rho(args, out):
    est = estimate_rho_ratio(args.block_pixels, args.levels, args.trials, _rng.check_seed(args.seed), args.jobs)
    m = entropy_moments(args.block_pixels, args.levels)
    _dump_json(
        {
            "block_pixels": est.block_pixels,
            "levels": est.levels,
            "trials": est.trials,
            "seed": est.seed,
            "rho_ratio": est.ratio,
            "stderr": est.stderr,
            "mu_H": m.mu_h,
            "sigma_H": m.sigma_h,
            "sample_mean": est.sample_mean,
            "sample_std": est.sample_std,
        },
        out,
    )
    if args.write_config:
        write_rho_ratio(args.write_config, est.ratio)
    return EXIT_ACCEPT


def cmd_fetch(args, out):
    fetch(args.dataset, args.dest, log=lambda msg: out.write(msg + "\n"))
    return EXIT_ACCEPT


# -- parser ----------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="blockentropy", description="Block Shannon entropy randomness test for images.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("tables", help="print the reference tables of moments, critical values or gamma bounds")
    t.add_argument("kind", choices=["moments", "critical", "gamma"])
    t.add_argument("--sizes", type=_int_list, default=list(TABLE_SIZES), help="square block sides")
    t.add_argument("--levels", type=_int_list, default=list(TABLE_LEVELS))
    t.add_argument("--k", type=_int_list, default=list(TABLE_K))
    t.add_argument("--alpha", type=_float_list, default=list(TABLE_ALPHA))
    t.add_argument("--block", type=_block, default=BlockSpec(16, 16), help="block for critical values")
    t.add_argument("--table-levels", type=int, default=256, help="L for critical values")
    t.add_argument("--rho-ratio", type=float, default=None)
    t.add_argument("--config")
    t.add_argument("--format", choices=["text", "csv"], default="text")
    t.set_defaults(func=cmd_tables)

    s = sub.add_parser("test", help="run the block entropy test on one or more images")
    s.add_argument("images", nargs="+")
    s.add_argument("-M", "--rows", type=int, default=16)
    s.add_argument("-N", "--cols", type=int, default=16)
    s.add_argument("--block", type=_block, default=None, help="shorthand for -M/-N, e.g. 16x16")
    s.add_argument("-L", "--levels", type=int, default=256)
    s.add_argument("-K", "--k", type=int, default=100)
    s.add_argument("--alpha", type=float, default=0.01)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--channel", choices=[c.value for c in image_io.Channel])
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.add_argument("--tile-grid", metavar="CSV", help="write every tile's entropy for heatmaps")
    s.add_argument("--rho-ratio", type=float, default=None)
    s.add_argument("--config")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_test)

    sm = sub.add_parser("summary", help="aggregate rejections over CSV test runs")
    sm.add_argument("csv", nargs="+")
    sm.set_defaults(func=cmd_summary)

    f = sub.add_parser("fips", help="FIPS 140-2 style tests on a 100x200 ROI of a binary image")
    f.add_argument("image")
    f.add_argument("--preset", choices=sorted(fips.PRESETS), default="reference")
    f.add_argument("--config", help="key-value threshold file ([fips] section)")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--roi", type=_block, default=BlockSpec(100, 200))
    f.add_argument("--channel", choices=[c.value for c in image_io.Channel])
    f.add_argument("--format", choices=["json", "csv"], default="json")
    f.set_defaults(func=cmd_fips)

    sh = sub.add_parser("shuffle", help="apply a block-local permutation cipher")
    sh.add_argument("image")
    sh.add_argument("-o", "--output", required=True)
    sh.add_argument("--mode", choices=[m.value for m in ShuffleMode], default="pixel")
    sh.add_argument("--block", type=_block, default=BlockSpec(16, 16))
    sh.add_argument("--seed", type=int, default=0)
    sh.add_argument("--inverse", action="store_true")
    sh.add_argument("--out-format", choices=[f.value for f in image_io.ImageFormat])
    sh.add_argument("--channel", choices=[c.value for c in image_io.Channel])
    sh.add_argument("--report", action="store_true", help="also test the shuffled image")
    sh.add_argument("--test-block", type=_block, default=BlockSpec(16, 16))
    sh.add_argument("-L", "--levels", type=int, default=None)
    sh.add_argument("-K", "--k", type=int, default=100)
    sh.add_argument("--alpha", type=float, default=0.01)
    sh.add_argument("--config")
    sh.set_defaults(func=cmd_shuffle)

    r = sub.add_parser("random", help="write a true-random image")
    r.add_argument("--rows", type=int, default=256)
    r.add_argument("--cols", type=int, default=256)
    r.add_argument("-L", "--levels", type=int, default=256)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("-o", "--output", required=True)
    r.add_argument("--out-format", choices=[f.value for f in image_io.ImageFormat])
    r.set_defaults(func=cmd_random)

    mc = sub.add_parser("mc-rho", help="Monte Carlo estimate of rho/sigma^3 for block entropy")
    mc.add_argument("--block-pixels", type=int, default=256)
    mc.add_argument("-L", "--levels", type=int, default=256)
    mc.add_argument("--trials", type=int, default=100_000)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--jobs", type=int, default=1)
    mc.add_argument("--write-config", metavar="PATH", help="store the estimate as [test] rho_ratio")
    mc.set_defaults(func=cmd_mc_rho)

    fe = sub.add_parser("fetch", help="download a public test image set")
    fe.add_argument("dataset", help="built-in dataset id or manifest .json path")
    fe.add_argument("--dest", default=".")
    fe.set_defaults(func=cmd_fetch)
    return p


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except BlockEntropyError as exc:
        err.write(json.dumps({"error": exc.code, "message": str(exc)}) + "\n")
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        code = "io" if isinstance(exc, OSError) else "value"
        err.write(json.dumps({"error": code, "message": str(exc)}) + "\n")
        return EXIT_ERROR


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
