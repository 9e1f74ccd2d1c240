"""
Command-line pipeline: ``simulate``, ``train``, ``monitor`` and ``evaluate``.

Exit codes: 0 success (and, for ``monitor``, nothing diagnosed), 1 I/O
failure, 2 configuration or data error, 3 faults diagnosed by ``monitor``.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from . import diagnose, monitor, simeval
from .config import load_config
from .signals import MeasurementMatrix, ValidationError, find_correlated_pairs, load_csv, write_csv

log = logging.getLogger("corrfdd")

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_FAULT = 3

MANIFEST = "manifest.json"
DIAGNOSIS = "diagnosis.json"


class CliError(Exception):
    def __init__(self, message, code=EXIT_CONFIG):
        super().__init__(message)
        self.code = code


def _write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def _read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _load_data(path):
    try:
        return load_csv(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    except ValidationError as exc:
        raise CliError(f"{path}: {exc}") from exc


def cmd_simulate(out_dir, n_sensors=4, n_samples=10000, seed=0, noise_std=0.05,
                 drive_amplitude=1.0, faults=()):
    """Write ``data.csv`` and ``labels.json`` for a simulated run."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    matrix = simeval.generate_nominal(n_sensors, n_samples, seed=seed, noise_std=noise_std,
                                      drive_amplitude=drive_amplitude)
    for i, label in enumerate(faults):
        matrix = simeval.inject_fault(matrix, label, noise_std=noise_std, seed=seed + i + 1)
    write_csv(matrix, out_dir / "data.csv")
    simeval.write_labels(faults, out_dir / "labels.json")
    log.info("simulated %d x %d samples (seed %d) into %s", n_sensors, n_samples, seed, out_dir)
    return EXIT_OK


def cmd_train(data_csv, config, out_dir):
    """Discover correlated pairs, fit and calibrate one model each, write the bundle."""
    log.info("effective config: %s", json.dumps(config.to_dict(), sort_keys=True))
    matrix = _load_data(data_csv)
    channels = monitor.preprocess(matrix, config.median_kernel)
    filtered = MeasurementMatrix(matrix.sensor_ids, matrix.timestamps,
                                 [channels[sid] for sid in matrix.sensor_ids])
    order = {sid: i for i, sid in enumerate(matrix.sensor_ids)}
    pairs = sorted(find_correlated_pairs(filtered, config.kappa), key=lambda p: (order[p[0]], order[p[1]]))
    if not pairs:
        raise CliError(f"no sensor pairs correlated above kappa={config.kappa}")
    if matrix.n_samples < config.k + config.s - 1:
        raise CliError(f"{matrix.n_samples} samples too few for k={config.k}, s={config.s}")
    log.info("correlated pairs: %s", pairs)
    models = monitor.fit_pair_models(matrix, pairs, config)

    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        files = []
        for i, pm in enumerate(models):
            name = f"pair_{i:02d}.json"
            _write_json(pm.to_dict(), out_dir / name)
            files.append(name)
        _write_json({
            "format_version": 1,
            "sensors": list(matrix.sensor_ids),
            "pairs": [list(p) for p in pairs],
            "models": files,
            "seed": config.seed,
            "config": config.to_dict(),
        }, out_dir / MANIFEST)
    except OSError as exc:
        raise CliError(f"cannot write bundle: {exc}", EXIT_IO) from exc
    return EXIT_OK


def load_bundle(bundle_dir):
    """Read a bundle written by :func:`cmd_train`; returns ``(manifest, models)``."""
    bundle_dir = Path(bundle_dir)
    try:
        manifest = _read_json(bundle_dir / MANIFEST)
        models = [monitor.PairModel.from_dict(_read_json(bundle_dir / f)) for f in manifest["models"]]
    except OSError as exc:
        raise CliError(f"cannot read bundle {bundle_dir}: {exc}", EXIT_IO) from exc
    return manifest, models


def cmd_monitor(data_csv, bundle_dir, out_dir, max_cardinality=2, at=None, interval=None,
                min_duration=None):
    """Write one residual CSV per pair and ``diagnosis.json``.

    ``min_duration`` (default ``2k``) applies to the default persistent-state
    diagnosis mode only.
    """
    manifest, models = load_bundle(bundle_dir)
    matrix = _load_data(data_csv)
    missing = sorted(set(manifest["sensors"]) - set(matrix.sensor_ids))
    if missing:
        raise CliError(f"sensors {missing} from the bundle are missing in {data_csv}")
    cfg = manifest["config"]
    if min_duration is None:
        min_duration = 2 * int(cfg["k"])
    try:
        traces = monitor.run_monitor(models, matrix, median_kernel=int(cfg["median_kernel"]))
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    record = diagnose.diagnose_traces(traces, max_cardinality, at=at, interval=interval,
                                      min_duration=min_duration)
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for i, tr in enumerate(traces):
            monitor.write_trace_csv(tr, out_dir / f"residuals_{i:02d}.csv")
        _write_json(record, out_dir / DIAGNOSIS)
    except OSError as exc:
        raise CliError(f"cannot write monitor output: {exc}", EXIT_IO) from exc
    for tr in traces:
        log.info("pair %s: %d of %d windows alarmed", tr.pair, int(tr.alarms.sum()), tr.alarms.size)
    log.info("diagnosis: %s", json.dumps(record))
    return EXIT_FAULT if record["diagnoses"] else EXIT_OK


def cmd_evaluate(residual_dir, labels_json, data_csv, grace):
    """Score residual CSVs against fault labels; returns ``(exit_code, EvalReport)``."""
    matrix = _load_data(data_csv)
    paths = sorted(Path(residual_dir).glob("residuals_*.csv"))
    if not paths:
        raise CliError(f"no residual CSVs in {residual_dir}")
    try:
        traces = [monitor.read_trace_csv(p, matrix.timestamps) for p in paths]
        labels = simeval.read_labels(labels_json)
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from exc
    try:
        report = simeval.precision_recall(traces, labels, grace=grace)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    return EXIT_OK, report


def parse_fault(text):
    """``SENSOR:START:END[:KIND[:PARAM]]`` where PARAM is the stuck value or noise factor."""
    parts = text.split(":")
    if not 3 <= len(parts) <= 5:
        raise argparse.ArgumentTypeError(f"bad fault description {text!r}")
    sensor, start, end = parts[0], int(parts[1]), int(parts[2])
    kind = parts[3] if len(parts) > 3 else "disconnect_flatline"
    param = float(parts[4]) if len(parts) > 4 else None
    try:
        if kind == "stuck_value":
            return simeval.FaultLabel(sensor, start, end, kind, value=param)
        if kind == "noise_burst":
            return simeval.FaultLabel(sensor, start, end, kind, factor=param)
        return simeval.FaultLabel(sensor, start, end, kind)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _add_config_flags(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--model-type", choices=("rbm", "gmm"))
    p.add_argument("--kappa", type=float)
    p.add_argument("--k", type=int, help="correlation window size")
    p.add_argument("--s", type=int, help="model input window size")
    p.add_argument("--w", type=int, help="threshold multiple of the residual std")


def _config_from(args):
    return load_config(args.config, seed=args.seed, model_type=args.model_type,
                       kappa=args.kappa, k=args.k, s=args.s, w=args.w)


def build_parser():
    parser = argparse.ArgumentParser(prog="corrfdd", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate co-driven sensor data with optional faults")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-sensors", type=int, default=4)
    p.add_argument("--n-samples", type=int, default=10000)
    p.add_argument("--noise-std", type=float, default=0.05)
    p.add_argument("--drive-amplitude", type=float, default=1.0)
    p.add_argument("--fault", type=parse_fault, action="append", default=[],
                   metavar="SENSOR:START:END[:KIND[:PARAM]]")

    p = sub.add_parser("train", help="learn pair models from nominal data")
    p.add_argument("data")
    p.add_argument("--out", required=True)
    _add_config_flags(p)

    p = sub.add_parser("monitor", help="compute residuals, alarms and a diagnosis")
    p.add_argument("data")
    p.add_argument("bundle")
    p.add_argument("--out", required=True)
    p.add_argument("--max-cardinality", type=int, default=2)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--at", type=float, help="diagnose the alarm state at this time")
    mode.add_argument("--interval", type=float, nargs=2, metavar=("T0", "T1"),
                      help="diagnose the union of alarms within [T0, T1]")
    p.add_argument("--min-duration", type=int,
                   help="persistence needed by the default diagnosis mode (default 2k)")

    p = sub.add_parser("evaluate", help="precision/recall of residual CSVs against labels")
    p.add_argument("residuals", help="directory written by monitor")
    p.add_argument("--labels", required=True)
    p.add_argument("--data", required=True, help="the monitored data CSV")
    p.add_argument("--grace", type=int, help="default: the config's grace, i.e. k")
    _add_config_flags(p)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.out, args.n_sensors, args.n_samples, args.seed,
                                args.noise_std, args.drive_amplitude, args.fault)
        if args.command == "train":
            return cmd_train(args.data, _config_from(args), args.out)
        if args.command == "monitor":
            return cmd_monitor(args.data, args.bundle, args.out, args.max_cardinality,
                               at=args.at, interval=args.interval, min_duration=args.min_duration)
        config = _config_from(args)
        grace = config.effective_grace if args.grace is None else args.grace
        log.info("effective config: %s; grace=%d", json.dumps(config.to_dict(), sort_keys=True), grace)
        code, report = cmd_evaluate(args.residuals, args.labels, args.data, grace)
        print(json.dumps(report.to_dict(), indent=2))
        return code
    except CliError as exc:
        log.error("%s", exc)
        return exc.code
    except (ValueError, KeyError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
