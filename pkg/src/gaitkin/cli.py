"""Command-line entry point.

Subcommands cover the full workflow: synthesize data, extract angle
labels from keypoints, train / adapt / evaluate models, sweep mixing
ratios, and stream a model over an IMU feed. Every run writes a JSON
manifest with the fully-resolved configuration before heavy work
starts; ``gaitkin rerun MANIFEST`` replays a run bit-for-bit.

Exit codes: 0 success, 2 usage error, 3 data or schema error,
4 numeric failure.

Option values resolve as: command line > config file (KEY=VALUE lines,
keys matching long option names) > built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

import gaitkin
from gaitkin import errors
from gaitkin.geometry import (
    SavGolSpec,
    extract_angle_labels,
    read_angle_file,
    read_keypoint_file,
    write_angle_file,
    write_keypoint_file,
)
from gaitkin.pipeline.metrics import (
    format_report_text,
    improvement_pct,
    rmse_report,
    write_report_jsonl,
)
from gaitkin.synth.imu import read_imu_file, write_imu_file
from gaitkin.synth.profiles import StiffKneeSpec, make_subject
from gaitkin.synth.protocol import SynthNoise, hpe_labels, training_protocol, validation_recording
from gaitkin.tcn import TcnConfig, TrainConfig, load_model, save_model

DATA_ERRORS = (
    errors.SchemaError,
    errors.Misaligned,
    errors.InsufficientSK,
    errors.DatasetTooSmall,
    errors.BadMagic,
    errors.VersionMismatch,
    errors.ChecksumMismatch,
    errors.TruncatedFile,
    errors.LengthMismatch,
    errors.GapTooLarge,
    errors.SeriesTooShort,
    errors.MissingJoint,
    errors.ShapeMismatch,
    errors.ConfigMismatch,
    errors.ChannelMismatch,
    errors.NonMonotoneTimestamps,
    errors.RateMismatch,
    errors.ZeroBaseline,
    errors.EmptyStats,
    FileNotFoundError,
)
NUMERIC_ERRORS = (
    errors.NonFiniteLoss,
    errors.NonFiniteInput,
    errors.IllConditioned,
    errors.DegenerateVector,
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        return dispatch(args)
    except NUMERIC_ERRORS as exc:
        print(f"gaitkin {args.command}: numeric failure: {exc}", file=sys.stderr)
        return 4
    except DATA_ERRORS as exc:
        print(f"gaitkin {args.command}: {exc}", file=sys.stderr)
        return 3


def dispatch(args) -> int:
    handler = {
        "synth": cmd_synth,
        "extract-angles": cmd_extract_angles,
        "train": cmd_train,
        "adapt": cmd_adapt,
        "eval": cmd_eval,
        "sweep": cmd_sweep,
        "stream": cmd_stream,
        "bench": cmd_bench,
        "rerun": cmd_rerun,
    }[args.command]
    return handler(args)


# -- manifest plumbing --------------------------------------------------------


def _write_manifest(args, out_dir: Path, inputs: dict, outputs: dict) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": args.command,
        "tool_version": gaitkin.__version__,
        "seed": getattr(args, "seed", None),
        "config": {
            k: v for k, v in sorted(vars(args).items()) if k not in ("command", "func")
        },
        "inputs": inputs,
        "outputs": outputs,
        "started_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "finished_utc": None,
    }
    path = out_dir / f"{args.command.replace('-', '_')}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def _finish_manifest(path: Path):
    manifest = json.loads(path.read_text(encoding="utf-8"))
    manifest["finished_utc"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def cmd_rerun(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    stored = dict(manifest["config"])
    replay = argparse.Namespace(command=manifest["command"], **stored)
    return dispatch(replay)


# -- config-file support ------------------------------------------------------


class _ConfigAction(argparse.Action):
    """Applies KEY=VALUE defaults from a config file before other options."""

    def __call__(self, parser, namespace, values, option_string=None):
        for lineno, line in enumerate(Path(values).read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise errors.SchemaError(values, lineno, "expected KEY=VALUE")
            key, _, raw = line.partition("=")
            dest = key.strip().replace("-", "_")
            if not hasattr(namespace, dest):
                raise errors.SchemaError(values, lineno, f"unknown option {key.strip()!r}")
            current = getattr(namespace, dest)
            if isinstance(current, bool):
                setattr(namespace, dest, raw.strip().lower() in ("1", "true", "yes"))
            elif isinstance(current, int):
                setattr(namespace, dest, int(raw))
            elif isinstance(current, float):
                setattr(namespace, dest, float(raw))
            else:
                setattr(namespace, dest, raw.strip())


# -- shared option groups -----------------------------------------------------


def _add_model_opts(p):
    g = p.add_argument_group("network")
    g.add_argument("--blocks", type=int, default=5, help="temporal blocks (default: 5)")
    g.add_argument("--channels", type=int, default=32, help="conv channels (default: 32)")
    g.add_argument("--kernel", type=int, default=7, help="conv kernel size (default: 7)")
    g.add_argument("--dropout", type=float, default=0.1, help="dropout rate (default: 0.1)")
    g.add_argument(
        "--dilations",
        default="1,2,4,8,16",
        help="per-block dilation factors (default: 1,2,4,8,16)",
    )
    g.add_argument(
        "--window-len",
        type=int,
        default=None,
        help="input window length in samples (default: the receptive field)",
    )


def _add_train_opts(p):
    g = p.add_argument_group("training")
    g.add_argument("--lr", type=float, default=0.001, help="Adam learning rate (default: 0.001)")
    g.add_argument("--batch", type=int, default=32, help="batch size (default: 32)")
    g.add_argument("--epochs", type=int, default=50, help="max epochs (default: 50)")
    g.add_argument("--patience", type=int, default=5, help="early-stopping patience (default: 5)")
    g.add_argument(
        "--val-fraction", type=float, default=0.1, help="validation tail fraction (default: 0.1)"
    )
    g.add_argument("--stride", type=int, default=75, help="window stride in ticks (default: 75)")


def _tcn_config(args) -> TcnConfig:
    dil = tuple(int(d) for d in str(args.dilations).split(","))
    return TcnConfig(
        blocks=args.blocks,
        channels=args.channels,
        kernel=args.kernel,
        dropout=args.dropout,
        dilation_per_block=dil,
        window_len=args.window_len,
    )


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        lr=args.lr,
        batch=args.batch,
        max_epochs=args.epochs,
        patience=args.patience,
        val_fraction=args.val_fraction,
        seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaitkin",
        description="Joint-kinematics estimation: synthetic gait, angle labels, "
        "TCN training and adaptation, streaming inference.",
    )
    sub = parser.add_subparsers(dest="command")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", action=_ConfigAction, help="KEY=VALUE config file")
        return p

    p = add("synth", "generate synthetic AB and SK populations")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--subjects", type=int, default=3, help="subjects per population (default: 3)")
    p.add_argument("--seed", type=int, default=7, help="generator seed (default: 7)")
    p.add_argument(
        "--sk-max-flexion", type=float, default=20.0,
        help="stiff-knee flexion ceiling, degrees (default: 20)",
    )
    p.add_argument(
        "--accel-noise", type=float, default=0.25, help="IMU accel noise std, m/s^2 (default: 0.25)"
    )
    p.add_argument(
        "--gyro-noise", type=float, default=0.025, help="IMU gyro noise std, rad/s (default: 0.025)"
    )
    p.add_argument(
        "--kp-jitter", type=float, default=0.006,
        help="keypoint jitter std, meters (default: 0.006)",
    )
    p.add_argument(
        "--kp-occlusion", type=float, default=0.005,
        help="extra left-side keypoint noise std, meters (default: 0.005)",
    )

    p = add("extract-angles", "keypoint files to smoothed angle label files")
    p.add_argument("--video-keypoints", dest="keypoints", required=True, help="keypoint file (JSON lines)")
    p.add_argument("--out", required=True, help="output angle CSV")
    p.add_argument("--window", type=int, default=50, help="smoothing window, samples (default: 50)")
    p.add_argument("--order", type=int, default=4, help="smoothing polynomial order (default: 4)")
    p.add_argument(
        "--convention", choices=("raw", "flexion"), default="flexion",
        help="hip angle convention (default: flexion)",
    )
    p.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)

    p = add("train", "train a model on IMU + angle files")
    p.add_argument("--imu", action="append", required=True, help="IMU CSV (repeatable)")
    p.add_argument("--angles", action="append", required=True, help="angle CSV aligned to --imu")
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--seed", type=int, default=0, help="training seed (default: 0)")
    _add_model_opts(p)
    _add_train_opts(p)

    p = add("adapt", "fine-tune a model on a mixed AB+SK set")
    p.add_argument("--base", required=True, help="pre-trained model file")
    p.add_argument("--imu", action="append", required=True, help="AB IMU CSV (repeatable)")
    p.add_argument("--angles", action="append", required=True, help="AB angle CSV (repeatable)")
    p.add_argument("--sk-imu", action="append", required=True, help="SK IMU CSV (repeatable)")
    p.add_argument("--sk-angles", action="append", required=True, help="SK angle CSV (repeatable)")
    p.add_argument("--sk-fraction", type=float, default=0.06,
                   help="SK share of the mixed set (default: 0.06)")
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--seed", type=int, default=0, help="training seed (default: 0)")
    _add_train_opts(p)

    p = add("eval", "evaluate a model (or prediction files) against truth")
    p.add_argument("--model", help="model file (omit when using --pred)")
    p.add_argument("--imu", help="IMU CSV to run the model on")
    p.add_argument("--truth", required=True, help="truth angle CSV")
    p.add_argument("--pred", help="prediction angle CSV (skips the model)")
    p.add_argument("--stride", type=int, default=25, help="evaluation stride in ticks (default: 25)")
    p.add_argument(
        "--speed-profile", choices=("none", "validation"), default="none",
        help="label samples by treadmill segment for a per-speed breakdown "
        "(validation: 1.1/0.5/1.2/0.6 m/s plateaus with 0.5 m/s^2 ramps)",
    )
    p.add_argument("--out", help="output directory for reports")
    p.add_argument("--format", choices=("text", "jsonl", "both"), default="both")
    p.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)

    p = add("sweep", "adapted vs scratch error across SK mixing ratios")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--ratios", default="0.01,0.02,0.04,0.06,0.08,0.12",
                   help="SK fractions to sweep (default: 0.01,...,0.12)")
    p.add_argument("--subjects", type=int, default=3, help="subjects per population (default: 3)")
    p.add_argument("--seed", type=int, default=0, help="training seed (default: 0)")
    p.add_argument("--data-seed", type=int, default=7, help="synthetic data seed (default: 7)")
    _add_model_opts(p)
    _add_train_opts(p)

    p = add("stream", "run a model over an IMU stream at 50 Hz semantics")
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--input", required=True, help="IMU CSV path or tcp://host:port")
    p.add_argument("--out", help="tick stream output (JSON lines)")
    p.add_argument("--paced", action="store_true", help="pace ticks on the wall clock")
    p.add_argument("--drop-late", action="store_true", help="drop samples when running late")
    p.add_argument("--budget-ms", type=float, default=20.0,
                   help="per-tick latency budget, ms (default: 20)")
    p.add_argument("--rate-hz", type=float, default=50.0, help="tick rate (default: 50)")
    p.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)

    p = add("bench", "compare convolution kernel backends")
    p.add_argument("--repeats", type=int, default=20, help="timing repeats (default: 20)")
    p.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)

    p = add("rerun", "replay a run from its manifest")
    p.add_argument("manifest", help="manifest JSON written by a previous run")

    return parser


# -- commands -----------------------------------------------------------------


def cmd_synth(args) -> int:
    out = Path(args.out)
    manifest_path = _write_manifest(args, out, inputs={}, outputs={"root": str(out)})
    noise = SynthNoise(
        accel_std=args.accel_noise,
        gyro_std=args.gyro_noise,
        kp_jitter_std_m=args.kp_jitter,
        kp_left_occlusion_std_m=args.kp_occlusion,
    )
    sk_spec = StiffKneeSpec(max_flexion_deg=args.sk_max_flexion)
    records = []
    for population, braced in (("ab", False), ("sk", True)):
        sk = sk_spec if braced else None
        for v in range(args.subjects):
            subject = make_subject(v, 1.0, braced=braced)
            seed = args.seed + (50 if braced else 0) + v
            recs = training_protocol(subject, sk, noise, seed=seed, id_prefix=f"{population}{v}")
            recs.append(validation_recording(subject, sk, noise, seed=seed, rec_id=f"{population}{v}_val"))
            for rec in recs:
                rec_dir = out / population / f"s{v}"
                rec_dir.mkdir(parents=True, exist_ok=True)
                files = {
                    "imu": str(rec_dir / f"{rec.id}_imu.csv"),
                    "keypoints": str(rec_dir / f"{rec.id}_keypoints.jsonl"),
                    "angles_truth": str(rec_dir / f"{rec.id}_angles.csv"),
                }
                write_imu_file(files["imu"], rec.imu)
                write_keypoint_file(files["keypoints"], rec.keypoints())
                write_angle_file(files["angles_truth"], rec.angles_truth)
                records.append(
                    {
                        "id": rec.id,
                        "speed_mps": rec.speed_mps,
                        "profile": None if rec.speed_profile is None else "validation",
                        "sk": rec.sk,
                        "files": files,
                    }
                )
    with (out / "recordings.jsonl").open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    _finish_manifest(manifest_path)
    print(f"wrote {len(records)} recordings under {out}")
    return 0


def cmd_extract_angles(args) -> int:
    frames = read_keypoint_file(args.keypoints)
    spec = SavGolSpec(window=args.window, order=args.order)
    labels = extract_angle_labels(frames, spec, convention=args.convention)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    manifest_path = _write_manifest(
        args, out.parent, inputs={"keypoints": str(args.keypoints)}, outputs={"angles": str(out)}
    )
    write_angle_file(out, labels)
    _finish_manifest(manifest_path)
    print(f"wrote {len(labels)} angle frames to {out}")
    return 0


def _load_windows(imu_paths, angle_paths, config, stride, population):
    from gaitkin.pipeline.windowing import concat_datasets, window_dataset

    if len(imu_paths) != len(angle_paths):
        raise errors.Misaligned(
            f"{len(imu_paths)} IMU files vs {len(angle_paths)} angle files"
        )
    sets = []
    for imu_path, angle_path in zip(imu_paths, angle_paths):
        imu = read_imu_file(imu_path)
        labels = read_angle_file(angle_path)
        sets.append(
            window_dataset(
                imu,
                labels,
                window_len=config.window_len,
                stride=stride,
                population=population,
                recording_id=Path(imu_path).stem,
            )
        )
    return concat_datasets(sets)


def cmd_train(args) -> int:
    from gaitkin.tcn import train

    config = _tcn_config(args)
    tcfg = _train_config(args)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    manifest_path = _write_manifest(
        args, out.parent,
        inputs={"imu": list(args.imu), "angles": list(args.angles)},
        outputs={"model": str(out)},
    )
    dataset = _load_windows(args.imu, args.angles, config, args.stride, "AB")
    model, history = train(dataset, config, tcfg)
    save_model(model, out)
    _finish_manifest(manifest_path)
    print(
        f"trained {len(history)} epochs on {len(dataset)} windows; "
        f"final val MSE {history[-1].val_mse:.4f}; model -> {out}"
    )
    return 0


def cmd_adapt(args) -> int:
    from gaitkin.pipeline.windowing import mix_datasets
    from gaitkin.tcn import fine_tune

    base = load_model(args.base)
    tcfg = _train_config(args)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    manifest_path = _write_manifest(
        args, out.parent,
        inputs={
            "base": str(args.base),
            "imu": list(args.imu),
            "angles": list(args.angles),
            "sk_imu": list(args.sk_imu),
            "sk_angles": list(args.sk_angles),
        },
        outputs={"model": str(out)},
    )
    ab = _load_windows(args.imu, args.angles, base.config, args.stride, "AB")
    sk = _load_windows(args.sk_imu, args.sk_angles, base.config, args.stride, "SK")
    mixed = mix_datasets(ab, sk, args.sk_fraction)
    model, history = fine_tune(base, mixed, tcfg)
    save_model(model, out)
    _finish_manifest(manifest_path)
    print(
        f"adapted on {len(mixed)} windows ({len(mixed) - len(ab)} SK); "
        f"{len(history)} epochs; model -> {out}"
    )
    return 0


def cmd_eval(args) -> int:
    truth = read_angle_file(args.truth)
    if args.pred:
        preds = read_angle_file(args.pred)
        if len(preds) != len(truth):
            raise errors.LengthMismatch(f"{len(preds)} predictions vs {len(truth)} truth rows")
        report = rmse_report(
            np.array([p.as_array() for p in preds]),
            np.array([t.as_array() for t in truth]),
        )
        name = "pred-vs-truth"
    else:
        if not args.model or not args.imu:
            raise errors.LengthMismatch("need --model and --imu (or --pred)")
        from gaitkin.tcn import batch_forward

        model = load_model(args.model)
        imu = read_imu_file(args.imu)
        if len(imu) != len(truth):
            raise errors.Misaligned(f"{len(imu)} IMU samples vs {len(truth)} truth rows")
        t, x = _imu_arrays(imu)
        window_len = model.config.window_len
        ends = np.arange(0, x.shape[1], args.stride)
        wins = np.zeros((len(ends), x.shape[0], window_len))
        for i, end in enumerate(ends):
            src = x[:, max(end - window_len + 1, 0) : end + 1]
            wins[i, :, window_len - src.shape[1] :] = src
        preds = batch_forward(model, wins, "eval")
        labels = None
        if args.speed_profile == "validation":
            from gaitkin.synth.profiles import validation_speed_profile

            segments = validation_speed_profile().segments()

            def label_at(ts):
                for t0, t1, label in segments:
                    if t0 <= ts < t1:
                        return label
                return segments[-1][2]

            labels = [label_at(float(t[e])) for e in ends]
        report = rmse_report(preds, np.array([truth[e].as_array() for e in ends]), labels)
        name = f"{Path(args.model).stem}-vs-{Path(args.truth).stem}"

    text = format_report_text({name: report})
    print(text)
    if args.out:
        out = Path(args.out)
        manifest_path = _write_manifest(
            args, out,
            inputs={"truth": str(args.truth), "pred": args.pred, "imu": args.imu,
                    "model": args.model},
            outputs={"reports": str(out)},
        )
        if args.format in ("jsonl", "both"):
            write_report_jsonl(out / "report.jsonl", {name: report})
        if args.format in ("text", "both"):
            (out / "report.txt").write_text(text + "\n", encoding="utf-8")
        _write_plot_data(out, name, report)
        _finish_manifest(manifest_path)
    return 0


def _write_plot_data(out: Path, name: str, report):
    """Delimited per-figure files: per-joint bars, per-speed bars."""
    with (out / "per_joint.csv").open("w", encoding="utf-8") as fh:
        fh.write("trial,joint,rmse_deg\n")
        for joint, value in report.per_joint.items():
            fh.write(f"{name},{joint},{value:.6f}\n")
    if report.per_speed:
        with (out / "per_speed.csv").open("w", encoding="utf-8") as fh:
            fh.write("trial,condition,joint,rmse_deg\n")
            for condition, rep in report.per_speed.items():
                for joint, value in rep.per_joint.items():
                    fh.write(f"{name},{condition},{joint},{value:.6f}\n")


def _imu_arrays(samples):
    from gaitkin.synth.imu import imu_matrix

    return imu_matrix(samples)


def cmd_sweep(args) -> int:
    from gaitkin.pipeline.experiments import (
        ExperimentSpec,
        build_experiment_data,
        ratio_sweep,
    )
    from gaitkin.tcn import train

    out = Path(args.out)
    manifest_path = _write_manifest(args, out, inputs={}, outputs={"curve": str(out / "ratio_curve.csv")})
    ratios = [float(r) for r in str(args.ratios).split(",")]
    spec = ExperimentSpec(subjects=args.subjects, stride_train=args.stride, data_seed=args.data_seed)
    config = _tcn_config(args)
    data = build_experiment_data(spec, config)
    tcfg = _train_config(args)
    base, _ = train(data.ab_train, config, tcfg)
    points = ratio_sweep(data, ratios, base, tcfg)
    with (out / "ratio_curve.csv").open("w", encoding="utf-8") as fh:
        fh.write("ratio,adapted_rmse_deg,sk_only_rmse_deg,sk_items\n")
        for pt in points:
            fh.write(f"{pt.ratio:g},{pt.adapted_rmse:.6f},{pt.sk_only_rmse:.6f},{pt.sk_items}\n")
    _finish_manifest(manifest_path)
    for pt in points:
        print(
            f"ratio {pt.ratio:5.2f}: adapted {pt.adapted_rmse:6.3f} deg, "
            f"scratch {pt.sk_only_rmse:6.3f} deg ({pt.sk_items} SK windows)"
        )
    return 0


def cmd_stream(args) -> int:
    from gaitkin.stream import (
        iter_imu_lines,
        iter_socket_samples,
        latency_report,
        queued_source,
        run_stream,
        write_tick_stream,
    )

    model = load_model(args.model)
    if args.input.startswith("tcp://"):
        # reader thread feeds a bounded queue; the inference loop consumes
        source = queued_source(iter_socket_samples(args.input[len("tcp://") :]))
    else:
        source = iter_imu_lines(
            Path(args.input).read_text(encoding="utf-8").splitlines(), origin=args.input
        )
    ticks, stats = run_stream(
        source,
        model,
        rate_hz=args.rate_hz,
        paced=args.paced,
        drop_late=args.drop_late,
        budget_ms=args.budget_ms,
    )
    if args.out:
        write_tick_stream(args.out, ticks)
    print(latency_report(stats))
    return 0


def cmd_bench(args) -> int:
    from gaitkin.bench import run_benchmark

    run_benchmark(repeats=args.repeats)
    return 0


if __name__ == "__main__":
    sys.exit(main())
