"""Command line: extract keypoints from video; render marker clips."""

from __future__ import annotations

import argparse
import sys

from hpe_adapter.config import (
    AdapterConfig,
    ModelLoadError,
    UnmappedJoint,
    VideoDecodeError,
    load_mapping,
)
from hpe_adapter.extract import extract_keypoints
from hpe_adapter.render import render_marker_video


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hpe-adapter",
        description="Run a detector / 2D-pose / lifter stack on a video and "
        "emit a canonical keypoint file.",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("extract", help="video -> canonical keypoint file")
    p.add_argument("--video", required=True, help="input video path")
    p.add_argument("--out", required=True, help="output keypoint file (JSON lines)")
    p.add_argument("--fps", type=float, default=None, help="frame-rate override")
    p.add_argument("--mapping", help="JSON mapping file: model joint -> canonical joint")
    p.add_argument("--detector", default="marker", help="detector model (default: marker)")
    p.add_argument("--pose2d", default="marker", help="2D pose model (default: marker)")
    p.add_argument("--lifter", default="planar", help="3D lifter model (default: planar)")

    p = sub.add_parser("render", help="canonical keypoint file -> marker video")
    p.add_argument("--keypoints", required=True)
    p.add_argument("--out", required=True, help="output video (.avi)")
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--max-frames", type=int, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command is None:
        build_parser().print_help()
        return 2
    try:
        if args.command == "extract":
            kwargs = {}
            if args.mapping:
                kwargs["mapping"] = load_mapping(args.mapping)
            config = AdapterConfig(
                video=args.video,
                out=args.out,
                fps=args.fps,
                detector=args.detector,
                pose2d=args.pose2d,
                lifter=args.lifter,
                **kwargs,
            )
            n = extract_keypoints(config)
            print(f"wrote {n} keypoint records to {args.out}")
        else:
            n = render_marker_video(
                args.keypoints, args.out, fps=args.fps, max_frames=args.max_frames
            )
            print(f"rendered {n} frames to {args.out}")
        return 0
    except (ModelLoadError, VideoDecodeError, UnmappedJoint, FileNotFoundError) as exc:
        print(f"hpe-adapter: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
