#!/usr/bin/env python3
"""Compare the compiled convolution kernels against the numpy fallback."""

import argparse

from gaitkin.bench import run_benchmark

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()
    run_benchmark(repeats=args.repeats)
