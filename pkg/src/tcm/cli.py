"""Command line entry point: ``tcm <experiment> --config <path> [--key value ...]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .harness import EXPERIMENTS, AssertionFailure, ConfigError, build_config, run
from .solver import InstabilityError

EXIT_OK, EXIT_CONFIG, EXIT_INSTABILITY, EXIT_ASSERT = 0, 2, 3, 4

log = logging.getLogger("tcm")


def _overrides(extra: list[str]) -> dict[str, str]:
    out, i = {}, 0
    while i < len(extra):
        key = extra[i]
        if not key.startswith("--") or i + 1 >= len(extra):
            raise ConfigError(f"expected --key value pairs, got {extra[i:]!r}")
        out[key[2:]] = extra[i + 1]
        i += 2
    return out


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="tcm", description=__doc__)
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", default=None, help="flat key = value config file")
    ap.add_argument("-q", "--quiet", action="store_true")
    args, extra = ap.parse_known_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s")
    try:
        cfg = build_config(args.experiment, args.config, _overrides(extra))
    except ConfigError as e:
        log.error("config error: %s", e)
        return EXIT_CONFIG
    try:
        lines = run(cfg)
    except InstabilityError as e:
        log.error("instability: %s", e)
        return EXIT_INSTABILITY
    except AssertionFailure as e:
        log.error("assertion failure: %s", e)
        return EXIT_ASSERT
    except OSError as e:
        log.error("I/O error: %s", e)
        return EXIT_CONFIG
    for line in lines:
        log.info(line)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
