"""Command-line front end: ``bandgap-resonance <command> [options]``.

Exit codes: 0 success, 1 configuration error, 2 some sweep points failed,
3 every sweep point failed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from .sweep import COMMANDS, ConfigError, RunConfig, load_config_file, render, run

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL, EXIT_FAILED = 0, 1, 2, 3

_ALIASES = {
    "output.path": ["--out"],
    "output.format": ["--format"],
    "tol.rel": ["--rel-tol"],
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _flag_keys():
    for sec in fields(RunConfig):
        if sec.name == "command":
            continue
        for f in fields(sec.default_factory):
            yield f"{sec.name}.{f.name}"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="bandgap-resonance",
        description="Resonant forces between entangled atoms near a photonic band edge.",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file of flat dotted keys; flags override it")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    for key in _flag_keys():
        flag = "--" + key.replace("_", "-")
        names = [flag] + _ALIASES.get(key, [])
        if key == "sweep.log":
            p.add_argument(*names, dest=key, action="store_const", const=True, default=argparse.SUPPRESS)
        else:
            p.add_argument(*names, dest=key, default=argparse.SUPPRESS, metavar=key.split(".")[1].upper())
    return p


def config_from_args(argv) -> tuple[RunConfig, int | None]:
    args = vars(build_parser().parse_args(argv))
    flat = {}
    path = args.pop("config")
    threads = args.pop("threads")
    if path:
        flat.update(load_config_file(path))
    file_command = flat.get("command")
    command = args.pop("command")
    if file_command is not None and file_command != command:
        raise ConfigError(f"config file is for command {file_command!r}, not {command!r}")
    flat["command"] = command
    flat.update(args)
    if threads is not None and threads < 1:
        raise ConfigError("--threads must be at least 1")
    return RunConfig.from_flat(flat), threads


def main(argv=None) -> int:
    try:
        cfg, threads = config_from_args(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"config-error: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_CONFIG
    result = run(cfg, threads)
    text = render(result)
    if cfg.output.path:
        with open(cfg.output.path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if result.failed:
        print(f"warning: {result.failed} of {len(result.rows)} sweep points failed", file=sys.stderr)
    return result.exit_status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
