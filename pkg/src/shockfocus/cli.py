"""Command-line entry points: run, resume, inspect, validate."""

from __future__ import annotations

import argparse
import shutil
import sys
import tempfile

from . import simio
from .config import load_config, parse_config
from .errors import ConfigError, ShockfocusError
from .runner import resume_run, run_scenario


def _add_run_flags(sub):
    sub.add_argument("--threads", type=int, default=1,
                     help="worker threads for patch updates (default 1)")
    sub.add_argument("--verify", action="store_true",
                     help="run twice on a serial schedule and demand "
                          "byte-identical gauge output")
    sub.add_argument("--max-level", type=int, default=None, metavar="L",
                     help="cap refinement at level L (0 = root only)")
    sub.add_argument("--out", default=None,
                     help="override the configured output directory")
    sub.add_argument("--quiet", action="store_true",
                     help="suppress per-step progress lines")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="shockfocus",
        description="Finite-volume fluid/solid shock focusing simulator",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario from a config file")
    run.add_argument("config")
    _add_run_flags(run)

    res = sub.add_parser("resume", help="continue from a checkpoint")
    res.add_argument("checkpoint")
    _add_run_flags(res)

    ins = sub.add_parser("inspect", help="summarize a checkpoint")
    ins.add_argument("checkpoint")
    ins.add_argument("--config", action="store_true",
                     help="also print the embedded config text")

    val = sub.add_parser("validate", help="check a config file and exit")
    val.add_argument("config")
    return ap


def _echo_for(args):
    if args.quiet:
        return None
    return lambda line: print(line, flush=True)


def _verify_gauges(first, second):
    names = sorted(first)
    if sorted(second) != names:
        print("verify: gauge sets differ", file=sys.stderr)
        return False
    ok = True
    for name in names:
        if first[name] != second[name]:
            print("verify: gauge %r differs between runs" % name, file=sys.stderr)
            ok = False
    if ok:
        print("verify: %d gauge file(s) byte-identical" % len(names))
    return ok


def cmd_run(args):
    cfg = load_config(args.config)
    threads = 1 if args.verify else args.threads
    result = run_scenario(cfg, out_dir=args.out, threads=threads,
                          max_level=args.max_level, echo=_echo_for(args))
    print("run complete: %d root steps, outputs in %s"
          % (result.root_steps, result.out_dir))
    if args.verify:
        scratch = tempfile.mkdtemp(prefix="verify_", dir=result.out_dir)
        try:
            again = run_scenario(cfg, out_dir=scratch, threads=1,
                                 max_level=args.max_level, echo=None)
            same = _verify_gauges(result.gauges.texts(), again.gauges.texts())
        finally:
            shutil.rmtree(scratch, ignore_errors=True)
        if not same:
            return 1
    return 0


def cmd_resume(args):
    threads = 1 if args.verify else args.threads
    result = resume_run(args.checkpoint, out_dir=args.out, threads=threads,
                        max_level=args.max_level, echo=_echo_for(args))
    print("resume complete: %d root steps, outputs in %s"
          % (result.root_steps, result.out_dir))
    if args.verify:
        scratch = tempfile.mkdtemp(prefix="verify_", dir=result.out_dir)
        try:
            again = resume_run(args.checkpoint, out_dir=scratch, threads=1,
                               max_level=args.max_level, echo=None)
            same = _verify_gauges(result.gauges.texts(), again.gauges.texts())
        finally:
            shutil.rmtree(scratch, ignore_errors=True)
        if not same:
            return 1
    return 0


def cmd_inspect(args):
    chk = simio.load_checkpoint(args.checkpoint)
    meta = chk.meta
    print("checkpoint version %s at t = %s" % (meta["version"], repr(meta["time"])))
    print("ratio %d, max levels %d, steps %s"
          % (meta["ratio"], meta["max_levels"], meta["steps"]))
    for lev, patches in enumerate(chk.levels):
        print("level %d: %d patch(es)" % (lev, len(patches)))
        for p in patches:
            print("  anchor %s cells %s t %s" % (p.anchor, p.cells, repr(p.time)))
    for name, text in sorted(chk.gauge_texts.items()):
        rows = max(0, len(text.splitlines()) - 1)
        print("gauge %s: %d row(s)" % (name, rows))
    if chk.maps_arrays is not None:
        peak = {k: float(v.max()) for k, v in chk.maps_arrays.items()}
        print("peak stress maps: compression %.6g tension %.6g shear %.6g Pa"
              % (peak["compression"], peak["tension"], peak["shear"]))
    if args.config:
        print("--- config ---")
        print(chk.config_text, end="")
    return 0


def cmd_validate(args):
    with open(args.config) as fh:
        text = fh.read()
    cfg = parse_config(text)
    print("ok: mode %s, %s cells, %d level(s), %d material(s), %d gauge(s)"
          % (cfg.mode, "x".join(str(c) for c in cfg.cells),
             cfg.amr.max_levels, len(cfg.materials), len(cfg.gauges)))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {
        "run": cmd_run,
        "resume": cmd_resume,
        "inspect": cmd_inspect,
        "validate": cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except ShockfocusError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
