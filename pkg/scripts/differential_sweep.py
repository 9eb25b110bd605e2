"""Compile many generated programs and cross-check both interpreters on random inputs.

    python3 scripts/differential_sweep.py --programs 200 --inputs 100 --profiles vs_1_1 arbfp1

Exits 1 if any program fails to compile or any input disagrees; the offending
source is written to --dump-dir for replay with ``cgc run``.
"""
import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from cgc.diagnostics import CompileError
from cgc.gen import GenConfig, generate, random_shade
from cgc.pipeline import CompileOptions, compile_source
from cgc.vm import compare, run_asm, run_cg

log = logging.getLogger("sweep")


def sweep(args) -> int:
    cfg = GenConfig(max_depth=args.depth)
    failures = 0
    worst = 0.0
    start = time.perf_counter()
    for profile in args.profiles:
        for k in range(args.programs):
            seed = args.seed + k
            prog = generate(seed, profile, cfg)
            try:
                comp = compile_source(prog.source, CompileOptions(prog.entry, profile))
            except CompileError as exc:
                failures += 1
                log.error("%s seed %d does not compile: %s", profile, seed, exc)
                dump(args, prog, None, str(exc))
                continue
            rng = np.random.default_rng(seed)
            for i in range(args.inputs):
                shade = random_shade(comp.tree, rng)
                verdict = compare(run_cg(comp.tree, shade), run_asm(comp.listing, shade, comp.bindings),
                                  args.tolerance)
                worst = max(worst, verdict.worst)
                if not verdict.equal:
                    failures += 1
                    log.error("%s seed %d input %d: %s", profile, seed, i, verdict.detail)
                    dump(args, prog, shade, verdict.detail)
                    break
            log.debug("%s seed %d: %d instructions", profile, seed, comp.listing.instruction_count)
    total = len(args.profiles) * args.programs
    print(f"{total} programs x {args.inputs} inputs: {failures} failure(s), "
          f"worst |diff| {worst:.3g}, {time.perf_counter() - start:.1f} s")
    return 1 if failures else 0


def dump(args, prog, shade, reason):
    if not args.dump_dir:
        return
    args.dump_dir.mkdir(parents=True, exist_ok=True)
    stem = args.dump_dir / f"{prog.profile}_{prog.seed}"
    stem.with_suffix(".cg").write_text(f"// {reason}\n{prog.source}")
    if shade is not None and not shade.textures:
        stem.with_suffix(".json").write_text(json.dumps({"varying": shade.varying, "uniform": shade.uniforms}))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--programs", type=int, default=50, help="programs per profile")
    p.add_argument("--inputs", type=int, default=100, help="random inputs per program")
    p.add_argument("--profiles", nargs="+", default=["vs_1_1", "arbvp1", "arbfp1"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=3, help="maximum expression depth")
    p.add_argument("--tolerance", type=float, default=1e-5)
    p.add_argument("--dump-dir", type=Path)
    p.add_argument("-v", "--verbose", action="store_true")
    args = p.parse_args()
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    return sweep(args)


if __name__ == "__main__":
    sys.exit(main())
