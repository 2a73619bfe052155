#!/usr/bin/env python3
"""Replay a pipeline manifest: a JSON list of CLI argument vectors.

Example manifest entry: ["synth", "--blocks", "4", "--out", "graph.json"].
With --verify the whole manifest is replayed a second time into a shadow
directory and every produced file is compared byte for byte.
"""

import argparse
import json
import shutil
import sys
from pathlib import Path

from somekg.cli import main as cli_main


def run_manifest(commands: list[list[str]], base: Path, out_map: dict[str, Path]) -> None:
    base.mkdir(parents=True, exist_ok=True)
    for command in commands:
        rewritten = [token.replace("@", f"{base}/") for token in command]
        code = cli_main(rewritten)
        if code != 0:
            raise SystemExit(f"command failed ({code}): {rewritten}")
        for token in command:
            if "@" in token:
                out_map[token] = base / token.split("@", 1)[1]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("manifest", help="JSON list of CLI argument vectors; "
                        "tokens starting with '@' are paths relative to --workdir")
    parser.add_argument("--workdir", default="pipeline_out")
    parser.add_argument("--verify", action="store_true",
                        help="replay twice and require bit-identical outputs")
    args = parser.parse_args()

    with open(args.manifest, "r", encoding="utf-8") as fh:
        commands = json.load(fh)

    workdir = Path(args.workdir)
    produced: dict[str, Path] = {}
    run_manifest(commands, workdir, produced)
    print(f"manifest complete: {len(commands)} commands, outputs in {workdir}/")

    if args.verify:
        shadow = workdir / "_verify"
        if shadow.exists():
            shutil.rmtree(shadow)
        shadow_map: dict[str, Path] = {}
        run_manifest(commands, shadow, shadow_map)
        mismatched = [
            token for token, path in produced.items()
            if path.read_bytes() != shadow_map[token].read_bytes()
        ]
        if mismatched:
            print(f"NOT reproducible, differing outputs: {mismatched}")
            return 1
        print(f"reproducible: {len(produced)} outputs bit-identical across replays")
    return 0


if __name__ == "__main__":
    sys.exit(main())
