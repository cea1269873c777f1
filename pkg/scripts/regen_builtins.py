#!/usr/bin/env python3
"""Regenerate the checked-in .mlt fixtures for all builtin instances.
The files are the deterministic renderer's output; tests assert that the
generators and the files agree byte for byte."""

from pathlib import Path

from maltkit.library import builtin_label, builtin_system, default_instances
from maltkit.terms import render_system


def main():
    out = Path(__file__).resolve().parent.parent / "src" / "maltkit" / "systems"
    out.mkdir(parents=True, exist_ok=True)
    for fam, args in default_instances():
        spec = builtin_system(fam, *args)
        path = out / (builtin_label(fam, *args) + ".mlt")
        path.write_text(render_system(spec))
        print(path.name)


if __name__ == "__main__":
    main()
