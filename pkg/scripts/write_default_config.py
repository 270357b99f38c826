"""Write the default experiment config, listing every default explicitly."""

import argparse

from screenkit.experiments import ExperimentConfig, dump_config

HEADER = """\
# screenkit experiment config.  Every key below is a default; delete any
# key to fall back to it.  data.source is "synthetic" or "files"; for files
# give data.files as [{path: ..., year: ...}] and a completed codebook.
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("path", nargs="?", default="configs/default.yaml")
    args = ap.parse_args()
    with open(args.path, "w") as fh:
        fh.write(HEADER + dump_config(ExperimentConfig()))
    print(f"wrote {args.path}")


if __name__ == "__main__":
    main()
