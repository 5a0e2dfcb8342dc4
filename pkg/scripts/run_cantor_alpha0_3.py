"""Run the bundled 'cantor-alpha0.3' scenario and write its CSV files to results/cantor-alpha0.3."""
import argparse
import sys

from dirichlet_lab.scenarios import bundled, run


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", default="results/cantor-alpha0.3")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--tol", type=float, default=None, help="relative quadrature tolerance")
    args = p.parse_args()
    result = run(bundled("cantor-alpha0.3"), args.out_dir, args.threads, args.tol, log=print)
    print(result.summary())
    for path in result.artifacts:
        print(f"wrote {path}")
    return result.status


if __name__ == "__main__":
    sys.exit(main())
