#!/usr/bin/env python3
"""Generate kernels realizing prescribed coefficient sign patterns and print
the verification summary for each (achieved epsilon, inversion residual,
membership of the associated backward shift).

Usage: python scripts/sign_pattern_gallery.py [--n 512] [patterns ...]
"""

import argparse
import sys

from herop.conditions import SignPattern, generate_sign_pattern_kernel
from herop.operators import shift_membership_backward

DEFAULT_PATTERNS = ["+-", "--", "+-+-+", "++", "+--+", "-+-+-+"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("patterns", nargs="*", default=DEFAULT_PATTERNS)
    parser.add_argument("--n", type=int, default=512)
    parser.add_argument("--eps", type=float, default=1e-3)
    args = parser.parse_args()

    print(f"{'pattern':>10} {'verdict':>8} {'halvings':>8} {'epsilon':>10} "
          f"{'residual':>10} {'member':>7}")
    failures = 0
    for text in args.patterns:
        pattern = SignPattern.from_string(text, epsilon=args.eps)
        pair, report = generate_sign_pattern_kernel(pattern, args.n)
        membership = shift_membership_backward(pair.alpha, pair.k)
        ok = report.verdict.value == "Holds" and membership.member
        failures += int(not ok)
        print(
            f"{text:>10} {report.verdict.value:>8} "
            f"{report.witness['halvings']:>8} "
            f"{report.witness['achieved_epsilon']:>10.2e} "
            f"{pair.inversion_residual:>10.2e} {str(membership.member):>7}"
        )
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
