"""Print the exact polynomial conservation laws for each problem and check the reference rows."""

import argparse

from ffmfg.entropy import in_span, polynomial_entropy_basis
from ffmfg.tables import PROBLEM_KEYS, REFERENCE_LAWS, pde_for, reference_entropies


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degree", type=int, default=6)
    args = ap.parse_args()
    for key in PROBLEM_KEYS:
        basis = polynomial_entropy_basis(pde_for(key), args.degree)
        print(f"\n{key}: {len(basis)} laws up to degree {args.degree}")
        for E in sorted(basis, key=lambda e: e.degree):
            print(f"  {E.degree}  {E}")
        if key in REFERENCE_LAWS:
            rows = reference_entropies(key)
            ok = sum(in_span(E, basis) for d, E in rows if d <= args.degree)
            print(f"  reference rows in span: {ok}/{sum(d <= args.degree for d, _ in rows)}")


if __name__ == "__main__":
    main()
