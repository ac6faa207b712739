import sys
import os
import time

# Add the project root to the Python path to allow for absolute imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from rro.iterative_solver import iterative_solve
from rro.score_model import EmpiricalComplement, SupportedSet

SIZES = [125_000, 250_000, 500_000, 1_000_000]


def run_once(rng, n_total):
    """Times one exact solve with a tenth of the entries on the principal's side."""
    scores = rng.integers(1, 1_000_001, size=n_total)
    supported = SupportedSet.from_scores(scores[: n_total // 10])
    complement = EmpiricalComplement(scores[n_total // 10:])
    start = time.perf_counter()
    plan = iterative_solve(supported, complement, 1e3 * n_total, epsilon=0)
    return time.perf_counter() - start, plan


def main():
    rng = np.random.default_rng(0)
    print(f"{'entries':>10} {'seconds':>9} {'ratio':>6} {'utility':>9}")
    previous = None
    for n_total in SIZES:
        elapsed, plan = run_once(rng, n_total)
        ratio = f"{elapsed / previous:6.2f}" if previous else "     -"
        print(f"{n_total:>10} {elapsed:9.3f} {ratio} {plan.utility_after:9.4f}")
        previous = elapsed


if __name__ == "__main__":
    main()
