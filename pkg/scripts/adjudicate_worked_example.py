import sys
import os

# Add the project root to the Python path to allow for absolute imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from rro.iterative_solver import iterative_solve
from rro.oracle import oracle_solve, sign_sum_utility
from rro.score_model import EmpiricalComplement, SupportedSet

SUPPORTED = [10, 15, 40, 114]
READINGS = {
    "200": [10, 24, 35, 60, 80, 100, 200, 220],
    "120": [10, 24, 35, 60, 80, 100, 120, 220],
}
BUDGETS = [91, 136, 150, 181]


def adjudicate(label, complement_scores, budget):
    """
    Solves one reading of the worked example with both solvers and prints
    how their plans compare.
    """
    supported = SupportedSet.from_scores(SUPPORTED)
    complement = EmpiricalComplement(complement_scores)

    plan = iterative_solve(supported, complement, budget, epsilon=0)
    reference = oracle_solve(supported, complement, budget)
    exact = sign_sum_utility(plan.assignments.scores, complement.scores)

    print(f"\n--- Complement reading with {label}, budget {budget} ---")
    print(f"Iterative plan:  {', '.join(f'{a:g}->{b:g}' for a, b in plan.assignments.pairs())}")
    print(f"  budget used {plan.budget_used:g} of {budget}, utility {exact}")
    print(f"Oracle utility:  {reference.best_utility} over {reference.explored} assignments")
    for candidate in reference.best_plans:
        print(f"  {', '.join(f'{a:g}->{b:g}' for a, b in candidate.pairs())} (cost {candidate.cost:g})")

    if exact == reference.best_utility:
        print("Result: the iterative plan is optimal for this reading.")
        return True
    print("Result: the iterative plan falls short of the oracle.")
    return False


if __name__ == "__main__":
    outcomes = [
        adjudicate(label, scores, budget)
        for label, scores in READINGS.items()
        for budget in BUDGETS
    ]
    sys.exit(0 if all(outcomes) else 1)
