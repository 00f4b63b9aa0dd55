"""Two-period pension choice: what a matched third pillar does to spending.

Solves the household problem with and without the voluntary matched pillar,
reports the expenditure uplift, and sweeps wages and match generosity.
"""

import dataclasses

import numpy as np

from povkit import (OlgParams, comparative_statics, expenditure_uplift,
                    numeric_oracle, solve_no_tpps, solve_with_tpps)


def reference_params():
    # stylized wage-100 household facing a 20% payroll deduction
    return OlgParams(
        wage=100.0, tax_rate=0.2, time_preference=0.05, interest_rate=0.03,
        pillar1_contrib=5.0, pillar1_return=0.05,
        pillar2_contrib=0.0, pillar2_return=0.0,
        pillar3_contrib=5.0, pillar3_return=0.05,
        subsidy_rate=0.01, pooled_benefit=2.0,
    )


def main():
    p = reference_params()
    base = solve_no_tpps(p)
    topped = solve_with_tpps(p)
    print(f"young-age expenditure, no voluntary pillar:   {base.expenditure_young:.4f}")
    print(f"young-age expenditure, with matched pillar:   {topped.expenditure_young:.4f}")
    print(f"uplift: {expenditure_uplift(p):.4%}")

    check = numeric_oracle(p, "with_tpps").expenditure_young
    print(f"closed form vs numeric solver gap: "
          f"{abs(topped.expenditure_young - check):.2e}")

    print("\nuplift shrinks as wages grow (fixed contribution amounts):")
    for wage in (50.0, 100.0, 200.0, 400.0):
        q = dataclasses.replace(p, wage=wage)
        print(f"  wage {wage:6.0f}  uplift {expenditure_uplift(q):.4%}")

    print("\nuplift rises with the match rate:")
    for s in np.linspace(0.0, 0.10, 6):
        q = dataclasses.replace(p, subsidy_rate=float(s))
        print(f"  match {s:4.2f}  uplift {expenditure_uplift(q):.4%}")

    table = comparative_statics(p, "pooled_benefit",
                                np.linspace(0.0, 10.0, 5))
    print("\npooled benefit sweep:")
    print(table.to_string(index=False))


if __name__ == "__main__":
    main()
