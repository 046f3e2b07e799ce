"""
Numerical checks of the predictive identities
=============================================

Each line states one identity, the computed value and the tolerance.
"""

from decisionuq.app import verify_theorems
from decisionuq.rng import RngStream

for item in verify_theorems(RngStream(0), predictive_draws=1_000_000):
    print(item.line())
