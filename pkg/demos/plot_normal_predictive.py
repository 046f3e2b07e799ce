"""
Predictive density of a normal sample
=====================================

Ten draws from N(10, 1); the posterior predictive under a vague prior is a
Student-t that is wider than the true density.  The curves go to a CSV.
"""

import sys

from decisionuq.app import normal_predictive_demo, write_csv
from decisionuq.rng import RngStream

out = sys.argv[1] if len(sys.argv) > 1 else "normal_predictive.csv"

demo = normal_predictive_demo(RngStream(0))
print("true 5-95% interval:      ", tuple(round(v, 3) for v in demo.true_interval))
print("predictive 5-95% interval:", tuple(round(v, 3) for v in demo.predictive_interval))
print("predictive variance >= E[var | data]:", demo.total_variance_holds())
write_csv(demo.curve_rows(), out, ["y", "true_pdf", "predictive_pdf"])
print("wrote", out)
