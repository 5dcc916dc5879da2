# coding: utf-8

# # Cyclical versus noncyclical updates
#
# Cyclical boosting updates every parameter in turn, so after m iterations
# it has made k*m updates. Noncyclical boosting makes one update per
# iteration. Here we compare both on the same budget of total updates.

import numpy as np

from distboost import BoostConfig, fit, generate, make_scenario

data, _ = generate(make_scenario("Conv", n=500, seed=4))

runs = {
    "cyclical": BoostConfig("normal", "cyclical", mstop=(300, 300)),
    "inner": BoostConfig("normal", "inner", mstop=600),
    "outer": BoostConfig("normal", "outer", mstop=600),
}

# Risk after every single update, offset first.

traces = {}
for name, cfg in runs.items():
    s = fit(cfg, data)
    traces[name] = np.array([s.risk_trace[0]] + [u.risk for u in s.path])

for t in (0, 10, 50, 100, 300, 600):
    print(t, *(f"{name}={tr[t]:.2f}" for name, tr in traces.items()))

# The two noncyclical variants choose a parameter the same way, they only
# differ in how each parameter's candidate learner is picked.

print("max |inner - outer|:", np.abs(traces["inner"] - traces["outer"]).max())
