# coding: utf-8

# # Boosting a location-scale model
#
# We simulate data where both the mean and the standard deviation of a
# normal response depend on covariates, then let component-wise boosting
# find out which covariate belongs to which parameter.

import numpy as np

from distboost import BoostConfig, fit, generate, make_scenario, predict_params

# Six uniform covariates. The mean uses x1..x4, log(sd) uses x3..x6.

data, truth = generate(make_scenario("Conv", n=500, seed=1))
print(data.X.shape, sorted(truth))

# The default method updates one parameter per iteration, picked by how much
# its best learner lowers the negative log-likelihood.

state = fit(BoostConfig("normal", "inner", mstop=1500), data)
print("risk:", state.risk_trace[0], "->", state.risk_trace[-1])
print("updates per parameter:", state.update_counts())

# Slopes are stored as a parameters x covariates matrix.

np.set_printoptions(precision=2, suppress=True)
print(state.slopes())

# Predictions come back on the response scale, so sigma is positive.

mu, sigma = predict_params(state, data.X[:5])
print(mu)
print(sigma)
