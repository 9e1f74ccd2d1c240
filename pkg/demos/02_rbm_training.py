# coding: utf-8

# # Learning the nominal correlation distribution with an RBM
#
# Each model input is a window of s = 10 consecutive correlations, rescaled to
# [0, 1]. An RBM with 20 hidden units is trained by CD-1 for 30 epochs.

import numpy as np

from corrfdd import generate_nominal, normalize, sliding_correlations, window_stack
from corrfdd.rbm import TrainConfig, train
from corrfdd.monitor import calibrate, hellinger, observed_range
from corrfdd.signals import median_filter

m = generate_nominal(4, 6000, seed=3)
x, y = (median_filter(m.channel(s), 5) for s in ("c1", "c2"))
windows = window_stack(sliding_correlations(x, y, 100), 10)
bounds = observed_range(windows)
data = normalize(windows, bounds)
print(data.shape, bounds)


# Reconstruction error before the first epoch and after each one.

history = []
model = train(data, TrainConfig(seed=0), history=history)
print(np.round(history[::5], 5))


# Residuals are Hellinger distances between a window and its mean-field
# reconstruction. The threshold is mu + 3 sigma over the training windows.

r = hellinger(data, model.reconstruct(data))
mu, sigma, delta = calibrate(r, w=3)
print(f"mu={mu:.4f} sigma={sigma:.4f} delta={delta:.4f} exceedance={np.mean(r > delta):.3%}")


# A window of correlations pinned at 0 (one sensor frozen) lands far outside.

frozen = normalize(np.zeros(10), bounds)
print("frozen-window residual:", round(float(hellinger(frozen, model.reconstruct(frozen))), 4))
