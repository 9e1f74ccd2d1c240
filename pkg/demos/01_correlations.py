# coding: utf-8

# # Sliding-window correlations between co-driven sensors
#
# Four simulated channels share one drive signal and differ by an offset plus
# their own noise. Whole-run correlation tells us which pairs are worth
# modelling; the sliding version is what the models actually see.

import numpy as np

from corrfdd import find_correlated_pairs, generate_nominal, median_filter, sliding_correlations
from corrfdd.simeval import FaultLabel, inject_fault

matrix = generate_nominal(n_sensors=4, n_samples=3000, seed=1)
print(matrix.sensor_ids, matrix.values.shape)


# Every pair clears the default threshold of 0.5.

pairs = find_correlated_pairs(matrix, kappa=0.5)
print(sorted(pairs))


# With a window of k = 100 samples a nominal pair stays close to 1. The first
# value needs the first 100 samples, so there are n - k + 1 of them.

c1, c4 = median_filter(matrix.channel("c1"), 5), median_filter(matrix.channel("c4"), 5)
corr = sliding_correlations(c1, c4, 100)
print(len(corr), corr.values.min().round(3), corr.values.mean().round(3))


# Now cut c4 off at sample 1500. A held value has zero variance, and the
# modified coefficient maps "one side constant" to 0 instead of dividing by zero.

broken = inject_fault(matrix, FaultLabel("c4", 1500, 3000))
corr_broken = sliding_correlations(median_filter(broken.channel("c1"), 5),
                                   median_filter(broken.channel("c4"), 5), 100)
print("before:", corr_broken.values[:1300].mean().round(3))
print("after :", corr_broken.values[1500:].mean().round(3))
print("first exactly-zero window ends at sample", int(np.argmax(corr_broken.values == 0)) + 99)
