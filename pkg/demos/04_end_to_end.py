# coding: utf-8

# # Disconnect two wheels, detect, diagnose, score
#
# Train on one fault-free run, then monitor a second run in which c4 and later
# c3 stop reporting. This takes about half a minute, mostly RBM training.
# Set MODEL_TYPE = "gmm" to swap in the mixture model.

import json
import tempfile
from pathlib import Path

from corrfdd import cli
from corrfdd.config import PipelineConfig
from corrfdd.signals import write_csv
from corrfdd.simeval import FaultLabel, generate_nominal, inject_fault, write_labels

MODEL_TYPE = "rbm"
work = Path(tempfile.mkdtemp(prefix="corrfdd_"))

faults = [FaultLabel("c4", 4000, 8000), FaultLabel("c3", 5500, 8000)]
test = generate_nominal(4, 10000, seed=2)
for lab in faults:
    test = inject_fault(test, lab)
write_csv(generate_nominal(4, 10000, seed=1), work / "train.csv")
write_csv(test, work / "test.csv")
write_labels(faults, work / "labels.json")


# Training writes one JSON model per correlated pair plus a manifest.

config = PipelineConfig(seed=7, model_type=MODEL_TYPE)
cli.cmd_train(work / "train.csv", config, work / "bundle")
print(json.loads((work / "bundle" / "manifest.json").read_text())["pairs"])


# Monitoring returns 3 when it diagnoses something.

code = cli.cmd_monitor(work / "test.csv", work / "bundle", work / "monitor")
print("exit code", code)
print(json.loads((work / "monitor" / "diagnosis.json").read_text()))


# Scoring counts alarms per time step over all pairs, with a grace of k samples
# around each fault interval.

_, report = cli.cmd_evaluate(work / "monitor", work / "labels.json", work / "test.csv", config.effective_grace)
print(report)
print("outputs in", work)
