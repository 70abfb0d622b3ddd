"""Engine configuration flags and pipeline defaults.

Environment variables:
    ICUFORGE_LOG_LEVEL  - root log level for the CLI (default INFO)
    ICUFORGE_WORKDIR    - default working directory for run artifacts
    ICUFORGE_RUN_SLOW   - "1" enables desk-scale acceptance tests

The numeric defaults below are the reference experiment settings; a
bare invocation runs with them.
"""

import os

LOG_LEVEL = os.getenv("ICUFORGE_LOG_LEVEL", "INFO")
WORKDIR = os.getenv("ICUFORGE_WORKDIR", "runs")
RUN_SLOW = os.getenv("ICUFORGE_RUN_SLOW", "0") == "1"

# Cohort
MIN_STAY_HOURS = 12
MAX_STAY_HOURS = 240
MIN_AGE_YEARS = 15

# Windowing
LOOKBACK_HOURS = 6
GAP_HOURS = 6
HORIZON_HOURS = 4
STRIDE_HOURS = 1
SPLIT_RATIOS = (0.7, 0.1, 0.2)
STRATIFICATION_TOLERANCE = 0.02

# Topics
N_TOPICS = 50
TOPIC_BETA = 0.01
GIBBS_SWEEPS = 200
FOLD_IN_SWEEPS = 50
MIN_DOCUMENT_FREQUENCY = 5

# Physiological words
WORD_Z_CLAMP = 4

# Models
LSTM_HIDDEN = 512
LSTM_KEEP = 0.8
CNN_FILTERS = 64
CNN_WIDTHS = (3, 4, 5)
CNN_POOL = 3
CNN_FC_HIDDEN = 128
CNN_KEEP = 0.5
L2_LAMBDA = 1e-4

# Training
BATCH_SIZE = 128
LEARNING_RATE = 1e-3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8
PATIENCE = 5
MAX_EPOCHS = 50
LOG_CLAMP = 1e-12

# Interpretability
TRAJECTORY_K = 10
HALLUCINATION_STEPS = 200
HALLUCINATION_STEP_SIZE = 0.1
