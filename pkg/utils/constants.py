import math

# Code
CONSTRAINT_LENGTH = 3
GENERATORS_OCTAL = (0o5, 0o7)

# Modulation (16-QAM, Gray per axis)
BITS_PER_SYMBOL = 4
QAM16_SCALE = 1.0 / math.sqrt(10.0)
GRAY_PAM4_LEVELS = {(0, 0): -3.0, (0, 1): -1.0, (1, 1): 1.0, (1, 0): 3.0}

# Channel defaults
CHANNEL_GAIN_VARIANCE = 1.0
SYMBOL_POWER = 1.0
PILOT_POWER = 1.0

# Experiment defaults
BER_SUBCARRIERS = 50
OUTAGE_SUBCARRIERS = 16
TX_ANTENNAS = 2
RX_ANTENNAS = 2
DECODING_ITERATIONS = 4
OUTAGE_PROBABILITY = 0.01
DEFAULT_PILOT_LENGTHS = (2, 4, 8)
DEFAULT_SEED = 20070415
DEFAULT_INTERLEAVER_SEED = 1

# BER stopping rule
MIN_FRAMES = 10_000
MIN_BIT_ERRORS = 100
MAX_FRAMES = 1_000_000
BATCH_FRAMES = 200

# Outage budgets
ESTIMATE_DRAWS = 300
POSTERIOR_DRAWS = 500
MIN_DRAWS = 100

# Numerics
LLR_CLAMP = 50.0
LARGE_T_THRESHOLD = 30.0
A_DENOMINATOR_EPS = 1e-14
LAMBDA_PERTURBATION = 1e-12
CF_ACCURACY = 1e-15
CF_MAX_ITERATIONS = 500
PRIOR_FLOOR = 1e-300

# Output
CSV_SIGNIFICANT_DIGITS = 9
MANIFEST_SUFFIX = ".manifest.json"
RESULT_FILENAME = "{mode}_{seed}.csv"
EBN0_CONVENTION = "Eb/N0 = P/(Rc*B*sigma_z^2), P = 1 per antenna symbol"
SNR_CONVENTION = "SNR = P*M_T/sigma_z^2"

# CLI exit codes
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3

# Sweep grids (dB)
DEFAULT_EBN0_GRID_DB = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0)
DEFAULT_SNR_GRID_DB = (0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0, 22.5, 25.0, 27.5, 30.0, 32.5, 35.0)
OUTAGE_BATCH_DRAWS = 25
CONFIDENCE_LEVEL = 0.95

# Random stream ids
BER_STREAM_ID = 1
OUTAGE_STREAM_ID = 2
RATES_POINT_STREAM_ID = 3
