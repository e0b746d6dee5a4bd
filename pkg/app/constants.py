# app/constants.py

PROJECT_NAME = "gui-backtrack-sim"

# Wire protocol spoken by remote policies
PROTOCOL_VERSION = "beap/1"
POLICY_PATH = "/v1/policy"

# Episode defaults
DEFAULT_MAX_STEPS = 50
DEFAULT_MAX_BACKTRACK_RETRIES = 3
DEFAULT_SNAPSHOT_WINDOW = 10

# World generation defaults
DEFAULT_IRREVERSIBLE_FRACTION = 0.3
DEFAULT_DETECTION_DEPTH = 2
MAX_WORLD_PAGES = 512

# Remote policy defaults
DEFAULT_POLICY_TIMEOUT_SECONDS = 30.0
DEFAULT_POLICY_MAX_IN_FLIGHT = 4
DEFAULT_TRAJECTORY_TAIL = 20

# Harness defaults
DEFAULT_MAX_PARALLELISM = 32

# sha256 of the canonical serialization of an empty observation:
# {"actions":[],"elements":[],"page":"","typed":[]}
EMPTY_OBSERVATION_DIGEST = (
    "f214202f2093961ec615fa4f404338fa89d58c2c5b8e2eb011c10fd7357ca3e6"
)

# Exit codes of the command-line interface
EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_SUITE_FAILURE = 2
EXIT_REPLAY_DIVERGENCE = 3
