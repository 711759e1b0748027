from fractions import Fraction

APP_NAME = "Forcing Number Toolkit"
VERSION = "1.0.0"

REPORT_SCHEMA_VERSION = 1
CERTIFICATE_SCHEMA_VERSION = 1

SETTINGS_FILE = "data/settings.json"
FIXTURES_FOLDER = "data/fixtures"

# Exit-code contract of the command line
EXIT_OK = 0
EXIT_PARSE_ERROR = 2
EXIT_PRECONDITION = 3
EXIT_VERIFICATION_FAILED = 4
EXIT_BUDGET_TRUNCATED = 5

# c = 3/4 gives s = 4/5 over Q, since 1 + c^2 = 25/16
DEFAULT_LIFT_PARAMETER = Fraction(3, 4)

DEFAULT_SETTINGS = {
    "log_level": "INFO",
    "log_file": "",
    "jobs": 1,
    "seed": 2024,
    "matching_cap": 0,  # 0 = unlimited
    "cross_check_primes": [101, 103],
    "random_search": {
        "prime": 101,
        "trials": 200,
    },
    "verify_suite": {
        "k_values": [2, 3, 4, 5, 6, 7],
        "property_cases": 1000,
        "rank_cases": 200,
        "monotonicity_cases": 100,
    },
}
