"""Group-testing hypothesis tests: COMP and weight decision rules, error exponents."""

__version__ = "0.1.0"
