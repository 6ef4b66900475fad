"""Safe Bayesian optimization with a scenario-based RKHS norm over-estimate."""

__version__ = "0.1.0"
