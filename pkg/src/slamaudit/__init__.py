"""Knowledge-tracing trainers and fairness audits for SLAM exercise data."""

__version__ = "0.1.0"
