"""komigo: small-board Go with a sigmoid winrate model and komi-branching self-play."""

__version__ = "0.1.0"
