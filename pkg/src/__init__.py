"""qkd-sim - Monte-Carlo simulator for phase-encoded B92 key distribution"""

__version__ = "0.1.0"
