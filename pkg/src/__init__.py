"""
RSMA-IGS optimizer
Power and impropriety allocation for two-user rate-splitting multiple access
with improper Gaussian signaling under imperfect successive interference cancellation.
"""

__version__ = "1.0.0"
