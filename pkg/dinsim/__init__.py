"""Default insurance note simulator: return curves, clawback calibration, lien ledger."""

__version__ = "0.1.0"
