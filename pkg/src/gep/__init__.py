"""Group evolution prediction on temporal interaction networks.

Stages: ingest a timestamped edge stream, cut it into time windows, build a
snapshot graph per window, detect communities, track their evolution
events, assemble evolution chains, describe each chain with structural
features, and learn to predict the next event.
"""

__version__ = "0.1.0"
