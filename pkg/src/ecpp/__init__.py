"""Multi-view contrastive learning with combinatorial positive pairing."""

__version__ = "0.1.0"
