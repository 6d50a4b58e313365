"""wattwise: explainable energy-saving recommendations with a desk-scale
office simulator and a live human-in-the-loop session service."""

__version__ = "0.1.0"
