"""Lower bounds on feedback-assisted entanglement and quantum capacities of the depolarizing channel."""

__version__ = "0.1.0"
